//! Brute-force property checks on small instances.
//!
//! [`best_deviation`] enumerates one buyer's misreports (a value from a
//! [`ValueGrid`] combined with every subset of its true neighbors) with all
//! other reports fixed, and returns the most profitable one. Outcomes of the
//! implemented mechanisms only change when a bid crosses another bid, so a
//! grid holding every other bid plus and minus half a unit is exhaustive on
//! integer-valued instances.
//!
//! [`check_static`] evaluates the remaining properties (rationality, budget,
//! allocation and welfare) on a single truthful run. [`run_suite`] and
//! [`run_multi_suite`] apply both to many random instances in parallel.

use std::collections::BTreeMap;
use std::fmt;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{AuctionError, Result};
use crate::mechanism::{compute_metrics, sw_wopt_in, Mechanism, MechanismRun};
use crate::multidemand::{multi_metrics, MultiInstance, MultiMechanism, MultiProfile, MultiReport, MultiReports, MultiRun};
use crate::network::{AgentId, AuctionInstance, Profile, ProfileGraph, Report, ReportVector};

pub const TOLERANCE: f64 = 1e-9;
pub const DEFAULT_DELTA: f64 = 0.5;
/// Neighbor sets up to this size are enumerated in full.
pub const SUBSET_CAP: usize = 12;

/// Candidate reported values, sorted ascending without duplicates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValueGrid {
    values: Vec<f64>,
}

impl ValueGrid {
    pub fn new(values: impl IntoIterator<Item = f64>) -> Result<Self> {
        let mut values: Vec<f64> = values.into_iter().filter(|v| v.is_finite() && *v >= 0.0).collect();
        values.sort_unstable_by(f64::total_cmp);
        values.dedup();
        if values.is_empty() {
            return Err(AuctionError::EmptyGrid);
        }
        Ok(ValueGrid { values })
    }

    /// `0` and every anchor, each also shifted by `+-delta` (clamped at 0).
    pub fn around(anchors: impl IntoIterator<Item = f64>, delta: f64) -> Self {
        let mut v = vec![0.0];
        for a in anchors {
            v.extend([a, a - delta, a + delta]);
        }
        let v = v.into_iter().map(|x| x.max(0.0));
        ValueGrid::new(v).expect("grid contains zero")
    }

    /// Grid for `agent`: its true value and every other buyer's report.
    pub fn for_agent(instance: &AuctionInstance, reports: &ReportVector, agent: AgentId, delta: f64) -> Self {
        let others = instance
            .agents()
            .filter(|&j| j != agent)
            .map(|j| reports.get(j).valuation);
        ValueGrid::around(std::iter::once(instance.valuation(agent)).chain(others), delta)
    }

    /// Grid for a multi-demand `agent`: its true slot values and every slot
    /// value reported by the others.
    pub fn for_multi_agent(instance: &MultiInstance, reports: &MultiReports, agent: AgentId, delta: f64) -> Self {
        let own = instance.profile(agent).valuations.clone();
        let others: Vec<f64> = instance
            .agents()
            .filter(|&j| j != agent)
            .flat_map(|j| reports.get(j).valuations.clone())
            .collect();
        ValueGrid::around(own.into_iter().chain(others), delta)
    }

    /// `0, step, 2*step, ...` up to and including `max`.
    pub fn exhaustive(max: f64, step: f64) -> Result<Self> {
        if !(step > 0.0) || !(max >= 0.0) {
            return Err(AuctionError::InvalidParameter("bad exhaustive grid".into()));
        }
        let k = (max / step).floor() as usize;
        ValueGrid::new((0..=k).map(|i| i as f64 * step))
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// Which misreported values are checked.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum DeviationMode {
    Full,
    /// Only values up to the true value or at least `mu`.
    MuBounded(f64),
    /// As `MuBounded` but without reports exactly at `mu` from buyers valued
    /// below it. Such a report ties the `mu` holder, and when the id
    /// tie-break goes against the deviator it stays rewarded at the inflated
    /// bid.
    MuBoundedOpen(f64),
}

impl DeviationMode {
    pub fn admits(&self, truth: f64, reported: f64) -> bool {
        match *self {
            DeviationMode::Full => true,
            DeviationMode::MuBounded(mu) => reported <= truth || reported >= mu,
            DeviationMode::MuBoundedOpen(mu) => reported <= truth || reported > mu,
        }
    }

    fn admits_vector(&self, truth: &[f64], reported: &[f64]) -> bool {
        truth.iter().zip(reported).all(|(&t, &r)| self.admits(t, r))
    }
}

/// `m`-th highest of `values`, 0 when there are fewer than `m`.
pub fn mth_highest(values: impl IntoIterator<Item = f64>, m: usize) -> f64 {
    let mut v: Vec<f64> = values.into_iter().collect();
    v.sort_unstable_by(|a, b| b.total_cmp(a));
    if m == 0 {
        return f64::INFINITY;
    }
    v.get(m - 1).copied().unwrap_or(0.0)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Deviation {
    /// One entry for single-demand buyers.
    pub valuations: Vec<f64>,
    pub neighbors: Vec<AgentId>,
}

impl fmt::Display for Deviation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let ns: Vec<String> = self.neighbors.iter().map(|a| a.to_string()).collect();
        write!(f, "values={:?} neighbors={{{}}}", self.valuations, ns.join(","))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Pass,
    Violation,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeviationReport {
    pub agent: AgentId,
    /// Most profitable admissible misreport found.
    pub deviation: Deviation,
    pub truthful_utility: f64,
    pub deviating_utility: f64,
    pub verdict: Verdict,
    /// Number of misreports evaluated.
    pub evaluated: usize,
}

impl DeviationReport {
    fn new(agent: AgentId, deviation: Deviation, truthful: f64, best: f64, evaluated: usize) -> Self {
        let verdict = if best > truthful + TOLERANCE {
            Verdict::Violation
        } else {
            Verdict::Pass
        };
        DeviationReport {
            agent,
            deviation,
            truthful_utility: truthful,
            deviating_utility: best,
            verdict,
            evaluated,
        }
    }

    pub fn gain(&self) -> f64 {
        self.deviating_utility - self.truthful_utility
    }

    /// Re-runs the witness; returns the deviating utility.
    pub fn replay(&self, mech: &dyn Mechanism, instance: &AuctionInstance, base: &ReportVector) -> Result<f64> {
        let r = Report::new(self.deviation.valuations[0], self.deviation.neighbors.iter().copied());
        utility(mech, instance, &base.with(self.agent, r), self.agent)
    }

    pub fn replay_multi(
        &self,
        mech: &dyn MultiMechanism,
        instance: &MultiInstance,
        base: &MultiReports,
    ) -> Result<f64> {
        let r = MultiReport::new(self.deviation.valuations.clone(), self.deviation.neighbors.iter().copied());
        multi_utility(mech, instance, &base.with(self.agent, r), self.agent)
    }
}

fn utility(mech: &dyn Mechanism, instance: &AuctionInstance, reports: &ReportVector, agent: AgentId) -> Result<f64> {
    let run = mech.run(instance, reports)?;
    let won = if run.outcome.allocation[agent.0] { 1.0 } else { 0.0 };
    Ok(instance.valuation(agent) * won - run.outcome.payment[agent.0])
}

fn run_utility(instance: &MultiInstance, run: &MultiRun, agent: AgentId) -> f64 {
    let v = &instance.profile(agent).valuations;
    let value: f64 = (0..instance.m())
        .filter(|&j| run.outcome.allocation[agent.0][j])
        .map(|j| v[j])
        .sum();
    value - run.outcome.total_payment(agent)
}

fn multi_utility(
    mech: &dyn MultiMechanism,
    instance: &MultiInstance,
    reports: &MultiReports,
    agent: AgentId,
) -> Result<f64> {
    let run = mech.run(instance, reports)?;
    Ok(run_utility(instance, &run, agent))
}

/// All subsets of `neighbors` when it is small, otherwise a deterministic
/// sample that always includes the full and the empty set.
pub fn neighbor_subsets(neighbors: &[AgentId], seed: u64) -> Vec<Vec<AgentId>> {
    let k = neighbors.len();
    if k <= SUBSET_CAP {
        return (0u32..(1u32 << k))
            .map(|mask| {
                neighbors
                    .iter()
                    .enumerate()
                    .filter(|(b, _)| mask & (1 << b) != 0)
                    .map(|(_, &a)| a)
                    .collect()
            })
            .collect();
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = vec![Vec::new(), neighbors.to_vec()];
    for _ in 0..(1usize << SUBSET_CAP) - 2 {
        out.push(neighbors.iter().copied().filter(|_| rng.gen_bool(0.5)).collect());
    }
    out
}

/// Most profitable misreport of `agent` against the other entries of `base`.
/// The agent's own entry in `base` is ignored; its truthful utility is
/// measured with its true profile.
pub fn best_deviation(
    mech: &dyn Mechanism,
    instance: &AuctionInstance,
    base: &ReportVector,
    agent: AgentId,
    grid: &ValueGrid,
    mode: DeviationMode,
) -> Result<DeviationReport> {
    if grid.is_empty() {
        return Err(AuctionError::EmptyGrid);
    }
    let profile = instance.profile(agent);
    let truth = profile.valuation;
    let base = base.with(agent, Report::truthful(profile));
    let truthful = utility(mech, instance, &base, agent)?;

    let mut best = (truthful, Deviation {
        valuations: vec![truth],
        neighbors: profile.neighbors.clone(),
    });
    let mut evaluated = 0;
    for subset in neighbor_subsets(&profile.neighbors, agent.0 as u64) {
        for &v in grid.values() {
            if !mode.admits(truth, v) {
                continue;
            }
            evaluated += 1;
            let r = Report::new(v, subset.iter().copied());
            let u = utility(mech, instance, &base.with(agent, r), agent)?;
            if u > best.0 {
                best = (u, Deviation {
                    valuations: vec![v],
                    neighbors: subset.clone(),
                });
            }
        }
    }
    Ok(DeviationReport::new(agent, best.1, truthful, best.0, evaluated))
}

/// Non-increasing vectors of length `m` over `grid` (ascending).
fn monotone_vectors(grid: &[f64], m: usize) -> Vec<Vec<f64>> {
    fn rec(asc: &[f64], m: usize, upto: usize, cur: &mut Vec<f64>, out: &mut Vec<Vec<f64>>) {
        if cur.len() == m {
            out.push(cur.clone());
            return;
        }
        for k in (0..upto).rev() {
            cur.push(asc[k]);
            rec(asc, m, k + 1, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(grid, m, grid.len(), &mut Vec::new(), &mut out);
    out
}

/// Multi-demand counterpart of [`best_deviation`]: a misreport is a full
/// value vector plus a neighbor subset. In bounded mode every slot must be
/// admissible on its own.
pub fn best_multi_deviation(
    mech: &dyn MultiMechanism,
    instance: &MultiInstance,
    base: &MultiReports,
    agent: AgentId,
    grid: &ValueGrid,
    mode: DeviationMode,
) -> Result<DeviationReport> {
    if grid.is_empty() {
        return Err(AuctionError::EmptyGrid);
    }
    let profile = instance.profile(agent);
    let base = base.with(agent, MultiReport::truthful(profile));
    let truthful = multi_utility(mech, instance, &base, agent)?;
    let mut best = (truthful, Deviation {
        valuations: profile.valuations.clone(),
        neighbors: profile.neighbors.clone(),
    });
    let vectors: Vec<Vec<f64>> = monotone_vectors(grid.values(), instance.m())
        .into_iter()
        .filter(|v| mode.admits_vector(&profile.valuations, v))
        .collect();
    let mut evaluated = 0;
    for subset in neighbor_subsets(&profile.neighbors, agent.0 as u64) {
        for v in &vectors {
            evaluated += 1;
            let r = MultiReport::new(v.clone(), subset.iter().copied());
            let u = multi_utility(mech, instance, &base.with(agent, r), agent)?;
            if u > best.0 {
                best = (u, Deviation {
                    valuations: v.clone(),
                    neighbors: subset.clone(),
                });
            }
        }
    }
    Ok(DeviationReport::new(agent, best.1, truthful, best.0, evaluated))
}

/// Properties of a single run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StaticReport {
    /// Every utility is non-negative.
    pub ir: bool,
    /// Revenue is non-negative.
    pub nd: bool,
    /// Every payment is non-negative.
    pub no_reward: bool,
    /// `min(m, reachable)` items are allocated.
    pub nw: bool,
    /// Welfare equals the optimum.
    pub efficient: bool,
    pub social_welfare: f64,
    pub revenue: f64,
    pub sw_opt: f64,
    pub allocated: usize,
    pub reachable: usize,
    /// Optimum among buyers not cut off by the last winner.
    pub sw_wopt: Option<f64>,
    /// `social_welfare / sw_wopt`; 1 when both are zero.
    pub weak_eff_ratio: Option<f64>,
}

impl StaticReport {
    /// `SW >= eps * sw_wopt`, vacuous without a last winner.
    pub fn weakly_efficient(&self, eps: f64) -> bool {
        self.sw_wopt
            .map_or(true, |w| self.social_welfare + TOLERANCE >= eps * w)
    }
}

fn ratio(sw: f64, wopt: f64) -> f64 {
    if wopt.abs() <= TOLERANCE {
        if sw.abs() <= TOLERANCE {
            1.0
        } else {
            f64::INFINITY
        }
    } else {
        sw / wopt
    }
}

/// Evaluates an existing run.
pub fn check_run(instance: &AuctionInstance, reports: &ReportVector, run: &MechanismRun) -> Result<StaticReport> {
    let graph = ProfileGraph::build(instance, reports)?;
    let metrics = compute_metrics(instance, &run.outcome);
    let allocated = run.outcome.allocated_count();
    let reachable = graph.reachable_count();
    let sw_wopt = match run.last_winner {
        Some(w) => Some(sw_wopt_in(instance, &graph, w)?),
        None => None,
    };
    Ok(StaticReport {
        ir: metrics.utilities.iter().all(|u| *u >= -TOLERANCE),
        nd: metrics.revenue >= -TOLERANCE,
        no_reward: run.outcome.payment.iter().all(|p| *p >= -TOLERANCE),
        nw: allocated == instance.m().min(reachable),
        efficient: (metrics.social_welfare - metrics.sw_opt).abs() <= TOLERANCE,
        social_welfare: metrics.social_welfare,
        revenue: metrics.revenue,
        sw_opt: metrics.sw_opt,
        allocated,
        reachable,
        weak_eff_ratio: sw_wopt.map(|w| ratio(metrics.social_welfare, w)),
        sw_wopt,
    })
}

pub fn check_static(mech: &dyn Mechanism, instance: &AuctionInstance, reports: &ReportVector) -> Result<StaticReport> {
    let run = mech.run(instance, reports)?;
    check_run(instance, reports, &run)
}

/// Multi-demand counterpart of [`check_static`]. Weak efficiency is measured
/// on the reduced graph.
pub fn check_static_multi(
    mech: &dyn MultiMechanism,
    instance: &MultiInstance,
    reports: &MultiReports,
) -> Result<StaticReport> {
    let run = mech.run(instance, reports)?;
    let metrics = multi_metrics(instance, &run.outcome);
    let graph = ProfileGraph::build(&run.reduced_instance, &run.reduced_reports)?;
    let reachable = graph.reachable_count();
    let sw_wopt = run.sw_wopt()?;
    Ok(StaticReport {
        ir: metrics.utilities.iter().all(|u| *u >= -TOLERANCE),
        nd: metrics.revenue >= -TOLERANCE,
        no_reward: run.outcome.payment.iter().flatten().all(|p| *p >= -TOLERANCE),
        nw: metrics.allocated == instance.m().min(reachable),
        efficient: (metrics.social_welfare - metrics.sw_opt).abs() <= TOLERANCE,
        social_welfare: metrics.social_welfare,
        revenue: metrics.revenue,
        sw_opt: metrics.sw_opt,
        allocated: metrics.allocated,
        reachable,
        weak_eff_ratio: sw_wopt.map(|w| ratio(metrics.social_welfare, w)),
        sw_wopt,
    })
}

/// Shape of random test instances.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InstanceParams {
    pub n_max: usize,
    pub m_max: usize,
    /// Values are integers in `0..=value_ceiling`.
    pub value_ceiling: u32,
    /// Probability of each extra edge.
    pub edge_prob: f64,
}

impl Default for InstanceParams {
    fn default() -> Self {
        InstanceParams {
            n_max: 7,
            m_max: 3,
            value_ceiling: 9,
            edge_prob: 0.3,
        }
    }
}

/// Random seller-rooted network: `(m, seller neighbors, neighbor sets)`.
fn random_network<R: Rng + ?Sized>(params: &InstanceParams, rng: &mut R) -> (usize, usize, Vec<AgentId>, Vec<Vec<AgentId>>) {
    let n = rng.gen_range(1..=params.n_max.max(1));
    let m = rng.gen_range(1..=params.m_max.max(1));
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(rng);
    let mut seller = Vec::new();
    let mut out: Vec<Vec<AgentId>> = vec![Vec::new(); n];
    // Every buyer gets one edge from the seller or an earlier buyer.
    for (pos, &b) in order.iter().enumerate() {
        let from = rng.gen_range(0..=pos);
        if from == 0 {
            seller.push(AgentId(b));
        } else {
            out[order[from - 1]].push(AgentId(b));
        }
    }
    for v in 0..n {
        if rng.gen_bool(params.edge_prob) {
            seller.push(AgentId(v));
        }
        for (u, list) in out.iter_mut().enumerate() {
            if u != v && rng.gen_bool(params.edge_prob) {
                list.push(AgentId(v));
            }
        }
    }
    (n, m, seller, out)
}

pub fn random_instance<R: Rng + ?Sized>(params: &InstanceParams, rng: &mut R) -> AuctionInstance {
    let (n, m, seller, out) = random_network(params, rng);
    let profiles = (0..n)
        .map(|i| Profile::new(rng.gen_range(0..=params.value_ceiling) as f64, out[i].iter().copied()))
        .collect();
    AuctionInstance::new(m, seller, profiles).expect("generated instance is valid")
}

pub fn random_multi_instance<R: Rng + ?Sized>(params: &InstanceParams, rng: &mut R) -> MultiInstance {
    let (n, m, seller, out) = random_network(params, rng);
    let profiles = (0..n)
        .map(|i| {
            let mut v: Vec<f64> = (0..m).map(|_| rng.gen_range(0..=params.value_ceiling) as f64).collect();
            v.sort_unstable_by(|a, b| b.total_cmp(a));
            MultiProfile::new(v, out[i].iter().copied())
        })
        .collect();
    MultiInstance::new(m, seller, profiles).expect("generated instance is valid")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Property {
    Ic,
    Ir,
    Nd,
    NoReward,
    Nw,
    Efficiency,
    WeakEfficiency,
}

impl fmt::Display for Property {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Property::Ic => "ic",
            Property::Ir => "ir",
            Property::Nd => "nd",
            Property::NoReward => "no_reward",
            Property::Nw => "nw",
            Property::Efficiency => "efficiency",
            Property::WeakEfficiency => "weak_efficiency",
        };
        f.write_str(s)
    }
}

/// How the suite checks incentive compatibility.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum IcCheck {
    Full,
    /// Bound at the `m`-th highest true (slot) value.
    MuBounded,
    /// Same bound, reports exactly at it excluded.
    MuBoundedOpen,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteConfig {
    pub instances: usize,
    pub params: InstanceParams,
    pub seed: u64,
    /// Extra deviation searches against randomly misreporting opponents.
    pub spot_checks: usize,
    pub ic: IcCheck,
    pub delta: f64,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        SuiteConfig {
            instances: 1000,
            params: InstanceParams::default(),
            seed: 0,
            spot_checks: 10,
            ic: IcCheck::Full,
            delta: DEFAULT_DELTA,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Finding {
    pub instance: usize,
    pub property: Property,
    pub detail: String,
}

/// Failure counts per property. Which properties matter depends on the
/// mechanism; the suite evaluates all of them.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct SuiteReport {
    pub instances: usize,
    pub deviations: usize,
    pub failures: BTreeMap<Property, usize>,
    /// First few findings per property.
    pub findings: Vec<Finding>,
    /// Smallest `m * SW / sw_wopt` seen.
    pub min_scaled_weak_ratio: Option<f64>,
}

impl SuiteReport {
    pub fn count(&self, p: Property) -> usize {
        self.failures.get(&p).copied().unwrap_or(0)
    }

    fn merge(&mut self, other: InstanceResult) {
        self.instances += 1;
        self.deviations += other.deviations;
        for f in other.findings {
            let c = self.failures.entry(f.property).or_insert(0);
            *c += 1;
            if *c <= 3 {
                self.findings.push(f);
            }
        }
        if let Some(r) = other.scaled_weak_ratio {
            self.min_scaled_weak_ratio = Some(self.min_scaled_weak_ratio.map_or(r, |m| m.min(r)));
        }
    }
}

struct InstanceResult {
    deviations: usize,
    findings: Vec<Finding>,
    scaled_weak_ratio: Option<f64>,
}

fn instance_rng(seed: u64, index: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index as u64);
    rng
}

fn static_findings(index: usize, m: usize, s: &StaticReport, findings: &mut Vec<Finding>) -> Option<f64> {
    let mut push = |p: Property, ok: bool, detail: String| {
        if !ok {
            findings.push(Finding {
                instance: index,
                property: p,
                detail,
            });
        }
    };
    push(Property::Ir, s.ir, "negative truthful utility".into());
    push(Property::Nd, s.nd, format!("revenue {}", s.revenue));
    push(Property::NoReward, s.no_reward, "negative payment".into());
    push(
        Property::Nw,
        s.nw,
        format!("allocated {} with {} reachable", s.allocated, s.reachable),
    );
    push(
        Property::Efficiency,
        s.efficient,
        format!("SW {} vs optimum {}", s.social_welfare, s.sw_opt),
    );
    let eps = 1.0 / m as f64;
    push(
        Property::WeakEfficiency,
        s.weakly_efficient(eps),
        format!("SW {} vs restricted optimum {:?}", s.social_welfare, s.sw_wopt),
    );
    s.weak_eff_ratio.map(|r| r * m as f64)
}

fn ic_finding(index: usize, rep: &DeviationReport, context: &str) -> Option<Finding> {
    (rep.verdict == Verdict::Violation).then(|| Finding {
        instance: index,
        property: Property::Ic,
        detail: format!(
            "{context}agent {} gains {} with {}",
            rep.agent,
            rep.gain(),
            rep.deviation
        ),
    })
}

fn random_report<R: Rng + ?Sized>(profile: &Profile, ceiling: u32, rng: &mut R) -> Report {
    let v = rng.gen_range(0..=2 * ceiling) as f64 / 2.0;
    Report::new(v, profile.neighbors.iter().copied().filter(|_| rng.gen_bool(0.7)))
}

fn check_single_instance(mech: &dyn Mechanism, cfg: &SuiteConfig, index: usize) -> Result<InstanceResult> {
    let mut rng = instance_rng(cfg.seed, index);
    let inst = random_instance(&cfg.params, &mut rng);
    let truthful = ReportVector::truthful(&inst);
    let mut findings = Vec::new();
    let mut deviations = 0;

    let s = check_static(mech, &inst, &truthful)?;
    let scaled = static_findings(index, inst.m(), &s, &mut findings);

    let true_mu = mth_highest(inst.profiles().iter().map(|p| p.valuation), inst.m());
    let mode_for = |mu: f64| match cfg.ic {
        IcCheck::Full => DeviationMode::Full,
        IcCheck::MuBounded => DeviationMode::MuBounded(mu),
        IcCheck::MuBoundedOpen => DeviationMode::MuBoundedOpen(mu),
    };
    for agent in inst.agents() {
        let grid = ValueGrid::for_agent(&inst, &truthful, agent, cfg.delta);
        let rep = best_deviation(mech, &inst, &truthful, agent, &grid, mode_for(true_mu))?;
        deviations += rep.evaluated;
        findings.extend(ic_finding(index, &rep, ""));
    }

    for _ in 0..cfg.spot_checks {
        let agent = AgentId(rng.gen_range(0..inst.n()));
        let base = ReportVector::new(
            inst.agents()
                .map(|j| {
                    if j == agent {
                        Report::truthful(inst.profile(j))
                    } else {
                        random_report(inst.profile(j), cfg.params.value_ceiling, &mut rng)
                    }
                })
                .collect(),
        );
        let reported_mu = mth_highest(
            inst.agents().map(|j| {
                if j == agent {
                    inst.valuation(j)
                } else {
                    base.get(j).valuation
                }
            }),
            inst.m(),
        );
        let grid = ValueGrid::for_agent(&inst, &base, agent, cfg.delta);
        let rep = best_deviation(mech, &inst, &base, agent, &grid, mode_for(true_mu.max(reported_mu)))?;
        deviations += rep.evaluated;
        findings.extend(ic_finding(index, &rep, "misreporting opponents: "));
    }
    Ok(InstanceResult {
        deviations,
        findings,
        scaled_weak_ratio: scaled,
    })
}

fn random_multi_report<R: Rng + ?Sized>(profile: &MultiProfile, ceiling: u32, rng: &mut R) -> MultiReport {
    let mut v: Vec<f64> = profile
        .valuations
        .iter()
        .map(|_| rng.gen_range(0..=2 * ceiling) as f64 / 2.0)
        .collect();
    v.sort_unstable_by(|a, b| b.total_cmp(a));
    MultiReport::new(v, profile.neighbors.iter().copied().filter(|_| rng.gen_bool(0.7)))
}

fn check_multi_instance(mech: &dyn MultiMechanism, cfg: &SuiteConfig, index: usize) -> Result<InstanceResult> {
    let mut rng = instance_rng(cfg.seed, index);
    let inst = random_multi_instance(&cfg.params, &mut rng);
    let truthful = MultiReports::truthful(&inst);
    let mut findings = Vec::new();
    let mut deviations = 0;

    let s = check_static_multi(mech, &inst, &truthful)?;
    let scaled = static_findings(index, inst.m(), &s, &mut findings);

    let all_slots = |reports: &MultiReports, agent: Option<AgentId>| -> Vec<f64> {
        inst.agents()
            .flat_map(|j| {
                if Some(j) == agent || agent.is_none() {
                    inst.profile(j).valuations.clone()
                } else {
                    reports.get(j).valuations.clone()
                }
            })
            .collect()
    };
    let true_mu = mth_highest(all_slots(&truthful, None), inst.m());
    let mode_for = |mu: f64| match cfg.ic {
        IcCheck::Full => DeviationMode::Full,
        IcCheck::MuBounded => DeviationMode::MuBounded(mu),
        IcCheck::MuBoundedOpen => DeviationMode::MuBoundedOpen(mu),
    };
    for agent in inst.agents() {
        let grid = ValueGrid::for_multi_agent(&inst, &truthful, agent, cfg.delta);
        let rep = best_multi_deviation(mech, &inst, &truthful, agent, &grid, mode_for(true_mu))?;
        deviations += rep.evaluated;
        findings.extend(ic_finding(index, &rep, ""));
    }
    for _ in 0..cfg.spot_checks {
        let agent = AgentId(rng.gen_range(0..inst.n()));
        let base = MultiReports::new(
            inst.agents()
                .map(|j| {
                    if j == agent {
                        MultiReport::truthful(inst.profile(j))
                    } else {
                        random_multi_report(inst.profile(j), cfg.params.value_ceiling, &mut rng)
                    }
                })
                .collect(),
        );
        let reported_mu = mth_highest(all_slots(&base, Some(agent)), inst.m());
        let grid = ValueGrid::for_multi_agent(&inst, &base, agent, cfg.delta);
        let rep = best_multi_deviation(mech, &inst, &base, agent, &grid, mode_for(true_mu.max(reported_mu)))?;
        deviations += rep.evaluated;
        findings.extend(ic_finding(index, &rep, "misreporting opponents: "));
    }
    Ok(InstanceResult {
        deviations,
        findings,
        scaled_weak_ratio: scaled,
    })
}

fn collect(results: Vec<Result<InstanceResult>>) -> Result<SuiteReport> {
    let mut report = SuiteReport::default();
    for r in results {
        report.merge(r?);
    }
    Ok(report)
}

/// Runs every check on `cfg.instances` random single-demand instances.
/// Instance `k` is drawn from stream `k` of a generator seeded with
/// `cfg.seed`, so results do not depend on scheduling.
pub fn run_suite(mech: &dyn Mechanism, cfg: &SuiteConfig) -> Result<SuiteReport> {
    let results: Vec<Result<InstanceResult>> = (0..cfg.instances)
        .into_par_iter()
        .map(|k| check_single_instance(mech, cfg, k))
        .collect();
    collect(results)
}

/// Multi-demand counterpart of [`run_suite`].
pub fn run_multi_suite(mech: &dyn MultiMechanism, cfg: &SuiteConfig) -> Result<SuiteReport> {
    let results: Vec<Result<InstanceResult>> = (0..cfg.instances)
        .into_par_iter()
        .map(|k| check_multi_instance(mech, cfg, k))
        .collect();
    collect(results)
}

/// The instance a suite generates at `index`.
pub fn suite_instance(cfg: &SuiteConfig, index: usize) -> AuctionInstance {
    random_instance(&cfg.params, &mut instance_rng(cfg.seed, index))
}

pub fn suite_multi_instance(cfg: &SuiteConfig, index: usize) -> MultiInstance {
    random_multi_instance(&cfg.params, &mut instance_rng(cfg.seed, index))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_contents() {
        let g = ValueGrid::around([3.0, 1.0], 0.5);
        assert_eq!(g.values(), &[0.0, 0.5, 1.0, 1.5, 2.5, 3.0, 3.5]);
        assert_eq!(ValueGrid::new([]).unwrap_err(), AuctionError::EmptyGrid);
    }

    #[test]
    fn monotone_vector_enumeration() {
        let v = monotone_vectors(&[0.0, 1.0, 2.0], 2);
        assert_eq!(v.len(), 6);
        assert!(v.iter().all(|x| x[0] >= x[1]));
        assert!(v.contains(&vec![2.0, 0.0]));
        assert!(v.contains(&vec![1.0, 1.0]));
    }

    #[test]
    fn subsets_enumerated_in_full_when_small() {
        let n: Vec<AgentId> = (0..3).map(AgentId).collect();
        assert_eq!(neighbor_subsets(&n, 0).len(), 8);
        let big: Vec<AgentId> = (0..14).map(AgentId).collect();
        let s = neighbor_subsets(&big, 0);
        assert_eq!(s.len(), 1 << SUBSET_CAP);
        assert!(s.contains(&Vec::new()) && s.contains(&big));
    }

    #[test]
    fn mu_bounded_admission() {
        let mode = DeviationMode::MuBounded(5.0);
        assert!(mode.admits(3.0, 2.0));
        assert!(mode.admits(3.0, 3.0));
        assert!(!mode.admits(3.0, 4.0));
        assert!(mode.admits(3.0, 5.0));
        assert!(mode.admits(7.0, 8.0));
        let open = DeviationMode::MuBoundedOpen(5.0);
        assert!(!open.admits(3.0, 5.0));
        assert!(open.admits(3.0, 5.5));
        assert!(open.admits(5.0, 5.0));
    }

    #[test]
    fn single_buyer_params() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let p = InstanceParams {
            n_max: 1,
            ..Default::default()
        };
        for _ in 0..20 {
            let inst = random_instance(&p, &mut rng);
            assert_eq!(inst.n(), 1);
            assert_eq!(inst.seller_neighbors(), &[AgentId(0)]);
        }
    }
}
