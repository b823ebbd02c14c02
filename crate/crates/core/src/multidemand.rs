//! Multi-demand buyers via the chain reduction.
//!
//! A buyer `i` wanting up to `m` units with marginal values
//! `v_{i,1} >= ... >= v_{i,m}` is replaced by a chain of single-demand
//! buyers `i_1 -> ... -> i_m`, where `i_j` carries `v_{i,j}`. The seller
//! links to `i_1` iff it links to `i`, and `i_m` links to `k_1` iff `i`
//! reports `k`. The reduced id of `i_j` is `i * m + (j - 1)`.
//!
//! Every `i_j` gets the priority of its owner `i`, computed on the
//! multi-demand graph.

use serde::{Deserialize, Serialize};

use crate::error::{AuctionError, Result};
use crate::explorer::{ExplorationState, ExplorationTrace, Scorer};
use crate::mechanism::{compute_metrics, sw_wopt_in, top_sum, Metrics, Outcome};
use crate::mudan::run_mudan_on;
use crate::mudar::run_mudar_on;
use crate::network::{distances, AgentId, AuctionInstance, Profile, ProfileGraph, Report, ReportVector};
use crate::strategies::PriorityStrategy;

fn check_vector(agent: AgentId, values: &[f64], m: usize) -> Result<Vec<f64>> {
    if values.len() > m {
        return Err(AuctionError::InvalidInstance(format!(
            "buyer {agent} has {} values for {m} items",
            values.len()
        )));
    }
    for &v in values {
        if !(v.is_finite() && v >= 0.0) {
            return Err(AuctionError::InvalidValuation { agent, value: v });
        }
    }
    if values.windows(2).any(|w| w[0] < w[1]) {
        return Err(AuctionError::NonMonotoneValuation { agent });
    }
    let mut out = values.to_vec();
    out.resize(m, 0.0);
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MultiProfile {
    /// Non-increasing marginal values, zero-padded to `m`.
    pub valuations: Vec<f64>,
    pub neighbors: Vec<AgentId>,
}

impl MultiProfile {
    pub fn new(valuations: Vec<f64>, neighbors: impl IntoIterator<Item = AgentId>) -> Self {
        let p = Profile::new(0.0, neighbors);
        MultiProfile {
            valuations,
            neighbors: p.neighbors,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MultiInstance {
    profiles: Vec<MultiProfile>,
    /// Same network, top values only; carries the structural validation.
    skeleton: AuctionInstance,
}

impl MultiInstance {
    pub fn new(
        m: usize,
        seller_neighbors: impl IntoIterator<Item = AgentId>,
        profiles: Vec<MultiProfile>,
    ) -> Result<Self> {
        let mut profiles = profiles;
        for (i, p) in profiles.iter_mut().enumerate() {
            p.valuations = check_vector(AgentId(i), &p.valuations, m.max(1))?;
        }
        let skeleton = AuctionInstance::new(
            m,
            seller_neighbors,
            profiles
                .iter()
                .map(|p| Profile::new(p.valuations[0], p.neighbors.iter().copied()))
                .collect(),
        )?;
        for (p, s) in profiles.iter_mut().zip(skeleton.profiles()) {
            p.neighbors = s.neighbors.clone();
        }
        Ok(MultiInstance { profiles, skeleton })
    }

    pub fn n(&self) -> usize {
        self.profiles.len()
    }

    pub fn m(&self) -> usize {
        self.skeleton.m()
    }

    pub fn seller_neighbors(&self) -> &[AgentId] {
        self.skeleton.seller_neighbors()
    }

    pub fn profiles(&self) -> &[MultiProfile] {
        &self.profiles
    }

    pub fn profile(&self, agent: AgentId) -> &MultiProfile {
        &self.profiles[agent.0]
    }

    pub fn agents(&self) -> impl Iterator<Item = AgentId> {
        (0..self.n()).map(AgentId)
    }

    /// The single-demand network with each buyer's top value.
    pub fn skeleton(&self) -> &AuctionInstance {
        &self.skeleton
    }

    /// Sum of the `m` highest slot values over all buyers.
    pub fn sw_opt(&self) -> f64 {
        top_sum(self.profiles.iter().flat_map(|p| p.valuations.iter().copied()), self.m())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MultiReport {
    pub valuations: Vec<f64>,
    pub neighbors: Vec<AgentId>,
    pub silent: bool,
}

impl MultiReport {
    pub fn new(valuations: Vec<f64>, neighbors: impl IntoIterator<Item = AgentId>) -> Self {
        let r = Report::new(0.0, neighbors);
        MultiReport {
            valuations,
            neighbors: r.neighbors,
            silent: false,
        }
    }

    pub fn truthful(profile: &MultiProfile) -> Self {
        MultiReport {
            valuations: profile.valuations.clone(),
            neighbors: profile.neighbors.clone(),
            silent: false,
        }
    }

    pub fn silent() -> Self {
        MultiReport {
            valuations: Vec::new(),
            neighbors: Vec::new(),
            silent: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MultiReports {
    entries: Vec<MultiReport>,
}

impl MultiReports {
    pub fn new(entries: Vec<MultiReport>) -> Self {
        MultiReports { entries }
    }

    pub fn truthful(instance: &MultiInstance) -> Self {
        MultiReports {
            entries: instance.profiles().iter().map(MultiReport::truthful).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn get(&self, agent: AgentId) -> &MultiReport {
        &self.entries[agent.0]
    }

    pub fn set(&mut self, agent: AgentId, report: MultiReport) {
        self.entries[agent.0] = report;
    }

    pub fn with(&self, agent: AgentId, report: MultiReport) -> Self {
        let mut out = self.clone();
        out.set(agent, report);
        out
    }

    pub fn iter(&self) -> impl Iterator<Item = &MultiReport> {
        self.entries.iter()
    }
}

/// Bijection between `(buyer, slot)` pairs and reduced ids. Slots are
/// 0-based here.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReductionMap {
    pub n: usize,
    pub m: usize,
}

impl ReductionMap {
    pub fn forward(&self, buyer: AgentId, slot: usize) -> AgentId {
        debug_assert!(buyer.0 < self.n && slot < self.m);
        AgentId(buyer.0 * self.m + slot)
    }

    pub fn backward(&self, reduced: AgentId) -> (AgentId, usize) {
        (AgentId(reduced.0 / self.m), reduced.0 % self.m)
    }

    pub fn len(&self) -> usize {
        self.n * self.m
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Per-buyer, per-slot allocation and payment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MultiOutcome {
    pub allocation: Vec<Vec<bool>>,
    pub payment: Vec<Vec<f64>>,
}

impl MultiOutcome {
    pub fn lift(outcome: &Outcome, map: &ReductionMap) -> Self {
        let mut allocation = vec![vec![false; map.m]; map.n];
        let mut payment = vec![vec![0.0; map.m]; map.n];
        for r in 0..map.len() {
            let (i, j) = map.backward(AgentId(r));
            allocation[i.0][j] = outcome.allocation[r];
            payment[i.0][j] = outcome.payment[r];
        }
        MultiOutcome { allocation, payment }
    }

    pub fn items_of(&self, buyer: AgentId) -> usize {
        self.allocation[buyer.0].iter().filter(|a| **a).count()
    }

    pub fn allocated_count(&self) -> usize {
        self.allocation.iter().flatten().filter(|a| **a).count()
    }

    pub fn total_payment(&self, buyer: AgentId) -> f64 {
        self.payment[buyer.0].iter().sum()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MultiMetrics {
    pub utilities: Vec<f64>,
    pub social_welfare: f64,
    pub revenue: f64,
    pub sw_opt: f64,
    pub allocated: usize,
}

/// Metrics with true marginal values.
pub fn multi_metrics(instance: &MultiInstance, outcome: &MultiOutcome) -> MultiMetrics {
    let mut utilities = Vec::with_capacity(instance.n());
    let mut sw = 0.0;
    let mut rv = 0.0;
    for i in instance.agents() {
        let v = &instance.profile(i).valuations;
        let value: f64 = (0..instance.m())
            .filter(|&j| outcome.allocation[i.0][j])
            .map(|j| v[j])
            .sum();
        let paid = outcome.total_payment(i);
        sw += value;
        rv += paid;
        utilities.push(value - paid);
    }
    MultiMetrics {
        utilities,
        social_welfare: sw,
        revenue: rv,
        sw_opt: instance.sw_opt(),
        allocated: outcome.allocated_count(),
    }
}

/// Reduced single-demand instance, its reports and the id map.
pub fn reduce_instance(
    instance: &MultiInstance,
    reports: &MultiReports,
) -> Result<(AuctionInstance, ReportVector, ReductionMap)> {
    let n = instance.n();
    let m = instance.m();
    if reports.len() != n {
        return Err(AuctionError::ReportLength {
            expected: n,
            got: reports.len(),
        });
    }
    let map = ReductionMap { n, m };

    let mut true_profiles = Vec::with_capacity(n * m);
    let mut reduced_reports = Vec::with_capacity(n * m);
    for i in instance.agents() {
        let p = instance.profile(i);
        let r = reports.get(i);
        let reported = if r.silent {
            vec![0.0; m]
        } else {
            check_vector(i, &r.valuations, m)?
        };
        for &k in &r.neighbors {
            if k.0 >= n {
                return Err(AuctionError::MalformedReport { agent: i, neighbor: k.0 });
            }
            if p.neighbors.binary_search(&k).is_err() {
                return Err(AuctionError::NeighborNotOwned { agent: i, neighbor: k });
            }
        }
        for j in 0..m {
            let (true_out, reported_out): (Vec<AgentId>, Vec<AgentId>) = if j + 1 < m {
                let next = map.forward(i, j + 1);
                (vec![next], vec![next])
            } else {
                let reported_nb = if r.silent { &[][..] } else { &r.neighbors[..] };
                (
                    p.neighbors.iter().map(|&k| map.forward(k, 0)).collect(),
                    reported_nb.iter().map(|&k| map.forward(k, 0)).collect(),
                )
            };
            true_profiles.push(Profile::new(p.valuations[j], true_out));
            reduced_reports.push(Report::new(reported[j], reported_out));
        }
    }
    let seller = instance.seller_neighbors().iter().map(|&i| map.forward(i, 0));
    let reduced = AuctionInstance::new(m, seller, true_profiles)?;
    Ok((reduced, ReportVector::new(reduced_reports), map))
}

/// Effective multi-demand profile graph (top reported values only).
fn md_graph(instance: &MultiInstance, reports: &MultiReports) -> Result<ProfileGraph> {
    let skeleton_reports = ReportVector::new(
        reports
            .iter()
            .map(|r| {
                if r.silent {
                    Report::silent()
                } else {
                    Report::new(r.valuations.first().copied().unwrap_or(0.0), r.neighbors.iter().copied())
                }
            })
            .collect(),
    );
    ProfileGraph::build(instance.skeleton(), &skeleton_reports)
}

/// Scores reduced nodes with their owner's priority on the multi-demand
/// graph. An owner's score is frozen once one of its nodes wins.
pub struct ChainScorer {
    strategy: PriorityStrategy,
    map: ReductionMap,
    neighbors: Vec<Vec<AgentId>>,
    dist: Vec<Option<usize>>,
    draws: Vec<f64>,
    last: Vec<f64>,
    frozen: Vec<Option<f64>>,
}

impl ChainScorer {
    pub fn new(strategy: PriorityStrategy, md: &ProfileGraph, map: ReductionMap) -> Self {
        use rand::{Rng, SeedableRng};
        let draws = match strategy {
            PriorityStrategy::Random { seed } => {
                let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
                (0..md.n()).map(|_| rng.gen::<f64>()).collect()
            }
            _ => Vec::new(),
        };
        ChainScorer {
            strategy,
            map,
            neighbors: (0..md.n()).map(|i| md.neighbors(AgentId(i)).to_vec()).collect(),
            dist: distances(md),
            draws,
            last: vec![0.0; md.n()],
            frozen: vec![None; md.n()],
        }
    }

    fn owner_score(&self, owner: AgentId, state: &ExplorationState) -> f64 {
        let hops = || self.dist[owner.0].unwrap_or(0) as f64;
        match self.strategy {
            PriorityStrategy::Degree => self.neighbors[owner.0].len() as f64,
            PriorityStrategy::Distance => -hops(),
            PriorityStrategy::Depth => hops(),
            PriorityStrategy::NewAgent => self.neighbors[owner.0]
                .iter()
                .filter(|&&k| !state.is_explored(self.map.forward(k, 0)))
                .count() as f64,
            PriorityStrategy::Random { .. } => self.draws[owner.0],
        }
    }
}

impl Scorer for ChainScorer {
    fn score(&mut self, agent: AgentId, state: &ExplorationState, _: &ProfileGraph) -> f64 {
        let (owner, _) = self.map.backward(agent);
        if let Some(s) = self.frozen[owner.0] {
            return s;
        }
        let s = self.owner_score(owner, state);
        self.last[owner.0] = s;
        s
    }

    fn observe_winner(&mut self, winner: AgentId, _: &ExplorationState) {
        let (owner, _) = self.map.backward(winner);
        if self.frozen[owner.0].is_none() {
            self.frozen[owner.0] = Some(self.last[owner.0]);
        }
    }
}

/// A multi-demand run together with the underlying reduced run.
#[derive(Debug, Clone)]
pub struct MultiRun {
    pub outcome: MultiOutcome,
    pub map: ReductionMap,
    pub reduced_instance: AuctionInstance,
    pub reduced_reports: ReportVector,
    pub reduced_outcome: Outcome,
    pub trace: ExplorationTrace,
    /// Reduced id of the last winner.
    pub w_star: Option<AgentId>,
}

impl MultiRun {
    pub fn reduced_metrics(&self) -> Metrics {
        compute_metrics(&self.reduced_instance, &self.reduced_outcome)
    }

    /// Top-`m` slot values over reduced nodes not cut off by the reduced
    /// last winner.
    pub fn sw_wopt(&self) -> Result<Option<f64>> {
        match self.w_star {
            None => Ok(None),
            Some(w) => {
                let g = ProfileGraph::build(&self.reduced_instance, &self.reduced_reports)?;
                sw_wopt_in(&self.reduced_instance, &g, w).map(Some)
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Inner {
    Mudan,
    Mudar,
}

fn run_reduced(
    instance: &MultiInstance,
    reports: &MultiReports,
    strategy: &PriorityStrategy,
    inner: Inner,
) -> Result<MultiRun> {
    let (reduced_instance, reduced_reports, map) = reduce_instance(instance, reports)?;
    let md = md_graph(instance, reports)?;
    let graph = ProfileGraph::build(&reduced_instance, &reduced_reports)?;
    let mut scorer = ChainScorer::new(*strategy, &md, map);
    let (reduced_outcome, trace, w_star) = match inner {
        Inner::Mudan => {
            let run = run_mudan_on(&graph, &mut scorer)?;
            (run.outcome, run.trace, run.w_star)
        }
        Inner::Mudar => {
            let run = run_mudar_on(&graph, &mut scorer)?;
            let last = run.state.winners().last().copied();
            (run.outcome, run.trace, last)
        }
    };
    Ok(MultiRun {
        outcome: MultiOutcome::lift(&reduced_outcome, &map),
        map,
        reduced_instance,
        reduced_reports,
        reduced_outcome,
        trace,
        w_star,
    })
}

pub fn run_mudan_m(
    instance: &MultiInstance,
    reports: &MultiReports,
    strategy: &PriorityStrategy,
) -> Result<MultiRun> {
    run_reduced(instance, reports, strategy, Inner::Mudan)
}

pub fn run_mudar_m(
    instance: &MultiInstance,
    reports: &MultiReports,
    strategy: &PriorityStrategy,
) -> Result<MultiRun> {
    run_reduced(instance, reports, strategy, Inner::Mudar)
}

/// A multi-demand mechanism.
pub trait MultiMechanism: Sync {
    fn name(&self) -> String;

    fn run(&self, instance: &MultiInstance, reports: &MultiReports) -> Result<MultiRun>;
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MudanM {
    pub strategy: PriorityStrategy,
}

impl MultiMechanism for MudanM {
    fn name(&self) -> String {
        format!("mudan-m/{}", self.strategy)
    }

    fn run(&self, instance: &MultiInstance, reports: &MultiReports) -> Result<MultiRun> {
        run_mudan_m(instance, reports, &self.strategy)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MudarM {
    pub strategy: PriorityStrategy,
}

impl MultiMechanism for MudarM {
    fn name(&self) -> String {
        format!("mudar-m/{}", self.strategy)
    }

    fn run(&self, instance: &MultiInstance, reports: &MultiReports) -> Result<MultiRun> {
        run_mudar_m(instance, reports, &self.strategy)
    }
}
