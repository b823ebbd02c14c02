//! Mechanism selection shared by the subcommands.

use std::fmt;
use std::str::FromStr;

use anyhow::{bail, Result};
use diffusion_auction::baselines::DnaMu;
use diffusion_auction::explorer::ExplorationTrace;
use diffusion_auction::mechanism::Mechanism;
use diffusion_auction::mudan::{run_mudan, Mudan};
use diffusion_auction::mudar::{run_mudar, Mudar};
use diffusion_auction::multidemand::{multi_metrics, run_mudan_m, run_mudar_m, MultiInstance, MultiReports};
use diffusion_auction::oracle::Property;
use diffusion_auction::{compute_metrics, AgentId, PriorityStrategy, ReportVector};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MechanismKind {
    Mudan,
    Mudar,
    Dnamu,
}

impl MechanismKind {
    pub fn label(self) -> &'static str {
        match self {
            MechanismKind::Mudan => "mudan",
            MechanismKind::Mudar => "mudar",
            MechanismKind::Dnamu => "dnamu",
        }
    }

    /// Single-demand mechanism object for the oracle.
    pub fn single(self, strategy: PriorityStrategy) -> Box<dyn Mechanism> {
        match self {
            MechanismKind::Mudan => Box::new(Mudan::new(strategy)),
            MechanismKind::Mudar => Box::new(Mudar::new(strategy)),
            MechanismKind::Dnamu => Box::new(DnaMu::default()),
        }
    }

    /// Properties the mechanism is meant to satisfy; a check fails only on
    /// these.
    pub fn claimed(self) -> &'static [Property] {
        match self {
            MechanismKind::Mudan => &[
                Property::Ic,
                Property::Ir,
                Property::Nd,
                Property::NoReward,
                Property::Nw,
                Property::WeakEfficiency,
            ],
            MechanismKind::Mudar => &[Property::Ic, Property::Ir, Property::Nd, Property::Nw, Property::Efficiency],
            MechanismKind::Dnamu => &[Property::Ic, Property::Ir, Property::Nd, Property::Nw],
        }
    }
}

impl fmt::Display for MechanismKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for MechanismKind {
    type Err = anyhow::Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s.trim().to_ascii_lowercase().as_str() {
            "mudan" | "mudan-m" | "mudan_m" => MechanismKind::Mudan,
            "mudar" | "mudar-m" | "mudar_m" => MechanismKind::Mudar,
            "dnamu" | "dna-mu" | "dna_mu" => MechanismKind::Dnamu,
            other => bail!("unknown mechanism {other:?} (expected mudan, mudar or dnamu)"),
        })
    }
}

/// Whether buyers want one item (top slot only) or up to `m`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Demand {
    Single,
    Multi,
}

impl fmt::Display for Demand {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Demand::Single => "single",
            Demand::Multi => "multi",
        })
    }
}

impl FromStr for Demand {
    type Err = anyhow::Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s.trim().to_ascii_lowercase().as_str() {
            "single" => Demand::Single,
            "multi" => Demand::Multi,
            other => bail!("unknown demand {other:?} (expected single or multi)"),
        })
    }
}

/// Per-buyer result and totals of one truthful run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunResult {
    pub items: Vec<usize>,
    pub payments: Vec<f64>,
    pub social_welfare: f64,
    pub revenue: f64,
    pub sw_opt: f64,
    /// Winners in selection order, as buyer ids (slot nodes are mapped back
    /// to their owner).
    pub winners: Vec<usize>,
    /// Exploration steps as `(buyer, slot)` pairs; empty for DNA-MU.
    pub iterations: Vec<Step>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Step {
    pub explored: Vec<(usize, usize)>,
    pub winner: (usize, usize),
    pub price: f64,
}

fn steps(trace: &ExplorationTrace, slot: impl Fn(AgentId) -> (usize, usize)) -> Vec<Step> {
    trace
        .iterations
        .iter()
        .map(|it| Step {
            explored: it.increment.iter().map(|&a| slot(a)).collect(),
            winner: slot(it.winner),
            price: it.tentative_payment,
        })
        .collect()
}

/// Runs `kind` on truthful reports. Single demand uses each buyer's top
/// slot only.
pub fn run_truthful(
    kind: MechanismKind,
    strategy: PriorityStrategy,
    demand: Demand,
    inst: &MultiInstance,
) -> Result<RunResult> {
    match demand {
        Demand::Single => {
            let single = inst.skeleton();
            let reports = ReportVector::truthful(single);
            let (outcome, trace) = match kind {
                MechanismKind::Mudan => {
                    let r = run_mudan(single, &reports, &strategy)?;
                    (r.outcome, Some(r.trace))
                }
                MechanismKind::Mudar => {
                    let r = run_mudar(single, &reports, &strategy)?;
                    (r.outcome, Some(r.trace))
                }
                MechanismKind::Dnamu => (DnaMu::default().run(single, &reports)?.outcome, None),
            };
            let winners = match &trace {
                Some(t) => t.winners(),
                None => outcome.allocated(),
            };
            let metrics = compute_metrics(single, &outcome);
            Ok(RunResult {
                items: outcome.allocation.iter().map(|&a| a as usize).collect(),
                payments: outcome.payment.clone(),
                social_welfare: metrics.social_welfare,
                revenue: metrics.revenue,
                sw_opt: metrics.sw_opt,
                winners: winners.into_iter().map(|a| a.0).collect(),
                iterations: trace.map_or_else(Vec::new, |t| steps(&t, |a| (a.0, 0))),
            })
        }
        Demand::Multi => {
            let reports = MultiReports::truthful(inst);
            let run = match kind {
                MechanismKind::Mudan => run_mudan_m(inst, &reports, &strategy)?,
                MechanismKind::Mudar => run_mudar_m(inst, &reports, &strategy)?,
                MechanismKind::Dnamu => bail!("dnamu is single-demand only"),
            };
            let metrics = multi_metrics(inst, &run.outcome);
            Ok(RunResult {
                items: inst.agents().map(|i| run.outcome.items_of(i)).collect(),
                payments: inst.agents().map(|i| run.outcome.total_payment(i)).collect(),
                social_welfare: metrics.social_welfare,
                revenue: metrics.revenue,
                sw_opt: metrics.sw_opt,
                winners: run.trace.winners().into_iter().map(|w| run.map.backward(w).0 .0).collect(),
                iterations: steps(&run.trace, |a| {
                    let (i, j) = run.map.backward(a);
                    (i.0, j)
                }),
            })
        }
    }
}
