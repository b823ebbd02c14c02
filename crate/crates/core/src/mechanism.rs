//! Mechanism interface, outcomes and welfare metrics.

use serde::{Deserialize, Serialize};

use crate::error::{AuctionError, Result};
use crate::network::{critical_tree, AgentId, AuctionInstance, ProfileGraph, ReportVector};

/// Allocation bits and signed payments (negative = reward), per buyer.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Outcome {
    pub allocation: Vec<bool>,
    pub payment: Vec<f64>,
}

impl Outcome {
    pub fn empty(n: usize) -> Self {
        Outcome {
            allocation: vec![false; n],
            payment: vec![0.0; n],
        }
    }

    pub fn n(&self) -> usize {
        self.allocation.len()
    }

    pub fn allocated_count(&self) -> usize {
        self.allocation.iter().filter(|a| **a).count()
    }

    pub fn allocated(&self) -> Vec<AgentId> {
        self.allocation
            .iter()
            .enumerate()
            .filter(|(_, a)| **a)
            .map(|(i, _)| AgentId(i))
            .collect()
    }

    pub fn revenue(&self) -> f64 {
        self.payment.iter().sum()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    /// `v_i * pi_i - p_i` with true valuations.
    pub utilities: Vec<f64>,
    pub social_welfare: f64,
    pub revenue: f64,
    /// Sum of the top-`m` true valuations.
    pub sw_opt: f64,
}

/// Sum of the `k` largest values.
pub fn top_sum(values: impl IntoIterator<Item = f64>, k: usize) -> f64 {
    let mut v: Vec<f64> = values.into_iter().collect();
    v.sort_unstable_by(|a, b| b.total_cmp(a));
    v.iter().take(k).sum()
}

pub fn compute_metrics(instance: &AuctionInstance, outcome: &Outcome) -> Metrics {
    let utilities: Vec<f64> = instance
        .agents()
        .map(|i| {
            let won = if outcome.allocation[i.0] { 1.0 } else { 0.0 };
            instance.valuation(i) * won - outcome.payment[i.0]
        })
        .collect();
    let social_welfare = instance
        .agents()
        .filter(|i| outcome.allocation[i.0])
        .map(|i| instance.valuation(i))
        .sum();
    Metrics {
        utilities,
        social_welfare,
        revenue: outcome.revenue(),
        sw_opt: top_sum(instance.profiles().iter().map(|p| p.valuation), instance.m()),
    }
}

/// Top-`m` true valuation sum over the buyers not cut off from the seller by
/// `w_star` (including `w_star` itself) in the profile graph of `reports`.
pub fn sw_wopt(instance: &AuctionInstance, w_star: AgentId, reports: &ReportVector) -> Result<f64> {
    let graph = ProfileGraph::build(instance, reports)?;
    sw_wopt_in(instance, &graph, w_star)
}

pub(crate) fn sw_wopt_in(instance: &AuctionInstance, graph: &ProfileGraph, w_star: AgentId) -> Result<f64> {
    if w_star.0 >= graph.n() {
        return Err(AuctionError::InvalidParameter(format!("unknown buyer {w_star}")));
    }
    if !graph.is_reachable(w_star) {
        return Err(AuctionError::QueryOnSilent(w_star));
    }
    let tree = critical_tree(graph);
    let values = graph
        .reachable()
        .filter(|&j| j == w_star || !tree.is_ancestor(w_star, j))
        .map(|j| instance.valuation(j));
    Ok(top_sum(values, instance.m()))
}

/// Result of one mechanism execution.
#[derive(Debug, Clone, PartialEq)]
pub struct MechanismRun {
    pub outcome: Outcome,
    /// The last selected winner, for mechanisms that have one.
    pub last_winner: Option<AgentId>,
}

/// A single-demand diffusion auction mechanism.
pub trait Mechanism: Sync {
    fn name(&self) -> String;

    fn run(&self, instance: &AuctionInstance, reports: &ReportVector) -> Result<MechanismRun>;
}
