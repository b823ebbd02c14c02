//! DNA-MU: a distance-ordered multi-unit diffusion auction.
//!
//! Buyers are visited by increasing hop distance from the seller. A buyer
//! wins if its reported value beats the `m'`-th highest value among the
//! non-winners outside its critical subtree, and pays that threshold. The
//! mechanism is not truthful: hiding neighbors can lower a buyer's
//! threshold.

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::mechanism::{Mechanism, MechanismRun, Outcome};
use crate::network::{critical_tree, distances, AgentId, AuctionInstance, ProfileGraph, ReportVector};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum WinComparator {
    /// Win iff value > threshold.
    #[default]
    Strict,
    /// Win iff value >= threshold.
    Weak,
}

impl WinComparator {
    fn wins(self, value: f64, threshold: f64) -> bool {
        match self {
            WinComparator::Strict => value > threshold,
            WinComparator::Weak => value >= threshold,
        }
    }
}

#[derive(Debug, Clone)]
pub struct DnaMuRun {
    pub outcome: Outcome,
    /// Winners in visiting order.
    pub winners: Vec<AgentId>,
}

pub fn run_dnamu(
    instance: &AuctionInstance,
    reports: &ReportVector,
    comparator: WinComparator,
) -> Result<DnaMuRun> {
    let graph = ProfileGraph::build(instance, reports)?;
    Ok(run_dnamu_on(&graph, comparator))
}

pub fn run_dnamu_on(graph: &ProfileGraph, comparator: WinComparator) -> DnaMuRun {
    let n = graph.n();
    let tree = critical_tree(graph);
    let dist = distances(graph);
    let mut order: Vec<AgentId> = graph.reachable().collect();
    order.sort_by_key(|a| (dist[a.0], *a));

    let mut remaining = graph.m();
    let mut won = vec![false; n];
    let mut winners = Vec::new();
    let mut outcome = Outcome::empty(n);
    let mut in_subtree = vec![false; n];
    for i in order {
        if remaining == 0 {
            break;
        }
        let sub = tree.subtree(i);
        for a in &sub {
            in_subtree[a.0] = true;
        }
        let mut others: Vec<f64> = graph
            .reachable()
            .filter(|a| !in_subtree[a.0] && !won[a.0])
            .map(|a| graph.valuation(a))
            .collect();
        for a in &sub {
            in_subtree[a.0] = false;
        }
        others.sort_unstable_by(|x, y| y.total_cmp(x));
        let threshold = others.get(remaining - 1).copied().unwrap_or(0.0);
        if comparator.wins(graph.valuation(i), threshold) {
            won[i.0] = true;
            winners.push(i);
            outcome.allocation[i.0] = true;
            outcome.payment[i.0] = threshold;
            remaining -= 1;
        }
    }
    DnaMuRun { outcome, winners }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct DnaMu {
    pub comparator: WinComparator,
}

impl Mechanism for DnaMu {
    fn name(&self) -> String {
        match self.comparator {
            WinComparator::Strict => "dnamu".into(),
            WinComparator::Weak => "dnamu/weak".into(),
        }
    }

    fn run(&self, instance: &AuctionInstance, reports: &ReportVector) -> Result<MechanismRun> {
        let run = run_dnamu(instance, reports, self.comparator)?;
        Ok(MechanismRun {
            last_winner: run.winners.last().copied(),
            outcome: run.outcome,
        })
    }
}
