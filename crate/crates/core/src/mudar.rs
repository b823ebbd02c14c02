//! MUDAR: explore the whole reachable network first, allocate afterwards.
//!
//! The contenders are the explored non-winners whose reported value is among
//! the `m` highest in `A`. Each winner records the `(m+1)`-th highest value
//! in `A` at its selection. After exploration the `m` highest-valued
//! reachable buyers receive the items at their recorded price; every other
//! winner is paid the difference between its reported value and that price.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::error::{AuctionError, Result};
use crate::explorer::{explore, ExplorationRule, ExplorationState, ExplorationTrace, Scorer};
use crate::mechanism::{Mechanism, MechanismRun, Outcome};
use crate::mudan::{key, ValueKey};
use crate::network::{AgentId, AuctionInstance, ProfileGraph, ReportVector};
use crate::strategies::PriorityStrategy;

struct MudarRule {
    m: usize,
    pool: BTreeSet<ValueKey>,
}

impl ExplorationRule for MudarRule {
    fn admit(&mut self, agent: AgentId, value: f64) {
        self.pool.insert(key(agent, value));
    }

    fn contenders(&self, state: &ExplorationState) -> Vec<AgentId> {
        self.pool
            .iter()
            .take(self.m)
            .map(|&(_, a)| a)
            .filter(|&a| !state.is_winner(a))
            .collect()
    }

    fn tentative_payment(&self, _: AgentId, _: &ExplorationState) -> f64 {
        self.pool.iter().nth(self.m).map_or(0.0, |(v, _)| v.0 .0)
    }

    fn record_winner(&mut self, _: AgentId) {}
}

/// Winners split into item receivers and reward receivers.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MudarPartition {
    pub allocated: Vec<AgentId>,
    pub rewarded: Vec<AgentId>,
}

#[derive(Debug, Clone)]
pub struct MudarRun {
    pub outcome: Outcome,
    pub partition: MudarPartition,
    pub trace: ExplorationTrace,
    pub state: ExplorationState,
}

/// MUDAR on an already built profile graph.
pub fn run_mudar_on(graph: &ProfileGraph, scorer: &mut dyn Scorer) -> Result<MudarRun> {
    let mut rule = MudarRule {
        m: graph.m(),
        pool: BTreeSet::new(),
    };
    let (state, trace) = explore(graph, &mut rule, scorer)?;

    let top: BTreeSet<ValueKey> = graph.reachable().map(|a| key(a, graph.valuation(a))).collect();
    let mut allocated: Vec<AgentId> = top.iter().take(graph.m()).map(|&(_, a)| a).collect();
    allocated.sort_unstable();
    if let Some(missing) = allocated.iter().find(|&&a| !state.is_winner(a)) {
        return Err(AuctionError::ContractViolation(format!(
            "top-valued buyer {missing} never became a winner"
        )));
    }

    let mut outcome = Outcome::empty(graph.n());
    let mut rewarded = Vec::new();
    for (&w, &p) in state.winners().iter().zip(state.tentative_payments()) {
        if allocated.binary_search(&w).is_ok() {
            outcome.allocation[w.0] = true;
            outcome.payment[w.0] = p;
        } else {
            outcome.payment[w.0] = p - graph.valuation(w);
            rewarded.push(w);
        }
    }
    rewarded.sort_unstable();
    Ok(MudarRun {
        outcome,
        partition: MudarPartition { allocated, rewarded },
        trace,
        state,
    })
}

pub fn run_mudar(
    instance: &AuctionInstance,
    reports: &ReportVector,
    strategy: &PriorityStrategy,
) -> Result<MudarRun> {
    let graph = ProfileGraph::build(instance, reports)?;
    let mut scorer = strategy.scorer(&graph);
    run_mudar_on(&graph, &mut *scorer)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Mudar {
    pub strategy: PriorityStrategy,
}

impl Mudar {
    pub fn new(strategy: PriorityStrategy) -> Self {
        Mudar { strategy }
    }
}

impl Mechanism for Mudar {
    fn name(&self) -> String {
        format!("mudar/{}", self.strategy)
    }

    fn run(&self, instance: &AuctionInstance, reports: &ReportVector) -> Result<MechanismRun> {
        let run = run_mudar(instance, reports, &self.strategy)?;
        Ok(MechanismRun {
            outcome: run.outcome,
            last_winner: run.state.winners().last().copied(),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::{self, SevenBuyer::*};
    use crate::mechanism::compute_metrics;
    use crate::network::Profile;

    fn ids(v: &[crate::fixtures::SevenBuyer]) -> Vec<AgentId> {
        v.iter().map(|b| b.id()).collect()
    }

    #[test]
    fn seven_buyer_tree_partition_and_payments() {
        let inst = fixtures::seven_buyer_tree(4);
        let run = run_mudar(&inst, &ReportVector::truthful(&inst), &PriorityStrategy::Degree).unwrap();
        assert_eq!(run.trace.winners(), ids(&[B, C, E, F, D, G]));
        assert_eq!(run.partition.allocated, ids(&[D, E, F, G]));
        assert_eq!(run.partition.rewarded, ids(&[B, C]));
        let pay = |b: crate::fixtures::SevenBuyer| run.outcome.payment[b.id().0];
        assert_eq!((pay(B), pay(C), pay(E), pay(F), pay(D), pay(G)), (-1.0, -1.0, 1.0, 1.0, 3.0, 3.0));
        assert_eq!(pay(A), 0.0);
        assert_eq!(
            run.trace.increments(),
            vec![ids(&[A, B]), ids(&[C]), ids(&[D, E]), ids(&[F]), ids(&[G]), vec![]]
        );
        let m = compute_metrics(&inst, &run.outcome);
        assert_eq!(m.revenue, 6.0);
        assert_eq!(m.social_welfare, m.sw_opt);
    }

    #[test]
    fn single_buyer() {
        let inst = AuctionInstance::new(1, [AgentId(0)], vec![Profile::new(4.0, [])]).unwrap();
        let run = run_mudar(&inst, &ReportVector::truthful(&inst), &PriorityStrategy::Degree).unwrap();
        assert_eq!(run.partition.allocated, vec![AgentId(0)]);
        assert!(run.partition.rewarded.is_empty());
        assert_eq!(run.outcome.payment, vec![0.0]);
    }

    #[test]
    fn two_star_second_price() {
        let inst = AuctionInstance::new(
            1,
            [AgentId(0), AgentId(1)],
            vec![Profile::new(5.0, []), Profile::new(7.0, [])],
        )
        .unwrap();
        let run = run_mudar(&inst, &ReportVector::truthful(&inst), &PriorityStrategy::Degree).unwrap();
        assert_eq!(run.partition.allocated, vec![AgentId(1)]);
        assert_eq!(run.outcome.payment[1], 5.0);
        assert_eq!(run.trace.winners(), vec![AgentId(1)]);
    }
}
