//! MUDAN: items are allocated while the network is being explored.
//!
//! With `m'` items left, the contenders are the `m'` highest reported values
//! among explored non-winners. The winner pays the `(m'+1)`-th highest such
//! value (0 if there is none). Exploration stops once every item is gone.

use std::cmp::Reverse;
use std::collections::BTreeSet;

use ordered_float::OrderedFloat;

use crate::error::Result;
use crate::explorer::{explore, ExplorationRule, ExplorationState, ExplorationTrace, Scorer};
use crate::mechanism::{Mechanism, MechanismRun, Outcome};
use crate::network::{AgentId, AuctionInstance, ProfileGraph, ReportVector};
use crate::strategies::PriorityStrategy;

pub(crate) type ValueKey = (Reverse<OrderedFloat<f64>>, AgentId);

pub(crate) fn key(agent: AgentId, value: f64) -> ValueKey {
    (Reverse(OrderedFloat(value)), agent)
}

/// Explored non-winners ordered by (value desc, id asc).
struct MudanRule {
    remaining: usize,
    pool: BTreeSet<ValueKey>,
    values: Vec<f64>,
}

impl ExplorationRule for MudanRule {
    fn admit(&mut self, agent: AgentId, value: f64) {
        self.values[agent.0] = value;
        self.pool.insert(key(agent, value));
    }

    fn contenders(&self, _: &ExplorationState) -> Vec<AgentId> {
        self.pool.iter().take(self.remaining).map(|&(_, a)| a).collect()
    }

    fn tentative_payment(&self, _: AgentId, _: &ExplorationState) -> f64 {
        self.pool
            .iter()
            .nth(self.remaining)
            .map_or(0.0, |(Reverse(v), _)| v.0)
    }

    fn record_winner(&mut self, winner: AgentId) {
        self.pool.remove(&key(winner, self.values[winner.0]));
        self.remaining -= 1;
    }

    fn finished(&self) -> bool {
        self.remaining == 0
    }
}

#[derive(Debug, Clone)]
pub struct MudanRun {
    pub outcome: Outcome,
    pub trace: ExplorationTrace,
    /// Last winner, `None` only when nobody won.
    pub w_star: Option<AgentId>,
    pub state: ExplorationState,
}

/// MUDAN on an already built profile graph.
pub fn run_mudan_on(graph: &ProfileGraph, scorer: &mut dyn Scorer) -> Result<MudanRun> {
    let mut rule = MudanRule {
        remaining: graph.m(),
        pool: BTreeSet::new(),
        values: vec![0.0; graph.n()],
    };
    let (state, trace) = explore(graph, &mut rule, scorer)?;
    let mut outcome = Outcome::empty(graph.n());
    for (&w, &p) in state.winners().iter().zip(state.tentative_payments()) {
        outcome.allocation[w.0] = true;
        outcome.payment[w.0] = p;
    }
    Ok(MudanRun {
        outcome,
        w_star: state.winners().last().copied(),
        trace,
        state,
    })
}

pub fn run_mudan(
    instance: &AuctionInstance,
    reports: &ReportVector,
    strategy: &PriorityStrategy,
) -> Result<MudanRun> {
    let graph = ProfileGraph::build(instance, reports)?;
    let mut scorer = strategy.scorer(&graph);
    run_mudan_on(&graph, &mut *scorer)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Mudan {
    pub strategy: PriorityStrategy,
}

impl Mudan {
    pub fn new(strategy: PriorityStrategy) -> Self {
        Mudan { strategy }
    }
}

impl Mechanism for Mudan {
    fn name(&self) -> String {
        format!("mudan/{}", self.strategy)
    }

    fn run(&self, instance: &AuctionInstance, reports: &ReportVector) -> Result<MechanismRun> {
        let run = run_mudan(instance, reports, &self.strategy)?;
        Ok(MechanismRun {
            outcome: run.outcome,
            last_winner: run.w_star,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::{self, SevenBuyer::*};
    use crate::network::Profile;

    fn ids(v: &[crate::fixtures::SevenBuyer]) -> Vec<AgentId> {
        v.iter().map(|b| b.id()).collect()
    }

    #[test]
    fn seven_buyer_tree_winners_and_payments() {
        let inst = fixtures::seven_buyer_tree(4);
        let run = run_mudan(&inst, &ReportVector::truthful(&inst), &PriorityStrategy::Degree).unwrap();
        assert_eq!(run.trace.winners(), ids(&[B, C, E, F]));
        let pay: Vec<f64> = [B, C, E, F].iter().map(|b| run.outcome.payment[b.id().0]).collect();
        assert_eq!(pay, vec![0.0, 0.0, 3.0, 4.0]);
        assert_eq!(
            run.trace.increments(),
            vec![ids(&[A, B]), ids(&[C]), ids(&[D, E]), ids(&[F])]
        );
        assert_eq!(run.w_star, Some(F.id()));
    }

    #[test]
    fn integer_variant_changes_last_payment() {
        // With d valued 6 the second-highest value left at f's selection is d's.
        let inst = fixtures::seven_buyer_tree_integer(4);
        let run = run_mudan(&inst, &ReportVector::truthful(&inst), &PriorityStrategy::Degree).unwrap();
        assert_eq!(run.trace.winners(), ids(&[B, C, E, F]));
        assert_eq!(run.outcome.payment[F.id().0], 6.0);
        assert_eq!(run.outcome.payment[E.id().0], 3.0);
    }

    #[test]
    fn chain_single_item() {
        let inst = AuctionInstance::new(
            1,
            [AgentId(0)],
            vec![
                Profile::new(1.0, [AgentId(1)]),
                Profile::new(2.0, [AgentId(2)]),
                Profile::new(3.0, []),
            ],
        )
        .unwrap();
        let run = run_mudan(&inst, &ReportVector::truthful(&inst), &PriorityStrategy::Degree).unwrap();
        assert_eq!(run.outcome.allocated(), vec![AgentId(0)]);
        assert_eq!(run.outcome.payment, vec![0.0; 3]);
        assert_eq!(run.w_star, Some(AgentId(0)));
    }

    #[test]
    fn chain_two_items_explores_behind_first_winner() {
        let inst = AuctionInstance::new(
            2,
            [AgentId(0)],
            vec![Profile::new(1.0, [AgentId(1)]), Profile::new(2.0, [])],
        )
        .unwrap();
        let run = run_mudan(&inst, &ReportVector::truthful(&inst), &PriorityStrategy::Degree).unwrap();
        assert_eq!(run.outcome.allocated_count(), 2);
    }

    #[test]
    fn surplus_items_everyone_wins_free() {
        let inst = fixtures::seven_buyer_tree(10);
        let run = run_mudan(&inst, &ReportVector::truthful(&inst), &PriorityStrategy::Degree).unwrap();
        assert_eq!(run.outcome.allocated_count(), 7);
        assert!(run.outcome.payment.iter().all(|p| *p == 0.0));
    }
}
