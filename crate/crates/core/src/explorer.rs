//! Generic graph-exploration engine.
//!
//! Starting from the seller's neighbors, the engine alternates between
//! expanding agents (adding their reported neighbors to the explored set
//! `A`), asking an [`ExplorationRule`] for the current contenders, and
//! selecting the highest-priority contender as the next winner.
//!
//! Terminology used below:
//!
//! * `W` – winners in selection order.
//! * `P` – potential winners, `W` plus the contenders returned by the rule.
//! * exhausted – explored agents that were left out of `P` at some update.
//!   Exhaustion is permanent.
//!
//! Winners and exhausted agents are expanded; contenders are not. Each
//! expansion pass handles the pending agents in ascending id order and is
//! followed by a fresh contender update. Passes repeat until no exhausted
//! agent is left unexpanded; only then is a winner selected, or the run ends
//! if there are no contenders.

use serde::{Deserialize, Serialize};

use crate::error::{AuctionError, Result};
use crate::network::{AgentId, ProfileGraph};

/// Bookkeeping shared between the engine, the rule and the scorer.
#[derive(Debug, Clone)]
pub struct ExplorationState {
    explored: Vec<bool>,
    explored_order: Vec<AgentId>,
    winner: Vec<bool>,
    winners: Vec<AgentId>,
    tentative: Vec<f64>,
    contender: Vec<bool>,
    exhausted: Vec<bool>,
    marked: Vec<bool>,
}

impl ExplorationState {
    fn new(n: usize) -> Self {
        ExplorationState {
            explored: vec![false; n],
            explored_order: Vec::new(),
            winner: vec![false; n],
            winners: Vec::new(),
            tentative: Vec::new(),
            contender: vec![false; n],
            exhausted: vec![false; n],
            marked: vec![false; n],
        }
    }

    pub fn is_explored(&self, agent: AgentId) -> bool {
        self.explored[agent.0]
    }

    /// `A`, in order of arrival.
    pub fn explored(&self) -> &[AgentId] {
        &self.explored_order
    }

    pub fn is_winner(&self, agent: AgentId) -> bool {
        self.winner[agent.0]
    }

    /// `W`, in selection order.
    pub fn winners(&self) -> &[AgentId] {
        &self.winners
    }

    /// Tentative payments aligned with [`winners`](Self::winners).
    pub fn tentative_payments(&self) -> &[f64] {
        &self.tentative
    }

    /// Membership in `P` as of the latest update.
    pub fn is_potential(&self, agent: AgentId) -> bool {
        self.winner[agent.0] || self.contender[agent.0]
    }

    pub fn is_exhausted(&self, agent: AgentId) -> bool {
        self.exhausted[agent.0]
    }

    pub fn is_marked(&self, agent: AgentId) -> bool {
        self.marked[agent.0]
    }
}

/// Mechanism-specific part of the exploration.
pub trait ExplorationRule {
    /// Called once for each agent when it enters `A`, with its reported value.
    fn admit(&mut self, agent: AgentId, value: f64);

    /// `P \ W` for the coming selection. Must be a subset of `A` that
    /// contains neither winners nor exhausted agents.
    fn contenders(&self, state: &ExplorationState) -> Vec<AgentId>;

    /// Price recorded for `winner` at selection time, before
    /// [`record_winner`](Self::record_winner) is called.
    fn tentative_payment(&self, winner: AgentId, state: &ExplorationState) -> f64;

    fn record_winner(&mut self, winner: AgentId);

    /// Stop right after the current selection.
    fn finished(&self) -> bool {
        false
    }
}

/// Priority of a contender; higher wins, ties go to the smaller id.
pub trait Scorer {
    fn score(&mut self, agent: AgentId, state: &ExplorationState, graph: &ProfileGraph) -> f64;

    fn observe_winner(&mut self, _winner: AgentId, _state: &ExplorationState) {}
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IterationRecord {
    /// Agents added to `A` since the previous selection.
    pub increment: Vec<AgentId>,
    /// `P \ W` at selection time, ascending.
    pub contenders: Vec<AgentId>,
    pub scores: Vec<(AgentId, f64)>,
    pub winner: AgentId,
    pub tentative_payment: f64,
    pub newly_exhausted: Vec<AgentId>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct ExplorationTrace {
    pub iterations: Vec<IterationRecord>,
    /// Agents added to `A` after the last selection.
    pub final_increment: Vec<AgentId>,
    /// Agents exhausted after the last selection.
    pub final_exhausted: Vec<AgentId>,
}

impl ExplorationTrace {
    pub fn winners(&self) -> Vec<AgentId> {
        self.iterations.iter().map(|it| it.winner).collect()
    }

    pub fn increments(&self) -> Vec<Vec<AgentId>> {
        self.iterations.iter().map(|it| it.increment.clone()).collect()
    }

    /// Final `A` reconstructed from the increments, ascending.
    pub fn explored(&self) -> Vec<AgentId> {
        let mut a: Vec<AgentId> = self
            .iterations
            .iter()
            .flat_map(|it| it.increment.iter().copied())
            .chain(self.final_increment.iter().copied())
            .collect();
        a.sort_unstable();
        a
    }
}

fn violation(msg: String) -> AuctionError {
    AuctionError::ContractViolation(msg)
}

struct Engine<'g> {
    graph: &'g ProfileGraph,
    state: ExplorationState,
    /// Explored agents that are neither winners nor exhausted.
    live: Vec<AgentId>,
    /// Winners and exhausted agents not yet expanded.
    to_expand: Vec<AgentId>,
}

impl<'g> Engine<'g> {
    fn arrive(&mut self, agent: AgentId, rule: &mut dyn ExplorationRule, inc: &mut Vec<AgentId>) {
        if self.state.explored[agent.0] {
            return;
        }
        self.state.explored[agent.0] = true;
        self.state.explored_order.push(agent);
        self.live.push(agent);
        rule.admit(agent, self.graph.valuation(agent));
        inc.push(agent);
    }

    fn expand(&mut self, rule: &mut dyn ExplorationRule, inc: &mut Vec<AgentId>) {
        let mut batch = std::mem::take(&mut self.to_expand);
        batch.sort_unstable();
        batch.dedup();
        for agent in batch {
            if self.state.marked[agent.0] {
                continue;
            }
            self.state.marked[agent.0] = true;
            for &nb in self.graph.neighbors(agent) {
                self.arrive(nb, rule, inc);
            }
        }
    }

    /// Asks the rule for contenders and exhausts every live agent left out.
    fn update(&mut self, rule: &dyn ExplorationRule) -> Result<(Vec<AgentId>, Vec<AgentId>)> {
        let mut contenders = rule.contenders(&self.state);
        contenders.sort_unstable();
        if contenders.windows(2).any(|w| w[0] == w[1]) {
            return Err(violation("duplicate contender".into()));
        }
        for &c in &contenders {
            if c.0 >= self.graph.n() || !self.state.explored[c.0] {
                return Err(violation(format!("contender {c} is not explored")));
            }
            if self.state.winner[c.0] {
                return Err(violation(format!("contender {c} has already won")));
            }
            if self.state.exhausted[c.0] {
                return Err(violation(format!("exhausted agent {c} re-admitted")));
            }
        }
        for &a in &self.live {
            self.state.contender[a.0] = false;
        }
        for &c in &contenders {
            self.state.contender[c.0] = true;
        }
        let mut newly = Vec::new();
        let live = std::mem::take(&mut self.live);
        for a in live {
            if !self.state.contender[a.0] {
                self.state.exhausted[a.0] = true;
                newly.push(a);
                self.to_expand.push(a);
            }
        }
        newly.sort_unstable();
        self.live = contenders.clone();
        Ok((contenders, newly))
    }
}

/// Runs the exploration on `graph` with the given rule and priority.
pub fn explore(
    graph: &ProfileGraph,
    rule: &mut dyn ExplorationRule,
    scorer: &mut dyn Scorer,
) -> Result<(ExplorationState, ExplorationTrace)> {
    let mut engine = Engine {
        graph,
        state: ExplorationState::new(graph.n()),
        live: Vec::new(),
        to_expand: Vec::new(),
    };
    let mut trace = ExplorationTrace::default();
    let mut increment = Vec::new();
    let mut exhausted_since = Vec::new();
    for &s in graph.seller_neighbors() {
        engine.arrive(s, rule, &mut increment);
    }

    loop {
        engine.expand(rule, &mut increment);
        let (contenders, newly) = engine.update(rule)?;
        exhausted_since.extend(newly);
        if engine.to_expand.iter().any(|a| !engine.state.marked[a.0]) {
            continue;
        }
        if contenders.is_empty() {
            break;
        }

        let mut scores = Vec::with_capacity(contenders.len());
        let mut best: Option<(AgentId, f64)> = None;
        for &c in &contenders {
            let s = scorer.score(c, &engine.state, graph);
            scores.push((c, s));
            if best.map_or(true, |(_, b)| s > b) {
                best = Some((c, s));
            }
        }
        let (winner, _) = best.expect("contenders are non-empty");
        let price = rule.tentative_payment(winner, &engine.state);
        rule.record_winner(winner);
        engine.state.winner[winner.0] = true;
        engine.state.contender[winner.0] = false;
        engine.state.winners.push(winner);
        engine.state.tentative.push(price);
        engine.live.retain(|&a| a != winner);
        engine.to_expand.push(winner);
        scorer.observe_winner(winner, &engine.state);

        exhausted_since.sort_unstable();
        trace.iterations.push(IterationRecord {
            increment: std::mem::take(&mut increment),
            contenders,
            scores,
            winner,
            tentative_payment: price,
            newly_exhausted: std::mem::take(&mut exhausted_since),
        });
        if rule.finished() {
            break;
        }
    }
    exhausted_since.sort_unstable();
    trace.final_increment = increment;
    trace.final_exhausted = exhausted_since;
    Ok((engine.state, trace))
}
