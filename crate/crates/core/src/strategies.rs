//! Priority strategies for winner selection.
//!
//! Scores never look at reported valuations. `Degree` and `NewAgent` are
//! non-decreasing in the reported neighbor set; the other strategies ignore
//! it as long as the agent stays reachable.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::AuctionError;
use crate::explorer::{ExplorationState, Scorer};
use crate::network::{distances, AgentId, ProfileGraph};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PriorityStrategy {
    /// Number of reported neighbors.
    Degree,
    /// Closest to the seller first.
    Distance,
    /// Farthest from the seller first.
    Depth,
    /// Most reported neighbors not yet explored.
    NewAgent,
    /// Seeded uniform draw per agent.
    Random { seed: u64 },
}

impl PriorityStrategy {
    pub fn scorer(&self, graph: &ProfileGraph) -> Box<dyn Scorer + Send> {
        match *self {
            PriorityStrategy::Degree => Box::new(DegreeScorer),
            PriorityStrategy::Distance => Box::new(HopScorer::new(graph, -1.0)),
            PriorityStrategy::Depth => Box::new(HopScorer::new(graph, 1.0)),
            PriorityStrategy::NewAgent => Box::new(NewAgentScorer),
            PriorityStrategy::Random { seed } => Box::new(RandomScorer::new(graph.n(), seed)),
        }
    }

    pub fn label(&self) -> &'static str {
        match self {
            PriorityStrategy::Degree => "degree",
            PriorityStrategy::Distance => "distance",
            PriorityStrategy::Depth => "depth",
            PriorityStrategy::NewAgent => "new_agent",
            PriorityStrategy::Random { .. } => "random",
        }
    }
}

impl fmt::Display for PriorityStrategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PriorityStrategy::Random { seed } => write!(f, "random:{seed}"),
            other => f.write_str(other.label()),
        }
    }
}

impl FromStr for PriorityStrategy {
    type Err = AuctionError;

    /// Accepts `degree`, `distance`, `depth`, `new_agent` (or `new-agent`),
    /// `random` and `random:<seed>`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let lower = s.trim().to_ascii_lowercase();
        let (name, arg) = match lower.split_once(':') {
            Some((n, a)) => (n, Some(a)),
            None => (lower.as_str(), None),
        };
        let strategy = match name {
            "degree" => PriorityStrategy::Degree,
            "distance" => PriorityStrategy::Distance,
            "depth" => PriorityStrategy::Depth,
            "new_agent" | "new-agent" | "newagent" => PriorityStrategy::NewAgent,
            "random" => {
                let seed = match arg {
                    Some(a) => a
                        .parse()
                        .map_err(|_| AuctionError::InvalidParameter(format!("bad random seed {a:?}")))?,
                    None => 0,
                };
                return Ok(PriorityStrategy::Random { seed });
            }
            _ => {
                return Err(AuctionError::InvalidParameter(format!(
                    "unknown priority strategy {s:?}"
                )))
            }
        };
        if arg.is_some() {
            return Err(AuctionError::InvalidParameter(format!(
                "strategy {name} takes no argument"
            )));
        }
        Ok(strategy)
    }
}

struct DegreeScorer;

impl Scorer for DegreeScorer {
    fn score(&mut self, agent: AgentId, _: &ExplorationState, graph: &ProfileGraph) -> f64 {
        graph.neighbors(agent).len() as f64
    }
}

/// Hop distance in the profile graph, frozen at construction, times `sign`.
struct HopScorer {
    dist: Vec<Option<usize>>,
    sign: f64,
}

impl HopScorer {
    fn new(graph: &ProfileGraph, sign: f64) -> Self {
        HopScorer {
            dist: distances(graph),
            sign,
        }
    }
}

impl Scorer for HopScorer {
    fn score(&mut self, agent: AgentId, _: &ExplorationState, _: &ProfileGraph) -> f64 {
        // Contenders are always reachable.
        self.sign * self.dist[agent.0].unwrap_or(0) as f64
    }
}

struct NewAgentScorer;

impl Scorer for NewAgentScorer {
    fn score(&mut self, agent: AgentId, state: &ExplorationState, graph: &ProfileGraph) -> f64 {
        graph
            .neighbors(agent)
            .iter()
            .filter(|&&nb| !state.is_explored(nb))
            .count() as f64
    }
}

struct RandomScorer {
    draws: Vec<f64>,
}

impl RandomScorer {
    fn new(n: usize, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        RandomScorer {
            draws: (0..n).map(|_| rng.gen::<f64>()).collect(),
        }
    }
}

impl Scorer for RandomScorer {
    fn score(&mut self, agent: AgentId, _: &ExplorationState, _: &ProfileGraph) -> f64 {
        self.draws[agent.0]
    }
}
