#![allow(dead_code)]

use diffusion_auction::explorer::{ExplorationRule, ExplorationState};
use diffusion_auction::network::{AgentId, AuctionInstance};
use diffusion_auction::oracle::{random_instance, InstanceParams};
use diffusion_auction::PriorityStrategy;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub const STRATEGIES: [PriorityStrategy; 5] = [
    PriorityStrategy::Degree,
    PriorityStrategy::Distance,
    PriorityStrategy::Depth,
    PriorityStrategy::NewAgent,
    PriorityStrategy::Random { seed: 7 },
];

pub fn instance(seed: u64, params: &InstanceParams) -> AuctionInstance {
    random_instance(params, &mut ChaCha8Rng::seed_from_u64(seed))
}

/// Everything explored and not yet won is a contender.
pub struct TakeAll;

impl ExplorationRule for TakeAll {
    fn admit(&mut self, _: AgentId, _: f64) {}

    fn contenders(&self, state: &ExplorationState) -> Vec<AgentId> {
        state.explored().iter().copied().filter(|&a| !state.is_winner(a)).collect()
    }

    fn tentative_payment(&self, _: AgentId, _: &ExplorationState) -> f64 {
        0.0
    }

    fn record_winner(&mut self, _: AgentId) {}
}
