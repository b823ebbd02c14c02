use thiserror::Error;

use crate::network::AgentId;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AuctionError {
    #[error("invalid instance: {0}")]
    InvalidInstance(String),

    #[error("report vector has {got} entries, instance has {expected} buyers")]
    ReportLength { expected: usize, got: usize },

    #[error("report of buyer {agent} references unknown agent {neighbor}")]
    MalformedReport { agent: AgentId, neighbor: usize },

    #[error("buyer {agent} reports neighbor {neighbor} outside its true neighbor set")]
    NeighborNotOwned { agent: AgentId, neighbor: AgentId },

    #[error("buyer {agent} reports invalid valuation {value}")]
    InvalidValuation { agent: AgentId, value: f64 },

    #[error("buyer {0} is not reachable from the seller")]
    QueryOnSilent(AgentId),

    #[error("valuation vector of buyer {agent} is not non-increasing")]
    NonMonotoneValuation { agent: AgentId },

    #[error("exploration contract violated: {0}")]
    ContractViolation(String),

    #[error("empty value grid")]
    EmptyGrid,

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

pub type Result<T, E = AuctionError> = std::result::Result<T, E>;
