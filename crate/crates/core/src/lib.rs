//! Multi-unit diffusion auctions on social networks.
//!
//! A seller with `m` identical items reaches buyers only through the
//! network: each buyer reports a valuation and the neighbors it forwards the
//! sale to. The crate provides the exploration-based mechanisms MUDAN and
//! MUDAR, their multi-demand versions through a chain reduction, the DNA-MU
//! baseline, priority strategies, valuation generators, and a brute-force
//! oracle that checks incentive and welfare properties on small instances.
//!
//! ```
//! use diffusion_auction::fixtures::seven_buyer_tree;
//! use diffusion_auction::mudan::run_mudan;
//! use diffusion_auction::network::ReportVector;
//! use diffusion_auction::strategies::PriorityStrategy;
//!
//! let inst = seven_buyer_tree(4);
//! let run = run_mudan(&inst, &ReportVector::truthful(&inst), &PriorityStrategy::Degree).unwrap();
//! assert_eq!(run.outcome.allocated_count(), 4);
//! ```

pub mod baselines;
pub mod error;
pub mod explorer;
pub mod fixtures;
pub mod mechanism;
pub mod mudan;
pub mod mudar;
pub mod multidemand;
pub mod network;
pub mod oracle;
pub mod strategies;
pub mod valuation;

pub use error::{AuctionError, Result};
pub use mechanism::{compute_metrics, Mechanism, MechanismRun, Metrics, Outcome};
pub use network::{AgentId, AuctionInstance, Profile, ProfileGraph, Report, ReportVector};
pub use strategies::PriorityStrategy;
