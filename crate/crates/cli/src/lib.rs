//! Command-line runner for diffusion auctions: edge-list and valuation file
//! ingestion, synthetic graph generators, experiment sweeps with a
//! versioned CSV output, and the `run`/`check`/`sweep`/`reduce` commands.

pub mod app;
pub mod config;
pub mod graph;
pub mod mech;
pub mod profiles;
pub mod reduce;
pub mod sweep;
