//! Simulator and analytics library for edge-disjoint packings of
//! near-maximal cliques in dense random graphs.
//!
//! The centerpiece is the uniform k-clique removal process: starting from a
//! seeded G(n, p) or G(n, m) sample, repeatedly draw a uniformly random
//! k-clique and delete its edges until none remain. The crate provides
//!
//! * dense bitset graph state and reproducible samplers ([`graph`]),
//! * exact clique counting, enumeration, uniform sampling, and a
//!   deletion-aware clique index ([`cliques`]),
//! * closed-form evaluation of the predicted trajectories, horizons, and
//!   bound machinery that govern the process ([`theory`]),
//! * the process driver with per-step observation, stopping-time detection,
//!   and packing extraction ([`process`]),
//! * a seeded replication harness and Monte Carlo estimators
//!   ([`experiments`]).

pub mod cliques;
pub mod error;
pub mod experiments;
pub mod graph;
pub mod process;
pub mod report;
pub mod theory;

pub use error::{Error, Result};
