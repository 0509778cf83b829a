//! Decentralized Douglas-Rachford splitting (DDRS) and its inexact variant
//! for smooth optimization over the Stiefel manifold, simulated on a network
//! of agents with gossip mixing and gradient tracking.
//!
//! The crate ships the decentralized PCA benchmark: synthetic and IDX data,
//! ring and Erdős–Rényi graphs with Metropolis weights, centralized
//! monitoring oracles and a seeded, deterministic experiment driver.
//!
//! ```
//! use ddrs::harness::{preset, run_experiment, RunStatus};
//!
//! let mut config = preset("synthetic-er06").unwrap();
//! config.max_iters = 20;
//! let out = run_experiment(&config);
//! assert_eq!(out.summary.status, RunStatus::Completed);
//! assert_eq!(out.records.len(), 21);
//! ```

#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::too_many_arguments)]

pub mod algorithms;
pub mod error;
pub mod harness;
pub mod manifold;
pub mod metrics;
pub mod network;
pub mod problems;

pub use error::{Error, Result};
