//! Simulation of Grover-Rudolph state preparation feeding quantum Monte-Carlo
//! mean estimation, with a classical sampling baseline and cost-scaling
//! experiments.
//!
//! Preparing the state needs the left-half mass of the distribution. When that
//! mass is itself estimated from `N′_s` classical samples, its binomial error
//! shifts the encoded mean by `k ε_l`, and the end-to-end RMSE falls only as the
//! inverse square root of total cost.

// `!(x > 0.0)` is how NaN parameters get rejected alongside bad values
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod classical;
pub mod cli;
pub mod config;
pub mod dist;
pub mod error;
pub mod experiments;
pub mod grover_rudolph;
pub mod io;
pub mod quantum;
pub mod rng;
pub mod stats;

pub use error::{Error, Result};
