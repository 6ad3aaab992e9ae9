//! Simulation and inference lab for the stable AR(1) process whose driving
//! noise is itself AR(1).
//!
//! * [`model`]: parameters, innovation families, trajectory simulation.
//! * [`stats`]: least-squares estimator θ̂ₙ, serial correlation estimator ρ̂ₙ,
//!   Durbin-Watson statistic D̂ₙ and the martingale functionals behind them.
//! * [`asymptotics`]: limits, asymptotic variances and rate functions.
//! * [`lab`]: Monte Carlo suites (CLT, deviations, convergence, identities,
//!   inequalities) with deterministic parallel replication.
//! * [`cli`]: the `dwlab` command-line front end.

// `!(x > 0.0)` is used on purpose so that NaN fails the check
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod asymptotics;
pub mod cli;
pub mod error;
pub mod lab;
pub mod model;
pub mod numeric;
pub mod rng;
pub mod stats;

pub use asymptotics::{summary, AsymptoticSummary};
pub use error::{Error, Result};
pub use model::{simulate, validate_params, ModelParams, NoiseFamily, NoiseSpec, Trajectory};
pub use stats::{ledger, StatLedger};
