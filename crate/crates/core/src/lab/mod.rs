//! Monte Carlo experiment harness.
//!
//! Each suite maps replication indices to independent work units, each with
//! its own random substream, and folds the results in index order. The output
//! therefore depends only on the configuration and the master seed.

mod clt;
mod convergence;
mod deviations;
mod identities;
mod inequalities;
pub mod tails;

pub use clt::{run_clt_suite, CltReport, CltRow};
pub use convergence::{run_convergence_suite, ConvergenceReport, ConvergenceRow};
pub use deviations::{
    run_deviation_suite, DeviationEstimate, DeviationReport, DwRhoMapping, Statistic, TrendCheck,
};
pub use identities::{run_identity_suite, IdentityReport, IdentityRow};
pub use inequalities::{run_inequality_suite, InequalityRow, InequalitySuiteReport};

use crate::asymptotics::validate_alpha;
use crate::error::{Error, Result};
use crate::model::{
    validate_params, ModelParams, NoiseFamily, NoiseSampler, NoiseSpec, Recurrence,
};
use crate::rng::{LabRng, Substreams};
use crate::stats::{LedgerAccumulator, StatLedger};
use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// Half-width of the box from which random stable (θ, ρ) are drawn.
pub const RANDOM_PARAM_BOUND: f64 = 0.98;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Suite {
    Clt,
    Deviations,
    Convergence,
    Identities,
    Inequalities,
}

impl Suite {
    pub fn name(&self) -> &'static str {
        match self {
            Suite::Clt => "clt",
            Suite::Deviations => "deviations",
            Suite::Convergence => "convergence",
            Suite::Identities => "identities",
            Suite::Inequalities => "inequalities",
        }
    }

    fn tag(&self) -> u64 {
        match self {
            Suite::Clt => 1,
            Suite::Deviations => 2,
            Suite::Convergence => 3,
            Suite::Identities => 4,
            Suite::Inequalities => 5,
        }
    }
}

/// How X₀ and ε₀ are chosen for each replication.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InitialValues {
    /// `params.x0` and `params.eps0`.
    Fixed,
    /// Independent N(0, σ²) draws per replication.
    Gaussian,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub suite: Suite,
    pub params: ModelParams,
    /// Innovation family; its variance is `params.sigma2`.
    pub noise: NoiseFamily,
    pub n_grid: Vec<usize>,
    /// Speed exponent: bₙ = n^alpha.
    pub alpha: f64,
    /// Normalized deviation levels c; the raw threshold for a statistic with
    /// asymptotic variance σ² is x = c·σ/bₙ.
    pub thresholds: Vec<f64>,
    pub replications: usize,
    pub master_seed: u64,
    pub workers: usize,
    /// Deviation size for the convergence-frequency suite.
    pub delta: f64,
    /// Draw (θ, ρ) uniformly in (−0.98, 0.98)² per replication.
    pub random_params: bool,
    pub init: InitialValues,
    /// Discard 10·max(1/(1−|θ|), 1/(1−|ρ|)) steps before recording.
    pub burn_in: bool,
}

impl ExperimentConfig {
    pub fn defaults_for(suite: Suite) -> Self {
        let base = ExperimentConfig {
            suite,
            params: ModelParams::default(),
            noise: NoiseFamily::Gaussian,
            n_grid: vec![1_000, 10_000, 100_000],
            alpha: 0.2,
            thresholds: vec![2.5],
            replications: 2_000,
            master_seed: 42,
            workers: 1,
            delta: 0.2,
            random_params: false,
            init: InitialValues::Fixed,
            burn_in: false,
        };
        match suite {
            Suite::Clt => ExperimentConfig {
                n_grid: vec![10_000],
                replications: 5_000,
                ..base
            },
            Suite::Deviations => ExperimentConfig {
                replications: 200_000,
                ..base
            },
            Suite::Convergence => base,
            Suite::Identities => ExperimentConfig {
                n_grid: vec![500],
                replications: 1_000,
                random_params: true,
                init: InitialValues::Gaussian,
                ..base
            },
            Suite::Inequalities => ExperimentConfig {
                n_grid: vec![500],
                replications: 10_000,
                random_params: true,
                init: InitialValues::Gaussian,
                ..base
            },
        }
    }

    pub fn noise_spec(&self) -> NoiseSpec {
        NoiseSpec {
            family: self.noise,
            sigma2: self.params.sigma2,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_grid.is_empty() {
            return Err(Error::Domain("n_grid must not be empty".into()));
        }
        if self.n_grid.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Domain(format!(
                "n_grid must be strictly increasing, got {:?}",
                self.n_grid
            )));
        }
        if self.n_grid[0] < 2 {
            return Err(Error::Domain("every n in n_grid must be >= 2".into()));
        }
        if self.replications < 100 {
            return Err(Error::Domain(format!(
                "replications must be >= 100, got {}",
                self.replications
            )));
        }
        if self.workers == 0 {
            return Err(Error::Domain("workers must be >= 1".into()));
        }
        if matches!(self.suite, Suite::Deviations | Suite::Convergence) {
            validate_alpha(self.alpha)?;
        }
        if self.thresholds.is_empty()
            || self
                .thresholds
                .iter()
                .any(|c| !(*c > 0.0) || !c.is_finite())
        {
            return Err(Error::Domain(format!(
                "thresholds must be positive and finite, got {:?}",
                self.thresholds
            )));
        }
        if !(self.delta > 0.0) {
            return Err(Error::Domain(format!(
                "delta must be > 0, got {}",
                self.delta
            )));
        }
        validate_params(self.params)?;
        self.noise_spec().validate()
    }

    pub(crate) fn substreams(&self) -> Substreams {
        Substreams::new(self.master_seed)
    }

    /// Substream point for grid index `i` of this suite.
    pub(crate) fn point(&self, i: usize) -> u64 {
        (self.suite.tag() << 32) | i as u64
    }
}

/// Maps `f` over `0..reps` on `workers` threads and returns results in index
/// order.
pub fn replicate<T, F>(workers: usize, reps: usize, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(u64) -> T + Sync + Send,
{
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| Error::Domain(format!("thread pool: {e}")))?;
    Ok(pool.install(|| (0..reps as u64).into_par_iter().map(&f).collect()))
}

/// Parameters and initial values for one replication.
pub(crate) fn replication_params(cfg: &ExperimentConfig, rng: &mut LabRng) -> ModelParams {
    let mut p = cfg.params;
    if cfg.random_params {
        let b = RANDOM_PARAM_BOUND;
        p.theta = rng.random_range(-b..b);
        p.rho = rng.random_range(-b..b);
    }
    if cfg.init == InitialValues::Gaussian {
        let sd = p.sigma2.sqrt();
        let z0: f64 = rng.sample(StandardNormal);
        let z1: f64 = rng.sample(StandardNormal);
        p.x0 = sd * z0;
        p.eps0 = sd * z1;
    }
    p
}

pub fn burn_in_steps(p: &ModelParams) -> usize {
    let m = (1.0 / (1.0 - p.theta.abs())).max(1.0 / (1.0 - p.rho.abs()));
    // guard against 1/(1 − 0.9) landing just above 10
    (10.0 * m - 1e-9).ceil() as usize
}

/// Runs the burn-in and moves the resulting state into the initial values.
pub(crate) fn apply_burn_in(
    p: ModelParams,
    sampler: &NoiseSampler,
    rng: &mut LabRng,
) -> ModelParams {
    let mut rec = Recurrence::new(&p);
    for _ in 0..burn_in_steps(&p) {
        rec.step(sampler.draw(rng));
    }
    p.with_initial(rec.x, rec.eps)
}

/// Simulates a path of length `n` and returns its ledger without storing it.
/// Consumes the generator exactly as [`crate::model::simulate`] does.
pub fn stream_ledger(
    p: &ModelParams,
    sampler: &NoiseSampler,
    n: usize,
    rng: &mut LabRng,
) -> Result<StatLedger> {
    let mut rec = Recurrence::new(p);
    let mut acc = LedgerAccumulator::new(p.x0, p.eps0);
    for _ in 0..n {
        let v = sampler.draw(rng);
        let x = rec.step(v);
        acc.push(v, x);
    }
    acc.finalize(p)
}

/// Full per-replication setup shared by the streaming suites: draws the
/// replication parameters, applies burn-in, and streams the ledger.
pub(crate) fn replication_ledger(
    cfg: &ExperimentConfig,
    sampler: &NoiseSampler,
    n: usize,
    rng: &mut LabRng,
) -> Result<(ModelParams, StatLedger)> {
    let mut p = replication_params(cfg, rng);
    if cfg.burn_in {
        p = apply_burn_in(p, sampler, rng);
    }
    let l = stream_ledger(&p, sampler, n, rng)?;
    Ok((p, l))
}

pub(crate) fn first_error<T>(results: Vec<Result<T>>) -> Result<Vec<T>> {
    results.into_iter().collect()
}

/// Sample mean and unbiased variance.
pub(crate) fn mean_var(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0);
    (mean, var)
}
