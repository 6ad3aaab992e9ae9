use super::tails::{binomial_se, clopper_pearson};
use super::{first_error, replicate, replication_ledger, ExperimentConfig};
use crate::asymptotics::{bn_sequence, summary, AsymptoticSummary};
use crate::error::{Error, Result};
use crate::numeric::fmt_f64;
use crate::stats::StatLedger;
use serde::{Deserialize, Serialize};

/// Functionals tracked by the suite, with their limits.
const FUNCTIONALS: [&str; 9] = [
    "S_over_n",
    "P_over_n",
    "Q_over_n",
    "J_over_n",
    "T_n",
    "f_n",
    "theta_hat",
    "rho_hat",
    "dw",
];

fn values(l: &StatLedger) -> [f64; 9] {
    let n = l.n as f64;
    [
        l.s_n / n,
        l.p_n / n,
        l.q_n / n,
        l.j_n / n,
        l.t_n,
        l.f_n,
        l.theta_hat,
        l.rho_hat,
        l.dw,
    ]
}

fn limits(s: &AsymptoticSummary) -> [f64; 9] {
    [
        s.ell,
        s.ell1,
        s.ell2,
        s.j_limit,
        s.t_limit,
        0.0,
        s.theta_star,
        s.rho_star,
        s.d_star,
    ]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceRow {
    pub functional: String,
    pub n: usize,
    pub b_n: f64,
    pub limit: f64,
    pub delta: f64,
    pub exceedances: u64,
    pub replications: u64,
    pub freq: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    /// −log(freq)/bₙ², +∞ when nothing exceeded δ
    pub decay: f64,
    pub mean_abs_error: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceReport {
    pub rows: Vec<ConvergenceRow>,
    /// Functionals whose frequency rose along the grid beyond binomial noise.
    pub non_monotone: Vec<String>,
    pub pass: bool,
}

impl ConvergenceReport {
    pub fn series(&self, functional: &str) -> Vec<&ConvergenceRow> {
        self.rows
            .iter()
            .filter(|r| r.functional == functional)
            .collect()
    }

    pub fn write_csv<W: std::io::Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record([
            "functional",
            "n",
            "b_n",
            "limit",
            "delta",
            "exceedances",
            "replications",
            "freq",
            "ci_low",
            "ci_high",
            "decay",
            "mean_abs_error",
        ])?;
        for r in &self.rows {
            w.write_record([
                r.functional.clone(),
                r.n.to_string(),
                fmt_f64(r.b_n),
                fmt_f64(r.limit),
                fmt_f64(r.delta),
                r.exceedances.to_string(),
                r.replications.to_string(),
                fmt_f64(r.freq),
                fmt_f64(r.ci_low),
                fmt_f64(r.ci_high),
                fmt_f64(r.decay),
                fmt_f64(r.mean_abs_error),
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// True when each frequency exceeds its predecessor by at most two standard
/// errors of the difference.
pub(crate) fn non_increasing_within_noise(freqs: &[f64], reps: u64) -> bool {
    freqs.windows(2).all(|w| {
        let se = (binomial_se(w[0], reps).powi(2) + binomial_se(w[1], reps).powi(2)).sqrt();
        w[1] <= w[0] + 2.0 * se
    })
}

/// Frequencies of |Fₙ − F∞| > δ for the a.s. functionals along the n grid.
pub fn run_convergence_suite(cfg: &ExperimentConfig) -> Result<ConvergenceReport> {
    cfg.validate()?;
    if cfg.random_params {
        return Err(Error::Domain(
            "the convergence suite needs fixed parameters".into(),
        ));
    }
    let s = summary(&cfg.params)?;
    let lim = limits(&s);
    let sampler = cfg.noise_spec().sampler()?;
    let streams = cfg.substreams();
    let reps = cfg.replications as u64;
    let mut rows = Vec::new();

    for (i, &n) in cfg.n_grid.iter().enumerate() {
        let b_n = bn_sequence(n, cfg.alpha)?;
        let point = cfg.point(i);
        let errs = first_error(replicate(cfg.workers, cfg.replications, |rep| {
            let mut rng = streams.stream(point, rep);
            let (_, l) = replication_ledger(cfg, &sampler, n, &mut rng)?;
            let v = values(&l);
            Ok(std::array::from_fn::<f64, 9, _>(|j| (v[j] - lim[j]).abs()))
        })?)?;
        for (j, name) in FUNCTIONALS.iter().enumerate() {
            let k = errs.iter().filter(|e| e[j] > cfg.delta).count() as u64;
            let freq = k as f64 / reps as f64;
            let (ci_low, ci_high) = clopper_pearson(k, reps, 0.05);
            rows.push(ConvergenceRow {
                functional: (*name).into(),
                n,
                b_n,
                limit: lim[j],
                delta: cfg.delta,
                exceedances: k,
                replications: reps,
                freq,
                ci_low,
                ci_high,
                decay: if k == 0 {
                    f64::INFINITY
                } else {
                    -freq.ln() / (b_n * b_n)
                },
                mean_abs_error: errs.iter().map(|e| e[j]).sum::<f64>() / reps as f64,
            });
        }
    }

    let non_monotone: Vec<String> = FUNCTIONALS
        .iter()
        .filter(|name| {
            let freqs: Vec<f64> = rows
                .iter()
                .filter(|r| r.functional == **name)
                .map(|r| r.freq)
                .collect();
            !non_increasing_within_noise(&freqs, reps)
        })
        .map(|s| s.to_string())
        .collect();
    Ok(ConvergenceReport {
        pass: non_monotone.is_empty(),
        rows,
        non_monotone,
    })
}
