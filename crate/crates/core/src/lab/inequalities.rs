use super::{apply_burn_in, first_error, replicate, replication_params, ExperimentConfig};
use crate::error::Result;
use crate::model::simulate;
use crate::numeric::fmt_f64;
use crate::stats::{check_as_inequalities, ledger};
use serde::{Deserialize, Serialize};

const NAMES: [&str; 4] = ["sum_squares", "max_x", "max_eps", "fourth_powers"];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InequalityRow {
    pub inequality: String,
    pub paths: u64,
    pub holds: u64,
    /// Largest lhs/rhs over all paths; at most 1 when the bound holds.
    pub max_ratio: f64,
    pub first_violation: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InequalitySuiteReport {
    pub n: usize,
    pub rows: Vec<InequalityRow>,
    pub pass: bool,
}

impl InequalitySuiteReport {
    pub fn write_csv<W: std::io::Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record([
            "inequality",
            "n",
            "paths",
            "holds",
            "max_ratio",
            "first_violation",
        ])?;
        for r in &self.rows {
            w.write_record([
                r.inequality.clone(),
                self.n.to_string(),
                r.paths.to_string(),
                r.holds.to_string(),
                fmt_f64(r.max_ratio),
                r.first_violation.map(|v| v.to_string()).unwrap_or_default(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Evaluates the four almost-sure bounds on every simulated path.
pub fn run_inequality_suite(cfg: &ExperimentConfig) -> Result<InequalitySuiteReport> {
    cfg.validate()?;
    let n = cfg.n_grid[0];
    let spec = cfg.noise_spec();
    let sampler = spec.sampler()?;
    let streams = cfg.substreams();
    let checks = first_error(replicate(cfg.workers, cfg.replications, |rep| {
        let mut rng = streams.stream(cfg.point(0), rep);
        let mut p = replication_params(cfg, &mut rng);
        if cfg.burn_in {
            p = apply_burn_in(p, &sampler, &mut rng);
        }
        let spec = crate::model::NoiseSpec {
            sigma2: p.sigma2,
            ..spec
        };
        let traj = simulate(&p, &spec, n, &mut rng)?;
        let l = ledger(&traj, &p)?;
        Ok(check_as_inequalities(&traj, &l, &p)?.as_array())
    })?)?;

    let rows: Vec<InequalityRow> = NAMES
        .iter()
        .enumerate()
        .map(|(j, name)| {
            let mut row = InequalityRow {
                inequality: (*name).into(),
                paths: checks.len() as u64,
                holds: 0,
                max_ratio: 0.0,
                first_violation: None,
            };
            for (rep, c) in checks.iter().enumerate() {
                let b = c[j];
                if b.holds {
                    row.holds += 1;
                } else if row.first_violation.is_none() {
                    row.first_violation = Some(rep as u64);
                }
                if b.rhs > 0.0 {
                    row.max_ratio = row.max_ratio.max(b.lhs / b.rhs);
                }
            }
            row
        })
        .collect();
    Ok(InequalitySuiteReport {
        n,
        pass: rows.iter().all(|r| r.holds == r.paths),
        rows,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lab::Suite;
    use crate::model::NoiseFamily;
    use crate::ModelParams;

    #[test]
    fn random_paths_satisfy_bounds() {
        let mut cfg = ExperimentConfig::defaults_for(Suite::Inequalities);
        cfg.replications = 300;
        let rep = run_inequality_suite(&cfg).unwrap();
        assert!(rep.pass, "{:?}", rep.rows);
        assert!(rep
            .rows
            .iter()
            .all(|r| r.max_ratio <= 1.0 && r.paths == 300));
    }

    #[test]
    fn weibull_and_zero_theta() {
        let mut cfg = ExperimentConfig::defaults_for(Suite::Inequalities);
        cfg.replications = 200;
        cfg.noise = NoiseFamily::SymmetricWeibull { beta: 0.4 };
        assert!(run_inequality_suite(&cfg).unwrap().pass);
        cfg.random_params = false;
        cfg.params = ModelParams::new(0.0, 0.7, 2.0);
        assert!(run_inequality_suite(&cfg).unwrap().pass);
    }
}
