//! The `dwlab` command-line front end.
//!
//! Configuration is resolved as suite defaults < `DWLAB_SEED` < config file <
//! flags. A config file is either a flat JSON object (see [`ConfigFile`]) or a
//! `manifest.json` from an earlier run, whose `config_echo` is reused as is.

use crate::asymptotics::{det_gamma_audit, summary, AsymptoticSummary, DetAudit};
use crate::error::{Error, Result};
use crate::lab::{
    run_clt_suite, run_convergence_suite, run_deviation_suite, run_identity_suite,
    run_inequality_suite, ExperimentConfig, InitialValues, Suite,
};
use crate::model::{simulate, validate_params, ModelParams, NoiseFamily, NoiseSpec, Trajectory};
use crate::rng::seeded;
use crate::stats::{ledger, StatLedger};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use std::fs::File;
use std::io::BufWriter;
use std::path::{Path, PathBuf};

pub const EXIT_OK: i32 = 0;
pub const EXIT_RUNTIME: i32 = 1;
pub const EXIT_VALIDATION: i32 = 2;
pub const EXIT_SUITE_FAILED: i32 = 3;

pub const SEED_ENV: &str = "DWLAB_SEED";

/// Version string baked in at build time, `git describe` style when built
/// from a checkout.
pub fn artifact_version() -> &'static str {
    option_env!("DWLAB_GIT_DESCRIBE").unwrap_or(concat!("v", env!("CARGO_PKG_VERSION")))
}

#[derive(Debug, Parser)]
#[command(
    name = "dwlab",
    version,
    about = "AR(1) with AR(1) noise: estimators, Durbin-Watson statistic and Monte Carlo suites"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Simulate one trajectory and write it with its statistics.
    Simulate(SimulateArgs),
    /// Compute the statistics of a trajectory CSV.
    Estimate(EstimateArgs),
    /// Print the limits, asymptotic variances and Γ.
    Summary(ParamArgs),
    /// CLT moments of the normalized estimators.
    Clt(SuiteArgs),
    /// Moderate-deviation tail frequencies.
    Deviations(SuiteArgs),
    /// Deviation frequencies of the almost-sure functionals.
    Convergence(SuiteArgs),
    /// Audit of the exact algebraic identities.
    Identities(SuiteArgs),
    /// Pass counts of the almost-sure inequalities.
    Inequalities(SuiteArgs),
    /// Run every suite into one output directory.
    Report(SuiteArgs),
}

#[derive(Debug, Clone, Args)]
pub struct ParamArgs {
    #[arg(long, allow_hyphen_values = true)]
    pub theta: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub rho: Option<f64>,
    #[arg(long)]
    pub sigma2: Option<f64>,
    /// Output directory.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum NoiseArg {
    Gaussian,
    Weibull,
    StudentT,
}

#[derive(Debug, Clone, Args)]
pub struct NoiseArgs {
    #[arg(long, value_enum)]
    pub noise: Option<NoiseArg>,
    /// Weibull tail exponent, in (0, 1).
    #[arg(long)]
    pub beta: Option<f64>,
    /// Student-t degrees of freedom, > 2.
    #[arg(long)]
    pub nu: Option<f64>,
}

#[derive(Debug, Clone, Args)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub params: ParamArgs,
    #[command(flatten)]
    pub noise: NoiseArgs,
    #[arg(long, default_value_t = 1000)]
    pub n: usize,
    #[arg(long, allow_hyphen_values = true)]
    pub x0: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub eps0: Option<f64>,
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, Args)]
pub struct EstimateArgs {
    /// Trajectory CSV as written by `simulate`.
    #[arg(long)]
    pub input: PathBuf,
    #[command(flatten)]
    pub params: ParamArgs,
}

#[derive(Debug, Clone, Args)]
pub struct SuiteArgs {
    #[command(flatten)]
    pub params: ParamArgs,
    #[command(flatten)]
    pub noise: NoiseArgs,
    /// Comma-separated, strictly increasing sample sizes.
    #[arg(long, value_delimiter = ',')]
    pub n_grid: Option<Vec<usize>>,
    /// Speed exponent, bₙ = n^alpha with 0 < alpha < 1/2.
    #[arg(long)]
    pub alpha: Option<f64>,
    /// Comma-separated normalized deviation levels c (x = c·σ/bₙ).
    #[arg(long, value_delimiter = ',')]
    pub x: Option<Vec<f64>>,
    #[arg(long)]
    pub reps: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub workers: Option<usize>,
    #[arg(long)]
    pub delta: Option<f64>,
    /// Draw (θ, ρ) at random for every replication.
    #[arg(long)]
    pub random_params: Option<bool>,
    #[arg(long)]
    pub burn_in: Option<bool>,
    /// JSON config file or a previous run's manifest.json.
    #[arg(long)]
    pub config: Option<PathBuf>,
}

/// Flat config file. Every key is optional; `noise` is the one nested object,
/// e.g. `{"family": "symmetric_weibull", "beta": 0.4}`.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub theta: Option<f64>,
    pub rho: Option<f64>,
    pub sigma2: Option<f64>,
    pub x0: Option<f64>,
    pub eps0: Option<f64>,
    pub noise: Option<NoiseFamily>,
    pub n_grid: Option<Vec<usize>>,
    pub alpha: Option<f64>,
    pub thresholds: Option<Vec<f64>>,
    pub replications: Option<usize>,
    pub master_seed: Option<u64>,
    pub workers: Option<usize>,
    pub delta: Option<f64>,
    pub random_params: Option<bool>,
    pub init: Option<InitialValues>,
    pub burn_in: Option<bool>,
}

impl ConfigFile {
    fn apply(&self, cfg: &mut ExperimentConfig) {
        let p = &mut cfg.params;
        set(&mut p.theta, self.theta);
        set(&mut p.rho, self.rho);
        set(&mut p.sigma2, self.sigma2);
        set(&mut p.x0, self.x0);
        set(&mut p.eps0, self.eps0);
        set(&mut cfg.noise, self.noise);
        set(&mut cfg.n_grid, self.n_grid.clone());
        set(&mut cfg.alpha, self.alpha);
        set(&mut cfg.thresholds, self.thresholds.clone());
        set(&mut cfg.replications, self.replications);
        set(&mut cfg.master_seed, self.master_seed);
        set(&mut cfg.workers, self.workers);
        set(&mut cfg.delta, self.delta);
        set(&mut cfg.random_params, self.random_params);
        set(&mut cfg.init, self.init);
        set(&mut cfg.burn_in, self.burn_in);
    }
}

fn set<T>(slot: &mut T, value: Option<T>) {
    if let Some(v) = value {
        *slot = v;
    }
}

/// Resolved configuration of a run, echoed in its manifest.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "command", rename_all = "snake_case")]
pub enum RunConfig {
    Simulate {
        params: ModelParams,
        noise: NoiseFamily,
        n: usize,
        seed: u64,
    },
    Estimate {
        input: PathBuf,
        params: ModelParams,
    },
    Summary {
        params: ModelParams,
    },
    Suite(ExperimentConfig),
    Report(ExperimentConfig),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub config_echo: RunConfig,
    pub artifact_version: String,
    pub started_at: String,
    pub finished_at: String,
    pub output_paths: Vec<PathBuf>,
}

impl RunManifest {
    pub fn read(path: &Path) -> Result<Self> {
        Ok(serde_json::from_reader(File::open(path)?)?)
    }
}

fn now() -> String {
    chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Millis, true)
}

fn env_seed() -> Result<Option<u64>> {
    match std::env::var(SEED_ENV) {
        Ok(s) => s.trim().parse().map(Some).map_err(|_| {
            Error::Parse(format!("{SEED_ENV} must be an unsigned integer, got {s:?}"))
        }),
        Err(_) => Ok(None),
    }
}

fn noise_family(args: &NoiseArgs, current: NoiseFamily) -> Result<NoiseFamily> {
    let family = match args.noise {
        None => current,
        Some(NoiseArg::Gaussian) => NoiseFamily::Gaussian,
        Some(NoiseArg::Weibull) => NoiseFamily::SymmetricWeibull { beta: 0.5 },
        Some(NoiseArg::StudentT) => NoiseFamily::StudentT { nu: 3.0 },
    };
    Ok(match family {
        NoiseFamily::SymmetricWeibull { beta } => NoiseFamily::SymmetricWeibull {
            beta: args.beta.unwrap_or(beta),
        },
        NoiseFamily::StudentT { nu } => NoiseFamily::StudentT {
            nu: args.nu.unwrap_or(nu),
        },
        NoiseFamily::Gaussian => {
            if args.beta.is_some() || args.nu.is_some() {
                return Err(Error::Parse(
                    "--beta needs --noise weibull and --nu needs --noise student-t".into(),
                ));
            }
            NoiseFamily::Gaussian
        }
    })
}

fn apply_params(args: &ParamArgs, p: &mut ModelParams) {
    set(&mut p.theta, args.theta);
    set(&mut p.rho, args.rho);
    set(&mut p.sigma2, args.sigma2);
}

/// Resolves the configuration of one suite from defaults, environment, file
/// and flags, and validates it.
pub fn resolve_suite_config(suite: Suite, args: &SuiteArgs) -> Result<ExperimentConfig> {
    let mut cfg = ExperimentConfig::defaults_for(suite);
    set(&mut cfg.master_seed, env_seed()?);
    if let Some(path) = &args.config {
        let value: serde_json::Value = serde_json::from_reader(File::open(path)?)?;
        if value.get("config_echo").is_some() {
            let m: RunManifest = serde_json::from_value(value)?;
            cfg = match m.config_echo {
                RunConfig::Suite(c) | RunConfig::Report(c) => c,
                other => {
                    return Err(Error::Parse(format!(
                        "manifest {} does not describe a suite run: {other:?}",
                        path.display()
                    )))
                }
            };
            cfg.suite = suite;
        } else {
            let file: ConfigFile = serde_json::from_value(value)
                .map_err(|e| Error::Parse(format!("config {}: {e}", path.display())))?;
            file.apply(&mut cfg);
        }
    }
    apply_params(&args.params, &mut cfg.params);
    cfg.noise = noise_family(&args.noise, cfg.noise)?;
    set(&mut cfg.n_grid, args.n_grid.clone());
    set(&mut cfg.alpha, args.alpha);
    set(&mut cfg.thresholds, args.x.clone());
    set(&mut cfg.replications, args.reps);
    set(&mut cfg.master_seed, args.seed);
    set(&mut cfg.workers, args.workers);
    set(&mut cfg.delta, args.delta);
    set(&mut cfg.random_params, args.random_params);
    set(&mut cfg.burn_in, args.burn_in);
    cfg.validate()?;
    Ok(cfg)
}

fn out_dir(args: &ParamArgs, command: &str) -> Result<PathBuf> {
    let dir = args
        .out
        .clone()
        .unwrap_or_else(|| PathBuf::from("dwlab-out").join(command));
    std::fs::create_dir_all(&dir)?;
    Ok(dir)
}

/// Collects the files a command writes.
struct Outputs {
    dir: PathBuf,
    paths: Vec<PathBuf>,
}

impl Outputs {
    fn new(dir: PathBuf) -> Self {
        Outputs {
            dir,
            paths: Vec::new(),
        }
    }

    fn create(&mut self, name: &str) -> Result<BufWriter<File>> {
        let path = self.dir.join(name);
        let f = File::create(&path)?;
        self.paths.push(path);
        Ok(BufWriter::new(f))
    }

    fn json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<()> {
        let mut w = self.create(name)?;
        serde_json::to_writer_pretty(&mut w, value)?;
        std::io::Write::write_all(&mut w, b"\n")?;
        Ok(())
    }

    fn finish(mut self, config_echo: RunConfig, started_at: String) -> Result<()> {
        let manifest_path = self.dir.join("manifest.json");
        self.paths.push(manifest_path.clone());
        let m = RunManifest {
            config_echo,
            artifact_version: artifact_version().into(),
            started_at,
            finished_at: now(),
            output_paths: self.paths,
        };
        let mut w = BufWriter::new(File::create(manifest_path)?);
        serde_json::to_writer_pretty(&mut w, &m)?;
        std::io::Write::write_all(&mut w, b"\n")?;
        Ok(())
    }
}

fn print_ledger(l: &StatLedger) {
    println!("n          {}", l.n);
    println!("theta_hat  {}", l.theta_hat);
    println!("rho_hat    {}", l.rho_hat);
    println!("dw         {}", l.dw);
    println!("f_n        {}", l.f_n);
    println!("S_n/n      {}", l.s_n / l.n as f64);
    println!("T_n        {}", l.t_n);
}

fn cmd_simulate(a: &SimulateArgs) -> Result<i32> {
    let started = now();
    let mut p = ModelParams::default();
    apply_params(&a.params, &mut p);
    set(&mut p.x0, a.x0);
    set(&mut p.eps0, a.eps0);
    let p = validate_params(p)?;
    let noise = noise_family(&a.noise, NoiseFamily::Gaussian)?;
    let seed = match a.seed {
        Some(s) => s,
        None => env_seed()?.unwrap_or(42),
    };
    let spec = NoiseSpec {
        family: noise,
        sigma2: p.sigma2,
    };
    let traj = simulate(&p, &spec, a.n, &mut seeded(seed))?;
    let l = ledger(&traj, &p)?;

    let mut out = Outputs::new(out_dir(&a.params, "simulate")?);
    traj.write_csv(out.create("trajectory.csv")?)?;
    out.json("summary.json", &l)?;
    let dir = out.dir.clone();
    out.finish(
        RunConfig::Simulate {
            params: p,
            noise,
            n: a.n,
            seed,
        },
        started,
    )?;
    print_ledger(&l);
    println!("wrote {}", dir.display());
    Ok(EXIT_OK)
}

fn cmd_estimate(a: &EstimateArgs) -> Result<i32> {
    let started = now();
    let traj = Trajectory::read_csv(File::open(&a.input)?)?;
    let mut p = ModelParams::default();
    apply_params(&a.params, &mut p);
    let p = validate_params(p.with_initial(traj.x[0], traj.eps[0]))?;
    let l = ledger(&traj, &p)?;
    let mut out = Outputs::new(out_dir(&a.params, "estimate")?);
    out.json("summary.json", &l)?;
    let dir = out.dir.clone();
    out.finish(
        RunConfig::Estimate {
            input: a.input.clone(),
            params: p,
        },
        started,
    )?;
    print_ledger(&l);
    println!("wrote {}", dir.display());
    Ok(EXIT_OK)
}

#[derive(Debug, Serialize)]
struct SummaryOutput {
    #[serde(flatten)]
    summary: AsymptoticSummary,
    det_gamma: DetAudit,
}

fn cmd_summary(a: &ParamArgs) -> Result<i32> {
    let started = now();
    let mut p = ModelParams::default();
    apply_params(a, &mut p);
    let s = summary(&p)?;
    let det = det_gamma_audit(&s);
    let mut out = Outputs::new(out_dir(a, "summary")?);
    out.json(
        "summary.json",
        &SummaryOutput {
            summary: s,
            det_gamma: det,
        },
    )?;
    let dir = out.dir.clone();
    out.finish(RunConfig::Summary { params: p }, started)?;

    println!("theta*            {}", s.theta_star);
    println!("rho*              {}", s.rho_star);
    println!("D*                {}", s.d_star);
    println!("sigma2_theta      {}", s.sigma2_theta);
    println!("sigma2_rho        {}", s.sigma2_rho);
    println!("sigma2_D          {}", s.sigma2_d);
    println!("ell               {}", s.ell);
    println!("det Gamma direct  {}", det.direct);
    println!("det Gamma printed {}", det.printed_formula);
    println!("wrote {}", dir.display());
    Ok(EXIT_OK)
}

/// Runs one suite, writes `<suite>.csv` (plus extras) into `out`, and returns
/// whether its acceptance property held.
fn run_suite_into(cfg: &ExperimentConfig, out: &mut Outputs) -> Result<(bool, serde_json::Value)> {
    let name = cfg.suite.name();
    let csv_name = format!("{name}.csv");
    Ok(match cfg.suite {
        Suite::Clt => {
            let r = run_clt_suite(cfg)?;
            r.write_csv(out.create(&csv_name)?)?;
            for row in &r.rows {
                println!(
                    "clt n={} {:<14} {:>12.6} target {:>10.6} {}",
                    row.n,
                    row.quantity,
                    row.estimate,
                    row.target,
                    row.pass.map_or("", |b| if b { "ok" } else { "FAIL" })
                );
            }
            (r.pass, serde_json::to_value(&r)?)
        }
        Suite::Deviations => {
            let r = run_deviation_suite(cfg)?;
            r.write_csv(out.create(&csv_name)?)?;
            r.write_mapping_csv(out.create("deviations_mapping.csv")?)?;
            for e in &r.estimates {
                println!(
                    "deviations {:<5} n={:<7} c={} p_hat={:.3e} r_n/I={:.4} r_n/gauss={:.4}{}",
                    e.statistic.name(),
                    e.n,
                    e.level,
                    e.p_hat,
                    e.ratio_rate,
                    e.ratio_gauss,
                    if e.insufficient_events {
                        " (few events)"
                    } else {
                        ""
                    }
                );
            }
            (r.pass, serde_json::to_value(&r)?)
        }
        Suite::Convergence => {
            let r = run_convergence_suite(cfg)?;
            r.write_csv(out.create(&csv_name)?)?;
            for row in &r.rows {
                println!(
                    "convergence {:<10} n={:<7} freq={:.4} mean|err|={:.3e}",
                    row.functional, row.n, row.freq, row.mean_abs_error
                );
            }
            (r.pass, serde_json::to_value(&r)?)
        }
        Suite::Identities => {
            let r = run_identity_suite(cfg)?;
            r.write_csv(out.create(&csv_name)?)?;
            for row in &r.rows {
                println!(
                    "identities {:<20} max residual {:.3e} {}",
                    row.identity,
                    row.max_residual,
                    if row.pass { "ok" } else { "FAIL" }
                );
            }
            println!(
                "identities det Gamma direct {} printed formula {}",
                r.det_audit.direct, r.det_audit.printed_formula
            );
            (r.pass, serde_json::to_value(&r)?)
        }
        Suite::Inequalities => {
            let r = run_inequality_suite(cfg)?;
            r.write_csv(out.create(&csv_name)?)?;
            for row in &r.rows {
                println!(
                    "inequalities {:<14} {}/{} max lhs/rhs {:.4}",
                    row.inequality, row.holds, row.paths, row.max_ratio
                );
            }
            (r.pass, serde_json::to_value(&r)?)
        }
    })
}

fn cmd_suite(suite: Suite, a: &SuiteArgs) -> Result<i32> {
    let started = now();
    let cfg = resolve_suite_config(suite, a)?;
    let mut out = Outputs::new(out_dir(&a.params, suite.name())?);
    let (pass, report) = run_suite_into(&cfg, &mut out)?;
    out.json(
        "summary.json",
        &serde_json::json!({ "suite": suite.name(), "pass": pass, "report": report }),
    )?;
    let dir = out.dir.clone();
    out.finish(RunConfig::Suite(cfg), started)?;
    println!("{}: {}", suite.name(), if pass { "pass" } else { "FAIL" });
    println!("wrote {}", dir.display());
    Ok(if pass { EXIT_OK } else { EXIT_SUITE_FAILED })
}

fn cmd_report(a: &SuiteArgs) -> Result<i32> {
    let started = now();
    let base = resolve_suite_config(Suite::Clt, a)?;
    let mut out = Outputs::new(out_dir(&a.params, "report")?);
    let mut results = serde_json::Map::new();
    let mut all = true;
    for suite in [
        Suite::Identities,
        Suite::Inequalities,
        Suite::Clt,
        Suite::Convergence,
        Suite::Deviations,
    ] {
        let cfg = resolve_suite_config(suite, a)?;
        let (pass, _) = run_suite_into(&cfg, &mut out)?;
        println!("{}: {}", suite.name(), if pass { "pass" } else { "FAIL" });
        all &= pass;
        results.insert(
            suite.name().into(),
            serde_json::json!({ "pass": pass, "config": cfg }),
        );
    }
    out.json(
        "summary.json",
        &serde_json::json!({ "pass": all, "suites": results }),
    )?;
    let dir = out.dir.clone();
    out.finish(RunConfig::Report(base), started)?;
    println!("wrote {}", dir.display());
    Ok(if all { EXIT_OK } else { EXIT_SUITE_FAILED })
}

pub fn dispatch(cli: &Cli) -> Result<i32> {
    match &cli.command {
        Command::Simulate(a) => cmd_simulate(a),
        Command::Estimate(a) => cmd_estimate(a),
        Command::Summary(a) => cmd_summary(a),
        Command::Clt(a) => cmd_suite(Suite::Clt, a),
        Command::Deviations(a) => cmd_suite(Suite::Deviations, a),
        Command::Convergence(a) => cmd_suite(Suite::Convergence, a),
        Command::Identities(a) => cmd_suite(Suite::Identities, a),
        Command::Inequalities(a) => cmd_suite(Suite::Inequalities, a),
        Command::Report(a) => cmd_report(a),
    }
}

/// Parses `argv`, runs the command and maps the outcome to an exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                EXIT_VALIDATION
            } else {
                EXIT_OK
            };
        }
    };
    match dispatch(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            if e.is_validation() {
                EXIT_VALIDATION
            } else {
                EXIT_RUNTIME
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn suite_args(argv: &[&str]) -> SuiteArgs {
        let mut full = vec!["dwlab", "clt"];
        full.extend_from_slice(argv);
        match Cli::try_parse_from(full).unwrap().command {
            Command::Clt(a) => a,
            _ => unreachable!(),
        }
    }

    #[test]
    fn flags_override_file_override_defaults() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("c.json");
        std::fs::write(
            &path,
            r#"{"theta": 0.1, "replications": 300, "noise": {"family": "student_t", "nu": 5.0}}"#,
        )
        .unwrap();
        let a = suite_args(&[
            "--config",
            path.to_str().unwrap(),
            "--reps",
            "200",
            "--rho",
            "-0.4",
        ]);
        let cfg = resolve_suite_config(Suite::Clt, &a).unwrap();
        assert_eq!(cfg.params.theta, 0.1);
        assert_eq!(cfg.params.rho, -0.4);
        assert_eq!(cfg.replications, 200);
        assert_eq!(cfg.noise, NoiseFamily::StudentT { nu: 5.0 });
        assert_eq!(cfg.n_grid, vec![10_000]);
    }

    #[test]
    fn unknown_config_keys_are_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("c.json");
        std::fs::write(&path, r#"{"thetta": 0.1}"#).unwrap();
        let a = suite_args(&["--config", path.to_str().unwrap()]);
        let err = resolve_suite_config(Suite::Clt, &a).unwrap_err();
        assert!(err.is_validation(), "{err}");
    }

    #[test]
    fn invalid_alpha_is_a_validation_error() {
        let a = suite_args(&["--alpha", "0.5"]);
        let err = resolve_suite_config(Suite::Deviations, &a).unwrap_err();
        assert!(err.is_validation());
    }

    #[test]
    fn noise_flags() {
        let none = NoiseArgs {
            noise: None,
            beta: None,
            nu: None,
        };
        assert_eq!(
            noise_family(&none, NoiseFamily::Gaussian).unwrap(),
            NoiseFamily::Gaussian
        );
        let w = NoiseArgs {
            noise: Some(NoiseArg::Weibull),
            beta: Some(0.3),
            nu: None,
        };
        assert_eq!(
            noise_family(&w, NoiseFamily::Gaussian).unwrap(),
            NoiseFamily::SymmetricWeibull { beta: 0.3 }
        );
        let bad = NoiseArgs {
            noise: None,
            beta: Some(0.3),
            nu: None,
        };
        assert!(noise_family(&bad, NoiseFamily::Gaussian).is_err());
    }

    #[test]
    fn manifest_round_trip() {
        let m = RunManifest {
            config_echo: RunConfig::Suite(ExperimentConfig::defaults_for(Suite::Deviations)),
            artifact_version: artifact_version().into(),
            started_at: now(),
            finished_at: now(),
            output_paths: vec!["a/deviations.csv".into()],
        };
        let text = serde_json::to_string(&m).unwrap();
        assert_eq!(serde_json::from_str::<RunManifest>(&text).unwrap(), m);
    }
}
