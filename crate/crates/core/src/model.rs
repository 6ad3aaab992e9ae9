//! The stable AR(1) process driven by AR(1) noise:
//!
//! ```text
//! X_n = θ X_{n-1} + ε_n
//! ε_n = ρ ε_{n-1} + V_n
//! ```
//!
//! with i.i.d. centred innovations `V_n` of variance σ².

use crate::error::{Error, Result};
use crate::numeric::{fmt_f64, Matrix2};
use rand::Rng;
use rand_distr::{Distribution, StandardNormal, StudentT, Weibull};
use serde::{Deserialize, Serialize};
use statrs::function::gamma::gamma;
use std::io::{Read, Write};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    pub theta: f64,
    pub rho: f64,
    pub sigma2: f64,
    #[serde(default)]
    pub x0: f64,
    #[serde(default)]
    pub eps0: f64,
}

impl ModelParams {
    /// Parameters with zero initial values.
    pub fn new(theta: f64, rho: f64, sigma2: f64) -> Self {
        ModelParams {
            theta,
            rho,
            sigma2,
            x0: 0.0,
            eps0: 0.0,
        }
    }

    pub fn with_initial(mut self, x0: f64, eps0: f64) -> Self {
        self.x0 = x0;
        self.eps0 = eps0;
        self
    }

    pub fn validate(self) -> Result<Self> {
        validate_params(self)
    }
}

impl Default for ModelParams {
    fn default() -> Self {
        ModelParams::new(0.5, 0.3, 1.0)
    }
}

/// Returns `p` unchanged when |θ| < 1, |ρ| < 1 and σ² > 0.
pub fn validate_params(p: ModelParams) -> Result<ModelParams> {
    if !p.theta.is_finite() || !p.rho.is_finite() {
        return Err(Error::Domain(format!(
            "theta and rho must be finite (theta={}, rho={})",
            p.theta, p.rho
        )));
    }
    if p.theta.abs() >= 1.0 {
        return Err(Error::Stability(format!(
            "|theta| must be < 1, got theta={}",
            p.theta
        )));
    }
    if p.rho.abs() >= 1.0 {
        return Err(Error::Stability(format!(
            "|rho| must be < 1, got rho={}",
            p.rho
        )));
    }
    if !(p.sigma2 > 0.0) || !p.sigma2.is_finite() {
        return Err(Error::Domain(format!(
            "sigma2 must be a finite positive number, got {}",
            p.sigma2
        )));
    }
    if !p.x0.is_finite() || !p.eps0.is_finite() {
        return Err(Error::Domain("initial values must be finite".into()));
    }
    Ok(p)
}

/// Companion matrix of the lag vector `(X_n, X_{n-1})'`:
/// `A = [[θ+ρ, −θρ], [1, 0]]`, whose eigenvalues are θ and ρ.
pub fn companion_matrix(p: &ModelParams) -> Matrix2 {
    Matrix2::new(p.theta + p.rho, -p.theta * p.rho, 1.0, 0.0)
}

/// Distribution family of the innovations.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum NoiseFamily {
    Gaussian,
    /// `R·W` with `R` a random sign and `W` Weibull of shape `2β`, so that
    /// `E[exp(t|V|^{2β})] < ∞` for small `t > 0`.
    SymmetricWeibull {
        beta: f64,
    },
    /// Student t with `nu` degrees of freedom (heavy-tailed control).
    StudentT {
        nu: f64,
    },
}

impl NoiseFamily {
    pub fn name(&self) -> &'static str {
        match self {
            NoiseFamily::Gaussian => "gaussian",
            NoiseFamily::SymmetricWeibull { .. } => "symmetric_weibull",
            NoiseFamily::StudentT { .. } => "student_t",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseSpec {
    #[serde(flatten)]
    pub family: NoiseFamily,
    pub sigma2: f64,
}

impl NoiseSpec {
    pub fn gaussian(sigma2: f64) -> Self {
        NoiseSpec {
            family: NoiseFamily::Gaussian,
            sigma2,
        }
    }

    pub fn symmetric_weibull(beta: f64, sigma2: f64) -> Self {
        NoiseSpec {
            family: NoiseFamily::SymmetricWeibull { beta },
            sigma2,
        }
    }

    pub fn student_t(nu: f64, sigma2: f64) -> Self {
        NoiseSpec {
            family: NoiseFamily::StudentT { nu },
            sigma2,
        }
    }

    /// Whether the family satisfies the Chen-Ledoux tail condition for every
    /// speed `b_n = n^α`, 0 < α < 1/2.
    pub fn satisfies_cl(&self) -> bool {
        !matches!(self.family, NoiseFamily::StudentT { .. })
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.sigma2 > 0.0) || !self.sigma2.is_finite() {
            return Err(Error::Domain(format!(
                "noise variance must be positive, got {}",
                self.sigma2
            )));
        }
        match self.family {
            NoiseFamily::Gaussian => Ok(()),
            NoiseFamily::SymmetricWeibull { beta } => {
                if beta > 0.0 && beta < 1.0 {
                    Ok(())
                } else {
                    Err(Error::Domain(format!(
                        "weibull beta must lie in (0, 1), got {beta}"
                    )))
                }
            }
            NoiseFamily::StudentT { nu } => {
                if nu > 2.0 && nu.is_finite() {
                    Ok(())
                } else {
                    Err(Error::Domain(format!(
                        "student t needs nu > 2 for a finite variance, got {nu}"
                    )))
                }
            }
        }
    }

    /// `E[V_1^4]`; infinite for Student t with ν ≤ 4.
    pub fn fourth_moment(&self) -> f64 {
        let s4 = self.sigma2 * self.sigma2;
        match self.family {
            NoiseFamily::Gaussian => 3.0 * s4,
            NoiseFamily::SymmetricWeibull { beta } => {
                let m2 = gamma(1.0 + 1.0 / beta);
                gamma(1.0 + 2.0 / beta) / (m2 * m2) * s4
            }
            NoiseFamily::StudentT { nu } => {
                if nu > 4.0 {
                    3.0 * (nu - 2.0) / (nu - 4.0) * s4
                } else {
                    f64::INFINITY
                }
            }
        }
    }

    pub fn sampler(&self) -> Result<NoiseSampler> {
        self.validate()?;
        let sd = self.sigma2.sqrt();
        Ok(match self.family {
            NoiseFamily::Gaussian => NoiseSampler::Gaussian { sd },
            NoiseFamily::SymmetricWeibull { beta } => {
                let shape = 2.0 * beta;
                let weibull =
                    Weibull::new(1.0, shape).map_err(|e| Error::Domain(format!("weibull: {e}")))?;
                // E[W²] = Γ(1 + 2/shape) = Γ(1 + 1/β)
                let scale = sd / gamma(1.0 + 1.0 / beta).sqrt();
                NoiseSampler::SymmetricWeibull { weibull, scale }
            }
            NoiseFamily::StudentT { nu } => {
                let t = StudentT::new(nu).map_err(|e| Error::Domain(format!("student t: {e}")))?;
                let scale = sd * ((nu - 2.0) / nu).sqrt();
                NoiseSampler::StudentT { t, scale }
            }
        })
    }
}

/// Ready-to-draw innovation distribution with its variance scaling applied.
#[derive(Debug, Clone, Copy)]
pub enum NoiseSampler {
    Gaussian { sd: f64 },
    SymmetricWeibull { weibull: Weibull<f64>, scale: f64 },
    StudentT { t: StudentT<f64>, scale: f64 },
}

impl NoiseSampler {
    #[inline]
    pub fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match self {
            NoiseSampler::Gaussian { sd } => {
                let z: f64 = rng.sample(StandardNormal);
                sd * z
            }
            NoiseSampler::SymmetricWeibull { weibull, scale } => {
                let w = weibull.sample(rng);
                if rng.random::<bool>() {
                    scale * w
                } else {
                    -scale * w
                }
            }
            NoiseSampler::StudentT { t, scale } => scale * t.sample(rng),
        }
    }
}

/// Draws `V_1..V_n`.
pub fn sample_noise<R: Rng + ?Sized>(spec: &NoiseSpec, n: usize, rng: &mut R) -> Result<Vec<f64>> {
    if n == 0 {
        return Err(Error::Domain("noise sample size must be >= 1".into()));
    }
    let sampler = spec.sampler()?;
    Ok((0..n).map(|_| sampler.draw(rng)).collect())
}

/// One step of the two coupled recurrences.
#[derive(Debug, Clone, Copy)]
pub struct Recurrence {
    theta: f64,
    rho: f64,
    pub x: f64,
    pub eps: f64,
}

impl Recurrence {
    pub fn new(p: &ModelParams) -> Self {
        Recurrence {
            theta: p.theta,
            rho: p.rho,
            x: p.x0,
            eps: p.eps0,
        }
    }

    #[inline]
    pub fn step(&mut self, v: f64) -> f64 {
        self.eps = self.rho * self.eps + v;
        self.x = self.theta * self.x + self.eps;
        self.x
    }
}

/// One simulated path: `x[k] = X_k` and `eps[k] = ε_k` for `0 ≤ k ≤ n`,
/// `v[k-1] = V_k` for `1 ≤ k ≤ n`.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub x: Vec<f64>,
    pub eps: Vec<f64>,
    pub v: Vec<f64>,
}

impl Trajectory {
    pub fn n(&self) -> usize {
        self.v.len()
    }

    /// `V_k` for `1 ≤ k ≤ n`.
    pub fn v_at(&self, k: usize) -> f64 {
        self.v[k - 1]
    }

    /// Largest violation of the two recurrences, scaled by `1 + |X_k|`.
    pub fn recurrence_defect(&self, p: &ModelParams) -> f64 {
        let mut worst = 0.0f64;
        for k in 1..=self.n() {
            let de = (self.eps[k] - p.rho * self.eps[k - 1] - self.v_at(k)).abs();
            let dx = (self.x[k] - p.theta * self.x[k - 1] - self.eps[k]).abs();
            worst = worst.max(de.max(dx) / (1.0 + self.x[k].abs()));
        }
        worst
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["k", "x", "eps", "v"])?;
        for k in 0..=self.n() {
            let v = if k == 0 {
                String::new()
            } else {
                fmt_f64(self.v_at(k))
            };
            w.write_record([k.to_string(), fmt_f64(self.x[k]), fmt_f64(self.eps[k]), v])?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn read_csv<R: Read>(input: R) -> Result<Self> {
        let mut r = csv::Reader::from_reader(input);
        let headers = r.headers()?.clone();
        if headers.iter().collect::<Vec<_>>() != ["k", "x", "eps", "v"] {
            return Err(Error::Parse(format!(
                "trajectory header must be k,x,eps,v, got {}",
                headers.iter().collect::<Vec<_>>().join(",")
            )));
        }
        let parse = |s: &str, what: &str, k: usize| -> Result<f64> {
            s.trim()
                .parse::<f64>()
                .map_err(|_| Error::Parse(format!("row {k}: bad {what} value {s:?}")))
        };
        let mut traj = Trajectory {
            x: Vec::new(),
            eps: Vec::new(),
            v: Vec::new(),
        };
        for (row, rec) in r.records().enumerate() {
            let rec = rec?;
            let k: usize = rec[0]
                .trim()
                .parse()
                .map_err(|_| Error::Parse(format!("row {row}: bad index {:?}", &rec[0])))?;
            if k != row {
                return Err(Error::Parse(format!("expected index {row}, found {k}")));
            }
            traj.x.push(parse(&rec[1], "x", k)?);
            traj.eps.push(parse(&rec[2], "eps", k)?);
            if k == 0 {
                if !rec[3].trim().is_empty() {
                    return Err(Error::Parse("v must be empty at k = 0".into()));
                }
            } else {
                traj.v.push(parse(&rec[3], "v", k)?);
            }
        }
        if traj.x.is_empty() {
            return Err(Error::Parse("trajectory file has no rows".into()));
        }
        Ok(traj)
    }
}

/// Runs the recurrences from `(p.x0, p.eps0)` on the given innovations.
pub fn simulate_with_innovations(p: &ModelParams, v: &[f64]) -> Result<Trajectory> {
    let p = validate_params(*p)?;
    let n = v.len();
    let mut x = Vec::with_capacity(n + 1);
    let mut eps = Vec::with_capacity(n + 1);
    x.push(p.x0);
    eps.push(p.eps0);
    let mut rec = Recurrence::new(&p);
    for &vk in v {
        rec.step(vk);
        x.push(rec.x);
        eps.push(rec.eps);
    }
    Ok(Trajectory {
        x,
        eps,
        v: v.to_vec(),
    })
}

/// Simulates a path of length `n ≥ 2`. The noise variance must match `p.sigma2`.
pub fn simulate<R: Rng + ?Sized>(
    p: &ModelParams,
    spec: &NoiseSpec,
    n: usize,
    rng: &mut R,
) -> Result<Trajectory> {
    let p = validate_params(*p)?;
    check_noise_matches(&p, spec)?;
    if n < 2 {
        return Err(Error::Domain(format!("path length must be >= 2, got {n}")));
    }
    let v = sample_noise(spec, n, rng)?;
    simulate_with_innovations(&p, &v)
}

pub(crate) fn check_noise_matches(p: &ModelParams, spec: &NoiseSpec) -> Result<()> {
    if spec.sigma2 != p.sigma2 {
        return Err(Error::Domain(format!(
            "noise variance {} differs from model sigma2 {}",
            spec.sigma2, p.sigma2
        )));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::seeded;

    #[test]
    fn validation_examples() {
        assert!(validate_params(ModelParams::new(0.5, 0.3, 1.0)).is_ok());
        assert!(matches!(
            validate_params(ModelParams::new(1.0, 0.3, 1.0)),
            Err(Error::Stability(_))
        ));
        assert!(matches!(
            validate_params(ModelParams::new(0.5, -1.0, 1.0)),
            Err(Error::Stability(_))
        ));
        assert!(matches!(
            validate_params(ModelParams::new(0.5, 0.3, 0.0)),
            Err(Error::Domain(_))
        ));
        assert!(matches!(
            validate_params(ModelParams::new(f64::NAN, 0.3, 1.0)),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn companion_matrix_entries() {
        let a = companion_matrix(&ModelParams::new(0.5, 0.3, 1.0));
        assert_eq!(a, Matrix2::new(0.8, -0.15, 1.0, 0.0));
        let a0 = companion_matrix(&ModelParams::new(0.0, 0.0, 1.0));
        assert_eq!(a0.0, [[0.0, 0.0], [1.0, 0.0]]);
        assert_eq!(a0.spectral_radius(), 0.0);
    }

    #[test]
    fn noise_parameter_errors() {
        let mut rng = seeded(1);
        assert!(sample_noise(&NoiseSpec::symmetric_weibull(1.0, 1.0), 10, &mut rng).is_err());
        assert!(sample_noise(&NoiseSpec::symmetric_weibull(0.0, 1.0), 10, &mut rng).is_err());
        assert!(sample_noise(&NoiseSpec::student_t(2.0, 1.0), 10, &mut rng).is_err());
        assert!(sample_noise(&NoiseSpec::gaussian(1.0), 0, &mut rng).is_err());
    }

    #[test]
    fn cl_flags() {
        assert!(NoiseSpec::gaussian(1.0).satisfies_cl());
        assert!(NoiseSpec::symmetric_weibull(0.4, 1.0).satisfies_cl());
        assert!(!NoiseSpec::student_t(3.0, 1.0).satisfies_cl());
        assert_eq!(
            NoiseSpec::student_t(3.0, 1.0).fourth_moment(),
            f64::INFINITY
        );
        assert_eq!(NoiseSpec::gaussian(2.0).fourth_moment(), 12.0);
    }

    #[test]
    fn white_noise_case_copies_innovations() {
        let mut rng = seeded(9);
        let p = ModelParams::new(0.0, 0.0, 1.0);
        let t = simulate(&p, &NoiseSpec::gaussian(1.0), 50, &mut rng).unwrap();
        for k in 1..=50 {
            assert_eq!(t.x[k], t.v_at(k));
        }
    }

    #[test]
    fn noiseless_geometric_decay() {
        let p = ModelParams::new(0.5, 0.0, 1.0).with_initial(1.0, 0.0);
        let t = simulate_with_innovations(&p, &[0.0; 20]).unwrap();
        for k in 0..=20 {
            assert_eq!(t.x[k], 0.5f64.powi(k as i32));
        }
    }

    #[test]
    fn short_paths_rejected() {
        let mut rng = seeded(1);
        let p = ModelParams::default();
        assert!(simulate(&p, &NoiseSpec::gaussian(1.0), 1, &mut rng).is_err());
        assert!(simulate(&p, &NoiseSpec::gaussian(2.0), 10, &mut rng).is_err());
    }

    #[test]
    fn csv_round_trip_is_exact() {
        let mut rng = seeded(5);
        let p = ModelParams::new(0.7, -0.2, 1.5).with_initial(0.3, -1.1);
        let t = simulate(&p, &NoiseSpec::gaussian(1.5), 100, &mut rng).unwrap();
        let mut buf = Vec::new();
        t.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("k,x,eps,v\n0,0.3,-1.1,\n"));
        let back = Trajectory::read_csv(buf.as_slice()).unwrap();
        assert_eq!(back, t);
    }

    #[test]
    fn csv_rejects_bad_header() {
        assert!(Trajectory::read_csv("a,b,c,d\n0,1,2,\n".as_bytes()).is_err());
        assert!(Trajectory::read_csv("k,x,eps,v\n0,1,2,3\n".as_bytes()).is_err());
    }
}
