//! Closed-form limits, asymptotic variances and moderate-deviation rate
//! functions of θ̂ₙ, ρ̂ₙ and D̂ₙ.

use crate::error::{Error, Result};
use crate::model::{validate_params, ModelParams};
use crate::numeric::Matrix2;
use serde::{Deserialize, Serialize};

/// θ* = (θ + ρ) / (1 + θρ), the almost-sure limit of θ̂ₙ.
pub fn theta_star(theta: f64, rho: f64) -> f64 {
    (theta + rho) / (1.0 + theta * rho)
}

/// ρ* = θρθ*, the almost-sure limit of ρ̂ₙ.
pub fn rho_star(theta: f64, rho: f64) -> f64 {
    theta * rho * theta_star(theta, rho)
}

/// ℓ, the almost-sure limit of Sₙ/n.
pub fn ell(theta: f64, rho: f64, sigma2: f64) -> f64 {
    let tr = theta * rho;
    sigma2 * (1.0 + tr) / ((1.0 - theta * theta) * (1.0 - tr) * (1.0 - rho * rho))
}

pub fn sigma2_theta(theta: f64, rho: f64) -> f64 {
    let tr = theta * rho;
    (1.0 - theta * theta) * (1.0 - tr) * (1.0 - rho * rho) / (1.0 + tr).powi(3)
}

pub fn sigma2_rho(theta: f64, rho: f64) -> f64 {
    let tr = theta * rho;
    let sum = theta + rho;
    (1.0 - tr) / (1.0 + tr).powi(3)
        * (sum * sum * (1.0 + tr) * (1.0 + tr)
            + tr * tr * (1.0 - theta * theta) * (1.0 - rho * rho))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AsymptoticSummary {
    pub theta: f64,
    pub rho: f64,
    pub sigma2: f64,
    pub theta_star: f64,
    pub rho_star: f64,
    pub d_star: f64,
    pub ell: f64,
    /// limit of Pₙ/n
    pub ell1: f64,
    /// limit of Qₙ/n
    pub ell2: f64,
    pub sigma2_theta: f64,
    pub sigma2_rho: f64,
    pub sigma2_d: f64,
    /// joint covariance of √n(θ̂ₙ − θ*, ρ̂ₙ − ρ*)
    pub gamma: Matrix2,
    /// σ²Λ is the limit of ⟨Z⟩ₙ/n for Zₙ = (Mₙ, Nₙ)'
    pub lambda: Matrix2,
    pub a_limit: Matrix2,
    /// limit of Tₙ
    pub t_limit: f64,
    /// limit of Jₙ/n
    pub j_limit: f64,
}

/// Fills every closed form for validated parameters.
pub fn summary(params: &ModelParams) -> Result<AsymptoticSummary> {
    let p = validate_params(*params)?;
    let (theta, rho, s2) = (p.theta, p.rho, p.sigma2);
    let tr = theta * rho;
    let ts = theta_star(theta, rho);
    let rs = rho_star(theta, rho);
    let l = ell(theta, rho, s2);
    let st = sigma2_theta(theta, rho);
    let sr = sigma2_rho(theta, rho);
    let one_m_ts2 = 1.0 - ts * ts;

    let gamma = Matrix2::new(st, tr * st, tr * st, sr);
    let lambda = Matrix2::new(l, l * ts, l * ts, l);
    let a_limit = Matrix2::new(one_m_ts2, 0.0, tr + ts * ts, -(theta + rho))
        .scale(1.0 / (l * (1.0 + tr) * one_m_ts2));

    Ok(AsymptoticSummary {
        theta,
        rho,
        sigma2: s2,
        theta_star: ts,
        rho_star: rs,
        d_star: 2.0 * (1.0 - rs),
        ell: l,
        ell1: ts * l,
        ell2: ((theta + rho) * ts - tr) * l,
        sigma2_theta: st,
        sigma2_rho: sr,
        sigma2_d: 4.0 * sr,
        gamma,
        lambda,
        a_limit,
        t_limit: ts * ts + tr,
        j_limit: l * one_m_ts2,
    })
}

impl AsymptoticSummary {
    /// det(Γ) from its entries.
    pub fn det_gamma(&self) -> f64 {
        self.gamma.det()
    }

    pub fn write_json<W: std::io::Write>(&self, out: W) -> Result<()> {
        serde_json::to_writer_pretty(out, self)?;
        Ok(())
    }
}

fn require_invertible(theta: f64, rho: f64) -> Result<()> {
    if theta + rho == 0.0 {
        return Err(Error::Singular(format!(
            "theta = -rho ({theta}): A and Gamma are not invertible"
        )));
    }
    Ok(())
}

/// Max entrywise |Γ − σ²AΛA'|.
pub fn gamma_cross_check(summary: &AsymptoticSummary) -> Result<f64> {
    require_invertible(summary.theta, summary.rho)?;
    let a = summary.a_limit;
    let assembled = a
        .matmul(&summary.lambda)
        .matmul(&a.transpose())
        .scale(summary.sigma2);
    Ok(assembled.max_abs_diff(&summary.gamma))
}

/// The two determinant values compared by [`det_gamma_audit`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DetAudit {
    /// σ²_θ σ²_ρ − (θρσ²_θ)²
    pub direct: f64,
    /// σ²_θ(θ+ρ)²(1−θρ)/(1+ρ²), the closed form as printed
    pub printed_formula: f64,
    /// σ²_θ(θ+ρ)²(1−θρ)/(1+θρ), which the direct value matches
    pub corrected_formula: f64,
}

pub fn det_gamma_audit(summary: &AsymptoticSummary) -> DetAudit {
    let (theta, rho) = (summary.theta, summary.rho);
    let st = summary.sigma2_theta;
    let sum = theta + rho;
    let tr = theta * rho;
    DetAudit {
        direct: st * summary.sigma2_rho - (tr * st) * (tr * st),
        printed_formula: st * sum * sum * (1.0 - tr) / (1.0 + rho * rho),
        corrected_formula: st * sum * sum * (1.0 - tr) / (1.0 + tr),
    }
}

/// `x²/(2v)`, with the degenerate variance mapped to 0 at the origin and +∞
/// elsewhere.
pub fn quadratic_rate(x: f64, variance: f64) -> f64 {
    if variance > 0.0 {
        x * x / (2.0 * variance)
    } else if x == 0.0 {
        0.0
    } else {
        f64::INFINITY
    }
}

/// I_θ(x) = x²/(2σ²_θ)
pub fn rate_theta(x: f64, summary: &AsymptoticSummary) -> f64 {
    quadratic_rate(x, summary.sigma2_theta)
}

/// I_ρ(x) = x²/(2σ²_ρ)
pub fn rate_rho(x: f64, summary: &AsymptoticSummary) -> f64 {
    quadratic_rate(x, summary.sigma2_rho)
}

/// I_D(x) = x²/(2σ²_D) = I_ρ(−x/2)
pub fn rate_dw(x: f64, summary: &AsymptoticSummary) -> f64 {
    quadratic_rate(x, summary.sigma2_d)
}

/// K(v) = ½ v'Γ⁻¹v, solved with the adjugate of Γ and its determinant taken
/// from the entries.
pub fn rate_joint(v: [f64; 2], summary: &AsymptoticSummary) -> Result<f64> {
    require_invertible(summary.theta, summary.rho)?;
    let g = summary.gamma.0;
    let det = summary.det_gamma();
    if !(det > 0.0) {
        return Err(Error::Singular(format!("det(Gamma) = {det}")));
    }
    // v' adj(Γ) v
    let q = g[1][1] * v[0] * v[0] - 2.0 * g[0][1] * v[0] * v[1] + g[0][0] * v[1] * v[1];
    Ok(0.5 * q / det)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Which {
    Theta,
    Rho,
}

/// Marginal rates when θ = −ρ, where Γ is singular:
/// I_θ(x) = x²(1−θ²)/(2(1+θ²)) and I_ρ(x) = x²(1−θ²)/(2θ⁴(1+θ²)).
pub fn rate_special_theta_eq_neg_rho(x: f64, theta: f64, which: Which) -> f64 {
    let t2 = theta * theta;
    match which {
        Which::Theta => x * x * (1.0 - t2) / (2.0 * (1.0 + t2)),
        Which::Rho => {
            if theta == 0.0 {
                if x == 0.0 {
                    0.0
                } else {
                    f64::INFINITY
                }
            } else {
                x * x * (1.0 - t2) / (2.0 * t2 * t2 * (1.0 + t2))
            }
        }
    }
}

/// Speed sequence bₙ = n^α, requiring 0 < α < 1/2.
pub fn bn_sequence(n: usize, alpha: f64) -> Result<f64> {
    validate_alpha(alpha)?;
    Ok((n as f64).powf(alpha))
}

pub fn validate_alpha(alpha: f64) -> Result<()> {
    if alpha > 0.0 && alpha < 0.5 {
        Ok(())
    } else {
        Err(Error::Domain(format!(
            "alpha must lie in (0, 1/2) so that b_n -> inf and b_n/sqrt(n) -> 0, got {alpha}"
        )))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn at(theta: f64, rho: f64) -> AsymptoticSummary {
        summary(&ModelParams::new(theta, rho, 1.0)).unwrap()
    }

    #[test]
    fn white_noise_limits() {
        let s = summary(&ModelParams::new(0.0, 0.0, 2.5)).unwrap();
        assert_eq!(s.theta_star, 0.0);
        assert_eq!(s.sigma2_theta, 1.0);
        assert_eq!(s.rho_star, 0.0);
        assert_eq!(s.sigma2_rho, 0.0);
        assert_eq!(s.d_star, 2.0);
        assert_eq!(s.ell, 2.5);
    }

    #[test]
    fn rho_zero_limits() {
        let s = at(0.5, 0.0);
        assert_eq!(s.theta_star, 0.5);
        assert_relative_eq!(s.sigma2_theta, 0.75, epsilon = 1e-15);
        assert_relative_eq!(s.sigma2_rho, 0.25, epsilon = 1e-15);
        assert_eq!(s.rho_star, 0.0);
    }

    #[test]
    fn structural_invariants() {
        let s = at(0.5, 0.3);
        assert_eq!(s.sigma2_d, 4.0 * s.sigma2_rho);
        assert_eq!(s.rho_star, 0.5 * 0.3 * s.theta_star);
        assert!(s.gamma.is_symmetric());
        assert_eq!(s.gamma.0[0][1], 0.15 * s.sigma2_theta);
        assert_relative_eq!(
            s.lambda.det(),
            s.ell * s.ell * (1.0 - s.theta_star * s.theta_star),
            max_relative = 1e-14
        );
    }

    #[test]
    fn singular_cases() {
        let s = at(0.4, -0.4);
        assert!(matches!(gamma_cross_check(&s), Err(Error::Singular(_))));
        assert!(matches!(
            rate_joint([1.0, 0.0], &s),
            Err(Error::Singular(_))
        ));
        assert_eq!(det_gamma_audit(&s).direct, 0.0);
    }

    #[test]
    fn rates_at_origin_and_degenerate_variance() {
        let s = at(0.0, 0.0);
        assert_eq!(rate_rho(0.0, &s), 0.0);
        assert_eq!(rate_rho(0.1, &s), f64::INFINITY);
        assert_eq!(rate_joint([0.0, 0.0], &at(0.5, 0.3)).unwrap(), 0.0);
    }

    #[test]
    fn special_case_rates() {
        assert_eq!(rate_special_theta_eq_neg_rho(1.0, 0.0, Which::Theta), 0.5);
        assert_relative_eq!(
            rate_special_theta_eq_neg_rho(1.0, 0.5, Which::Theta),
            0.3,
            epsilon = 1e-15
        );
        assert_relative_eq!(
            rate_special_theta_eq_neg_rho(1.0, 0.5, Which::Rho),
            4.8,
            epsilon = 1e-14
        );
        assert_eq!(
            rate_special_theta_eq_neg_rho(1.0, 0.0, Which::Rho),
            f64::INFINITY
        );
        assert_eq!(rate_special_theta_eq_neg_rho(0.0, 0.0, Which::Rho), 0.0);
    }

    #[test]
    fn special_case_agrees_with_general_marginals() {
        for &t in &[0.2, 0.5, -0.7] {
            let s = at(t, -t);
            for &x in &[-1.5, 0.3, 2.0] {
                assert_relative_eq!(
                    rate_theta(x, &s),
                    rate_special_theta_eq_neg_rho(x, t, Which::Theta),
                    max_relative = 1e-12
                );
                assert_relative_eq!(
                    rate_rho(x, &s),
                    rate_special_theta_eq_neg_rho(x, t, Which::Rho),
                    max_relative = 1e-12
                );
            }
        }
    }

    #[test]
    fn speed_sequence() {
        assert_relative_eq!(bn_sequence(10_000, 0.25).unwrap(), 10.0, epsilon = 1e-12);
        assert_relative_eq!(
            bn_sequence(1_000_000, 0.2).unwrap(),
            15.848931924611133,
            epsilon = 1e-12
        );
        assert!(bn_sequence(100, 0.5).is_err());
        assert!(bn_sequence(100, 0.0).is_err());
    }

    #[test]
    fn unstable_params_rejected() {
        assert!(summary(&ModelParams::new(1.2, 0.0, 1.0)).is_err());
    }
}
