//! Estimators and martingale functionals of a trajectory, plus the exact
//! algebraic identities and almost-sure bounds that tie them together.
//!
//! Everything is accumulated in one forward pass by [`LedgerAccumulator`]:
//! the residual-based quantities (Jₙ, ρ̂ₙ, D̂ₙ) are expanded into lag-0,
//! lag-1 and lag-2 power sums so they can be finalized once θ̂ₙ is known.
//! Sums are carried in double-double arithmetic.
//!
//! Residual convention: ε̂₀ = X₀, so that `Jₙ = Sₙ − 2θ̂ₙPₙ + θ̂ₙ²Sₙ₋₁` holds
//! exactly.

use crate::asymptotics::{rho_star, theta_star};
use crate::error::{Error, Result};
use crate::model::{ModelParams, Trajectory};
use crate::numeric::Dd;
use serde::{Deserialize, Serialize};

/// All single-pass functionals of one trajectory.
///
/// `Q_n` is the lag-2 product sum Σ_{k=2}^n X_{k−2}X_k; `N_n` is the
/// martingale Σ_{k=2}^n X_{k−2}V_k. `T4_n` is Σ X_k⁴ and `Gamma4_n` is Σ V_k⁴.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StatLedger {
    pub n: usize,
    #[serde(rename = "L_n")]
    pub l_n: f64,
    #[serde(rename = "M_n")]
    pub m_n: f64,
    #[serde(rename = "N_n")]
    pub n_n: f64,
    #[serde(rename = "Q_n")]
    pub q_n: f64,
    #[serde(rename = "S_n")]
    pub s_n: f64,
    #[serde(rename = "S_nm1")]
    pub s_nm1: f64,
    #[serde(rename = "P_n")]
    pub p_n: f64,
    #[serde(rename = "J_n")]
    pub j_n: f64,
    #[serde(rename = "J_nm1")]
    pub j_nm1: f64,
    pub theta_hat: f64,
    pub rho_hat: f64,
    pub dw: f64,
    pub f_n: f64,
    #[serde(rename = "T_n")]
    pub t_n: f64,
    #[serde(rename = "R_theta")]
    pub r_theta: f64,
    #[serde(rename = "T4_n")]
    pub t4_n: f64,
    #[serde(rename = "Gamma4_n")]
    pub gamma4_n: f64,
    /// ε̂₀, equal to X₀.
    pub eps_hat0: f64,
}

impl StatLedger {
    pub fn write_json<W: std::io::Write>(&self, out: W) -> Result<()> {
        serde_json::to_writer_pretty(out, self)?;
        Ok(())
    }

    /// Writes a header row and one data row per ledger.
    pub fn write_csv<W: std::io::Write>(ledgers: &[StatLedger], out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(Self::CSV_COLUMNS)?;
        for l in ledgers {
            w.write_record(l.csv_fields())?;
        }
        w.flush()?;
        Ok(())
    }

    pub const CSV_COLUMNS: [&'static str; 19] = [
        "n",
        "L_n",
        "M_n",
        "N_n",
        "Q_n",
        "S_n",
        "S_nm1",
        "P_n",
        "J_n",
        "J_nm1",
        "theta_hat",
        "rho_hat",
        "dw",
        "f_n",
        "T_n",
        "R_theta",
        "T4_n",
        "Gamma4_n",
        "eps_hat0",
    ];

    fn csv_fields(&self) -> Vec<String> {
        use crate::numeric::fmt_f64 as f;
        vec![
            self.n.to_string(),
            f(self.l_n),
            f(self.m_n),
            f(self.n_n),
            f(self.q_n),
            f(self.s_n),
            f(self.s_nm1),
            f(self.p_n),
            f(self.j_n),
            f(self.j_nm1),
            f(self.theta_hat),
            f(self.rho_hat),
            f(self.dw),
            f(self.f_n),
            f(self.t_n),
            f(self.r_theta),
            f(self.t4_n),
            f(self.gamma4_n),
            f(self.eps_hat0),
        ]
    }
}

/// Streaming accumulator fed with `(V_k, X_k)` for k = 1, 2, ….
#[derive(Debug, Clone)]
pub struct LedgerAccumulator {
    n: usize,
    x0: f64,
    eps0: f64,
    x_prev: f64,
    x_prev2: f64,
    d_prev: f64,
    l: Dd,
    m: Dd,
    nn: Dd,
    s: Dd,
    p: Dd,
    q: Dd,
    t4: Dd,
    g4: Dd,
    // Σ D_k² and Σ D_k D_{k−1} with D_k = X_k − X_{k−1} and D₀ = X₀
    dsq: Dd,
    dcross: Dd,
}

impl LedgerAccumulator {
    pub fn new(x0: f64, eps0: f64) -> Self {
        let x0sq = x0 * x0;
        LedgerAccumulator {
            n: 0,
            x0,
            eps0,
            x_prev: x0,
            x_prev2: 0.0,
            d_prev: x0,
            l: Dd::ZERO,
            m: Dd::ZERO,
            nn: Dd::ZERO,
            s: Dd::prod(x0, x0),
            p: Dd::ZERO,
            q: Dd::ZERO,
            t4: Dd::prod(x0sq, x0sq),
            g4: Dd::ZERO,
            dsq: Dd::ZERO,
            dcross: Dd::ZERO,
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Feeds `V_k` and the resulting `X_k`.
    #[inline]
    pub fn push(&mut self, v: f64, x: f64) {
        let k = self.n + 1;
        let v2 = v * v;
        let x2 = x * x;
        self.l.add_prod(v, v);
        self.g4.add_prod(v2, v2);
        self.m.add_prod(self.x_prev, v);
        if k >= 2 {
            self.nn.add_prod(self.x_prev2, v);
            self.q.add_prod(self.x_prev2, x);
        }
        self.s.add_prod(x, x);
        self.p.add_prod(self.x_prev, x);
        self.t4.add_prod(x2, x2);
        let d = x - self.x_prev;
        self.dsq.add_prod(d, d);
        self.dcross.add_prod(d, self.d_prev);
        self.d_prev = d;
        self.x_prev2 = self.x_prev;
        self.x_prev = x;
        self.n = k;
    }

    pub fn finalize(&self, params: &ModelParams) -> Result<StatLedger> {
        let n = self.n;
        if n < 2 {
            return Err(Error::Domain(format!("ledger needs n >= 2, got {n}")));
        }
        let (theta, rho) = (params.theta, params.rho);
        let xn = self.x_prev;
        let xnm1 = self.x_prev2;
        let x0 = self.x0;

        let s_nm1 = self.s - Dd::prod(xn, xn);
        if s_nm1.to_f64() <= 0.0 {
            return Err(Error::Degenerate("S_{n-1} = 0".into()));
        }
        let s_nm2 = s_nm1 - Dd::prod(xnm1, xnm1);
        let p_nm1 = self.p - Dd::prod(xn, xnm1);
        let th = self.p / s_nm1;
        let two = Dd::from_f64(2.0);
        let th2 = th * th;

        let j_n = self.s - two * th * self.p + th2 * s_nm1;
        let j_nm1 = s_nm1 - two * th * p_nm1 + th2 * s_nm2;
        if j_nm1.to_f64() <= 0.0 {
            return Err(Error::Degenerate("J_{n-1} = 0".into()));
        }
        // Σ_{k=1}^n ε̂_k ε̂_{k−1}
        let cross = self.p - th * self.q - th * s_nm1 + th2 * p_nm1;
        let rho_hat = cross / j_nm1;

        // Σ_{k=1}^n (ε̂_k − ε̂_{k−1})² = Σ (D_k − θ̂ D_{k−1})², D₀ = X₀
        let d_lag_sq = self.dsq - Dd::prod(self.d_prev, self.d_prev) + Dd::prod(x0, x0);
        let dw_num = self.dsq - two * th * self.dcross + th2 * d_lag_sq;
        let dw = dw_num / j_n;

        let theta_hat = th.to_f64();
        let j_n_f = j_n.to_f64();
        let e_n = xn - theta_hat * xnm1;
        let f_n = (e_n * e_n / j_n_f).clamp(0.0, 1.0);

        let ts = theta_star(theta, rho);
        let rs = rho_star(theta, rho);
        let s_n = self.s.to_f64();
        let s_nm1_f = s_nm1.to_f64();
        let p_n = self.p.to_f64();
        let q_n = self.q.to_f64();
        let t_n = 1.0 + ts * rs - (1.0 + rs * (theta_hat + ts)) * (s_n / s_nm1_f)
            + (2.0 * rs + theta_hat + ts) * (p_n / s_nm1_f)
            - q_n / s_nm1_f;
        let r_theta = theta * rho * xn * xnm1 + rho * x0 * (self.eps0 - x0);

        Ok(StatLedger {
            n,
            l_n: self.l.to_f64(),
            m_n: self.m.to_f64(),
            n_n: self.nn.to_f64(),
            q_n,
            s_n,
            s_nm1: s_nm1_f,
            p_n,
            j_n: j_n_f,
            j_nm1: j_nm1.to_f64(),
            theta_hat,
            rho_hat: rho_hat.to_f64(),
            dw: dw.to_f64(),
            f_n,
            t_n,
            r_theta,
            t4_n: self.t4.to_f64(),
            gamma4_n: self.g4.to_f64(),
            eps_hat0: x0,
        })
    }
}

/// Computes the ledger of a stored trajectory.
pub fn ledger(traj: &Trajectory, params: &ModelParams) -> Result<StatLedger> {
    check_shape(traj)?;
    let mut acc = LedgerAccumulator::new(traj.x[0], traj.eps[0]);
    for k in 1..=traj.n() {
        acc.push(traj.v_at(k), traj.x[k]);
    }
    acc.finalize(params)
}

fn check_shape(traj: &Trajectory) -> Result<()> {
    let n = traj.n();
    if traj.x.len() != n + 1 || traj.eps.len() != n + 1 {
        return Err(Error::Domain(format!(
            "inconsistent trajectory lengths: x={}, eps={}, v={}",
            traj.x.len(),
            traj.eps.len(),
            n
        )));
    }
    Ok(())
}

/// `R_n(θ) = θρ XₙXₙ₋₁ + ρ X₀(ε₀ − X₀)`.
pub fn remainder_theta(traj: &Trajectory, params: &ModelParams) -> Result<f64> {
    check_shape(traj)?;
    let n = traj.n();
    if n < 1 {
        return Err(Error::Domain("remainder needs n >= 1".into()));
    }
    let (theta, rho) = (params.theta, params.rho);
    let x0 = traj.x[0];
    Ok(theta * rho * traj.x[n] * traj.x[n - 1] + rho * x0 * (traj.eps[0] - x0))
}

/// `|(θ̂ₙ − θ*) − (Mₙ + Rₙ(θ)) / ((1 + θρ) Sₙ₋₁)|`.
pub fn check_theta_decomposition(ledger: &StatLedger, params: &ModelParams) -> Result<f64> {
    if ledger.s_nm1 == 0.0 {
        return Err(Error::Degenerate("S_{n-1} = 0".into()));
    }
    let (theta, rho) = (params.theta, params.rho);
    let lhs = ledger.theta_hat - theta_star(theta, rho);
    let rhs = (ledger.m_n + ledger.r_theta) / ((1.0 + theta * rho) * ledger.s_nm1);
    Ok((lhs - rhs).abs())
}

/// The remainder `Rₙ` of the Sₙ decomposition, including ξ₁.
pub fn sn_remainder(traj: &Trajectory, params: &ModelParams) -> f64 {
    let (theta, rho) = (params.theta, params.rho);
    let n = traj.n();
    let (xn, xnm1) = (traj.x[n], traj.x[n - 1]);
    let (x0, e0, v1) = (traj.x[0], traj.eps[0], traj.v_at(1));
    let tr = theta * rho;
    let sum = theta + rho;
    let rs = rho_star(theta, rho);
    let xi1 = (1.0 - 2.0 * tr - rho * rho) * x0 * x0 + rho * rho * e0 * e0 + 2.0 * tr * x0 * e0
        - 2.0 * rho * rs * (e0 - x0) * x0
        + 2.0 * rho * (e0 - x0) * v1;
    (2.0 * sum * rs - sum * sum - tr * tr) * xn * xn - tr * tr * xnm1 * xnm1
        + 2.0 * rs * xn * xnm1
        + xi1
}

/// Residual of
/// `Sₙ/n − ℓ = (ℓ/σ²)[(Lₙ/n − σ²) + 2θ* Mₙ/n − 2θρ Nₙ/n + Rₙ/n]`.
pub fn check_sn_decomposition(
    ledger: &StatLedger,
    traj: &Trajectory,
    params: &ModelParams,
) -> Result<f64> {
    check_shape(traj)?;
    if traj.n() < 2 || ledger.n != traj.n() {
        return Err(Error::Domain(
            "Sn decomposition needs n >= 2 and a ledger of the same trajectory".into(),
        ));
    }
    let (theta, rho, s2) = (params.theta, params.rho, params.sigma2);
    let nf = ledger.n as f64;
    let ell = crate::asymptotics::ell(theta, rho, s2);
    let ts = theta_star(theta, rho);
    let rn = sn_remainder(traj, params);
    let lhs = ledger.s_n / nf - ell;
    let rhs = (ell / s2)
        * ((ledger.l_n / nf - s2) + 2.0 * ts * ledger.m_n / nf
            - 2.0 * theta * rho * ledger.n_n / nf
            + rn / nf);
    Ok((lhs - rhs).abs())
}

/// `|D̂ₙ − [2(1 − ρ̂ₙ) − (1 − 2ρ̂ₙ) fₙ − ε̂₀²/Jₙ]|`.
pub fn check_dw_identity(ledger: &StatLedger) -> Result<f64> {
    if !(ledger.j_n > 0.0) {
        return Err(Error::Degenerate("J_n = 0".into()));
    }
    let r = ledger.rho_hat;
    let e0 = ledger.eps_hat0;
    let rhs = 2.0 * (1.0 - r) - (1.0 - 2.0 * r) * ledger.f_n - e0 * e0 / ledger.j_n;
    Ok((ledger.dw - rhs).abs())
}

/// `|Jₙ − (Sₙ − 2θ̂ₙPₙ + θ̂ₙ²Sₙ₋₁)| / Jₙ`.
pub fn check_j_identity(ledger: &StatLedger) -> Result<f64> {
    if !(ledger.j_n > 0.0) {
        return Err(Error::Degenerate("J_n = 0".into()));
    }
    let th = ledger.theta_hat;
    let rhs = ledger.s_n - 2.0 * th * ledger.p_n + th * th * ledger.s_nm1;
    Ok((ledger.j_n - rhs).abs() / ledger.j_n)
}

/// One almost-sure bound evaluated on a path.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundCheck {
    pub lhs: f64,
    pub rhs: f64,
    pub holds: bool,
}

impl BoundCheck {
    // the bounds are exact in real arithmetic; allow for rounding in the sums
    const SLACK: f64 = 1e-12;

    fn new(lhs: f64, rhs: f64) -> Self {
        BoundCheck {
            lhs,
            rhs,
            holds: lhs <= rhs * (1.0 + Self::SLACK) + f64::MIN_POSITIVE,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InequalityReport {
    /// Sₙ ≤ αX₀² + βε₀² + βLₙ
    pub sum_squares: BoundCheck,
    /// max Xₖ² ≤ X₀²/(1−|θ|) + (1−|θ|)⁻² max εₖ²
    pub max_x: BoundCheck,
    /// max εₖ² ≤ ε₀²/(1−|ρ|) + (1−|ρ|)⁻² max Vₖ²
    pub max_eps: BoundCheck,
    /// Σ Xₖ⁴ ≤ α₄X₀⁴ + β₄ε₀⁴ + β₄ Σ Vₖ⁴
    pub fourth_powers: BoundCheck,
}

impl InequalityReport {
    pub fn all_hold(&self) -> bool {
        self.sum_squares.holds && self.max_x.holds && self.max_eps.holds && self.fourth_powers.holds
    }

    pub fn as_array(&self) -> [BoundCheck; 4] {
        [
            self.sum_squares,
            self.max_x,
            self.max_eps,
            self.fourth_powers,
        ]
    }
}

pub fn check_as_inequalities(
    traj: &Trajectory,
    ledger: &StatLedger,
    params: &ModelParams,
) -> Result<InequalityReport> {
    check_shape(traj)?;
    if traj.n() < 1 {
        return Err(Error::Domain("inequalities need n >= 1".into()));
    }
    let ct = 1.0 - params.theta.abs();
    let cr = 1.0 - params.rho.abs();
    let x0 = traj.x[0];
    let e0 = traj.eps[0];

    let alpha = 1.0 + ct.powi(-2);
    let beta = cr.powi(-2) * ct.powi(-2);
    let sum_squares = BoundCheck::new(
        ledger.s_n,
        alpha * x0 * x0 + beta * e0 * e0 + beta * ledger.l_n,
    );

    let max_sq = |xs: &[f64]| xs.iter().fold(0.0f64, |m, x| m.max(x * x));
    let max_x2 = max_sq(&traj.x[1..]);
    let max_e2 = max_sq(&traj.eps[1..]);
    let max_v2 = max_sq(&traj.v);
    let max_x = BoundCheck::new(max_x2, x0 * x0 / ct + max_e2 / (ct * ct));
    let max_eps = BoundCheck::new(max_e2, e0 * e0 / cr + max_v2 / (cr * cr));

    let alpha4 = 1.0 + ct.powi(-4);
    let beta4 = cr.powi(-4) * ct.powi(-4);
    let fourth_powers = BoundCheck::new(
        ledger.t4_n,
        alpha4 * x0.powi(4) + beta4 * e0.powi(4) + beta4 * ledger.gamma4_n,
    );

    Ok(InequalityReport {
        sum_squares,
        max_x,
        max_eps,
        fourth_powers,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{simulate, simulate_with_innovations, NoiseSpec};
    use crate::rng::seeded;

    fn gaussian_path(p: &ModelParams, n: usize, seed: u64) -> Trajectory {
        simulate(p, &NoiseSpec::gaussian(p.sigma2), n, &mut seeded(seed)).unwrap()
    }

    #[test]
    fn noiseless_path_identifies_theta() {
        let p = ModelParams::new(0.5, 0.0, 1.0).with_initial(1.0, 0.0);
        let t = simulate_with_innovations(&p, &[0.0; 10]).unwrap();
        let l = ledger(&t, &p).unwrap();
        assert_eq!(l.theta_hat, 0.5);
        // every residual after ε̂₀ vanishes
        assert_eq!(l.j_n, 1.0);
    }

    #[test]
    fn all_zero_path_is_degenerate() {
        let p = ModelParams::new(0.5, 0.3, 1.0);
        let t = simulate_with_innovations(&p, &[0.0; 5]).unwrap();
        assert!(matches!(ledger(&t, &p), Err(Error::Degenerate(_))));
    }

    #[test]
    fn remainder_theta_examples() {
        let p = ModelParams::new(0.5, 0.3, 1.0).with_initial(1.0, 2.0);
        let t = Trajectory {
            x: vec![1.0, 0.9, 1.1],
            eps: vec![2.0, 0.0, 0.0],
            v: vec![0.0, 0.0],
        };
        let r = remainder_theta(&t, &p).unwrap();
        assert!((r - 0.4485).abs() < 1e-15);

        let p0 = ModelParams::new(0.5, 0.0, 1.0);
        assert_eq!(remainder_theta(&t, &p0).unwrap(), 0.0);

        let pz = ModelParams::new(0.5, 0.3, 1.0);
        let g = gaussian_path(&pz, 30, 3);
        let r = remainder_theta(&g, &pz).unwrap();
        assert_eq!(r, 0.15 * g.x[30] * g.x[29]);
    }

    #[test]
    fn white_noise_theta_decomposition() {
        let p = ModelParams::new(0.0, 0.0, 1.0);
        let t = gaussian_path(&p, 200, 11);
        let l = ledger(&t, &p).unwrap();
        assert!(check_theta_decomposition(&l, &p).unwrap() <= 1e-9);
        assert!((l.theta_hat - l.m_n / l.s_nm1).abs() < 1e-15);
    }

    #[test]
    fn sn_decomposition_at_rho_zero() {
        let p = ModelParams::new(0.6, 0.0, 1.3).with_initial(0.4, -0.7);
        let t = simulate(&p, &NoiseSpec::gaussian(1.3), 300, &mut seeded(2)).unwrap();
        let n = t.n();
        // with ρ = 0: ξ₁ = X₀² and Rₙ = −θ²Xₙ²
        let expected = -0.36 * t.x[n] * t.x[n] + 0.16;
        assert!((sn_remainder(&t, &p) - expected).abs() < 1e-12);
        let l = ledger(&t, &p).unwrap();
        assert!(check_sn_decomposition(&l, &t, &p).unwrap() <= 1e-9);
    }

    #[test]
    fn sn_decomposition_degenerate_parameters() {
        let p = ModelParams::new(0.0, 0.0, 1.0);
        let t = gaussian_path(&p, 400, 8);
        let l = ledger(&t, &p).unwrap();
        assert!(check_sn_decomposition(&l, &t, &p).unwrap() <= 1e-9);
    }

    #[test]
    fn dw_identity_without_initial_residual() {
        let p = ModelParams::new(0.4, -0.5, 1.0);
        let t = gaussian_path(&p, 500, 21);
        let l = ledger(&t, &p).unwrap();
        assert_eq!(l.eps_hat0, 0.0);
        let exact = 2.0 * (1.0 - l.rho_hat) - (1.0 - 2.0 * l.rho_hat) * l.f_n;
        assert!((l.dw - exact).abs() <= 1e-12);
        assert!(check_dw_identity(&l).unwrap() <= 1e-9);
    }

    #[test]
    fn dw_close_to_two_minus_two_rho_hat() {
        let p = ModelParams::new(0.5, 0.3, 1.0).with_initial(1.5, -0.5);
        let t = gaussian_path(&p, 20_000, 4);
        let l = ledger(&t, &p).unwrap();
        let slack = l.f_n + l.eps_hat0 * l.eps_hat0 / l.j_n;
        assert!((l.dw - 2.0 * (1.0 - l.rho_hat)).abs() <= 5.0 * slack);
    }

    #[test]
    fn white_noise_inequalities_hold() {
        let p = ModelParams::new(0.0, 0.0, 1.0);
        let t = gaussian_path(&p, 100, 5);
        let l = ledger(&t, &p).unwrap();
        let rep = check_as_inequalities(&t, &l, &p).unwrap();
        assert!(rep.all_hold());
        // α = 2, β = 1
        assert_eq!(rep.sum_squares.rhs, l.l_n);
    }

    #[test]
    fn strongly_persistent_inequalities_hold() {
        let p = ModelParams::new(0.9, 0.9, 1.0).with_initial(2.0, -3.0);
        let t = gaussian_path(&p, 2000, 6);
        let l = ledger(&t, &p).unwrap();
        assert!(check_as_inequalities(&t, &l, &p).unwrap().all_hold());
    }

    #[test]
    fn inconsistent_trajectory_rejected() {
        let t = Trajectory {
            x: vec![0.0, 1.0],
            eps: vec![0.0],
            v: vec![1.0],
        };
        assert!(ledger(&t, &ModelParams::default()).is_err());
    }

    #[test]
    fn json_field_names() {
        let p = ModelParams::default();
        let l = ledger(&gaussian_path(&p, 50, 1), &p).unwrap();
        let v = serde_json::to_value(l).unwrap();
        for key in [
            "L_n", "M_n", "N_n", "Q_n", "S_nm1", "J_nm1", "T4_n", "Gamma4_n", "R_theta",
        ] {
            assert!(v.get(key).is_some(), "{key}");
        }
    }
}
