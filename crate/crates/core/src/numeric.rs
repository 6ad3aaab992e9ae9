//! Small numeric kernels: double-double accumulation and fixed 2×2 matrices.

use serde::{Deserialize, Serialize};
use std::ops::{Add, Mul, Neg, Sub};

/// Unevaluated sum `hi + lo` carrying roughly 106 bits of significand.
///
/// Used for the running sums of a trajectory so that the quotients and
/// differences built from them (θ̂, Jₙ, ρ̂) lose no accuracy to cancellation.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Dd {
    pub hi: f64,
    pub lo: f64,
}

#[inline]
fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    (s, (a - (s - bb)) + (b - bb))
}

#[inline]
fn quick_two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    (s, b - (s - a))
}

// Veltkamp split: a = hi + lo with both halves fitting in 26 bits.
#[inline]
fn split(a: f64) -> (f64, f64) {
    let t = 134_217_729.0 * a;
    let hi = t - (t - a);
    (hi, a - hi)
}

// Dekker's product. `mul_add` would be shorter but is a libm call unless the
// target enables FMA. Exact while |a·b| stays well below f64::MAX / 2^27.
#[inline]
fn two_prod(a: f64, b: f64) -> (f64, f64) {
    let p = a * b;
    let (ah, al) = split(a);
    let (bh, bl) = split(b);
    (p, ((ah * bh - p) + ah * bl + al * bh) + al * bl)
}

impl Dd {
    pub const ZERO: Dd = Dd { hi: 0.0, lo: 0.0 };

    #[inline]
    pub fn from_f64(x: f64) -> Self {
        Dd { hi: x, lo: 0.0 }
    }

    #[inline]
    pub fn to_f64(self) -> f64 {
        self.hi + self.lo
    }

    /// Exact product of two doubles.
    #[inline]
    pub fn prod(a: f64, b: f64) -> Self {
        let (hi, lo) = two_prod(a, b);
        Dd { hi, lo }
    }

    /// `self += a * b` with compensated summation: the rounding errors of the
    /// running sum are collected in `lo` without renormalizing. The product
    /// itself is rounded once, a relative error that does not grow with the
    /// number of terms. Call [`Dd::normalized`] before using `hi` alone.
    #[inline]
    pub fn add_prod(&mut self, a: f64, b: f64) {
        let (s, se) = two_sum(self.hi, a * b);
        self.hi = s;
        self.lo += se;
    }

    #[inline]
    pub fn normalized(self) -> Self {
        let (hi, lo) = two_sum(self.hi, self.lo);
        Dd { hi, lo }
    }

    pub fn recip(self) -> Self {
        Dd::from_f64(1.0) / self
    }
}

impl Add for Dd {
    type Output = Dd;
    #[inline]
    fn add(self, rhs: Dd) -> Dd {
        let (s, e) = two_sum(self.hi, rhs.hi);
        let (t, f) = two_sum(self.lo, rhs.lo);
        let (s, e) = quick_two_sum(s, e + t);
        let (hi, lo) = quick_two_sum(s, e + f);
        Dd { hi, lo }
    }
}

impl Neg for Dd {
    type Output = Dd;
    #[inline]
    fn neg(self) -> Dd {
        Dd {
            hi: -self.hi,
            lo: -self.lo,
        }
    }
}

impl Sub for Dd {
    type Output = Dd;
    #[inline]
    fn sub(self, rhs: Dd) -> Dd {
        self + (-rhs)
    }
}

impl Mul for Dd {
    type Output = Dd;
    #[inline]
    fn mul(self, rhs: Dd) -> Dd {
        let (p, e) = two_prod(self.hi, rhs.hi);
        let e = e + (self.hi * rhs.lo + self.lo * rhs.hi);
        let (hi, lo) = quick_two_sum(p, e);
        Dd { hi, lo }
    }
}

impl std::ops::Div for Dd {
    type Output = Dd;
    fn div(self, rhs: Dd) -> Dd {
        let q1 = self.hi / rhs.hi;
        let r = self - rhs * Dd::from_f64(q1);
        let q2 = r.hi / rhs.hi;
        let r = r - rhs * Dd::from_f64(q2);
        let q3 = r.hi / rhs.hi;
        let (hi, lo) = quick_two_sum(q1, q2);
        Dd { hi, lo } + Dd::from_f64(q3)
    }
}

/// Shortest decimal text that parses back to the identical `f64`.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:?}")
}

/// Row-major 2×2 real matrix.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Matrix2(pub [[f64; 2]; 2]);

impl Matrix2 {
    pub fn new(a: f64, b: f64, c: f64, d: f64) -> Self {
        Matrix2([[a, b], [c, d]])
    }

    pub fn transpose(&self) -> Self {
        let m = self.0;
        Matrix2([[m[0][0], m[1][0]], [m[0][1], m[1][1]]])
    }

    pub fn scale(&self, s: f64) -> Self {
        let m = self.0;
        Matrix2([[s * m[0][0], s * m[0][1]], [s * m[1][0], s * m[1][1]]])
    }

    pub fn trace(&self) -> f64 {
        self.0[0][0] + self.0[1][1]
    }

    pub fn det(&self) -> f64 {
        let m = self.0;
        m[0][0] * m[1][1] - m[0][1] * m[1][0]
    }

    pub fn matmul(&self, rhs: &Matrix2) -> Matrix2 {
        let a = self.0;
        let b = rhs.0;
        let mut out = [[0.0; 2]; 2];
        for (i, row) in out.iter_mut().enumerate() {
            for (j, cell) in row.iter_mut().enumerate() {
                *cell = a[i][0] * b[0][j] + a[i][1] * b[1][j];
            }
        }
        Matrix2(out)
    }

    pub fn apply(&self, v: [f64; 2]) -> [f64; 2] {
        let m = self.0;
        [
            m[0][0] * v[0] + m[0][1] * v[1],
            m[1][0] * v[0] + m[1][1] * v[1],
        ]
    }

    /// Adjugate divided by the determinant; `None` when the determinant is
    /// zero or not finite.
    pub fn inverse(&self) -> Option<Matrix2> {
        let det = self.det();
        if det == 0.0 || !det.is_finite() {
            return None;
        }
        let m = self.0;
        Some(Matrix2([[m[1][1], -m[0][1]], [-m[1][0], m[0][0]]]).scale(1.0 / det))
    }

    pub fn max_abs(&self) -> f64 {
        self.0.iter().flatten().fold(0.0, |acc, x| acc.max(x.abs()))
    }

    pub fn max_abs_diff(&self, other: &Matrix2) -> f64 {
        let mut worst = 0.0f64;
        for i in 0..2 {
            for j in 0..2 {
                worst = worst.max((self.0[i][j] - other.0[i][j]).abs());
            }
        }
        worst
    }

    pub fn is_symmetric(&self) -> bool {
        self.0[0][1] == self.0[1][0]
    }

    /// Moduli of the two eigenvalues, from the characteristic polynomial
    /// λ² − tr·λ + det.
    pub fn eigenvalue_moduli(&self) -> [f64; 2] {
        let tr = self.trace();
        let det = self.det();
        let disc = tr * tr - 4.0 * det;
        if disc >= 0.0 {
            let root = disc.sqrt();
            // avoid cancellation in the smaller root
            let big = if tr >= 0.0 {
                0.5 * (tr + root)
            } else {
                0.5 * (tr - root)
            };
            let small = if big != 0.0 { det / big } else { 0.0 };
            [big.abs(), small.abs()]
        } else {
            let modulus = det.sqrt();
            [modulus, modulus]
        }
    }

    pub fn spectral_radius(&self) -> f64 {
        let [a, b] = self.eigenvalue_moduli();
        a.max(b)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn float_text_round_trips() {
        for x in [0.1, -1.0 / 3.0, 1e-300, 6.02e23, f64::MIN_POSITIVE, 2.5] {
            assert_eq!(fmt_f64(x).parse::<f64>().unwrap().to_bits(), x.to_bits());
        }
        assert_eq!(
            fmt_f64(f64::INFINITY).parse::<f64>().unwrap(),
            f64::INFINITY
        );
    }

    #[test]
    fn dd_recovers_cancelled_digits() {
        let mut acc = Dd::ZERO;
        acc.add_prod(1.0e16, 1.0);
        acc.add_prod(1.0, 1.0);
        acc.add_prod(-1.0e16, 1.0);
        assert_eq!(acc.to_f64(), 1.0);
    }

    #[test]
    fn dd_division_is_accurate() {
        let q = Dd::from_f64(1.0) / Dd::from_f64(3.0);
        let back = q * Dd::from_f64(3.0) - Dd::from_f64(1.0);
        assert!(back.to_f64().abs() < 1e-30);
    }

    #[test]
    fn inverse_of_singular_is_none() {
        assert!(Matrix2::new(1.0, 2.0, 2.0, 4.0).inverse().is_none());
        let m = Matrix2::new(2.0, 1.0, 1.0, 3.0);
        let id = m.matmul(&m.inverse().unwrap());
        assert!(id.max_abs_diff(&Matrix2::new(1.0, 0.0, 0.0, 1.0)) < 1e-15);
    }

    #[test]
    fn complex_pair_modulus() {
        // rotation by 90° scaled by 0.5
        let m = Matrix2::new(0.0, -0.5, 0.5, 0.0);
        assert!((m.spectral_radius() - 0.5).abs() < 1e-15);
    }
}
