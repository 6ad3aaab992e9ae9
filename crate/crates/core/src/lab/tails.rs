//! Tail probabilities and binomial confidence intervals.

use statrs::function::beta::beta_reg;
use statrs::function::erf::erfc;

/// Standard normal survival function Φ̄(z).
pub fn normal_sf(z: f64) -> f64 {
    0.5 * erfc(z / std::f64::consts::SQRT_2)
}

/// Exact (Clopper-Pearson) two-sided interval for a binomial proportion with
/// `k` successes out of `n` trials at confidence `1 - alpha`.
pub fn clopper_pearson(k: u64, n: u64, alpha: f64) -> (f64, f64) {
    assert!(n > 0 && k <= n, "invalid binomial counts k={k}, n={n}");
    let (kf, nf) = (k as f64, n as f64);
    let lower = if k == 0 {
        0.0
    } else {
        // P(Bin(n, p) >= k) = I_p(k, n-k+1) = alpha/2
        solve_increasing(|p| beta_reg(kf, nf - kf + 1.0, p), alpha / 2.0)
    };
    let upper = if k == n {
        1.0
    } else {
        // P(Bin(n, p) <= k) = 1 - I_p(k+1, n-k) = alpha/2
        solve_increasing(|p| beta_reg(kf + 1.0, nf - kf, p), 1.0 - alpha / 2.0)
    };
    (lower, upper)
}

/// Root of `f(p) = target` on [0, 1] for increasing `f`, by bisection.
fn solve_increasing(f: impl Fn(f64) -> f64, target: f64) -> f64 {
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if f(mid) < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Normal-approximation standard error of a binomial frequency.
pub fn binomial_se(p: f64, n: u64) -> f64 {
    (p * (1.0 - p) / n as f64).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn normal_tail_values() {
        assert_relative_eq!(normal_sf(0.0), 0.5, epsilon = 1e-15);
        // statrs erfc is good to about 1e-10 relative
        assert_relative_eq!(normal_sf(1.959963984540054), 0.025, max_relative = 1e-9);
        assert_relative_eq!(normal_sf(2.5), 0.006209665325776132, max_relative = 1e-9);
    }

    #[test]
    fn clopper_pearson_edges() {
        // k = 0: upper = 1 - (alpha/2)^(1/n)
        let (lo, hi) = clopper_pearson(0, 10, 0.05);
        assert_eq!(lo, 0.0);
        assert_relative_eq!(hi, 1.0 - 0.025f64.powf(0.1), max_relative = 1e-10);
        let (lo, hi) = clopper_pearson(10, 10, 0.05);
        assert_relative_eq!(lo, 0.025f64.powf(0.1), max_relative = 1e-10);
        assert_eq!(hi, 1.0);
    }

    #[test]
    fn clopper_pearson_brackets_estimate() {
        for &(k, n) in &[(1u64, 100u64), (37, 1000), (2480, 200_000), (999, 1000)] {
            let (lo, hi) = clopper_pearson(k, n, 0.05);
            let p = k as f64 / n as f64;
            assert!(lo <= p && p <= hi, "{k}/{n}: [{lo}, {hi}]");
        }
        // reference: k=5, n=20 -> [0.0866, 0.4910]
        let (lo, hi) = clopper_pearson(5, 20, 0.05);
        assert!((lo - 0.0866).abs() < 1e-4 && (hi - 0.4910).abs() < 1e-4);
    }
}
