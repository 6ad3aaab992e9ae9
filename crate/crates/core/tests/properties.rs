use dwlab::asymptotics::{
    gamma_cross_check, rate_dw, rate_joint, rate_rho, rate_special_theta_eq_neg_rho, rate_theta,
    Which,
};
use dwlab::lab::{run_identity_suite, run_inequality_suite, ExperimentConfig, Suite};
use dwlab::model::{companion_matrix, sample_noise, simulate_with_innovations};
use dwlab::rng::seeded;
use dwlab::stats::{
    check_as_inequalities, check_dw_identity, check_j_identity, check_sn_decomposition,
    check_theta_decomposition,
};
use dwlab::{ledger, simulate, summary, ModelParams, NoiseSpec};
use proptest::prelude::*;

fn stable() -> impl Strategy<Value = f64> {
    -0.97f64..0.97
}

fn params() -> impl Strategy<Value = ModelParams> {
    (stable(), stable(), 0.1f64..4.0, -3.0f64..3.0, -3.0f64..3.0)
        .prop_map(|(t, r, s, x0, e0)| ModelParams::new(t, r, s).with_initial(x0, e0))
}

/// Two-pass evaluation straight from the definitions, with explicit residuals.
fn naive(x: &[f64]) -> (f64, f64, f64) {
    let n = x.len() - 1;
    let num: f64 = (1..=n).map(|k| x[k] * x[k - 1]).sum();
    let den: f64 = (0..n).map(|k| x[k] * x[k]).sum();
    let th = num / den;
    let mut e = vec![x[0]];
    e.extend((1..=n).map(|k| x[k] - th * x[k - 1]));
    let j_n: f64 = e.iter().map(|v| v * v).sum();
    let j_nm1 = j_n - e[n] * e[n];
    let rho = (1..=n).map(|k| e[k] * e[k - 1]).sum::<f64>() / j_nm1;
    let dw = (1..=n).map(|k| (e[k] - e[k - 1]).powi(2)).sum::<f64>() / j_n;
    (th, rho, dw)
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(1.0)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn recurrence_is_exact(p in params(), v in prop::collection::vec(-5.0f64..5.0, 2..200)) {
        let t = simulate_with_innovations(&p, &v).unwrap();
        let (mut x, mut e) = (p.x0, p.eps0);
        for (k, vk) in v.iter().enumerate() {
            e = p.rho * e + vk;
            x = p.theta * x + e;
            prop_assert_eq!(t.x[k + 1], x);
            prop_assert_eq!(t.eps[k + 1], e);
        }
        let scale = t.x.iter().chain(&t.eps).fold(1.0f64, |m, x| m.max(x.abs()));
        prop_assert!(t.recurrence_defect(&p) <= 4.0 * f64::EPSILON * scale);
    }

    #[test]
    fn ledger_matches_two_pass_oracle(p in params(), seed in any::<u64>(), n in 20usize..2000) {
        let t = simulate(&p, &NoiseSpec::gaussian(p.sigma2), n, &mut seeded(seed)).unwrap();
        let l = ledger(&t, &p).unwrap();
        let (th, rho, dw) = naive(&t.x);
        prop_assert!(rel(l.theta_hat, th) < 1e-12, "{} vs {}", l.theta_hat, th);
        prop_assert!(rel(l.rho_hat, rho) < 1e-10, "{} vs {}", l.rho_hat, rho);
        prop_assert!(rel(l.dw, dw) < 1e-10, "{} vs {}", l.dw, dw);
    }

    #[test]
    fn identities_hold_on_random_paths(p in params(), seed in any::<u64>(), n in 10usize..800) {
        let t = simulate(&p, &NoiseSpec::gaussian(p.sigma2), n, &mut seeded(seed)).unwrap();
        let l = ledger(&t, &p).unwrap();
        prop_assert!(check_theta_decomposition(&l, &p).unwrap() / (1.0 + l.theta_hat.abs()) < 1e-9);
        prop_assert!(check_j_identity(&l).unwrap() < 1e-10);
        prop_assert!(check_dw_identity(&l).unwrap() < 1e-9);
        let ell = dwlab::asymptotics::ell(p.theta, p.rho, p.sigma2);
        prop_assert!(check_sn_decomposition(&l, &t, &p).unwrap() / (1.0 + ell) < 1e-9);
    }

    #[test]
    fn inequalities_hold_for_every_family(p in params(), seed in any::<u64>(), fam in 0usize..3) {
        let spec = match fam {
            0 => NoiseSpec::gaussian(p.sigma2),
            1 => NoiseSpec::symmetric_weibull(0.3, p.sigma2),
            _ => NoiseSpec::student_t(2.5, p.sigma2),
        };
        let t = simulate(&p, &spec, 300, &mut seeded(seed)).unwrap();
        let l = ledger(&t, &p).unwrap();
        let r = check_as_inequalities(&t, &l, &p).unwrap();
        prop_assert!(r.all_hold(), "{:?}", r);
    }

    #[test]
    fn variance_relations(t in stable(), r in stable(), s2 in 0.1f64..5.0) {
        let a = summary(&ModelParams::new(t, r, s2)).unwrap();
        let b = summary(&ModelParams::new(r, t, s2)).unwrap();
        prop_assert_eq!(a.sigma2_d, 4.0 * a.sigma2_rho);
        for (x, y) in [
            (a.theta_star, b.theta_star),
            (a.rho_star, b.rho_star),
            (a.sigma2_theta, b.sigma2_theta),
            (a.sigma2_rho, b.sigma2_rho),
            (a.ell, b.ell),
        ] {
            prop_assert!((x - y).abs() <= 1e-12 * (1.0 + x.abs()));
        }
        prop_assert!(a.theta_star.abs() < 1.0 && a.sigma2_theta > 0.0);
        prop_assert!(a.d_star > 0.0 && a.d_star < 4.0);
        // Γ does not depend on σ²
        let unit = summary(&ModelParams::new(t, r, 1.0)).unwrap();
        prop_assert!(a.gamma.max_abs_diff(&unit.gamma) <= 1e-12);
    }

    #[test]
    fn gamma_assembly(t in stable(), r in stable(), s2 in 0.1f64..5.0) {
        prop_assume!((t + r).abs() >= 1e-3);
        let s = summary(&ModelParams::new(t, r, s2)).unwrap();
        prop_assert!(gamma_cross_check(&s).unwrap() <= 1e-10 * (1.0 + s.gamma.max_abs()));
        prop_assert!(s.gamma.is_symmetric());
        prop_assert!(s.det_gamma() > 0.0);
    }

    #[test]
    fn rates_are_even_convex_quadratics(t in stable(), r in stable(), x in -3.0f64..3.0, y in -3.0f64..3.0) {
        let s = summary(&ModelParams::new(t, r, 1.0)).unwrap();
        for f in [rate_theta, rate_rho, rate_dw] {
            prop_assert_eq!(f(x, &s), f(-x, &s));
            prop_assert!(f(0.5 * (x + y), &s) <= 0.5 * (f(x, &s) + f(y, &s)) * (1.0 + 1e-12) + 1e-300);
            prop_assert_eq!(f(0.0, &s), 0.0);
        }
        // I_D(x) = I_ρ(x/2)
        prop_assert!((rate_dw(x, &s) - rate_rho(x / 2.0, &s)).abs() <= 1e-12 * (1.0 + rate_dw(x, &s)));
    }

    #[test]
    fn joint_rate_is_the_legendre_transform(
        t in stable(), r in stable(), v0 in -2.0f64..2.0, v1 in -2.0f64..2.0,
        l0 in -5.0f64..5.0, l1 in -5.0f64..5.0,
    ) {
        prop_assume!((t + r).abs() >= 1e-2);
        let s = summary(&ModelParams::new(t, r, 1.0)).unwrap();
        let k = rate_joint([v0, v1], &s).unwrap();
        let g = s.gamma.0;
        // K(v) = sup_λ λ·v − ½λ'Γλ, so every λ gives a lower bound
        let lower = l0 * v0 + l1 * v1
            - 0.5 * (g[0][0] * l0 * l0 + 2.0 * g[0][1] * l0 * l1 + g[1][1] * l1 * l1);
        prop_assert!(k >= lower - 1e-9 * (1.0 + k.abs()));
        // the marginal of θ̂ is the infimum of K over the other coordinate
        let k_marg = rate_joint([v0, g[0][1] / g[0][0] * v0], &s).unwrap();
        prop_assert!((k_marg - rate_theta(v0, &s)).abs() <= 1e-8 * (1.0 + k_marg));
    }

    #[test]
    fn companion_spectrum(t in stable(), r in stable()) {
        let a = companion_matrix(&ModelParams::new(t, r, 1.0));
        let mut got = a.eigenvalue_moduli();
        got.sort_by(f64::total_cmp);
        let mut want = [t.abs(), r.abs()];
        want.sort_by(f64::total_cmp);
        prop_assert!((got[0] - want[0]).abs() < 1e-7 && (got[1] - want[1]).abs() < 1e-7, "{:?} {:?}", got, want);
        // power iteration on the companion recursion as a second oracle
        let (mut u, mut w) = (1.0f64, 0.3f64);
        let mut growth = 0.0;
        for _ in 0..2000 {
            let nu = a.0[0][0] * u + a.0[0][1] * w;
            let nw = u;
            let norm = nu.hypot(nw);
            if norm == 0.0 { break; }
            growth = norm / u.hypot(w);
            u = nu / norm;
            w = nw / norm;
        }
        prop_assert!(growth <= a.spectral_radius() + 0.05);
    }
}

#[test]
fn special_case_rates_agree_with_general_formulas() {
    // on θ = −ρ the marginal variances are still finite and give the same rates
    for &t in &[0.2, 0.5, -0.7] {
        let s = summary(&ModelParams::new(t, -t, 1.0)).unwrap();
        let x = 0.8;
        let gen_t = rate_theta(x, &s);
        let gen_r = rate_rho(x, &s);
        assert!((gen_t - rate_special_theta_eq_neg_rho(x, t, Which::Theta)).abs() < 1e-12);
        assert!((gen_r - rate_special_theta_eq_neg_rho(x, t, Which::Rho)).abs() < 1e-9 * gen_r);
    }
}

#[test]
fn gaussian_noise_moments() {
    let v = sample_noise(&NoiseSpec::gaussian(2.0), 1_000_000, &mut seeded(5)).unwrap();
    let n = v.len() as f64;
    let mean = v.iter().sum::<f64>() / n;
    let var = v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    assert!(mean.abs() < 0.005, "{mean}");
    assert!((var - 2.0).abs() < 0.02, "{var}");
}

#[test]
fn weibull_noise_moments() {
    let v = sample_noise(
        &NoiseSpec::symmetric_weibull(0.5, 1.0),
        1_000_000,
        &mut seeded(6),
    )
    .unwrap();
    let n = v.len() as f64;
    let mean = v.iter().sum::<f64>() / n;
    let var = v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    assert!(mean.abs() < 0.005, "{mean}");
    assert!((var - 1.0).abs() < 0.02, "{var}");
    // E V⁴ = Γ(1+2/β)/Γ(1+1/β)² = 4!/(2!)² = 6 at β = 1/2
    let m4 = v.iter().map(|x| x.powi(4)).sum::<f64>() / n;
    assert!((m4 - 6.0).abs() < 0.3, "{m4}");
}

#[test]
fn student_noise_variance() {
    let v = sample_noise(&NoiseSpec::student_t(6.0, 1.0), 1_000_000, &mut seeded(8)).unwrap();
    let n = v.len() as f64;
    let var = v.iter().map(|x| x * x).sum::<f64>() / n;
    assert!((var - 1.0).abs() < 0.03, "{var}");
}

#[test]
fn suites_are_deterministic_across_worker_counts() {
    let mut cfg = ExperimentConfig::defaults_for(Suite::Identities);
    cfg.replications = 150;
    let a = run_identity_suite(&cfg).unwrap();
    cfg.workers = 4;
    let b = run_identity_suite(&cfg).unwrap();
    assert_eq!(a, b);

    let mut cfg = ExperimentConfig::defaults_for(Suite::Inequalities);
    cfg.replications = 150;
    let a = run_inequality_suite(&cfg).unwrap();
    cfg.workers = 3;
    assert_eq!(a, run_inequality_suite(&cfg).unwrap());
    cfg.master_seed += 1;
    let c = run_inequality_suite(&cfg).unwrap();
    assert_ne!(
        a.rows.iter().map(|r| r.max_ratio).collect::<Vec<_>>(),
        c.rows.iter().map(|r| r.max_ratio).collect::<Vec<_>>()
    );
}
