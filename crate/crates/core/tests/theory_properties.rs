use lincon::env::BanditInstance;
use lincon::theory::{bernoulli_kl, choose_thresholds, optimal_arm_term, theorem_bounds};
use proptest::prelude::*;

fn instance_a() -> BanditInstance {
    BanditInstance::from_pairs("A", &[(0.1, 1.0), (0.9, 0.1), (0.3, 0.2)], 0.5).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(500))]

    #[test]
    fn kl_is_nonnegative_and_convex(p in 0.0..=1.0f64, a in 0.001..0.999f64, b in 0.001..0.999f64) {
        prop_assert!(bernoulli_kl(p, a) >= 0.0);
        prop_assert_eq!(bernoulli_kl(a, a), 0.0);
        if (p - a).abs() > 1e-6 {
            prop_assert!(bernoulli_kl(p, a) > 0.0);
        }
        let mid = bernoulli_kl(p, 0.5 * (a + b));
        prop_assert!(mid <= 0.5 * (bernoulli_kl(p, a) + bernoulli_kl(p, b)) + 1e-12);
    }

    #[test]
    fn thresholds_solve_both_equations(
        mu in 0.0..0.95f64,
        gap in 0.01..1.0f64,
        gamma in 0.01..=1.0f64,
    ) {
        let xi = mu + gap * (0.999 - mu);
        prop_assume!(xi - mu > 1e-4);
        let (y, z) = choose_thresholds(mu, xi, gamma).unwrap();
        prop_assert!(mu < y && y < z && z < xi);
        let d = bernoulli_kl(mu, xi);
        prop_assert!((bernoulli_kl(y, xi) - d / (1.0 + gamma)).abs() <= 1e-9);
        prop_assert!((bernoulli_kl(y, z) - d / (1.0 + gamma).powi(2)).abs() <= 1e-9);
    }

    #[test]
    fn bounds_grow_with_the_horizon(t1 in 1.0..1e6f64, factor in 1.0..100.0f64, gamma in 0.05..=1.0f64) {
        let inst = instance_a();
        let a = theorem_bounds(&inst, gamma, t1).unwrap();
        let b = theorem_bounds(&inst, gamma, t1 * factor).unwrap();
        prop_assert!(b.regret_leading >= a.regret_leading);
        prop_assert!(b.violation_leading >= a.violation_leading);
        prop_assert!(b.regret_sqrt >= a.regret_sqrt);
        prop_assert!(b.violation_sqrt >= a.violation_sqrt);
    }
}

#[test]
fn leading_terms_are_nonnegative_combinations_of_gaps() {
    let inst = BanditInstance::from_pairs(
        "five",
        &[
            (0.15, 1.0),
            (0.8, 0.15),
            (0.3, 0.25),
            (0.05, 0.6),
            (0.6, 0.1),
        ],
        0.45,
    )
    .unwrap();
    for gamma in [0.2, 0.5, 1.0] {
        let t = 1e4;
        let report = theorem_bounds(&inst, gamma, t).unwrap();
        assert_eq!(report.arms.len(), 3);
        let coef = |kl: f64| (1.0 + gamma).powi(2) / kl * t.ln();
        let regret: f64 = report
            .arms
            .iter()
            .map(|a| coef(a.kl_mu_xi) * a.delta_plus)
            .sum();
        let violation: f64 = report
            .arms
            .iter()
            .map(|a| coef(a.kl_mu_xi) * a.small_delta_plus)
            .sum();
        assert!((report.regret_leading - regret).abs() <= 1e-9 * regret.max(1.0));
        assert!((report.violation_leading - violation).abs() <= 1e-9 * violation.max(1.0));
        let dmax = inst
            .arms
            .iter()
            .map(|a| (report.r_star - a.value()).max(0.0))
            .fold(0.0, f64::max);
        assert!((report.regret_sqrt - dmax * optimal_arm_term(t)).abs() <= 1e-9);
        for arm in &report.arms {
            assert!(arm.delta_plus >= 0.0 && arm.small_delta_plus >= 0.0);
            if arm.xi < 1.0 {
                assert!((arm.l_t * bernoulli_kl(arm.y, arm.z) - t.ln()).abs() <= 1e-9 * arm.l_t);
            } else {
                // Such an arm cannot enter the support and adds nothing.
                assert_eq!(arm.kl_mu_xi, f64::INFINITY);
            }
        }
    }
}
