use lincon::lp::{
    compute_dual_certificate, slack_threshold, solve_constrained_lp, verify_kkt, ArmParams,
    DualCertificate, KktCondition,
};
use proptest::prelude::*;

/// Best objective over the basic feasible solutions of
/// `sum x_i mu_i - s = eta, sum x_i = 1, x, s >= 0`, each basis solved by
/// Cramer's rule.
fn basis_oracle(arms: &[ArmParams], eta: f64) -> Option<f64> {
    let mut best: Option<f64> = None;
    let mut offer = |v: f64| best = Some(best.map_or(v, |b: f64| b.max(v)));
    for (i, a) in arms.iter().enumerate() {
        // {x_i, s}: x_i = 1, s = mu_i - eta.
        if a.mu >= eta {
            offer(a.value());
        }
        for b in &arms[i + 1..] {
            // {x_i, x_j}: [[mu_i, mu_j], [1, 1]] x = [eta, 1].
            let det = a.mu - b.mu;
            if det == 0.0 {
                continue;
            }
            let xa = (eta - b.mu) / det;
            let xb = (a.mu - eta) / det;
            if xa >= 0.0 && xb >= 0.0 {
                offer(xa * a.value() + xb * b.value());
            }
        }
    }
    best
}

fn feasible_problem() -> impl Strategy<Value = (Vec<ArmParams>, f64)> {
    (
        prop::collection::vec((0.0..=1.0f64, 0.001..=1.0f64), 1..=8),
        0.0..=1.0f64,
    )
        .prop_map(|(pairs, frac)| {
            let arms: Vec<ArmParams> = pairs.iter().map(|&(mu, r)| ArmParams { mu, r }).collect();
            let max_mu = arms.iter().map(|a| a.mu).fold(0.0, f64::max);
            (arms, frac * max_mu)
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(500))]

    #[test]
    fn matches_basis_enumeration((arms, eta) in feasible_problem()) {
        let sol = solve_constrained_lp(&arms, eta).unwrap();
        prop_assert!(sol.feasible);
        let oracle = basis_oracle(&arms, eta).unwrap();
        prop_assert!((sol.objective - oracle).abs() <= 1e-9, "{} vs {}", sol.objective, oracle);
        prop_assert!(sol.support.len() <= 2);
        prop_assert!((sol.x.iter().sum::<f64>() - 1.0).abs() <= 1e-12);
    }

    #[test]
    fn certificate_passes_kkt_and_closes_the_gap((arms, eta) in feasible_problem()) {
        let sol = solve_constrained_lp(&arms, eta).unwrap();
        let duals = compute_dual_certificate(&arms, eta, &sol).unwrap();
        let report = verify_kkt(&arms, eta, &sol, &duals, 1e-8);
        prop_assert!(report.all_passed(), "{:?}", report.checks);
        prop_assert!((sol.objective - duals.dual_objective(eta)).abs() <= 1e-9);
        for (i, arm) in arms.iter().enumerate() {
            if duals.psi[i] > 1e-9 {
                let xi = slack_threshold(i, &arms, &duals).unwrap();
                prop_assert!(xi > arm.mu, "arm {}: xi = {} mu = {}", i, xi, arm.mu);
            }
        }
    }

    #[test]
    fn common_reward_scaling_keeps_the_selection(
        (arms, eta) in feasible_problem(),
        scale in 0.05..=1.0f64,
    ) {
        let scaled: Vec<ArmParams> = arms.iter().map(|a| ArmParams { mu: a.mu, r: a.r * scale }).collect();
        let base = solve_constrained_lp(&arms, eta).unwrap();
        let other = solve_constrained_lp(&scaled, eta).unwrap();
        prop_assert!((other.objective - scale * base.objective).abs() <= 1e-12);
        // Near-ties between bases may legitimately flip, so compare the
        // selection only when the optimum is well separated.
        let values: Vec<f64> = arms.iter().map(|a| a.value()).collect();
        let separated = values.iter().enumerate().all(|(i, v)| {
            values[i + 1..].iter().all(|w| (v - w).abs() > 1e-6)
        });
        if separated {
            for (a, b) in base.x.iter().zip(&other.x) {
                prop_assert!((a - b).abs() <= 1e-9);
            }
        }
    }
}

#[test]
fn mutated_duals_are_rejected() {
    let arms = [
        ArmParams { mu: 0.1, r: 1.0 },
        ArmParams { mu: 0.9, r: 0.1 },
        ArmParams { mu: 0.3, r: 0.2 },
    ];
    let sol = solve_constrained_lp(&arms, 0.5).unwrap();
    let duals = compute_dual_certificate(&arms, 0.5, &sol).unwrap();
    let negated = DualCertificate {
        lambda: -duals.lambda,
        ..duals.clone()
    };
    let report = verify_kkt(&arms, 0.5, &sol, &negated, 1e-8);
    assert!(!report.passed(KktCondition::DualFeasibility));

    let mut shifted = duals.clone();
    shifted.nu += 0.01;
    assert!(!verify_kkt(&arms, 0.5, &sol, &shifted, 1e-8).all_passed());

    let mut x = sol.clone();
    x.x = vec![0.0, 0.0, 1.0];
    assert!(!verify_kkt(&arms, 0.5, &x, &duals, 1e-8).passed(KktCondition::PrimalFeasibility));
}
