use lincon::env::BanditInstance;
use lincon::lp::ArmParams;
use lincon::metrics::{
    aggregate_runs, log_grid, regret_series, stationary_optimum, violation_series, MetricSeries,
};
use lincon::policy::{run_policy, PolicyKind, RoundRecord, RunTrace, Selection};
use proptest::prelude::*;

fn trace_of(arms: &[usize], n_arms: usize) -> RunTrace {
    RunTrace {
        policy: PolicyKind::LinConTs,
        seed: 0,
        n_arms,
        rounds: arms
            .iter()
            .enumerate()
            .map(|(k, &arm)| RoundRecord {
                t: k as u64 + 1,
                arm,
                reward_event: false,
                collected_reward: 0.0,
                selection: Selection::Uniform,
            })
            .collect(),
    }
}

fn instance_and_plays() -> impl Strategy<Value = (BanditInstance, Vec<usize>, Vec<usize>)> {
    (2usize..=6)
        .prop_flat_map(|n| {
            (
                prop::collection::vec((0.0..=1.0f64, 0.001..=1.0f64), n),
                0.0..=1.0f64,
                prop::collection::vec(0..n, 1..300),
                Just((0..n).collect::<Vec<usize>>()).prop_shuffle(),
            )
        })
        .prop_map(|(pairs, frac, plays, perm)| {
            let max_mu = pairs.iter().map(|p| p.0).fold(0.0, f64::max);
            let inst = BanditInstance::from_pairs("p", &pairs, frac * max_mu).unwrap();
            (inst, plays, perm)
        })
}

proptest! {
    #[test]
    fn relabelling_arms_leaves_metrics_unchanged((inst, plays, perm) in instance_and_plays()) {
        // Arm i of the original instance becomes arm perm[i].
        let mut arms = vec![ArmParams { mu: 0.0, r: 1.0 }; inst.n_arms()];
        for (i, &j) in perm.iter().enumerate() {
            arms[j] = inst.arms[i];
        }
        let relabelled = BanditInstance::new("q", arms, inst.eta).unwrap();
        let mapped: Vec<usize> = plays.iter().map(|&i| perm[i]).collect();

        let n = inst.n_arms();
        let r1 = regret_series(&trace_of(&plays, n), &inst).unwrap();
        let r2 = regret_series(&trace_of(&mapped, n), &relabelled).unwrap();
        let v1 = violation_series(&trace_of(&plays, n), &inst).unwrap();
        let v2 = violation_series(&trace_of(&mapped, n), &relabelled).unwrap();
        for t in 0..plays.len() {
            prop_assert!((r1[t] - r2[t]).abs() <= 1e-9);
            prop_assert!((v1[t] - v2[t]).abs() <= 1e-9);
        }
    }

    #[test]
    fn count_form_equals_running_gap_sum((inst, plays, _perm) in instance_and_plays()) {
        let r_star = stationary_optimum(&inst).unwrap().r_star;
        let regret = regret_series(&trace_of(&plays, inst.n_arms()), &inst).unwrap();
        let violation = violation_series(&trace_of(&plays, inst.n_arms()), &inst).unwrap();
        let (mut dr, mut dv) = (0.0, 0.0);
        for (t, &arm) in plays.iter().enumerate() {
            dr += r_star - inst.arms[arm].value();
            dv += inst.eta - inst.arms[arm].mu;
            prop_assert!((regret[t] - dr.max(0.0)).abs() <= 1e-9);
            prop_assert!((violation[t] - dv.max(0.0)).abs() <= 1e-9);
            prop_assert!(regret[t] >= 0.0 && violation[t] >= 0.0);
        }
    }

    #[test]
    fn no_violation_when_every_played_arm_meets_eta((inst, plays, _perm) in instance_and_plays()) {
        let ok: Vec<usize> = (0..inst.n_arms()).filter(|&i| inst.arms[i].mu >= inst.eta).collect();
        let restricted: Vec<usize> = plays.iter().map(|&i| ok[i % ok.len()]).collect();
        let v = violation_series(&trace_of(&restricted, inst.n_arms()), &inst).unwrap();
        prop_assert!(v.iter().all(|&x| x == 0.0));
    }
}

#[test]
fn aggregates_of_identical_and_mirrored_series() {
    let inst = BanditInstance::from_pairs("A", &[(0.1, 1.0), (0.9, 0.1), (0.3, 0.2)], 0.5).unwrap();
    let trace = run_policy(PolicyKind::LinConTs, &inst, 500, 1).unwrap();
    let grid = log_grid(500, 20);
    let one = MetricSeries::from_trace(&trace, &inst, &grid).unwrap();
    let agg = aggregate_runs(&vec![one.clone(); 16]).unwrap();
    assert_eq!(agg.runs, 16);
    for (j, r) in one.regret.iter().enumerate() {
        assert!(agg.regret_std[j] <= 1e-12 * r.max(1.0));
        assert!((agg.regret_mean[j] - r).abs() <= 1e-12 * r.max(1.0));
    }

    let mk = |regret: Vec<f64>| MetricSeries {
        t_grid: vec![1, 2],
        regret,
        violation: vec![0.0, 0.0],
        cum_reward: vec![0.0, 0.0],
        ratio: vec![None, None],
    };
    let agg = aggregate_runs(&[mk(vec![0.0, 2.0]), mk(vec![2.0, 0.0])]).unwrap();
    assert_eq!(agg.regret_mean, vec![1.0, 1.0]);
    assert_eq!(agg.ratio_mean, vec![None, None]);

    let mut shifted = mk(vec![1.0, 1.0]);
    shifted.t_grid = vec![1, 3];
    assert!(aggregate_runs(&[mk(vec![0.0, 0.0]), shifted]).is_err());
}

#[test]
fn mean_regret_on_the_report_grid_is_nondecreasing() {
    let inst = BanditInstance::from_pairs("A", &[(0.1, 1.0), (0.9, 0.1), (0.3, 0.2)], 0.5).unwrap();
    let grid = log_grid(20_000, 60);
    let series: Vec<MetricSeries> = (0..16)
        .map(|seed| {
            let trace = run_policy(PolicyKind::LinConTs, &inst, 20_000, seed).unwrap();
            MetricSeries::from_trace(&trace, &inst, &grid).unwrap()
        })
        .collect();
    let agg = aggregate_runs(&series).unwrap();
    for w in agg.regret_mean.windows(2) {
        assert!(w[1] >= w[0] - 1e-9, "{w:?}");
    }
}
