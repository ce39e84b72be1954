//! Property tests for the water-filling solver.

mod common;

use common::simplex_grid_max;
use dwell::waterfill::{allocate, closed_form_allocate, AllocationProblem};
use proptest::prelude::*;

fn instances() -> impl Strategy<Value = (Vec<f64>, Vec<f64>, f64)> {
    (1usize..=4)
        .prop_flat_map(|p| {
            (
                prop::collection::vec(0.05f64..80.0, p),
                prop::collection::vec(prop_oneof![3 => 0.05f64..3.0, 1 => Just(0.0)], p),
                0.5f64..50.0,
            )
        })
        .prop_filter("needs one positive weight", |(_, w, _)| {
            w.iter().any(|x| *x > 0.0)
        })
}

proptest! {
    #[test]
    fn budget_is_exhausted((taus, weights, horizon) in instances()) {
        let p = AllocationProblem::new(taus, weights, horizon).unwrap();
        let a = allocate(&p).unwrap();
        let total: f64 = a.times_ms.iter().sum();
        prop_assert!((total - horizon).abs() <= 1e-9 * horizon,
            "sum {total} vs horizon {horizon}");
    }

    #[test]
    fn kkt_rates_equalize((taus, weights, horizon) in instances()) {
        let p = AllocationProblem::new(taus.clone(), weights.clone(), horizon).unwrap();
        let a = allocate(&p).unwrap();
        let rate = a.lambda / horizon;
        for i in 0..taus.len() {
            if a.times_ms[i] > 0.0 {
                let r = weights[i] / taus[i] * (-a.times_ms[i] / taus[i]).exp();
                prop_assert!((r - rate).abs() <= 1e-8 * rate,
                    "active {i}: rate {r} vs {rate}");
            } else {
                // excluded targets cannot offer a better marginal rate
                prop_assert!(weights[i] / taus[i] <= rate * (1.0 + 1e-9));
            }
        }
    }

    #[test]
    fn zero_weight_receives_zero((taus, mut weights, horizon) in instances()) {
        weights[0] = 0.0;
        prop_assume!(weights.iter().any(|w| *w > 0.0));
        let p = AllocationProblem::new(taus, weights, horizon).unwrap();
        let a = allocate(&p).unwrap();
        prop_assert_eq!(a.times_ms[0], 0.0);
    }

    #[test]
    fn raising_a_weight_never_steals_from_it(
        (taus, weights, horizon) in instances(),
        bump in 0.01f64..2.0,
        which in any::<prop::sample::Index>(),
    ) {
        let i = which.index(taus.len());
        let p = AllocationProblem::new(taus.clone(), weights.clone(), horizon).unwrap();
        let before = allocate(&p).unwrap();
        let mut heavier = weights;
        heavier[i] += bump;
        let p2 = AllocationProblem::new(taus, heavier, horizon).unwrap();
        let after = allocate(&p2).unwrap();
        prop_assert!(after.times_ms[i] >= before.times_ms[i] - 1e-9,
            "t[{i}] fell from {} to {}", before.times_ms[i], after.times_ms[i]);
    }

    #[test]
    fn closed_form_agrees_when_applicable((taus, weights, horizon) in instances()) {
        let p = AllocationProblem::new(taus, weights, horizon).unwrap();
        if let Some(cf) = closed_form_allocate(&p).unwrap() {
            let wf = allocate(&p).unwrap();
            for (a, b) in cf.times_ms.iter().zip(&wf.times_ms) {
                prop_assert!((a - b).abs() <= 1e-9, "{a} vs {b}");
            }
        }
    }

    #[test]
    fn solver_beats_every_simplex_grid_point((taus, weights, horizon) in instances()) {
        let p = AllocationProblem::new(taus.clone(), weights.clone(), horizon).unwrap();
        let a = allocate(&p).unwrap();
        // Coarser grid than the acceptance run, for throughput.
        let grid_best = simplex_grid_max(&taus, &weights, horizon, 400);
        prop_assert!(a.criterion >= grid_best - 1e-6,
            "criterion {} below grid best {grid_best}", a.criterion);
    }
}
