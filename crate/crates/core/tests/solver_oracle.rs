//! Randomized agreement between the branch-and-bound solver and exhaustive
//! enumeration.

use amortize::solver::{brute_force, solve_exact};
use amortize::AssignmentProblem;
use itertools::Itertools;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Side values of every permutation, for picking a bound at a given quantile.
fn side_values(n: usize, side: &[f64]) -> Vec<f64> {
    let mut values: Vec<f64> = (0..n)
        .permutations(n)
        .map(|p| p.iter().enumerate().map(|(i, &j)| side[i * n + j]).sum())
        .collect();
    values.sort_by(f64::total_cmp);
    values
}

fn random_problem(rng: &mut ChaCha8Rng, n: usize, levels: Option<u32>) -> AssignmentProblem {
    let draw = |rng: &mut ChaCha8Rng| match levels {
        Some(l) => rng.gen_range(0..l) as f64 / l as f64,
        None => rng.gen::<f64>(),
    };
    let cost: Vec<f64> = (0..n * n).map(|_| draw(rng)).collect();
    let side: Vec<f64> = (0..n * n).map(|_| draw(rng)).collect();
    let values = side_values(n, &side);
    // Quantiles above 1 make the instance infeasible on purpose.
    let q: f64 = rng.gen_range(0.0..1.1);
    let bound = if q >= 1.0 {
        values[values.len() - 1] + 0.5
    } else {
        values[(q * values.len() as f64) as usize]
    };
    AssignmentProblem::from_flat(n, cost, side, bound).unwrap()
}

fn check_agreement(levels: Option<u32>, seed: u64, instances: usize) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut feasible = 0;
    for case in 0..instances {
        let n = rng.gen_range(2..=7);
        let p = random_problem(&mut rng, n, levels);
        let exact = solve_exact(&p);
        let oracle = brute_force(&p).unwrap();
        assert_eq!(exact.feasible, oracle.feasible, "case {case}: feasibility differs\n{p:?}");
        if exact.feasible {
            feasible += 1;
            assert_eq!(
                exact.objective.to_bits(),
                oracle.objective.to_bits(),
                "case {case}: objective {} vs {}\n{p:?}",
                exact.objective,
                oracle.objective
            );
            assert_eq!(exact.assignment, oracle.assignment, "case {case}: tie-break differs");
            assert!(p.is_feasible(&exact.assignment));
        }
    }
    assert!(feasible > instances / 2, "too few feasible instances: {feasible}");
}

#[test]
fn agrees_on_continuous_instances() {
    check_agreement(None, 0x5eed, 600);
}

#[test]
fn agrees_on_instances_with_many_ties() {
    check_agreement(Some(3), 0xbeef, 600);
}

#[test]
fn optimum_never_worsens_as_bound_loosens() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..100 {
        let n = rng.gen_range(2..=6);
        let cost: Vec<f64> = (0..n * n).map(|_| rng.gen()).collect();
        let side: Vec<f64> = (0..n * n).map(|_| rng.gen()).collect();
        let values = side_values(n, &side);
        let mut previous = f64::NEG_INFINITY;
        for q in [1.0, 0.9, 0.6, 0.3, 0.0] {
            let idx = ((q * (values.len() - 1) as f64) as usize).min(values.len() - 1);
            let p = AssignmentProblem::from_flat(n, cost.clone(), side.clone(), values[idx]).unwrap();
            let r = solve_exact(&p);
            assert!(r.feasible);
            if previous.is_finite() {
                assert!(r.objective <= previous + 1e-12);
            }
            previous = r.objective;
        }
    }
}
