use super::{tie_tolerance, AssignmentProblem, SolveResult};
use crate::error::{Error, Result};

pub const BRUTE_FORCE_MAX_N: usize = 9;

/// Exhaustive reference solver. Enumerates permutations in lexicographic order.
pub fn brute_force(problem: &AssignmentProblem) -> Result<SolveResult> {
    let n = problem.n();
    if n > BRUTE_FORCE_MAX_N {
        return Err(Error::ProblemTooLarge { n, max: BRUTE_FORCE_MAX_N });
    }
    let mut feasible = Vec::new();
    let mut perm: Vec<usize> = (0..n).collect();
    loop {
        if problem.is_feasible(&perm) {
            feasible.push((problem.objective_of(&perm), perm.clone()));
        }
        if !next_permutation(&mut perm) {
            break;
        }
    }
    let Some(best) = feasible.iter().map(|(obj, _)| *obj).min_by(f64::total_cmp) else {
        return Ok(SolveResult::infeasible(0));
    };
    let band = best + tie_tolerance(best);
    let (_, chosen) = feasible
        .into_iter()
        .find(|(obj, _)| *obj <= band)
        .expect("the minimum lies in its own band");
    Ok(SolveResult::found(problem, chosen, 0))
}

fn next_permutation(perm: &mut [usize]) -> bool {
    let Some(i) = perm.windows(2).rposition(|w| w[0] < w[1]) else {
        return false;
    };
    let j = perm.iter().rposition(|&x| x > perm[i]).expect("pivot has a successor");
    perm.swap(i, j);
    perm[i + 1..].reverse();
    true
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn permutations_are_lexicographic() {
        let mut p = vec![0, 1, 2];
        let mut seen = vec![p.clone()];
        while next_permutation(&mut p) {
            seen.push(p.clone());
        }
        assert_eq!(
            seen,
            vec![
                vec![0, 1, 2],
                vec![0, 2, 1],
                vec![1, 0, 2],
                vec![1, 2, 0],
                vec![2, 0, 1],
                vec![2, 1, 0]
            ]
        );
    }

    #[test]
    fn single_candidate() {
        let p = AssignmentProblem::new(vec![vec![3.5]], vec![vec![2.0]], 2.0).unwrap();
        let r = brute_force(&p).unwrap();
        assert_eq!(r.assignment, vec![0]);
        assert_eq!(r.objective, 3.5);
    }

    #[test]
    fn two_by_two_cases() {
        let cost = vec![vec![0.0, 1.0], vec![1.0, 0.0]];
        let p = AssignmentProblem::unconstrained(cost.clone()).unwrap();
        let r = brute_force(&p).unwrap();
        assert_eq!((r.assignment, r.objective), (vec![0, 1], 0.0));

        let p = AssignmentProblem::new(cost.clone(), vec![vec![0.0, 0.0], vec![1.0, 0.0]], 1.0).unwrap();
        let r = brute_force(&p).unwrap();
        assert_eq!((r.assignment, r.objective), (vec![1, 0], 2.0));

        let p = AssignmentProblem::new(cost, vec![vec![0.0, 0.0], vec![1.0, 0.0]], 1.5).unwrap();
        assert!(!brute_force(&p).unwrap().feasible);
    }

    #[test]
    fn ties_resolve_to_smallest_permutation() {
        let p = AssignmentProblem::unconstrained(vec![vec![1.0; 3]; 3]).unwrap();
        assert_eq!(brute_force(&p).unwrap().assignment, vec![0, 1, 2]);
    }

    #[test]
    fn refuses_large_instances() {
        let p = AssignmentProblem::unconstrained(vec![vec![0.0; 10]; 10]).unwrap();
        assert!(matches!(brute_force(&p), Err(Error::ProblemTooLarge { n: 10, .. })));
    }
}
