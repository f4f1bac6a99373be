//! Exact solver for the assignment problem with one linear side constraint.
//!
//! Minimize `sum_i cost[i][s(i)]` over permutations `s` subject to
//! `sum_i side[i][s(i)] >= side_bound - feasibility_tol`.
//!
//! Objectives are compared up to a tie tolerance of `1e-9 * max(1, |opt|)`.
//! Among feasible permutations within that band of the optimum, both
//! [`solve_exact`] and [`brute_force`] return the lexicographically smallest.

mod branch;
mod brute;
mod lap;

pub use branch::solve_exact;
pub use brute::{brute_force, BRUTE_FORCE_MAX_N};

use crate::error::{Error, Result};

/// Default absolute slack on the side constraint.
pub const DEFAULT_FEASIBILITY_TOL: f64 = 1e-7;

const RELATIVE_TIE_TOL: f64 = 1e-9;

pub(crate) fn tie_tolerance(best: f64) -> f64 {
    RELATIVE_TIE_TOL * best.abs().max(1.0)
}

#[derive(Debug, Clone, PartialEq)]
pub struct AssignmentProblem {
    n: usize,
    cost: Vec<f64>,
    side: Vec<f64>,
    side_bound: f64,
    feasibility_tol: f64,
}

impl AssignmentProblem {
    /// Builds a problem from square row-per-candidate matrices. Column `j` is
    /// display position `j`.
    pub fn new(cost: Vec<Vec<f64>>, side_coeff: Vec<Vec<f64>>, side_bound: f64) -> Result<Self> {
        let n = cost.len();
        let flatten = |what: &'static str, m: Vec<Vec<f64>>| -> Result<Vec<f64>> {
            if m.len() != n {
                return Err(Error::LengthMismatch { what, got: m.len(), expected: n });
            }
            let mut flat = Vec::with_capacity(n * n);
            for row in m {
                if row.len() != n {
                    return Err(Error::LengthMismatch { what, got: row.len(), expected: n });
                }
                flat.extend(row);
            }
            Ok(flat)
        };
        let cost = flatten("cost row", cost)?;
        let side = flatten("side coefficient row", side_coeff)?;
        Self::from_flat(n, cost, side, side_bound)
    }

    /// Same as [`AssignmentProblem::new`] with row-major `n * n` slices.
    pub fn from_flat(n: usize, cost: Vec<f64>, side: Vec<f64>, side_bound: f64) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidParameter("assignment problem must have n >= 1".into()));
        }
        for (what, m) in [("cost matrix", &cost), ("side coefficient matrix", &side)] {
            if m.len() != n * n {
                return Err(Error::LengthMismatch { what, got: m.len(), expected: n * n });
            }
        }
        if cost.iter().any(|c| !c.is_finite()) {
            return Err(Error::InvalidParameter("cost entries must be finite".into()));
        }
        if side.iter().any(|s| !s.is_finite() || *s < 0.0) {
            return Err(Error::InvalidParameter(
                "side coefficients must be finite and non-negative".into(),
            ));
        }
        if !side_bound.is_finite() || side_bound < 0.0 {
            return Err(Error::InvalidParameter(format!(
                "side bound must be finite and non-negative, got {side_bound}"
            )));
        }
        Ok(Self {
            n,
            cost,
            side,
            side_bound,
            feasibility_tol: DEFAULT_FEASIBILITY_TOL,
        })
    }

    /// An unconstrained problem: zero side coefficients and bound.
    pub fn unconstrained(cost: Vec<Vec<f64>>) -> Result<Self> {
        let n = cost.len();
        Self::new(cost, vec![vec![0.0; n]; n], 0.0)
    }

    pub fn with_feasibility_tol(mut self, tol: f64) -> Result<Self> {
        if !tol.is_finite() || tol < 0.0 {
            return Err(Error::InvalidParameter(format!(
                "feasibility tolerance must be finite and non-negative, got {tol}"
            )));
        }
        self.feasibility_tol = tol;
        Ok(self)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn cost(&self, i: usize, j: usize) -> f64 {
        self.cost[i * self.n + j]
    }

    pub fn side_coeff(&self, i: usize, j: usize) -> f64 {
        self.side[i * self.n + j]
    }

    pub fn side_bound(&self) -> f64 {
        self.side_bound
    }

    pub fn feasibility_tol(&self) -> f64 {
        self.feasibility_tol
    }

    /// Lowest side value a permutation may reach and still count as feasible.
    pub fn side_target(&self) -> f64 {
        self.side_bound - self.feasibility_tol
    }

    /// `sum_i cost[i][perm[i]]`, summed in candidate order.
    pub fn objective_of(&self, perm: &[usize]) -> f64 {
        perm.iter().enumerate().map(|(i, &j)| self.cost(i, j)).sum()
    }

    /// `sum_i side[i][perm[i]]`, summed in candidate order.
    pub fn side_value_of(&self, perm: &[usize]) -> f64 {
        perm.iter().enumerate().map(|(i, &j)| self.side_coeff(i, j)).sum()
    }

    pub fn is_feasible(&self, perm: &[usize]) -> bool {
        self.side_value_of(perm) >= self.side_target()
    }

    pub(crate) fn cost_matrix(&self) -> &[f64] {
        &self.cost
    }

    pub(crate) fn side_matrix(&self) -> &[f64] {
        &self.side
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveResult {
    /// `assignment[i]` is the position of candidate `i`. Empty when infeasible.
    pub assignment: Vec<usize>,
    /// Objective of `assignment`; infinite when infeasible.
    pub objective: f64,
    pub feasible: bool,
    /// Search nodes expanded; zero for the brute-force oracle.
    pub nodes: usize,
}

impl SolveResult {
    pub(crate) fn infeasible(nodes: usize) -> Self {
        Self {
            assignment: Vec::new(),
            objective: f64::INFINITY,
            feasible: false,
            nodes,
        }
    }

    pub(crate) fn found(problem: &AssignmentProblem, assignment: Vec<usize>, nodes: usize) -> Self {
        Self {
            objective: problem.objective_of(&assignment),
            assignment,
            feasible: true,
            nodes,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_malformed_problems() {
        assert!(AssignmentProblem::new(vec![], vec![], 0.0).is_err());
        assert!(AssignmentProblem::new(vec![vec![0.0, 1.0]], vec![vec![0.0, 1.0]], 0.0).is_err());
        assert!(AssignmentProblem::new(vec![vec![f64::NAN]], vec![vec![0.0]], 0.0).is_err());
        assert!(AssignmentProblem::new(vec![vec![0.0]], vec![vec![-1.0]], 0.0).is_err());
        assert!(AssignmentProblem::new(vec![vec![0.0]], vec![vec![1.0]], -1.0).is_err());
        let p = AssignmentProblem::unconstrained(vec![vec![1.0]]).unwrap();
        assert!(p.with_feasibility_tol(-1.0).is_err());
    }

    #[test]
    fn objective_and_side_follow_candidate_order() {
        let p = AssignmentProblem::new(
            vec![vec![0.0, 1.0], vec![1.0, 0.0]],
            vec![vec![0.0, 0.0], vec![1.0, 0.0]],
            1.0,
        )
        .unwrap();
        assert_eq!(p.objective_of(&[1, 0]), 2.0);
        assert_eq!(p.side_value_of(&[1, 0]), 1.0);
        assert!(p.is_feasible(&[1, 0]));
        assert!(!p.is_feasible(&[0, 1]));
        assert_eq!(p.feasibility_tol(), 1e-7);
    }
}
