//! Branch and bound over candidate/position fixings.
//!
//! Every node carries up to three warm-started Hungarian states over the open
//! rows and columns:
//!
//! * `plain` minimizes cost alone, a valid lower bound and, when its completion
//!   happens to satisfy the side constraint, the exact optimum of the subtree;
//! * `relaxed` minimizes `cost - lambda * side` for the root's best Lagrange
//!   multiplier, a second lower bound that accounts for the constraint;
//! * `widest` maximizes the side value, an upper bound used to discard
//!   subtrees that cannot become feasible.
//!
//! The search runs twice. The first pass finds the optimal objective with
//! best-bound-first branching on the most constrained position. The second pass
//! walks candidates in index order and positions in ascending order, and
//! returns the first permutation whose objective lies within the tie band of
//! that optimum, which is the lexicographically smallest one.

use super::lap::Lap;
use super::{tie_tolerance, AssignmentProblem, SolveResult};

const NONE: usize = usize::MAX;
const MAX_MULTIPLIER_ROUNDS: usize = 64;

fn slack(x: f64) -> f64 {
    1e-12 * x.abs().max(1.0)
}

/// Solves the side-constrained assignment problem to optimality.
pub fn solve_exact(problem: &AssignmentProblem) -> SolveResult {
    let mut search = Search::new(problem);
    let Some((root, mut best)) = search.root() else {
        return SolveResult::infeasible(search.nodes);
    };
    search.improve(&root, &mut best);

    let cap = best.0 + tie_tolerance(best.0);
    let chosen = search.lex_first(root, 0, cap).unwrap_or(best.1);
    SolveResult::found(problem, chosen, search.nodes)
}

type Incumbent = (f64, Vec<usize>);

fn offer(best: &mut Incumbent, objective: f64, perm: Vec<usize>) {
    if objective < best.0 {
        *best = (objective, perm);
    }
}

/// Relaxation values of a node: two lower bounds on cost and an upper bound
/// on the side value.
struct Values {
    plain: f64,
    relaxed: Option<f64>,
    max_side: Option<f64>,
}

#[derive(Clone)]
struct Node {
    assigned: Vec<usize>,
    fixed_cost: f64,
    fixed_side: f64,
    plain: Lap,
    relaxed: Option<Lap>,
    widest: Option<Lap>,
}

struct Search<'a> {
    problem: &'a AssignmentProblem,
    target: f64,
    lambda: f64,
    relaxed_costs: Vec<f64>,
    neg_side: Vec<f64>,
    nodes: usize,
}

impl<'a> Search<'a> {
    fn new(problem: &'a AssignmentProblem) -> Self {
        Self {
            problem,
            target: problem.side_target(),
            lambda: 0.0,
            relaxed_costs: Vec::new(),
            neg_side: problem.side_matrix().iter().map(|s| -s).collect(),
            nodes: 0,
        }
    }

    fn n(&self) -> usize {
        self.problem.n()
    }

    fn costs(&self) -> &[f64] {
        self.problem.cost_matrix()
    }

    fn full(&self, lap: &Lap) -> Vec<usize> {
        (0..self.n()).map(|i| lap.col_of(i)).collect()
    }

    /// Solves the root relaxations, seeds the incumbent and picks the Lagrange
    /// multiplier. Returns `None` when no permutation is feasible.
    fn root(&mut self) -> Option<(Node, Incumbent)> {
        let n = self.n();
        self.nodes += 1;
        let plain = Lap::solve(n, self.costs());
        let plain_perm = self.full(&plain);
        let mut node = Node {
            assigned: vec![NONE; n],
            fixed_cost: 0.0,
            fixed_side: 0.0,
            plain,
            relaxed: None,
            widest: None,
        };

        // Side values are non-negative, so a non-positive target is always met.
        if self.target <= 0.0 || self.problem.is_feasible(&plain_perm) {
            let best = (self.problem.objective_of(&plain_perm), plain_perm);
            return Some((node, best));
        }

        let widest = Lap::solve(n, &self.neg_side);
        let widest_perm = self.full(&widest);
        if !self.problem.is_feasible(&widest_perm) {
            return None;
        }
        let mut best = (self.problem.objective_of(&widest_perm), widest_perm.clone());
        node.widest = Some(widest);

        let (lambda, relaxed) = self.choose_multiplier(&plain_perm, &widest_perm, &mut best);
        self.lambda = lambda;
        node.relaxed = Some(relaxed);
        Some((node, best))
    }

    /// One-dimensional cutting-plane ascent on the Lagrangian dual
    /// `L(lambda) = min_s cost(s) - lambda * (side(s) - target)`.
    fn choose_multiplier(
        &mut self,
        below: &[usize],
        above: &[usize],
        best: &mut Incumbent,
    ) -> (f64, Lap) {
        let p = self.problem;
        let point = |perm: &[usize]| (p.objective_of(perm), p.side_value_of(perm));
        let (mut lo_c, mut lo_s) = point(below);
        let (mut hi_c, mut hi_s) = point(above);

        let mut lambda = 0.0;
        let mut lap = None;
        for _ in 0..MAX_MULTIPLIER_ROUNDS {
            if hi_s <= lo_s {
                break;
            }
            lambda = ((hi_c - lo_c) / (hi_s - lo_s)).max(0.0);
            self.relaxed_costs = p
                .cost_matrix()
                .iter()
                .zip(p.side_matrix())
                .map(|(c, s)| c - lambda * s)
                .collect();
            let solved = Lap::solve(self.n(), &self.relaxed_costs);
            let perm = self.full(&solved);
            let (c, s) = point(&perm);
            lap = Some(solved);

            let dual = c - lambda * (s - self.target);
            let model = lo_c - lambda * (lo_s - self.target);
            if s >= self.target {
                offer(best, c, perm);
            }
            if dual >= model - slack(model) {
                break;
            }
            if s >= self.target {
                (hi_c, hi_s) = (c, s);
            } else {
                (lo_c, lo_s) = (c, s);
            }
        }
        let lap = lap.unwrap_or_else(|| {
            self.relaxed_costs = p.cost_matrix().to_vec();
            Lap::solve(self.n(), &self.relaxed_costs)
        });
        (lambda, lap)
    }

    fn bound(&self, node: &Node) -> f64 {
        let v = self.values(node);
        v.relaxed.map_or(v.plain, |r| v.plain.max(r))
    }

    fn may_be_feasible(&self, node: &Node) -> bool {
        self.values(node)
            .max_side
            .is_none_or(|side| side + slack(self.target) >= self.target)
    }

    /// Fixes candidate `i` to position `j`. Returns `None` when the child
    /// cannot be feasible or its bound exceeds `cap`.
    ///
    /// `values` caches the parent's relaxation values; reduced costs against
    /// them rule out most children before any re-solve.
    fn child(&mut self, node: &Node, values: &Values, i: usize, j: usize, cap: f64) -> Option<Node> {
        let p = self.problem;
        let limit = cap + slack(cap);
        let rc_plain = node.plain.reduced_cost(p.cost_matrix(), i, j);
        if values.plain + rc_plain > limit {
            return None;
        }
        if let (Some(lap), Some(relaxed)) = (&node.relaxed, values.relaxed) {
            if relaxed + lap.reduced_cost(&self.relaxed_costs, i, j) > limit {
                return None;
            }
        }
        if let (Some(lap), Some(max_side)) = (&node.widest, values.max_side) {
            let reachable = max_side - lap.reduced_cost(&self.neg_side, i, j);
            if reachable + slack(self.target) < self.target {
                return None;
            }
        }

        self.nodes += 1;
        let mut plain = node.plain.clone();
        plain.fix(p.cost_matrix(), i, j);
        let fixed_cost = node.fixed_cost + p.cost(i, j);
        if fixed_cost + plain.value(p.cost_matrix()) > limit {
            return None;
        }
        let mut assigned = node.assigned.clone();
        assigned[i] = j;
        let mut child = Node {
            assigned,
            fixed_cost,
            fixed_side: node.fixed_side + p.side_coeff(i, j),
            plain,
            relaxed: None,
            widest: None,
        };
        if let Some(lap) = &node.widest {
            let mut lap = lap.clone();
            lap.fix(&self.neg_side, i, j);
            child.widest = Some(lap);
            if !self.may_be_feasible(&child) {
                return None;
            }
        }
        if let Some(lap) = &node.relaxed {
            let mut lap = lap.clone();
            lap.fix(&self.relaxed_costs, i, j);
            child.relaxed = Some(lap);
            if self.bound(&child) > limit {
                return None;
            }
        }
        Some(child)
    }

    fn values(&self, node: &Node) -> Values {
        Values {
            plain: node.fixed_cost + node.plain.value(self.costs()),
            relaxed: node.relaxed.as_ref().map(|lap| {
                node.fixed_cost
                    + lap.value(&self.relaxed_costs)
                    + self.lambda * (self.target - node.fixed_side)
            }),
            max_side: node
                .widest
                .as_ref()
                .map(|lap| node.fixed_side - lap.value(&self.neg_side)),
        }
    }

    fn completion(&self, node: &Node, lap: &Lap) -> Vec<usize> {
        node.assigned
            .iter()
            .enumerate()
            .map(|(i, &j)| if j == NONE { lap.col_of(i) } else { j })
            .collect()
    }

    /// Feasible completions the node's relaxations hand out for free.
    fn witnesses(&self, node: &Node) -> impl Iterator<Item = (f64, Vec<usize>)> + '_ {
        let plain = Some(self.completion(node, &node.plain));
        let relaxed = node.relaxed.as_ref().map(|lap| self.completion(node, lap));
        plain
            .into_iter()
            .chain(relaxed)
            .filter(|perm| self.problem.is_feasible(perm))
            .map(|perm| (self.problem.objective_of(&perm), perm))
    }

    /// Open position with the largest side coefficient among open candidates.
    /// `None` once no open position can change the side value.
    fn branching_column(&self, node: &Node) -> Option<usize> {
        let n = self.n();
        let side = self.problem.side_matrix();
        let mut pick = None;
        let mut widest = 0.0;
        for &j in node.plain.active_cols() {
            for i in (0..n).filter(|&i| node.plain.is_row_active(i)) {
                if side[i * n + j] > widest {
                    widest = side[i * n + j];
                    pick = Some(j);
                }
            }
        }
        pick
    }

    fn children(&mut self, node: &Node, col: usize, cap: f64) -> Vec<(f64, Node)> {
        let rows: Vec<usize> = (0..self.n()).filter(|&i| node.plain.is_row_active(i)).collect();
        let values = self.values(node);
        let mut kids = Vec::with_capacity(rows.len());
        for i in rows {
            if let Some(kid) = self.child(node, &values, i, col, cap) {
                kids.push((self.bound(&kid), kid));
            }
        }
        kids.sort_by(|a, b| a.0.total_cmp(&b.0));
        kids
    }

    /// Depth-first search for a strictly better incumbent.
    fn improve(&mut self, node: &Node, best: &mut Incumbent) {
        let plain_feasible = self
            .problem
            .is_feasible(&self.completion(node, &node.plain));
        for (obj, perm) in self.witnesses(node).collect::<Vec<_>>() {
            offer(best, obj, perm);
        }
        if plain_feasible {
            return;
        }
        let Some(col) = self.branching_column(node) else {
            return;
        };
        let limit = |best: &Incumbent| best.0 - 0.5 * tie_tolerance(best.0);
        for (bound, kid) in self.children(node, col, limit(best)) {
            if bound <= limit(best) {
                self.improve(&kid, best);
            }
        }
    }

    /// Whether the subtree holds a feasible permutation with objective `<= cap`.
    fn exists(&mut self, node: &Node, cap: f64) -> bool {
        if self.witnesses(node).any(|(obj, _)| obj <= cap) {
            return true;
        }
        let plain_feasible = self
            .problem
            .is_feasible(&self.completion(node, &node.plain));
        if plain_feasible {
            return false;
        }
        let Some(col) = self.branching_column(node) else {
            return false;
        };
        for (_, kid) in self.children(node, col, cap) {
            if self.exists(&kid, cap) {
                return true;
            }
        }
        false
    }

    /// Smallest permutation, in candidate order, that is feasible with
    /// objective `<= cap`. Candidates `0..row` are already fixed in `node`.
    fn lex_first(&mut self, node: Node, row: usize, cap: f64) -> Option<Vec<usize>> {
        if row == self.n() {
            let p = self.problem;
            let ok = p.is_feasible(&node.assigned) && p.objective_of(&node.assigned) <= cap;
            return ok.then_some(node.assigned);
        }
        let cols = node.plain.active_cols().to_vec();
        let values = self.values(&node);
        for col in cols {
            let Some(kid) = self.child(&node, &values, row, col, cap) else {
                continue;
            };
            if self.exists(&kid, cap) {
                if let Some(found) = self.lex_first(kid, row + 1, cap) {
                    return Some(found);
                }
            }
        }
        None
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unconstrained_identity() {
        let p = AssignmentProblem::unconstrained(vec![vec![0.0, 1.0], vec![1.0, 0.0]]).unwrap();
        let r = solve_exact(&p);
        assert!(r.feasible);
        assert_eq!(r.assignment, vec![0, 1]);
        assert_eq!(r.objective, 0.0);
    }

    #[test]
    fn side_constraint_forces_swap() {
        let p = AssignmentProblem::new(
            vec![vec![0.0, 1.0], vec![1.0, 0.0]],
            vec![vec![0.0, 0.0], vec![1.0, 0.0]],
            1.0,
        )
        .unwrap();
        let r = solve_exact(&p);
        assert!(r.feasible);
        assert_eq!(r.assignment, vec![1, 0]);
        assert_eq!(r.objective, 2.0);
    }

    #[test]
    fn unreachable_bound_is_infeasible() {
        let p = AssignmentProblem::new(
            vec![vec![0.0, 1.0], vec![1.0, 0.0]],
            vec![vec![0.5, 0.0], vec![0.0, 0.5]],
            2.0,
        )
        .unwrap();
        let r = solve_exact(&p);
        assert!(!r.feasible);
        assert!(r.assignment.is_empty());
    }

    #[test]
    fn full_ties_give_identity() {
        let n = 40;
        let p = AssignmentProblem::new(vec![vec![0.25; n]; n], vec![vec![1.0; n]; n], n as f64).unwrap();
        let r = solve_exact(&p);
        assert_eq!(r.assignment, (0..n).collect::<Vec<_>>());
    }

    #[test]
    fn tolerance_admits_slightly_short_side_values() {
        let p = AssignmentProblem::new(
            vec![vec![0.0, 1.0], vec![1.0, 0.0]],
            vec![vec![0.0, 0.0], vec![1.0 - 5e-8, 0.0]],
            1.0,
        )
        .unwrap();
        assert_eq!(solve_exact(&p).assignment, vec![1, 0]);
        let strict = p.with_feasibility_tol(0.0).unwrap();
        assert!(!solve_exact(&strict).feasible);
    }
}
