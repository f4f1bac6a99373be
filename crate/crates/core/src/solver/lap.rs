//! Dense shortest-augmenting-path Hungarian solver that can be warm-started.
//!
//! A [`Lap`] keeps an optimal perfect matching of the currently active square
//! submatrix together with feasible dual potentials. Removing a row/column pair
//! via [`Lap::fix`] breaks at most one matched edge, which a single augmentation
//! repairs in O(n^2).

const NONE: usize = usize::MAX;

#[derive(Debug, Clone)]
pub(crate) struct Lap {
    n: usize,
    /// Active columns in ascending order.
    cols: Vec<usize>,
    row_active: Vec<bool>,
    u: Vec<f64>,
    /// One extra slot for the virtual column used during augmentation.
    v: Vec<f64>,
    col_of_row: Vec<usize>,
    row_of_col: Vec<usize>,
}

impl Lap {
    /// Solves the full `n x n` problem on the row-major matrix `m` from scratch.
    pub(crate) fn solve(n: usize, m: &[f64]) -> Self {
        debug_assert_eq!(m.len(), n * n);
        let mut lap = Self {
            n,
            cols: (0..n).collect(),
            row_active: vec![true; n],
            u: vec![0.0; n],
            v: vec![0.0; n + 1],
            col_of_row: vec![NONE; n],
            row_of_col: vec![NONE; n + 1],
        };
        for r in 0..n {
            lap.augment(m, r);
        }
        lap
    }

    pub(crate) fn col_of(&self, row: usize) -> usize {
        self.col_of_row[row]
    }

    pub(crate) fn active_cols(&self) -> &[usize] {
        &self.cols
    }

    pub(crate) fn is_row_active(&self, row: usize) -> bool {
        self.row_active[row]
    }

    /// Reduced cost of edge `(i, j)`. Any matching that uses the edge costs at
    /// least the current optimum plus this amount.
    pub(crate) fn reduced_cost(&self, m: &[f64], i: usize, j: usize) -> f64 {
        m[i * self.n + j] - self.u[i] - self.v[j]
    }

    /// Cost of the current matching, summed in row order.
    pub(crate) fn value(&self, m: &[f64]) -> f64 {
        (0..self.n)
            .filter(|&i| self.row_active[i])
            .map(|i| m[i * self.n + self.col_of_row[i]])
            .sum()
    }

    /// Removes row `i` and column `j` from the active problem and restores an
    /// optimal matching of what remains.
    pub(crate) fn fix(&mut self, m: &[f64], i: usize, j: usize) {
        debug_assert!(self.row_active[i]);
        let ji = self.col_of_row[i];
        let ij = self.row_of_col[j];
        debug_assert!(ij != NONE && ji != NONE);

        self.row_active[i] = false;
        self.col_of_row[i] = NONE;
        self.row_of_col[j] = NONE;
        let pos = self.cols.binary_search(&j).expect("column is active");
        self.cols.remove(pos);

        if ji != j {
            self.row_of_col[ji] = NONE;
            self.col_of_row[ij] = NONE;
            self.augment(m, ij);
        }
    }

    /// Matches the free row `r`, keeping all matched edges tight and all
    /// reduced costs non-negative.
    fn augment(&mut self, m: &[f64], r: usize) {
        let n = self.n;
        let virt = n;
        let mut minv = vec![f64::INFINITY; n + 1];
        let mut way = vec![virt; n + 1];
        let mut used = vec![false; n + 1];

        self.row_of_col[virt] = r;
        let mut j0 = virt;
        loop {
            used[j0] = true;
            let i0 = self.row_of_col[j0];
            let row = &m[i0 * n..(i0 + 1) * n];
            let ui = self.u[i0];
            let mut delta = f64::INFINITY;
            let mut j1 = NONE;
            for &j in &self.cols {
                if used[j] {
                    continue;
                }
                let cur = row[j] - ui - self.v[j];
                if cur < minv[j] {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if minv[j] < delta {
                    delta = minv[j];
                    j1 = j;
                }
            }
            assert!(j1 != NONE, "no augmenting path: active problem is not square");

            self.u[self.row_of_col[virt]] += delta;
            for &j in &self.cols {
                if used[j] {
                    self.u[self.row_of_col[j]] += delta;
                    self.v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if self.row_of_col[j0] == NONE {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            let row = self.row_of_col[j1];
            self.row_of_col[j0] = row;
            self.col_of_row[row] = j0;
            j0 = j1;
            if j0 == virt {
                break;
            }
        }
        self.row_of_col[virt] = NONE;
    }
}

#[cfg(test)]
mod tests {
    use rand::{Rng, SeedableRng};

    use super::*;

    fn brute_min(n: usize, m: &[f64], rows: &[usize], cols: &[usize]) -> f64 {
        fn rec(m: &[f64], n: usize, rows: &[usize], cols: &mut Vec<usize>) -> f64 {
            let Some((&r, rest)) = rows.split_first() else {
                return 0.0;
            };
            let mut best = f64::INFINITY;
            for k in 0..cols.len() {
                let c = cols.remove(k);
                best = best.min(m[r * n + c] + rec(m, n, rest, cols));
                cols.insert(k, c);
            }
            best
        }
        rec(m, n, rows, &mut cols.to_vec())
    }

    #[test]
    fn solves_small_known_instance() {
        let m = [4.0, 1.0, 3.0, 2.0, 0.0, 5.0, 3.0, 2.0, 2.0];
        let lap = Lap::solve(3, &m);
        assert_eq!(lap.value(&m), 5.0);
        let mut cols: Vec<_> = (0..3).map(|i| lap.col_of(i)).collect();
        cols.sort();
        assert_eq!(cols, vec![0, 1, 2]);
    }

    #[test]
    fn matches_enumeration_after_fixing() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        for _ in 0..300 {
            let n = rng.gen_range(1..=6);
            let m: Vec<f64> = (0..n * n).map(|_| rng.gen_range(-3.0..3.0)).collect();
            let mut lap = Lap::solve(n, &m);
            let mut rows: Vec<usize> = (0..n).collect();
            let mut cols: Vec<usize> = (0..n).collect();
            let exact = brute_min(n, &m, &rows, &cols);
            assert!((lap.value(&m) - exact).abs() < 1e-9);
            while rows.len() > 1 {
                let i = rows.remove(rng.gen_range(0..rows.len()));
                let j = cols.remove(rng.gen_range(0..cols.len()));
                lap.fix(&m, i, j);
                let exact = brute_min(n, &m, &rows, &cols);
                assert!((lap.value(&m) - exact).abs() < 1e-9);
                assert_eq!(lap.active_cols(), cols.as_slice());
            }
        }
    }
}
