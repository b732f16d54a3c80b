//! Exact minimum-cost bipartite matching on rectangular cost matrices.
//!
//! The problem is padded to a square one with zero-cost dummy rows or
//! columns and solved with the shortest-augmenting-path form of the
//! Hungarian method, which also yields optimal dual potentials. Among all
//! optimal matchings (exactly those using only zero-reduced-cost edges) the
//! one with the lexicographically smallest pair list is then selected by
//! rotating along alternating cycles.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

/// Reduced costs within this many ulps of the cost scale count as zero.
const TIE_ULPS: f64 = 64.0;

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct AssignmentResult {
    /// Matched `(row, col)` pairs in ascending row order.
    pub pairs: Vec<(usize, usize)>,
    pub unmatched_rows: Vec<usize>,
    pub unmatched_cols: Vec<usize>,
}

impl AssignmentResult {
    pub fn total_cost(&self, cost: &DMatrix<f64>) -> f64 {
        self.pairs.iter().map(|&(r, c)| cost[(r, c)]).sum()
    }
}

/// Solves the assignment problem on the submatrix selected by `rows` and
/// `cols`.
///
/// Returns a maximum-cardinality matching of minimum total cost; ties are
/// broken towards the lexicographically smallest sorted pair list. Indices
/// in the result refer to `cost` directly.
///
/// # Panics
///
/// If an index is out of bounds or a selected entry is not finite.
pub fn min_cost_matching(cost: &DMatrix<f64>, rows: &[usize], cols: &[usize]) -> AssignmentResult {
    let mut rows = rows.to_vec();
    rows.sort_unstable();
    rows.dedup();
    let mut cols = cols.to_vec();
    cols.sort_unstable();
    cols.dedup();

    let n = rows.len();
    let m = cols.len();
    if n == 0 || m == 0 {
        return AssignmentResult {
            pairs: Vec::new(),
            unmatched_rows: rows,
            unmatched_cols: cols,
        };
    }

    let k = n.max(m);
    let mut a = vec![0.0; k * k];
    let mut scale: f64 = 1.0;
    for (i, &r) in rows.iter().enumerate() {
        for (j, &c) in cols.iter().enumerate() {
            let v = cost[(r, c)];
            assert!(v.is_finite(), "cost[({r}, {c})] is not finite");
            a[i * k + j] = v;
            scale = scale.max(v.abs());
        }
    }

    let solution = solve_square(&a, k);
    let tol = TIE_ULPS * f64::EPSILON * k as f64 * scale;
    let col_of = lexicographic_refine(&a, k, n, m, &solution, tol);

    let mut pairs = Vec::with_capacity(n.min(m));
    let mut unmatched_rows = Vec::new();
    let mut col_used = vec![false; m];
    for i in 0..n {
        let j = col_of[i];
        if j < m {
            pairs.push((rows[i], cols[j]));
            col_used[j] = true;
        } else {
            unmatched_rows.push(rows[i]);
        }
    }
    let unmatched_cols = (0..m).filter(|&j| !col_used[j]).map(|j| cols[j]).collect();
    AssignmentResult {
        pairs,
        unmatched_rows,
        unmatched_cols,
    }
}

struct SquareSolution {
    /// Row potentials.
    u: Vec<f64>,
    /// Column potentials.
    v: Vec<f64>,
    col_of: Vec<usize>,
}

/// Hungarian method with potentials on a dense `k x k` row-major matrix.
fn solve_square(a: &[f64], k: usize) -> SquareSolution {
    // 1-based bookkeeping; index 0 is the virtual source column.
    let mut u = vec![0.0; k + 1];
    let mut v = vec![0.0; k + 1];
    let mut row_of_col = vec![0usize; k + 1];
    let mut way = vec![0usize; k + 1];

    for i in 1..=k {
        row_of_col[0] = i;
        let mut j0 = 0;
        let mut minv = vec![f64::INFINITY; k + 1];
        let mut used = vec![false; k + 1];
        loop {
            used[j0] = true;
            let i0 = row_of_col[j0];
            let mut delta = f64::INFINITY;
            let mut j1 = 0;
            for j in 1..=k {
                if used[j] {
                    continue;
                }
                let cur = a[(i0 - 1) * k + (j - 1)] - u[i0] - v[j];
                if cur < minv[j] {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if minv[j] < delta {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for j in 0..=k {
                if used[j] {
                    u[row_of_col[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if row_of_col[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            row_of_col[j0] = row_of_col[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }

    let mut col_of = vec![0; k];
    for j in 1..=k {
        col_of[row_of_col[j] - 1] = j - 1;
    }
    SquareSolution {
        u: u[1..].to_vec(),
        v: v[1..].to_vec(),
        col_of,
    }
}

struct TightGraph<'a> {
    a: &'a [f64],
    k: usize,
    u: &'a [f64],
    v: &'a [f64],
    tol: f64,
}

impl TightGraph<'_> {
    fn tight(&self, i: usize, j: usize) -> bool {
        self.a[i * self.k + j] - self.u[i] - self.v[j] <= self.tol
    }
}

/// Walks real rows in order and moves each to the smallest column it can
/// take without leaving the set of optimal matchings.
fn lexicographic_refine(
    a: &[f64],
    k: usize,
    n: usize,
    m: usize,
    sol: &SquareSolution,
    tol: f64,
) -> Vec<usize> {
    let graph = TightGraph {
        a,
        k,
        u: &sol.u,
        v: &sol.v,
        tol,
    };
    let mut col_of = sol.col_of.clone();
    let mut row_of = vec![0; k];
    for (i, &j) in col_of.iter().enumerate() {
        row_of[j] = i;
    }
    let mut locked = vec![false; k];

    for i in 0..n {
        let current = col_of[i];
        let limit = current.min(m);
        for j in 0..limit {
            if locked[j] || !graph.tight(i, j) {
                continue;
            }
            // Moving i onto j frees `current`; the row holding j must reach
            // it through an alternating path of tight edges.
            let displaced = row_of[j];
            let mut visited = vec![false; k];
            visited[j] = true;
            if reroute(&graph, displaced, current, &locked, &mut visited, &mut col_of, &mut row_of) {
                col_of[i] = j;
                row_of[j] = i;
                break;
            }
        }
        locked[col_of[i]] = true;
    }
    col_of
}

fn reroute(
    graph: &TightGraph<'_>,
    row: usize,
    target: usize,
    locked: &[bool],
    visited: &mut [bool],
    col_of: &mut [usize],
    row_of: &mut [usize],
) -> bool {
    for col in 0..graph.k {
        if locked[col] || visited[col] || !graph.tight(row, col) {
            continue;
        }
        visited[col] = true;
        if col == target || reroute(graph, row_of[col], target, locked, visited, col_of, row_of) {
            col_of[row] = col;
            row_of[col] = row;
            return true;
        }
    }
    false
}
