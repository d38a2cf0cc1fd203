//! Minimum-cost bipartite assignment (Kuhn-Munkres with potentials,
//! shortest augmenting path, O(n^3)).
//!
//! Rectangular instances are padded internally with zero-cost dummies;
//! callers gate forbidden pairs with a large finite sentinel and drop
//! returned pairs that carry it.

/// Dense row-major cost matrix.
#[derive(Debug, Clone)]
pub struct CostMatrix {
    pub rows: usize,
    pub cols: usize,
    data: Vec<f64>,
}

impl CostMatrix {
    pub fn new(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut m = Self::new(rows, cols);
        for r in 0..rows {
            for c in 0..cols {
                m.set(r, c, f(r, c));
            }
        }
        m
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> f64 {
        self.data[r * self.cols + c]
    }

    #[inline]
    pub fn set(&mut self, r: usize, c: usize, v: f64) {
        self.data[r * self.cols + c] = v;
    }
}

/// An optimal assignment: matched `(row, col)` pairs and their total cost.
#[derive(Debug, Clone, PartialEq)]
pub struct Assignment {
    pub pairs: Vec<(usize, usize)>,
    pub total_cost: f64,
}

const NONE: usize = usize::MAX;

/// Solve the assignment problem, minimizing total cost.
///
/// Every cost must be finite. With `rows <= cols` every row is matched;
/// otherwise the unmatched rows are simply absent from `pairs`.
pub fn hungarian(costs: &CostMatrix) -> Assignment {
    assert!(
        costs.data.iter().all(|v| v.is_finite()),
        "assignment costs must be finite; gate with a large sentinel instead"
    );
    if costs.rows == 0 || costs.cols == 0 {
        return Assignment { pairs: Vec::new(), total_cost: 0.0 };
    }
    let n = costs.rows.max(costs.cols);
    let cost = |i: usize, j: usize| -> f64 {
        if i < costs.rows && j < costs.cols {
            costs.get(i, j)
        } else {
            0.0
        }
    };

    // Dual potentials over the padded square matrix; column n is virtual.
    let mut u = vec![0.0f64; n + 1];
    let mut v = vec![0.0f64; n + 1];
    // p[j]: row matched to column j (NONE = free); p[n] holds the root row.
    let mut p = vec![NONE; n + 1];
    let mut way = vec![0usize; n + 1];

    for root in 0..n {
        p[n] = root;
        let mut j0 = n;
        let mut minv = vec![f64::INFINITY; n + 1];
        let mut used = vec![false; n + 1];
        loop {
            used[j0] = true;
            let i0 = p[j0];
            let mut delta = f64::INFINITY;
            let mut j1 = n;
            for j in 0..n {
                if used[j] {
                    continue;
                }
                let cur = cost(i0, j) - u[i0] - v[j];
                if cur < minv[j] {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if minv[j] < delta {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for j in 0..=n {
                if used[j] {
                    u[p[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if p[j0] == NONE {
                break;
            }
        }
        // Augment along the alternating path back to the virtual column.
        loop {
            let j1 = way[j0];
            p[j0] = p[j1];
            j0 = j1;
            if j0 == n {
                break;
            }
        }
    }

    let mut pairs = Vec::new();
    let mut total = 0.0;
    for j in 0..costs.cols {
        let i = p[j];
        if i != NONE && i < costs.rows {
            pairs.push((i, j));
            total += costs.get(i, j);
        }
    }
    pairs.sort_unstable();
    Assignment { pairs, total_cost: total }
}
