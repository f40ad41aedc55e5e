//! Dense linear assignment (Hungarian method with potentials), O(n^3).

/// Optimal one-to-one assignment of rows to columns.
#[derive(Debug, Clone, PartialEq)]
pub struct Assignment {
    /// `cols[i]` is the column assigned to row `i`.
    pub cols: Vec<usize>,
    /// Objective value, summed over rows in row order.
    pub value: f64,
}

/// Minimise `sum_i cost[i][cols[i]]` over permutations. `cost` is row-major n x n.
pub fn solve_min(cost: &[f64], n: usize) -> Assignment {
    assert_eq!(cost.len(), n * n, "cost matrix must be n x n");
    if n == 0 {
        return Assignment {
            cols: Vec::new(),
            value: 0.0,
        };
    }
    debug_assert!(cost.iter().all(|c| c.is_finite()));

    // 1-based potentials; column 0 is a sentinel.
    let mut u = vec![0.0f64; n + 1];
    let mut v = vec![0.0f64; n + 1];
    let mut row_of = vec![0usize; n + 1];
    let mut way = vec![0usize; n + 1];

    for i in 1..=n {
        row_of[0] = i;
        let mut j0 = 0usize;
        let mut minv = vec![f64::INFINITY; n + 1];
        let mut used = vec![false; n + 1];
        loop {
            used[j0] = true;
            let i0 = row_of[j0];
            let mut delta = f64::INFINITY;
            let mut j1 = 0usize;
            for j in 1..=n {
                if used[j] {
                    continue;
                }
                let cur = cost[(i0 - 1) * n + (j - 1)] - u[i0] - v[j];
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
                    u[row_of[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if row_of[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            row_of[j0] = row_of[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }

    let mut cols = vec![0usize; n];
    for j in 1..=n {
        if row_of[j] > 0 {
            cols[row_of[j] - 1] = j - 1;
        }
    }
    let value = cols.iter().enumerate().map(|(i, &j)| cost[i * n + j]).sum();
    Assignment { cols, value }
}

/// Maximise `sum_i weight[i][cols[i]]` over permutations.
pub fn solve_max(weight: &[f64], n: usize) -> Assignment {
    let neg: Vec<f64> = weight.iter().map(|w| -w).collect();
    let a = solve_min(&neg, n);
    let value = a.cols.iter().enumerate().map(|(i, &j)| weight[i * n + j]).sum();
    Assignment { cols: a.cols, value }
}
