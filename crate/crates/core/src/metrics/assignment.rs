//! Linear assignment: exact Hungarian solver with dual potentials and an
//! auction approximation for large problems.

use crate::error::{FbcError, Result};

/// Largest row count solved exactly by [`assign`].
pub const EXACT_LIMIT: usize = 512;

/// Minimum-cost assignment of every row to a distinct column.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearAssignment {
    /// Column assigned to each row.
    pub row_to_col: Vec<usize>,
    pub total_cost: f64,
    /// Dual variables with `cost[i][j] - row_potential[i] - col_potential[j] >= 0`,
    /// tight on assigned pairs. Empty for approximate solutions.
    pub row_potential: Vec<f64>,
    pub col_potential: Vec<f64>,
    pub exact: bool,
}

fn check_shape(rows: usize, cols: usize, cost: &[f64]) -> Result<()> {
    if cost.len() != rows * cols {
        return Err(FbcError::dim(format!(
            "cost matrix has {} entries, expected {rows}x{cols}",
            cost.len()
        )));
    }
    if rows > cols {
        return Err(FbcError::invalid(format!(
            "cannot assign {rows} rows injectively into {cols} columns"
        )));
    }
    if cost.iter().any(|c| !c.is_finite()) {
        return Err(FbcError::invalid("non-finite assignment cost"));
    }
    Ok(())
}

/// Exact Hungarian algorithm (shortest augmenting paths with potentials),
/// `O(rows² · cols)`. `cost` is row-major `rows × cols` with `rows <= cols`.
pub fn hungarian(rows: usize, cols: usize, cost: &[f64]) -> Result<LinearAssignment> {
    check_shape(rows, cols, cost)?;
    let c = |i: usize, j: usize| cost[(i - 1) * cols + (j - 1)];
    // 1-based with column 0 as the virtual root
    let mut u = vec![0.0; rows + 1];
    let mut v = vec![0.0; cols + 1];
    let mut owner = vec![0usize; cols + 1];
    let mut way = vec![0usize; cols + 1];
    for i in 1..=rows {
        owner[0] = i;
        let mut j0 = 0;
        let mut minv = vec![f64::INFINITY; cols + 1];
        let mut used = vec![false; cols + 1];
        loop {
            used[j0] = true;
            let i0 = owner[j0];
            let mut delta = f64::INFINITY;
            let mut j1 = 0;
            for j in 1..=cols {
                if !used[j] {
                    let cur = c(i0, j) - u[i0] - v[j];
                    if cur < minv[j] {
                        minv[j] = cur;
                        way[j] = j0;
                    }
                    if minv[j] < delta {
                        delta = minv[j];
                        j1 = j;
                    }
                }
            }
            for j in 0..=cols {
                if used[j] {
                    u[owner[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if owner[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            owner[j0] = owner[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }
    let mut row_to_col = vec![0; rows];
    for j in 1..=cols {
        if owner[j] != 0 {
            row_to_col[owner[j] - 1] = j - 1;
        }
    }
    let total_cost = row_to_col
        .iter()
        .enumerate()
        .map(|(i, &j)| cost[i * cols + j])
        .sum();
    Ok(LinearAssignment {
        row_to_col,
        total_cost,
        row_potential: u[1..].to_vec(),
        col_potential: v[1..].to_vec(),
        exact: true,
    })
}

/// Forward auction with ε-scaling; near-optimal within `rows · ε_final`.
pub fn auction(rows: usize, cols: usize, cost: &[f64]) -> Result<LinearAssignment> {
    check_shape(rows, cols, cost)?;
    let max_abs = cost.iter().fold(0.0f64, |m, c| m.max(c.abs())).max(1e-12);
    // maximize benefit = -cost
    let mut price = vec![0.0; cols];
    let mut row_to_col = vec![usize::MAX; rows];
    let mut col_owner = vec![usize::MAX; cols];
    let final_eps = max_abs * 1e-6 / (rows as f64 + 1.0);
    let mut eps = max_abs / 4.0;
    loop {
        row_to_col.iter_mut().for_each(|c| *c = usize::MAX);
        col_owner.iter_mut().for_each(|o| *o = usize::MAX);
        let mut queue: Vec<usize> = (0..rows).rev().collect();
        while let Some(i) = queue.pop() {
            let (mut best, mut best_val, mut second_val) = (0, f64::NEG_INFINITY, f64::NEG_INFINITY);
            for j in 0..cols {
                let val = -cost[i * cols + j] - price[j];
                if val > best_val {
                    second_val = best_val;
                    best_val = val;
                    best = j;
                } else if val > second_val {
                    second_val = val;
                }
            }
            let gap = if second_val.is_finite() { best_val - second_val } else { max_abs };
            price[best] += gap + eps;
            if col_owner[best] != usize::MAX {
                let prev = col_owner[best];
                row_to_col[prev] = usize::MAX;
                queue.push(prev);
            }
            col_owner[best] = i;
            row_to_col[i] = best;
        }
        if eps <= final_eps {
            break;
        }
        eps = (eps / 8.0).max(final_eps);
    }
    let total_cost = row_to_col
        .iter()
        .enumerate()
        .map(|(i, &j)| cost[i * cols + j])
        .sum();
    Ok(LinearAssignment {
        row_to_col,
        total_cost,
        row_potential: Vec::new(),
        col_potential: Vec::new(),
        exact: false,
    })
}

/// Exact solution up to [`EXACT_LIMIT`] rows, auction approximation above.
pub fn assign(rows: usize, cols: usize, cost: &[f64]) -> Result<LinearAssignment> {
    if rows <= EXACT_LIMIT {
        hungarian(rows, cols, cost)
    } else {
        log::warn!("assignment with {rows} rows uses the approximate auction solver");
        auction(rows, cols, cost)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_square() {
        let cost = [4.0, 1.0, 3.0, 2.0, 0.0, 5.0, 3.0, 2.0, 2.0];
        let a = hungarian(3, 3, &cost).unwrap();
        assert_eq!(a.total_cost, 5.0);
        assert_eq!(a.row_to_col, vec![1, 0, 2]);
    }

    #[test]
    fn rectangular_picks_cheapest_columns() {
        let cost = [5.0, 1.0, 9.0, 9.0, 9.0, 0.5];
        let a = hungarian(2, 3, &cost).unwrap();
        assert_eq!(a.row_to_col, vec![1, 2]);
        assert!(matches!(hungarian(3, 2, &cost), Err(FbcError::InvalidArgument(_))));
    }

    #[test]
    fn auction_close_to_exact() {
        let n = 30;
        let cost: Vec<f64> = (0..n * n).map(|k| ((k * 7919) % 101) as f64 / 7.0).collect();
        let h = hungarian(n, n, &cost).unwrap();
        let a = auction(n, n, &cost).unwrap();
        let mut seen = a.row_to_col.clone();
        seen.sort_unstable();
        seen.dedup();
        assert_eq!(seen.len(), n);
        assert!(a.total_cost <= h.total_cost + 1e-3, "{} vs {}", a.total_cost, h.total_cost);
    }
}
