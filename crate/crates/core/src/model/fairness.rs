//! Group-fairness measures of an assignment.

use crate::error::{FbcError, Result};
use crate::model::Assignment;

/// Fairness gap: half the L1 distance between the cluster-proportion vector of
/// group 0 and that of each other group, averaged over the other groups.
///
/// Zero means every cluster holds each group in the dataset-wide proportion.
pub fn delta_fairness(sizes: &[usize], assignment: &Assignment) -> Result<f64> {
    assignment.check_sizes(sizes)?;
    let groups = sizes.len();
    if groups < 2 {
        return Err(FbcError::dim("fairness needs at least two groups"));
    }
    if sizes.contains(&0) {
        return Err(FbcError::dim("empty group"));
    }
    let counts = assignment.counts();
    let mut total = 0.0;
    for row in &counts {
        let p0 = row[0] as f64 / sizes[0] as f64;
        for b in 1..groups {
            total += (p0 - row[b] as f64 / sizes[b] as f64).abs();
        }
    }
    Ok(total / (2.0 * (groups - 1) as f64))
}

/// Balance: minimum over clusters of the smallest pairwise group-count ratio.
/// A cluster missing any group scores 0.
pub fn balance(sizes: &[usize], assignment: &Assignment) -> Result<f64> {
    assignment.check_sizes(sizes)?;
    let counts = assignment.counts();
    let mut bal = 1.0f64;
    for row in &counts {
        let lo = *row.iter().min().unwrap_or(&0);
        let hi = *row.iter().max().unwrap_or(&0);
        let b = if lo == 0 { 0.0 } else { lo as f64 / hi as f64 };
        bal = bal.min(b);
    }
    Ok(bal)
}
