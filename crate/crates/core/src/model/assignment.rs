use serde::{Deserialize, Serialize};

use crate::error::{FbcError, Result};

/// Cluster labels for every instance of every group.
///
/// Labels are zero-based and dense: every label in `0..k` is used by at least
/// one instance. [`Assignment::canonical`] numbers clusters by first
/// appearance, scanning group 0 first.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Assignment {
    labels: Vec<Vec<usize>>,
    k: usize,
}

impl Assignment {
    /// Wraps labels as given; they must already be dense in `0..k`.
    pub fn new(labels: Vec<Vec<usize>>) -> Result<Self> {
        let k = labels
            .iter()
            .flatten()
            .copied()
            .max()
            .map_or(0, |m| m + 1);
        let mut seen = vec![false; k];
        for &l in labels.iter().flatten() {
            seen[l] = true;
        }
        if let Some(missing) = seen.iter().position(|s| !s) {
            return Err(FbcError::invalid(format!(
                "label {missing} unused; labels must be dense"
            )));
        }
        Ok(Self { labels, k })
    }

    /// Relabels arbitrary identifiers by order of first appearance.
    pub fn canonical(raw: &[Vec<usize>]) -> Self {
        let mut map = std::collections::HashMap::new();
        let labels = raw
            .iter()
            .map(|g| {
                g.iter()
                    .map(|l| {
                        let next = map.len();
                        *map.entry(*l).or_insert(next)
                    })
                    .collect()
            })
            .collect();
        Self {
            labels,
            k: map.len(),
        }
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn n_groups(&self) -> usize {
        self.labels.len()
    }

    pub fn group(&self, b: usize) -> &[usize] {
        &self.labels[b]
    }

    pub fn labels(&self) -> &[Vec<usize>] {
        &self.labels
    }

    pub fn sizes(&self) -> Vec<usize> {
        self.labels.iter().map(Vec::len).collect()
    }

    /// `counts[k][b]`: members of group `b` in cluster `k`.
    pub fn counts(&self) -> Vec<Vec<usize>> {
        let mut counts = vec![vec![0usize; self.labels.len()]; self.k];
        for (b, g) in self.labels.iter().enumerate() {
            for &l in g {
                counts[l][b] += 1;
            }
        }
        counts
    }

    pub(crate) fn check_sizes(&self, sizes: &[usize]) -> Result<()> {
        if sizes.len() != self.labels.len() {
            return Err(FbcError::dim(format!(
                "{} group sizes for {} label groups",
                sizes.len(),
                self.labels.len()
            )));
        }
        for (b, (&n, g)) in sizes.iter().zip(&self.labels).enumerate() {
            if n != g.len() {
                return Err(FbcError::dim(format!(
                    "group {b}: size {n} but {} labels",
                    g.len()
                )));
            }
        }
        Ok(())
    }
}
