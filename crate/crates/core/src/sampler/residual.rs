//! Choice of the reference instances that receive one extra matched partner
//! when a group size is not a multiple of the reference size.

use rand::seq::index::sample;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{FbcError, Result};
use crate::model::FeatureMatrix;

const MAX_SWAP_ROUNDS: usize = 50;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ResidualStrategy {
    /// Uniform subset.
    #[default]
    Random,
    /// Medoids of a `r`-medoids clustering of the reference group.
    Medoids,
}

/// Dissimilarity used by the medoid search: squared Euclidean, or Hamming
/// when `binary`.
fn dissimilarity(a: &[f64], b: &[f64], binary: bool) -> f64 {
    if binary {
        a.iter().zip(b).filter(|(x, y)| x != y).count() as f64
    } else {
        a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
    }
}

/// Picks `r` reference indices, sorted ascending.
pub fn select_residual<R: Rng + ?Sized>(
    reference: &FeatureMatrix,
    r: usize,
    strategy: ResidualStrategy,
    rng: &mut R,
) -> Result<Vec<usize>> {
    let n = reference.rows();
    if r >= n.max(1) && r > 0 {
        return Err(FbcError::invalid(format!(
            "residual size {r} must be smaller than the reference size {n}"
        )));
    }
    if r == 0 {
        return Ok(Vec::new());
    }
    let mut out = match strategy {
        ResidualStrategy::Random => sample(rng, n, r).into_vec(),
        ResidualStrategy::Medoids => k_medoids(reference, r, reference.is_binary()),
    };
    out.sort_unstable();
    Ok(out)
}

/// PAM: greedy build followed by best-improvement swap rounds.
pub fn k_medoids(data: &FeatureMatrix, k: usize, binary: bool) -> Vec<usize> {
    let n = data.rows();
    assert!(k >= 1 && k <= n);
    let dist: Vec<f64> = (0..n)
        .flat_map(|i| (0..n).map(move |j| (i, j)))
        .map(|(i, j)| dissimilarity(data.row(i), data.row(j), binary))
        .collect();
    let d = |i: usize, j: usize| dist[i * n + j];

    let mut is_medoid = vec![false; n];
    let mut medoids = Vec::with_capacity(k);
    let mut nearest = vec![f64::INFINITY; n];
    for _ in 0..k {
        let mut best = (f64::INFINITY, 0);
        for c in (0..n).filter(|&c| !is_medoid[c]) {
            let total: f64 = (0..n).map(|o| nearest[o].min(d(o, c))).sum();
            if total < best.0 {
                best = (total, c);
            }
        }
        let c = best.1;
        is_medoid[c] = true;
        medoids.push(c);
        for (o, near) in nearest.iter_mut().enumerate() {
            *near = near.min(d(o, c));
        }
    }

    for _ in 0..MAX_SWAP_ROUNDS {
        // nearest and second-nearest medoid distance for each point
        let mut first = vec![(f64::INFINITY, usize::MAX); n];
        let mut second = vec![f64::INFINITY; n];
        for o in 0..n {
            for (slot, &m) in medoids.iter().enumerate() {
                let v = d(o, m);
                if v < first[o].0 {
                    second[o] = first[o].0;
                    first[o] = (v, slot);
                } else if v < second[o] {
                    second[o] = v;
                }
            }
        }
        let mut best = (-1e-12, usize::MAX, usize::MAX);
        for slot in 0..k {
            for h in (0..n).filter(|&h| !is_medoid[h]) {
                let mut change = 0.0;
                for o in 0..n {
                    let dh = d(o, h);
                    let cur = first[o].0;
                    let after = if first[o].1 == slot {
                        dh.min(second[o])
                    } else {
                        dh.min(cur)
                    };
                    change += after - cur;
                }
                if change < best.0 {
                    best = (change, slot, h);
                }
            }
        }
        if best.1 == usize::MAX {
            break;
        }
        let (_, slot, h) = best;
        is_medoid[medoids[slot]] = false;
        is_medoid[h] = true;
        medoids[slot] = h;
    }
    medoids
}
