//! Energy prior over matching maps: `log e(T) = −Σ_j D(x0_{T(j)}, x_j) / (n τ)`.

use crate::model::{FeatureKind, FeatureMatrix};

/// Above this many reference/group pairs distances are computed on demand.
pub const CACHE_LIMIT: usize = 10_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Distance {
    Euclidean,
    Hamming,
}

impl Distance {
    pub fn for_kind(kind: FeatureKind) -> Self {
        match kind {
            FeatureKind::Continuous => Distance::Euclidean,
            FeatureKind::Binary => Distance::Hamming,
        }
    }

    pub fn eval(self, a: &[f64], b: &[f64]) -> f64 {
        match self {
            Distance::Euclidean => a
                .iter()
                .zip(b)
                .map(|(x, y)| (x - y) * (x - y))
                .sum::<f64>()
                .sqrt(),
            Distance::Hamming => a.iter().zip(b).filter(|(x, y)| x != y).count() as f64,
        }
    }
}

/// Distances between every reference point and every point of one group.
#[derive(Debug, Clone)]
pub struct DistanceCache<'a> {
    reference: &'a FeatureMatrix,
    group: &'a FeatureMatrix,
    metric: Distance,
    // row-major over group index, then reference index
    table: Option<Vec<f64>>,
}

impl<'a> DistanceCache<'a> {
    pub fn new(reference: &'a FeatureMatrix, group: &'a FeatureMatrix, metric: Distance) -> Self {
        Self::with_limit(reference, group, metric, CACHE_LIMIT)
    }

    pub fn with_limit(
        reference: &'a FeatureMatrix,
        group: &'a FeatureMatrix,
        metric: Distance,
        limit: usize,
    ) -> Self {
        let (n0, nb) = (reference.rows(), group.rows());
        let table = (n0.saturating_mul(nb) <= limit).then(|| {
            let mut t = Vec::with_capacity(n0 * nb);
            for j in 0..nb {
                let xj = group.row(j);
                t.extend((0..n0).map(|i| metric.eval(reference.row(i), xj)));
            }
            t
        });
        Self {
            reference,
            group,
            metric,
            table,
        }
    }

    pub fn is_cached(&self) -> bool {
        self.table.is_some()
    }

    pub fn metric(&self) -> Distance {
        self.metric
    }

    /// Distance between reference point `i` and group point `j`.
    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        match &self.table {
            Some(t) => t[j * self.reference.rows() + i],
            None => self.metric.eval(self.reference.row(i), self.group.row(j)),
        }
    }

    pub fn n_reference(&self) -> usize {
        self.reference.rows()
    }

    pub fn n_group(&self) -> usize {
        self.group.rows()
    }
}

/// `log e(T)` for the map `t_map` (group index → reference index).
pub fn log_energy(t_map: &[usize], cache: &DistanceCache<'_>, tau: f64) -> f64 {
    let total: f64 = t_map.iter().enumerate().map(|(j, &i)| cache.get(i, j)).sum();
    -total / (t_map.len() as f64 * tau)
}

/// Change in `log e` when the images of `j1` and `j2` are exchanged.
pub fn log_energy_swap_delta(t_map: &[usize], j1: usize, j2: usize, cache: &DistanceCache<'_>, tau: f64) -> f64 {
    let (a, b) = (t_map[j1], t_map[j2]);
    let before = cache.get(a, j1) + cache.get(b, j2);
    let after = cache.get(b, j1) + cache.get(a, j2);
    -(after - before) / (t_map.len() as f64 * tau)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn metrics() {
        assert_eq!(Distance::Euclidean.eval(&[0.0, 0.0], &[3.0, 4.0]), 5.0);
        assert_eq!(Distance::Hamming.eval(&[1.0, 0.0, 1.0], &[0.0, 0.0, 0.0]), 2.0);
    }

    #[test]
    fn cached_and_lazy_agree() {
        let r = FeatureMatrix::from_rows(&[[0.0, 1.0], [2.0, -1.0], [0.5, 0.5]]).unwrap();
        let g = FeatureMatrix::from_rows(&[[1.0, 1.0], [-3.0, 0.0], [0.0, 0.0], [4.0, 4.0]]).unwrap();
        let c = DistanceCache::new(&r, &g, Distance::Euclidean);
        let l = DistanceCache::with_limit(&r, &g, Distance::Euclidean, 0);
        assert!(c.is_cached() && !l.is_cached());
        let t = [0, 1, 2, 0];
        assert_eq!(log_energy(&t, &c, 0.7), log_energy(&t, &l, 0.7));
        let mut s = t;
        s.swap(1, 3);
        let d = log_energy(&s, &c, 0.7) - log_energy(&t, &c, 0.7);
        assert!((d - log_energy_swap_delta(&t, 1, 3, &c, 0.7)).abs() < 1e-12);
    }
}
