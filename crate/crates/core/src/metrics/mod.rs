//! Clustering utility, chain diagnostics and held-out likelihood.

mod assignment;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{FbcError, Result};
use crate::model::{Assignment, FeatureMatrix, GroupedDataset};
use crate::priors::ConjugateFamily;

pub use crate::model::{balance, delta_fairness};
pub use assignment::{assign, auction, hungarian, LinearAssignment, EXACT_LIMIT};

/// Pooled within-cluster sum of squared distances to the empirical cluster
/// centers, divided by the total number of instances.
pub fn cost(data: &GroupedDataset, assignment: &Assignment) -> Result<f64> {
    assignment.check_sizes(&data.sizes())?;
    let d = data.dim();
    let k = assignment.k();
    let mut sums = vec![0.0; k * d];
    let mut counts = vec![0usize; k];
    for (b, g) in data.groups().iter().enumerate() {
        for (x, &z) in g.iter_rows().zip(assignment.group(b)) {
            counts[z] += 1;
            for (s, v) in sums[z * d..(z + 1) * d].iter_mut().zip(x) {
                *s += v;
            }
        }
    }
    for (z, &c) in counts.iter().enumerate() {
        if c > 0 {
            sums[z * d..(z + 1) * d].iter_mut().for_each(|s| *s /= c as f64);
        }
    }
    let mut total = 0.0;
    for (b, g) in data.groups().iter().enumerate() {
        for (x, &z) in g.iter_rows().zip(assignment.group(b)) {
            let mu = &sums[z * d..(z + 1) * d];
            total += x.iter().zip(mu).map(|(a, m)| (a - m) * (a - m)).sum::<f64>();
        }
    }
    Ok(total / data.total() as f64)
}

/// Sum over clusters of the Bernoulli negative log-likelihood at the
/// posterior-mean parameters `(alpha + ones) / (2 alpha + n)`; `alpha = 0`
/// gives the per-cluster maximum-likelihood plug-in.
pub fn categorical_cost(data: &GroupedDataset, assignment: &Assignment, alpha: f64) -> Result<f64> {
    assignment.check_sizes(&data.sizes())?;
    if !(alpha >= 0.0) {
        return Err(FbcError::invalid("alpha must be non-negative"));
    }
    if data.groups().iter().any(|g| !g.is_binary()) {
        return Err(FbcError::InvalidData("categorical cost needs binary features".into()));
    }
    let d = data.dim();
    let k = assignment.k();
    let mut ones = vec![0usize; k * d];
    let mut counts = vec![0usize; k];
    for (b, g) in data.groups().iter().enumerate() {
        for (x, &z) in g.iter_rows().zip(assignment.group(b)) {
            counts[z] += 1;
            for (j, &v) in x.iter().enumerate() {
                if v == 1.0 {
                    ones[z * d + j] += 1;
                }
            }
        }
    }
    let xlogp = |count: usize, p: f64| if count == 0 { 0.0 } else { count as f64 * p.ln() };
    let mut nll = 0.0;
    for z in 0..k {
        let n = counts[z] as f64;
        for j in 0..d {
            let o = ones[z * d + j];
            let p = (alpha + o as f64) / (2.0 * alpha + n);
            nll -= xlogp(o, p) + xlogp(counts[z] - o, 1.0 - p);
        }
    }
    Ok(nll)
}

/// Sample autocorrelation `ρ(0..=h_max)` with overall-mean centering; lag-`h`
/// cross products are averaged over their `N - h` pairs. A constant series
/// gives `ρ(0) = 1` and zero elsewhere.
pub fn autocorrelation(series: &[f64], h_max: usize) -> Result<Vec<f64>> {
    let n = series.len();
    if n < h_max + 2 {
        return Err(FbcError::invalid(format!(
            "series of length {n} is too short for lag {h_max}"
        )));
    }
    let mean = series.iter().sum::<f64>() / n as f64;
    let c: Vec<f64> = series.iter().map(|x| x - mean).collect();
    let var = c.iter().map(|x| x * x).sum::<f64>() / n as f64;
    let mut out = Vec::with_capacity(h_max + 1);
    out.push(1.0);
    for h in 1..=h_max {
        if var <= 0.0 {
            out.push(0.0);
            continue;
        }
        let cov = c[..n - h].iter().zip(&c[h..]).map(|(a, b)| a * b).sum::<f64>() / (n - h) as f64;
        out.push(cov / var);
    }
    Ok(out)
}

/// Gelman-Rubin potential scale reduction of a scalar across chains.
/// Chains are truncated to the shortest one. Values near 1 mean the
/// between-chain spread is what the within-chain spread predicts.
pub fn potential_scale_reduction(chains: &[Vec<f64>]) -> Result<f64> {
    let n = chains.iter().map(Vec::len).min().unwrap_or(0);
    if chains.len() < 2 || n < 2 {
        return Err(FbcError::invalid("need at least 2 chains of length 2"));
    }
    let m = chains.len() as f64;
    let nf = n as f64;
    let means: Vec<f64> = chains.iter().map(|c| c[..n].iter().sum::<f64>() / nf).collect();
    let grand = means.iter().sum::<f64>() / m;
    let between = nf / (m - 1.0) * means.iter().map(|mu| (mu - grand).powi(2)).sum::<f64>();
    let within = chains
        .iter()
        .zip(&means)
        .map(|(c, mu)| c[..n].iter().map(|x| (x - mu).powi(2)).sum::<f64>() / (nf - 1.0))
        .sum::<f64>()
        / m;
    if within <= 0.0 {
        return Ok(if between <= 0.0 { 1.0 } else { f64::INFINITY });
    }
    let pooled = (nf - 1.0) / nf * within + between / nf;
    Ok((pooled / within).sqrt())
}

/// Per-cluster sufficient statistics of every instance under `assignment`.
pub fn cluster_stats<F: ConjugateFamily>(
    family: &F,
    data: &GroupedDataset,
    assignment: &Assignment,
) -> Result<Vec<F::Stats>> {
    assignment.check_sizes(&data.sizes())?;
    let mut stats = vec![family.empty_stats(); assignment.k()];
    for (b, g) in data.groups().iter().enumerate() {
        for (x, &z) in g.iter_rows().zip(assignment.group(b)) {
            family.add_point(&mut stats[z], x);
        }
    }
    Ok(stats)
}

fn squared_distances(rows: &FeatureMatrix, cols: &FeatureMatrix) -> Vec<f64> {
    let mut out = Vec::with_capacity(rows.rows() * cols.rows());
    for a in rows.iter_rows() {
        for b in cols.iter_rows() {
            out.push(a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum());
        }
    }
    out
}

/// Held-out likelihood of a clustering, evaluated on equal-size test samples
/// of the reference group and one other group.
#[derive(Debug, Clone, PartialEq)]
pub struct TestNll {
    pub nll: f64,
    /// Cluster labels given to the reference-group test points.
    pub reference_labels: Vec<usize>,
    /// Cluster labels given to the other group's test points.
    pub group_labels: Vec<usize>,
    /// Training reference instance matched to each reference test point.
    pub train_match: Vec<usize>,
    /// Reference test point matched to each of the other group's test points.
    pub test_match: Vec<usize>,
}

/// Negative log-likelihood of test data conditional on fair test labels.
///
/// Test points of the other group are matched one-to-one to reference test
/// points, and reference test points injectively to training reference
/// points, both by minimum total squared Euclidean distance. Labels flow
/// along the matches and each test point is scored by the posterior
/// predictive of its cluster given the training members of that cluster.
pub fn test_nll<F: ConjugateFamily>(
    family: &F,
    train: &GroupedDataset,
    assignment: &Assignment,
    test_reference: &FeatureMatrix,
    test_group: &FeatureMatrix,
) -> Result<TestNll> {
    let n = test_reference.rows();
    if test_group.rows() != n {
        return Err(FbcError::invalid(format!(
            "test groups differ in size ({n} vs {})",
            test_group.rows()
        )));
    }
    if n > train.group(0).rows() {
        return Err(FbcError::invalid("more reference test points than training points"));
    }
    family.check_data(test_reference)?;
    family.check_data(test_group)?;
    let stats = cluster_stats(family, train, assignment)?;

    let to_test = assign(n, n, &squared_distances(test_group, test_reference))?;
    let to_train = assign(n, train.group(0).rows(), &squared_distances(test_reference, train.group(0)))?;
    let train_labels = assignment.group(0);
    let reference_labels: Vec<usize> = to_train.row_to_col.iter().map(|&i| train_labels[i]).collect();
    let group_labels: Vec<usize> = to_test.row_to_col.iter().map(|&i| reference_labels[i]).collect();

    let mut nll = 0.0;
    for (x, &z) in test_reference.iter_rows().zip(&reference_labels) {
        nll -= family.log_predictive(&stats[z], x);
    }
    for (x, &z) in test_group.iter_rows().zip(&group_labels) {
        nll -= family.log_predictive(&stats[z], x);
    }
    Ok(TestNll {
        nll,
        reference_labels,
        group_labels,
        train_match: to_train.row_to_col,
        test_match: to_test.row_to_col,
    })
}

/// One row of a per-sample summary.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleMetrics {
    pub iteration: usize,
    pub k: usize,
    pub cost: f64,
    pub delta: f64,
    pub bal: f64,
    pub nll: f64,
}

/// Aggregate view of the post-burn-in samples of one or more chains.
#[derive(Debug, Clone, PartialEq)]
pub struct ChainSummary {
    pub k_histogram: BTreeMap<usize, usize>,
    pub samples: Vec<SampleMetrics>,
    pub autocorrelation: Vec<f64>,
    pub nll_trace: Vec<f64>,
}

impl ChainSummary {
    /// `h_max` is clipped so the autocorrelation stays defined.
    pub fn new(samples: Vec<SampleMetrics>, nll_trace: Vec<f64>, h_max: usize) -> Self {
        let mut k_histogram = BTreeMap::new();
        for s in &samples {
            *k_histogram.entry(s.k).or_insert(0) += 1;
        }
        let ks: Vec<f64> = samples.iter().map(|s| s.k as f64).collect();
        let autocorrelation = if ks.is_empty() {
            Vec::new()
        } else if ks.len() == 1 {
            vec![1.0]
        } else {
            autocorrelation(&ks, h_max.min(ks.len() - 2)).expect("lag clipped to series length")
        };
        Self {
            k_histogram,
            samples,
            autocorrelation,
            nll_trace,
        }
    }

    /// Most frequent `K`; ties go to the smaller value.
    pub fn mode_k(&self) -> Option<usize> {
        mode_k(self.samples.iter().map(|s| s.k))
    }

    /// Mean of `(cost, delta, bal)` over samples whose `K` equals `k`.
    pub fn mean_at_k(&self, k: usize) -> Option<(f64, f64, f64)> {
        let rows: Vec<&SampleMetrics> = self.samples.iter().filter(|s| s.k == k).collect();
        if rows.is_empty() {
            return None;
        }
        let n = rows.len() as f64;
        Some((
            rows.iter().map(|s| s.cost).sum::<f64>() / n,
            rows.iter().map(|s| s.delta).sum::<f64>() / n,
            rows.iter().map(|s| s.bal).sum::<f64>() / n,
        ))
    }
}

/// Most frequent value; ties go to the smaller value.
pub fn mode_k(ks: impl IntoIterator<Item = usize>) -> Option<usize> {
    let mut h: BTreeMap<usize, usize> = BTreeMap::new();
    for k in ks {
        *h.entry(k).or_insert(0) += 1;
    }
    let mut best: Option<(usize, usize)> = None;
    for (k, c) in h {
        if best.is_none_or(|(_, bc)| c > bc) {
            best = Some((k, c));
        }
    }
    best.map(|(k, _)| k)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::FeatureKind;

    #[test]
    fn potential_scale_reduction_by_hand() {
        // means 2 and 4: between = 3 * 2 = 6, within = 1,
        // pooled = 2/3 + 6/3, so the ratio is 8/3
        let r = potential_scale_reduction(&[vec![1.0, 2.0, 3.0], vec![3.0, 4.0, 5.0]]).unwrap();
        assert!((r - (8.0f64 / 3.0).sqrt()).abs() < 1e-12);
        let same = potential_scale_reduction(&[vec![1.0, 3.0, 1.0, 3.0], vec![3.0, 1.0, 3.0, 1.0, 9.0]]).unwrap();
        assert!((same - (0.75f64).sqrt()).abs() < 1e-12);
        assert_eq!(potential_scale_reduction(&[vec![2.0; 5], vec![2.0; 5]]).unwrap(), 1.0);
        assert!(potential_scale_reduction(&[vec![2.0; 5], vec![3.0; 5]]).unwrap().is_infinite());
        assert!(potential_scale_reduction(&[vec![1.0, 2.0]]).is_err());
    }

    fn one_d(groups: &[&[f64]]) -> GroupedDataset {
        let gs = groups
            .iter()
            .map(|g| FeatureMatrix::new(g.len(), 1, g.to_vec()).unwrap())
            .collect();
        GroupedDataset::new(gs, FeatureKind::Continuous).unwrap()
    }

    #[test]
    fn cost_examples() {
        let d = one_d(&[&[0.0], &[2.0]]);
        let a = Assignment::new(vec![vec![0], vec![0]]).unwrap();
        assert_eq!(cost(&d, &a).unwrap(), 1.0);
        let same = one_d(&[&[3.0], &[3.0, 3.0]]);
        let a = Assignment::new(vec![vec![1], vec![0, 1]]).unwrap();
        assert_eq!(cost(&same, &a).unwrap(), 0.0);
    }

    #[test]
    fn categorical_cost_examples() {
        let g = |v: &[f64]| FeatureMatrix::new(v.len(), 1, v.to_vec()).unwrap();
        let d = GroupedDataset::new(vec![g(&[1.0]), g(&[0.0])], FeatureKind::Binary).unwrap();
        let a = Assignment::new(vec![vec![0], vec![0]]).unwrap();
        let c = categorical_cost(&d, &a, 1.0).unwrap();
        assert!((c - 2.0 * 2f64.ln()).abs() < 1e-12);
        let same = GroupedDataset::new(vec![g(&[1.0]), g(&[1.0, 1.0])], FeatureKind::Binary).unwrap();
        let a = Assignment::new(vec![vec![0], vec![0, 0]]).unwrap();
        assert_eq!(categorical_cost(&same, &a, 0.0).unwrap(), 0.0);
        assert!(categorical_cost(&same, &a, 1e-9).unwrap() < 1e-8);
    }

    #[test]
    fn autocorrelation_examples() {
        let alt: Vec<f64> = (0..100).map(|i| (i % 2 + 1) as f64).collect();
        let r = autocorrelation(&alt, 2).unwrap();
        assert_eq!(r[0], 1.0);
        assert!((r[1] + 1.0).abs() < 1e-12);
        assert!((r[2] - 1.0).abs() < 1e-12);
        assert_eq!(autocorrelation(&[3.0; 10], 3).unwrap(), vec![1.0, 0.0, 0.0, 0.0]);
        assert!(autocorrelation(&[1.0, 2.0], 1).is_err());
    }

    #[test]
    fn mode_prefers_smaller_on_ties() {
        assert_eq!(mode_k([3, 2, 3, 2, 5]), Some(2));
        assert_eq!(mode_k([]), None);
    }
}
