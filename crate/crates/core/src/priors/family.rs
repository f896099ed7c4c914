//! Likelihood families with conjugate priors and closed-form cluster
//! marginal likelihoods computed from sufficient statistics.

use std::fmt::Debug;

use rand::Rng;
use rand_distr::{Beta, Distribution, Gamma, Normal};
use statrs::function::gamma::ln_gamma;

use crate::error::{FbcError, Result};
use crate::math::CompensatedSum;
use crate::model::FeatureMatrix;

const LN_2PI: f64 = 1.837_877_066_409_345_5;

/// A likelihood `f(·|θ)` with prior `H`, seen through per-cluster sufficient
/// statistics.
///
/// `log_marginal(∅)` is 0 and statistics are order independent, so the
/// marginal of a cluster is exchangeable in its members.
pub trait ConjugateFamily: Clone + Debug + Send + Sync {
    type Stats: Clone + Debug + PartialEq + Send + Sync;
    type Param: Clone + Debug + PartialEq + Send + Sync;

    fn dim(&self) -> usize;

    fn empty_stats(&self) -> Self::Stats;

    /// Number of points summarized by `s`.
    fn count(&self, s: &Self::Stats) -> usize;

    fn add_point(&self, s: &mut Self::Stats, x: &[f64]);

    fn remove_point(&self, s: &mut Self::Stats, x: &[f64]);

    /// Adds every point summarized by `other` into `s`.
    fn merge(&self, s: &mut Self::Stats, other: &Self::Stats);

    /// Removes every point summarized by `other` from `s`.
    fn unmerge(&self, s: &mut Self::Stats, other: &Self::Stats);

    /// `log m(X)` with the component parameter integrated against `H`.
    fn log_marginal(&self, s: &Self::Stats) -> f64;

    /// `log m(X ∪ Y)` without materializing the merged statistics.
    fn log_marginal_merged(&self, s: &Self::Stats, other: &Self::Stats) -> f64 {
        let mut m = s.clone();
        self.merge(&mut m, other);
        self.log_marginal(&m)
    }

    /// Log posterior-predictive density of `x` given the points in `s`.
    fn log_predictive(&self, s: &Self::Stats, x: &[f64]) -> f64 {
        let mut p = self.empty_stats();
        self.add_point(&mut p, x);
        self.log_marginal_merged(s, &p) - self.log_marginal(s)
    }

    fn stats_of<'a>(&self, points: impl IntoIterator<Item = &'a [f64]>) -> Self::Stats {
        let mut s = self.empty_stats();
        for x in points {
            self.add_point(&mut s, x);
        }
        s
    }

    /// Rejects data the likelihood is not defined for.
    fn check_data(&self, data: &FeatureMatrix) -> Result<()>;

    fn sample_prior<R: Rng + ?Sized>(&self, rng: &mut R) -> Self::Param;

    fn sample_posterior<R: Rng + ?Sized>(&self, s: &Self::Stats, rng: &mut R) -> Self::Param;

    /// `log f(x | θ)`.
    fn log_density(&self, x: &[f64], theta: &Self::Param) -> f64;

    /// `Σ_{x ∈ s} log f(x | θ)` from sufficient statistics.
    fn log_likelihood(&self, s: &Self::Stats, theta: &Self::Param) -> f64;

    /// Differences between two statistics records, in units of each
    /// accumulated component (for coherence checks).
    fn stats_distance(&self, a: &Self::Stats, b: &Self::Stats) -> f64;
}

/// Independent per-dimension Normal likelihood with the Normal-Gamma prior
/// `λ_j ~ Gamma(a, rate b)`, `μ_j | λ_j ~ N(0, 1/λ_j)`.
#[derive(Debug, Clone, PartialEq)]
pub struct NormalGamma {
    dim: usize,
    a: f64,
    b: f64,
    // d * (lnΓ(a) − a ln b), hoisted out of log_marginal
    prior_const: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct NormalGammaStats {
    n: usize,
    sum: Vec<CompensatedSum>,
    sumsq: Vec<CompensatedSum>,
}

impl NormalGammaStats {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn sum(&self, j: usize) -> f64 {
        self.sum[j].value()
    }

    pub fn sum_sq(&self, j: usize) -> f64 {
        self.sumsq[j].value()
    }
}

/// Per-dimension means and precisions.
#[derive(Debug, Clone, PartialEq)]
pub struct NormalParams {
    pub mean: Vec<f64>,
    pub precision: Vec<f64>,
}

impl NormalGamma {
    pub fn new(dim: usize, a: f64, b: f64) -> Result<Self> {
        if !(a > 0.0 && b > 0.0) {
            return Err(FbcError::invalid("Normal-Gamma needs a > 0 and b > 0"));
        }
        Ok(Self {
            dim,
            a,
            b,
            prior_const: dim as f64 * (ln_gamma(a) - a * b.ln()),
        })
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn b(&self) -> f64 {
        self.b
    }

    #[inline]
    fn log_marginal_raw(&self, n: usize, sum: impl Fn(usize) -> f64, sumsq: impl Fn(usize) -> f64) -> f64 {
        if n == 0 {
            return 0.0;
        }
        let nf = n as f64;
        let an = self.a + 0.5 * nf;
        let mut log_bn = 0.0;
        for j in 0..self.dim {
            let s = sum(j);
            // b + (Σx² − (Σx)²/(n+1)) / 2, the posterior rate with prior mean 0
            // and one prior pseudo-observation
            let spread = (sumsq(j) - s * s / (nf + 1.0)).max(0.0);
            log_bn += (self.b + 0.5 * spread).ln();
        }
        self.dim as f64 * (ln_gamma(an) - 0.5 * (nf + 1.0).ln() - 0.5 * nf * LN_2PI)
            - self.prior_const
            - an * log_bn
    }
}

impl ConjugateFamily for NormalGamma {
    type Stats = NormalGammaStats;
    type Param = NormalParams;

    fn dim(&self) -> usize {
        self.dim
    }

    fn empty_stats(&self) -> NormalGammaStats {
        NormalGammaStats {
            n: 0,
            sum: vec![CompensatedSum::default(); self.dim],
            sumsq: vec![CompensatedSum::default(); self.dim],
        }
    }

    fn count(&self, s: &NormalGammaStats) -> usize {
        s.n
    }

    fn add_point(&self, s: &mut NormalGammaStats, x: &[f64]) {
        s.n += 1;
        for (j, &v) in x.iter().enumerate() {
            s.sum[j].add(v);
            s.sumsq[j].add(v * v);
        }
    }

    fn remove_point(&self, s: &mut NormalGammaStats, x: &[f64]) {
        debug_assert!(s.n > 0);
        s.n -= 1;
        for (j, &v) in x.iter().enumerate() {
            s.sum[j].add(-v);
            s.sumsq[j].add(-(v * v));
        }
    }

    fn merge(&self, s: &mut NormalGammaStats, o: &NormalGammaStats) {
        s.n += o.n;
        for j in 0..self.dim {
            s.sum[j].add(o.sum[j].value());
            s.sumsq[j].add(o.sumsq[j].value());
        }
    }

    fn unmerge(&self, s: &mut NormalGammaStats, o: &NormalGammaStats) {
        debug_assert!(s.n >= o.n);
        s.n -= o.n;
        for j in 0..self.dim {
            s.sum[j].add(-o.sum[j].value());
            s.sumsq[j].add(-o.sumsq[j].value());
        }
    }

    fn log_marginal(&self, s: &NormalGammaStats) -> f64 {
        self.log_marginal_raw(s.n, |j| s.sum[j].value(), |j| s.sumsq[j].value())
    }

    fn log_marginal_merged(&self, s: &NormalGammaStats, o: &NormalGammaStats) -> f64 {
        self.log_marginal_raw(
            s.n + o.n,
            |j| s.sum[j].value() + o.sum[j].value(),
            |j| s.sumsq[j].value() + o.sumsq[j].value(),
        )
    }

    fn check_data(&self, data: &FeatureMatrix) -> Result<()> {
        if data.cols() != self.dim {
            return Err(FbcError::dim(format!(
                "data has {} features, family expects {}",
                data.cols(),
                self.dim
            )));
        }
        if data.as_slice().iter().any(|v| !v.is_finite()) {
            return Err(FbcError::InvalidData("non-finite feature value".into()));
        }
        Ok(())
    }

    fn sample_prior<R: Rng + ?Sized>(&self, rng: &mut R) -> NormalParams {
        self.sample_posterior(&self.empty_stats(), rng)
    }

    fn sample_posterior<R: Rng + ?Sized>(&self, s: &NormalGammaStats, rng: &mut R) -> NormalParams {
        let nf = s.n as f64;
        let an = self.a + 0.5 * nf;
        let mut mean = Vec::with_capacity(self.dim);
        let mut precision = Vec::with_capacity(self.dim);
        for j in 0..self.dim {
            let sum = s.sum[j].value();
            let spread = (s.sumsq[j].value() - sum * sum / (nf + 1.0)).max(0.0);
            let bn = self.b + 0.5 * spread;
            let lambda = Gamma::new(an, 1.0 / bn)
                .expect("positive shape and scale")
                .sample(rng)
                .max(f64::MIN_POSITIVE);
            let mu = Normal::new(sum / (nf + 1.0), (1.0 / (lambda * (nf + 1.0))).sqrt())
                .expect("finite sd")
                .sample(rng);
            mean.push(mu);
            precision.push(lambda);
        }
        NormalParams { mean, precision }
    }

    fn log_density(&self, x: &[f64], th: &NormalParams) -> f64 {
        x.iter()
            .zip(th.mean.iter().zip(&th.precision))
            .map(|(&v, (&mu, &lam))| 0.5 * (lam.ln() - LN_2PI) - 0.5 * lam * (v - mu) * (v - mu))
            .sum()
    }

    fn log_likelihood(&self, s: &NormalGammaStats, th: &NormalParams) -> f64 {
        if s.n == 0 {
            return 0.0;
        }
        let nf = s.n as f64;
        (0..self.dim)
            .map(|j| {
                let (mu, lam) = (th.mean[j], th.precision[j]);
                let sq = s.sumsq[j].value() - 2.0 * mu * s.sum[j].value() + nf * mu * mu;
                0.5 * nf * (lam.ln() - LN_2PI) - 0.5 * lam * sq
            })
            .sum()
    }

    fn stats_distance(&self, a: &NormalGammaStats, b: &NormalGammaStats) -> f64 {
        let mut d = (a.n as f64 - b.n as f64).abs();
        for j in 0..self.dim {
            d = d.max((a.sum[j].value() - b.sum[j].value()).abs());
            d = d.max((a.sumsq[j].value() - b.sumsq[j].value()).abs());
        }
        d
    }
}

/// Independent Bernoulli features with symmetric `Beta(α, α)` priors.
#[derive(Debug, Clone, PartialEq)]
pub struct BetaBernoulli {
    dim: usize,
    alpha: f64,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BetaBernoulliStats {
    n: usize,
    ones: Vec<usize>,
}

impl BetaBernoulliStats {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn ones(&self, j: usize) -> usize {
        self.ones[j]
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BernoulliParams {
    pub p: Vec<f64>,
}

impl BetaBernoulli {
    pub fn new(dim: usize, alpha: f64) -> Result<Self> {
        if !(alpha > 0.0) {
            return Err(FbcError::invalid("Beta-Bernoulli needs alpha > 0"));
        }
        Ok(Self { dim, alpha })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    /// Statistics of binary points; fails on any value other than 0 or 1.
    pub fn checked_stats<'a>(&self, points: impl IntoIterator<Item = &'a [f64]>) -> Result<BetaBernoulliStats> {
        let mut s = self.empty_stats();
        for x in points {
            if x.iter().any(|&v| v != 0.0 && v != 1.0) {
                return Err(FbcError::InvalidData("non-binary value for Beta-Bernoulli".into()));
            }
            self.add_point(&mut s, x);
        }
        Ok(s)
    }

    fn log_marginal_counts(&self, n: usize, ones: impl Fn(usize) -> usize) -> f64 {
        if n == 0 {
            return 0.0;
        }
        let a = self.alpha;
        let nf = n as f64;
        let per_dim = ln_gamma(2.0 * a) - 2.0 * ln_gamma(a) - ln_gamma(2.0 * a + nf);
        let mut total = self.dim as f64 * per_dim;
        for j in 0..self.dim {
            let k = ones(j) as f64;
            total += ln_gamma(a + k) + ln_gamma(a + nf - k);
        }
        total
    }
}

impl ConjugateFamily for BetaBernoulli {
    type Stats = BetaBernoulliStats;
    type Param = BernoulliParams;

    fn dim(&self) -> usize {
        self.dim
    }

    fn empty_stats(&self) -> BetaBernoulliStats {
        BetaBernoulliStats {
            n: 0,
            ones: vec![0; self.dim],
        }
    }

    fn count(&self, s: &BetaBernoulliStats) -> usize {
        s.n
    }

    fn add_point(&self, s: &mut BetaBernoulliStats, x: &[f64]) {
        debug_assert!(x.iter().all(|&v| v == 0.0 || v == 1.0));
        s.n += 1;
        for (j, &v) in x.iter().enumerate() {
            if v == 1.0 {
                s.ones[j] += 1;
            }
        }
    }

    fn remove_point(&self, s: &mut BetaBernoulliStats, x: &[f64]) {
        s.n -= 1;
        for (j, &v) in x.iter().enumerate() {
            if v == 1.0 {
                s.ones[j] -= 1;
            }
        }
    }

    fn merge(&self, s: &mut BetaBernoulliStats, o: &BetaBernoulliStats) {
        s.n += o.n;
        for (a, b) in s.ones.iter_mut().zip(&o.ones) {
            *a += b;
        }
    }

    fn unmerge(&self, s: &mut BetaBernoulliStats, o: &BetaBernoulliStats) {
        s.n -= o.n;
        for (a, b) in s.ones.iter_mut().zip(&o.ones) {
            *a -= b;
        }
    }

    fn log_marginal(&self, s: &BetaBernoulliStats) -> f64 {
        self.log_marginal_counts(s.n, |j| s.ones[j])
    }

    fn log_marginal_merged(&self, s: &BetaBernoulliStats, o: &BetaBernoulliStats) -> f64 {
        self.log_marginal_counts(s.n + o.n, |j| s.ones[j] + o.ones[j])
    }

    fn check_data(&self, data: &FeatureMatrix) -> Result<()> {
        if data.cols() != self.dim {
            return Err(FbcError::dim(format!(
                "data has {} features, family expects {}",
                data.cols(),
                self.dim
            )));
        }
        if !data.is_binary() {
            return Err(FbcError::InvalidData("non-binary value for Beta-Bernoulli".into()));
        }
        Ok(())
    }

    fn sample_prior<R: Rng + ?Sized>(&self, rng: &mut R) -> BernoulliParams {
        self.sample_posterior(&self.empty_stats(), rng)
    }

    fn sample_posterior<R: Rng + ?Sized>(&self, s: &BetaBernoulliStats, rng: &mut R) -> BernoulliParams {
        let p = s
            .ones
            .iter()
            .map(|&k| {
                let a = self.alpha + k as f64;
                let b = self.alpha + (s.n - k) as f64;
                Beta::new(a, b).expect("positive shapes").sample(rng)
            })
            .collect();
        BernoulliParams { p }
    }

    fn log_density(&self, x: &[f64], th: &BernoulliParams) -> f64 {
        x.iter()
            .zip(&th.p)
            .map(|(&v, &p)| if v == 1.0 { p.ln() } else { (1.0 - p).ln() })
            .sum()
    }

    fn log_likelihood(&self, s: &BetaBernoulliStats, th: &BernoulliParams) -> f64 {
        s.ones
            .iter()
            .zip(&th.p)
            .map(|(&k, &p)| {
                let zeros = s.n - k;
                let a = if k == 0 { 0.0 } else { k as f64 * p.ln() };
                let b = if zeros == 0 { 0.0 } else { zeros as f64 * (1.0 - p).ln() };
                a + b
            })
            .sum()
    }

    fn stats_distance(&self, a: &BetaBernoulliStats, b: &BetaBernoulliStats) -> f64 {
        let mut d = (a.n as f64 - b.n as f64).abs();
        for (x, y) in a.ones.iter().zip(&b.ones) {
            d = d.max((*x as f64 - *y as f64).abs());
        }
        d
    }
}

/// Closed-form `log m` of 1-D points under the Normal-Gamma prior; used by
/// tests and examples.
pub fn log_marginal_normal_gamma(points: &[f64], a: f64, b: f64) -> Result<f64> {
    let fam = NormalGamma::new(1, a, b)?;
    let s = fam.stats_of(points.iter().map(std::slice::from_ref));
    Ok(fam.log_marginal(&s))
}

/// Closed-form `log m` of binary vectors under the Beta-Bernoulli prior.
pub fn log_marginal_beta_bernoulli(points: &FeatureMatrix, alpha: f64) -> Result<f64> {
    let fam = BetaBernoulli::new(points.cols(), alpha)?;
    let s = fam.checked_stats(points.iter_rows())?;
    Ok(fam.log_marginal(&s))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;

    #[test]
    fn normal_gamma_single_zero_point() {
        let lm = log_marginal_normal_gamma(&[0.0], 1.0, 1.0).unwrap();
        assert!((lm.exp() - 0.25).abs() < 1e-12, "{}", lm.exp());
        assert_eq!(log_marginal_normal_gamma(&[], 1.0, 1.0).unwrap(), 0.0);
    }

    #[test]
    fn tight_pairs_beat_spread_pairs() {
        let tight = log_marginal_normal_gamma(&[0.3, 0.3], 1.0, 1.0).unwrap();
        let spread = log_marginal_normal_gamma(&[0.3, 10.3], 1.0, 1.0).unwrap();
        assert!(tight > spread);
    }

    #[test]
    fn beta_bernoulli_polya_urn() {
        let one = FeatureMatrix::from_rows(&[[1.0]]).unwrap();
        assert!((log_marginal_beta_bernoulli(&one, 1.0).unwrap().exp() - 0.5).abs() < 1e-14);
        let two = FeatureMatrix::from_rows(&[[1.0], [1.0]]).unwrap();
        assert!((log_marginal_beta_bernoulli(&two, 1.0).unwrap().exp() - 1.0 / 3.0).abs() < 1e-14);
        let bad = FeatureMatrix::from_rows(&[[0.5]]).unwrap();
        assert!(matches!(
            log_marginal_beta_bernoulli(&bad, 1.0),
            Err(FbcError::InvalidData(_))
        ));
        let fam = BetaBernoulli::new(1, 1.0).unwrap();
        assert_eq!(fam.log_marginal(&fam.empty_stats()), 0.0);
    }

    #[test]
    fn merged_matches_materialized() {
        let fam = NormalGamma::new(2, 1.5, 0.7).unwrap();
        let a = fam.stats_of([&[0.1, -1.0][..], &[2.0, 0.5][..]]);
        let b = fam.stats_of([&[-0.4, 0.9][..]]);
        let mut m = a.clone();
        fam.merge(&mut m, &b);
        assert!((fam.log_marginal(&m) - fam.log_marginal_merged(&a, &b)).abs() < 1e-12);
        fam.unmerge(&mut m, &b);
        assert!(fam.stats_distance(&m, &a) < 1e-14);
    }

    #[test]
    fn log_likelihood_from_stats_matches_densities() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(1);
        let fam = NormalGamma::new(2, 1.0, 1.0).unwrap();
        let pts = [[0.2, 1.0], [-0.3, 0.1], [1.4, -2.0]];
        let s = fam.stats_of(pts.iter().map(|p| &p[..]));
        let th = fam.sample_posterior(&s, &mut rng);
        let direct: f64 = pts.iter().map(|p| fam.log_density(p, &th)).sum();
        assert!((direct - fam.log_likelihood(&s, &th)).abs() < 1e-10);

        let bb = BetaBernoulli::new(3, 1.0).unwrap();
        let bits = [[1.0, 0.0, 1.0], [1.0, 1.0, 0.0]];
        let s = bb.stats_of(bits.iter().map(|p| &p[..]));
        let th = bb.sample_posterior(&s, &mut rng);
        let direct: f64 = bits.iter().map(|p| bb.log_density(p, &th)).sum();
        assert!((direct - bb.log_likelihood(&s, &th)).abs() < 1e-12);
    }
}
