use std::borrow::Cow;

use rand::seq::index::sample;
use rand::seq::SliceRandom;
use rand::Rng;

use crate::error::{FbcError, Result};
use crate::model::{
    assignments_from, Assignment, Cluster, FeatureMatrix, GroupMatching, GroupedDataset, MatchingState,
    Partition,
};
use crate::priors::{ConjugateFamily, Distance, DistanceCache, PriorConfig, VCoefficients};

use super::config::{GibbsPath, SamplerConfig};
use super::residual::select_residual;

/// Everything a chain mutates.
#[derive(Debug, Clone)]
pub struct ChainState<F: ConjugateFamily> {
    pub(crate) partition: Partition<F::Stats>,
    pub(crate) matching: MatchingState,
    /// Statistics of each reference instance together with every instance
    /// currently routed to it.
    pub(crate) blocks: Vec<F::Stats>,
    /// Per-slot component parameters (auxiliary path only).
    pub(crate) phi: Vec<Option<F::Param>>,
}

impl<F: ConjugateFamily> ChainState<F> {
    pub fn partition(&self) -> &Partition<F::Stats> {
        &self.partition
    }

    pub fn matching(&self) -> &MatchingState {
        &self.matching
    }

    pub fn n_clusters(&self) -> usize {
        self.partition.n_clusters()
    }

    /// Parameter of the cluster in `slot` on the auxiliary path.
    pub fn phi(&self, slot: usize) -> Option<&F::Param> {
        self.phi.get(slot).and_then(Option::as_ref)
    }

    pub fn block(&self, i: usize) -> &F::Stats {
        &self.blocks[i]
    }
}

/// Largest discrepancies between cached and rebuilt quantities.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Coherence {
    pub stats: f64,
    pub values: f64,
    pub log_likelihood: f64,
    pub partition_ok: bool,
    pub matching_ok: bool,
}

impl Coherence {
    pub fn max_error(&self) -> f64 {
        self.stats.max(self.values).max(self.log_likelihood)
    }

    pub fn holds(&self, tol: f64) -> bool {
        self.partition_ok && self.matching_ok && self.max_error() <= tol
    }
}

/// Read-only context of one chain: data, family, priors and settings.
pub struct Sampler<'a, F: ConjugateFamily> {
    pub(crate) data: &'a GroupedDataset,
    pub(crate) reference: Cow<'a, FeatureMatrix>,
    pub(crate) family: F,
    pub(crate) prior: PriorConfig,
    pub(crate) config: SamplerConfig,
    pub(crate) masks: Vec<usize>,
    pub(crate) v: VCoefficients,
    pub(crate) caches: Vec<DistanceCache<'a>>,
}

impl<'a, F: ConjugateFamily> Sampler<'a, F> {
    pub fn new(data: &'a GroupedDataset, family: F, prior: PriorConfig, config: SamplerConfig) -> Result<Self> {
        prior.validate()?;
        config.validate()?;
        for g in data.groups() {
            family.check_data(g)?;
        }
        let sizes = data.sizes();
        let masks = if config.fairness {
            config.resolved_mask_sizes(&sizes)?
        } else {
            Vec::new()
        };
        let reference = if config.fairness {
            Cow::Borrowed(data.group(0))
        } else {
            Cow::Owned(data.pooled())
        };
        let v = VCoefficients::compute(reference.rows(), reference.rows(), prior.gamma, prior.kappa)?;
        let metric = Distance::for_kind(data.kind());
        let caches = if config.fairness {
            (1..data.n_groups())
                .map(|b| DistanceCache::new(data.group(0), data.group(b), metric))
                .collect()
        } else {
            Vec::new()
        };
        Ok(Self {
            data,
            reference,
            family,
            prior,
            config,
            masks,
            v,
            caches,
        })
    }

    pub fn data(&self) -> &GroupedDataset {
        self.data
    }

    pub fn family(&self) -> &F {
        &self.family
    }

    pub fn prior(&self) -> &PriorConfig {
        &self.prior
    }

    pub fn config(&self) -> &SamplerConfig {
        &self.config
    }

    pub fn coefficients(&self) -> &VCoefficients {
        &self.v
    }

    /// Instances whose partition is sampled: group 0, or all data pooled
    /// when fairness is off.
    pub fn reference(&self) -> &FeatureMatrix {
        &self.reference
    }

    pub fn mask_sizes(&self) -> &[usize] {
        &self.masks
    }

    pub(crate) fn auxiliary(&self) -> bool {
        self.config.path == GibbsPath::Auxiliary
    }

    /// Cached score of a cluster: log marginal likelihood on the collapsed
    /// path, log likelihood under its parameter on the auxiliary path.
    pub(crate) fn cluster_value(&self, stats: &F::Stats, phi: Option<&F::Param>) -> f64 {
        match phi {
            Some(p) if self.auxiliary() => self.family.log_likelihood(stats, p),
            _ => self.family.log_marginal(stats),
        }
    }

    /// Random valid matching: each `T` is a shuffle of the multiset holding
    /// every reference index `β` times plus the residual indices once more,
    /// `T0` is i.i.d. uniform and `E` a uniform subset of the configured size.
    pub fn random_matching<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<MatchingState> {
        if !self.config.fairness {
            return Ok(MatchingState::new(Vec::new()));
        }
        let n0 = self.data.group(0).rows();
        let mut groups = Vec::with_capacity(self.data.n_groups() - 1);
        for b in 1..self.data.n_groups() {
            let nb = self.data.group(b).rows();
            let (beta, r) = (nb / n0, nb % n0);
            let residual = select_residual(self.data.group(0), r, self.config.residual, rng)?;
            let mut t: Vec<usize> = (0..n0).flat_map(|i| std::iter::repeat_n(i, beta)).collect();
            t.extend_from_slice(&residual);
            t.shuffle(rng);
            let t0: Vec<usize> = (0..nb).map(|_| rng.random_range(0..n0)).collect();
            let mask = sample(rng, nb, self.masks[b - 1]).into_vec();
            groups.push(GroupMatching::new(n0, t, t0, &mask, residual));
        }
        Ok(MatchingState::new(groups))
    }

    /// Initial state: one cluster holding everything and a random matching.
    pub fn init_state<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<ChainState<F>> {
        let matching = self.random_matching(rng)?;
        self.state_from(&vec![0; self.reference.rows()], matching, rng)
    }

    /// State with the given reference labels and matching; statistics are
    /// built from scratch.
    pub fn state_from<R: Rng + ?Sized>(
        &self,
        labels: &[usize],
        matching: MatchingState,
        rng: &mut R,
    ) -> Result<ChainState<F>> {
        if labels.len() != self.reference.rows() {
            return Err(FbcError::dim(format!(
                "{} labels for {} reference instances",
                labels.len(),
                self.reference.rows()
            )));
        }
        if self.config.fairness {
            matching
                .validate(&self.data.sizes())
                .map_err(|v| FbcError::invalid(v.to_string()))?;
            for (g, &m) in matching.groups().iter().zip(&self.masks) {
                if g.mask().len() != m {
                    return Err(FbcError::invalid(format!(
                        "mask has {} members, configured size is {m}",
                        g.mask().len()
                    )));
                }
            }
        } else if !matching.groups().is_empty() {
            return Err(FbcError::invalid("matching given with fairness off"));
        }
        let blocks = self.build_blocks(&matching);
        let mut partition = Partition::from_labels(
            labels,
            |members| {
                let mut s = self.family.empty_stats();
                for &i in members {
                    self.family.merge(&mut s, &blocks[i]);
                }
                s
            },
            |s| self.family.log_marginal(s),
        );
        let mut phi = vec![None; partition.slot_capacity()];
        if self.auxiliary() {
            let slots: Vec<usize> = partition.active_slots().collect();
            for s in slots {
                let c = partition.cluster_mut(s);
                let p = self.family.sample_posterior(&c.stats, rng);
                c.value = self.family.log_likelihood(&c.stats, &p);
                phi[s] = Some(p);
            }
        }
        Ok(ChainState {
            partition,
            matching,
            blocks,
            phi,
        })
    }

    pub(crate) fn build_blocks(&self, matching: &MatchingState) -> Vec<F::Stats> {
        let mut blocks: Vec<F::Stats> = self
            .reference
            .iter_rows()
            .map(|x| {
                let mut s = self.family.empty_stats();
                self.family.add_point(&mut s, x);
                s
            })
            .collect();
        for (k, g) in matching.groups().iter().enumerate() {
            let xs = self.data.group(k + 1);
            for j in 0..g.nb() {
                self.family.add_point(&mut blocks[g.route(j)], xs.row(j));
            }
        }
        blocks
    }

    /// Log-likelihood of all data given the partition: the sum of cached
    /// cluster values.
    pub fn log_likelihood(&self, state: &ChainState<F>) -> f64 {
        state.partition.total_value()
    }

    /// `-Σ_c log m(X^c)`: the collapsed negative log-likelihood of all data.
    pub fn training_nll(&self, state: &ChainState<F>) -> f64 {
        -state
            .partition
            .clusters_iter()
            .map(|(_, c)| self.family.log_marginal(&c.stats))
            .sum::<f64>()
    }

    /// Log energy of the current matching summed over groups.
    pub fn log_energy(&self, state: &ChainState<F>) -> f64 {
        state
            .matching
            .groups()
            .iter()
            .zip(&self.caches)
            .map(|(g, c)| crate::priors::log_energy(g.t_map(), c, self.prior.tau))
            .sum()
    }

    /// Cluster labels of every instance in its original group.
    pub fn assignment(&self, state: &ChainState<F>) -> Assignment {
        if self.config.fairness {
            return assignments_from(&state.partition, &state.matching);
        }
        let labels = state.partition.slot_labels();
        let raw: Vec<Vec<usize>> = self
            .data
            .offsets()
            .iter()
            .zip(self.data.sizes())
            .map(|(&o, n)| labels[o..o + n].to_vec())
            .collect();
        Assignment::canonical(&raw)
    }

    /// Compares every cached quantity with a rebuild from the raw data.
    pub fn check_coherence(&self, state: &ChainState<F>) -> Coherence {
        let fresh_blocks = self.build_blocks(&state.matching);
        let mut out = Coherence {
            partition_ok: state.partition.is_consistent(),
            matching_ok: !self.config.fairness || state.matching.validate(&self.data.sizes()).is_ok(),
            ..Default::default()
        };
        for (a, b) in state.blocks.iter().zip(&fresh_blocks) {
            out.stats = out.stats.max(self.family.stats_distance(a, b));
        }
        let mut fresh: Vec<Option<F::Stats>> = vec![None; state.partition.slot_capacity()];
        for (i, blk) in fresh_blocks.iter().enumerate() {
            let s = state.partition.slot_of(i);
            let e = fresh[s].get_or_insert_with(|| self.family.empty_stats());
            self.family.merge(e, blk);
        }
        let mut total = 0.0;
        for (s, c) in state.partition.clusters_iter() {
            let Some(f) = &fresh[s] else {
                out.partition_ok = false;
                continue;
            };
            out.stats = out.stats.max(self.family.stats_distance(&c.stats, f));
            let value = self.cluster_value(f, state.phi(s));
            out.values = out.values.max((value - c.value).abs());
            total += value;
        }
        out.log_likelihood = (total - self.log_likelihood(state)).abs();
        out
    }

    /// New cluster record for `stats`.
    pub(crate) fn make_cluster(&self, size: usize, stats: F::Stats, phi: Option<&F::Param>) -> Cluster<F::Stats> {
        let value = self.cluster_value(&stats, phi);
        Cluster { size, stats, value }
    }
}
