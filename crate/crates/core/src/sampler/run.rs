use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::metrics::{categorical_cost, cost};
use crate::model::{assignments_from_labels, balance, delta_fairness, Assignment, FeatureKind, GroupMatchingRecord, MatchingState};
use crate::priors::ConjugateFamily;

use super::state::{ChainState, Sampler};

/// One retained posterior draw.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChainSample {
    pub iteration: usize,
    pub k: usize,
    /// Reference-group labels, numbered by first appearance (all pooled
    /// instances when fairness is off).
    pub labels: Vec<usize>,
    /// Hex digest of the matching maps.
    pub matching_digest: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub matching: Option<Vec<GroupMatchingRecord>>,
    pub delta: f64,
    pub bal: f64,
    pub cost: f64,
    pub nll: f64,
    /// Labels of every instance; not written to chain files.
    #[serde(skip)]
    pub assignment: Option<Assignment>,
}

impl ChainSample {
    /// Labels of every instance, rebuilt from the stored matching when the
    /// in-memory copy is absent.
    pub fn full_assignment(&self) -> Option<Assignment> {
        if let Some(a) = &self.assignment {
            return Some(a.clone());
        }
        let recs = self.matching.as_ref()?;
        let m = MatchingState::from_records(self.labels.len(), recs);
        Some(assignments_from_labels(&self.labels, &m))
    }
}

/// Output of one chain.
#[derive(Debug, Clone, PartialEq)]
pub struct Chain {
    pub samples: Vec<ChainSample>,
    /// `K` after every iteration.
    pub k_trace: Vec<usize>,
    /// Training negative log-likelihood after every iteration.
    pub nll_trace: Vec<f64>,
    pub mh_accepted: usize,
    pub mh_proposed: usize,
}

impl Chain {
    pub fn acceptance_rate(&self) -> f64 {
        if self.mh_proposed == 0 {
            0.0
        } else {
            self.mh_accepted as f64 / self.mh_proposed as f64
        }
    }
}

/// RNG of chain `chain` for base seed `seed`.
pub fn chain_rng(seed: u64, chain: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(chain);
    rng
}

impl<F: ConjugateFamily> Sampler<'_, F> {
    /// Derived quantities of the current state.
    pub fn sample(&self, state: &ChainState<F>, iteration: usize) -> Result<ChainSample> {
        let assignment = self.assignment(state);
        let sizes = self.data.sizes();
        let cost = match self.data.kind() {
            FeatureKind::Continuous => cost(self.data, &assignment)?,
            FeatureKind::Binary => categorical_cost(self.data, &assignment, self.prior.alpha)?,
        };
        Ok(ChainSample {
            iteration,
            k: state.n_clusters(),
            labels: state.partition.canonical_labels(),
            matching_digest: state.matching.digest(),
            matching: self.config.full_matching.then(|| state.matching.records()),
            delta: delta_fairness(&sizes, &assignment)?,
            bal: balance(&sizes, &assignment)?,
            cost,
            nll: self.training_nll(state),
            assignment: Some(assignment),
        })
    }

    /// One outer iteration: matching updates (fairness on) then a partition
    /// sweep. Returns the number of accepted matching moves.
    pub fn iterate<R: rand::Rng + ?Sized>(&self, state: &mut ChainState<F>, rng: &mut R) -> usize {
        let accepted = if self.config.fairness {
            self.mh_sweep(state, rng)
        } else {
            0
        };
        self.gibbs_sweep(state, rng);
        accepted
    }

    /// Runs chain `chain` from a fresh initial state and keeps every
    /// post-burn-in iteration.
    pub fn run_chain(&self, chain: u64) -> Result<Chain> {
        let mut rng = chain_rng(self.config.seed, chain);
        let mut state = self.init_state(&mut rng)?;
        self.run_from(&mut state, &mut rng)
    }

    pub fn run_from<R: rand::Rng + ?Sized>(&self, state: &mut ChainState<F>, rng: &mut R) -> Result<Chain> {
        let per_iter = if self.config.fairness {
            self.config.mh_repeats * (self.data.n_groups() - 1)
        } else {
            0
        };
        let mut out = Chain {
            samples: Vec::with_capacity(self.config.max_iter - self.config.burn_in),
            k_trace: Vec::with_capacity(self.config.max_iter),
            nll_trace: Vec::with_capacity(self.config.max_iter),
            mh_accepted: 0,
            mh_proposed: 0,
        };
        for it in 0..self.config.max_iter {
            out.mh_accepted += self.iterate(state, rng);
            out.mh_proposed += per_iter;
            if cfg!(debug_assertions) && it % 100 == 0 {
                let c = self.check_coherence(state);
                debug_assert!(c.holds(1e-8), "cached statistics drifted: {c:?}");
            }
            out.k_trace.push(state.n_clusters());
            out.nll_trace.push(self.training_nll(state));
            if it >= self.config.burn_in {
                out.samples.push(self.sample(state, it)?);
            }
        }
        log::debug!(
            "chain finished: acceptance {:.3}, final K {}",
            out.acceptance_rate(),
            state.n_clusters()
        );
        Ok(out)
    }
}

/// Builds a sampler and runs one chain with seed `config.seed`.
pub fn run_fbc<F: ConjugateFamily>(
    data: &crate::model::GroupedDataset,
    family: F,
    prior: crate::priors::PriorConfig,
    config: super::SamplerConfig,
) -> Result<Chain> {
    Sampler::new(data, family, prior, config)?.run_chain(0)
}
