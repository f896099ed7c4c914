//! Partition updates with the matching held fixed. Each reference instance
//! moves together with every instance routed to it.

use rand::seq::SliceRandom;
use rand::Rng;

use crate::math::sample_log_weights;
use crate::model::Cluster;
use crate::priors::ConjugateFamily;

use super::state::{ChainState, Sampler};

impl<F: ConjugateFamily> Sampler<'_, F> {
    /// One full sweep over the reference instances on the configured path.
    pub fn gibbs_sweep<R: Rng + ?Sized>(&self, state: &mut ChainState<F>, rng: &mut R) {
        if self.auxiliary() {
            self.gibbs_auxiliary(state, rng);
        } else {
            self.gibbs_collapsed(state, rng);
        }
    }

    fn scan_order<R: Rng + ?Sized>(&self, n: usize, rng: &mut R) -> Vec<usize> {
        let mut order: Vec<usize> = (0..n).collect();
        if self.config.randomized_scan {
            order.shuffle(rng);
        }
        order
    }

    /// Detaches block `i` from its cluster. Returns the number of clusters
    /// left and, when the cluster became empty, its parameter.
    fn detach(&self, state: &mut ChainState<F>, i: usize) -> (usize, Option<F::Param>) {
        let s = state.partition.slot_of(i);
        let c = state.partition.cluster_mut(s);
        c.size -= 1;
        let mut freed = None;
        if c.size == 0 {
            state.partition.close(s);
            freed = state.phi.get_mut(s).and_then(Option::take);
        } else {
            self.family.unmerge(&mut c.stats, &state.blocks[i]);
            let phi = state.phi.get(s).and_then(Option::as_ref);
            c.value = self.cluster_value(&c.stats, phi);
        }
        (state.partition.n_clusters(), freed)
    }

    fn log_new_cluster_prior(&self, t: usize) -> f64 {
        // with no other cluster the new one is the only option
        let ratio = if t == 0 { 0.0 } else { self.v.log_ratio(t) };
        self.prior.gamma.ln() + ratio
    }

    /// Reassignment with component parameters integrated out: existing
    /// cluster `c` has weight `(|c| + γ) m(X^c ∪ block) / m(X^c)` and a new
    /// cluster `γ V(t+1)/V(t) m(block)`.
    pub fn gibbs_collapsed<R: Rng + ?Sized>(&self, state: &mut ChainState<F>, rng: &mut R) {
        let fam = &self.family;
        let gamma = self.prior.gamma;
        let mut slots = Vec::new();
        let mut log_w = Vec::new();
        let mut merged = Vec::new();
        for i in self.scan_order(state.blocks.len(), rng) {
            let (t, _) = self.detach(state, i);
            let block = &state.blocks[i];
            slots.clear();
            log_w.clear();
            merged.clear();
            for (s, c) in state.partition.clusters_iter() {
                let m = fam.log_marginal_merged(&c.stats, block);
                slots.push(s);
                merged.push(m);
                log_w.push((c.size as f64 + gamma).ln() + m - c.value);
            }
            let single = fam.log_marginal(block);
            log_w.push(self.log_new_cluster_prior(t) + single);
            let pick = sample_log_weights(&log_w, rng);
            let slot = if pick < slots.len() {
                let s = slots[pick];
                let c = state.partition.cluster_mut(s);
                fam.merge(&mut c.stats, block);
                c.size += 1;
                c.value = merged[pick];
                s
            } else {
                let s = state.partition.open(Cluster {
                    size: 1,
                    stats: block.clone(),
                    value: single,
                });
                if state.phi.len() <= s {
                    state.phi.resize(s + 1, None);
                }
                s
            };
            state.partition.set_slot(i, slot);
        }
    }

    /// Reassignment with explicit cluster parameters and `m` auxiliary
    /// components: existing cluster weight `(|c| + γ) f(block | φ_c)`,
    /// auxiliary `(γ/m) V(t+1)/V(t) f(block | φ_h)`. A cluster emptied by the
    /// removal lends its parameter to the first auxiliary component.
    /// Parameters are redrawn from their posteriors after the sweep.
    pub fn gibbs_auxiliary<R: Rng + ?Sized>(&self, state: &mut ChainState<F>, rng: &mut R) {
        let fam = &self.family;
        let gamma = self.prior.gamma;
        let m = self.config.aux_components.max(1);
        let mut slots = Vec::new();
        let mut log_w = Vec::new();
        let mut aux: Vec<F::Param> = Vec::with_capacity(m);
        for i in self.scan_order(state.blocks.len(), rng) {
            let (t, freed) = self.detach(state, i);
            aux.clear();
            aux.extend(freed);
            while aux.len() < m {
                aux.push(fam.sample_prior(rng));
            }
            let block = &state.blocks[i];
            slots.clear();
            log_w.clear();
            for (s, c) in state.partition.clusters_iter() {
                let phi = state.phi[s].as_ref().expect("parameter for every active cluster");
                slots.push(s);
                log_w.push((c.size as f64 + gamma).ln() + fam.log_likelihood(block, phi));
            }
            let aux_prior = self.log_new_cluster_prior(t) - (m as f64).ln();
            for p in &aux {
                log_w.push(aux_prior + fam.log_likelihood(block, p));
            }
            let pick = sample_log_weights(&log_w, rng);
            let slot = if pick < slots.len() {
                let s = slots[pick];
                let phi = state.phi[s].as_ref().expect("parameter for every active cluster");
                let c = state.partition.cluster_mut(s);
                fam.merge(&mut c.stats, block);
                c.size += 1;
                c.value = fam.log_likelihood(&c.stats, phi);
                s
            } else {
                let p = aux.swap_remove(pick - slots.len());
                let cluster = self.make_cluster(1, block.clone(), Some(&p));
                let s = state.partition.open(cluster);
                if state.phi.len() <= s {
                    state.phi.resize(s + 1, None);
                }
                state.phi[s] = Some(p);
                s
            };
            state.partition.set_slot(i, slot);
        }
        self.refresh_parameters(state, rng);
    }

    /// Redraws every cluster parameter from its conditional posterior.
    pub fn refresh_parameters<R: Rng + ?Sized>(&self, state: &mut ChainState<F>, rng: &mut R) {
        let slots: Vec<usize> = state.partition.active_slots().collect();
        for s in slots {
            let c = state.partition.cluster_mut(s);
            let p = self.family.sample_posterior(&c.stats, rng);
            c.value = self.family.log_likelihood(&c.stats, &p);
            state.phi[s] = Some(p);
        }
    }
}
