//! Metropolis-Hastings updates of the matching maps with the partition held
//! fixed.

use rand::Rng;

use crate::model::{GroupMatching, MaskSet};
use crate::priors::{log_energy_swap_delta, ConjugateFamily};

use super::state::{ChainState, Sampler};

/// Exchange of the `T` images of two distinct positions; `None` when the
/// group has fewer than two instances.
pub fn propose_t_swap<R: Rng + ?Sized>(nb: usize, rng: &mut R) -> Option<(usize, usize)> {
    if nb < 2 {
        return None;
    }
    let a = rng.random_range(0..nb);
    let mut b = rng.random_range(0..nb - 1);
    if b >= a {
        b += 1;
    }
    Some((a, b))
}

/// Position of `T0` to reset and its new uniform target.
pub fn propose_t0<R: Rng + ?Sized>(n0: usize, nb: usize, rng: &mut R) -> (usize, usize) {
    (rng.random_range(0..nb), rng.random_range(0..n0))
}

/// `(leaving, entering)` swap between the mask and its complement; `None`
/// when the mask is empty or full.
pub fn propose_mask_swap<R: Rng + ?Sized>(mask: &MaskSet, rng: &mut R) -> Option<(usize, usize)> {
    let (inside, outside) = (mask.members(), mask.non_members());
    if inside.is_empty() || outside.is_empty() {
        return None;
    }
    Some((
        inside[rng.random_range(0..inside.len())],
        outside[rng.random_range(0..outside.len())],
    ))
}

/// A joint move on `(T, T0, E)` of one group.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MatchingMove {
    pub t_swap: Option<(usize, usize)>,
    /// `(position, new target, previous target)`.
    pub t0_reset: (usize, usize, usize),
    pub mask_swap: Option<(usize, usize)>,
}

impl MatchingMove {
    pub fn propose<R: Rng + ?Sized>(g: &GroupMatching, rng: &mut R) -> Self {
        let t_swap = propose_t_swap(g.nb(), rng);
        let (j, target) = propose_t0(g.n0(), g.nb(), rng);
        let mask_swap = propose_mask_swap(g.mask(), rng);
        Self {
            t_swap,
            t0_reset: (j, target, g.t0_map()[j]),
            mask_swap,
        }
    }

    /// Positions whose routing may change.
    pub fn touched(&self) -> Vec<usize> {
        let mut v = Vec::with_capacity(5);
        if let Some((a, b)) = self.t_swap {
            v.extend([a, b]);
        }
        v.push(self.t0_reset.0);
        if let Some((a, b)) = self.mask_swap {
            v.extend([a, b]);
        }
        v.sort_unstable();
        v.dedup();
        v
    }

    pub fn apply(&self, g: &mut GroupMatching) {
        if let Some((a, b)) = self.t_swap {
            g.swap_t(a, b);
        }
        g.set_t0(self.t0_reset.0, self.t0_reset.1);
        if let Some((out, inn)) = self.mask_swap {
            g.swap_mask(out, inn);
        }
    }

    pub fn revert(&self, g: &mut GroupMatching) {
        if let Some((out, inn)) = self.mask_swap {
            g.swap_mask(inn, out);
        }
        g.set_t0(self.t0_reset.0, self.t0_reset.2);
        if let Some((a, b)) = self.t_swap {
            g.swap_t(a, b);
        }
    }
}

/// Outcome of one matching update.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MhOutcome {
    pub accepted: bool,
    pub log_alpha: f64,
}

impl<F: ConjugateFamily> Sampler<'_, F> {
    /// One joint proposal on group `b`'s matching, accepted with probability
    /// `min(1, e(T')/e(T) · L'/L)`. Only the clusters that gain or lose a
    /// routed instance are rescored.
    pub fn mh_step<R: Rng + ?Sized>(&self, state: &mut ChainState<F>, b: usize, rng: &mut R) -> MhOutcome {
        let fam = &self.family;
        let xs = self.data.group(b);
        let g = state.matching.group(b);
        let mv = MatchingMove::propose(g, rng);
        let touched = mv.touched();
        let before: Vec<usize> = touched.iter().map(|&j| g.route(j)).collect();
        let d_energy = match mv.t_swap {
            Some((a, c)) => log_energy_swap_delta(g.t_map(), a, c, &self.caches[b - 1], self.prior.tau),
            None => 0.0,
        };

        let g = state.matching.group_mut(b);
        mv.apply(g);
        let changes: Vec<(usize, usize, usize)> = touched
            .iter()
            .zip(&before)
            .map(|(&j, &old)| (j, old, g.route(j)))
            .filter(|&(_, old, new)| old != new)
            .collect();

        // scratch copies of the clusters whose membership changes
        let part = &state.partition;
        let mut scratch: Vec<(usize, F::Stats)> = Vec::with_capacity(4);
        let slot_entry = |slot: usize, scratch: &mut Vec<(usize, F::Stats)>| -> usize {
            match scratch.iter().position(|(s, _)| *s == slot) {
                Some(p) => p,
                None => {
                    scratch.push((slot, part.cluster(slot).stats.clone()));
                    scratch.len() - 1
                }
            }
        };
        for &(j, old, new) in &changes {
            let (so, sn) = (part.slot_of(old), part.slot_of(new));
            if so != sn {
                let p = slot_entry(so, &mut scratch);
                fam.remove_point(&mut scratch[p].1, xs.row(j));
                let p = slot_entry(sn, &mut scratch);
                fam.add_point(&mut scratch[p].1, xs.row(j));
            }
        }
        let new_values: Vec<f64> = scratch
            .iter()
            .map(|(s, st)| self.cluster_value(st, state.phi(*s)))
            .collect();
        let d_ll: f64 = scratch
            .iter()
            .zip(&new_values)
            .map(|((s, _), v)| v - part.cluster(*s).value)
            .sum();
        let log_alpha = d_energy + d_ll;
        let accepted = log_alpha >= 0.0 || rng.random::<f64>().ln() < log_alpha;

        if accepted {
            for ((s, st), v) in scratch.into_iter().zip(new_values) {
                let c = state.partition.cluster_mut(s);
                c.stats = st;
                c.value = v;
            }
            for &(j, old, new) in &changes {
                fam.remove_point(&mut state.blocks[old], xs.row(j));
                fam.add_point(&mut state.blocks[new], xs.row(j));
            }
        } else {
            mv.revert(state.matching.group_mut(b));
        }
        MhOutcome { accepted, log_alpha }
    }

    /// `mh_repeats` rounds of one update per non-reference group.
    pub fn mh_sweep<R: Rng + ?Sized>(&self, state: &mut ChainState<F>, rng: &mut R) -> usize {
        let mut accepted = 0;
        for _ in 0..self.config.mh_repeats {
            for b in 1..self.data.n_groups() {
                accepted += self.mh_step(state, b, rng).accepted as usize;
            }
        }
        accepted
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn figure_one_swap() {
        let mut g = GroupMatching::new(4, vec![2, 3, 0, 1], vec![0; 4], &[], vec![]);
        let mv = MatchingMove {
            t_swap: Some((0, 2)),
            t0_reset: (1, 3, 0),
            mask_swap: None,
        };
        mv.apply(&mut g);
        assert_eq!(g.t_map(), &[0, 3, 2, 1]);
        mv.revert(&mut g);
        assert_eq!(g.t_map(), &[2, 3, 0, 1]);
        assert_eq!(g.t0_map(), &[0; 4]);
    }

    #[test]
    fn degenerate_proposals() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        assert_eq!(propose_t_swap(1, &mut rng), None);
        assert_eq!(propose_mask_swap(&MaskSet::new(5, &[]), &mut rng), None);
        assert_eq!(propose_mask_swap(&MaskSet::new(2, &[0, 1]), &mut rng), None);
        for _ in 0..100 {
            let (a, b) = propose_t_swap(3, &mut rng).unwrap();
            assert!(a != b && a < 3 && b < 3);
        }
    }
}
