//! Markov chain Monte Carlo over the partition of the reference group and
//! the matching maps.

mod config;
mod gibbs;
mod mh;
mod residual;
mod run;
mod state;

pub use config::{GibbsPath, SamplerConfig};
pub use mh::{propose_mask_swap, propose_t0, propose_t_swap, MatchingMove, MhOutcome};
pub use residual::{k_medoids, select_residual, ResidualStrategy};
pub use run::{chain_rng, run_fbc, Chain, ChainSample};
pub use state::{ChainState, Coherence, Sampler};
