//! Fair clustering versus an unconstrained mixture on the two-group toy data.
//!
//! cargo run --release --example toy_fair_vs_mfm -- [seed]

use fbc::io::{load_dataset, DatasetSpec};
use fbc::metrics::ChainSummary;
use fbc::priors::{NormalGamma, PriorConfig};
use fbc::sampler::{Sampler, SamplerConfig};

fn main() -> fbc::error::Result<()> {
    let seed: u64 = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(0);
    let data = load_dataset(&DatasetSpec::toy(seed))?.train;
    let prior = PriorConfig::default();

    for fairness in [false, true] {
        let config = SamplerConfig {
            fairness,
            seed,
            ..SamplerConfig::default()
        };
        let family = NormalGamma::new(data.dim(), prior.a, prior.b)?;
        let start = std::time::Instant::now();
        let chain = Sampler::new(&data, family, prior, config)?.run_chain(0)?;
        let rows = chain.samples.iter().map(|s| fbc::metrics::SampleMetrics {
            iteration: s.iteration,
            k: s.k,
            cost: s.cost,
            delta: s.delta,
            bal: s.bal,
            nll: s.nll,
        });
        let summary = ChainSummary::new(rows.collect(), chain.nll_trace.clone(), 20);
        let max_delta = chain.samples.iter().map(|s| s.delta).fold(0.0, f64::max);
        println!(
            "{:<4} K histogram {:?}  mode {:?}  max delta {:.4}  acceptance {:.3}  ({:.1?})",
            if fairness { "FBC" } else { "MFM" },
            summary.k_histogram,
            summary.mode_k(),
            max_delta,
            chain.acceptance_rate(),
            start.elapsed()
        );
    }
    Ok(())
}
