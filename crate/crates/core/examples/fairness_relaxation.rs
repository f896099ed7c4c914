//! Trading fairness for fit: the mask size `m` lets up to `m` instances of
//! the larger group ignore the matching, and the gap stays below `m / n1`.
//!
//! cargo run --release --example fairness_relaxation

use fbc::io::{load_dataset, DatasetSpec};
use fbc::priors::{NormalGamma, PriorConfig};
use fbc::sampler::{Sampler, SamplerConfig};

fn main() -> fbc::error::Result<()> {
    let data = load_dataset(&DatasetSpec::toy(0))?.train;
    let n1 = data.group(1).rows() as f64;
    let prior = PriorConfig::default();
    println!("{:>5} {:>8} {:>10} {:>10} {:>8} {:>6}", "m", "bound", "mean gap", "max gap", "cost", "K");
    for m in [0usize, 30, 60, 150, 300] {
        let config = SamplerConfig {
            mask_sizes: vec![m],
            max_iter: 2000,
            burn_in: 1500,
            ..SamplerConfig::default()
        };
        let chain = Sampler::new(&data, NormalGamma::new(2, prior.a, prior.b)?, prior, config)?.run_chain(0)?;
        let n = chain.samples.len() as f64;
        let mean = chain.samples.iter().map(|s| s.delta).sum::<f64>() / n;
        let max = chain.samples.iter().map(|s| s.delta).fold(0.0, f64::max);
        let cost = chain.samples.iter().map(|s| s.cost).sum::<f64>() / n;
        let k = fbc::metrics::mode_k(chain.samples.iter().map(|s| s.k)).unwrap_or(0);
        println!("{m:>5} {:>8.4} {mean:>10.4} {max:>10.4} {cost:>8.4} {k:>6}", m as f64 / n1);
    }
    Ok(())
}
