//! Unequal groups (n1 = beta * n0 + r): the r reference instances that take
//! an extra match are either drawn at random or chosen as k-medoids of the
//! reference group.
//!
//! cargo run --release --example residual_selection

use std::path::PathBuf;

use fbc::io::{load_dataset, DatasetSpec};
use fbc::priors::{NormalGamma, PriorConfig};
use fbc::sampler::{ResidualStrategy, Sampler, SamplerConfig};

fn main() -> fbc::error::Result<()> {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/data/anes96.csv");
    let data = load_dataset(&DatasetSpec::csv(path, "vote", &[]))?.train;
    let (n0, n1) = (data.group(0).rows(), data.group(1).rows());
    println!("groups {n0} and {n1}: beta {}, r {}", n1 / n0, n1 % n0);
    let prior = PriorConfig::default();
    for residual in [ResidualStrategy::Random, ResidualStrategy::Medoids] {
        let config = SamplerConfig {
            residual,
            max_iter: 1500,
            burn_in: 1000,
            ..SamplerConfig::default()
        };
        let chain = Sampler::new(&data, NormalGamma::new(data.dim(), prior.a, prior.b)?, prior, config)?.run_chain(0)?;
        let n = chain.samples.len() as f64;
        println!(
            "{residual:?}: mean gap {:.4}, max gap {:.4}, mean cost {:.3}, K mode {:?}",
            chain.samples.iter().map(|s| s.delta).sum::<f64>() / n,
            chain.samples.iter().map(|s| s.delta).fold(0.0, f64::max),
            chain.samples.iter().map(|s| s.cost).sum::<f64>() / n,
            fbc::metrics::mode_k(chain.samples.iter().map(|s| s.k)),
        );
    }
    Ok(())
}
