//! Binary features with the Beta-Bernoulli family. Three planted clusters
//! appear in different proportions in the two groups, so an unconstrained
//! mixture is unfair while the matched model is not.
//!
//! cargo run --release --example categorical

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use fbc::io::binarize_median;
use fbc::model::{FeatureKind, FeatureMatrix, GroupedDataset};
use fbc::priors::{BetaBernoulli, PriorConfig};
use fbc::sampler::{Sampler, SamplerConfig};

const PATTERNS: [[f64; 6]; 3] = [
    [2.0, 2.0, 2.0, -2.0, -2.0, -2.0],
    [-2.0, -2.0, 2.0, 2.0, 2.0, -2.0],
    [2.0, -2.0, -2.0, -2.0, 2.0, 2.0],
];

fn planted(counts: [[usize; 3]; 2], rng: &mut ChaCha8Rng) -> fbc::error::Result<GroupedDataset> {
    let mut rows = Vec::new();
    for (b, per) in counts.iter().enumerate() {
        for (c, &n) in per.iter().enumerate() {
            for _ in 0..n {
                let x: Vec<f64> = PATTERNS[c].iter().map(|m| m + rng.random_range(-1.5..1.5)).collect();
                rows.push((b, x));
            }
        }
    }
    rows.shuffle(rng);
    // binarize at the pooled medians, then split back into groups
    let pooled = FeatureMatrix::from_rows(&rows.iter().map(|(_, x)| x.clone()).collect::<Vec<_>>())?;
    let bits = binarize_median(&pooled);
    let groups = (0..2)
        .map(|b| {
            let sel: Vec<usize> = (0..rows.len()).filter(|&i| rows[i].0 == b).collect();
            bits.select_rows(&sel)
        })
        .collect();
    GroupedDataset::new(groups, FeatureKind::Binary)
}

fn main() -> fbc::error::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let data = planted([[60, 30, 10], [40, 60, 100]], &mut rng)?;
    let prior = PriorConfig::default();
    for fairness in [false, true] {
        let config = SamplerConfig { fairness, ..SamplerConfig::default() };
        let chain = Sampler::new(&data, BetaBernoulli::new(6, prior.alpha)?, prior, config)?.run_chain(0)?;
        let n = chain.samples.len() as f64;
        let k = fbc::metrics::mode_k(chain.samples.iter().map(|s| s.k));
        println!(
            "{}: K mode {:?}, mean gap {:.4}, mean categorical cost {:.2}",
            if fairness { "FBC" } else { "MFM" },
            k,
            chain.samples.iter().map(|s| s.delta).sum::<f64>() / n,
            chain.samples.iter().map(|s| s.cost).sum::<f64>() / n,
        );
    }
    Ok(())
}
