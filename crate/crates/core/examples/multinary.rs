//! Three sensitive groups. Every larger group is matched to the smallest
//! one; with masks of sizes m1 and m2 the gap stays below
//! (m1/n1 + m2/n2) / 2.
//!
//! cargo run --release --example multinary

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use fbc::io::standardize_dataset;
use fbc::model::{FeatureKind, FeatureMatrix, GroupedDataset};
use fbc::priors::{NormalGamma, PriorConfig};
use fbc::sampler::{Sampler, SamplerConfig};

const CENTRES: [[f64; 2]; 3] = [[0.0, -8.0], [0.0, 0.0], [0.0, 8.0]];

fn group(per_component: usize, rng: &mut ChaCha8Rng) -> fbc::error::Result<FeatureMatrix> {
    let mut rows = Vec::new();
    for mu in CENTRES {
        for _ in 0..per_component {
            rows.push(mu.iter().map(|m| m + Distribution::<f64>::sample(&StandardNormal, rng)).collect::<Vec<f64>>());
        }
    }
    rows.shuffle(rng);
    FeatureMatrix::from_rows(&rows)
}

fn main() -> fbc::error::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    // 120, 240 and 360 points: exact multiples, so the unmasked gap is zero
    let groups = vec![group(40, &mut rng)?, group(80, &mut rng)?, group(120, &mut rng)?];
    let data = standardize_dataset(&GroupedDataset::new(groups, FeatureKind::Continuous)?);
    let sizes = data.sizes();
    let prior = PriorConfig::default();
    for masks in [vec![0, 0], vec![12, 0], vec![24, 30]] {
        let config = SamplerConfig {
            mask_sizes: masks.clone(),
            max_iter: 1500,
            burn_in: 1000,
            ..SamplerConfig::default()
        };
        let chain = Sampler::new(&data, NormalGamma::new(2, prior.a, prior.b)?, prior, config)?.run_chain(0)?;
        let max = chain.samples.iter().map(|s| s.delta).fold(0.0, f64::max);
        let bound = 0.5 * (masks[0] as f64 / sizes[1] as f64 + masks[1] as f64 / sizes[2] as f64);
        println!(
            "masks {masks:?}: max gap {max:.4} (bound {bound:.4}), K mode {:?}, acceptance {:.3}",
            fbc::metrics::mode_k(chain.samples.iter().map(|s| s.k)),
            chain.acceptance_rate()
        );
    }
    Ok(())
}
