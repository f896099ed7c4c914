use rand::seq::SliceRandom;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::Result;
use crate::model::{FeatureKind, FeatureMatrix, GroupedDataset};

/// Component means of the two-dimensional toy data, group 0.
pub const TOY_GROUP0_MEANS: [[f64; 2]; 3] = [[-5.0, -30.0], [-5.0, 0.0], [-5.0, 30.0]];
/// Component means of the toy data, group 1 (shifted by 0.5 in the second
/// coordinate).
pub const TOY_GROUP1_MEANS: [[f64; 2]; 3] = [[-5.0, -29.5], [-5.0, 0.5], [-5.0, 30.5]];

/// Draws `per_component` unit-covariance Gaussian points around every mean
/// of every group, shuffling rows within each group.
pub fn generate_mixture<R: Rng + ?Sized, M: AsRef<[f64]>>(
    means: &[Vec<M>],
    per_component: usize,
    rng: &mut R,
) -> Result<GroupedDataset> {
    let mut groups = Vec::with_capacity(means.len());
    for group_means in means {
        let mut rows: Vec<Vec<f64>> = Vec::with_capacity(group_means.len() * per_component);
        for mu in group_means {
            for _ in 0..per_component {
                rows.push(
                    mu.as_ref()
                        .iter()
                        .map(|m| m + Distribution::<f64>::sample(&StandardNormal, rng))
                        .collect::<Vec<f64>>(),
                );
            }
        }
        rows.shuffle(rng);
        groups.push(FeatureMatrix::from_rows(&rows)?);
    }
    GroupedDataset::new(groups, FeatureKind::Continuous)
}

/// Two groups of 600 points, each an equal mixture of three unit-covariance
/// Gaussians (200 points per component).
pub fn generate_toy<R: Rng + ?Sized>(rng: &mut R) -> GroupedDataset {
    let means = vec![TOY_GROUP0_MEANS.to_vec(), TOY_GROUP1_MEANS.to_vec()];
    let d = generate_mixture(&means, 200, rng).expect("fixed toy layout is valid");
    GroupedDataset::with_names(
        d.groups().to_vec(),
        FeatureKind::Continuous,
        vec!["0".into(), "1".into()],
        vec!["x1".into(), "x2".into()],
    )
    .expect("fixed toy layout is valid")
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn toy_layout() {
        let d = generate_toy(&mut ChaCha8Rng::seed_from_u64(1));
        assert_eq!(d.sizes(), vec![600, 600]);
        let m: f64 = d.group(0).iter_rows().map(|r| r[1]).sum::<f64>() / 600.0;
        assert!(m.abs() < 1.5, "{m}");
        let again = generate_toy(&mut ChaCha8Rng::seed_from_u64(1));
        assert_eq!(d, again);
    }
}
