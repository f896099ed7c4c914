use serde::{Deserialize, Serialize};

use crate::error::{FbcError, Result};

use super::residual::ResidualStrategy;

/// How the partition is resampled.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GibbsPath {
    /// Component parameters integrated out.
    #[default]
    Collapsed,
    /// Explicit per-cluster parameters with auxiliary components for new
    /// clusters.
    Auxiliary,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SamplerConfig {
    pub max_iter: usize,
    pub burn_in: usize,
    /// Matching updates per group per iteration.
    pub mh_repeats: usize,
    /// Mask size for each non-reference group; a single value applies to all.
    pub mask_sizes: Vec<usize>,
    pub residual: ResidualStrategy,
    pub path: GibbsPath,
    /// Auxiliary components per reassignment on the auxiliary path.
    pub aux_components: usize,
    /// `false` runs a plain mixture on the pooled data.
    pub fairness: bool,
    /// Visit reference instances in a fresh random order every sweep.
    pub randomized_scan: bool,
    /// Store the full matching maps in every sample.
    pub full_matching: bool,
    pub seed: u64,
}

impl Default for SamplerConfig {
    fn default() -> Self {
        Self {
            max_iter: 1200,
            burn_in: 1000,
            mh_repeats: 10,
            mask_sizes: vec![0],
            residual: ResidualStrategy::Random,
            path: GibbsPath::Collapsed,
            aux_components: 3,
            fairness: true,
            randomized_scan: false,
            full_matching: false,
            seed: 0,
        }
    }
}

impl SamplerConfig {
    /// Mask size for each of the `sizes.len() - 1` non-reference groups.
    pub fn resolved_mask_sizes(&self, sizes: &[usize]) -> Result<Vec<usize>> {
        let groups = sizes.len().saturating_sub(1);
        let out = match self.mask_sizes.len() {
            0 => vec![0; groups],
            1 => vec![self.mask_sizes[0]; groups],
            n if n == groups => self.mask_sizes.clone(),
            n => {
                return Err(FbcError::Config(format!(
                    "{n} mask sizes given for {groups} non-reference groups"
                )))
            }
        };
        for (b, (&m, &nb)) in out.iter().zip(&sizes[1..]).enumerate() {
            if m > nb {
                return Err(FbcError::Config(format!(
                    "mask size {m} exceeds the size {nb} of group {}",
                    b + 1
                )));
            }
        }
        Ok(out)
    }

    pub fn validate(&self) -> Result<()> {
        if self.burn_in >= self.max_iter {
            return Err(FbcError::Config(format!(
                "burn_in ({}) must be smaller than max_iter ({})",
                self.burn_in, self.max_iter
            )));
        }
        if self.path == GibbsPath::Auxiliary && self.aux_components == 0 {
            return Err(FbcError::Config("aux_components must be at least 1".into()));
        }
        Ok(())
    }
}
