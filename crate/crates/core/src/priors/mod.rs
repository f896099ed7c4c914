//! Partition prior coefficients, conjugate likelihood families and the
//! energy prior on matching maps.

mod energy;
mod family;
mod vcoef;

use serde::{Deserialize, Serialize};

use crate::error::{FbcError, Result};

pub use energy::{log_energy, log_energy_swap_delta, Distance, DistanceCache, CACHE_LIMIT};
pub use family::{
    log_marginal_beta_bernoulli, log_marginal_normal_gamma, BernoulliParams, BetaBernoulli, BetaBernoulliStats,
    ConjugateFamily, NormalGamma, NormalGammaStats, NormalParams,
};
pub use vcoef::{compute_log_v, log_partition_prior, log_rising, log_v_term, VCoefficients};

/// Hyperparameters. `gamma` is the Dirichlet concentration, `kappa` the
/// geometric parameter of the prior on the number of components, `tau` the
/// energy temperature, `a`/`b` the Normal-Gamma shape/rate and `alpha` the
/// symmetric Beta parameter.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PriorConfig {
    pub gamma: f64,
    pub kappa: f64,
    pub tau: f64,
    pub a: f64,
    pub b: f64,
    pub alpha: f64,
}

impl Default for PriorConfig {
    fn default() -> Self {
        Self {
            gamma: 1.0,
            kappa: 0.1,
            tau: 1.0,
            a: 1.0,
            b: 1.0,
            alpha: 1.0,
        }
    }
}

impl PriorConfig {
    pub fn validate(&self) -> Result<()> {
        let pos = |name: &str, v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(FbcError::invalid(format!("{name} must be positive, got {v}")))
            }
        };
        pos("gamma", self.gamma)?;
        pos("tau", self.tau)?;
        pos("a", self.a)?;
        pos("b", self.b)?;
        pos("alpha", self.alpha)?;
        if !(self.kappa > 0.0 && self.kappa < 1.0) {
            return Err(FbcError::invalid(format!("kappa must lie in (0, 1), got {}", self.kappa)));
        }
        Ok(())
    }
}
