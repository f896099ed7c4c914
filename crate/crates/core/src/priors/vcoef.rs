use statrs::function::gamma::ln_gamma;

use crate::error::{FbcError, Result};
use crate::math::log_add_exp;

// Series truncation: stop once a term falls this many nats below the running
// sum, but never before `t + MIN_EXTRA_TERMS`.
const TRUNCATION_NATS: f64 = 28.0;
const MIN_EXTRA_TERMS: usize = 10;
const MAX_TERMS: usize = 50_000_000;

/// `log γ^{(n)} = log Γ(γ + n) − log Γ(γ)` (rising factorial).
#[inline]
pub fn log_rising(x: f64, n: usize) -> f64 {
    if n == 0 {
        0.0
    } else {
        ln_gamma(x + n as f64) - ln_gamma(x)
    }
}

/// Log of the `k`-th series term of `V_n(t)` under a Geometric(κ) prior on
/// the number of components: `k_(t) / (γk)^{(n)} · κ(1−κ)^{k−1}`.
/// Returns `-inf` for `k < t`.
pub fn log_v_term(n: usize, t: usize, k: usize, gamma: f64, kappa: f64) -> f64 {
    if k < t || k == 0 {
        return f64::NEG_INFINITY;
    }
    let falling = ln_gamma(k as f64 + 1.0) - ln_gamma((k - t) as f64 + 1.0);
    let gk = gamma * k as f64;
    let rising = ln_gamma(gk + n as f64) - ln_gamma(gk);
    falling - rising + kappa.ln() + (k - 1) as f64 * (1.0 - kappa).ln()
}

fn log_v_series(n: usize, t: usize, gamma: f64, kappa: f64) -> f64 {
    let mut acc = f64::NEG_INFINITY;
    let mut prev = f64::NEG_INFINITY;
    for k in t.max(1)..t.max(1) + MAX_TERMS {
        let term = log_v_term(n, t, k, gamma, kappa);
        acc = log_add_exp(acc, term);
        if k > t + MIN_EXTRA_TERMS && term < acc - TRUNCATION_NATS {
            // the tail decays at least geometrically once terms shrink; add the
            // geometric remainder using the last observed ratio
            let log_ratio = term - prev;
            if log_ratio < 0.0 {
                acc = log_add_exp(acc, term + log_ratio - (-log_ratio.exp()).ln_1p());
            }
            break;
        }
        prev = term;
    }
    acc
}

/// Table of `log V_{n0}(t)` for `t = 1..=t_max`, the partition-prior
/// coefficients of a mixture of finite mixtures with a Geometric(κ) prior on
/// the number of components and symmetric Dirichlet(γ) weights.
#[derive(Debug, Clone, PartialEq)]
pub struct VCoefficients {
    log_v: Vec<f64>,
    n0: usize,
    gamma: f64,
    kappa: f64,
}

impl VCoefficients {
    pub fn compute(n0: usize, t_max: usize, gamma: f64, kappa: f64) -> Result<Self> {
        if t_max > n0 {
            return Err(FbcError::invalid(format!(
                "t_max {t_max} exceeds n0 {n0}"
            )));
        }
        if !(gamma > 0.0) {
            return Err(FbcError::invalid("gamma must be positive"));
        }
        if !(kappa > 0.0 && kappa < 1.0) {
            return Err(FbcError::invalid("kappa must lie in (0, 1)"));
        }
        let log_v = (1..=t_max)
            .map(|t| log_v_series(n0, t, gamma, kappa))
            .collect();
        Ok(Self {
            log_v,
            n0,
            gamma,
            kappa,
        })
    }

    pub fn n0(&self) -> usize {
        self.n0
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn kappa(&self) -> f64 {
        self.kappa
    }

    pub fn t_max(&self) -> usize {
        self.log_v.len()
    }

    /// `log V_{n0}(t)`; entries past the table are evaluated on demand.
    pub fn log_v(&self, t: usize) -> f64 {
        match t.checked_sub(1).and_then(|i| self.log_v.get(i)) {
            Some(v) => *v,
            None if t == 0 || t > self.n0 => f64::NEG_INFINITY,
            None => log_v_series(self.n0, t, self.gamma, self.kappa),
        }
    }

    /// `log V(t+1) − log V(t)`.
    pub fn log_ratio(&self, t: usize) -> f64 {
        self.log_v(t + 1) - self.log_v(t)
    }
}

/// Convenience constructor matching the operation name used elsewhere.
pub fn compute_log_v(n0: usize, t_max: usize, gamma: f64, kappa: f64) -> Result<VCoefficients> {
    VCoefficients::compute(n0, t_max, gamma, kappa)
}

/// `log p(C) = log V_{n0}(t) + Σ_c log γ^{(|c|)}` for cluster sizes `sizes`.
pub fn log_partition_prior(sizes: &[usize], v: &VCoefficients) -> f64 {
    let gamma = v.gamma();
    v.log_v(sizes.len()) + sizes.iter().map(|&s| log_rising(gamma, s)).sum::<f64>()
}
