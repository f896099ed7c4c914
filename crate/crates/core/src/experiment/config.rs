use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{FbcError, Result};
use crate::io::{DatasetSource, DatasetSpec};
use crate::model::FeatureKind;
use crate::priors::PriorConfig;
use crate::sampler::SamplerConfig;

pub const CONFIG_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FamilyChoice {
    /// Normal-Gamma for continuous features, Beta-Bernoulli for binary.
    #[default]
    Auto,
    NormalGamma,
    BetaBernoulli,
}

impl FamilyChoice {
    pub fn resolve(self, kind: FeatureKind) -> Self {
        match (self, kind) {
            (FamilyChoice::Auto, FeatureKind::Continuous) => FamilyChoice::NormalGamma,
            (FamilyChoice::Auto, FeatureKind::Binary) => FamilyChoice::BetaBernoulli,
            (other, _) => other,
        }
    }
}

/// Which post-burn-in sample a summary row reports.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ReportRule {
    /// A uniformly random sample.
    #[default]
    Random,
    /// A uniformly random sample among those whose `K` is the posterior mode.
    ModeK,
}

/// Everything needed to reproduce a run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub version: u32,
    pub output: PathBuf,
    #[serde(default = "one")]
    pub chains: usize,
    #[serde(default)]
    pub family: FamilyChoice,
    #[serde(default)]
    pub report: ReportRule,
    pub dataset: DatasetSpec,
    #[serde(default)]
    pub prior: PriorConfig,
    #[serde(default)]
    pub sampler: SamplerConfig,
}

fn one() -> usize {
    1
}

impl RunConfig {
    pub fn new(output: impl Into<PathBuf>, dataset: DatasetSpec) -> Self {
        Self {
            version: CONFIG_VERSION,
            output: output.into(),
            chains: 1,
            family: FamilyChoice::Auto,
            report: ReportRule::Random,
            dataset,
            prior: PriorConfig::default(),
            sampler: SamplerConfig::default(),
        }
    }

    /// Parses a TOML config; relative paths are taken relative to the
    /// config file's directory.
    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let mut cfg = Self::from_toml(&text)?;
        let base = path.parent().unwrap_or(Path::new(""));
        if cfg.output.is_relative() {
            cfg.output = base.join(&cfg.output);
        }
        if let DatasetSource::Csv(p) = &mut cfg.dataset.source {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        }
        Ok(cfg)
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| FbcError::Config(e.to_string()))?;
        if cfg.version != CONFIG_VERSION {
            return Err(FbcError::Config(format!(
                "config version {} is not supported (expected {CONFIG_VERSION})",
                cfg.version
            )));
        }
        Ok(cfg)
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| FbcError::Config(e.to_string()))
    }

    /// Checks everything that can be checked without the data.
    pub fn validate(&self) -> Result<()> {
        if self.chains == 0 {
            return Err(FbcError::Config("chains must be at least 1".into()));
        }
        self.prior.validate()?;
        self.sampler.validate()?;
        if let DatasetSource::Csv(_) = self.dataset.source {
            if self.dataset.sensitive.is_empty() {
                return Err(FbcError::Config("dataset.sensitive must name a column".into()));
            }
        }
        Ok(())
    }
}
