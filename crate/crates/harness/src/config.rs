use std::path::PathBuf;

use anyhow::{bail, Result};
use clap::ValueEnum;
use faultsort_core::noisy_search::ConstantsMode;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Algorithm {
    Riffle,
    Derand,
    Basket,
}

impl Algorithm {
    pub fn tag(self) -> &'static str {
        match self {
            Self::Riffle => "riffle",
            Self::Derand => "derand",
            Self::Basket => "basket",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum InputKind {
    /// Uniformly random permutation.
    Random,
    Sorted,
    Reversed,
    /// Shuffled inside consecutive blocks, so dislocation stays below the block.
    BlockShuffled,
    /// Ordered by observed tournament wins, correlated with the errors.
    Adversarial,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    #[default]
    Csv,
    Jsonl,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub name: String,
    pub sizes: Vec<usize>,
    pub trials: usize,
    pub p: f64,
    pub q: f64,
    pub mode: ConstantsMode,
    pub seed: u64,
    pub algorithm: Algorithm,
    pub input: InputKind,
    /// Block size for block-shuffled inputs.
    pub block: usize,
    /// Window for basket sort; defaults to the block size.
    pub w_s: Option<usize>,
    pub assume_independent_order: bool,
    /// Farm size multiplier for the derandomized sort.
    pub farm_factor: usize,
    /// Record wall-clock time; off keeps reruns byte-identical.
    pub timing: bool,
    pub output: Option<PathBuf>,
    pub format: OutputFormat,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            name: "sort".into(),
            sizes: vec![1 << 10],
            trials: 1,
            p: 0.05,
            q: 0.05,
            mode: ConstantsMode::Practical,
            seed: 0,
            algorithm: Algorithm::Riffle,
            input: InputKind::Random,
            block: 64,
            w_s: None,
            assume_independent_order: false,
            farm_factor: faultsort_core::derand::DEFAULT_FARM_FACTOR,
            timing: false,
            output: None,
            format: OutputFormat::Csv,
        }
    }
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            bail!("trial count must be at least 1");
        }
        if self.sizes.is_empty() || self.sizes[0] == 0 {
            bail!("sizes must be non-empty and positive");
        }
        if self.sizes.windows(2).any(|w| w[0] >= w[1]) {
            bail!("sizes must be strictly increasing: {:?}", self.sizes);
        }
        if self.block == 0 {
            bail!("block size must be positive");
        }
        Ok(())
    }

    pub fn window(&self) -> usize {
        self.w_s.unwrap_or(self.block)
    }
}
