//! Sorting without external randomness.
//!
//! The first `farm_factor·η` input elements form a bit farm: their
//! comparisons with everything else are XORed in blocks of `η` into
//! near-fair bits. Those bits drive the batch partition of riffle sort on
//! the remaining elements, and the farm elements are then reinserted one by
//! one at the grid rank with the fewest contradicting comparisons.
//!
//! The input order must not depend on the comparison errors, since the
//! shuffle is skipped.

mod bits;
mod reinsert;
mod subset;

pub use bits::{farm_eta, harvest_bits, xor_bits, BitFarm};
pub use reinsert::{count_mismatches, grid_step, mismatch_constant, mismatch_profile, reinsert_front};
pub use subset::{random_subset, SubsetDraw};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{Element, FaultModel};
use crate::rng::BitSource;
use crate::riffle_sort::{riffle_sort, riffle_sort_with, PartitionMethod, RiffleConfig};

pub const DEFAULT_FARM_FACTOR: usize = 1000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DerandConfig {
    /// Farm size in multiples of `η`.
    pub farm_factor: usize,
    pub riffle: RiffleConfig,
    /// Overrides the mismatch window constant.
    pub c: Option<usize>,
    /// Overrides the grid step `⌈3 log₂ n⌉`.
    pub d: Option<usize>,
    /// Report `q = 0` and undersized inputs as errors instead of falling
    /// back to the seeded randomized sort.
    pub strict: bool,
}

impl Default for DerandConfig {
    fn default() -> Self {
        Self { farm_factor: DEFAULT_FARM_FACTOR, riffle: RiffleConfig::default(), c: None, d: None, strict: false }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Fallback {
    /// No error floor, so comparisons carry no randomness.
    ZeroFloor,
    /// Fewer elements than the farm needs.
    SmallInput,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DerandOutcome {
    pub items: Vec<Element>,
    pub comparisons: u64,
    pub fallback: Option<Fallback>,
    /// The farm ran dry; the non-farm part was left in input order.
    pub bits_exhausted: bool,
    pub bits_consumed: u64,
    pub bit_capacity: u64,
    pub eta: usize,
    pub farm_size: usize,
    pub c: usize,
    pub d: usize,
}

fn fallback(model: &FaultModel, s: &[Element], cfg: &DerandConfig, why: Fallback) -> Result<DerandOutcome> {
    let out = riffle_sort(model, s, &cfg.riffle, model.seed())?;
    Ok(DerandOutcome {
        items: out.items,
        comparisons: out.comparisons,
        fallback: Some(why),
        bits_exhausted: false,
        bits_consumed: out.bits_consumed,
        bit_capacity: 0,
        eta: 0,
        farm_size: 0,
        c: 0,
        d: 0,
    })
}

/// Deterministic sort of `s`: same model and input give the same output.
pub fn derand_riffle_sort(model: &FaultModel, s: &[Element], cfg: &DerandConfig) -> Result<DerandOutcome> {
    let n = s.len();
    if model.q() <= 0.0 {
        if cfg.strict {
            return Err(Error::Precondition("derandomized sorting needs q > 0".into()));
        }
        return fallback(model, s, cfg, Fallback::ZeroFloor);
    }
    let eta = farm_eta(n, model.q())?;
    let farm_size = cfg.farm_factor.saturating_mul(eta);
    if farm_size == 0 || n <= farm_size {
        if cfg.strict {
            return Err(Error::Precondition(format!("n={n} must exceed the farm size {farm_size}")));
        }
        return fallback(model, s, cfg, Fallback::SmallInput);
    }
    let c = match cfg.c {
        Some(c) => c,
        None => mismatch_constant(model.p())?,
    };
    let d = cfg.d.unwrap_or_else(|| grid_step(n));
    let (farm, rest) = s.split_at(farm_size);
    let mut bits = harvest_bits(model, farm, rest, eta)?;
    let riffle = RiffleConfig { assume_independent_order: true, partition: PartitionMethod::Subset, ..cfg.riffle.clone() };
    let (sorted, riffle_comparisons, exhausted) = match riffle_sort_with(model, rest, &riffle, &mut bits) {
        Ok(out) => (out.items, out.comparisons, false),
        Err(Error::BitsExhausted { .. }) => (rest.to_vec(), 0, true),
        Err(e) => return Err(e),
    };
    let (items, reinsert_comparisons) = reinsert_front(model, &sorted, farm, c, d, cfg.riffle.exec);
    Ok(DerandOutcome {
        items,
        comparisons: bits.comparisons() + riffle_comparisons + reinsert_comparisons,
        fallback: None,
        bits_exhausted: exhausted,
        bits_consumed: bits.bits_consumed(),
        bit_capacity: bits.capacity(),
        eta,
        farm_size,
        c,
        d,
    })
}
