//! Near-fair random bits from comparison outcomes.
//!
//! Each farm element is compared with every other element once. The
//! outcomes are read row by row and XORed in disjoint blocks of `η`; every
//! block yields one bit whose bias shrinks geometrically in `η`.

use crate::error::{Error, Result};
use crate::model::{Element, FaultModel};
use crate::rng::BitSource;

/// XOR of a non-empty list of bits.
pub fn xor_bits(bits: &[bool]) -> Result<bool> {
    if bits.is_empty() {
        return Err(Error::EmptyXor);
    }
    Ok(bits.iter().fold(false, |a, &b| a ^ b))
}

/// Block length `⌈4 ln n / ln(1/(1−2q))⌉`.
pub fn farm_eta(n: usize, q: f64) -> Result<usize> {
    if !(q > 0.0 && q < 0.5) {
        return Err(Error::Precondition(format!("bit extraction needs 0 < q < 1/2, got q={q}")));
    }
    let v = 4.0 * (n.max(2) as f64).ln() / (1.0 / (1.0 - 2.0 * q)).ln();
    Ok(((v - 1e-9).ceil() as usize).max(1))
}

/// Bit source backed by the comparisons between `F` and `F′`.
#[derive(Debug, Clone)]
pub struct BitFarm<'a> {
    model: &'a FaultModel,
    farm: &'a [Element],
    rest: &'a [Element],
    eta: usize,
    next_pair: usize,
    consumed: u64,
}

impl<'a> BitFarm<'a> {
    /// Bits available before the farm runs dry.
    pub fn capacity(&self) -> u64 {
        (self.farm.len() * self.rest.len() / self.eta) as u64
    }

    pub fn eta(&self) -> usize {
        self.eta
    }

    /// Comparator queries spent so far.
    pub fn comparisons(&self) -> u64 {
        self.consumed * self.eta as u64
    }

    /// Outcome `[x ≺ y]` for the pair with row-major index `idx`.
    #[inline]
    fn outcome(&self, idx: usize) -> bool {
        let (i, j) = (idx / self.rest.len(), idx % self.rest.len());
        self.model.reports_less(self.farm[i], self.rest[j])
    }
}

/// Sets up the farm `F × F′` with block length `eta`.
pub fn harvest_bits<'a>(model: &'a FaultModel, farm: &'a [Element], rest: &'a [Element], eta: usize) -> Result<BitFarm<'a>> {
    if model.q() <= 0.0 {
        return Err(Error::Precondition("bit extraction needs q > 0".into()));
    }
    if eta == 0 || farm.is_empty() || rest.is_empty() {
        return Err(Error::EmptyXor);
    }
    Ok(BitFarm { model, farm, rest, eta, next_pair: 0, consumed: 0 })
}

impl BitSource for BitFarm<'_> {
    fn next_bit(&mut self) -> Result<bool> {
        if self.consumed >= self.capacity() {
            return Err(Error::BitsExhausted { consumed: self.consumed });
        }
        let mut bit = false;
        for idx in self.next_pair..self.next_pair + self.eta {
            bit ^= self.outcome(idx);
        }
        self.next_pair += self.eta;
        self.consumed += 1;
        Ok(bit)
    }

    fn bits_consumed(&self) -> u64 {
        self.consumed
    }
}
