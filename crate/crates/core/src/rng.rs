//! Reproducible randomness.
//!
//! All randomness flows through a [`BitSource`], so that the same code paths
//! run on a seeded counter-based generator or on bits extracted from
//! comparison outcomes. Every source counts the bits it hands out.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::model::{mix64, Element};

/// Per-trial seed derived from a master seed.
pub fn trial_seed(master: u64, trial_id: u64) -> u64 {
    master ^ trial_id
}

/// A stream of random bits with exact consumption accounting.
pub trait BitSource {
    fn next_bit(&mut self) -> Result<bool>;

    fn bits_consumed(&self) -> u64;

    /// `count ≤ 64` bits, first drawn bit most significant.
    fn next_bits(&mut self, count: u32) -> Result<u64> {
        debug_assert!(count <= 64);
        let mut v = 0u64;
        for _ in 0..count {
            v = (v << 1) | u64::from(self.next_bit()?);
        }
        Ok(v)
    }
}

/// Counter-based generator (ChaCha8) split into independent streams.
#[derive(Debug, Clone)]
pub struct RngBits {
    rng: ChaCha8Rng,
    buf: u64,
    left: u32,
    consumed: u64,
    limit: Option<u64>,
}

impl RngBits {
    pub fn new(seed: u64) -> Self {
        Self::stream(seed, 0)
    }

    /// Independent stream `stream` of the generator keyed by `seed`.
    pub fn stream(seed: u64, stream: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(stream);
        Self { rng, buf: 0, left: 0, consumed: 0, limit: None }
    }

    /// Caps the number of bits this source will hand out.
    pub fn with_limit(mut self, limit: u64) -> Self {
        self.limit = Some(limit);
        self
    }

    pub fn next_u64(&mut self) -> u64 {
        self.rng.next_u64()
    }
}

impl BitSource for RngBits {
    #[inline]
    fn next_bit(&mut self) -> Result<bool> {
        if self.limit.is_some_and(|l| self.consumed >= l) {
            return Err(Error::BitsExhausted { consumed: self.consumed });
        }
        if self.left == 0 {
            self.buf = self.rng.next_u64();
            self.left = 64;
        }
        let bit = self.buf & 1 == 1;
        self.buf >>= 1;
        self.left -= 1;
        self.consumed += 1;
        Ok(bit)
    }

    fn bits_consumed(&self) -> u64 {
        self.consumed
    }

    fn next_bits(&mut self, count: u32) -> Result<u64> {
        if count == 0 {
            return Ok(0);
        }
        if self.limit.is_some_and(|l| self.consumed + u64::from(count) > l) {
            // Fall back to bit-by-bit so the failure point is exact.
            let mut v = 0u64;
            for _ in 0..count {
                v = (v << 1) | u64::from(self.next_bit()?);
            }
            return Ok(v);
        }
        let mut v = 0u64;
        let mut need = count;
        while need > 0 {
            if self.left == 0 {
                self.buf = self.rng.next_u64();
                self.left = 64;
            }
            let take = need.min(self.left);
            // Earliest bit ends up most significant, as in the bit-by-bit path.
            let chunk = self.buf.reverse_bits() >> (64 - take);
            v = if take == 64 { chunk } else { (v << take) | chunk };
            self.buf = if take == 64 { 0 } else { self.buf >> take };
            self.left -= take;
            need -= take;
        }
        self.consumed += u64::from(count);
        Ok(v)
    }
}

/// Number of bits needed to write values in `[0, bound)`.
pub fn bits_for(bound: u64) -> u32 {
    if bound <= 1 {
        0
    } else {
        64 - (bound - 1).leading_zeros()
    }
}

/// Uniform integer in `[0, bound)` by rejection on `⌈log₂ bound⌉`-bit draws.
/// Returns the value and the number of bits consumed, retries included.
pub fn sample_uniform_int<B: BitSource + ?Sized>(src: &mut B, bound: u64) -> Result<(u64, u64)> {
    assert!(bound >= 1, "bound must be positive");
    let width = bits_for(bound);
    let mut used = 0u64;
    loop {
        let v = src.next_bits(width)?;
        used += u64::from(width);
        if v < bound {
            return Ok((v, used));
        }
    }
}

/// Uniform in-place shuffle (Fisher-Yates) driven by `src`.
pub fn fisher_yates<T, B: BitSource + ?Sized>(items: &mut [T], src: &mut B) -> Result<()> {
    for i in (1..items.len()).rev() {
        let (j, _) = sample_uniform_int(src, i as u64 + 1)?;
        items.swap(i, j as usize);
    }
    Ok(())
}

/// Uniformly random permutation of `1..=n`.
pub fn random_permutation(n: usize, src: &mut impl BitSource) -> Vec<Element> {
    let mut v: Vec<Element> = (1..=n as Element).collect();
    fisher_yates(&mut v, src).expect("unbounded source");
    v
}

/// Permutation of `1..=n` with dislocation strictly below `block`:
/// the sorted sequence shuffled independently inside consecutive blocks.
pub fn block_shuffled(n: usize, block: usize, src: &mut impl BitSource) -> Vec<Element> {
    let mut v: Vec<Element> = (1..=n as Element).collect();
    for chunk in v.chunks_mut(block.max(1)) {
        fisher_yates(chunk, src).expect("unbounded source");
    }
    v
}

/// Cheap deterministic 64-bit hash, exposed for seed derivation.
pub fn derive_seed(seed: u64, salt: u64) -> u64 {
    mix64(seed ^ mix64(salt.wrapping_add(0x9e37_79b9_7f4a_7c15)))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bound_one_uses_no_bits() {
        let mut src = RngBits::new(1);
        assert_eq!(sample_uniform_int(&mut src, 1).unwrap(), (0, 0));
        assert_eq!(src.bits_consumed(), 0);
    }

    #[test]
    fn bit_accounting_matches_source() {
        let mut src = RngBits::new(5);
        let mut total = 0;
        for bound in 1..200u64 {
            let (v, used) = sample_uniform_int(&mut src, bound).unwrap();
            assert!(v < bound);
            assert_eq!(used % u64::from(bits_for(bound).max(1)), 0);
            total += used;
        }
        assert_eq!(total, src.bits_consumed());
    }

    #[test]
    fn next_bits_agrees_with_single_bits_on_budget() {
        let mut a = RngBits::new(11);
        let mut b = RngBits::new(11).with_limit(10);
        assert_eq!(a.next_bits(7).unwrap(), b.next_bits(7).unwrap());
        assert!(b.next_bits(7).is_err());
        assert_eq!(b.bits_consumed(), 10);
    }

    #[test]
    fn streams_differ() {
        let mut a = RngBits::stream(1, 0);
        let mut b = RngBits::stream(1, 1);
        assert_ne!(a.next_u64(), b.next_u64());
    }

    #[test]
    fn block_shuffle_bounds_dislocation() {
        let mut src = RngBits::new(2);
        let v = block_shuffled(1000, 16, &mut src);
        let s = crate::sequence::Sequence::new(v).unwrap();
        assert!(s.dislocation_report().max_dislocation < 16);
    }

    #[test]
    fn shuffle_of_one_is_identity() {
        let mut v = vec![42u32];
        fisher_yates(&mut v, &mut RngBits::new(0)).unwrap();
        assert_eq!(v, vec![42]);
    }
}
