//! Uniform fixed-size subsets from a linear number of random bits.

use crate::error::{Error, Result};
use crate::rng::{sample_uniform_int, BitSource};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SubsetDraw<T> {
    /// Chosen elements in the order of the input.
    pub items: Vec<T>,
    /// Their indices in the input, increasing.
    pub indices: Vec<usize>,
    pub bits_used: u64,
}

/// Uniformly random `h`-subset of `a`.
///
/// Each step picks a pivot `x` uniformly and keeps every other live element
/// with a fair coin flip into `B`. If `|B| < h` then `B ∪ {x}` is taken and
/// the rest is drawn from what remains; otherwise the draw recurses into
/// `B`. Expected bit usage is linear in `|a|`.
pub fn random_subset<T: Copy, B: BitSource + ?Sized>(a: &[T], h: usize, src: &mut B) -> Result<SubsetDraw<T>> {
    if h > a.len() {
        return Err(Error::SubsetOutOfRange { h, len: a.len() });
    }
    let start = src.bits_consumed();
    let mut chosen = vec![false; a.len()];
    let mut live: Vec<usize> = (0..a.len()).collect();
    let mut need = h;
    let mut flips = Vec::new();
    while need > 0 {
        let (xi, _) = sample_uniform_int(src, live.len() as u64)?;
        let x = live[xi as usize];
        flips.clear();
        for (j, &y) in live.iter().enumerate() {
            if j != xi as usize {
                flips.push((y, src.next_bit()?));
            }
        }
        let kept = flips.iter().filter(|f| f.1).count();
        if kept < need {
            chosen[x] = true;
            for &(y, b) in &flips {
                chosen[y] |= b;
            }
            live = flips.iter().filter(|f| !f.1).map(|f| f.0).collect();
            need -= kept + 1;
        } else {
            live = flips.iter().filter(|f| f.1).map(|f| f.0).collect();
        }
    }
    let indices: Vec<usize> = (0..a.len()).filter(|&i| chosen[i]).collect();
    Ok(SubsetDraw { items: indices.iter().map(|&i| a[i]).collect(), indices, bits_used: src.bits_consumed() - start })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::RngBits;

    #[test]
    fn trivial_sizes() {
        let a = [4, 8, 15, 16];
        let mut src = RngBits::new(0);
        let none = random_subset(&a, 0, &mut src).unwrap();
        assert!(none.items.is_empty());
        assert_eq!(none.bits_used, 0);
        assert_eq!(random_subset(&a, 4, &mut src).unwrap().items, a.to_vec());
        assert_eq!(random_subset(&a, 5, &mut src).unwrap_err(), Error::SubsetOutOfRange { h: 5, len: 4 });
        assert!(random_subset::<u32, _>(&[], 0, &mut src).unwrap().items.is_empty());
    }

    #[test]
    fn sizes_and_order() {
        let a: Vec<u32> = (0..50).map(|i| i * 3).collect();
        let mut src = RngBits::new(1);
        for h in 0..=50 {
            let d = random_subset(&a, h, &mut src).unwrap();
            assert_eq!(d.items.len(), h);
            assert!(d.indices.windows(2).all(|w| w[0] < w[1]));
            assert!(d.items.iter().zip(&d.indices).all(|(&x, &i)| a[i] == x));
        }
    }

    #[test]
    fn exhausted_source_propagates() {
        let a: Vec<u32> = (0..100).collect();
        let mut src = RngBits::new(1).with_limit(10);
        assert!(matches!(random_subset(&a, 50, &mut src), Err(Error::BitsExhausted { .. })));
    }

    #[test]
    fn two_of_four_is_uniform() {
        let a = [0u8, 1, 2, 3];
        let mut src = RngBits::new(42);
        let mut counts = std::collections::HashMap::new();
        let trials = 60_000;
        for _ in 0..trials {
            let d = random_subset(&a, 2, &mut src).unwrap();
            *counts.entry(d.items).or_insert(0u32) += 1;
        }
        assert_eq!(counts.len(), 6);
        for c in counts.values() {
            assert!((f64::from(*c) / trials as f64 - 1.0 / 6.0).abs() < 0.01);
        }
    }
}
