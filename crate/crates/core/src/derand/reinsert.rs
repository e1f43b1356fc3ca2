//! Reinsertion of the farm elements by mismatch minimization.

use crate::error::{Error, Result};
use crate::model::{Element, FaultModel};
use crate::par::{self, Exec};
use crate::riffle_sort::batch_insert;

/// Smallest integer `c` with `c ≥ 51/p` and `c > (7−8p)/(1−4p)`.
pub fn mismatch_constant(p: f64) -> Result<usize> {
    if !(p > 0.0 && p < 0.25) {
        return Err(Error::ModelOutOfRange { p, q: p });
    }
    let a = (51.0 / p - 1e-9).ceil();
    let b = ((7.0 - 8.0 * p) / (1.0 - 4.0 * p)).floor() + 1.0;
    Ok(a.max(b) as usize)
}

/// Grid step `⌈3 log₂ n⌉`.
pub fn grid_step(n: usize) -> usize {
    ((3.0 * (n.max(2) as f64).log2()).ceil() as usize).max(1)
}

/// Mismatches of placing `x` before rank `r̃` in `s`, over the window of
/// positions `[r̃−cd, r̃+cd)`.
pub fn count_mismatches(model: &FaultModel, x: Element, s: &[Element], r: usize, c: usize, d: usize) -> usize {
    let reach = c * d;
    let lo = r.saturating_sub(reach).max(1);
    let hi = (r + reach).min(s.len() + 1);
    (lo..hi)
        .filter(|&pos| {
            let y = s[pos - 1];
            if pos < r {
                model.reports_less(x, y)
            } else {
                model.reports_less(y, x)
            }
        })
        .count()
}

/// Mismatch counts for every grid rank `1, d+1, 2d+1, … ≤ |s|+1`, using one
/// comparison per element of `s`.
pub fn mismatch_profile(model: &FaultModel, x: Element, s: &[Element], c: usize, d: usize) -> Vec<(usize, usize)> {
    // above[j] = number of the first j elements observed larger than x
    let mut above = Vec::with_capacity(s.len() + 1);
    above.push(0usize);
    for &y in s {
        above.push(above.last().unwrap() + usize::from(model.reports_less(x, y)));
    }
    let reach = c * d;
    (1..=s.len() + 1)
        .step_by(d)
        .map(|r| {
            let lo = r.saturating_sub(reach).max(1);
            let hi = (r + reach).min(s.len() + 1);
            let left = above[r - 1] - above[lo - 1];
            let right = (hi - r) - (above[hi - 1] - above[r - 1]);
            (r, left + right)
        })
        .collect()
}

/// Inserts every element of `farm` into `s` at its mismatch-minimizing grid
/// rank, lowest rank on ties. Returns the sequence and comparisons used.
pub fn reinsert_front(model: &FaultModel, s: &[Element], farm: &[Element], c: usize, d: usize, exec: Exec) -> (Vec<Element>, u64) {
    let ranks = par::map_slice(exec, farm, |&x| {
        mismatch_profile(model, x, s, c, d).into_iter().min_by_key(|&(r, m)| (m, r)).map_or(1, |(r, _)| r)
    });
    let inserts: Vec<(Element, usize)> = farm.iter().copied().zip(ranks).collect();
    (batch_insert(s, &inserts).0, (farm.len() * s.len()) as u64)
}
