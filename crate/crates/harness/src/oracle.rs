//! Slow, independent recomputation of dislocation statistics.

use faultsort_core::Element;
use serde::Serialize;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct OracleReport {
    pub max_dislocation: u64,
    pub total_dislocation: u64,
    pub is_permutation: bool,
    pub is_sorted: bool,
}

/// Ranks by counting smaller elements, `O(n²)`; meant for small inputs.
pub fn brute_force_oracle(seq: &[Element]) -> OracleReport {
    let n = seq.len();
    let (mut max, mut total) = (0u64, 0u64);
    for (i, &x) in seq.iter().enumerate() {
        let rank = seq.iter().filter(|&&y| y < x).count();
        let d = rank.abs_diff(i) as u64;
        max = max.max(d);
        total += d;
    }
    let mut seen = vec![false; n + 1];
    let is_permutation = seq.iter().all(|&x| {
        let x = x as usize;
        (1..=n).contains(&x) && !std::mem::replace(&mut seen[x], true)
    });
    OracleReport { max_dislocation: max, total_dislocation: total, is_permutation, is_sorted: seq.windows(2).all(|w| w[0] < w[1]) }
}
