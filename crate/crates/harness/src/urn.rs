//! Sampling without replacement from an urn of white and black balls: how
//! often does a long run of draws contain almost no white balls?

use anyhow::{bail, Result};
use faultsort_core::rng::{fisher_yates, RngBits};
use rayon::prelude::*;
use serde::Serialize;

/// Draw-window length in multiples of `ell`.
pub const WINDOW_FACTOR: usize = 54;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct UrnParams {
    /// Balls in the urn.
    pub balls: usize,
    /// White balls among them.
    pub white: usize,
    pub ell: usize,
}

impl UrnParams {
    /// Requires `M ≥ N/2 ≥ 32` and `8 log₂ N ≤ ell ≤ M/432`.
    pub fn checked(balls: usize, white: usize, ell: usize) -> Result<Self> {
        if white > balls {
            bail!("more white balls ({white}) than balls ({balls})");
        }
        if balls / 2 < 32 || 2 * white < balls {
            bail!("need M >= N/2 >= 32, got N={balls}, M={white}");
        }
        let floor = 8.0 * (balls as f64).log2();
        if (ell as f64) < floor || 432 * ell > white {
            bail!("need 8 log2 N = {floor:.1} <= ell <= M/432 = {:.1}, got ell={ell}", white as f64 / 432.0);
        }
        Ok(Self { balls, white, ell })
    }

    pub fn window(&self) -> usize {
        WINDOW_FACTOR * self.ell
    }
}

/// Whether some `len` consecutive draws hold at most `ell` white balls.
pub fn has_sparse_window(draws: &[bool], len: usize, ell: usize) -> bool {
    if len == 0 || len > draws.len() {
        return false;
    }
    let mut count = draws[..len].iter().filter(|&&b| b).count();
    if count <= ell {
        return true;
    }
    for i in len..draws.len() {
        count = count + usize::from(draws[i]) - usize::from(draws[i - len]);
        if count <= ell {
            return true;
        }
    }
    false
}

/// Recounts every window from scratch.
pub fn has_sparse_window_naive(draws: &[bool], len: usize, ell: usize) -> bool {
    len > 0 && len <= draws.len() && draws.windows(len).any(|w| w.iter().filter(|&&b| b).count() <= ell)
}

/// One urn emptied in random order; `true` on a sparse window. No
/// parameter checks, so small or degenerate urns can be simulated.
pub fn simulate_urn(params: UrnParams, src: &mut RngBits) -> bool {
    let mut draws: Vec<bool> = (0..params.balls).map(|i| i < params.white).collect();
    fisher_yates(&mut draws, src).expect("unbounded source");
    has_sparse_window(&draws, params.window(), params.ell)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct UrnResult {
    pub params: UrnParams,
    pub trials: usize,
    pub violations: usize,
    pub frequency: f64,
    /// `max(10/trials, 10·N⁻⁶)`.
    pub bound: f64,
}

impl UrnResult {
    pub fn passed(&self) -> bool {
        self.frequency <= self.bound
    }
}

pub fn experiment_urn(balls: usize, white: usize, ell: usize, trials: usize, seed: u64) -> Result<UrnResult> {
    let params = UrnParams::checked(balls, white, ell)?;
    if trials == 0 {
        bail!("trial count must be at least 1");
    }
    let violations = (0..trials as u64).into_par_iter().filter(|&t| simulate_urn(params, &mut RngBits::stream(seed, t))).count();
    Ok(UrnResult {
        params,
        trials,
        violations,
        frequency: violations as f64 / trials as f64,
        bound: (10.0 / trials as f64).max(10.0 * (balls as f64).powi(-6)),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn preconditions() {
        assert!(UrnParams::checked(1 << 17, 1 << 16, 136).is_ok());
        // 8·log₂ 2¹⁴ = 112 exceeds 2¹³/432
        assert!(UrnParams::checked(1 << 14, 1 << 13, 112).is_err());
        assert!(UrnParams::checked(40, 40, 1).is_err());
    }

    #[test]
    fn all_white_never_violates() {
        let params = UrnParams { balls: 1000, white: 1000, ell: 3 };
        let mut src = RngBits::new(1);
        assert!((0..20).all(|_| !simulate_urn(params, &mut src)));
    }

    #[test]
    fn sliding_scan_matches_recount() {
        let mut src = RngBits::new(5);
        for white in [20, 60, 100, 150] {
            for ell in [1, 2, 3] {
                let mut draws: Vec<bool> = (0..200).map(|i| i < white).collect();
                fisher_yates(&mut draws, &mut src).unwrap();
                for len in [1, 10, 54 * ell, 199, 200, 201] {
                    assert_eq!(has_sparse_window(&draws, len, ell), has_sparse_window_naive(&draws, len, ell));
                }
            }
        }
    }
}
