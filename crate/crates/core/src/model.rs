//! Persistent random comparison faults.
//!
//! Every unordered pair `{x, y}` carries an error probability `p_xy ∈ [q, p]`.
//! Whether the comparison of that pair is flipped is decided once and never
//! resampled: the [`FaultModel`] either evaluates a keyed pseudorandom
//! function of `(seed, {x, y})` on demand, or replays a precomputed error
//! matrix. In both cases the outcome is a pure function of the seed and the
//! pair.
//!
//! Elements are their own true ranks, `1..=n`.

use std::collections::HashMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// An element is identified with its true rank in `1..=n`.
pub type Element = u32;

/// Largest `n` for which matrix storage is allowed unless overridden.
pub const DEFAULT_MATRIX_CAP: usize = 4096;

/// The observed relation of the first argument of [`FaultModel::observe`]
/// with respect to the second.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum OrderOutcome {
    ReportedSmaller,
    ReportedLarger,
}

impl OrderOutcome {
    pub fn flipped(self) -> Self {
        match self {
            Self::ReportedSmaller => Self::ReportedLarger,
            Self::ReportedLarger => Self::ReportedSmaller,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum StorageMode {
    /// Keyed pseudorandom function over the unordered pair; constant memory.
    #[default]
    Prf,
    /// All `C(n, 2)` outcomes drawn up front.
    Matrix,
}

/// How the per-pair probabilities inside `[q, p]` are chosen.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PairProbabilities {
    /// `p_xy = p` for every pair.
    #[default]
    Uniform,
    /// `p_xy` drawn uniformly from `[q, p]`, seeded.
    Sampled,
}

const SEED_DOMAIN_ERROR: u64 = 0x243f_6a88_85a3_08d3;
const SEED_DOMAIN_PROB: u64 = 0x1319_8a2e_0370_7344;

/// SplitMix64 finalizer.
#[inline(always)]
pub(crate) fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

#[inline(always)]
fn pair_key(x: Element, y: Element) -> u64 {
    let (lo, hi) = if x < y { (x, y) } else { (y, x) };
    (u64::from(lo) << 32) | u64::from(hi)
}

/// Maps a probability in `[0, 1)` onto a `u64` threshold so that a uniform
/// 64-bit word falls below it with that probability.
#[inline]
fn threshold(prob: f64) -> u64 {
    if prob <= 0.0 {
        0
    } else {
        // 2^64 as f64 is exact; prob < 1/2 keeps the product in range.
        (prob * 18_446_744_073_709_551_616.0) as u64
    }
}

#[derive(Debug, Clone)]
enum Storage {
    /// No pair can ever be flipped (`p = 0`).
    Exact,
    Prf,
    Matrix { bits: Vec<u64> },
}

/// A comparator specialized for one storage layout, for hot loops.
pub trait Compare: Copy + Send + Sync {
    /// `true` iff `x ≺ y` is observed. Unchecked.
    fn less(&self, x: Element, y: Element) -> bool;
}

/// Code generic over the comparator, run by [`FaultModel::dispatch`].
pub trait CompareVisitor {
    type Output;
    fn visit<C: Compare>(self, cmp: C) -> Self::Output;
}

#[derive(Debug, Clone, Copy)]
pub struct ExactCompare;

impl Compare for ExactCompare {
    #[inline(always)]
    fn less(&self, x: Element, y: Element) -> bool {
        x < y
    }
}

#[derive(Debug, Clone, Copy)]
pub struct UniformCompare {
    key: u64,
    threshold: u64,
}

impl Compare for UniformCompare {
    #[inline(always)]
    fn less(&self, x: Element, y: Element) -> bool {
        (x < y) != (mix64(pair_key(x, y) ^ self.key) < self.threshold)
    }
}

impl Compare for &FaultModel {
    #[inline(always)]
    fn less(&self, x: Element, y: Element) -> bool {
        self.reports_less(x, y)
    }
}

/// Immutable persistent fault model. Cheap to share across threads.
#[derive(Debug, Clone)]
pub struct FaultModel {
    n: usize,
    p: f64,
    q: f64,
    seed: u64,
    mode: StorageMode,
    pair_probs: PairProbabilities,
    error_key: u64,
    prob_key: u64,
    p_threshold: u64,
    overrides: Option<HashMap<u64, f64>>,
    storage: Storage,
    kernel: Kernel,
}

/// Hot-path dispatch for [`FaultModel::reports_less`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Kernel {
    Exact,
    UniformPrf,
    General,
}

/// Builder for [`FaultModel`].
#[derive(Debug, Clone)]
pub struct FaultModelBuilder {
    n: usize,
    p: f64,
    q: f64,
    seed: u64,
    mode: StorageMode,
    pair_probs: PairProbabilities,
    matrix_cap: usize,
    overrides: HashMap<u64, f64>,
}

impl FaultModelBuilder {
    pub fn p(mut self, p: f64) -> Self {
        self.p = p;
        self
    }

    pub fn q(mut self, q: f64) -> Self {
        self.q = q;
        self
    }

    /// Sets `p = q = prob`.
    pub fn uniform(mut self, prob: f64) -> Self {
        self.p = prob;
        self.q = prob;
        self
    }

    pub fn seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn storage(mut self, mode: StorageMode) -> Self {
        self.mode = mode;
        self
    }

    pub fn pair_probabilities(mut self, mode: PairProbabilities) -> Self {
        self.pair_probs = mode;
        self
    }

    pub fn matrix_cap(mut self, cap: usize) -> Self {
        self.matrix_cap = cap;
        self
    }

    /// Pins the error probability of one unordered pair.
    pub fn pair_probability(mut self, x: Element, y: Element, prob: f64) -> Self {
        self.overrides.insert(pair_key(x, y), prob);
        self
    }

    pub fn build(self) -> Result<FaultModel> {
        let Self { n, p, q, seed, mode, pair_probs, matrix_cap, overrides } = self;
        if !(0.0..0.5).contains(&p) || p.is_nan() {
            return Err(Error::InvalidModel(format!("p={p} must lie in [0, 1/2)")));
        }
        if !(0.0..=p).contains(&q) {
            return Err(Error::InvalidModel(format!("q={q} must lie in [0, p={p}]")));
        }
        if n > u32::MAX as usize {
            return Err(Error::TooLarge { n, limit: u32::MAX as usize });
        }
        for (&key, &prob) in &overrides {
            let (lo, hi) = ((key >> 32) as usize, (key & 0xffff_ffff) as usize);
            if lo == hi || lo == 0 || hi > n {
                return Err(Error::InvalidModel(format!("override for pair ({lo}, {hi}) outside 1..={n}")));
            }
            if !(q..=p).contains(&prob) {
                return Err(Error::InvalidModel(format!("override probability {prob} outside [{q}, {p}]")));
            }
        }
        if mode == StorageMode::Matrix && n > matrix_cap {
            return Err(Error::MatrixTooLarge { n, cap: matrix_cap });
        }

        let mut model = FaultModel {
            n,
            p,
            q,
            seed,
            mode,
            pair_probs,
            error_key: mix64(seed ^ SEED_DOMAIN_ERROR),
            prob_key: mix64(seed ^ SEED_DOMAIN_PROB),
            p_threshold: threshold(p),
            overrides: (!overrides.is_empty()).then_some(overrides),
            storage: Storage::Prf,
            kernel: Kernel::General,
        };
        model.storage = match mode {
            StorageMode::Prf if p == 0.0 => Storage::Exact,
            StorageMode::Prf => Storage::Prf,
            StorageMode::Matrix => Storage::Matrix { bits: model.draw_matrix() },
        };
        model.kernel = match model.storage {
            Storage::Exact => Kernel::Exact,
            Storage::Prf if pair_probs == PairProbabilities::Uniform && model.overrides.is_none() => Kernel::UniformPrf,
            _ => Kernel::General,
        };
        Ok(model)
    }
}

impl FaultModel {
    pub fn builder(n: usize) -> FaultModelBuilder {
        FaultModelBuilder {
            n,
            p: 0.0,
            q: 0.0,
            seed: 0,
            mode: StorageMode::Prf,
            pair_probs: PairProbabilities::Uniform,
            matrix_cap: DEFAULT_MATRIX_CAP,
            overrides: HashMap::new(),
        }
    }

    /// Error-free comparator on `1..=n`.
    pub fn exact(n: usize) -> Self {
        Self::builder(n).build().expect("p = 0 is always valid")
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn q(&self) -> f64 {
        self.q
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn storage_mode(&self) -> StorageMode {
        self.mode
    }

    pub fn pair_mode(&self) -> PairProbabilities {
        self.pair_probs
    }

    /// The same model parameters keyed by a different seed.
    pub fn reseeded(&self, seed: u64) -> Result<Self> {
        let mut b = Self::builder(self.n)
            .p(self.p)
            .q(self.q)
            .seed(seed)
            .storage(self.mode)
            .pair_probabilities(self.pair_probs)
            .matrix_cap(usize::MAX);
        if let Some(ov) = &self.overrides {
            b.overrides = ov.clone();
        }
        b.build()
    }

    fn check(&self, x: Element) -> Result<()> {
        if x == 0 || x as usize > self.n {
            return Err(Error::ElementOutOfRange { element: x, n: self.n });
        }
        Ok(())
    }

    /// Observed relation of `x` to `y`.
    pub fn observe(&self, x: Element, y: Element) -> Result<OrderOutcome> {
        if x == y {
            return Err(Error::InvalidComparison(x));
        }
        self.check(x)?;
        self.check(y)?;
        Ok(if self.reports_less(x, y) {
            OrderOutcome::ReportedSmaller
        } else {
            OrderOutcome::ReportedLarger
        })
    }

    /// Error probability assigned to the pair `{x, y}`.
    pub fn pair_probability(&self, x: Element, y: Element) -> f64 {
        let key = pair_key(x, y);
        if let Some(prob) = self.overrides.as_ref().and_then(|o| o.get(&key)) {
            return *prob;
        }
        match self.pair_probs {
            PairProbabilities::Uniform => self.p,
            PairProbabilities::Sampled => {
                let u = mix64(key ^ self.prob_key) >> 11;
                self.q + (self.p - self.q) * (u as f64 / (1u64 << 53) as f64)
            }
        }
    }

    /// Whether the comparison of `{x, y}` reports the wrong order.
    /// Unchecked: `x != y`, both in `1..=n`.
    #[inline]
    pub fn is_flipped(&self, x: Element, y: Element) -> bool {
        match &self.storage {
            Storage::Exact => false,
            Storage::Prf => {
                let key = pair_key(x, y);
                let h = mix64(key ^ self.error_key);
                if self.pair_probs == PairProbabilities::Uniform && self.overrides.is_none() {
                    h < self.p_threshold
                } else {
                    h < threshold(self.pair_probability(x, y))
                }
            }
            Storage::Matrix { bits } => {
                let idx = self.pair_index(x, y);
                (bits[idx >> 6] >> (idx & 63)) & 1 == 1
            }
        }
    }

    /// `true` iff `x ≺ y` is observed. Unchecked fast path of [`observe`](Self::observe).
    #[inline]
    pub fn reports_less(&self, x: Element, y: Element) -> bool {
        match self.kernel {
            Kernel::Exact => x < y,
            Kernel::UniformPrf => (x < y) != (mix64(pair_key(x, y) ^ self.error_key) < self.p_threshold),
            Kernel::General => (x < y) != self.is_flipped(x, y),
        }
    }

    /// Runs `v` with the comparator specialized to this model's storage.
    pub fn dispatch<V: CompareVisitor>(&self, v: V) -> V::Output {
        match self.kernel {
            Kernel::Exact => v.visit(ExactCompare),
            Kernel::UniformPrf => v.visit(UniformCompare { key: self.error_key, threshold: self.p_threshold }),
            Kernel::General => v.visit(self),
        }
    }

    fn pair_index(&self, x: Element, y: Element) -> usize {
        let (lo, hi) = if x < y { (x as usize, y as usize) } else { (y as usize, x as usize) };
        let row = lo - 1;
        row * self.n - row * (row + 1) / 2 + (hi - lo - 1)
    }

    fn draw_matrix(&self) -> Vec<u64> {
        let pairs = self.n * self.n.saturating_sub(1) / 2;
        let mut bits = vec![0u64; pairs.div_ceil(64)];
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        let mut idx = 0usize;
        for lo in 1..=self.n as u32 {
            for hi in lo + 1..=self.n as u32 {
                let prob = match (&self.overrides, self.pair_probs) {
                    (None, PairProbabilities::Uniform) => self.p,
                    (Some(ov), _) if ov.contains_key(&pair_key(lo, hi)) => ov[&pair_key(lo, hi)],
                    (_, PairProbabilities::Uniform) => self.p,
                    (_, PairProbabilities::Sampled) => self.q + (self.p - self.q) * rng.random::<f64>(),
                };
                if rng.random::<f64>() < prob {
                    bits[idx >> 6] |= 1 << (idx & 63);
                }
                idx += 1;
            }
        }
        bits
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_error_reports_truth() {
        let m = FaultModel::exact(10);
        assert_eq!(m.observe(3, 7).unwrap(), OrderOutcome::ReportedSmaller);
        assert_eq!(m.observe(7, 3).unwrap(), OrderOutcome::ReportedLarger);
    }

    #[test]
    fn self_comparison_rejected() {
        let m = FaultModel::exact(10);
        assert_eq!(m.observe(4, 4), Err(Error::InvalidComparison(4)));
        assert!(matches!(m.observe(0, 4), Err(Error::ElementOutOfRange { .. })));
        assert!(matches!(m.observe(4, 11), Err(Error::ElementOutOfRange { .. })));
    }

    #[test]
    fn rejects_bad_probabilities() {
        assert!(FaultModel::builder(5).p(0.5).build().is_err());
        assert!(FaultModel::builder(5).p(0.1).q(0.2).build().is_err());
        assert!(FaultModel::builder(5).p(-0.1).build().is_err());
        assert!(FaultModel::builder(5).p(0.2).q(0.1).pair_probability(1, 2, 0.3).build().is_err());
    }

    #[test]
    fn matrix_cap_enforced() {
        let err = FaultModel::builder(5000).p(0.1).storage(StorageMode::Matrix).build();
        assert_eq!(err.unwrap_err(), Error::MatrixTooLarge { n: 5000, cap: DEFAULT_MATRIX_CAP });
        assert!(FaultModel::builder(64).p(0.1).storage(StorageMode::Matrix).matrix_cap(64).build().is_ok());
    }

    #[test]
    fn persistence_and_antisymmetry() {
        for mode in [StorageMode::Prf, StorageMode::Matrix] {
            let m = FaultModel::builder(200).uniform(0.3).seed(9).storage(mode).build().unwrap();
            for x in 1..=200u32 {
                for y in (1..=200u32).step_by(7) {
                    if x == y {
                        continue;
                    }
                    let a = m.observe(x, y).unwrap();
                    assert_eq!(a, m.observe(x, y).unwrap());
                    assert_eq!(a.flipped(), m.observe(y, x).unwrap());
                }
            }
        }
    }

    #[test]
    fn sampled_probabilities_stay_in_band() {
        let m = FaultModel::builder(100)
            .p(0.2)
            .q(0.05)
            .pair_probabilities(PairProbabilities::Sampled)
            .seed(3)
            .build()
            .unwrap();
        let mut lo = f64::MAX;
        let mut hi = f64::MIN;
        for x in 1..100u32 {
            for y in x + 1..=100 {
                let pr = m.pair_probability(x, y);
                assert!((0.05..=0.2).contains(&pr));
                lo = lo.min(pr);
                hi = hi.max(pr);
            }
        }
        assert!(lo < 0.06 && hi > 0.19);
    }

    #[test]
    fn overrides_apply() {
        let m = FaultModel::builder(10).p(0.4).q(0.0).pair_probability(2, 5, 0.0).seed(1).build().unwrap();
        assert_eq!(m.pair_probability(5, 2), 0.0);
        assert!(!m.is_flipped(2, 5));
        assert_eq!(m.pair_probability(1, 2), 0.4);
    }

    #[test]
    fn matrix_index_is_dense() {
        let m = FaultModel::builder(6).p(0.1).storage(StorageMode::Matrix).build().unwrap();
        let mut seen = vec![];
        for x in 1..=6u32 {
            for y in x + 1..=6 {
                seen.push(m.pair_index(x, y));
                assert_eq!(m.pair_index(x, y), m.pair_index(y, x));
            }
        }
        assert_eq!(seen, (0..15).collect::<Vec<_>>());
    }
}
