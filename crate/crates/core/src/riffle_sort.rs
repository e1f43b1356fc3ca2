//! `O(n log n)` approximate sorting.
//!
//! The input is shuffled and split into batches of geometrically growing
//! size. The first batch is repaired directly by basket sort; every later
//! batch is inserted into the current sorted prefix at ranks estimated by
//! noisy search, and the enlarged sequence is repaired by basket sort with
//! a window proportional to the search accuracy.

use serde::{Deserialize, Serialize};

use crate::basket_sort::{basket_sort, BasketConfig};
use crate::derand::random_subset;
use crate::error::{Error, Result};
use crate::model::{Element, FaultModel};
use crate::noisy_search::{ceil_ln, theoretical_k, ConstantsMode, NoisySearcher, SearchConfig, SearchOutcome};
use crate::par::{self, Exec};
use crate::rng::{fisher_yates, BitSource, RngBits};

/// Inputs shorter than this go straight to basket sort.
pub const SMALL_INPUT: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PartitionMethod {
    /// Shuffle a vector of batch labels.
    #[default]
    Direct,
    /// Draw `T_k, …, T_1` as uniform subsets of what is left; `T_0` is the rest.
    Subset,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RiffleConfig {
    pub mode: ConstantsMode,
    /// Search constants; the mode field here is ignored in favor of `mode`.
    pub search: SearchConfig,
    /// Practical search bound `d = c_d·⌈ln n⌉`.
    pub c_d: usize,
    /// Practical repair window `γ_eff·d`.
    pub gamma_eff: usize,
    /// Theoretical search bound `d = ⌈b_max·ln n⌉`.
    pub b_max: f64,
    pub assume_independent_order: bool,
    pub partition: PartitionMethod,
    pub basket: BasketConfig,
    pub exec: Exec,
}

impl Default for RiffleConfig {
    fn default() -> Self {
        Self {
            mode: ConstantsMode::Practical,
            search: SearchConfig::default(),
            c_d: 3,
            gamma_eff: 8,
            b_max: 1.0,
            assume_independent_order: false,
            partition: PartitionMethod::Direct,
            basket: BasketConfig::default(),
            exec: Exec::default(),
        }
    }
}

impl RiffleConfig {
    pub fn theoretical() -> Self {
        Self { mode: ConstantsMode::Theoretical, search: SearchConfig::theoretical(), ..Self::default() }
    }

    /// Search bound and repair window for `n` elements at error rate `p`.
    pub fn windows(&self, n: usize, p: f64) -> (usize, usize) {
        match self.mode {
            ConstantsMode::Practical => {
                let d = (self.c_d * ceil_ln(n)).max(1);
                (d, self.gamma_eff * d)
            }
            ConstantsMode::Theoretical => {
                let d = ((self.b_max * (n as f64).ln()).ceil() as usize).max(1);
                let alpha = 1000 * theoretical_k(p);
                (d, (226 * alpha).saturating_mul(d))
            }
        }
    }
}

/// Batch sizes `|T_0| = ⌈√n⌉`, `|T_i| = 2^{i−1}⌈√n⌉` for `0 < i < k`, and
/// the remainder in `T_k`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BatchPlan {
    pub k: usize,
    pub sizes: Vec<usize>,
}

impl BatchPlan {
    pub fn new(n: usize) -> Self {
        if n == 0 {
            return Self { k: 0, sizes: vec![] };
        }
        let s0 = ceil_sqrt(n);
        let mut k = 0;
        while s0 << k < n {
            k += 1;
        }
        let mut sizes = vec![s0.min(n)];
        for i in 1..k {
            sizes.push(s0 << (i - 1));
        }
        if k >= 1 {
            sizes.push(n - (s0 << (k - 1)));
        }
        Self { k, sizes }
    }
}

fn ceil_sqrt(n: usize) -> usize {
    let mut r = (n as f64).sqrt() as usize;
    while r * r < n {
        r += 1;
    }
    while r > 0 && (r - 1) * (r - 1) >= n {
        r -= 1;
    }
    r
}

/// Splits `s` into the planned batches; each batch keeps `s` order.
pub fn partition_batches<B: BitSource + ?Sized>(s: &[Element], plan: &BatchPlan, method: PartitionMethod, src: &mut B) -> Result<Vec<Vec<Element>>> {
    match method {
        PartitionMethod::Direct => {
            let mut labels: Vec<usize> = plan.sizes.iter().enumerate().flat_map(|(i, &c)| std::iter::repeat_n(i, c)).collect();
            fisher_yates(&mut labels, src)?;
            let mut batches: Vec<Vec<Element>> = plan.sizes.iter().map(|&c| Vec::with_capacity(c)).collect();
            for (&x, &l) in s.iter().zip(&labels) {
                batches[l].push(x);
            }
            Ok(batches)
        }
        PartitionMethod::Subset => {
            let mut rest = s.to_vec();
            let mut batches = vec![Vec::new(); plan.sizes.len()];
            for i in (1..plan.sizes.len()).rev() {
                let picked = random_subset(&rest, plan.sizes[i], src)?;
                let mut keep = vec![true; rest.len()];
                for &j in &picked.indices {
                    keep[j] = false;
                }
                batches[i] = picked.indices.iter().map(|&j| rest[j]).collect();
                rest = rest.iter().zip(&keep).filter(|(_, &k)| k).map(|(&x, _)| x).collect();
            }
            if let Some(first) = batches.first_mut() {
                *first = rest;
            }
            Ok(batches)
        }
    }
}

/// Inserts every `(x, r)` so that `x` lands just before the element
/// currently at rank `r`; equal ranks keep the order of `inserts`.
/// Out-of-range ranks are clamped; the second value counts them.
pub fn batch_insert(base: &[Element], inserts: &[(Element, usize)]) -> (Vec<Element>, usize) {
    let m = base.len();
    let mut clamped = 0;
    let mut sorted: Vec<(usize, Element)> = inserts
        .iter()
        .map(|&(x, r)| {
            let c = r.clamp(1, m + 1);
            clamped += usize::from(c != r);
            (c, x)
        })
        .collect();
    sorted.sort_by_key(|&(r, _)| r);
    let mut out = Vec::with_capacity(m + inserts.len());
    let mut it = sorted.into_iter().peekable();
    for slot in 1..=m + 1 {
        while let Some(&(_, x)) = it.peek().filter(|(r, _)| *r == slot) {
            out.push(x);
            it.next();
        }
        if slot <= m {
            out.push(base[slot - 1]);
        }
    }
    (out, clamped)
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct RiffleOutcome {
    pub items: Vec<Element>,
    pub comparisons: u64,
    pub search_comparisons: u64,
    pub basket_comparisons: u64,
    pub batches: usize,
    pub search_timeouts: u64,
    pub clamped_ranks: usize,
    pub d_search: usize,
    pub repair_window: usize,
    pub bits_consumed: u64,
    /// Input below [`SMALL_INPUT`], sorted by basket sort alone.
    pub small_input: bool,
}

/// Sorts `s` with randomness from a ChaCha stream keyed by `seed`.
pub fn riffle_sort(model: &FaultModel, s: &[Element], cfg: &RiffleConfig, seed: u64) -> Result<RiffleOutcome> {
    riffle_sort_with(model, s, cfg, &mut RngBits::new(seed))
}

/// Sorts `s` drawing all randomness from `src`.
pub fn riffle_sort_with<B: BitSource + ?Sized>(model: &FaultModel, s: &[Element], cfg: &RiffleConfig, src: &mut B) -> Result<RiffleOutcome> {
    let n = s.len();
    let bits_before = src.bits_consumed();
    let mut out = RiffleOutcome::default();
    if n < SMALL_INPUT {
        let b = basket_sort(model, s, n, &cfg.basket)?;
        out.items = b.items;
        out.basket_comparisons = b.comparisons;
        out.comparisons = b.comparisons;
        out.small_input = true;
        return Ok(out);
    }
    let mut shuffled = s.to_vec();
    if !cfg.assume_independent_order {
        fisher_yates(&mut shuffled, src)?;
    }
    let plan = BatchPlan::new(n);
    let batches = partition_batches(&shuffled, &plan, cfg.partition, src)?;
    out.bits_consumed = src.bits_consumed() - bits_before;
    drop(shuffled);

    let (d_search, window) = cfg.windows(n, model.p());
    out.d_search = d_search;
    out.repair_window = window;
    out.batches = batches.len();
    let search_cfg = SearchConfig { mode: cfg.mode, ..cfg.search.clone() };

    let first = basket_sort(model, &batches[0], batches[0].len(), &cfg.basket)?;
    out.basket_comparisons += first.comparisons;
    let mut current = first.items;
    for batch in &batches[1..] {
        let searcher = NoisySearcher::new(model, &current, d_search, &search_cfg)?;
        let estimates = par::map_slice(cfg.exec, batch, |&x| searcher.search(x));
        let mut inserts = Vec::with_capacity(batch.len());
        for (&x, est) in batch.iter().zip(estimates) {
            let est = est?;
            out.search_comparisons += est.comparisons;
            out.search_timeouts += u64::from(est.outcome == SearchOutcome::BothTimeout);
            inserts.push((x, est.tau));
        }
        let (merged, clamped) = batch_insert(&current, &inserts);
        out.clamped_ranks += clamped;
        if merged.len() != current.len() + batch.len() {
            return Err(Error::Precondition("batch insertion lost elements".into()));
        }
        let repaired = basket_sort(model, &merged, window, &cfg.basket)?;
        out.basket_comparisons += repaired.comparisons;
        current = repaired.items;
    }
    out.items = current;
    out.comparisons = out.search_comparisons + out.basket_comparisons;
    Ok(out)
}
