//! Approximate rank search in an approximately sorted sequence.
//!
//! The sequence is cut into groups of `c·d` consecutive positions. Even and
//! odd groups each get a noisy binary search tree whose leaves are groups
//! and whose bottom `η` levels are single-child paths. Every vertex refers
//! to two shared pointer cells, `L` (left of its interval) and `R` (right of
//! it). Testing a vertex takes a majority of `k` comparisons on each side
//! and moves both pointers outward by `k`, so the query is never compared
//! against the same position twice while the pointers stay apart.
//!
//! The walk on each tree descends when exactly one child passes, climbs when
//! every child fails, and stays put otherwise. It stops at a leaf or after
//! the step budget. Vertices and pointer cells are created lazily, so a
//! query costs `O(log m)` regardless of `m`.

use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{Compare, CompareVisitor, Element, FaultModel};

/// Practical defaults for the majority width and group multiplier.
pub const PRACTICAL_K: usize = 5;
/// A padded leaf spans `c·2d = 8d` positions, the width of the default
/// repair window in riffle sort.
pub const PRACTICAL_C: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ConstantsMode {
    /// `k` from the error probability, `c = 250k`.
    Theoretical,
    /// Caller-supplied `k` and `c`.
    #[default]
    Practical,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchConfig {
    pub mode: ConstantsMode,
    /// Majority width in practical mode; must be odd.
    pub k: usize,
    /// Group-size multiplier in practical mode.
    pub c: usize,
    /// Overrides the `120⌈ln m⌉` step cap.
    pub walk_budget: Option<usize>,
    /// Count positions compared more than once per query.
    pub track_repeats: bool,
}

impl Default for SearchConfig {
    fn default() -> Self {
        Self { mode: ConstantsMode::Practical, k: PRACTICAL_K, c: PRACTICAL_C, walk_budget: None, track_repeats: false }
    }
}

impl SearchConfig {
    pub fn theoretical() -> Self {
        Self { mode: ConstantsMode::Theoretical, ..Self::default() }
    }
}

/// Smallest odd integer `k ≥ 32(1−p)/(1−2p)²`.
pub fn theoretical_k(p: f64) -> usize {
    let bound = 32.0 * (1.0 - p) / ((1.0 - 2.0 * p) * (1.0 - 2.0 * p));
    // Absorb rounding noise so exact integers (p = 0.1 gives 45) stay put.
    let mut k = (bound - 1e-9).ceil().max(1.0) as usize;
    if k.is_multiple_of(2) {
        k += 1;
    }
    k
}

/// `⌈ln m⌉`, zero for `m ≤ 1`.
pub fn ceil_ln(m: usize) -> usize {
    if m <= 1 {
        0
    } else {
        (m as f64).ln().ceil() as usize
    }
}

/// `⌈log₇ m⌉`, zero for `m ≤ 1`.
pub fn ceil_log7(m: usize) -> usize {
    let mut t = 0;
    let mut pow = 1usize;
    while pow < m {
        pow = pow.saturating_mul(7);
        t += 1;
    }
    t
}

/// Tail-path length `η = 2 + 4⌈log₇ m⌉`.
pub fn tail_length(m: usize) -> usize {
    2 + 4 * ceil_log7(m)
}

/// Default step cap `120⌈ln m⌉`.
pub fn default_walk_budget(m: usize) -> usize {
    120 * ceil_ln(m)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct WalkParams {
    pub k: usize,
    pub c: usize,
    pub eta: usize,
    pub walk_budget: usize,
    /// Dislocation bound after clamping to `⌈ln m⌉`.
    pub d: usize,
    pub mode: ConstantsMode,
    /// Whether the requested `d` was raised to `⌈ln m⌉`.
    pub d_clamped: bool,
}

impl WalkParams {
    pub fn build(m: usize, p: f64, d: usize, cfg: &SearchConfig) -> Result<Self> {
        if !(0.0..0.5).contains(&p) {
            return Err(Error::InvalidModel(format!("p={p} must lie in [0, 1/2)")));
        }
        if m == 0 {
            return Err(Error::Precondition("search sequence must be non-empty".into()));
        }
        if d == 0 {
            return Err(Error::Precondition("dislocation bound d must be >= 1".into()));
        }
        let (k, c) = match cfg.mode {
            ConstantsMode::Theoretical => {
                let k = theoretical_k(p);
                (k, 250 * k)
            }
            ConstantsMode::Practical => {
                if cfg.k.is_multiple_of(2) || cfg.c == 0 {
                    return Err(Error::Precondition(format!("k={} must be odd and c={} positive", cfg.k, cfg.c)));
                }
                (cfg.k, cfg.c)
            }
        };
        let floor = ceil_ln(m);
        Ok(Self {
            k,
            c,
            eta: tail_length(m),
            walk_budget: cfg.walk_budget.unwrap_or_else(|| default_walk_budget(m)),
            d: d.max(floor),
            mode: cfg.mode,
            d_clamped: d < floor,
        })
    }

    /// Re-derives the length-dependent constants for a padded length.
    fn for_length(&self, len: usize, d: usize, cfg: &SearchConfig) -> Self {
        Self {
            eta: tail_length(len),
            walk_budget: cfg.walk_budget.unwrap_or_else(|| default_walk_budget(len)),
            d,
            ..self.clone()
        }
    }

    pub fn group_size(&self) -> usize {
        self.c * self.d
    }
}

/// The sequence seen by the trees: real positions `1..=real_len`, then
/// dummy positions that always compare larger than the query.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PaddedView {
    pub real_len: usize,
    /// Logical length `2·c·d·2^h`.
    pub len: usize,
    /// Dislocation bound used by the trees (`2d` when padded).
    pub d: usize,
    pub h: u32,
    pub padded: bool,
}

/// Logical view of a length-`m` sequence as `2cd′·2^h` positions.
/// `None` when `m < 4cd`, where the search short-circuits.
pub fn pad_sequence(m: usize, d: usize, c: usize) -> Option<PaddedView> {
    let group = c * d;
    if m < 4 * group {
        return None;
    }
    if m.is_multiple_of(2 * group) && (m / (2 * group)).is_power_of_two() {
        let h = (m / (2 * group)).trailing_zeros();
        return Some(PaddedView { real_len: m, len: m, d, h, padded: false });
    }
    let d2 = 2 * d;
    let unit = 2 * c * d2;
    let mut h = 0u32;
    while unit << h < m {
        h += 1;
    }
    Some(PaddedView { real_len: m, len: unit << h, d: d2, h, padded: true })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Vertex {
    pub depth: u32,
    pub index: u64,
}

/// One of the two lazily built search trees.
#[derive(Debug, Clone)]
pub struct NoisyTree {
    parity: u64,
    h: u32,
    eta: u32,
    group: i64,
    d: i64,
    // Few cells are ever touched per query, so a scanned list beats hashing.
    left: Vec<(u64, i64)>,
    right: Vec<(u64, i64)>,
}

fn cell(cells: &mut Vec<(u64, i64)>, leaf: u64, start: i64) -> &mut i64 {
    let i = match cells.iter().position(|c| c.0 == leaf) {
        Some(i) => i,
        None => {
            cells.push((leaf, start));
            cells.len() - 1
        }
    };
    &mut cells[i].1
}

impl NoisyTree {
    pub fn new(parity: u8, view: &PaddedView, params: &WalkParams) -> Self {
        debug_assert!(parity < 2);
        Self {
            parity: u64::from(parity),
            h: view.h,
            eta: params.eta as u32,
            group: (params.c * view.d) as i64,
            d: view.d as i64,
            left: Vec::new(),
            right: Vec::new(),
        }
    }

    pub fn root(&self) -> Vertex {
        Vertex { depth: 0, index: 0 }
    }

    pub fn leaf_depth(&self) -> u32 {
        self.h + self.eta
    }

    pub fn is_leaf(&self, v: Vertex) -> bool {
        v.depth == self.leaf_depth()
    }

    pub fn parent(&self, v: Vertex) -> Option<Vertex> {
        match v.depth {
            0 => None,
            dep if dep > self.h => Some(Vertex { depth: dep - 1, index: v.index }),
            dep => Some(Vertex { depth: dep - 1, index: v.index >> 1 }),
        }
    }

    /// Children of `v`; the second slot is `None` below depth `h`.
    pub fn children(&self, v: Vertex) -> [Option<Vertex>; 2] {
        if v.depth >= self.leaf_depth() {
            [None, None]
        } else if v.depth < self.h {
            let d = v.depth + 1;
            [Some(Vertex { depth: d, index: 2 * v.index }), Some(Vertex { depth: d, index: 2 * v.index + 1 })]
        } else {
            [Some(Vertex { depth: v.depth + 1, index: v.index }), None]
        }
    }

    /// Indices of the first and last leaf below `v`.
    fn leaf_span(&self, v: Vertex) -> (u64, u64) {
        if v.depth >= self.h {
            (v.index, v.index)
        } else {
            let shift = self.h - v.depth;
            (v.index << shift, ((v.index + 1) << shift) - 1)
        }
    }

    fn group_of_leaf(&self, leaf: u64) -> i64 {
        (2 * leaf + self.parity) as i64
    }

    /// Inclusive 1-based position interval `I(v)`.
    pub fn interval(&self, v: Vertex) -> (i64, i64) {
        let (a, b) = self.leaf_span(v);
        (self.group_of_leaf(a) * self.group + 1, (self.group_of_leaf(b) + 1) * self.group)
    }

    fn left_cell(&mut self, leaf: u64) -> &mut i64 {
        let start = self.group_of_leaf(leaf) * self.group + 1 - self.d - 1;
        cell(&mut self.left, leaf, start)
    }

    fn right_cell(&mut self, leaf: u64) -> &mut i64 {
        let start = (self.group_of_leaf(leaf) + 1) * self.group + self.d;
        cell(&mut self.right, leaf, start)
    }

    /// Current `L(v)`, materializing the cell on first access.
    pub fn left_pointer(&mut self, v: Vertex) -> i64 {
        let (a, _) = self.leaf_span(v);
        *self.left_cell(a)
    }

    /// Current `R(v)`, materializing the cell on first access.
    pub fn right_pointer(&mut self, v: Vertex) -> i64 {
        let (_, b) = self.leaf_span(v);
        *self.right_cell(b)
    }

    /// Number of pointer cells created so far.
    pub fn materialized_cells(&self) -> usize {
        self.left.len() + self.right.len()
    }
}

/// Comparison access for one query: `x` against positions of `seq`, with
/// `−∞` below position 1 and `+∞` above the real length.
pub struct SearchProbe<'a, C: Compare = &'a FaultModel> {
    cmp: C,
    seq: &'a [Element],
    x: Element,
    comparisons: u64,
    seen: Option<HashSet<i64>>,
    repeats: u64,
}

impl<'a> SearchProbe<'a> {
    pub fn new(model: &'a FaultModel, seq: &'a [Element], x: Element, track_repeats: bool) -> Self {
        SearchProbe::with_compare(model, seq, x, track_repeats)
    }
}

impl<'a, C: Compare> SearchProbe<'a, C> {
    pub fn with_compare(cmp: C, seq: &'a [Element], x: Element, track_repeats: bool) -> Self {
        Self { cmp, seq, x, comparisons: 0, seen: track_repeats.then(HashSet::new), repeats: 0 }
    }

    /// Whether `x` is observed larger than the element at `pos`.
    #[inline]
    pub fn x_larger_than(&mut self, pos: i64) -> bool {
        if pos <= 0 {
            return true;
        }
        if pos as usize > self.seq.len() {
            return false;
        }
        self.comparisons += 1;
        if let Some(seen) = self.seen.as_mut() {
            if !seen.insert(pos) {
                self.repeats += 1;
            }
        }
        self.cmp.less(self.seq[pos as usize - 1], self.x)
    }

    pub fn comparisons(&self) -> u64 {
        self.comparisons
    }

    /// Positions compared more than once (needs `track_repeats`).
    pub fn repeated(&self) -> u64 {
        self.repeats
    }

    /// Distinct real positions compared so far (needs `track_repeats`).
    pub fn compared_positions(&self) -> Option<&HashSet<i64>> {
        self.seen.as_ref()
    }
}

/// Majority test of `x` against the elements addressed by `L(v)` and `R(v)`;
/// both pointers then move outward by `k`.
pub fn test_vertex<C: Compare>(probe: &mut SearchProbe<'_, C>, tree: &mut NoisyTree, v: Vertex, k: usize) -> bool {
    let (first, last) = tree.leaf_span(v);
    let lo = *tree.left_cell(first);
    let hi = *tree.right_cell(last);
    let mut left_votes = 0usize;
    let mut right_votes = 0usize;
    for t in 0..k as i64 {
        if probe.x_larger_than(lo - t) {
            left_votes += 1;
        }
    }
    for t in 0..k as i64 {
        if !probe.x_larger_than(hi + t) {
            right_votes += 1;
        }
    }
    *tree.left_cell(first) -= k as i64;
    *tree.right_cell(last) += k as i64;
    2 * left_votes > k && 2 * right_votes > k
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WalkResult {
    Success(Vertex),
    Timeout,
}

/// Walks from the root until a leaf is reached or `budget` steps elapse.
/// Returns the result and the number of steps taken.
pub fn random_walk<C: Compare>(probe: &mut SearchProbe<'_, C>, tree: &mut NoisyTree, k: usize, budget: usize) -> (WalkResult, usize) {
    let mut v = tree.root();
    let mut steps = 0;
    loop {
        if tree.is_leaf(v) {
            return (WalkResult::Success(v), steps);
        }
        if steps >= budget {
            return (WalkResult::Timeout, steps);
        }
        let mut passed = 0;
        let mut chosen = v;
        for child in tree.children(v).into_iter().flatten() {
            if test_vertex(probe, tree, child, k) {
                passed += 1;
                chosen = child;
            }
        }
        v = match passed {
            1 => chosen,
            0 => tree.parent(v).unwrap_or(v),
            _ => v,
        };
        steps += 1;
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SearchOutcome {
    FromWalk0,
    FromWalk1,
    BothTimeout,
    /// `m < 4cd`: midpoint returned without comparisons.
    ShortInput,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RankEstimate {
    /// Estimated rank in `[1, m+1]`.
    pub tau: usize,
    pub outcome: SearchOutcome,
    pub comparisons: u64,
    pub steps: [usize; 2],
    pub d_clamped: bool,
    pub padded: bool,
    /// Positions compared twice (only counted with `track_repeats`).
    pub repeated_comparisons: u64,
}

/// Searcher bound to one immutable sequence; queries are independent and
/// each owns its trees and pointer cells.
#[derive(Debug, Clone)]
pub struct NoisySearcher<'a> {
    model: &'a FaultModel,
    seq: &'a [Element],
    params: WalkParams,
    view: Option<PaddedView>,
    members: Vec<u64>,
    track_repeats: bool,
}

impl<'a> NoisySearcher<'a> {
    pub fn new(model: &'a FaultModel, seq: &'a [Element], d: usize, cfg: &SearchConfig) -> Result<Self> {
        let m = seq.len();
        let base = WalkParams::build(m, model.p(), d, cfg)?;
        let view = pad_sequence(m, base.d, base.c);
        let params = match view {
            Some(v) => base.for_length(v.len, v.d, cfg),
            None => base,
        };
        let mut members = vec![0u64; (model.n() + 1).div_ceil(64)];
        for &y in seq {
            let slot = members.get_mut(y as usize / 64).ok_or(Error::ElementOutOfRange { element: y, n: model.n() })?;
            *slot |= 1 << (y % 64);
        }
        Ok(Self { model, seq, params, view, members, track_repeats: cfg.track_repeats })
    }

    pub fn params(&self) -> &WalkParams {
        &self.params
    }

    pub fn view(&self) -> Option<&PaddedView> {
        self.view.as_ref()
    }

    /// `2·c·d` for the dislocation bound the trees actually use.
    pub fn accuracy_bound(&self) -> usize {
        2 * self.params.c * self.params.d
    }

    fn contains(&self, x: Element) -> bool {
        self.members.get(x as usize / 64).is_some_and(|w| (w >> (x % 64)) & 1 == 1)
    }

    pub fn search(&self, x: Element) -> Result<RankEstimate> {
        if x == 0 || x as usize > self.model.n() {
            return Err(Error::ElementOutOfRange { element: x, n: self.model.n() });
        }
        if self.contains(x) {
            return Err(Error::InvalidQuery(x));
        }
        let m = self.seq.len();
        let midpoint = (m + 2) / 2;
        let mut est = RankEstimate {
            tau: midpoint,
            outcome: SearchOutcome::ShortInput,
            comparisons: 0,
            steps: [0, 0],
            d_clamped: self.params.d_clamped,
            padded: self.view.is_some_and(|v| v.padded),
            repeated_comparisons: 0,
        };
        let Some(view) = self.view else {
            return Ok(est);
        };
        est.outcome = SearchOutcome::BothTimeout;
        self.model.dispatch(Walks { searcher: self, view, x, est })
    }
}

/// Both walks of one query, monomorphized over the comparator.
struct Walks<'s, 'a> {
    searcher: &'s NoisySearcher<'a>,
    view: PaddedView,
    x: Element,
    est: RankEstimate,
}

impl CompareVisitor for Walks<'_, '_> {
    type Output = Result<RankEstimate>;

    fn visit<C: Compare>(self, cmp: C) -> Self::Output {
        let Self { searcher, view, x, mut est } = self;
        let params = &searcher.params;
        let mut probe = SearchProbe::with_compare(cmp, searcher.seq, x, searcher.track_repeats);
        for parity in 0..2u8 {
            let mut tree = NoisyTree::new(parity, &view, params);
            let (res, steps) = random_walk(&mut probe, &mut tree, params.k, params.walk_budget);
            est.steps[parity as usize] = steps;
            if let WalkResult::Success(leaf) = res {
                let (lo, _) = tree.interval(leaf);
                est.tau = (lo as usize).min(searcher.seq.len() + 1);
                est.outcome = if parity == 0 { SearchOutcome::FromWalk0 } else { SearchOutcome::FromWalk1 };
                // T₀ wins ties, so T₁ only runs when T₀ timed out.
                break;
            }
        }
        est.comparisons = probe.comparisons();
        est.repeated_comparisons = probe.repeated();
        Ok(est)
    }
}

/// One-shot rank estimate of `x` in `seq` with dislocation bound `d`.
pub fn noisy_search(model: &FaultModel, seq: &[Element], x: Element, d: usize, cfg: &SearchConfig) -> Result<RankEstimate> {
    NoisySearcher::new(model, seq, d, cfg)?.search(x)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sorted_without(n: u32, x: u32) -> Vec<u32> {
        (1..=n).filter(|&y| y != x).collect()
    }

    #[test]
    fn theoretical_constants() {
        assert_eq!(theoretical_k(0.1), 45);
        assert_eq!(theoretical_k(0.0), 33);
        let p = WalkParams::build(1000, 0.1, 20, &SearchConfig::theoretical()).unwrap();
        assert_eq!((p.k, p.c), (45, 11250));
        assert_eq!(p.eta, 2 + 4 * 4);
        assert_eq!(p.walk_budget, 120 * 7);
    }

    #[test]
    fn practical_defaults_and_validation() {
        let p = WalkParams::build(100_000, 0.1, 3, &SearchConfig::default()).unwrap();
        assert_eq!((p.k, p.c, p.d), (5, 4, 12));
        assert!(p.d_clamped);
        assert!(WalkParams::build(10, 0.5, 3, &SearchConfig::default()).is_err());
        let even = SearchConfig { k: 4, ..SearchConfig::default() };
        assert!(WalkParams::build(10, 0.1, 3, &even).is_err());
    }

    #[test]
    fn ceil_helpers() {
        assert_eq!(ceil_log7(1), 0);
        assert_eq!(ceil_log7(7), 1);
        assert_eq!(ceil_log7(8), 2);
        assert_eq!(ceil_log7(49), 2);
        assert_eq!(ceil_ln(1), 0);
        assert_eq!(ceil_ln(3), 2);
    }

    #[test]
    fn padding_exact_and_minimal() {
        let (c, d) = (8, 4);
        // 2cd·2³
        let v = pad_sequence(2 * c * d * 8, d, c).unwrap();
        assert_eq!((v.len, v.h, v.d, v.padded), (512, 3, 4, false));
        assert!(pad_sequence(4 * c * d - 1, d, c).is_none());
        let m = 2 * c * d * 8 + 1;
        let v = pad_sequence(m, d, c).unwrap();
        // exhaustive scan for the smallest 2c(2d)·2^h ≥ m
        let best = (0..20).map(|h| (2 * c * (2 * d)) << h).find(|&len| len >= m).unwrap();
        assert_eq!((v.len, v.d, v.padded), (best, 2 * d, true));
    }

    #[test]
    fn short_input_returns_midpoint() {
        let m = FaultModel::exact(50);
        let seq = sorted_without(50, 7);
        let est = noisy_search(&m, &seq, 7, 4, &SearchConfig::default()).unwrap();
        assert_eq!(est.outcome, SearchOutcome::ShortInput);
        assert_eq!(est.tau, 25);
        assert_eq!(est.comparisons, 0);
    }

    #[test]
    fn query_in_sequence_rejected() {
        let m = FaultModel::exact(50);
        let seq: Vec<u32> = (1..=40).collect();
        assert_eq!(noisy_search(&m, &seq, 7, 4, &SearchConfig::default()).unwrap_err(), Error::InvalidQuery(7));
    }

    #[test]
    fn tree_shape_and_intervals() {
        let params = WalkParams { k: 3, c: 2, eta: 3, walk_budget: 10, d: 2, mode: ConstantsMode::Practical, d_clamped: false };
        let view = PaddedView { real_len: 32, len: 32, d: 2, h: 2, padded: false };
        let mut t = NoisyTree::new(1, &view, &params);
        let root = t.root();
        // groups of 4; tree 1 owns g1, g3, g5, g7
        assert_eq!(t.interval(root), (5, 32));
        let [a, b] = t.children(root);
        assert_eq!(t.interval(a.unwrap()), (5, 16));
        assert_eq!(t.interval(b.unwrap()), (21, 32));
        let leaf = Vertex { depth: 5, index: 2 };
        assert!(t.is_leaf(leaf));
        assert_eq!(t.interval(leaf), (21, 24));
        assert_eq!(t.parent(Vertex { depth: 3, index: 2 }), Some(Vertex { depth: 2, index: 2 }));
        assert_eq!(t.parent(Vertex { depth: 2, index: 3 }), Some(Vertex { depth: 1, index: 1 }));
        assert_eq!(t.children(Vertex { depth: 3, index: 1 }), [Some(Vertex { depth: 4, index: 1 }), None]);
        // L(root) shares the leftmost leaf's cell, R(root) the rightmost
        assert_eq!(t.left_pointer(root), 5 - 2 - 1);
        assert_eq!(t.right_pointer(root), 32 + 2);
        assert_eq!(t.left_pointer(Vertex { depth: 5, index: 0 }), 2);
    }

    #[test]
    fn test_moves_pointers_by_k() {
        let m = FaultModel::exact(200);
        let seq = sorted_without(129, 60);
        let params = WalkParams { k: 3, c: 4, eta: 2, walk_budget: 100, d: 4, mode: ConstantsMode::Practical, d_clamped: false };
        let view = pad_sequence(128, 4, 4).unwrap();
        let mut tree = NoisyTree::new(0, &view, &params);
        let mut probe = SearchProbe::new(&m, &seq, 60, false);
        let v = Vertex { depth: 1, index: 0 };
        let l0 = tree.left_pointer(v);
        test_vertex(&mut probe, &mut tree, v, 3);
        test_vertex(&mut probe, &mut tree, v, 3);
        assert_eq!(tree.left_pointer(v), l0 - 6);
    }

    #[test]
    fn test_pass_and_fail_without_errors() {
        let m = FaultModel::exact(300);
        // 256 positions, c=4, d=4 → groups of 16, h=3
        let x = 71u32;
        let seq = sorted_without(257, x);
        let params = WalkParams { k: 3, c: 4, eta: 2, walk_budget: 100, d: 4, mode: ConstantsMode::Practical, d_clamped: false };
        let view = pad_sequence(256, 4, 4).unwrap();
        assert!(!view.padded);
        let mut tree = NoisyTree::new(0, &view, &params);
        let mut probe = SearchProbe::new(&m, &seq, x, false);
        // leaf 2 of T0 covers g4 = positions 65..=80, rank of x is 71
        let good = Vertex { depth: 3, index: 2 };
        assert!(test_vertex(&mut probe, &mut tree, good, 3));
        // leaf 6 covers 193..=208: every addressed element exceeds x
        let far = Vertex { depth: 3, index: 6 };
        assert!(!test_vertex(&mut probe, &mut tree, far, 3));
    }

    #[test]
    fn zero_budget_times_out() {
        let m = FaultModel::exact(300);
        let seq = sorted_without(257, 71);
        let params = WalkParams { k: 3, c: 4, eta: 2, walk_budget: 0, d: 4, mode: ConstantsMode::Practical, d_clamped: false };
        let view = pad_sequence(256, 4, 4).unwrap();
        let mut tree = NoisyTree::new(0, &view, &params);
        let mut probe = SearchProbe::new(&m, &seq, 71, false);
        assert_eq!(random_walk(&mut probe, &mut tree, 3, 0), (WalkResult::Timeout, 0));
        assert_eq!(probe.comparisons(), 0);
    }

    #[test]
    fn error_free_walk_descends_to_the_right_leaf() {
        // Simulated error-free walk: the good child passes at every level.
        let m = FaultModel::exact(300);
        let x = 71u32;
        let seq = sorted_without(257, x);
        let params = WalkParams { k: 3, c: 4, eta: 2, walk_budget: 100, d: 4, mode: ConstantsMode::Practical, d_clamped: false };
        let view = pad_sequence(256, 4, 4).unwrap();
        let mut tree = NoisyTree::new(0, &view, &params);
        let mut probe = SearchProbe::new(&m, &seq, x, true);
        let (res, steps) = random_walk(&mut probe, &mut tree, 3, 100);
        assert_eq!(res, WalkResult::Success(Vertex { depth: 5, index: 2 }));
        assert_eq!(steps, 5);
        assert!(tree.materialized_cells() <= 2 * 8);
    }

    #[test]
    fn wide_groups_never_repeat_a_comparison() {
        // Pointers travel at most 2·budget·k < c·d, the gap between two
        // groups of one tree, as with the theoretical constants.
        let m = FaultModel::exact(1100);
        let (c, d, k, budget) = (64, 2, 3, 20);
        let params = WalkParams { k, c, eta: 6, walk_budget: budget, d, mode: ConstantsMode::Practical, d_clamped: false };
        let view = pad_sequence(1024, d, c).unwrap();
        assert_eq!(view.h, 2);
        for x in [1u32, 200, 300, 600, 1000, 1025] {
            let seq = sorted_without(1025, x);
            for parity in 0..2 {
                let mut tree = NoisyTree::new(parity, &view, &params);
                let mut probe = SearchProbe::new(&m, &seq, x, true);
                random_walk(&mut probe, &mut tree, k, budget);
                assert_eq!(probe.repeated(), 0, "x={x} parity={parity}");
                assert!(probe.comparisons() > 0);
            }
        }
    }

    #[test]
    fn error_free_search_within_two_cd() {
        let n = 4000u32;
        let model = FaultModel::exact(n as usize);
        let cfg = SearchConfig { track_repeats: true, ..SearchConfig::default() };
        for x in (1..=n).step_by(37) {
            let seq = sorted_without(n, x);
            let searcher = NoisySearcher::new(&model, &seq, 8, &cfg).unwrap();
            let est = searcher.search(x).unwrap();
            let rank = x as usize;
            assert!(est.tau.abs_diff(rank) < searcher.accuracy_bound(), "x={x} tau={}", est.tau);
            assert!((1..=seq.len() + 1).contains(&est.tau));
            let p = searcher.params();
            assert!(est.comparisons as usize <= 2 * p.walk_budget * 4 * p.k);
        }
    }
}
