//! Window-shrinking repair of almost sorted sequences.
//!
//! A round with window `w` cuts the sequence into baskets of `w` positions.
//! Each element of basket `i` is scored against the neighborhood `B` made of
//! baskets `i−3..=i+3`, placed at its score rank inside `B`, and the whole
//! sequence is then stably re-sorted by these tentative positions. The window
//! shrinks by `ρ` each round until it reaches zero.
//!
//! Scores only ever need comparisons between baskets at most six apart, so
//! by default every such basket pair is compared once per round and the
//! results are kept in a per-position table of 13 counters. That is about
//! `6.5·m·w` comparisons per round instead of `24.5·m·w` for scoring every
//! neighborhood from scratch; persistence makes both give the same answer.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{Compare, CompareVisitor, Element, FaultModel};
use crate::par::{self, Exec};

/// Baskets on each side of the scored basket.
const REACH: usize = 3;
/// Offsets `-6..=6` between two baskets that share a neighborhood.
const SPAN: usize = 2 * REACH;
const OFFSETS: usize = 2 * SPAN + 1;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ShrinkRate {
    rho: f64,
}

impl ShrinkRate {
    /// `ρ = 1/2 + (4pq + 5(p−q)) / (1−p−q)`.
    pub fn theoretical(p: f64, q: f64) -> Result<Self> {
        check_model(p, q)?;
        Ok(Self { rho: 0.5 + (4.0 * p * q + 5.0 * (p - q)) / (1.0 - p - q) })
    }

    /// A caller-chosen rate, which must lie in the admissible band.
    pub fn with_override(p: f64, q: f64, rho: f64) -> Result<Self> {
        check_model(p, q)?;
        let (lo, hi) = admissible_band(p, q);
        if !(rho > lo && rho < hi) {
            return Err(Error::Precondition(format!("shrink rate {rho} outside ({lo}, {hi})")));
        }
        Ok(Self { rho })
    }

    pub fn rho(self) -> f64 {
        self.rho
    }

    /// `⌊ρw⌋`.
    pub fn next(self, w: usize) -> usize {
        (self.rho * w as f64).floor() as usize
    }
}

/// Open interval of shrink rates for which the analysis goes through.
pub fn admissible_band(p: f64, q: f64) -> (f64, f64) {
    ((8.0 * p * q + 10.0 * (p - q)) / (1.0 - p - q), 1.0)
}

/// Largest `p` admissible for a given `q` is `(9q+1)/(8q+11)`, exclusive.
pub fn max_error_rate(q: f64) -> f64 {
    (9.0 * q + 1.0) / (8.0 * q + 11.0)
}

fn check_model(p: f64, q: f64) -> Result<()> {
    if !(0.0..=p).contains(&q) || p >= max_error_rate(q) {
        return Err(Error::ModelOutOfRange { p, q });
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scoring {
    /// One comparison per basket pair per round, shared by all neighborhoods.
    #[default]
    SharedTable,
    /// Full tournament inside every neighborhood.
    PerBasket,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct BasketConfig {
    /// Overrides the theoretical shrink rate.
    pub rho: Option<f64>,
    pub scoring: Scoring,
    pub exec: Exec,
    /// Keep per-round statistics in the outcome.
    pub record_rounds: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct RoundStats {
    pub w: usize,
    pub comparisons: u64,
    /// `max |τ_w(x) − σ_w(x)|`.
    pub max_tau_shift: usize,
    /// `max |σ_{⌊ρw⌋}(x) − τ_w(x)|`.
    pub max_settle_shift: usize,
    /// `max |σ_{⌊ρw⌋}(x) − σ_w(x)|`.
    pub max_round_shift: usize,
}

impl RoundStats {
    /// Whether the three per-round displacement bounds hold.
    pub fn within_bounds(&self) -> bool {
        self.max_tau_shift < 4 * self.w && self.max_settle_shift < 4 * self.w && self.max_round_shift < 8 * self.w
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BasketOutcome {
    pub items: Vec<Element>,
    pub comparisons: u64,
    pub rounds: usize,
    /// Per-round statistics when requested.
    pub round_stats: Vec<RoundStats>,
    pub rho: f64,
}

/// `score(x)` = number of `y ∈ B∖{x}` observed smaller than `x`.
/// Plays the full tournament on `B`.
pub fn score_basket(model: &FaultModel, b: &[Element]) -> Vec<u32> {
    let mut scores = vec![0u32; b.len()];
    for j in 0..b.len() {
        for k in j + 1..b.len() {
            if model.reports_less(b[j], b[k]) {
                scores[k] += 1;
            } else {
                scores[j] += 1;
            }
        }
    }
    scores
}

/// Geometry of one round.
#[derive(Clone, Copy)]
struct Baskets {
    m: usize,
    w: usize,
    count: usize,
}

impl Baskets {
    fn new(m: usize, w: usize) -> Self {
        Self { m, w, count: m.div_ceil(w) }
    }

    fn range(&self, b: usize) -> std::ops::Range<usize> {
        b * self.w..((b + 1) * self.w).min(self.m)
    }

    /// Baskets forming the neighborhood of basket `i`.
    fn hood(&self, i: usize) -> (usize, usize) {
        (i.saturating_sub(REACH), (i + REACH).min(self.count - 1))
    }
}

/// Elements per parallel task, so small windows do not pay per-basket
/// overhead.
const TASK_ELEMENTS: usize = 4096;

fn baskets_per_task(w: usize) -> usize {
    (TASK_ELEMENTS / w).max(1)
}

/// Counts `cnt[pos][δ+6]` of elements of basket `basket(pos)+δ` observed
/// smaller than the element at `pos`.
fn shared_table(model: &FaultModel, s: &[Element], g: Baskets, exec: Exec) -> (Vec<[u32; OFFSETS]>, u64) {
    model.dispatch(TableBuilder { s, g, exec })
}

struct TableBuilder<'a> {
    s: &'a [Element],
    g: Baskets,
    exec: Exec,
}

impl CompareVisitor for TableBuilder<'_> {
    type Output = (Vec<[u32; OFFSETS]>, u64);

    fn visit<C: Compare>(self, cmp: C) -> Self::Output {
        let Self { s, g, exec } = self;
        let per = baskets_per_task(g.w);
        // Each task owns baskets b0..b1 and also collects counts for the six
        // baskets after b1, which are added in afterwards.
        let parts = par::map_range(exec, g.count.div_ceil(per), |t| {
            let (b0, b1) = (t * per, ((t + 1) * per).min(g.count));
            let start = g.range(b0).start;
            let spill_end = g.range((b1 - 1 + SPAN).min(g.count - 1)).end;
            let mut rows = vec![[0u32; OFFSETS]; spill_end - start];
            let mut theirs = vec![0u32; g.w];
            let mut comparisons = 0u64;
            for b in b0..b1 {
                let mine = g.range(b);
                let own = &mut theirs[..mine.len()];
                own.fill(0);
                for j in mine.clone() {
                    let x = s[j];
                    let mut wins = 0u32;
                    for (t, &y) in own[j + 1 - mine.start..].iter_mut().zip(&s[j + 1..mine.end]) {
                        let less = cmp.less(x, y);
                        *t += u32::from(less);
                        wins += u32::from(!less);
                    }
                    rows[j - start][SPAN] += wins;
                }
                for (k, &c) in mine.clone().zip(own.iter()) {
                    rows[k - start][SPAN] += c;
                }
                comparisons += (mine.len() * (mine.len() - 1) / 2) as u64;
                for delta in 1..=SPAN.min(g.count - 1 - b) {
                    let other = g.range(b + delta);
                    let theirs = &mut theirs[..other.len()];
                    theirs.fill(0);
                    for j in mine.clone() {
                        let x = s[j];
                        let mut wins = 0u32;
                        for (t, &y) in theirs.iter_mut().zip(&s[other.clone()]) {
                            let less = cmp.less(x, y);
                            *t += u32::from(less);
                            wins += u32::from(!less);
                        }
                        rows[j - start][SPAN + delta] += wins;
                    }
                    for (k, &c) in other.clone().zip(theirs.iter()) {
                        rows[k - start][SPAN - delta] += c;
                    }
                    comparisons += (mine.len() * other.len()) as u64;
                }
            }
            (start, rows, comparisons)
        });
        let mut table = vec![[0u32; OFFSETS]; g.m];
        let mut comparisons = 0;
        for (start, rows, c) in parts {
            for (dst, src) in table[start..].iter_mut().zip(&rows) {
                for (a, b) in dst.iter_mut().zip(src) {
                    *a += b;
                }
            }
            comparisons += c;
        }
        (table, comparisons)
    }
}

/// Appends to `out` the 1-based rank inside `B` after a stable sort by
/// score, shifted by `offset`, for the positions `want` of `B`.
fn stable_ranks_into(scores: &[u32], want: std::ops::Range<usize>, offset: usize, next: &mut Vec<usize>, out: &mut Vec<usize>) {
    next.clear();
    next.resize(scores.len() + 1, 0);
    for &s in scores {
        next[s as usize + 1] += 1;
    }
    for i in 1..next.len() {
        next[i] += next[i - 1];
    }
    for (j, &s) in scores.iter().enumerate().take(want.end) {
        let r = next[s as usize];
        next[s as usize] += 1;
        if j >= want.start {
            out.push(offset + r + 1);
        }
    }
}

#[cfg(test)]
fn stable_ranks(scores: &[u32], want: std::ops::Range<usize>) -> Vec<usize> {
    let mut out = Vec::new();
    stable_ranks_into(scores, want, 0, &mut Vec::new(), &mut out);
    out
}

/// `τ_w` for every position, basket by basket.
fn tentative_positions(model: &FaultModel, s: &[Element], g: Baskets, scoring: Scoring, exec: Exec) -> (Vec<usize>, u64) {
    let per = baskets_per_task(g.w);
    let tasks = g.count.div_ceil(per);
    let (parts, comparisons): (Vec<Vec<usize>>, u64) = match scoring {
        Scoring::SharedTable => {
            let (table, comparisons) = shared_table(model, s, g, exec);
            let parts = par::map_range(exec, tasks, |t| {
                let mut out = Vec::with_capacity(per * g.w);
                let (mut scores, mut next) = (Vec::new(), Vec::new());
                for i in t * per..((t + 1) * per).min(g.count) {
                    let (lo, hi) = g.hood(i);
                    let start = g.range(lo).start;
                    scores.clear();
                    let end = g.range(hi).end;
                    for (j, row) in table[start..end].iter().enumerate().map(|(k, r)| (start + k, r)) {
                        let b = j / g.w;
                        scores.push(row[SPAN + lo - b..=SPAN + hi - b].iter().sum());
                    }
                    let mine = g.range(i);
                    stable_ranks_into(&scores, mine.start - start..mine.end - start, start, &mut next, &mut out);
                }
                out
            });
            (parts, comparisons)
        }
        Scoring::PerBasket => {
            let parts = par::map_range(exec, tasks, |t| {
                let mut out = Vec::with_capacity(per * g.w);
                let mut next = Vec::new();
                let mut comparisons = 0u64;
                for i in t * per..((t + 1) * per).min(g.count) {
                    let (lo, hi) = g.hood(i);
                    let start = g.range(lo).start;
                    let hood = &s[start..g.range(hi).end];
                    let scores = score_basket(model, hood);
                    comparisons += (hood.len() * (hood.len() - 1) / 2) as u64;
                    let mine = g.range(i);
                    stable_ranks_into(&scores, mine.start - start..mine.end - start, start, &mut next, &mut out);
                }
                (out, comparisons)
            });
            let comparisons = parts.iter().map(|p| p.1).sum();
            (parts.into_iter().map(|p| p.0).collect(), comparisons)
        }
    };
    (parts.concat(), comparisons)
}

/// One round at window `w`: returns `S_{⌊ρw⌋}` and its statistics.
pub fn basket_round(model: &FaultModel, s: &[Element], w: usize, scoring: Scoring, exec: Exec) -> (Vec<Element>, RoundStats) {
    let m = s.len();
    assert!(w >= 1 && w <= m.max(1), "window out of range");
    if m == 0 {
        return (Vec::new(), RoundStats { w, ..RoundStats::default() });
    }
    let (tau, comparisons) = tentative_positions(model, s, Baskets::new(m, w), scoring, exec);
    // Stable counting sort by τ ∈ [1, m].
    let mut slot = vec![0usize; m + 2];
    for &t in &tau {
        slot[t + 1] += 1;
    }
    for i in 1..slot.len() {
        slot[i] += slot[i - 1];
    }
    let mut order = vec![0usize; m];
    for (j, &t) in tau.iter().enumerate() {
        order[slot[t]] = j;
        slot[t] += 1;
    }
    let mut stats = RoundStats { w, comparisons, ..RoundStats::default() };
    let mut out = Vec::with_capacity(m);
    for (new_pos, &j) in order.iter().enumerate() {
        out.push(s[j]);
        stats.max_tau_shift = stats.max_tau_shift.max(tau[j].abs_diff(j + 1));
        stats.max_settle_shift = stats.max_settle_shift.max((new_pos + 1).abs_diff(tau[j]));
        stats.max_round_shift = stats.max_round_shift.max(new_pos.abs_diff(j));
    }
    debug_assert!(stats.within_bounds(), "round bounds violated: {stats:?}");
    (out, stats)
}

/// Repairs `s`, whose dislocation is assumed to be at most `w_s`.
pub fn basket_sort(model: &FaultModel, s: &[Element], w_s: usize, cfg: &BasketConfig) -> Result<BasketOutcome> {
    let rate = match cfg.rho {
        Some(rho) => ShrinkRate::with_override(model.p(), model.q(), rho)?,
        None => ShrinkRate::theoretical(model.p(), model.q())?,
    };
    let mut out = BasketOutcome { items: s.to_vec(), comparisons: 0, rounds: 0, round_stats: Vec::new(), rho: rate.rho() };
    let mut w = w_s.min(s.len());
    while w >= 1 {
        let (next, stats) = basket_round(model, &out.items, w, cfg.scoring, cfg.exec);
        out.items = next;
        out.comparisons += stats.comparisons;
        out.rounds += 1;
        if cfg.record_rounds {
            out.round_stats.push(stats);
        }
        w = rate.next(w);
    }
    Ok(out)
}
