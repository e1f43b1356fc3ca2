//! Permutations of `1..=n` and dislocation accounting.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::Element;

/// A permutation of `1..=n` with its inverse. Positions are 1-based.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Sequence {
    items: Vec<Element>,
    // positions[x] = 1-based position of x; index 0 unused.
    positions: Vec<u32>,
}

impl Sequence {
    pub fn new(items: Vec<Element>) -> Result<Self> {
        let n = items.len();
        let mut positions = vec![0u32; n + 1];
        for (i, &x) in items.iter().enumerate() {
            let slot = positions.get_mut(x as usize).filter(|_| x != 0).ok_or(Error::NotAPermutation(n))?;
            if *slot != 0 {
                return Err(Error::NotAPermutation(n));
            }
            *slot = (i + 1) as u32;
        }
        Ok(Self { items, positions })
    }

    pub fn identity(n: usize) -> Self {
        Self::new((1..=n as Element).collect()).expect("identity is a permutation")
    }

    pub fn reversed(n: usize) -> Self {
        Self::new((1..=n as Element).rev().collect()).expect("reversal is a permutation")
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    pub fn items(&self) -> &[Element] {
        &self.items
    }

    pub fn into_items(self) -> Vec<Element> {
        self.items
    }

    /// 1-based position of `x`.
    pub fn pos(&self, x: Element) -> usize {
        self.positions[x as usize] as usize
    }

    /// Rank of `x` in the sequence; elements are their own ranks.
    pub fn rank(&self, x: Element) -> usize {
        x as usize
    }

    pub fn is_sorted(&self) -> bool {
        self.items.iter().enumerate().all(|(i, &x)| x as usize == i + 1)
    }

    pub fn dislocation(&self, x: Element) -> usize {
        self.pos(x).abs_diff(self.rank(x))
    }

    pub fn dislocation_report(&self) -> DislocationReport {
        DislocationReport::from_displacements(self.items.iter().enumerate().map(|(i, &x)| (i + 1).abs_diff(x as usize)))
    }
}

impl AsRef<[Element]> for Sequence {
    fn as_ref(&self) -> &[Element] {
        &self.items
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct DislocationReport {
    pub max_dislocation: u64,
    pub total_dislocation: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub per_element: Option<Vec<u64>>,
}

impl DislocationReport {
    fn from_displacements(it: impl Iterator<Item = usize>) -> Self {
        let (mut max, mut total) = (0u64, 0u64);
        for d in it {
            max = max.max(d as u64);
            total += d as u64;
        }
        Self { max_dislocation: max, total_dislocation: total, per_element: None }
    }

    /// Keeps the per-element dislocations, indexed by position.
    pub fn detailed(seq: &Sequence) -> Self {
        let per: Vec<u64> = seq.items.iter().enumerate().map(|(i, &x)| (i + 1).abs_diff(x as usize) as u64).collect();
        let mut r = Self::from_displacements(per.iter().map(|&d| d as usize));
        r.per_element = Some(per);
        r
    }
}

/// Max and total dislocation of `seq`.
pub fn dislocation_report(seq: &Sequence) -> DislocationReport {
    seq.dislocation_report()
}

/// Dislocation of a sequence of distinct elements that need not be `1..=n`:
/// ranks are taken relative to the elements present.
pub fn slice_dislocation(items: &[Element]) -> DislocationReport {
    let mut sorted: Vec<(Element, usize)> = items.iter().copied().zip(0..).collect();
    sorted.sort_unstable();
    DislocationReport::from_displacements(sorted.iter().enumerate().map(|(rank, &(_, pos))| rank.abs_diff(pos)))
}

/// Number of elements of `items` smaller than `x`, plus one.
pub fn rank_in(items: &[Element], x: Element) -> usize {
    1 + items.iter().filter(|&&y| y < x).count()
}

/// Permutation check for sequences of distinct elements drawn from `1..=n`.
pub fn is_permutation_of(a: &[Element], b: &[Element]) -> bool {
    if a.len() != b.len() {
        return false;
    }
    let mut x = a.to_vec();
    let mut y = b.to_vec();
    x.sort_unstable();
    y.sort_unstable();
    x == y
}
