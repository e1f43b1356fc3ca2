//! Error-correlated input orders for stress runs.

use crate::error::{Error, Result};
use crate::model::{Element, FaultModel};
use crate::sequence::Sequence;

/// Largest instance for which the full `C(n, 2)` tournament is played.
pub const MAX_TOURNAMENT_N: usize = 1 << 15;

/// Observed out-degree of every element in the full noisy tournament:
/// `wins[x]` counts the `y` with `y ≺ x` observed. Index 0 unused.
pub fn tournament_wins(model: &FaultModel, n: usize) -> Vec<u32> {
    let mut wins = vec![0u32; n + 1];
    for x in 1..=n as Element {
        for y in x + 1..=n as Element {
            if model.reports_less(x, y) {
                wins[y as usize] += 1;
            } else {
                wins[x as usize] += 1;
            }
        }
    }
    wins
}

/// Orders `1..=n` by descending observed win count (ties by value), so the
/// input order is a function of the comparison errors.
pub fn adversarial_order(model: &FaultModel, n: usize) -> Result<Sequence> {
    if n == 0 {
        return Err(Error::Precondition("adversarial order needs n >= 1".into()));
    }
    if n > MAX_TOURNAMENT_N {
        return Err(Error::TooLarge { n, limit: MAX_TOURNAMENT_N });
    }
    if n > model.n() {
        return Err(Error::ElementOutOfRange { element: n as Element, n: model.n() });
    }
    let wins = tournament_wins(model, n);
    let mut items: Vec<Element> = (1..=n as Element).collect();
    items.sort_by(|&a, &b| wins[b as usize].cmp(&wins[a as usize]).then(a.cmp(&b)));
    Sequence::new(items)
}
