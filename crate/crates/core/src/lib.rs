//! Approximate sorting and rank search when comparisons are persistently
//! faulty.
//!
//! Every pair of elements has a fixed chance of being reported in the wrong
//! order, and asking again returns the same wrong answer. Exact sorting is
//! impossible in that setting, so the algorithms here minimize dislocation,
//! the distance between an element's output position and its true rank.
//!
//! * [`riffle_sort`] sorts in `O(n log n)` with `O(log n)` maximum and
//!   `O(n)` total dislocation.
//! * [`basket_sort`] repairs a sequence whose dislocation is already bounded.
//! * [`noisy_search`] estimates the rank of a new element in `O(log m)`.
//! * [`derand`] removes the external randomness by harvesting bits from the
//!   comparison errors themselves.

pub mod adversary;
pub mod basket_sort;
pub mod derand;
pub mod error;
pub mod model;
pub mod noisy_search;
pub mod par;
pub mod riffle_sort;
pub mod rng;
pub mod sequence;

pub use basket_sort::{basket_sort, BasketConfig, BasketOutcome, ShrinkRate};
pub use derand::{derand_riffle_sort, DerandConfig, DerandOutcome};
pub use error::{Error, Result};
pub use model::{Element, FaultModel, FaultModelBuilder, OrderOutcome, PairProbabilities, StorageMode};
pub use noisy_search::{noisy_search, NoisySearcher, RankEstimate, SearchConfig, SearchOutcome};
pub use par::Exec;
pub use riffle_sort::{riffle_sort, RiffleConfig, RiffleOutcome};
pub use rng::{BitSource, RngBits};
pub use sequence::{dislocation_report, DislocationReport, Sequence};
