//! Non-crossing set partitions: enumeration, Kreweras complements,
//! multiplicative functionals and the moment <-> free-cumulant transforms.
//!
//! Everything here is exact combinatorics on `{1..n}`; the free-probability
//! evaluator in [`crate::freelimit`] is built on top of these primitives.

mod partition;
mod transforms;

pub use partition::{
    enumerate_noncrossing, enumerate_noncrossing_pairings, kreweras_complement, PairPartition,
    SetPartition, DEFAULT_ENUMERATION_CAP,
};
pub use transforms::{
    free_cumulants_to_moments, moments_to_free_cumulants, multiplicative_functional,
    CumulantSequence, MomentSequence,
};
