//! Complemented pairs, liveness conditions, the □/◇ fragment and encodings of
//! other acceptance conditions.

pub mod encodings;
pub mod formula;
pub mod pair;

pub use encodings::{
    augment_nonalwayssilent, buchi_to_pairs, fault_tolerance_pair, forestify, gen_buchi_to_pairs, leads_to_transform,
    History,
};
pub use formula::{eval_formula, Formula};
pub use pair::{
    is_live, is_live_condition, satisfies_pair, ComplementedPair, IndexedPair, LivenessCondition, PairFamily, Predicate,
    Region,
};
