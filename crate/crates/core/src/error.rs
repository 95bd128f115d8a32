use thiserror::Error;

use crate::automaton::{StateId, ValidationReport};

#[derive(Debug, Error)]
pub enum CoreError {
    #[error("invalid automaton: {0}")]
    Invalid(ValidationReport),
    #[error("cannot concatenate: fragment ends in {left} but next starts in {right}")]
    Concat { left: StateId, right: StateId },
    #[error("lasso cycle must contain at least one step")]
    EmptyCycle,
    #[error("lasso cycle must start and end at the last stem state")]
    OpenCycle,
    #[error("unknown state {0}")]
    UnknownState(String),
    #[error("unknown action {0}")]
    UnknownAction(String),
    #[error("unknown pair {0}")]
    UnknownPair(String),
    #[error("unknown predicate {0}")]
    UnknownPredicate(String),
    #[error("pair family over index domain {domain} cannot be instantiated finitely")]
    NotInstantiable { domain: String },
    #[error("automata do not share external actions: {0}")]
    ExternalMismatch(String),
    #[error("invariant {which} does not contain reachable state {state}")]
    InvariantNotInductive { which: &'static str, state: String },
    #[error("index mapping presentation rejected: {0}")]
    Presentation(String),
    #[error("lattice: {0}")]
    Lattice(String),
    #[error("malformed input: {0}")]
    Malformed(String),
    #[error("internal invariant breach: {0}")]
    Breach(String),
}
