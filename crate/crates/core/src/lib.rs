//! Liveness-preserving refinement checks for automata with complemented-pairs
//! liveness conditions.
//!
//! The crate works on explicit finite automata ([`Automaton`]) and decides
//! questions about their infinite behavior through lassos. Programmatic
//! automata implement [`TransitionSystem`] and can be explored into explicit
//! ones up to a bound.

pub mod automaton;
pub mod error;
pub mod execution;
pub mod fixtures;
pub mod format;
pub mod lattice;
pub mod liveness;
pub mod mapping;
pub mod simulation;
pub mod state_set;
pub mod streett;
pub mod testing;

pub use automaton::{
    ActionId, ActionKind, ActionLabel, Automaton, AutomatonBuilder, AutomatonDef, StateId, StateValue, Step,
    TransitionSystem, ValidationReport, Violation,
};
pub use error::CoreError;
pub use execution::{is_execution, lasso_trace, Fragment, Lasso, Trace};
pub use state_set::StateSet;
