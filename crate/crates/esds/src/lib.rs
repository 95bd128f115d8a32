//! ESDS case study: a replicated grow-only set run as an I/O automaton
//! composition, checked against its specifications by simulation.

pub mod checkers;
pub mod component;
pub mod config;
pub mod error;
pub mod lattices;
pub mod log;
pub mod model;
pub mod monitor;
pub mod ops;
pub mod scheduler;
pub mod system;

pub use error::EsdsError;
