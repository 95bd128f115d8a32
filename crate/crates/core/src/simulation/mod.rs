//! Simulation relations between automata, with and without liveness.

pub mod checks;
pub mod correspondence;
pub mod fragment;
pub mod relation;
pub mod report;

pub use checks::{
    always_silent_transitions, check_backward_sim, check_forward_sim, check_history, check_image_finite,
    check_live_backward_sim, check_live_forward_sim, check_live_history, check_live_prophecy, check_live_refinement,
    check_prophecy, check_refinement, default_bound, replay_backward_step, replay_forward_step,
    sometimes_silent_transitions, verify_invariant, Certificates, Confidence, Problem,
};
pub use correspondence::{
    build_correspondence_backward, build_correspondence_forward, build_induced_digraph, validate_correspondence,
    Correspondence, CorrespondenceFailure, InducedDigraph,
};
pub use relation::{probe_image_finite, Candidate, ImageFiniteness, PairMap, PairTarget, StateRelation, TargetTag};
pub use report::{CheckReport, ClauseResult, Counterexample, StepRef, Verdict};
