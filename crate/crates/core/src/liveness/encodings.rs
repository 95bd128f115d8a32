//! Other acceptance conditions expressed as complemented pairs, plus the
//! history-variable transforms.

use crate::automaton::{ActionLabel, Automaton, AutomatonBuilder, StateValue, Step};
use crate::liveness::pair::{ComplementedPair, LivenessCondition, Region};

/// Büchi set G becomes the single pair ⟨true, G⟩.
pub fn buchi_to_pairs<S: StateValue>(green: Region<S>) -> LivenessCondition<S> {
    LivenessCondition::from_pairs(vec![ComplementedPair::new("buchi", Region::All, green)])
}

/// Generalized Büchi: one ⟨true, G_i⟩ per set.
pub fn gen_buchi_to_pairs<S: StateValue>(greens: Vec<Region<S>>) -> LivenessCondition<S> {
    LivenessCondition::from_pairs(
        greens
            .into_iter()
            .enumerate()
            .map(|(i, g)| ComplementedPair::new(&format!("buchi{i}"), Region::All, g))
            .collect(),
    )
}

/// ⟨true, fault ∨ good⟩: recover unless faults keep happening.
pub fn fault_tolerance_pair<S: StateValue>(good: Region<S>, fault: Region<S>) -> ComplementedPair<S> {
    ComplementedPair::new("fault-tolerance", Region::All, fault.union(good))
}

/// Adds a boolean history flag that is raised in states satisfying `p ∧ ¬q`
/// and lowered in `q` states (evaluated on the post-state, and on start
/// states). The pair ⟨flag, q⟩ then expresses "p leads to q".
pub fn leads_to_transform<S: StateValue>(
    a: &Automaton<S>,
    p: &Region<S>,
    q: &Region<S>,
) -> (Automaton<(S, bool)>, ComplementedPair<(S, bool)>) {
    let update = |s: &S, flag: bool| {
        if q.contains(s) {
            false
        } else if p.contains(s) {
            true
        } else {
            flag
        }
    };
    let mut b = AutomatonBuilder::new();
    for s in a.states() {
        b.push_state((s.clone(), false));
        b.push_state((s.clone(), true));
    }
    for &s0 in a.start() {
        let s = a.state(s0);
        b.push_start((s.clone(), update(s, false)));
    }
    push_signature(&mut b, a);
    for st in a.steps() {
        let (from, to) = (a.state(st.from), a.state(st.to));
        let text = a.action(st.action).text();
        for flag in [false, true] {
            b.push_step((from.clone(), flag), &text, (to.clone(), update(to, flag)));
        }
    }
    let q = q.clone();
    let pair = ComplementedPair::new(
        "leads-to",
        Region::pred("flag", |s: &(S, bool)| s.1),
        Region::pred("q", move |s: &(S, bool)| q.contains(&s.0)),
    );
    (b.build().expect("flag product is well-formed"), pair)
}

/// Name of the internal action that clears the non-always-silent flag.
pub const RESET_ACTION: &str = "reset_nas";

/// States become `(s, flag)`; steps outside `silent` raise the flag, steps in
/// `silent` and a fresh internal reset action lower it, so the flag holds
/// exactly after a non-silent step. Returns the pair ⟨true, flag⟩.
pub fn augment_nonalwayssilent<S: StateValue>(
    a: &Automaton<S>,
    silent: &[Step],
) -> (Automaton<(S, bool)>, ComplementedPair<(S, bool)>) {
    let mut b = AutomatonBuilder::new();
    for s in a.states() {
        b.push_state((s.clone(), false));
        b.push_state((s.clone(), true));
    }
    for &s0 in a.start() {
        b.push_start((a.state(s0).clone(), false));
    }
    push_signature(&mut b, a);
    b.push_internal(RESET_ACTION);
    for st in a.steps() {
        let (from, to) = (a.state(st.from), a.state(st.to));
        let text = a.action(st.action).text();
        let is_silent = silent.contains(st);
        for flag in [false, true] {
            b.push_step((from.clone(), flag), &text, (to.clone(), !is_silent));
        }
    }
    for s in a.states() {
        for flag in [false, true] {
            b.push_step((s.clone(), flag), RESET_ACTION, (s.clone(), false));
        }
    }
    let pair = ComplementedPair::new("nonalwayssilent", Region::All, Region::pred("flag", |s: &(S, bool)| s.1));
    (b.build().expect("flag product is well-formed"), pair)
}

fn push_signature<S: StateValue, T: StateValue>(b: &mut AutomatonBuilder<T>, a: &Automaton<S>) {
    for x in a.actions() {
        if x.is_external() {
            b.push_external(&x.text());
        } else {
            b.push_internal(&x.text());
        }
    }
}

/// A state of the forest automaton: the execution that led to it.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct History<S> {
    pub states: Vec<S>,
    pub actions: Vec<ActionLabel>,
}

/// Executions of `a` of length at most `depth`, each a separate state, so the
/// step graph is a forest. Construction stops at `depth`.
pub fn forestify<S: StateValue>(a: &Automaton<S>, depth: usize) -> Automaton<History<S>> {
    assert!(depth >= 1, "forestify needs depth >= 1");
    let mut b = AutomatonBuilder::new();
    push_signature(&mut b, a);
    let mut layer: Vec<(History<S>, usize)> = Vec::new();
    for &s0 in a.start() {
        let h = History { states: vec![a.state(s0).clone()], actions: Vec::new() };
        b.push_state(h.clone());
        b.push_start(h.clone());
        layer.push((h, s0));
    }
    for _ in 0..depth {
        let mut next = Vec::new();
        for (h, last) in &layer {
            for &i in a.out_steps(*last) {
                let st = a.steps()[i];
                let mut h2 = h.clone();
                h2.actions.push(a.action(st.action).clone());
                h2.states.push(a.state(st.to).clone());
                b.push_state(h2.clone());
                b.push_step(h.clone(), &a.action(st.action).text(), h2.clone());
                next.push((h2, st.to));
            }
        }
        layer = next;
    }
    b.build().expect("forest automaton is well-formed")
}
