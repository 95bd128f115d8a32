//! Execution fragments, lassos and traces.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::automaton::{ActionId, ActionLabel, Automaton, StateId, StateValue};
use crate::error::CoreError;

/// `s0 a1 s1 ... an sn`, stored as `n + 1` states and `n` actions.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Fragment {
    pub states: Vec<StateId>,
    pub actions: Vec<ActionId>,
}

impl Fragment {
    pub fn single(s: StateId) -> Self {
        Fragment { states: vec![s], actions: Vec::new() }
    }

    pub fn push(&mut self, action: ActionId, to: StateId) {
        self.actions.push(action);
        self.states.push(to);
    }

    pub fn len(&self) -> usize {
        self.actions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.actions.is_empty()
    }

    pub fn fstate(&self) -> StateId {
        self.states[0]
    }

    pub fn lstate(&self) -> StateId {
        *self.states.last().expect("fragment has at least one state")
    }

    /// `self ⌢ other`; defined only when `lstate(self) = fstate(other)`.
    pub fn concat(&self, other: &Fragment) -> Result<Fragment, CoreError> {
        if self.lstate() != other.fstate() {
            return Err(CoreError::Concat { left: self.lstate(), right: other.fstate() });
        }
        let mut out = self.clone();
        out.actions.extend_from_slice(&other.actions);
        out.states.extend_from_slice(&other.states[1..]);
        Ok(out)
    }

    /// `(s_{i}, a_{i+1}, s_{i+1})` triples.
    pub fn triples(&self) -> impl Iterator<Item = (StateId, ActionId, StateId)> + '_ {
        self.actions.iter().enumerate().map(move |(i, a)| (self.states[i], *a, self.states[i + 1]))
    }

    /// Every step conforms to the transition relation.
    pub fn conforms<S: StateValue>(&self, a: &Automaton<S>) -> bool {
        self.states.len() == self.actions.len() + 1
            && self.states.iter().all(|s| *s < a.num_states())
            && self.triples().all(|(s, x, t)| a.has_step(s, x, t))
    }
}

/// True iff `frag` starts in a start state and every step is a step of `a`.
pub fn is_execution<S: StateValue>(frag: &Fragment, a: &Automaton<S>) -> bool {
    !frag.states.is_empty() && a.is_start(frag.fstate()) && frag.conforms(a)
}

/// The infinite execution `stem ⌢ cycle ⌢ cycle ⌢ ...`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Lasso {
    pub stem: Fragment,
    pub cycle: Fragment,
}

impl Lasso {
    pub fn new(stem: Fragment, cycle: Fragment) -> Result<Self, CoreError> {
        if cycle.is_empty() {
            return Err(CoreError::EmptyCycle);
        }
        if cycle.fstate() != cycle.lstate() || cycle.fstate() != stem.lstate() {
            return Err(CoreError::OpenCycle);
        }
        Ok(Lasso { stem, cycle })
    }

    pub fn stem_len(&self) -> usize {
        self.stem.len()
    }

    pub fn cycle_len(&self) -> usize {
        self.cycle.len()
    }

    /// State at position `i` of the infinite execution.
    pub fn state_at(&self, i: usize) -> StateId {
        if i < self.stem.len() {
            self.stem.states[i]
        } else {
            self.cycle.states[(i - self.stem.len()) % self.cycle.len()]
        }
    }

    /// Action `a_i` leading into position `i` (`i >= 1`).
    pub fn action_at(&self, i: usize) -> ActionId {
        assert!(i >= 1, "position 0 has no incoming action");
        if i <= self.stem.len() {
            self.stem.actions[i - 1]
        } else {
            self.cycle.actions[(i - 1 - self.stem.len()) % self.cycle.len()]
        }
    }

    /// Position class: positions in the stem map to themselves, cycle positions
    /// are folded into `stem_len .. stem_len + cycle_len`.
    pub fn class_of(&self, i: usize) -> usize {
        if i < self.stem.len() {
            i
        } else {
            self.stem.len() + (i - self.stem.len()) % self.cycle.len()
        }
    }

    pub fn num_classes(&self) -> usize {
        self.stem.len() + self.cycle.len()
    }

    /// Successor of a position class.
    pub fn next_class(&self, c: usize) -> usize {
        self.class_of(c + 1)
    }

    /// `stem ⌢ cycle^n`.
    pub fn unroll(&self, n: usize) -> Fragment {
        let mut f = self.stem.clone();
        for _ in 0..n {
            f = f.concat(&self.cycle).expect("cycle closes on the stem");
        }
        f
    }

    /// States visited infinitely often.
    pub fn cycle_states(&self) -> impl Iterator<Item = StateId> + '_ {
        self.cycle.states[..self.cycle.len()].iter().copied()
    }

    pub fn is_lasso_of<S: StateValue>(&self, a: &Automaton<S>) -> bool {
        is_execution(&self.stem, a) && self.cycle.conforms(a)
    }

    /// Replaces the cycle by its primitive root, e.g. `t t` becomes `t`.
    pub fn primitive_cycle(&self) -> Fragment {
        let n = self.cycle.len();
        for d in 1..=n {
            if n % d != 0 {
                continue;
            }
            let ok = (0..n).all(|i| {
                self.cycle.actions[i] == self.cycle.actions[i % d] && self.cycle.states[i] == self.cycle.states[i % d]
            });
            if ok {
                return Fragment {
                    states: self.cycle.states[..=d].to_vec(),
                    actions: self.cycle.actions[..d].to_vec(),
                };
            }
        }
        unreachable!("d = n always divides")
    }

    pub fn describe<S: StateValue>(&self, a: &Automaton<S>) -> LassoReport {
        LassoReport {
            stem: describe_fragment(&self.stem, a),
            cycle: describe_fragment(&self.cycle, a),
        }
    }
}

/// A fragment rendered with state and action names.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, serde::Deserialize)]
pub struct FragmentReport {
    pub states: Vec<String>,
    pub actions: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, serde::Deserialize)]
pub struct LassoReport {
    pub stem: FragmentReport,
    pub cycle: FragmentReport,
}

pub fn describe_fragment<S: StateValue>(f: &Fragment, a: &Automaton<S>) -> FragmentReport {
    FragmentReport {
        states: f.states.iter().map(|s| plain_name(a, *s)).collect(),
        actions: f.actions.iter().map(|x| a.action(*x).text()).collect(),
    }
}

/// State name without the quoting `Debug` adds to strings.
pub fn plain_name<S: StateValue>(a: &Automaton<S>, s: StateId) -> String {
    let n = a.state_name(s);
    n.strip_prefix('"').and_then(|x| x.strip_suffix('"')).map(str::to_string).unwrap_or(n)
}

impl FragmentReport {
    /// Resolves names back into a fragment of `a`.
    pub fn resolve(&self, a: &Automaton<String>) -> Result<Fragment, CoreError> {
        let states = self
            .states
            .iter()
            .map(|s| a.state_by_name(s).ok_or_else(|| CoreError::UnknownState(s.clone())))
            .collect::<Result<Vec<_>, _>>()?;
        let actions = self
            .actions
            .iter()
            .map(|x| a.action_id(x).ok_or_else(|| CoreError::UnknownAction(x.clone())))
            .collect::<Result<Vec<_>, _>>()?;
        if states.len() != actions.len() + 1 {
            return Err(CoreError::Malformed("fragment needs one more state than actions".into()));
        }
        Ok(Fragment { states, actions })
    }
}

impl LassoReport {
    pub fn resolve(&self, a: &Automaton<String>) -> Result<Lasso, CoreError> {
        Lasso::new(self.stem.resolve(a)?, self.cycle.resolve(a)?)
    }
}

/// A finite or ultimately periodic sequence of external labels, kept in
/// canonical form so that equality is syntactic.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Trace {
    pub prefix: Vec<ActionLabel>,
    /// Empty for finite traces.
    pub period: Vec<ActionLabel>,
}

impl Trace {
    pub fn finite(word: Vec<ActionLabel>) -> Self {
        Trace { prefix: word, period: Vec::new() }
    }

    /// `prefix · period^ω` in canonical form: primitive period, shortest
    /// prefix whose period is the lexicographically least rotation.
    pub fn periodic(prefix: Vec<ActionLabel>, period: Vec<ActionLabel>) -> Self {
        if period.is_empty() {
            return Trace::finite(prefix);
        }
        let mut u = prefix;
        let mut v = primitive_root(period);
        while !u.is_empty() && u.last() == v.last() {
            u.pop();
            v.rotate_right(1);
        }
        let k = least_rotation(&v);
        u.extend_from_slice(&v[..k]);
        v.rotate_left(k);
        Trace { prefix: u, period: v }
    }

    pub fn is_finite(&self) -> bool {
        self.period.is_empty()
    }

    /// The first `n` letters (fewer if the trace is finite and shorter).
    pub fn take(&self, n: usize) -> Vec<ActionLabel> {
        let mut out: Vec<ActionLabel> = self.prefix.iter().take(n).cloned().collect();
        if !self.period.is_empty() {
            let mut i = 0;
            while out.len() < n {
                out.push(self.period[i % self.period.len()].clone());
                i += 1;
            }
        }
        out
    }

    /// Letter at position `i`, if any.
    pub fn letter(&self, i: usize) -> Option<&ActionLabel> {
        if i < self.prefix.len() {
            Some(&self.prefix[i])
        } else if self.period.is_empty() {
            None
        } else {
            Some(&self.period[(i - self.prefix.len()) % self.period.len()])
        }
    }

    pub fn render(&self) -> String {
        let join = |w: &[ActionLabel]| w.iter().map(|a| a.text()).collect::<Vec<_>>().join(" ");
        if self.is_finite() {
            format!("<{}>", join(&self.prefix))
        } else if self.prefix.is_empty() {
            format!("({})^w", join(&self.period))
        } else {
            format!("{} ({})^w", join(&self.prefix), join(&self.period))
        }
    }
}

fn primitive_root(v: Vec<ActionLabel>) -> Vec<ActionLabel> {
    let n = v.len();
    for d in 1..=n {
        if n % d == 0 && (0..n).all(|i| v[i] == v[i % d]) {
            return v[..d].to_vec();
        }
    }
    v
}

fn least_rotation(v: &[ActionLabel]) -> usize {
    let n = v.len();
    (0..n)
        .min_by(|&a, &b| {
            let ra = v[a..].iter().chain(&v[..a]);
            let rb = v[b..].iter().chain(&v[..b]);
            ra.cmp(rb)
        })
        .unwrap_or(0)
}

/// External labels along a fragment.
pub fn fragment_trace<S: StateValue>(f: &Fragment, a: &Automaton<S>) -> Vec<ActionLabel> {
    f.actions.iter().filter(|x| a.is_external(**x)).map(|x| a.action(*x).clone()).collect()
}

/// Trace of a lasso; finite when the cycle is all-internal.
pub fn lasso_trace<S: StateValue>(l: &Lasso, a: &Automaton<S>) -> Trace {
    let prefix = fragment_trace(&l.stem, a);
    let period = fragment_trace(&l.cycle, a);
    Trace::periodic(prefix, period)
}

/// Deduplication key for lassos: multiset of the primitive cycle's states plus
/// the canonical trace.
pub fn lasso_key<S: StateValue>(l: &Lasso, a: &Automaton<S>) -> (BTreeMap<StateId, usize>, Trace) {
    let prim = l.primitive_cycle();
    let mut counts = BTreeMap::new();
    for s in &prim.states[..prim.len()] {
        *counts.entry(*s).or_insert(0) += 1;
    }
    (counts, lasso_trace(l, a))
}
