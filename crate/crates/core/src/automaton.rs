//! Automata: states, start states, an external/internal signature and a step
//! relation. Explicit automata index their states densely; programmatic ones
//! implement [`TransitionSystem`] and are explored on demand.

use std::collections::{BTreeSet, HashMap, HashSet, VecDeque};
use std::fmt;
use std::hash::Hash;

use serde::{Deserialize, Serialize};

use crate::state_set::StateSet;

pub type StateId = usize;
pub type ActionId = usize;

/// Requirements on state values: structural equality, hashing and a total order
/// (the order only fixes deterministic output).
pub trait StateValue: Clone + Eq + Hash + Ord + fmt::Debug + Send + Sync + 'static {}
impl<T: Clone + Eq + Hash + Ord + fmt::Debug + Send + Sync + 'static> StateValue for T {}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ActionKind {
    External,
    Internal,
}

/// An action name with an optional payload, e.g. `request(q)`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ActionLabel {
    pub name: String,
    pub kind: ActionKind,
    pub payload: Option<String>,
}

impl ActionLabel {
    /// Parses `name` or `name(payload)`.
    pub fn parse(text: &str, kind: ActionKind) -> Self {
        let text = text.trim();
        if let (Some(open), true) = (text.find('('), text.ends_with(')')) {
            ActionLabel {
                name: text[..open].to_string(),
                kind,
                payload: Some(text[open + 1..text.len() - 1].to_string()),
            }
        } else {
            ActionLabel { name: text.to_string(), kind, payload: None }
        }
    }

    pub fn external(text: &str) -> Self {
        Self::parse(text, ActionKind::External)
    }

    pub fn internal(text: &str) -> Self {
        Self::parse(text, ActionKind::Internal)
    }

    pub fn is_external(&self) -> bool {
        self.kind == ActionKind::External
    }

    /// The textual form used in automaton files.
    pub fn text(&self) -> String {
        match &self.payload {
            Some(p) => format!("{}({})", self.name, p),
            None => self.name.clone(),
        }
    }
}

impl fmt::Display for ActionLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.text())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Step {
    pub from: StateId,
    pub action: ActionId,
    pub to: StateId,
}

/// A structural defect found by [`AutomatonBuilder::validate`].
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "violation", rename_all = "kebab-case")]
pub enum Violation {
    EmptyStart,
    SignatureOverlap { action: String },
    DuplicateState { state: String },
    UnknownStartState { state: String },
    UnknownAction { step: usize, action: String },
    DanglingEndpoint { step: usize, state: String },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::EmptyStart => write!(f, "empty start"),
            Violation::SignatureOverlap { action } => write!(f, "signature overlap on {action}"),
            Violation::DuplicateState { state } => write!(f, "duplicate state {state}"),
            Violation::UnknownStartState { state } => write!(f, "start state {state} is not a state"),
            Violation::UnknownAction { step, action } => {
                write!(f, "step {step} uses action {action} outside the signature")
            }
            Violation::DanglingEndpoint { step, state } => {
                write!(f, "dangling step endpoint {state} in step {step}")
            }
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_ok(&self) -> bool {
        self.violations.is_empty()
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_ok() {
            return write!(f, "ok");
        }
        let parts: Vec<String> = self.violations.iter().map(|v| v.to_string()).collect();
        write!(f, "{}", parts.join("; "))
    }
}

/// Collects the raw parts of an automaton; nothing is checked until
/// [`validate`](Self::validate) or [`build`](Self::build).
#[derive(Clone, Debug)]
pub struct AutomatonBuilder<S> {
    states: Vec<S>,
    start: Vec<S>,
    external: Vec<String>,
    internal: Vec<String>,
    steps: Vec<(S, String, S)>,
}

impl<S: StateValue> Default for AutomatonBuilder<S> {
    fn default() -> Self {
        Self::new()
    }
}

impl<S: StateValue> AutomatonBuilder<S> {
    pub fn new() -> Self {
        AutomatonBuilder {
            states: Vec::new(),
            start: Vec::new(),
            external: Vec::new(),
            internal: Vec::new(),
            steps: Vec::new(),
        }
    }

    pub fn state(mut self, s: S) -> Self {
        self.states.push(s);
        self
    }

    pub fn states(mut self, states: impl IntoIterator<Item = S>) -> Self {
        self.states.extend(states);
        self
    }

    pub fn start(mut self, s: S) -> Self {
        self.start.push(s);
        self
    }

    pub fn external(mut self, action: &str) -> Self {
        self.external.push(action.to_string());
        self
    }

    pub fn internal(mut self, action: &str) -> Self {
        self.internal.push(action.to_string());
        self
    }

    pub fn step(mut self, from: S, action: &str, to: S) -> Self {
        self.steps.push((from, action.to_string(), to));
        self
    }

    pub fn push_state(&mut self, s: S) {
        self.states.push(s);
    }

    pub fn push_start(&mut self, s: S) {
        self.start.push(s);
    }

    pub fn push_external(&mut self, action: &str) {
        self.external.push(action.to_string());
    }

    pub fn push_internal(&mut self, action: &str) {
        self.internal.push(action.to_string());
    }

    pub fn push_step(&mut self, from: S, action: &str, to: S) {
        self.steps.push((from, action.to_string(), to));
    }

    pub fn clear_start(mut self) -> Self {
        self.start.clear();
        self
    }

    pub fn validate(&self) -> ValidationReport {
        let mut violations = Vec::new();
        let mut known = HashSet::new();
        for s in &self.states {
            if !known.insert(s) {
                violations.push(Violation::DuplicateState { state: format!("{s:?}") });
            }
        }
        if self.start.is_empty() {
            violations.push(Violation::EmptyStart);
        }
        for s in &self.start {
            if !known.contains(s) {
                violations.push(Violation::UnknownStartState { state: format!("{s:?}") });
            }
        }
        let ext: BTreeSet<&String> = self.external.iter().collect();
        let int: BTreeSet<&String> = self.internal.iter().collect();
        for a in ext.intersection(&int) {
            violations.push(Violation::SignatureOverlap { action: (*a).clone() });
        }
        for (i, (from, a, to)) in self.steps.iter().enumerate() {
            let norm = ActionLabel::external(a).text();
            if !ext.iter().any(|x| ActionLabel::external(x).text() == norm)
                && !int.iter().any(|x| ActionLabel::external(x).text() == norm)
            {
                violations.push(Violation::UnknownAction { step: i, action: a.clone() });
            }
            for s in [from, to] {
                if !known.contains(s) {
                    violations.push(Violation::DanglingEndpoint { step: i, state: format!("{s:?}") });
                }
            }
        }
        ValidationReport { violations }
    }

    pub fn build(self) -> Result<Automaton<S>, ValidationReport> {
        let report = self.validate();
        if !report.is_ok() {
            return Err(report);
        }
        let mut index = HashMap::new();
        for (i, s) in self.states.iter().enumerate() {
            index.insert(s.clone(), i);
        }
        let mut actions = Vec::new();
        let mut action_index = HashMap::new();
        for (names, kind) in [(&self.external, ActionKind::External), (&self.internal, ActionKind::Internal)] {
            for n in names {
                let label = ActionLabel::parse(n, kind);
                if !action_index.contains_key(&label.text()) {
                    action_index.insert(label.text(), actions.len());
                    actions.push(label);
                }
            }
        }
        let mut start: Vec<StateId> = self.start.iter().map(|s| index[s]).collect();
        start.sort_unstable();
        start.dedup();
        let mut steps = Vec::new();
        let mut step_set = HashSet::new();
        for (from, a, to) in &self.steps {
            let step = Step {
                from: index[from],
                action: action_index[&ActionLabel::external(a).text()],
                to: index[to],
            };
            if step_set.insert(step) {
                steps.push(step);
            }
        }
        let mut out = vec![Vec::new(); self.states.len()];
        for (i, st) in steps.iter().enumerate() {
            out[st.from].push(i);
        }
        Ok(Automaton { states: self.states, index, start, actions, action_index, steps, step_set, out })
    }
}

/// An explicit finite automaton.
#[derive(Clone, Debug)]
pub struct Automaton<S = String> {
    states: Vec<S>,
    index: HashMap<S, StateId>,
    start: Vec<StateId>,
    actions: Vec<ActionLabel>,
    action_index: HashMap<String, ActionId>,
    steps: Vec<Step>,
    step_set: HashSet<Step>,
    out: Vec<Vec<usize>>,
}

impl<S: StateValue> Automaton<S> {
    pub fn builder() -> AutomatonBuilder<S> {
        AutomatonBuilder::new()
    }

    pub fn num_states(&self) -> usize {
        self.states.len()
    }

    pub fn states(&self) -> &[S] {
        &self.states
    }

    pub fn state(&self, id: StateId) -> &S {
        &self.states[id]
    }

    pub fn id_of(&self, s: &S) -> Option<StateId> {
        self.index.get(s).copied()
    }

    pub fn start(&self) -> &[StateId] {
        &self.start
    }

    pub fn is_start(&self, id: StateId) -> bool {
        self.start.binary_search(&id).is_ok()
    }

    pub fn start_set(&self) -> StateSet {
        StateSet::from_ids(self.num_states(), self.start.iter().copied())
    }

    pub fn actions(&self) -> &[ActionLabel] {
        &self.actions
    }

    pub fn action(&self, id: ActionId) -> &ActionLabel {
        &self.actions[id]
    }

    pub fn action_id(&self, text: &str) -> Option<ActionId> {
        self.action_index.get(&ActionLabel::external(text).text()).copied()
    }

    pub fn is_external(&self, id: ActionId) -> bool {
        self.actions[id].is_external()
    }

    /// External labels with their kinds erased to `External`.
    pub fn external_labels(&self) -> BTreeSet<ActionLabel> {
        self.actions.iter().filter(|a| a.is_external()).cloned().collect()
    }

    pub fn steps(&self) -> &[Step] {
        &self.steps
    }

    /// Indices into [`steps`](Self::steps) of the steps leaving `s`.
    pub fn out_steps(&self, s: StateId) -> &[usize] {
        &self.out[s]
    }

    pub fn has_step(&self, from: StateId, action: ActionId, to: StateId) -> bool {
        self.step_set.contains(&Step { from, action, to })
    }

    pub fn state_name(&self, id: StateId) -> String {
        format!("{:?}", self.states[id])
    }

    /// States reachable from `sources`.
    pub fn reachable_from(&self, sources: &[StateId]) -> StateSet {
        let mut seen = StateSet::empty(self.num_states());
        let mut queue = VecDeque::new();
        for &s in sources {
            if seen.insert(s) {
                queue.push_back(s);
            }
        }
        while let Some(s) = queue.pop_front() {
            for &i in &self.out[s] {
                let t = self.steps[i].to;
                if seen.insert(t) {
                    queue.push_back(t);
                }
            }
        }
        seen
    }

    pub fn reachable(&self) -> StateSet {
        self.reachable_from(&self.start)
    }

    /// Converts back to a builder, with states renamed through `f`.
    pub fn map_states<T: StateValue>(&self, f: impl Fn(&S) -> T) -> Automaton<T> {
        let mut b = AutomatonBuilder::new();
        for s in &self.states {
            b.push_state(f(s));
        }
        for &s in &self.start {
            b.push_start(f(&self.states[s]));
        }
        for a in &self.actions {
            match a.kind {
                ActionKind::External => b.push_external(&a.text()),
                ActionKind::Internal => b.push_internal(&a.text()),
            }
        }
        for st in &self.steps {
            b.push_step(f(&self.states[st.from]), &self.actions[st.action].text(), f(&self.states[st.to]));
        }
        b.build().expect("renaming must be injective")
    }

    /// Same external label sets (kinds compared, payloads included).
    pub fn same_externals<T: StateValue>(&self, other: &Automaton<T>) -> bool {
        self.external_labels() == other.external_labels()
    }
}

impl Automaton<String> {
    pub fn state_by_name(&self, name: &str) -> Option<StateId> {
        self.index.get(name).copied()
    }

    pub fn name(&self, id: StateId) -> &str {
        &self.states[id]
    }

    pub fn to_def(&self) -> AutomatonDef {
        AutomatonDef {
            states: self.states.clone(),
            start: self.start.iter().map(|s| self.states[*s].clone()).collect(),
            external: self.actions.iter().filter(|a| a.is_external()).map(|a| a.text()).collect(),
            internal: self.actions.iter().filter(|a| !a.is_external()).map(|a| a.text()).collect(),
            steps: self
                .steps
                .iter()
                .map(|st| {
                    [
                        self.states[st.from].clone(),
                        self.actions[st.action].text(),
                        self.states[st.to].clone(),
                    ]
                })
                .collect(),
        }
    }
}

/// The JSON automaton file format.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AutomatonDef {
    pub states: Vec<String>,
    pub start: Vec<String>,
    #[serde(default)]
    pub external: Vec<String>,
    #[serde(default)]
    pub internal: Vec<String>,
    #[serde(default)]
    pub steps: Vec<[String; 3]>,
}

impl AutomatonDef {
    pub fn to_builder(&self) -> AutomatonBuilder<String> {
        let mut b = AutomatonBuilder::new();
        for s in &self.states {
            b.push_state(s.clone());
        }
        for s in &self.start {
            b.push_start(s.clone());
        }
        for a in &self.external {
            b.push_external(a);
        }
        for a in &self.internal {
            b.push_internal(a);
        }
        for [s, a, t] in &self.steps {
            b.push_step(s.clone(), a, t.clone());
        }
        b
    }

    pub fn validate(&self) -> ValidationReport {
        self.to_builder().validate()
    }

    pub fn build(&self) -> Result<Automaton<String>, ValidationReport> {
        self.to_builder().build()
    }
}

/// A programmatic automaton: initial states plus an enabled-transitions producer.
pub trait TransitionSystem {
    type State: StateValue;
    type Action: Clone + fmt::Debug;

    fn initial_states(&self) -> Vec<Self::State>;
    fn successors(&self, s: &Self::State) -> Vec<(Self::Action, Self::State)>;
}

impl<S: StateValue> TransitionSystem for Automaton<S> {
    type State = S;
    type Action = ActionLabel;

    fn initial_states(&self) -> Vec<S> {
        self.start.iter().map(|s| self.states[*s].clone()).collect()
    }

    fn successors(&self, s: &S) -> Vec<(ActionLabel, S)> {
        match self.id_of(s) {
            Some(id) => self.out[id]
                .iter()
                .map(|i| {
                    let st = self.steps[i.to_owned()];
                    (self.actions[st.action].clone(), self.states[st.to].clone())
                })
                .collect(),
            None => Vec::new(),
        }
    }
}

/// Result of a bounded breadth-first exploration.
#[derive(Clone, Debug)]
pub struct Reachable<S> {
    /// States in discovery order.
    pub states: Vec<S>,
    /// True when the expansion budget ran out before the frontier emptied.
    pub partial: bool,
}

/// Breadth-first reachability with at most `bound` state expansions (`None`
/// for unbounded, which only terminates on finite systems).
pub fn reachable_bounded<T: TransitionSystem>(system: &T, bound: Option<usize>) -> Reachable<T::State> {
    let mut seen: HashSet<T::State> = HashSet::new();
    let mut order = Vec::new();
    let mut queue = VecDeque::new();
    for s in system.initial_states() {
        if seen.insert(s.clone()) {
            order.push(s.clone());
            queue.push_back(s);
        }
    }
    let mut expansions = 0;
    while let Some(s) = queue.pop_front() {
        if bound.is_some_and(|b| expansions >= b) {
            return Reachable { states: order, partial: true };
        }
        expansions += 1;
        for (_, t) in system.successors(&s) {
            if seen.insert(t.clone()) {
                order.push(t.clone());
                queue.push_back(t);
            }
        }
    }
    Reachable { states: order, partial: false }
}

/// Explores a programmatic system into an explicit automaton (bounded).
/// States discovered but not expanded are kept without outgoing steps.
pub fn explore<T: TransitionSystem>(
    system: &T,
    bound: Option<usize>,
    label: impl Fn(&T::Action) -> ActionLabel,
) -> (Automaton<T::State>, bool) {
    let reach = reachable_bounded(system, bound);
    let expanded = match bound {
        Some(b) => b.min(reach.states.len()),
        None => reach.states.len(),
    };
    let mut b = AutomatonBuilder::new();
    let mut known: HashSet<T::State> = HashSet::new();
    for s in &reach.states {
        known.insert(s.clone());
        b.push_state(s.clone());
    }
    for s in system.initial_states() {
        b.push_start(s);
    }
    let mut ext = BTreeSet::new();
    let mut int = BTreeSet::new();
    for s in reach.states.iter().take(expanded) {
        for (a, t) in system.successors(s) {
            if !known.contains(&t) {
                continue;
            }
            let l = label(&a);
            if l.is_external() {
                ext.insert(l.text());
            } else {
                int.insert(l.text());
            }
            b.push_step(s.clone(), &l.text(), t);
        }
    }
    for a in &ext {
        b.push_external(a);
    }
    for a in &int {
        b.push_internal(a);
    }
    (b.build().expect("explored automaton is well-formed"), reach.partial)
}
