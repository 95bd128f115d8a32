use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::automaton::{Automaton, StateId, StateValue, TransitionSystem};
use crate::error::CoreError;
use crate::liveness::pair::IndexedPair;
use crate::state_set::StateSet;

/// An explicit relation between the states of a concrete automaton A and an
/// abstract automaton B.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StateRelation {
    image: Vec<Vec<StateId>>,
    inverse: Vec<Vec<StateId>>,
}

impl StateRelation {
    pub fn empty(na: usize, nb: usize) -> Self {
        StateRelation { image: vec![Vec::new(); na], inverse: vec![Vec::new(); nb] }
    }

    pub fn from_pairs(na: usize, nb: usize, pairs: impl IntoIterator<Item = (StateId, StateId)>) -> Self {
        let mut r = StateRelation::empty(na, nb);
        for (s, u) in pairs {
            r.insert(s, u);
        }
        r
    }

    pub fn from_fn<S: StateValue, T: StateValue>(a: &Automaton<S>, b: &Automaton<T>, f: impl Fn(&S, &T) -> bool) -> Self {
        let mut r = StateRelation::empty(a.num_states(), b.num_states());
        for s in 0..a.num_states() {
            for u in 0..b.num_states() {
                if f(a.state(s), b.state(u)) {
                    r.insert(s, u);
                }
            }
        }
        r
    }

    pub fn identity(n: usize) -> Self {
        StateRelation::from_pairs(n, n, (0..n).map(|s| (s, s)))
    }

    pub fn insert(&mut self, s: StateId, u: StateId) {
        if let Err(i) = self.image[s].binary_search(&u) {
            self.image[s].insert(i, u);
            let j = self.inverse[u].binary_search(&s).unwrap_err();
            self.inverse[u].insert(j, s);
        }
    }

    pub fn remove(&mut self, s: StateId, u: StateId) {
        if let Ok(i) = self.image[s].binary_search(&u) {
            self.image[s].remove(i);
            let j = self.inverse[u].binary_search(&s).expect("inverse is kept in sync");
            self.inverse[u].remove(j);
        }
    }

    pub fn concrete_size(&self) -> usize {
        self.image.len()
    }

    pub fn abstract_size(&self) -> usize {
        self.inverse.len()
    }

    /// g[s], ascending.
    pub fn image(&self, s: StateId) -> &[StateId] {
        &self.image[s]
    }

    pub fn inverse_image(&self, u: StateId) -> &[StateId] {
        &self.inverse[u]
    }

    pub fn contains(&self, s: StateId, u: StateId) -> bool {
        self.image[s].binary_search(&u).is_ok()
    }

    pub fn rows(&self) -> impl Iterator<Item = (StateId, StateId)> + '_ {
        self.image.iter().enumerate().flat_map(|(s, us)| us.iter().map(move |u| (s, *u)))
    }

    pub fn transpose(&self) -> StateRelation {
        StateRelation { image: self.inverse.clone(), inverse: self.image.clone() }
    }

    /// First state in `within` whose image is not a singleton.
    pub fn first_non_functional(&self, within: &StateSet) -> Option<StateId> {
        within.iter().find(|s| self.image[*s].len() != 1)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TargetTag {
    InL,
    ClaimedDerived,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PairTarget {
    pub pair: IndexedPair,
    pub tag: TargetTag,
}

/// h: pair ids of M to pairs over A.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct PairMap {
    pub targets: BTreeMap<String, PairTarget>,
}

impl PairMap {
    pub fn new() -> Self {
        PairMap::default()
    }

    pub fn insert(&mut self, q: &str, pair: IndexedPair, tag: TargetTag) {
        self.targets.insert(q.to_string(), PairTarget { pair, tag });
    }

    pub fn get(&self, q: &str) -> Option<&PairTarget> {
        self.targets.get(q)
    }

    /// Maps each pair of `m` to the pair of `l` with the same id.
    pub fn by_id(m: &[IndexedPair], l: &[IndexedPair]) -> Result<Self, CoreError> {
        let mut h = PairMap::new();
        for q in m {
            let p = l.iter().find(|p| p.id == q.id).ok_or_else(|| CoreError::UnknownPair(q.id.clone()))?;
            h.insert(&q.id, p.clone(), TargetTag::InL);
        }
        Ok(h)
    }

    /// Every pair of `m` must have a target.
    pub fn check_total(&self, m: &[IndexedPair]) -> Result<(), CoreError> {
        match m.iter().find(|q| !self.targets.contains_key(&q.id)) {
            Some(q) => Err(CoreError::Malformed(format!("pair map has no target for {}", q.id))),
            None => Ok(()),
        }
    }

    /// `(q, h(q))` in the order of `m`.
    pub fn links<'a>(&'a self, m: &'a [IndexedPair]) -> Vec<(&'a IndexedPair, &'a IndexedPair)> {
        m.iter().filter_map(|q| self.targets.get(&q.id).map(|t| (q, &t.pair))).collect()
    }
}

/// The object every simulation checker consumes.
#[derive(Clone, Debug)]
pub struct Candidate {
    pub g: StateRelation,
    pub h: PairMap,
    /// Defaults to the reachable states of A.
    pub inv_a: Option<StateSet>,
    /// Defaults to the reachable states of B.
    pub inv_b: Option<StateSet>,
    /// Fragment search length bound; defaults to |states(B)| · (|M| + 1).
    pub bound: Option<usize>,
}

impl Candidate {
    pub fn new(g: StateRelation) -> Self {
        Candidate { g, h: PairMap::new(), inv_a: None, inv_b: None, bound: None }
    }

    pub fn with_h(mut self, h: PairMap) -> Self {
        self.h = h;
        self
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum ImageFiniteness {
    Finite { largest: usize },
    /// The image of `state` kept growing with the exploration bound.
    Unbounded { state: String, sizes: Vec<usize> },
}

/// Probes image-finiteness of a relation into a programmatic abstract system
/// by exploring it under increasing bounds. An image that grows at every
/// bound while exploration remains partial is reported unbounded.
pub fn probe_image_finite<S: StateValue, T: TransitionSystem>(
    a: &Automaton<S>,
    b: &T,
    rel: &dyn Fn(&S, &T::State) -> bool,
    bounds: &[usize],
) -> ImageFiniteness {
    let explored: Vec<_> = bounds.iter().map(|k| crate::automaton::reachable_bounded(b, Some(*k))).collect();
    let mut largest = 0;
    for s in a.states() {
        let sizes: Vec<usize> = explored.iter().map(|r| r.states.iter().filter(|u| rel(s, u)).count()).collect();
        let growing = sizes.windows(2).all(|w| w[1] > w[0]);
        if bounds.len() >= 2 && growing && explored.last().is_some_and(|r| r.partial) {
            return ImageFiniteness::Unbounded { state: format!("{s:?}"), sizes };
        }
        largest = largest.max(sizes.last().copied().unwrap_or(0));
    }
    ImageFiniteness::Finite { largest }
}
