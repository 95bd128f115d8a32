use std::collections::BTreeSet;
use std::fmt;
use std::sync::Arc;

use crate::automaton::{Automaton, StateId, StateValue};
use crate::error::CoreError;
use crate::execution::Lasso;
use crate::state_set::StateSet;

pub type Predicate<S> = Arc<dyn Fn(&S) -> bool + Send + Sync>;

/// A set of states given either explicitly or by a membership predicate.
#[derive(Clone)]
pub enum Region<S> {
    All,
    Empty,
    States(BTreeSet<S>),
    Pred { name: String, test: Predicate<S> },
}

impl<S: StateValue> Region<S> {
    pub fn states(states: impl IntoIterator<Item = S>) -> Self {
        Region::States(states.into_iter().collect())
    }

    pub fn pred(name: &str, test: impl Fn(&S) -> bool + Send + Sync + 'static) -> Self {
        Region::Pred { name: name.to_string(), test: Arc::new(test) }
    }

    pub fn contains(&self, s: &S) -> bool {
        match self {
            Region::All => true,
            Region::Empty => false,
            Region::States(set) => set.contains(s),
            Region::Pred { test, .. } => test(s),
        }
    }

    /// The region as a bit set over `a`'s states.
    pub fn index(&self, a: &Automaton<S>) -> StateSet {
        StateSet::from_ids(a.num_states(), (0..a.num_states()).filter(|id| self.contains(a.state(*id))))
    }

    pub fn union(self, other: Region<S>) -> Region<S> {
        Region::Pred {
            name: format!("{self:?} | {other:?}"),
            test: Arc::new(move |s| self.contains(s) || other.contains(s)),
        }
    }
}

impl<S: fmt::Debug> fmt::Debug for Region<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Region::All => write!(f, "true"),
            Region::Empty => write!(f, "false"),
            Region::States(s) => f.debug_set().entries(s.iter()).finish(),
            Region::Pred { name, .. } => write!(f, "{name}"),
        }
    }
}

/// ⟨Red, Green⟩: infinitely many red states force infinitely many green ones.
#[derive(Clone, Debug)]
pub struct ComplementedPair<S> {
    pub id: String,
    pub red: Region<S>,
    pub green: Region<S>,
}

impl<S: StateValue> ComplementedPair<S> {
    pub fn new(id: &str, red: Region<S>, green: Region<S>) -> Self {
        ComplementedPair { id: id.to_string(), red, green }
    }

    pub fn index(&self, a: &Automaton<S>) -> IndexedPair {
        IndexedPair { id: self.id.clone(), red: self.red.index(a), green: self.green.index(a) }
    }
}

/// A pair resolved against one explicit automaton.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct IndexedPair {
    pub id: String,
    pub red: StateSet,
    pub green: StateSet,
}

impl IndexedPair {
    pub fn new(id: &str, red: StateSet, green: StateSet) -> Self {
        IndexedPair { id: id.to_string(), red, green }
    }

    pub fn from_ids(
        id: &str,
        n: usize,
        red: impl IntoIterator<Item = StateId>,
        green: impl IntoIterator<Item = StateId>,
    ) -> Self {
        IndexedPair::new(id, StateSet::from_ids(n, red), StateSet::from_ids(n, green))
    }

    /// Same red and green sets, ignoring the id.
    pub fn same_sets(&self, other: &IndexedPair) -> bool {
        self.red == other.red && self.green == other.green
    }
}

/// One pair per index value, e.g. one per query `x`.
#[derive(Clone)]
pub struct PairFamily<S> {
    pub name: String,
    pub domain: String,
    /// Index values mentioned by a state; `None` when they cannot be listed.
    pub indices: Arc<dyn Fn(&S) -> Option<Vec<String>> + Send + Sync>,
    pub make: Arc<dyn Fn(&str) -> ComplementedPair<S> + Send + Sync>,
}

impl<S> fmt::Debug for PairFamily<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "PairFamily({} over {})", self.name, self.domain)
    }
}

/// Explicit pairs plus indexed families, instantiated lazily.
#[derive(Clone, Debug, Default)]
pub struct LivenessCondition<S> {
    pub pairs: Vec<ComplementedPair<S>>,
    pub families: Vec<PairFamily<S>>,
}

impl<S: StateValue> LivenessCondition<S> {
    pub fn empty() -> Self {
        LivenessCondition { pairs: Vec::new(), families: Vec::new() }
    }

    pub fn from_pairs(pairs: Vec<ComplementedPair<S>>) -> Self {
        LivenessCondition { pairs, families: Vec::new() }
    }

    pub fn with_family(mut self, family: PairFamily<S>) -> Self {
        self.families.push(family);
        self
    }

    /// All explicit pairs plus every family member whose index occurs in `states`.
    pub fn instantiate<'a>(&self, states: impl IntoIterator<Item = &'a S>) -> Result<Vec<ComplementedPair<S>>, CoreError> {
        let mut out = self.pairs.clone();
        if self.families.is_empty() {
            return Ok(out);
        }
        let states: Vec<&S> = states.into_iter().collect();
        for fam in &self.families {
            let mut idx = BTreeSet::new();
            for s in &states {
                match (fam.indices)(s) {
                    Some(v) => idx.extend(v),
                    None => return Err(CoreError::NotInstantiable { domain: fam.domain.clone() }),
                }
            }
            for i in idx {
                out.push((fam.make)(&i));
            }
        }
        Ok(out)
    }

    /// Instantiates over every state of `a` and resolves to bit sets.
    pub fn index_on(&self, a: &Automaton<S>) -> Result<Vec<IndexedPair>, CoreError> {
        Ok(self.instantiate(a.states().iter())?.iter().map(|p| p.index(a)).collect())
    }
}

/// □◇Red ⇒ □◇Green on a lasso: only the cycle matters.
pub fn satisfies_pair(l: &Lasso, p: &IndexedPair) -> bool {
    let red = l.cycle_states().any(|s| p.red.contains(s));
    let green = l.cycle_states().any(|s| p.green.contains(s));
    !red || green
}

pub fn is_live(l: &Lasso, pairs: &[IndexedPair]) -> bool {
    pairs.iter().all(|p| satisfies_pair(l, p))
}

/// Liveness against a condition whose families are instantiated over the
/// states the lasso visits.
pub fn is_live_condition<S: StateValue>(l: &Lasso, a: &Automaton<S>, cond: &LivenessCondition<S>) -> Result<bool, CoreError> {
    let visited: Vec<&S> = l.stem.states.iter().chain(&l.cycle.states).map(|s| a.state(*s)).collect();
    let pairs = cond.instantiate(visited)?;
    Ok(pairs.iter().all(|p| satisfies_pair(l, &p.index(a))))
}
