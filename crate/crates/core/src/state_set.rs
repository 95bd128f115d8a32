use std::fmt;

use crate::automaton::StateId;

/// Dense bit set over the state indices of one automaton.
#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct StateSet {
    words: Vec<u64>,
    universe: usize,
}

impl StateSet {
    pub fn empty(universe: usize) -> Self {
        StateSet {
            words: vec![0; universe.div_ceil(64)],
            universe,
        }
    }

    pub fn full(universe: usize) -> Self {
        let mut set = StateSet::empty(universe);
        for id in 0..universe {
            set.insert(id);
        }
        set
    }

    pub fn from_ids(universe: usize, ids: impl IntoIterator<Item = StateId>) -> Self {
        let mut set = StateSet::empty(universe);
        for id in ids {
            set.insert(id);
        }
        set
    }

    pub fn universe(&self) -> usize {
        self.universe
    }

    pub fn contains(&self, id: StateId) -> bool {
        id < self.universe && self.words[id / 64] & (1 << (id % 64)) != 0
    }

    pub fn insert(&mut self, id: StateId) -> bool {
        assert!(id < self.universe, "state {id} outside universe {}", self.universe);
        let was = self.contains(id);
        self.words[id / 64] |= 1 << (id % 64);
        !was
    }

    pub fn remove(&mut self, id: StateId) {
        if id < self.universe {
            self.words[id / 64] &= !(1 << (id % 64));
        }
    }

    pub fn len(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.words.iter().all(|w| *w == 0)
    }

    pub fn iter(&self) -> impl Iterator<Item = StateId> + '_ {
        (0..self.universe).filter(move |id| self.contains(*id))
    }

    pub fn union_with(&mut self, other: &StateSet) {
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a |= *b;
        }
    }

    pub fn intersect_with(&mut self, other: &StateSet) {
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a &= *b;
        }
    }

    pub fn difference(&self, other: &StateSet) -> StateSet {
        let mut out = self.clone();
        for (a, b) in out.words.iter_mut().zip(&other.words) {
            *a &= !*b;
        }
        out
    }

    pub fn complement(&self) -> StateSet {
        StateSet::full(self.universe).difference(self)
    }

    pub fn intersects(&self, other: &StateSet) -> bool {
        self.words.iter().zip(&other.words).any(|(a, b)| a & b != 0)
    }

    pub fn is_subset(&self, other: &StateSet) -> bool {
        self.words.iter().zip(&other.words).all(|(a, b)| a & !b == 0)
    }
}

impl fmt::Debug for StateSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.iter()).finish()
    }
}
