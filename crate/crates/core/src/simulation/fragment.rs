//! Breadth-first search for abstract fragments matching one concrete step.

use std::collections::{HashMap, VecDeque};

use crate::automaton::{ActionLabel, Automaton, StateId, StateValue};
use crate::execution::Fragment;
use crate::liveness::pair::IndexedPair;
use crate::state_set::StateSet;

pub struct FragmentQuery<'q> {
    pub sources: &'q [StateId],
    pub target: &'q dyn Fn(StateId) -> bool,
    /// The external letter to match, or `None` for the empty trace.
    pub label: Option<&'q ActionLabel>,
    /// No state along the fragment may lie in this set.
    pub avoid: Option<StateSet>,
    /// Each set must be met by some state along the fragment.
    pub visit: Vec<&'q StateSet>,
    pub nonempty: bool,
    pub max_len: usize,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SearchResult {
    Found(Fragment),
    /// No fragment exists at any length.
    Exhausted,
    /// None within `max_len`; longer ones were not explored.
    Truncated,
}

impl SearchResult {
    pub fn found(self) -> Option<Fragment> {
        match self {
            SearchResult::Found(f) => Some(f),
            _ => None,
        }
    }
}

/// Shortest fragment satisfying the query.
pub fn search_fragment<T: StateValue>(b: &Automaton<T>, q: &FragmentQuery<'_>) -> SearchResult {
    assert!(q.visit.len() <= 64, "at most 64 visit sets");
    let full: u64 = if q.visit.len() == 64 { u64::MAX } else { (1u64 << q.visit.len()) - 1 };
    let mask_of = |s: StateId| -> u64 {
        q.visit.iter().enumerate().filter(|(_, v)| v.contains(s)).fold(0, |m, (i, _)| m | (1 << i))
    };
    let blocked = |s: StateId| q.avoid.as_ref().is_some_and(|x| x.contains(s));
    // (state, letter consumed, visited mask, moved)
    type Node = (StateId, bool, u64, bool);
    let mut parent: HashMap<Node, Option<(Node, usize)>> = HashMap::new();
    let mut depth: HashMap<Node, usize> = HashMap::new();
    let mut queue = VecDeque::new();
    for &u in q.sources {
        if blocked(u) {
            continue;
        }
        let n = (u, false, mask_of(u), false);
        if !parent.contains_key(&n) {
            parent.insert(n, None);
            depth.insert(n, 0);
            queue.push_back(n);
        }
    }
    let mut truncated = false;
    while let Some(n) = queue.pop_front() {
        let (u, consumed, mask, moved) = n;
        if (q.target)(u) && consumed == q.label.is_some() && mask == full && (moved || !q.nonempty) {
            let mut states = vec![u];
            let mut actions = Vec::new();
            let mut cur = n;
            while let Some(Some((p, step))) = parent.get(&cur) {
                actions.push(b.steps()[*step].action);
                states.push(p.0);
                cur = *p;
            }
            states.reverse();
            actions.reverse();
            return SearchResult::Found(Fragment { states, actions });
        }
        let d = depth[&n];
        for &i in b.out_steps(u) {
            let st = b.steps()[i];
            let x = b.action(st.action);
            let next_consumed = if x.is_external() {
                if consumed || q.label != Some(x) {
                    continue;
                }
                true
            } else {
                consumed
            };
            if blocked(st.to) {
                continue;
            }
            if d == q.max_len {
                truncated = true;
                break;
            }
            let m = (st.to, next_consumed, mask | mask_of(st.to), true);
            if !parent.contains_key(&m) {
                parent.insert(m, Some((n, i)));
                depth.insert(m, d + 1);
                queue.push_back(m);
            }
        }
    }
    if truncated {
        SearchResult::Truncated
    } else {
        SearchResult::Exhausted
    }
}

/// Pair obligations a fragment matching the concrete step `(s, s')` must
/// meet: avoid `q.R` unless `h(q).R` holds at an endpoint, and visit `q.G`
/// when `h(q).G` holds at an endpoint.
pub fn pair_obligations<'p>(
    links: &[(&'p IndexedPair, &'p IndexedPair)],
    s: StateId,
    s2: StateId,
    nb: usize,
) -> (Option<StateSet>, Vec<&'p StateSet>) {
    let mut avoid: Option<StateSet> = None;
    let mut visit = Vec::new();
    for (q, p) in links {
        if !(p.red.contains(s) || p.red.contains(s2)) {
            avoid.get_or_insert_with(|| StateSet::empty(nb)).union_with(&q.red);
        }
        if p.green.contains(s) || p.green.contains(s2) {
            visit.push(&q.green);
        }
    }
    (avoid, visit)
}
