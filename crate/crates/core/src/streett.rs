//! Decision procedures for finite live automata: Streett emptiness by SCC
//! refinement, brute-force live-lasso enumeration, machine closure, semantic
//! closure membership and trace inclusion.

use std::collections::{BTreeMap, HashMap, HashSet, VecDeque};

use serde::Serialize;

use crate::automaton::{ActionLabel, Automaton, AutomatonBuilder, StateId, StateValue};
use crate::error::CoreError;
use crate::execution::{lasso_key, lasso_trace, Fragment, Lasso, Trace};
use crate::liveness::pair::{is_live, IndexedPair};
use crate::state_set::StateSet;

/// Strongly connected components of the subgraph induced by `within` and the
/// steps accepted by `edge_ok`, each sorted, listed by smallest member.
pub fn sccs<S: StateValue>(a: &Automaton<S>, within: &StateSet, edge_ok: &dyn Fn(usize) -> bool) -> Vec<Vec<StateId>> {
    let n = a.num_states();
    let succ = |v: StateId| -> Vec<StateId> {
        a.out_steps(v)
            .iter()
            .filter(|i| edge_ok(**i))
            .map(|i| a.steps()[*i].to)
            .filter(|t| within.contains(*t))
            .collect()
    };
    let mut index = vec![usize::MAX; n];
    let mut low = vec![0; n];
    let mut on_stack = vec![false; n];
    let mut stack = Vec::new();
    let mut next_index = 0;
    let mut out = Vec::new();
    for root in within.iter() {
        if index[root] != usize::MAX {
            continue;
        }
        // Iterative Tarjan: frames hold (vertex, successors, cursor).
        let mut frames: Vec<(StateId, Vec<StateId>, usize)> = Vec::new();
        index[root] = next_index;
        low[root] = next_index;
        next_index += 1;
        stack.push(root);
        on_stack[root] = true;
        frames.push((root, succ(root), 0));
        while let Some(frame) = frames.last_mut() {
            let v = frame.0;
            if frame.2 < frame.1.len() {
                let w = frame.1[frame.2];
                frame.2 += 1;
                if index[w] == usize::MAX {
                    index[w] = next_index;
                    low[w] = next_index;
                    next_index += 1;
                    stack.push(w);
                    on_stack[w] = true;
                    frames.push((w, succ(w), 0));
                } else if on_stack[w] {
                    low[v] = low[v].min(index[w]);
                }
            } else {
                frames.pop();
                if let Some(parent) = frames.last() {
                    low[parent.0] = low[parent.0].min(low[v]);
                }
                if low[v] == index[v] {
                    let mut comp = Vec::new();
                    loop {
                        let w = stack.pop().expect("tarjan stack");
                        on_stack[w] = false;
                        comp.push(w);
                        if w == v {
                            break;
                        }
                    }
                    comp.sort_unstable();
                    out.push(comp);
                }
            }
        }
    }
    out.sort();
    out
}

/// Streett acceptance of a strongly connected set: some cycle can be formed
/// inside it that meets green whenever it meets red, for every pair.
fn find_accepting<S: StateValue>(
    a: &Automaton<S>,
    within: &StateSet,
    edge_ok: &dyn Fn(usize) -> bool,
    pairs: &[IndexedPair],
    explored: &mut usize,
) -> Option<StateSet> {
    for comp in sccs(a, within, edge_ok) {
        *explored += comp.len();
        let set = StateSet::from_ids(a.num_states(), comp.iter().copied());
        let internal_edge = comp.iter().any(|&v| {
            a.out_steps(v).iter().any(|i| edge_ok(*i) && set.contains(a.steps()[*i].to))
        });
        if !internal_edge {
            continue;
        }
        let mut bad_red = StateSet::empty(a.num_states());
        let mut violated = false;
        for p in pairs {
            if p.red.intersects(&set) && !p.green.intersects(&set) {
                violated = true;
                bad_red.union_with(&p.red);
            }
        }
        if !violated {
            return Some(set);
        }
        let rest = set.difference(&bad_red);
        if let Some(found) = find_accepting(a, &rest, edge_ok, pairs, explored) {
            return Some(found);
        }
    }
    None
}

/// Shortest path inside `within` using accepted edges, from any of `sources`
/// to any state satisfying `goal`. A source satisfying `goal` yields an empty
/// fragment.
pub(crate) fn bfs_path<S: StateValue>(
    a: &Automaton<S>,
    sources: &[StateId],
    within: Option<&StateSet>,
    edge_ok: &dyn Fn(usize) -> bool,
    goal: &dyn Fn(StateId) -> bool,
) -> Option<Fragment> {
    let mut parent: HashMap<StateId, Option<(StateId, usize)>> = HashMap::new();
    let mut queue = VecDeque::new();
    for &s in sources {
        if within.is_none_or(|w| w.contains(s)) && !parent.contains_key(&s) {
            parent.insert(s, None);
            queue.push_back(s);
        }
    }
    while let Some(v) = queue.pop_front() {
        if goal(v) {
            let mut states = vec![v];
            let mut actions = Vec::new();
            let mut cur = v;
            while let Some(Some((p, step))) = parent.get(&cur) {
                actions.push(a.steps()[*step].action);
                states.push(*p);
                cur = *p;
            }
            states.reverse();
            actions.reverse();
            return Some(Fragment { states, actions });
        }
        for &i in a.out_steps(v) {
            let t = a.steps()[i].to;
            if edge_ok(i) && within.is_none_or(|w| w.contains(t)) && !parent.contains_key(&t) {
                parent.insert(t, Some((v, i)));
                queue.push_back(t);
            }
        }
    }
    None
}

/// Searches for a lasso whose stem starts in `sources` and uses any step, and
/// whose cycle stays in `cycle_states`, uses only steps accepted by
/// `cycle_edge`, and satisfies every pair.
pub fn find_live_lasso<S: StateValue>(
    a: &Automaton<S>,
    sources: &[StateId],
    cycle_states: &StateSet,
    cycle_edge: &dyn Fn(usize) -> bool,
    pairs: &[IndexedPair],
) -> EmptinessVerdict {
    let mut explored = 0;
    let mut within = a.reachable_from(sources);
    within.intersect_with(cycle_states);
    let Some(comp) = find_accepting(a, &within, cycle_edge, pairs, &mut explored) else {
        return EmptinessVerdict { witness: None, explored };
    };
    let all = |_: usize| true;
    let stem = bfs_path(a, sources, None, &all, &|v| comp.contains(v)).expect("accepting component is reachable");
    let entry = stem.lstate();
    let mut cycle = Fragment::single(entry);
    for p in pairs {
        if !p.red.intersects(&comp) {
            continue;
        }
        let green = p.green.iter().find(|g| comp.contains(*g)).expect("accepting component meets green");
        let leg = bfs_path(a, &[cycle.lstate()], Some(&comp), cycle_edge, &|v| v == green).expect("component is strongly connected");
        cycle = cycle.concat(&leg).expect("legs chain");
    }
    let back = if cycle.is_empty() {
        // Leave through some internal edge, then return.
        let first = a
            .out_steps(entry)
            .iter()
            .copied()
            .find(|i| cycle_edge(*i) && comp.contains(a.steps()[*i].to))
            .expect("component has an internal edge through every member");
        let st = a.steps()[first];
        let mut f = Fragment::single(entry);
        f.push(st.action, st.to);
        let rest = bfs_path(a, &[st.to], Some(&comp), cycle_edge, &|v| v == entry).expect("strongly connected");
        f.concat(&rest).expect("legs chain")
    } else {
        bfs_path(a, &[cycle.lstate()], Some(&comp), cycle_edge, &|v| v == entry).expect("strongly connected")
    };
    cycle = cycle.concat(&back).expect("legs chain");
    let lasso = Lasso::new(stem, cycle).expect("witness closes");
    EmptinessVerdict { witness: Some(lasso), explored }
}

#[derive(Clone, Debug)]
pub struct EmptinessVerdict {
    pub witness: Option<Lasso>,
    pub explored: usize,
}

impl EmptinessVerdict {
    pub fn is_empty(&self) -> bool {
        self.witness.is_none()
    }
}

/// Is there a live lasso starting at `from` (default: the start states)?
pub fn streett_emptiness<S: StateValue>(a: &Automaton<S>, pairs: &[IndexedPair], from: Option<StateId>) -> EmptinessVerdict {
    let sources: Vec<StateId> = match from {
        Some(s) => vec![s],
        None => a.start().to_vec(),
    };
    find_live_lasso(a, &sources, &StateSet::full(a.num_states()), &|_| true, pairs)
}

/// Every lasso with `|stem| <= stem_bound` and `1 <= |cycle| <= cycle_bound`
/// that is live, deduplicated by (primitive cycle state multiset, trace), in
/// depth-first discovery order.
pub fn enumerate_live_lassos<S: StateValue>(
    a: &Automaton<S>,
    pairs: &[IndexedPair],
    stem_bound: usize,
    cycle_bound: usize,
) -> Vec<Lasso> {
    let mut out = Vec::new();
    if cycle_bound == 0 {
        return out;
    }
    let mut seen = HashSet::new();
    let mut stems = Vec::new();
    for &s0 in a.start() {
        collect_paths(a, Fragment::single(s0), stem_bound, &mut |f| stems.push(f.clone()));
    }
    for stem in stems {
        let e = stem.lstate();
        let mut cycles = Vec::new();
        collect_paths(a, Fragment::single(e), cycle_bound, &mut |f| {
            if !f.is_empty() && f.lstate() == e {
                cycles.push(f.clone());
            }
        });
        for cycle in cycles {
            let l = Lasso::new(stem.clone(), cycle).expect("cycle closes");
            if is_live(&l, pairs) && seen.insert(lasso_key(&l, a)) {
                out.push(l);
            }
        }
    }
    out
}

fn collect_paths<S: StateValue>(a: &Automaton<S>, f: Fragment, budget: usize, emit: &mut dyn FnMut(&Fragment)) {
    emit(&f);
    if budget == 0 {
        return;
    }
    for &i in a.out_steps(f.lstate()) {
        let st = a.steps()[i];
        let mut g = f.clone();
        g.push(st.action, st.to);
        collect_paths(a, g, budget - 1, emit);
    }
}

#[derive(Clone, Debug)]
pub enum MachineClosure {
    Holds,
    /// A reachable state with no live extension.
    Fails { state: StateId },
}

/// Every reachable state has a live continuation.
pub fn machine_closure_check<S: StateValue>(a: &Automaton<S>, pairs: &[IndexedPair]) -> MachineClosure {
    for s in a.reachable().iter() {
        if streett_emptiness(a, pairs, Some(s)).is_empty() {
            return MachineClosure::Fails { state: s };
        }
    }
    MachineClosure::Holds
}

#[derive(Clone, Debug)]
pub struct ClosureVerdict {
    pub member: bool,
    /// A live lasso whose cycle meets p.R and avoids p.G.
    pub witness: Option<Lasso>,
}

/// Is `p` satisfied by every live lasso of `(a, pairs)`?
pub fn closure_member<S: StateValue>(a: &Automaton<S>, pairs: &[IndexedPair], p: &IndexedPair) -> ClosureVerdict {
    let n = a.num_states();
    let mut query = pairs.to_vec();
    query.push(IndexedPair::new("violation", StateSet::full(n), p.red.clone()));
    let verdict = find_live_lasso(a, a.start(), &p.green.complement(), &|_| true, &query);
    ClosureVerdict { member: verdict.witness.is_none(), witness: verdict.witness }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum DerivedStatus {
    InL,
    Derived,
    NotInClosure,
}

pub fn derived_pair_check<S: StateValue>(a: &Automaton<S>, pairs: &[IndexedPair], p: &IndexedPair) -> DerivedStatus {
    if pairs.iter().any(|q| q.same_sets(p)) {
        DerivedStatus::InL
    } else if closure_member(a, pairs, p).member {
        DerivedStatus::Derived
    } else {
        DerivedStatus::NotInClosure
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct InclusionBounds {
    pub stem: usize,
    pub cycle: usize,
    /// Cap on live lassos examined; exceeding it yields `unknown`.
    pub max_lassos: usize,
    /// Cap on product states per matching query.
    pub max_product: usize,
}

impl Default for InclusionBounds {
    fn default() -> Self {
        InclusionBounds { stem: 4, cycle: 4, max_lassos: 5000, max_product: 100_000 }
    }
}

#[derive(Clone, Debug)]
pub enum Witness {
    Lasso(Lasso),
    Finite(Fragment),
}

#[derive(Clone, Debug)]
pub enum InclusionOutcome {
    HoldsWithinBounds,
    Counterexample { witness: Witness, trace: Trace },
    Unknown { reason: String },
}

#[derive(Clone, Debug)]
pub struct InclusionVerdict {
    pub outcome: InclusionOutcome,
    pub bounds: InclusionBounds,
    pub examined: usize,
}

impl InclusionVerdict {
    pub fn holds(&self) -> bool {
        matches!(self.outcome, InclusionOutcome::HoldsWithinBounds)
    }

    pub fn counterexample(&self) -> Option<&Witness> {
        match &self.outcome {
            InclusionOutcome::Counterexample { witness, .. } => Some(witness),
            _ => None,
        }
    }
}

pub(crate) fn check_externals<S: StateValue, T: StateValue>(a: &Automaton<S>, b: &Automaton<T>) -> Result<(), CoreError> {
    if a.same_externals(b) {
        Ok(())
    } else {
        let show = |x: &std::collections::BTreeSet<ActionLabel>| x.iter().map(|l| l.text()).collect::<Vec<_>>().join(",");
        Err(CoreError::ExternalMismatch(format!("{{{}}} vs {{{}}}", show(&a.external_labels()), show(&b.external_labels()))))
    }
}

/// Live trace inclusion, checked for every live lasso of `(a, l)` within the
/// bounds by searching `b × word` for a lasso live in `m`.
pub fn live_trace_inclusion<S: StateValue, T: StateValue>(
    a: &Automaton<S>,
    l: &[IndexedPair],
    b: &Automaton<T>,
    m: &[IndexedPair],
    bounds: InclusionBounds,
) -> Result<InclusionVerdict, CoreError> {
    check_externals(a, b)?;
    let lassos = enumerate_live_lassos(a, l, bounds.stem, bounds.cycle);
    let mut cache: HashMap<Trace, Option<bool>> = HashMap::new();
    let mut examined = 0;
    let mut unknown = None;
    for lasso in lassos {
        if examined >= bounds.max_lassos {
            return Ok(InclusionVerdict {
                outcome: InclusionOutcome::Unknown { reason: format!("more than {} live lassos", bounds.max_lassos) },
                bounds,
                examined,
            });
        }
        examined += 1;
        let trace = lasso_trace(&lasso, a);
        let matched = *cache.entry(trace.clone()).or_insert_with(|| match_trace(b, m, &trace, bounds.max_product));
        match matched {
            Some(true) => {}
            Some(false) => {
                return Ok(InclusionVerdict {
                    outcome: InclusionOutcome::Counterexample { witness: Witness::Lasso(lasso), trace },
                    bounds,
                    examined,
                })
            }
            None => {
                unknown.get_or_insert_with(|| format!("product cap {} exceeded for {}", bounds.max_product, trace.render()));
            }
        }
    }
    let outcome = match unknown {
        Some(reason) => InclusionOutcome::Unknown { reason },
        None => InclusionOutcome::HoldsWithinBounds,
    };
    Ok(InclusionVerdict { outcome, bounds, examined })
}

/// Does `(b, m)` have a live lasso with exactly this trace? `None` when the
/// product exceeds `cap` states.
pub fn match_trace<T: StateValue>(b: &Automaton<T>, m: &[IndexedPair], trace: &Trace, cap: usize) -> Option<bool> {
    let plen = trace.prefix.len();
    let qlen = trace.period.len();
    let finite = trace.is_finite();
    let letter_at = |pos: usize| -> Option<&ActionLabel> {
        if pos < plen {
            Some(&trace.prefix[pos])
        } else if finite {
            None
        } else {
            Some(&trace.period[pos - plen])
        }
    };
    let advance = |pos: usize| if !finite && pos + 1 == plen + qlen { plen } else { pos + 1 };
    // Product node: (state of b, word position, arrived by an external step).
    type Node = (StateId, usize, bool);
    let mut builder: AutomatonBuilder<Node> = AutomatonBuilder::new();
    for x in b.actions() {
        if x.is_external() {
            builder.push_external(&x.text());
        } else {
            builder.push_internal(&x.text());
        }
    }
    let mut seen: HashSet<Node> = HashSet::new();
    let mut queue = VecDeque::new();
    for &s in b.start() {
        let node = (s, 0, false);
        builder.push_start(node);
        if seen.insert(node) {
            builder.push_state(node);
            queue.push_back(node);
        }
    }
    while let Some(node) = queue.pop_front() {
        if seen.len() > cap {
            return None;
        }
        let (s, pos, _) = node;
        for &i in b.out_steps(s) {
            let st = b.steps()[i];
            let label = b.action(st.action);
            let next = if label.is_external() {
                match letter_at(pos) {
                    Some(l) if l == label => (st.to, advance(pos), true),
                    _ => continue,
                }
            } else {
                (st.to, pos, false)
            };
            if seen.insert(next) {
                builder.push_state(next);
                queue.push_back(next);
            }
            builder.push_step(node, &label.text(), next);
        }
    }
    let product = builder.build().expect("product is well-formed");
    let n = product.num_states();
    let mut pairs: Vec<IndexedPair> = m
        .iter()
        .map(|q| {
            let lift = |set: &StateSet| StateSet::from_ids(n, (0..n).filter(|i| set.contains(product.state(*i).0)));
            IndexedPair::new(&q.id, lift(&q.red), lift(&q.green))
        })
        .collect();
    let cycle_states = if finite {
        StateSet::from_ids(n, (0..n).filter(|i| product.state(*i).1 == plen))
    } else {
        pairs.push(IndexedPair::new(
            "consume",
            StateSet::full(n),
            StateSet::from_ids(n, (0..n).filter(|i| product.state(*i).2)),
        ));
        StateSet::full(n)
    };
    Some(!find_live_lasso(&product, product.start(), &cycle_states, &|_| true, &pairs).is_empty())
}

/// Finite-trace inclusion by subset construction over `b`'s internal closure.
pub fn safe_trace_inclusion<S: StateValue, T: StateValue>(
    a: &Automaton<S>,
    b: &Automaton<T>,
    max_pairs: usize,
) -> Result<InclusionVerdict, CoreError> {
    check_externals(a, b)?;
    let bounds = InclusionBounds { stem: 0, cycle: 0, max_lassos: 0, max_product: max_pairs };
    let closure = |set: &[StateId]| -> Vec<StateId> {
        let mut seen: std::collections::BTreeSet<StateId> = set.iter().copied().collect();
        let mut stack: Vec<StateId> = set.to_vec();
        while let Some(v) = stack.pop() {
            for &i in b.out_steps(v) {
                let st = b.steps()[i];
                if !b.is_external(st.action) && seen.insert(st.to) {
                    stack.push(st.to);
                }
            }
        }
        seen.into_iter().collect()
    };
    type Key = (StateId, Vec<StateId>);
    let mut parent: BTreeMap<Key, Option<(Key, usize)>> = BTreeMap::new();
    let mut queue = VecDeque::new();
    let init = closure(b.start());
    for &s in a.start() {
        let key = (s, init.clone());
        if !parent.contains_key(&key) {
            parent.insert(key.clone(), None);
            queue.push_back(key);
        }
    }
    while let Some(key) = queue.pop_front() {
        if parent.len() > max_pairs {
            return Ok(InclusionVerdict {
                outcome: InclusionOutcome::Unknown { reason: format!("more than {max_pairs} subset pairs") },
                bounds,
                examined: parent.len(),
            });
        }
        for &i in a.out_steps(key.0) {
            let st = a.steps()[i];
            let next_set = if a.is_external(st.action) {
                let label = a.action(st.action);
                let post: Vec<StateId> = key
                    .1
                    .iter()
                    .flat_map(|v| b.out_steps(*v).iter().map(|j| b.steps()[*j]))
                    .filter(|bs| b.action(bs.action) == label)
                    .map(|bs| bs.to)
                    .collect();
                closure(&post)
            } else {
                key.1.clone()
            };
            let next = (st.to, next_set);
            if parent.contains_key(&next) {
                continue;
            }
            parent.insert(next.clone(), Some((key.clone(), i)));
            if next.1.is_empty() {
                let mut states = vec![next.0];
                let mut actions = Vec::new();
                let mut cur = next.clone();
                while let Some(Some((p, step))) = parent.get(&cur) {
                    actions.push(a.steps()[*step].action);
                    states.push(p.0);
                    cur = p.clone();
                }
                states.reverse();
                actions.reverse();
                let frag = Fragment { states, actions };
                let trace = Trace::finite(crate::execution::fragment_trace(&frag, a));
                return Ok(InclusionVerdict {
                    outcome: InclusionOutcome::Counterexample { witness: Witness::Finite(frag), trace },
                    bounds,
                    examined: parent.len(),
                });
            }
            queue.push_back(next);
        }
    }
    Ok(InclusionVerdict { outcome: InclusionOutcome::HoldsWithinBounds, bounds, examined: parent.len() })
}
