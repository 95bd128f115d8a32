//! Seeded random instances for property tests and the acceptance sweeps.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::automaton::{Automaton, AutomatonBuilder};
use crate::fixtures::Fixture;
use crate::lattice::PairLattice;
use crate::liveness::pair::{ComplementedPair, IndexedPair, Region};
use crate::simulation::relation::{Candidate, PairMap, StateRelation, TargetTag};
use crate::state_set::StateSet;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

#[derive(Clone, Copy, Debug)]
pub struct Shape {
    pub max_states: usize,
    pub max_actions: usize,
    pub max_pairs: usize,
}

impl Default for Shape {
    fn default() -> Self {
        Shape { max_states: 8, max_actions: 4, max_pairs: 3 }
    }
}

struct Parts {
    states: Vec<String>,
    start: Vec<usize>,
    external: Vec<String>,
    internal: Vec<String>,
    steps: Vec<(usize, String, usize)>,
}

impl Parts {
    fn build(&self) -> Automaton<String> {
        let mut b = AutomatonBuilder::new();
        for s in &self.states {
            b.push_state(s.clone());
        }
        for s in &self.start {
            b.push_start(self.states[*s].clone());
        }
        for x in &self.external {
            b.push_external(x);
        }
        for x in &self.internal {
            b.push_internal(x);
        }
        for (s, x, t) in &self.steps {
            b.push_step(self.states[*s].clone(), x, self.states[*t].clone());
        }
        b.build().expect("generated automaton is well-formed")
    }
}

fn random_parts(rng: &mut impl Rng, prefix: &str, n: usize, max_actions: usize) -> Parts {
    let k = rng.gen_range(1..=max_actions);
    let (mut external, mut internal) = (Vec::new(), Vec::new());
    for i in 0..k {
        if i == 0 || rng.gen_bool(0.6) {
            external.push(format!("a{i}"));
        } else {
            internal.push(format!("t{i}"));
        }
    }
    let actions: Vec<String> = external.iter().chain(&internal).cloned().collect();
    let mut steps = Vec::new();
    for s in 0..n {
        let out = if rng.gen_bool(0.1) { 0 } else { rng.gen_range(1..=3) };
        for _ in 0..out {
            steps.push((s, actions.choose(rng).unwrap().clone(), rng.gen_range(0..n)));
        }
    }
    let mut start = vec![0];
    if n > 1 && rng.gen_bool(0.2) {
        start.push(rng.gen_range(1..n));
    }
    Parts { states: (0..n).map(|i| format!("{prefix}{i}")).collect(), start, external, internal, steps }
}

/// A random automaton with states `s0..`, at most `max_actions` actions.
pub fn random_automaton(rng: &mut impl Rng, shape: Shape) -> Automaton<String> {
    let n = rng.gen_range(1..=shape.max_states);
    random_parts(rng, "s", n, shape.max_actions).build()
}

pub fn random_set(rng: &mut impl Rng, n: usize, p: f64) -> StateSet {
    StateSet::from_ids(n, (0..n).filter(|_| rng.gen_bool(p)))
}

/// Up to `max` pairs with independent red and green memberships.
pub fn random_pairs(rng: &mut impl Rng, n: usize, max: usize, prefix: &str) -> Vec<IndexedPair> {
    let k = rng.gen_range(0..=max);
    (0..k).map(|i| IndexedPair::new(&format!("{prefix}{i}"), random_set(rng, n, 0.3), random_set(rng, n, 0.3))).collect()
}

/// How a random instance's concrete side was obtained from its abstract side.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Derivation {
    Copy,
    Split,
    Prune,
    Stutter,
    Random,
}

#[derive(Clone, Debug)]
pub struct Instance {
    pub fixture: Fixture,
    pub derivation: Derivation,
}

/// A random `(A, L)`, `(B, M)` and candidate. `A` is usually derived from
/// `B` so that a fair share of candidates pass; `L` pulls back `M` along `g`
/// and some `h` targets are weakened into claimed-derived pairs.
pub fn random_instance(rng: &mut impl Rng, shape: Shape) -> Instance {
    let derivation = *[Derivation::Copy, Derivation::Split, Derivation::Prune, Derivation::Stutter, Derivation::Random]
        .choose(rng)
        .unwrap();
    let nb_max = match derivation {
        Derivation::Split | Derivation::Stutter => (shape.max_states - 2).max(1),
        _ => shape.max_states,
    };
    let nb = rng.gen_range(1..=nb_max);
    let actions = if derivation == Derivation::Stutter { shape.max_actions - 1 } else { shape.max_actions };
    let bp = random_parts(rng, "u", nb, actions.max(1));
    let b = bp.build();
    let (ap, map): (Parts, Vec<Vec<usize>>) = match derivation {
        Derivation::Copy => (rename(&bp), (0..nb).map(|u| vec![u]).collect()),
        Derivation::Prune => {
            let mut ap = rename(&bp);
            let keep = rng.gen_range(1..=ap.steps.len().max(1));
            ap.steps.shuffle(rng);
            ap.steps.truncate(keep);
            (ap, (0..nb).map(|u| vec![u]).collect())
        }
        Derivation::Split => split(rng, &bp),
        Derivation::Stutter => stutter(rng, &bp),
        Derivation::Random => {
            let na = rng.gen_range(1..=shape.max_states);
            let mut ap = random_parts(rng, "s", na, shape.max_actions);
            ap.external = bp.external.clone();
            ap.internal = ap.internal.iter().map(|x| format!("{x}'")).collect();
            let acts: Vec<String> = ap.external.iter().chain(&ap.internal).cloned().collect();
            for st in &mut ap.steps {
                st.1 = acts.choose(rng).unwrap().clone();
            }
            let map = (0..na).map(|_| (0..nb).filter(|_| rng.gen_bool(0.35)).collect()).collect();
            (ap, map)
        }
    };
    let a = ap.build();
    let mut g = StateRelation::from_pairs(a.num_states(), nb, map.iter().enumerate().flat_map(|(s, us)| us.iter().map(move |u| (s, *u))));
    if derivation != Derivation::Random && rng.gen_bool(0.2) {
        let (s, u) = (rng.gen_range(0..a.num_states()), rng.gen_range(0..nb));
        if g.contains(s, u) {
            g.remove(s, u);
        } else {
            g.insert(s, u);
        }
    }
    let m = random_pairs(rng, nb, shape.max_pairs.min(2), "q");
    let mut l = Vec::new();
    let mut h = PairMap::new();
    for q in &m {
        let p = pullback(&g, q, a.num_states());
        if rng.gen_bool(0.25) {
            let mut green = p.green.clone();
            green.union_with(&random_set(rng, a.num_states(), 0.3));
            h.insert(&q.id, IndexedPair::new(&format!("h({})", q.id), p.red.clone(), green), TargetTag::ClaimedDerived);
        } else if rng.gen_bool(0.05) {
            let r = IndexedPair::new(&format!("h({})", q.id), random_set(rng, a.num_states(), 0.3), random_set(rng, a.num_states(), 0.3));
            h.insert(&q.id, r, TargetTag::ClaimedDerived);
        } else {
            h.insert(&q.id, p.clone(), TargetTag::InL);
        }
        l.push(p);
    }
    if l.len() < shape.max_pairs && rng.gen_bool(0.3) {
        l.push(IndexedPair::new("extra", random_set(rng, a.num_states(), 0.3), random_set(rng, a.num_states(), 0.3)));
    }
    Instance { fixture: Fixture { a, l, b, m, cand: Candidate::new(g).with_h(h) }, derivation }
}

/// `⟨{s : g[s] meets q.R}, {s : ∅ ≠ g[s] ⊆ q.G}⟩`, keeping the id of `q`.
pub fn pullback(g: &StateRelation, q: &IndexedPair, na: usize) -> IndexedPair {
    let red = StateSet::from_ids(na, (0..na).filter(|s| g.image(*s).iter().any(|u| q.red.contains(*u))));
    let green = StateSet::from_ids(na, (0..na).filter(|s| !g.image(*s).is_empty() && g.image(*s).iter().all(|u| q.green.contains(*u))));
    IndexedPair::new(&q.id, red, green)
}

fn rename(bp: &Parts) -> Parts {
    Parts {
        states: (0..bp.states.len()).map(|i| format!("s{i}")).collect(),
        start: bp.start.clone(),
        external: bp.external.clone(),
        internal: bp.internal.clone(),
        steps: bp.steps.clone(),
    }
}

/// Duplicates one or two abstract states; incoming steps pick a copy at
/// random and outgoing steps are duplicated.
fn split(rng: &mut impl Rng, bp: &Parts) -> (Parts, Vec<Vec<usize>>) {
    let nb = bp.states.len();
    let count = rng.gen_range(1..=2.min(nb));
    let mut chosen: Vec<usize> = (0..nb).collect();
    chosen.shuffle(rng);
    chosen.truncate(count);
    let mut copies: Vec<Vec<usize>> = (0..nb).map(|u| vec![u]).collect();
    let mut origin: Vec<usize> = (0..nb).collect();
    for u in &chosen {
        copies[*u].push(origin.len());
        origin.push(*u);
    }
    let mut steps = Vec::new();
    for (u, x, v) in &bp.steps {
        for s in &copies[*u] {
            steps.push((*s, x.clone(), *copies[*v].choose(rng).unwrap()));
        }
    }
    let mut start = bp.start.clone();
    for u in &bp.start {
        if copies[*u].len() > 1 && rng.gen_bool(0.5) {
            start.push(copies[*u][1]);
        }
    }
    let na = origin.len();
    let parts = Parts {
        states: (0..na).map(|i| format!("s{i}")).collect(),
        start,
        external: bp.external.clone(),
        internal: bp.internal.clone(),
        steps,
    };
    (parts, origin.iter().map(|u| vec![*u]).collect())
}

/// Routes one or two steps through a fresh state followed by a new internal
/// step; the fresh state relates to the target.
fn stutter(rng: &mut impl Rng, bp: &Parts) -> (Parts, Vec<Vec<usize>>) {
    let mut parts = rename(bp);
    let mut map: Vec<Vec<usize>> = (0..bp.states.len()).map(|u| vec![u]).collect();
    if parts.steps.is_empty() {
        return (parts, map);
    }
    parts.internal.push("z".into());
    let count = rng.gen_range(1..=2.min(parts.steps.len()));
    let mut picks: Vec<usize> = (0..parts.steps.len()).collect();
    picks.shuffle(rng);
    for &i in &picks[..count] {
        let (u, x, v) = parts.steps[i].clone();
        let w = parts.states.len();
        parts.states.push(format!("s{w}"));
        map.push(vec![v]);
        parts.steps[i] = (u, x, w);
        parts.steps.push((w, "z".into(), v));
    }
    (parts, map)
}

/// A random lattice over `a` satisfying clause 4 by construction: each
/// element's green set is spread over the red sets of its successors.
/// Shapes are chains of two to four elements and diamonds.
pub fn random_lattice(rng: &mut impl Rng, a: &Automaton<String>) -> PairLattice<String> {
    let n = a.num_states();
    let names = |set: &StateSet| set.iter().map(|s| a.name(s).to_string()).collect::<Vec<_>>();
    let pair = |id: &str, r: &StateSet, g: &StateSet| ComplementedPair::new(id, Region::states(names(r)), Region::states(names(g)));
    if rng.gen_bool(0.7) {
        let k = rng.gen_range(2..=4);
        let sets: Vec<StateSet> = (0..=k).map(|_| random_set(rng, n, 0.35)).collect();
        let pairs: Vec<_> = (0..k).map(|i| pair(&format!("e{i}"), &sets[i], &sets[i + 1])).collect();
        let order: Vec<(String, String)> = (1..k).map(|i| (format!("e{}", i - 1), format!("e{i}"))).collect();
        PairLattice::new(pairs, &order, &format!("e{}", k - 1), "e0").expect("chain")
    } else {
        let bot_r = random_set(rng, n, 0.35);
        let bot_g = random_set(rng, n, 0.35);
        let (mut left_r, mut right_r) = (StateSet::empty(n), StateSet::empty(n));
        for s in bot_g.iter() {
            if rng.gen_bool(0.5) {
                left_r.insert(s);
            } else {
                right_r.insert(s);
            }
        }
        let left_g = random_set(rng, n, 0.35);
        let right_g = random_set(rng, n, 0.35);
        let mut top_r = left_g.clone();
        top_r.union_with(&right_g);
        let top_g = random_set(rng, n, 0.35);
        let pairs = vec![
            pair("bot", &bot_r, &bot_g),
            pair("left", &left_r, &left_g),
            pair("right", &right_r, &right_g),
            pair("top", &top_r, &top_g),
        ];
        let order: Vec<(String, String)> = [("bot", "left"), ("bot", "right"), ("left", "top"), ("right", "top")]
            .iter()
            .map(|(x, y)| (x.to_string(), y.to_string()))
            .collect();
        PairLattice::new(pairs, &order, "top", "bot").expect("diamond")
    }
}

/// Removes one covering red state from a successor so that clause 4 fails
/// at a known element. `None` when every green set is empty.
pub fn break_clause_4(lat: &PairLattice<String>, a: &Automaton<String>) -> Option<(PairLattice<String>, String)> {
    for r in 0..lat.len() {
        if r == lat.top {
            continue;
        }
        let green = lat.pairs[r].green.index(a);
        let Some(s) = green.iter().next() else { continue };
        let mut pairs = lat.pairs.clone();
        for w in lat.succ_indices(r) {
            let red: Vec<String> = pairs[w].red.index(a).iter().filter(|x| *x != s).map(|x| a.name(x).to_string()).collect();
            pairs[w].red = Region::states(red);
        }
        let top = lat.pairs[lat.top].id.clone();
        let bottom = lat.pairs[lat.bottom].id.clone();
        let order = lat.order();
        let broken = PairLattice::new(pairs, &order, &top, &bottom).ok()?;
        return Some((broken, lat.pairs[r].id.clone()));
    }
    None
}

/// Whether `enumerate_live_lassos(a, pairs, stem_bound, cycle_bound)` is
/// nonempty, decided without listing lassos: a stem only has to reach the
/// cycle's first state, and a cycle's liveness depends only on its state set,
/// so closed walks are explored as (state, visited set) with shortest lengths.
///
/// With `stem_bound = n - 1` and `cycle_bound = n * (pairs + 1)` this is exact
/// nonemptiness: a live cycle can be rerouted to visit one green per pair
/// through legs of at most `n - 1` steps.
pub fn lasso_exists_within<S: crate::automaton::StateValue>(
    a: &Automaton<S>,
    pairs: &[IndexedPair],
    stem_bound: usize,
    cycle_bound: usize,
) -> bool {
    use std::collections::{HashMap, VecDeque};
    let n = a.num_states();
    assert!(n <= 64, "visited sets are 64-bit masks");
    let live = |mask: u64| {
        pairs.iter().all(|p| {
            let hits = |set: &StateSet| set.iter().any(|s| mask & (1 << s) != 0);
            !hits(&p.red) || hits(&p.green)
        })
    };
    let mut dist = vec![usize::MAX; n];
    let mut queue: VecDeque<usize> = a.start().iter().copied().collect();
    for &s in a.start() {
        dist[s] = 0;
    }
    while let Some(v) = queue.pop_front() {
        for &i in a.out_steps(v) {
            let t = a.steps()[i].to;
            if dist[t] == usize::MAX {
                dist[t] = dist[v] + 1;
                queue.push_back(t);
            }
        }
    }
    for e in (0..n).filter(|e| dist[*e] <= stem_bound) {
        let mut best: HashMap<(usize, u64), usize> = HashMap::new();
        let mut queue = VecDeque::from([(e, 1u64 << e, 0usize)]);
        best.insert((e, 1 << e), 0);
        while let Some((v, mask, len)) = queue.pop_front() {
            if len == cycle_bound {
                continue;
            }
            for &i in a.out_steps(v) {
                let t = a.steps()[i].to;
                if t == e && live(mask) {
                    return true;
                }
                let key = (t, mask | (1 << t));
                if best.get(&key).is_none_or(|l| *l > len + 1) {
                    best.insert(key, len + 1);
                    queue.push_back((t, key.1, len + 1));
                }
            }
        }
    }
    false
}
