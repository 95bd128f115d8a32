//! The bundled example corpus. Each fixture also ships as JSON under
//! `fixtures/`; tests keep the two in sync.

use std::collections::BTreeSet;

use crate::automaton::{Automaton, AutomatonBuilder};
use crate::format::Registry;
use crate::lattice::PairLattice;
use crate::liveness::pair::{ComplementedPair, IndexedPair, Region};
use crate::simulation::relation::{Candidate, PairMap, StateRelation, TargetTag};

/// A concrete `(A, L)`, an abstract `(B, M)` and a candidate between them.
#[derive(Clone, Debug)]
pub struct Fixture {
    pub a: Automaton<String>,
    pub l: Vec<IndexedPair>,
    pub b: Automaton<String>,
    pub m: Vec<IndexedPair>,
    pub cand: Candidate,
}

fn build(states: &[&str], start: &[&str], ext: &[&str], int: &[&str], steps: &[(&str, &str, &str)]) -> Automaton<String> {
    let mut b = AutomatonBuilder::new();
    for s in states {
        b.push_state(s.to_string());
    }
    for s in start {
        b.push_start(s.to_string());
    }
    for x in ext {
        b.push_external(x);
    }
    for x in int {
        b.push_internal(x);
    }
    for (s, x, t) in steps {
        b.push_step(s.to_string(), x, t.to_string());
    }
    b.build().expect("fixture is well-formed")
}

fn pair(a: &Automaton<String>, id: &str, red: &[&str], green: &[&str]) -> IndexedPair {
    ComplementedPair::new(id, Region::states(red.iter().map(|s| s.to_string())), Region::states(green.iter().map(|s| s.to_string())))
        .index(a)
}

fn relation(a: &Automaton<String>, b: &Automaton<String>, rows: &[(&str, &str)]) -> StateRelation {
    let id = |x: &Automaton<String>, n: &str| x.state_by_name(n).expect("fixture state");
    StateRelation::from_pairs(a.num_states(), b.num_states(), rows.iter().map(|(s, u)| (id(a, s), id(b, u))))
}

pub fn t1() -> Automaton<String> {
    build(&["s0", "s1"], &["s0"], &["a"], &["t"], &[("s0", "a", "s1"), ("s1", "t", "s1")])
}

pub fn cy3() -> Automaton<String> {
    build(&["s0", "s1", "s2"], &["s0"], &[], &["t"], &[("s0", "t", "s1"), ("s1", "t", "s2"), ("s2", "t", "s0")])
}

pub fn chain() -> Automaton<String> {
    build(
        &["s0", "s1", "s2"],
        &["s0"],
        &["a", "c"],
        &["b", "w"],
        &[("s0", "a", "s1"), ("s1", "b", "s2"), ("s2", "c", "s0"), ("s0", "w", "s0"), ("s1", "w", "s1")],
    )
}

pub fn chain_pairs(a: &Automaton<String>) -> Vec<IndexedPair> {
    vec![pair(a, "p01", &["s0"], &["s1"]), pair(a, "p12", &["s1"], &["s2"])]
}

/// {⟨{s0},{s1}⟩ ≺ ⟨{s1},{s2}⟩}.
pub fn chain_lattice() -> PairLattice<String> {
    let p = |id: &str, r: &str, g: &str| ComplementedPair::new(id, Region::states([r.to_string()]), Region::states([g.to_string()]));
    PairLattice::new(vec![p("p01", "s0", "s1"), p("p12", "s1", "s2")], &[("p01".into(), "p12".into())], "p12", "p01")
        .expect("chain lattice")
}

/// CHAIN against an abstraction that merges s1 and s2.
pub fn collapsed_chain() -> Fixture {
    let a = chain();
    let l = chain_pairs(&a);
    let b = build(
        &["u0", "u12"],
        &["u0"],
        &["a", "c"],
        &["w"],
        &[("u0", "a", "u12"), ("u12", "c", "u0"), ("u0", "w", "u0"), ("u12", "w", "u12")],
    );
    let m = vec![pair(&b, "q0", &["u0"], &["u12"])];
    let g = relation(&a, &b, &[("s0", "u0"), ("s1", "u12"), ("s2", "u12")]);
    let mut h = PairMap::new();
    h.insert("q0", pair(&a, "h(q0)", &["s0"], &["s1", "s2"]), TargetTag::ClaimedDerived);
    Fixture { a, l, b, m, cand: Candidate::new(g).with_h(h) }
}

/// A commits to a branch after emitting `a`; B commits before.
pub fn bsim1() -> Fixture {
    let a = build(
        &["s0", "s1", "s2", "s3"],
        &["s0"],
        &["a", "b", "c"],
        &["t"],
        &[("s0", "a", "s1"), ("s1", "t", "s2"), ("s1", "t", "s3"), ("s2", "b", "s0"), ("s3", "c", "s0")],
    );
    let b = build(
        &["u1", "u2", "u3", "u4"],
        &["u1", "u2"],
        &["a", "b", "c"],
        &[],
        &[("u1", "a", "u3"), ("u2", "a", "u4"), ("u3", "b", "u1"), ("u3", "b", "u2"), ("u4", "c", "u1"), ("u4", "c", "u2")],
    );
    let l = vec![pair(&a, "p13", &["s1"], &["s3"])];
    let m = vec![pair(&b, "q34", &["u3"], &["u4"])];
    let g = relation(&a, &b, &[("s0", "u1"), ("s0", "u2"), ("s1", "u3"), ("s1", "u4"), ("s2", "u3"), ("s3", "u4")]);
    let mut h = PairMap::new();
    h.insert("q34", pair(&a, "h(q34)", &["s1", "s2"], &["s3"]), TargetTag::ClaimedDerived);
    Fixture { a, l, b, m, cand: Candidate::new(g).with_h(h) }
}

/// `{x,y}|{x}`: requested then responded.
pub fn db_state(requested: &BTreeSet<String>, responded: &BTreeSet<String>) -> String {
    let join = |s: &BTreeSet<String>| s.iter().cloned().collect::<Vec<_>>().join(",");
    format!("{{{}}}|{{{}}}", join(requested), join(responded))
}

pub fn parse_db_state(s: &str) -> Option<(BTreeSet<String>, BTreeSet<String>)> {
    let (r, d) = s.split_once('|')?;
    let set = |x: &str| -> Option<BTreeSet<String>> {
        let inner = x.strip_prefix('{')?.strip_suffix('}')?;
        Some(inner.split(',').filter(|e| !e.is_empty()).map(str::to_string).collect())
    };
    Some((set(r)?, set(d)?))
}

fn subsets(universe: &[&str]) -> Vec<BTreeSet<String>> {
    (0..1u32 << universe.len())
        .map(|mask| universe.iter().enumerate().filter(|(i, _)| mask & (1 << i) != 0).map(|(_, x)| x.to_string()).collect())
        .collect()
}

fn db(universe: &[&str], lossy: bool) -> Automaton<String> {
    let mut b = AutomatonBuilder::new();
    let sets = subsets(universe);
    for r in &sets {
        for d in &sets {
            b.push_state(db_state(r, d));
        }
    }
    b.push_start(db_state(&BTreeSet::new(), &BTreeSet::new()));
    for x in universe {
        b.push_external(&format!("request({x})"));
        b.push_external(&format!("response({x},v)"));
    }
    for r in &sets {
        for d in &sets {
            let here = db_state(r, d);
            for x in universe {
                let mut r2 = r.clone();
                r2.insert(x.to_string());
                b.push_step(here.clone(), &format!("request({x})"), db_state(&r2, d));
                if lossy {
                    b.push_step(here.clone(), &format!("request({x})"), here.clone());
                }
                if r.contains(*x) && !d.contains(*x) {
                    let mut d2 = d.clone();
                    d2.insert(x.to_string());
                    b.push_step(here.clone(), &format!("response({x},v)"), db_state(r, &d2));
                }
            }
        }
    }
    b.build().expect("database automaton is well-formed")
}

/// The database specification over a query universe.
pub fn db_spec(universe: &[&str]) -> Automaton<String> {
    db(universe, false)
}

/// The lossy implementation: a request may be dropped.
pub fn db_impl(universe: &[&str]) -> Automaton<String> {
    db(universe, true)
}

pub fn db_registry() -> Registry<String> {
    let mut reg = Registry::new();
    reg.family("db.requested", |args| {
        let x = args.first()?.clone();
        Some(std::sync::Arc::new(move |s: &String| parse_db_state(s).is_some_and(|(r, _)| r.contains(&x))))
    });
    reg.family("db.responded", |args| {
        let x = args.first()?.clone();
        Some(std::sync::Arc::new(move |s: &String| parse_db_state(s).is_some_and(|(_, d)| d.contains(&x))))
    });
    reg.relation("db.F", |s, u| match (parse_db_state(s), parse_db_state(u)) {
        (Some((r, d)), Some((r2, d2))) => r.is_subset(&r2) && d == d2,
        _ => false,
    });
    reg
}

/// ⟨x ∈ requested, x ∈ responded⟩ for each query.
pub fn db_pairs(a: &Automaton<String>, universe: &[&str]) -> Vec<IndexedPair> {
    let reg = db_registry();
    universe
        .iter()
        .map(|x| {
            let red = reg.resolve(&format!("db.requested({x})")).expect("registered");
            let green = reg.resolve(&format!("db.responded({x})")).expect("registered");
            ComplementedPair::new(&format!("served({x})"), red, green).index(a)
        })
        .collect()
}

/// DB-Imp against DB-Spec under F, with h the identity on pair ids.
pub fn db_fixture(universe: &[&str]) -> Fixture {
    let a = db_impl(universe);
    let b = db_spec(universe);
    let l = db_pairs(&a, universe);
    let m = db_pairs(&b, universe);
    let f = db_registry().resolve_relation("db.F").expect("registered");
    let g = StateRelation::from_fn(&a, &b, |s, u| f(s, u));
    let h = PairMap::by_id(&m, &l).expect("same ids");
    Fixture { a, l, b, m, cand: Candidate::new(g).with_h(h) }
}
