use liveref_core::fixtures::{chain, chain_lattice, chain_pairs};
use liveref_core::lattice::*;
use liveref_core::liveness::{pair::Region, satisfies_pair, ComplementedPair, IndexedPair};
use liveref_core::streett::{closure_member, enumerate_live_lassos};
use liveref_core::testing::{break_clause_4, random_automaton, random_lattice, rng, Shape};
use liveref_core::{Automaton, CoreError};
use proptest::prelude::*;
use rand::SeedableRng;

fn p(id: &str, r: &[&str], g: &[&str]) -> ComplementedPair<String> {
    ComplementedPair::new(id, Region::states(r.iter().map(|s| s.to_string())), Region::states(g.iter().map(|s| s.to_string())))
}

fn edges(xs: &[(&str, &str)]) -> Vec<(String, String)> {
    xs.iter().map(|(x, y)| (x.to_string(), y.to_string())).collect()
}

fn diamond() -> PairLattice<String> {
    let pairs = vec![p("bot", &[], &[]), p("a", &[], &[]), p("b", &[], &[]), p("top", &[], &[])];
    PairLattice::new(pairs, &edges(&[("bot", "a"), ("bot", "b"), ("a", "top"), ("b", "top")]), "top", "bot").unwrap()
}

#[test]
fn succ_examples() {
    let c = chain_lattice();
    assert_eq!(c.succ("p01").unwrap(), ["p12"]);
    assert!(c.succ("p12").unwrap().is_empty());
    let d = diamond();
    assert_eq!(d.succ("bot").unwrap(), ["a", "b"]);
    assert!(d.succ("top").unwrap().is_empty());
    assert!(matches!(d.succ("zz"), Err(CoreError::UnknownPair(_))));
    assert!(d.precedes(d.bottom, d.top));
}

#[test]
fn structure_examples() {
    let a = chain();
    assert!(check_lattice_structure(&chain_lattice(), &a).ok());

    let moved = PairLattice::new(vec![p("p01", &["s0"], &["s1"]), p("p12", &["s2"], &["s2"])], &edges(&[("p01", "p12")]), "p12", "p01").unwrap();
    let f = check_lattice_structure(&moved, &a);
    let c4 = f.first_failure().unwrap();
    assert_eq!((c4.clause.as_str(), c4.element.as_deref()), ("clause 4", Some("p01")));
    assert!(c4.detail.as_deref().unwrap().contains("s1"));

    let both = PairLattice::new(chain_lattice().pairs, &edges(&[("p01", "p12"), ("p12", "p01")]), "p12", "p01").unwrap();
    assert_eq!(check_lattice_structure(&both, &a).first_failure().unwrap().clause, "clause 2");

    let loose = PairLattice::new(vec![p("x", &[], &[]), p("y", &[], &[]), p("z", &[], &[])], &edges(&[("x", "y")]), "y", "x").unwrap();
    assert_eq!(check_lattice_structure(&loose, &a).first_failure().unwrap().clause, "clause 3");
}

#[test]
fn certify_examples() {
    let a = chain();
    let l = chain_pairs(&a);
    let cert = certify_lattice(&a, &l, &chain_lattice());
    assert!(cert.certified);
    let d = cert.derived.unwrap();
    assert_eq!((d.red.iter().collect::<Vec<_>>(), d.green.iter().collect::<Vec<_>>()), (vec![0], vec![2]));
    // Oracle: every enumerated live lasso satisfies the derived pair.
    for lasso in enumerate_live_lassos(&a, &l, 4, 6) {
        assert!(satisfies_pair(&lasso, &d));
    }

    let outside = PairLattice::new(vec![p("p01", &["s0"], &["s1"]), p("p2x", &["s1"], &[])], &edges(&[("p01", "p2x")]), "p2x", "p01").unwrap();
    let cert = certify_lattice(&a, &l, &outside);
    assert!(!cert.certified);
    assert!(cert.refused.unwrap().contains("p2x"));

    let single = PairLattice::new(vec![p("p01", &["s0"], &["s1"])], &[], "p01", "p01").unwrap();
    let cert = certify_lattice(&a, &l, &single);
    assert!(cert.certified);
    assert_eq!(cert.derived.unwrap(), IndexedPair::new("p01~p01", l[0].red.clone(), l[0].green.clone()));

    let broken = PairLattice::new(vec![p("p01", &["s0"], &["s1"]), p("p12", &["s2"], &["s2"])], &edges(&[("p01", "p12")]), "p12", "p01").unwrap();
    let cert = certify_lattice(&a, &l, &broken);
    assert!(!cert.certified && cert.elements.is_empty());
}

#[test]
fn sampled_check_examples() {
    let lat = chain_lattice();
    let states: Vec<String> = ["s0", "s1", "s2"].iter().map(|s| s.to_string()).collect();
    let rep = check_lattice_sampled(&lat, &states).unwrap();
    assert!(rep.ok());
    assert_eq!(rep.label, "sampled, not a proof");
    assert!(matches!(check_lattice_sampled(&lat, &[]), Err(CoreError::Lattice(_))));
    let moved = PairLattice::new(vec![p("p01", &["s0"], &["s1"]), p("p12", &["s2"], &["s2"])], &edges(&[("p01", "p12")]), "p12", "p01").unwrap();
    let rep = check_lattice_sampled(&moved, &states).unwrap();
    assert_eq!(rep.violations, vec![SampleViolation { element: "p01".into(), sample: 1, state: "\"s1\"".into() }]);
}

#[test]
fn splice_replaces_an_element() {
    let inner = PairLattice::new(vec![p("x", &[], &[]), p("y", &[], &[])], &edges(&[("x", "y")]), "y", "x").unwrap();
    let s = splice(&diamond(), "a", &inner).unwrap();
    assert_eq!(s.succ("bot").unwrap(), ["b", "a/x"]);
    assert_eq!(s.succ("a/y").unwrap(), ["top"]);
    assert!(check_lattice_structure(&s, &chain()).ok());
}

#[test]
fn random_lattices_certify_and_chain() {
    let mut r = rng(5);
    let mut certified = 0;
    for _ in 0..100 {
        let a = random_automaton(&mut r, Shape::default());
        let lat = random_lattice(&mut r, &a);
        let l: Vec<IndexedPair> = lat.pairs.iter().map(|q| q.index(&a)).collect();
        let cert = certify_lattice(&a, &l, &lat);
        assert!(cert.structure.ok());
        if cert.certified {
            certified += 1;
        }
        let d = lat.derived_pair().index(&a);
        assert!(closure_member(&a, &l, &d).member);
        let n = a.num_states();
        for lasso in enumerate_live_lassos(&a, &l, n.min(4), n.min(5)) {
            assert!(satisfies_pair(&lasso, &d));
        }
        if let Some((broken, at)) = break_clause_4(&lat, &a) {
            let f = check_lattice_structure(&broken, &a);
            assert_eq!(f.first_failure().map(|c| (c.clause.as_str(), c.element.clone())), Some(("clause 4", Some(at))));
        }
    }
    assert_eq!(certified, 100);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn succ_is_antisymmetric(seed in any::<u64>()) {
        let mut r = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let a: Automaton<String> = random_automaton(&mut r, Shape::default());
        let lat = random_lattice(&mut r, &a);
        for i in 0..lat.len() {
            for w in lat.succ_indices(i) {
                prop_assert!(!lat.succ_indices(w).contains(&i));
            }
        }
    }
}
