use std::collections::BTreeSet;

use liveref_esds::ops::*;
use liveref_esds::EsdsError;
use proptest::prelude::*;

fn add(id: &str, e: &str) -> Operation {
    Operation { id: id.into(), client: 0, prev: BTreeSet::new(), strict: false, op: OpKind::Add(e.into()) }
}

fn read(id: &str) -> Operation {
    Operation { id: id.into(), client: 0, prev: BTreeSet::new(), strict: false, op: OpKind::Read }
}

fn set(xs: &[&str]) -> BTreeSet<String> {
    xs.iter().map(|s| s.to_string()).collect()
}

fn order(edges: &[(&str, &str)]) -> Order {
    edges.iter().map(|(a, b)| (a.to_string(), b.to_string())).collect()
}

/// Every subset of `ops ∖ {x}`, kept when down-closed and between the
/// forced prefix and the complement of x's successors.
fn oracle(cat: &Catalog, x: &str, ops: &BTreeSet<String>, po: &Order) -> BTreeSet<Value> {
    let tc = transitive_closure(po);
    let others: Vec<&String> = ops.iter().filter(|y| *y != x).collect();
    let mut out = BTreeSet::new();
    for mask in 0u32..(1 << others.len()) {
        let s: BTreeSet<&String> = others.iter().enumerate().filter(|(i, _)| mask >> i & 1 == 1).map(|(_, y)| *y).collect();
        let down_closed = tc.iter().all(|(a, b)| !s.contains(b) || !ops.contains(a) || s.contains(a));
        let has_prefix = ops.iter().all(|y| !tc.contains(&(y.clone(), x.to_string())) || s.contains(y));
        let no_successor = s.iter().all(|y| !tc.contains(&(x.to_string(), (*y).clone())));
        if down_closed && has_prefix && no_successor {
            let x = x.to_string();
            out.insert(apply(cat, s.into_iter().chain(std::iter::once(&x))));
        }
    }
    out
}

#[test]
fn valset_examples() {
    let cat = Catalog::new([add("e1", "a"), read("x"), add("e2", "b")]).unwrap();
    let ops = set(&["e1", "x"]);
    assert_eq!(valset(&cat, &"x".into(), &ops, &order(&[("e1", "x")]), 100).unwrap(), [set(&["a"])].into());
    assert_eq!(valset(&cat, &"x".into(), &ops, &Order::new(), 100).unwrap(), [set(&[]), set(&["a"])].into());
    // A total order below a stabilized x leaves one value.
    let all = set(&["e1", "e2", "x"]);
    let total = order(&[("e1", "e2"), ("e2", "x")]);
    assert_eq!(valset(&cat, &"x".into(), &all, &total, 100).unwrap(), [set(&["a", "b"])].into());
    assert!(matches!(valset(&cat, &"x".into(), &set(&["e1"]), &Order::new(), 100), Err(EsdsError::Valset(_))));
    assert!(matches!(valset(&cat, &"x".into(), &all, &Order::new(), 3), Err(EsdsError::Valset(_))));
    assert_eq!(valset(&cat, &"x".into(), &all, &Order::new(), 4).unwrap().len(), 4);
}

#[test]
fn catalog_rejects_bad_prev() {
    let mut a = add("a", "a");
    a.prev = set(&["b"]);
    let mut b = add("b", "b");
    b.prev = set(&["a"]);
    assert!(matches!(Catalog::new([a.clone(), b]), Err(EsdsError::Config(_))));
    assert!(matches!(Catalog::new([a]), Err(EsdsError::Config(_))));
    assert!(matches!(Catalog::new([add("a", "a"), add("a", "b")]), Err(EsdsError::Config(_))));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn valset_matches_subset_oracle(n in 1usize..7, edges in proptest::collection::vec((0usize..7, 0usize..7), 0..8), kinds in proptest::collection::vec(any::<bool>(), 7), xi in 0usize..7) {
        let ops_list: Vec<Operation> = (0..n).map(|i| if kinds[i] { add(&format!("o{i}"), &format!("e{i}")) } else { read(&format!("o{i}")) }).collect();
        let cat = Catalog::new(ops_list).unwrap();
        // Edges only go from lower to higher index, so the order is acyclic.
        let po: Order = edges.iter().filter(|(a, b)| a < b && *b < n).map(|(a, b)| (format!("o{a}"), format!("o{b}"))).collect();
        let ops: BTreeSet<String> = (0..n).map(|i| format!("o{i}")).collect();
        let x = format!("o{}", xi % n);
        prop_assert_eq!(valset(&cat, &x, &ops, &po, 1 << 10).unwrap(), oracle(&cat, &x, &ops, &po));
    }
}
