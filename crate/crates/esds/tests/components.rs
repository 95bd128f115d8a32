use std::collections::BTreeSet;
use std::sync::Arc;

use liveref_esds::component::*;
use liveref_esds::model::*;
use liveref_esds::ops::{Catalog, OpKind, Operation};
use liveref_esds::system::{compose_parallel, esds_alg, hide_actions, Layout};
use liveref_esds::EsdsError;

fn op(id: &str, client: usize, prev: &[&str], strict: bool) -> Operation {
    Operation { id: id.into(), client, prev: prev.iter().map(|s| s.to_string()).collect(), strict, op: OpKind::Add(id.to_uppercase()) }
}

fn params(clients: usize, replicas: usize) -> Arc<Params> {
    Params::new(Catalog::new([op("x1", 0, &[], false), op("x2", 0, &["x1"], false)]).unwrap(), clients, replicas)
}

fn ids(xs: &[&str]) -> BTreeSet<String> {
    xs.iter().map(|s| s.to_string()).collect()
}

#[test]
fn users_request_needs_prev_requested() {
    let p = params(1, 1);
    let users = build_component("users", &p).unwrap();
    let mut st = users.initial();
    assert_eq!(users.enabled(&st), vec![Action::Request("x1".into())]);
    assert!(users.check(&st, &Action::Request("x2".into())).is_err());
    users.apply(&mut st, &Action::Request("x1".into()));
    assert_eq!(users.enabled(&st), vec![Action::Request("x2".into())]);
    assert!(users.check(&st, &Action::Request("x1".into())).is_err());
}

#[test]
fn do_it_waits_for_prev() {
    let p = params(1, 1);
    let rep = build_component("replica:0", &p).unwrap();
    let mut st = rep.initial();
    let recv = |x: &str| Action::Receive { from: Node::Client(0), to: Node::Replica(0), msg: Message::Request(x.into()) };
    rep.apply(&mut st, &recv("x2"));
    let doit = |x: &str, c| Action::DoIt { replica: 0, op: x.into(), label: Label { counter: c, replica: 0 } };
    assert!(rep.check(&st, &doit("x2", 1)).is_err());
    assert!(rep.enabled(&st).iter().all(|a| !matches!(a, Action::DoIt { .. })));
    rep.apply(&mut st, &recv("x1"));
    assert_eq!(rep.enabled(&st).into_iter().filter(|a| matches!(a, Action::DoIt { .. })).collect::<Vec<_>>(), vec![doit("x1", 1)]);
    rep.apply(&mut st, &doit("x1", 1));
    assert!(rep.check(&st, &doit("x2", 2)).is_ok());
    // l > label_r(y) for every y ∈ done_r[r]
    assert!(rep.check(&st, &doit("x2", 1)).is_err());
}

#[test]
fn esds_i_stabilize_needs_total_order_and_stable_prefix() {
    let p = params(1, 1);
    let spec = build_component("esds-i", &p).unwrap();
    let mut st = spec.initial();
    for x in ["x1", "x2"] {
        spec.apply(&mut st, &Action::Request(x.into()));
    }
    spec.apply(&mut st, &Action::Enter { op: "x1".into(), new_po: Default::default() });
    let ComponentState::Spec(s) = &st else { unreachable!() };
    let e2 = Action::Enter { op: "x2".into(), new_po: least_new_po(&p.catalog, s, &"x2".to_string()) };
    assert!(spec.check(&st, &e2).is_ok());
    // Entering x2 without its client constraint is refused.
    assert!(spec.check(&st, &Action::Enter { op: "x2".into(), new_po: Default::default() }).is_err());
    spec.apply(&mut st, &e2);
    assert!(spec.check(&st, &Action::Stabilize("x2".into())).is_err(), "x1 below x2 is not stabilized");
    assert!(spec.check(&st, &Action::Stabilize("x1".into())).is_ok());
    spec.apply(&mut st, &Action::Stabilize("x1".into()));
    assert!(spec.check(&st, &Action::Stabilize("x2".into())).is_ok());

    let loose = Params::new(Catalog::new([op("y1", 0, &[], false), op("y2", 0, &[], false)]).unwrap(), 1, 1);
    let spec = build_component("esds-i", &loose).unwrap();
    let mut st = spec.initial();
    for x in ["y1", "y2"] {
        spec.apply(&mut st, &Action::Request(x.into()));
        spec.apply(&mut st, &Action::Enter { op: x.into(), new_po: Default::default() });
    }
    assert!(spec.check(&st, &Action::Stabilize("y1".into())).unwrap_err().contains("unordered"));
    let ii = build_component("esds-ii", &loose).unwrap();
    assert!(ii.check(&st, &Action::Stabilize("y1".into())).is_err());
}

#[test]
fn unknown_kinds_are_rejected() {
    let p = params(1, 2);
    for bad in ["replica:2", "frontend:1", "channel:c0:c0", "channel:r0:r0", "mystery", "users:1"] {
        assert!(matches!(build_component(bad, &p), Err(EsdsError::UnknownKind(_))), "{bad}");
    }
    for good in ["users", "frontend:0", "frontend-lossy:0", "replica:1", "channel:c0:r1", "channel:r1:r0", "esds-i", "esds-ii"] {
        assert!(build_component(good, &p).is_ok(), "{good}");
    }
}

#[test]
fn composition_and_hiding() {
    let p = params(1, 1);
    let fe = build_component("frontend:0", &p).unwrap();
    let spec = build_component("esds-i", &p).unwrap();
    assert!(matches!(compose_parallel(vec![fe.clone(), spec]), Err(EsdsError::SignatureClash(_))));

    let ch = build_component("channel:c0:r0", &p).unwrap();
    let sys = compose_parallel(vec![build_component("users", &p).unwrap(), fe, ch]).unwrap();
    let same = hide_actions(sys.clone(), &[]).unwrap();
    assert_eq!(same.hidden, sys.hidden);
    assert!(matches!(hide_actions(sys.clone(), &["teleport"]), Err(EsdsError::UnknownAction(_))));

    // send_c0r0 fires jointly in the front end and the channel.
    let mut s = sys.step(&sys.initial(), &Action::Request("x1".into())).unwrap();
    let send = Action::Send { from: Node::Client(0), to: Node::Replica(0), msg: Message::Request("x1".into()) };
    assert!(sys.is_external(&send));
    s = sys.step(&s, &send).unwrap();
    let ComponentState::Channel(c) = &s[2] else { unreachable!() };
    assert_eq!(c.queue.len(), 1);
    let hidden = hide_actions(sys, &["send"]).unwrap();
    assert!(!hidden.is_external(&send));
}

#[test]
fn gossip_receipt_effect() {
    let p = params(1, 3);
    let rep = build_component("replica:0", &p).unwrap();
    let mut st = rep.initial();
    let lab = |c, r| Label { counter: c, replica: r };
    if let ComponentState::Replica(s) = &mut st {
        s.done[0] = ids(&["x1"]);
        s.done[2] = ids(&["x1"]);
        s.label.insert("x1".into(), lab(3, 0));
    }
    let g = Gossip {
        rcvd: ids(&["x1", "x2"]),
        done: ids(&["x1", "x2"]),
        labels: [("x1".to_string(), lab(1, 1)), ("x2".to_string(), lab(2, 1))].into_iter().collect(),
        stable: ids(&["x2"]),
    };
    rep.apply(&mut st, &Action::Receive { from: Node::Replica(1), to: Node::Replica(0), msg: Message::Gossip(g) });
    let ComponentState::Replica(s) = &st else { unreachable!() };
    assert_eq!(s.rcvd, ids(&["x1", "x2"]));
    assert_eq!(s.done[0], ids(&["x1", "x2"]));
    assert_eq!(s.done[1], ids(&["x1", "x2"]));
    assert_eq!(s.done[2], ids(&["x1", "x2"]));
    assert_eq!(s.label["x1"], lab(1, 1));
    assert_eq!(s.stable[1], ids(&["x2"]));
    // S ∪ ⋂_i done_r[i]
    assert_eq!(s.stable[0], ids(&["x1", "x2"]));
}

#[test]
fn lossy_front_end_never_forwards() {
    let p = params(1, 1);
    let sys = esds_alg(&p, Some(0));
    let s = sys.step(&sys.initial(), &Action::Request("x1".into())).unwrap();
    assert!(sys.enabled(&s).iter().all(|a| !matches!(a, Action::Send { .. })));
    let l = Layout::of(&p);
    let send = Action::Send { from: Node::Client(0), to: Node::Replica(0), msg: Message::Request("x1".into()) };
    assert!(sys.comps[l.frontend(0)].check(&s[l.frontend(0)], &send).is_err());
}

#[test]
fn config_errors_name_the_problem() {
    use liveref_esds::config::Config;
    let e = Config::parse(r#"{"clients": 1, "replicas": 1, "ops": [{"id": "x", "client": 0, "op": "read", "strcit": true}]}"#).unwrap_err();
    assert!(e.to_string().contains("ops[0]"), "{e}");
    let c = Config::parse(r#"{"clients": 1, "replicas": 1, "ops": [{"id": "x", "client": 3, "op": "read"}]}"#).unwrap();
    assert!(matches!(c.params(), Err(EsdsError::Config(_))));
    let c = Config::parse(r#"{"clients": 1, "replicas": 2, "ops": [{"id": "x", "client": 0, "op": {"add": "e"}}]}"#).unwrap();
    assert_eq!(c.run, liveref_esds::config::RunConfig::default());
    assert_eq!(c.params().unwrap().catalog.len(), 1);
}
