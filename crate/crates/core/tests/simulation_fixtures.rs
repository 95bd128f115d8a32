use liveref_core::fixtures::{bsim1, collapsed_chain, db_fixture, t1};
use liveref_core::liveness::is_live;
use liveref_core::mapping::{check_live_index_mapping, find_index_mapping, MappingClause, MappingSearch};
use liveref_core::simulation::*;
use liveref_core::streett::{enumerate_live_lassos, live_trace_inclusion, safe_trace_inclusion, InclusionBounds};
use liveref_core::{Fragment, Lasso, Step};

fn step(a: &liveref_core::Automaton<String>, from: &str, action: &str, to: &str) -> Step {
    Step { from: a.state_by_name(from).unwrap(), action: a.action_id(action).unwrap(), to: a.state_by_name(to).unwrap() }
}

#[test]
fn db_plain_forward_passes() {
    let f = db_fixture(&["q"]);
    let r = check_forward_sim(&f.a, &f.b, &f.cand).unwrap();
    assert_eq!(r.verdict, Verdict::Pass, "{r:?}");
}

#[test]
fn db_live_forward_fails_at_2a_on_skip() {
    let f = db_fixture(&["q"]);
    let p = Problem::live(&f.a, &f.l, &f.b, &f.m);
    let r = check_live_forward_sim(p, &f.cand, &Certificates::default()).unwrap();
    assert_eq!(r.verdict, Verdict::Fail);
    let cx = r.counterexample.as_ref().unwrap();
    assert_eq!(cx.clause, "live-fwd clause 2a");
    assert_eq!(cx.pair.as_deref(), Some("served(q)"));
    assert_eq!(cx.step.as_ref().unwrap(), &["{}|{}".to_string(), "request(q)".into(), "{}|{}".into()]);
    assert_eq!(cx.abstract_state.as_deref(), Some("{}|{}"));
    // Replaying the single-step check reproduces the failure.
    let ids = cx.ids;
    assert!(!replay_forward_step(p, &f.cand, true, ids.step.unwrap(), ids.abstract_state.unwrap()).unwrap());
    let fine = step(&f.a, "{}|{}", "request(q)", "{q}|{}");
    assert!(replay_forward_step(p, &f.cand, true, fine, f.b.state_by_name("{}|{}").unwrap()).unwrap());
}

#[test]
fn db_inclusions() {
    let f = db_fixture(&["q"]);
    let v = live_trace_inclusion(&f.a, &f.l, &f.b, &f.m, InclusionBounds::default()).unwrap();
    let cx = v.counterexample().expect("lossy run is unmatched");
    let _ = cx;
    match &v.outcome {
        liveref_core::streett::InclusionOutcome::Counterexample { trace, .. } => assert_eq!(trace.render(), "(request(q))^w"),
        o => panic!("{o:?}"),
    }
    assert!(safe_trace_inclusion(&f.a, &f.b, 10_000).unwrap().holds());
    assert!(safe_trace_inclusion(&f.b, &f.a, 10_000).unwrap().holds());
    let same = live_trace_inclusion(&f.b, &f.m, &f.b, &f.m, InclusionBounds::default()).unwrap();
    assert!(same.holds());
}

#[test]
fn identity_passes_everything() {
    let a = liveref_core::fixtures::db_spec(&["q", "r"]);
    let m = liveref_core::fixtures::db_pairs(&a, &["q", "r"]);
    let cand = Candidate::new(StateRelation::identity(a.num_states())).with_h(PairMap::by_id(&m, &m).unwrap());
    for r in [
        check_forward_sim(&a, &a, &cand).unwrap(),
        check_refinement(&a, &a, &cand).unwrap(),
        check_backward_sim(&a, &a, &cand).unwrap(),
        check_history(&a, &a, &cand).unwrap(),
        check_prophecy(&a, &a, &cand).unwrap(),
    ] {
        assert_eq!(r.verdict, Verdict::Pass, "{r:?}");
    }
    let p = Problem::live(&a, &m, &a, &m);
    let c = Certificates::default();
    for r in [
        check_live_forward_sim(p, &cand, &c).unwrap(),
        check_live_refinement(p, &cand, &c).unwrap(),
        check_live_backward_sim(p, &cand, &c).unwrap(),
        check_live_history(p, &cand, &c).unwrap(),
        check_live_prophecy(p, &cand, &c).unwrap(),
    ] {
        assert_eq!(r.verdict, Verdict::Pass, "{r:?}");
    }
}

#[test]
fn identity_internal_loop_is_sometimes_silent() {
    let a = t1();
    let cand = Candidate::new(StateRelation::identity(a.num_states()));
    let p = Problem::live(&a, &[], &a, &[]);
    assert!(always_silent_transitions(p, &cand).unwrap().is_empty());
    assert_eq!(sometimes_silent_transitions(p, &cand).unwrap(), vec![step(&a, "s1", "t", "s1")]);
    let c = Certificates::default();
    assert_eq!(check_live_forward_sim(p, &cand, &c).unwrap().verdict, Verdict::Pass);
    // The tail (s1 t)^w takes only steps that could be matched by staying put.
    let r = check_live_backward_sim(p, &cand, &c).unwrap();
    assert_eq!(r.failed_clause(), Some("live-bwd clause 4"));
}

#[test]
fn empty_relation_fails_clause_1() {
    let f = db_fixture(&["q"]);
    let cand = Candidate::new(StateRelation::empty(f.b.num_states(), f.a.num_states()));
    let r = check_forward_sim(&f.b, &f.a, &cand).unwrap();
    assert_eq!(r.failed_clause(), Some("fwd clause 1"));
}

#[test]
fn bsim1_backward_not_forward() {
    let f = bsim1();
    let r = check_backward_sim(&f.a, &f.b, &f.cand).unwrap();
    assert_eq!(r.verdict, Verdict::Pass, "{r:?}");
    let r = check_forward_sim(&f.a, &f.b, &f.cand).unwrap();
    assert_eq!(r.failed_clause(), Some("fwd clause 2"));
    let p = Problem::live(&f.a, &f.l, &f.b, &f.m);
    let r = check_live_backward_sim(p, &f.cand, &Certificates::default()).unwrap();
    assert_eq!(r.verdict, Verdict::Pass, "{r:?}");
    let r = check_live_forward_sim(p, &f.cand, &Certificates::default()).unwrap();
    assert_eq!(r.verdict, Verdict::Fail);
    // Both t steps can be matched by staying put.
    let ss = sometimes_silent_transitions(p, &f.cand).unwrap();
    assert_eq!(ss, vec![step(&f.a, "s1", "t", "s2"), step(&f.a, "s1", "t", "s3")]);
}

#[test]
fn bsim1_manual_certificates_are_conditional() {
    let f = bsim1();
    let p = Problem::live(&f.a, &f.l, &f.b, &f.m);
    let certs = Certificates { manual_only: true, ..Default::default() };
    let r = check_live_backward_sim(p, &f.cand, &certs).unwrap();
    assert_eq!(r.verdict, Verdict::Conditional);
    assert_eq!(r.obligations.len(), 1);
    assert_eq!(r.verdict.exit_code(), 2);
}

fn lasso(a: &liveref_core::Automaton<String>, stem: &[&str], cycle: &[&str]) -> Lasso {
    let frag = |xs: &[&str]| {
        let mut f = Fragment::single(a.state_by_name(xs[0]).unwrap());
        for w in xs[1..].chunks(2) {
            f.push(a.action_id(w[0]).unwrap(), a.state_by_name(w[1]).unwrap());
        }
        f
    };
    Lasso::new(frag(stem), frag(cycle)).unwrap()
}

#[test]
fn bsim1_induced_digraph_and_backward_correspondence() {
    let f = bsim1();
    let p = Problem::live(&f.a, &f.l, &f.b, &f.m);
    let alpha = lasso(&f.a, &["s0"], &["s0", "a", "s1", "t", "s3", "c", "s0"]);
    let dg = build_induced_digraph(p, &f.cand, &alpha, 3).unwrap();
    assert_eq!(dg.roots.len(), 2);
    // Levels: {u1,u2}, {u3,u4}, {u4}, {u1,u2}.
    assert_eq!(dg.nodes.len(), 7);
    // Hand enumeration: u1->u3, u2->u4, u4->u4, u4->u1, u4->u2.
    assert_eq!(dg.edges.len(), 5);
    let roots_only = build_induced_digraph(p, &f.cand, &alpha, 0).unwrap();
    assert_eq!(roots_only.nodes.len(), 2);
    assert!(roots_only.edges.is_empty());

    let c = build_correspondence_backward(p, &f.cand, &alpha).unwrap();
    let names: Vec<&str> = c.lasso.cycle.states.iter().map(|s| f.b.name(*s)).collect();
    assert_eq!(names, ["u2", "u4", "u2"]);
    assert_eq!(validate_correspondence(p, &f.cand, &alpha, &c).unwrap(), Ok(()));
}

#[test]
fn collapsed_chain_forward_correspondence() {
    let f = collapsed_chain();
    let p = Problem::live(&f.a, &f.l, &f.b, &f.m);
    let r = check_live_forward_sim(p, &f.cand, &Certificates::default()).unwrap();
    assert_eq!(r.verdict, Verdict::Pass, "{r:?}");
    let alpha = lasso(&f.a, &["s0"], &["s0", "a", "s1", "b", "s2", "c", "s0"]);
    let c = build_correspondence_forward(p, &f.cand, &alpha).unwrap();
    assert_eq!(validate_correspondence(p, &f.cand, &alpha, &c).unwrap(), Ok(()));
    assert_eq!(c.mapping.increment, c.lasso.cycle_len());
    assert!(c.mapping.table.windows(2).all(|w| w[1] == w[0] + 1));
    // Every live lasso of the concrete side corresponds.
    for alpha in enumerate_live_lassos(&f.a, &f.l, 3, 4) {
        let c = build_correspondence_forward(p, &f.cand, &alpha).unwrap();
        assert_eq!(validate_correspondence(p, &f.cand, &alpha, &c).unwrap(), Ok(()));
        assert_eq!(liveref_core::lasso_trace(&alpha, &f.a), liveref_core::lasso_trace(&c.lasso, &f.b));
    }
}

#[test]
fn removing_a_green_breaks_5b() {
    let f = collapsed_chain();
    let p = Problem::live(&f.a, &f.l, &f.b, &f.m);
    let alpha = lasso(&f.a, &["s0"], &["s0", "a", "s1", "b", "s2", "c", "s0"]);
    let c = build_correspondence_forward(p, &f.cand, &alpha).unwrap();
    let mut m = f.m.clone();
    m[0].green = liveref_core::StateSet::empty(f.b.num_states());
    let mut cand = f.cand.clone();
    cand.h = PairMap::by_id(&[], &[]).unwrap();
    let links: Vec<_> = vec![(&m[0], &f.cand.h.get("q0").unwrap().pair)];
    let rel = |s, u| f.cand.g.contains(s, u);
    let v = check_live_index_mapping(&f.a, &alpha, &f.b, &c.lasso, &rel, &links, &c.mapping).unwrap();
    assert_eq!(v.unwrap_err().clause, MappingClause::Green);
    assert!(!is_live(&c.lasso, &m));
}

#[test]
fn find_mapping_on_collapsed_chain() {
    let f = collapsed_chain();
    let alpha = lasso(&f.a, &["s0"], &["s0", "a", "s1", "b", "s2", "c", "s0"]);
    let beta = lasso(&f.b, &["u0"], &["u0", "a", "u12", "c", "u0"]);
    let rel = |s, u| f.cand.g.contains(s, u);
    match find_index_mapping(&f.a, &alpha, &f.b, &beta, &rel, 1000) {
        MappingSearch::Found(m) => {
            let ok = liveref_core::mapping::check_index_mapping(&f.a, &alpha, &f.b, &beta, &rel, &m).unwrap();
            assert_eq!(ok, Ok(()));
            assert_eq!(m.increment % beta.cycle_len(), 0);
        }
        other => panic!("{other:?}"),
    }
}

#[test]
fn silent_loop_hidden_by_unreachable_abstract_state() {
    let a = liveref_core::Automaton::builder()
        .states(["s0".to_string(), "s3".to_string()])
        .start("s0".to_string())
        .external("b")
        .internal("t")
        .step("s0".into(), "t", "s0".into())
        .step("s0".into(), "b", "s3".into())
        .step("s3".into(), "t", "s3".into())
        .build()
        .unwrap();
    let b = liveref_core::Automaton::builder()
        .states(["u0".to_string(), "u1".to_string(), "u2".to_string()])
        .start("u0".to_string())
        .external("b")
        .internal("t")
        .step("u0".into(), "b", "u2".into())
        .step("u2".into(), "t", "u2".into())
        .step("u1".into(), "t", "u1".into())
        .step("u1".into(), "b", "u2".into())
        .build()
        .unwrap();
    let g = StateRelation::from_pairs(2, 3, [(0, 0), (0, 1), (1, 2)]);
    let mut cand = Candidate::new(g);
    cand.inv_b = Some(liveref_core::StateSet::full(3));
    let p = Problem::live(&a, &[], &b, &[]);
    // s0 t s0 is matched by u1 t u1, so it is not always-silent by definition ...
    let silent = always_silent_transitions(p, &cand).unwrap();
    assert!(!silent.iter().any(|(s, _)| *s == step(&a, "s0", "t", "s0")));
    // ... yet from u0, the only reachable partner, it can only stutter.
    let r = check_live_forward_sim(p, &cand, &Certificates::default()).unwrap();
    assert_eq!(r.failed_clause(), Some("live-fwd clause 3"), "{r:?}");
    assert!(r.counterexample.unwrap().lasso.is_some());
}
