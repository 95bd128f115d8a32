mod common;

use std::collections::BTreeSet;

use common::{run_small, small};
use liveref_core::lattice::check_lattice_sampled;
use liveref_core::simulation::{check_image_finite, Verdict};
use liveref_core::testing::random_automaton;
use liveref_core::testing::{rng, Shape};
use liveref_esds::checkers::*;
use liveref_esds::component::Variant;
use liveref_esds::config::RunConfig;
use liveref_esds::lattices::{req_lattice, stab_lattice};
use liveref_esds::log::{digest, log_lines, parse_log, render_log, replay, Line, SystemKind};
use liveref_esds::model::*;
use liveref_esds::monitor::{impl_family, m_family, monitor_pairs, Status};
use liveref_esds::scheduler::{run_fair_scheduler, Execution};
use liveref_esds::system::{esds_alg, esds_spec, replica, Layout};
use liveref_esds::EsdsError;

#[test]
fn same_seed_same_log() {
    let (cfg, _, a) = run_small(3, 20_000, None);
    let (_, _, b) = run_small(3, 20_000, None);
    let la = render_log(&log_lines(&cfg, SystemKind::Alg, &a));
    assert_eq!(la, render_log(&log_lines(&cfg, SystemKind::Alg, &b)));
    let (cfg4, _, c) = run_small(4, 20_000, None);
    assert_ne!(la, render_log(&log_lines(&cfg4, SystemKind::Alg, &c)));
}

#[test]
fn quiescent_run_discharges_everything() {
    let cfg = small();
    let (_, p, out) = run_small(cfg.run.seed, cfg.run.steps, None);
    assert!(out.quiescent);
    assert!(out.audit.within_bound(), "{:?}", out.audit);
    let exec = &out.exec;
    for fam in [m_family(&p), impl_family(&p)] {
        let rep = monitor_pairs(&exec.states, "M-I", &fam);
        assert!(rep.outstanding().is_empty(), "{:?}", rep.outstanding());
        assert!(rep.pairs.iter().all(|s| s.status == Status::Discharged));
    }
    let f = check_sim_f(&p, exec, Mutation::None);
    assert!(f.passed(), "{:?}", f.counterexample);
    assert_eq!(f.validated, exec.len());
    let g = check_sim_g(&p, &f.abstract_exec);
    assert!(g.passed(), "{:?}", g.counterexample);
    assert_eq!(g.validated, f.abstract_exec.len());
}

#[test]
fn strict_responses_wait_for_stability() {
    let (_, p, out) = run_small(11, 20_000, None);
    let l = Layout::of(&p);
    let mut seen = 0;
    for (i, a) in out.exec.actions.iter().enumerate() {
        if let Action::Send { from: Node::Replica(r), msg: Message::Response(x, _), .. } = a {
            if p.catalog.op(x).strict {
                seen += 1;
                assert!(intersect_all(&replica(&out.exec.states[i], &l, *r).stable).contains(x));
            }
        }
    }
    assert!(seen >= 2);
}

#[test]
fn two_nonstrict_ops_one_client() {
    let mut cfg = small();
    cfg.clients = 1;
    cfg.ops.retain(|o| o.id == "x1" || o.id == "x3");
    let p = cfg.params().unwrap();
    let out = run_fair_scheduler(&esds_alg(&p, None), &cfg.run).unwrap();
    assert!(out.quiescent);
    let users = liveref_esds::system::users(out.exec.last());
    assert_eq!(users.responded, ["x1".to_string(), "x3".to_string()].into());
}

#[test]
fn truncated_run_leaves_stability_outstanding() {
    let (_, p, out) = run_small(7, 40, None);
    assert!(!out.quiescent);
    let rep = monitor_pairs(&out.exec.states, "M-I", &m_family(&p));
    let late: Vec<&str> = rep.outstanding().iter().map(|s| s.id.as_str()).collect();
    assert!(late.iter().any(|id| id.starts_with("SpStab")), "{late:?}");
}

#[test]
fn lossy_front_end_leaves_requests_outstanding() {
    // x6 needs x3, which never reaches a replica, so client 1 keeps
    // resending it and the run ends at the step budget.
    let (_, p, out) = run_small(7, 3000, Some(0));
    assert!(!out.quiescent);
    assert_eq!(out.exec.len(), 3000);
    let rep = monitor_pairs(&out.exec.states, "impl", &impl_family(&p));
    for x in ["x1", "x3", "x5", "x6"] {
        let id = format!("ImpReq({x})");
        assert_eq!(rep.status(&id), Some(Status::Outstanding), "{id}");
    }
    assert_eq!(rep.status("ImpReq(x2)"), Some(Status::Discharged));
}

#[test]
fn discharged_requests_have_responses() {
    for seed in 0..30 {
        let steps = [60, 150, 20_000][seed as usize % 3];
        let (_, p, out) = run_small(seed, steps, None);
        let rep = monitor_pairs(&out.exec.states, "M-I", &m_family(&p));
        for x in p.catalog.ids() {
            if rep.status(&format!("SpReq({x})")) == Some(Status::Discharged) {
                assert!(out.exec.actions.iter().any(|a| matches!(a, Action::Response(y, _) if y == x)), "seed {seed} {x}");
            }
        }
    }
}

#[test]
fn f_and_g_validate_many_runs() {
    for seed in 0..40 {
        let (_, p, out) = run_small(seed, if seed % 4 == 0 { 70 } else { 20_000 }, None);
        let f = check_sim_f(&p, &out.exec, Mutation::None);
        assert!(f.passed(), "seed {seed}: {:?}", f.counterexample);
        let g = check_sim_g(&p, &f.abstract_exec);
        assert!(g.passed(), "seed {seed}: {:?}", g.counterexample);
        // The abstract executions are executions of their systems.
        for (exec, sys) in [(&f.abstract_exec, esds_spec(&p, Variant::II)), (&g.abstract_exec, esds_spec(&p, Variant::I))] {
            assert_eq!(exec.states[0], sys.initial());
            for (i, a) in exec.actions.iter().enumerate() {
                assert_eq!(sys.step(&exec.states[i], a).as_ref(), Ok(&exec.states[i + 1]));
            }
        }
        if out.quiescent {
            let rep = monitor_pairs(&g.abstract_exec.states, "M-I", &m_family(&p));
            assert!(rep.outstanding().is_empty());
        }
    }
}

#[test]
fn responses_in_transit_count_as_reported() {
    let (_, p, out) = run_small(7, 20_000, None);
    let hit = out.exec.states.iter().filter(|s| !potential_rept(&p, s).is_empty()).count();
    assert!(hit > 0);
    assert!(check_sim_f(&p, &out.exec, Mutation::None).passed());
}

#[test]
fn implementation_po_only_grows() {
    for seed in 0..10 {
        let (_, p, out) = run_small(seed, 20_000, None);
        let mut prev = BTreeSet::new();
        for s in &out.exec.states {
            let po = implementation_po(&p, s);
            assert!(prev.is_subset(&po), "seed {seed}");
            prev = po;
        }
    }
}

#[test]
fn dropping_add_constraints_is_caught_on_gossip() {
    let (_, p, out) = run_small(7, 20_000, None);
    let f = check_sim_f(&p, &out.exec, Mutation::DropAddConstraints);
    assert_eq!(f.verdict, Verdict::Fail);
    let cx = f.counterexample.unwrap();
    assert_eq!(cx.clause, "live-fwd clause 2b");
    assert!(cx.pair.unwrap().starts_with("SpStab"));
    let i: usize = cx.step.unwrap()[0].parse().unwrap();
    assert!(matches!(out.exec.actions[i], Action::Receive { msg: Message::Gossip(_), .. }));
}

#[test]
fn g_on_a_spec_run() {
    let cfg = small();
    let p = cfg.params().unwrap();
    let rc = RunConfig { steps: 500, ..cfg.run.clone() };
    let out = run_fair_scheduler(&esds_spec(&p, Variant::II), &rc).unwrap();
    assert_eq!(out.exec.len(), 500);
    let g = check_sim_g(&p, &out.exec);
    assert!(g.passed(), "{:?}", g.counterexample);
    assert_eq!(g.validated, 500);
    let empty = Execution { states: vec![esds_spec(&p, Variant::II).initial()], actions: vec![] };
    assert!(check_sim_g(&p, &empty).passed());
}

#[test]
fn replay_round_trip_and_tampering() {
    let (cfg, _, out) = run_small(5, 20_000, None);
    let lines = log_lines(&cfg, SystemKind::Alg, &out);
    let text = render_log(&lines);
    let parsed = parse_log(&text).unwrap();
    let r = replay(&parsed).unwrap();
    assert_eq!(r.exec, out.exec);
    assert!(r.header.quiescent);

    let mut bad = parsed.clone();
    let k = bad.iter().position(|l| matches!(l, Line::Event { index: 9, .. })).unwrap();
    if let Line::Event { post, .. } = &mut bad[k] {
        *post = digest(&out.exec.states[0]);
    }
    assert!(matches!(replay(&bad), Err(EsdsError::Replay { index: 9, .. })));
    assert!(matches!(parse_log("{\"kind\":\"event\"}"), Err(EsdsError::Malformed(_))));
}

#[test]
fn stabilize_without_total_order_is_rejected() {
    let mut cfg = small();
    cfg.run.steps = 500;
    let p = cfg.params().unwrap();
    let out = run_fair_scheduler(&esds_spec(&p, Variant::II), &cfg.run).unwrap();
    let mut lines = log_lines(&cfg, SystemKind::SpecII, &out);
    // First state with two operations the order leaves unrelated.
    let (i, x) = (0..out.exec.len())
        .find_map(|i| {
            let s = liveref_esds::system::spec(&out.exec.states[i]);
            s.ops.iter().find(|x| s.ops.iter().any(|y| y != *x && !s.po.contains(&((*x).clone(), y.clone())) && !s.po.contains(&(y.clone(), (*x).clone())))).map(|x| (i, x.clone()))
        })
        .expect("some state has unordered operations");
    let k = lines.iter().position(|l| matches!(l, Line::Event { index, .. } if *index == i)).unwrap();
    if let Line::Event { action, .. } = &mut lines[k] {
        *action = Action::Stabilize(x);
    }
    match replay(&lines) {
        Err(EsdsError::Replay { index, detail }) => {
            assert_eq!(index, i);
            assert!(detail.contains("unordered"), "{detail}");
        }
        other => panic!("{other:?}"),
    }
}

#[test]
fn lattices_hold_on_sampled_states() {
    let mut sample = Vec::new();
    let mut p = None;
    for seed in 0..100 {
        let (_, params, out) = run_small(seed, 20_000, None);
        sample.extend(out.exec.states);
        p = Some(params);
    }
    assert!(sample.len() >= 10_000, "{}", sample.len());
    let p = p.unwrap();
    for x in p.catalog.ids() {
        for lat in [req_lattice(&p, x).unwrap(), stab_lattice(&p, x).unwrap()] {
            let rep = check_lattice_sampled(&lat, &sample).unwrap();
            assert!(rep.ok(), "{x}: {:?}", rep.violations.first());
            assert_eq!(rep.label, "sampled, not a proof");
        }
    }
}

#[test]
fn lattice_shapes() {
    let p = small().params().unwrap();
    let req = req_lattice(&p, "x4").unwrap();
    assert_eq!(req.len(), 1 + 2 * 4 + 2 * 5 + 1);
    let mut succ = req.succ("req3_r0").unwrap();
    succ.sort();
    assert_eq!(succ, ["req4n_r0", "req4s_r0/a"]);
    assert_eq!(req.succ("req4s_r1/e").unwrap(), ["req5_r1"]);
    let stab = stab_lattice(&p, "x1").unwrap();
    assert_eq!(stab.pairs[stab.top].id, "stab_top");
    assert_eq!(stab.pairs[stab.bottom].id, "req1");
    assert!(req_lattice(&p, "x9").is_err());
}

#[test]
fn dropping_the_gossip_pair_breaks_the_stab_lattice() {
    let p = small().params().unwrap();
    let mut def: liveref_core::format::LatticeDef = serde_json::from_str(liveref_esds::lattices::STAB).unwrap();
    def.pairs.retain(|d| d.id != "stab1_{r}");
    def.order.retain(|[a, b]| a != "stab1_{r}" && b != "stab1_{r}");
    def.order.push(["req3_{r}".into(), "stab2_{r}".into()]);
    let text = serde_json::to_string(&def).unwrap();
    let (_, _, out) = run_small(7, 20_000, None);
    let l = Layout::of(&p);
    let lat = liveref_esds::lattices::build_lattice(&text, &p, "x1", &liveref_esds::lattices::shipped).unwrap();
    let rep = check_lattice_sampled(&lat, &out.exec.states).unwrap();
    let v = rep.violations.first().expect("violation");
    assert!(v.element.starts_with("req3_r"));
    let r: usize = v.element["req3_r".len()..].parse().unwrap();
    let s = &out.exec.states[v.sample];
    assert!(replica(s, &l, r).done[r].contains("x1"));
    assert!(!(0..l.replicas).all(|i| replica(s, &l, i).done[i].contains("x1")));
}

#[test]
fn unbounded_image_is_reported() {
    let p = small().params().unwrap();
    let a = random_automaton(&mut rng(1), Shape { max_states: 3, ..Shape::default() });
    let b = esds_alg(&p, None);
    let rel = |_: &String, _: &liveref_esds::system::SysState| true;
    let rep = check_image_finite(&a, &b, &rel, &[50, 200, 800]);
    assert_eq!(rep.verdict, Verdict::Fail);
    assert_eq!(rep.counterexample.unwrap().clause, "bwd image-finite");
}
