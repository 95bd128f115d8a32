//! Acceptance gate: one PASS/FAIL line per criterion. Limits are pinned
//! below; a failing criterion makes the target exit nonzero.

use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use liveref_core::fixtures::{chain, chain_pairs, collapsed_chain, db_registry, Fixture};
use liveref_core::format::{load_automaton, load_lattice, read_json, CandidateDef, PairsFile};
use liveref_core::lattice::{certify_lattice, check_lattice_sampled, check_lattice_structure};
use liveref_core::liveness::{is_live, satisfies_pair, IndexedPair};
use liveref_core::mapping::MappingClause;
use liveref_core::simulation::*;
use liveref_core::streett::{
    closure_member, enumerate_live_lassos, live_trace_inclusion, streett_emptiness, InclusionBounds, InclusionOutcome,
};
use liveref_core::testing::{break_clause_4, lasso_exists_within, random_automaton, random_instance, random_lattice, random_pairs, rng, Shape};
use liveref_core::{lasso_trace, Automaton, Lasso};
use liveref_esds::checkers::{check_sim_f, check_sim_g, Mutation};
use liveref_esds::config::Config;
use liveref_esds::lattices::{req_lattice, stab_lattice};
use liveref_esds::log::{log_lines, parse_log, render_log, replay, SystemKind};
use liveref_esds::monitor::{impl_family, m_family, monitor_pairs, Status};
use liveref_esds::scheduler::run_fair_scheduler;
use liveref_esds::system::{esds_alg, SysState};

const DB_LIMIT: Duration = Duration::from_secs(1);
const SOUNDNESS_MIN_INSTANCES: usize = 500;
const SOUNDNESS_MAX_DRAWS: usize = 5000;
const SOUNDNESS_LIMIT: Duration = Duration::from_secs(300);
const ORACLE_INSTANCES: usize = 1000;
const ORACLE_LIMIT: Duration = Duration::from_secs(120);
/// Bounded listing used as the second, one-sided oracle.
const ORACLE_LISTING: (usize, usize) = (3, 4);
const RANDOM_LATTICES: usize = 100;
const LASSOS_PER_CANDIDATE: usize = 50;
const CORRESPONDENCE_LASSO_BOUND: usize = 3;
const ESDS_LIMIT: Duration = Duration::from_secs(10);
const LOSSY_STEPS: usize = 3000;
const IMAGE_PROBE: [usize; 3] = [50, 200, 800];

type Outcome = Result<String, String>;

fn corpus(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../core/fixtures").join(name)
}

fn esds_data(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../esds/data").join(name)
}

fn ensure(ok: bool, msg: impl Into<String>) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn load_db() -> Result<Fixture, String> {
    let reg = db_registry();
    let e = |x: liveref_core::CoreError| x.to_string();
    let a = load_automaton(&corpus("dbi.json")).map_err(e)?;
    let b = load_automaton(&corpus("dbs.json")).map_err(e)?;
    let pairs: PairsFile = read_json(&corpus("db_pairs.json")).map_err(e)?;
    let l = pairs.index(&a, &reg).map_err(e)?;
    let m = pairs.index(&b, &reg).map_err(e)?;
    let cand = read_json::<CandidateDef>(&corpus("db_cand.json")).map_err(e)?.resolve(&a, &l, &b, &reg).map_err(e)?;
    Ok(Fixture { a, l, b, m, cand })
}

fn criterion_1() -> Outcome {
    let t = Instant::now();
    let f = load_db()?;
    let fwd = check_forward_sim(&f.a, &f.b, &f.cand).map_err(|e| e.to_string())?;
    ensure(fwd.verdict == Verdict::Pass, format!("plain forward simulation: {:?}", fwd.verdict))?;
    let p = Problem::live(&f.a, &f.l, &f.b, &f.m);
    let live = check_live_forward_sim(p, &f.cand, &Certificates::default()).map_err(|e| e.to_string())?;
    let cx = live.counterexample.as_ref().ok_or("live forward simulation did not fail")?;
    ensure(live.verdict == Verdict::Fail && cx.clause == "live-fwd clause 2a", format!("live forward: {:?} at {}", live.verdict, cx.clause))?;
    let skip = ["{}|{}".to_string(), "request(q)".to_string(), "{}|{}".to_string()];
    ensure(cx.step.as_ref() == Some(&skip), format!("counterexample at {:?}, not the skip step", cx.step))?;
    let inc = live_trace_inclusion(&f.a, &f.l, &f.b, &f.m, InclusionBounds::default()).map_err(|e| e.to_string())?;
    match &inc.outcome {
        InclusionOutcome::Counterexample { trace, .. } if trace.render() == "(request(q))^w" => {}
        other => return Err(format!("live trace inclusion gave {other:?}")),
    }
    let took = t.elapsed();
    ensure(took < DB_LIMIT, format!("took {took:?}"))?;
    Ok(format!("fwd pass, live-fwd fails at clause 2a on the skip step, (request(q))^w unmatched, {took:?}"))
}

/// Passing (instance, forward?, backward?) triples from the soundness sweep.
struct Passing {
    fixture: Fixture,
    fwd: bool,
    bwd: bool,
}

fn soundness_sweep() -> (Outcome, Vec<Passing>) {
    let t = Instant::now();
    let mut r = rng(7);
    let mut passing = Vec::new();
    let mut violations = Vec::new();
    let mut draws = 0;
    while passing.len() < SOUNDNESS_MIN_INSTANCES && draws < SOUNDNESS_MAX_DRAWS {
        draws += 1;
        let inst = random_instance(&mut r, Shape::default());
        let f = inst.fixture;
        let p = Problem::live(&f.a, &f.l, &f.b, &f.m);
        let certs = Certificates::default();
        let fwd = check_live_forward_sim(p, &f.cand, &certs).map(|x| x.passed()).unwrap_or(false);
        let bwd = check_live_backward_sim(p, &f.cand, &certs).map(|x| x.passed()).unwrap_or(false);
        if !fwd && !bwd {
            continue;
        }
        match live_trace_inclusion(&f.a, &f.l, &f.b, &f.m, InclusionBounds::default()) {
            Ok(v) => {
                if let InclusionOutcome::Counterexample { trace, .. } = &v.outcome {
                    violations.push(format!("draw {draws} ({:?}): {} unmatched", inst.derivation, trace.render()));
                }
            }
            Err(e) => violations.push(format!("draw {draws}: {e}")),
        }
        passing.push(Passing { fixture: f, fwd, bwd });
    }
    let took = t.elapsed();
    let out = if let Some(v) = violations.first() {
        Err(format!("{} violations, first: {v}", violations.len()))
    } else if passing.len() < SOUNDNESS_MIN_INSTANCES {
        Err(format!("only {} passing candidates in {draws} draws", passing.len()))
    } else if took >= SOUNDNESS_LIMIT {
        Err(format!("took {took:?}"))
    } else {
        Ok(format!("{} passing candidates ({draws} draws), 0 violations, {took:?}", passing.len()))
    };
    (out, passing)
}

fn criterion_3() -> Outcome {
    let t = Instant::now();
    let mut r = rng(3);
    let mut disagreements = Vec::new();
    let mut nonempty = 0;
    for i in 0..ORACLE_INSTANCES {
        let a = random_automaton(&mut r, Shape::default());
        let n = a.num_states();
        let l = random_pairs(&mut r, n, 3, "p");
        let v = streett_emptiness(&a, &l, None);
        let exact = lasso_exists_within(&a, &l, n - 1, n * (l.len() + 1));
        let listed = enumerate_live_lassos(&a, &l, ORACLE_LISTING.0, ORACLE_LISTING.1);
        nonempty += usize::from(!v.is_empty());
        if v.is_empty() == exact {
            disagreements.push(format!("instance {i}: emptiness {} vs exhaustive search", v.is_empty()));
        }
        if v.is_empty() && !listed.is_empty() {
            disagreements.push(format!("instance {i}: empty but a listed lasso is live"));
        }
        if let Some(w) = &v.witness {
            if !(w.is_lasso_of(&a) && is_live(w, &l)) {
                disagreements.push(format!("instance {i}: witness is not a live lasso"));
            }
        }
    }
    let took = t.elapsed();
    ensure(disagreements.is_empty(), format!("{} disagreements, first: {}", disagreements.len(), disagreements.first().cloned().unwrap_or_default()))?;
    ensure(took < ORACLE_LIMIT, format!("took {took:?}"))?;
    Ok(format!("{ORACLE_INSTANCES} instances ({nonempty} nonempty), 0 disagreements, {took:?}"))
}

fn derived_holds(a: &Automaton<String>, l: &[IndexedPair], d: &IndexedPair) -> Result<(), String> {
    ensure(closure_member(a, l, d).member, format!("derived pair {} is not a closure member", d.id))?;
    let n = a.num_states();
    for lasso in enumerate_live_lassos(a, l, n.min(3), n.min(4)) {
        ensure(satisfies_pair(&lasso, d), format!("a live lasso violates derived pair {}", d.id))?;
    }
    Ok(())
}

fn criterion_4() -> Outcome {
    let a = chain();
    let l = chain_pairs(&a);
    let reg = db_registry();
    let lat = load_lattice(&corpus("chain_lattice.json"), 4, &|p| p.resolve(&a, &reg)).map_err(|e| e.to_string())?;
    let cert = certify_lattice(&a, &l, &lat);
    ensure(cert.certified, format!("corpus chain lattice refused: {:?}", cert.refused))?;
    derived_holds(&a, &l, &lat.derived_pair().index(&a))?;

    let mut r = rng(5);
    let mut certified = 0;
    let mut draws = 0;
    while certified < RANDOM_LATTICES {
        draws += 1;
        if draws > 20 * RANDOM_LATTICES {
            return Err(format!("only {certified} certified lattices in {draws} draws"));
        }
        let a = random_automaton(&mut r, Shape::default());
        let lat = random_lattice(&mut r, &a);
        let mut l: Vec<IndexedPair> = lat.pairs.iter().map(|q| q.index(&a)).collect();
        l.extend(random_pairs(&mut r, a.num_states(), 1, "extra"));
        let cert = certify_lattice(&a, &l, &lat);
        if !cert.certified {
            continue;
        }
        certified += 1;
        derived_holds(&a, &l, &lat.derived_pair().index(&a)).map_err(|e| format!("random lattice {draws}: {e}"))?;
    }
    Ok(format!("chain lattice + {certified} random certified lattices ({draws} draws), derived pair in the closure for all"))
}

fn criterion_5(passing: &[Passing]) -> Outcome {
    let mut built = 0;
    for (i, x) in passing.iter().enumerate() {
        let f = &x.fixture;
        let p = Problem::live(&f.a, &f.l, &f.b, &f.m);
        let alphas = enumerate_live_lassos(&f.a, &f.l, CORRESPONDENCE_LASSO_BOUND, CORRESPONDENCE_LASSO_BOUND);
        for alpha in alphas.iter().take(LASSOS_PER_CANDIDATE) {
            let mut dirs = Vec::new();
            if x.fwd {
                dirs.push(("fwd", build_correspondence_forward(p, &f.cand, alpha)));
            }
            if x.bwd {
                dirs.push(("bwd", build_correspondence_backward(p, &f.cand, alpha)));
            }
            for (dir, c) in dirs {
                let c = c.map_err(|e| format!("candidate {i} {dir}: {e}"))?;
                let v = validate_correspondence(p, &f.cand, alpha, &c).map_err(|e| e.to_string())?;
                ensure(v.is_ok(), format!("candidate {i} {dir}: {v:?}"))?;
                ensure(is_live(&c.lasso, &f.m), format!("candidate {i} {dir}: abstract lasso not live"))?;
                ensure(lasso_trace(alpha, &f.a) == lasso_trace(&c.lasso, &f.b), format!("candidate {i} {dir}: traces differ"))?;
                built += 1;
            }
        }
    }
    ensure(built > 0, "no correspondences built")?;
    Ok(format!("{built} correspondences over {} candidates re-validate and are live", passing.len()))
}

fn criterion_6() -> Outcome {
    let t = Instant::now();
    let cfg = Config::load(&esds_data("esds_small.json")).map_err(|e| e.to_string())?;
    let strict = cfg.ops.iter().filter(|o| o.strict).count();
    let with_prev = cfg.ops.iter().filter(|o| !o.prev.is_empty()).count();
    ensure(
        cfg.clients == 2 && cfg.replicas == 2 && cfg.ops.len() == 6 && strict >= 1 && with_prev >= 1,
        "esds_small does not have the required shape",
    )?;
    let p = cfg.params().map_err(|e| e.to_string())?;
    let out = run_fair_scheduler(&esds_alg(&p, None), &cfg.run).map_err(|e| e.to_string())?;
    ensure(out.quiescent, "run did not reach quiescence")?;
    let log = render_log(&log_lines(&cfg, SystemKind::Alg, &out));
    let r = replay(&parse_log(&log).map_err(|e| e.to_string())?).map_err(|e| e.to_string())?;
    let exec = &r.exec;
    for (name, fam) in [("M-I", m_family(&p)), ("impl", impl_family(&p))] {
        let rep = monitor_pairs(&exec.states, name, &fam);
        let outstanding: Vec<_> = rep.outstanding().iter().map(|s| s.id.clone()).collect();
        ensure(outstanding.is_empty(), format!("{name}: outstanding {outstanding:?}"))?;
    }
    let f = check_sim_f(&p, exec, Mutation::None);
    ensure(f.passed() && f.validated == exec.len(), format!("F validated {}/{}: {:?}", f.validated, exec.len(), f.counterexample))?;
    let g = check_sim_g(&p, &f.abstract_exec);
    ensure(
        g.passed() && g.validated == f.abstract_exec.len(),
        format!("G validated {}/{}: {:?}", g.validated, f.abstract_exec.len(), g.counterexample),
    )?;
    let mut samples = 0;
    for x in p.catalog.ids() {
        for lat in [req_lattice(&p, x), stab_lattice(&p, x)] {
            let lat = lat.map_err(|e| e.to_string())?;
            let rep = check_lattice_sampled(&lat, &exec.states).map_err(|e| e.to_string())?;
            ensure(rep.ok(), format!("lattice for {x}: {:?}", rep.violations.first()))?;
            samples += rep.samples;
        }
    }
    let took = t.elapsed();
    ensure(took < ESDS_LIMIT, format!("took {took:?}"))?;
    Ok(format!(
        "quiescent after {} steps, 0 outstanding, F {}/{} and G {}/{} transitions, lattices clean over {samples} samples, {took:?}",
        exec.len(),
        f.validated,
        exec.len(),
        g.validated,
        f.abstract_exec.len()
    ))
}

fn lasso_of(a: &Automaton<String>, stem: &[&str], cycle: &[&str]) -> Lasso {
    let frag = |xs: &[&str]| {
        let mut f = liveref_core::Fragment::single(a.state_by_name(xs[0]).expect("state"));
        for w in xs[1..].chunks(2) {
            f.push(a.action_id(w[0]).expect("action"), a.state_by_name(w[1]).expect("state"));
        }
        f
    };
    Lasso::new(frag(stem), frag(cycle)).expect("lasso")
}

fn criterion_7() -> Outcome {
    let mut found = Vec::new();

    let cfg = Config::load(&esds_data("esds_small.json")).map_err(|e| e.to_string())?;
    let p = cfg.params().map_err(|e| e.to_string())?;
    let out = run_fair_scheduler(&esds_alg(&p, None), &cfg.run).map_err(|e| e.to_string())?;
    let f = check_sim_f(&p, &out.exec, Mutation::DropAddConstraints);
    let cx = f.counterexample.as_ref().ok_or("dropping add_constraints went unnoticed")?;
    ensure(cx.clause == "live-fwd clause 2b" && cx.step.is_some(), format!("add_constraints mutation: {}", cx.clause))?;
    found.push(format!("add_constraints at event {}", cx.step.as_ref().map(|s| s[0].clone()).unwrap_or_default()));

    let a = chain();
    let lat = liveref_core::fixtures::chain_lattice();
    let (broken, at) = break_clause_4(&lat, &a).ok_or("chain lattice has no green to remove")?;
    let rep = check_lattice_structure(&broken, &a);
    let c = rep.first_failure().ok_or("broken lattice passes")?;
    ensure(c.clause == "clause 4" && c.element.as_deref() == Some(at.as_str()), format!("lattice: {} at {:?}", c.clause, c.element))?;
    found.push(format!("lattice clause 4 at {at}"));

    let cc = collapsed_chain();
    let pr = Problem::live(&cc.a, &cc.l, &cc.b, &cc.m);
    let alpha = lasso_of(&cc.a, &["s0"], &["s0", "a", "s1", "b", "s2", "c", "s0"]);
    let corr = build_correspondence_forward(pr, &cc.cand, &alpha).map_err(|e| e.to_string())?;
    let mut m = cc.m.clone();
    m[0].green = liveref_core::StateSet::empty(cc.b.num_states());
    let v = validate_correspondence(Problem::live(&cc.a, &cc.l, &cc.b, &m), &cc.cand, &alpha, &corr).map_err(|e| e.to_string())?;
    match v {
        Err(CorrespondenceFailure::Mapping(mv)) if mv.clause == MappingClause::Green => {
            found.push(format!("green removal at position {} ({})", mv.position, mv.pair.unwrap_or_default()))
        }
        other => return Err(format!("green removal: {other:?}")),
    }

    let mut run = cfg.run.clone();
    run.steps = LOSSY_STEPS;
    let lossy = run_fair_scheduler(&esds_alg(&p, Some(0)), &run).map_err(|e| e.to_string())?;
    let rep = monitor_pairs(&lossy.exec.states, "impl", &impl_family(&p));
    let outstanding: Vec<_> = rep.pairs.iter().filter(|s| s.status == Status::Outstanding).map(|s| s.id.clone()).collect();
    ensure(outstanding.iter().any(|id| id == "ImpReq(x1)"), format!("lossy front end: outstanding {outstanding:?}"))?;
    found.push(format!("lossy front end leaves {} outstanding", outstanding.join(",")));

    let mut r = rng(1);
    let small = random_automaton(&mut r, Shape::default());
    let alg = esds_alg(&p, None);
    let rel = |_: &String, _: &SysState| true;
    let rep = check_image_finite(&small, &alg, &rel, &IMAGE_PROBE);
    let cx = rep.counterexample.as_ref().ok_or("unbounded image went unnoticed")?;
    ensure(rep.verdict == Verdict::Fail && cx.clause == "bwd image-finite", format!("image finiteness: {:?}", rep.verdict))?;
    found.push(format!("unbounded image at {}", cx.concrete_state.clone().unwrap_or_default()));

    Ok(format!("5/5 detected: {}", found.join("; ")))
}

fn main() {
    let mut results: Vec<(usize, Outcome)> = Vec::new();
    results.push((1, criterion_1()));
    let (sound, passing) = soundness_sweep();
    results.push((2, sound));
    results.push((3, criterion_3()));
    results.push((4, criterion_4()));
    results.push((5, criterion_5(&passing)));
    results.push((6, criterion_6()));
    results.push((7, criterion_7()));
    let mut failed = 0;
    for (n, r) in &results {
        match r {
            Ok(msg) => println!("criterion {n}: PASS: {msg}"),
            Err(msg) => {
                failed += 1;
                println!("criterion {n}: FAIL: {msg}");
            }
        }
    }
    if failed > 0 {
        std::process::exit(1);
    }
}
