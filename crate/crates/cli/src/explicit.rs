//! Commands over explicit automata given as JSON files.

use std::path::Path;

use anyhow::Context;
use liveref_core::automaton::reachable_bounded;
use liveref_core::execution::{describe_fragment, LassoReport};
use liveref_core::fixtures::db_registry;
use liveref_core::format::{load_automaton, load_lattice, read_json, state_names, CandidateDef, PairDef, PairsFile, RegionDef, Registry};
use liveref_core::lattice::{certify_lattice, check_lattice_structure};
use liveref_core::liveness::{forestify as forest, leads_to_transform, IndexedPair, Region};
use liveref_core::mapping::IndexMapping;
use liveref_core::simulation::*;
use liveref_core::streett::{self, InclusionBounds, InclusionOutcome, MachineClosure, Witness};
use liveref_core::{lasso_trace, Automaton, AutomatonDef, Lasso};
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::{Direction, Global, InclusionKind, Outcome, Pairs, SimVariant};

const DEFAULT_LASSO_BOUND: usize = 3;
const MAX_CORRESPONDENCES: usize = 50;
const DEFAULT_FOREST_DEPTH: usize = 3;
const DEFAULT_SAFE_CAP: usize = 100_000;

/// Named predicates usable from pair, candidate and lattice files.
fn registry() -> Registry<String> {
    db_registry()
}

fn automaton(path: &Path) -> anyhow::Result<Automaton<String>> {
    Ok(load_automaton(path)?)
}

fn pairs_of(path: Option<&Path>, a: &Automaton<String>) -> anyhow::Result<Vec<IndexedPair>> {
    match path {
        None => Ok(Vec::new()),
        Some(p) => {
            let file: PairsFile = read_json(p)?;
            file.index(a, &registry()).with_context(|| format!("{}", p.display()))
        }
    }
}

fn report(a: &Automaton<String>, l: &Lasso) -> serde_json::Value {
    json!({ "lasso": l.describe(a), "trace": lasso_trace(l, a).render() })
}

fn yes(ok: bool) -> u8 {
    if ok {
        0
    } else {
        1
    }
}

pub fn validate(path: &Path) -> anyhow::Result<Outcome> {
    let def: AutomatonDef = read_json(path)?;
    let v = def.validate();
    let prose = if v.is_ok() { "valid".to_string() } else { v.to_string() };
    Ok(Outcome::json(&json!({ "valid": v.is_ok(), "violations": v.violations }), prose, yes(v.is_ok())))
}

pub fn reachable(path: &Path, g: &Global) -> anyhow::Result<Outcome> {
    let a = automaton(path)?;
    let r = reachable_bounded(&a, g.bounds);
    let prose = format!("{} reachable states{}", r.states.len(), if r.partial { " (budget exhausted)" } else { "" });
    let code = if r.partial { 3 } else { 0 };
    Ok(Outcome::json(&json!({ "states": r.states, "partial": r.partial }), prose, code))
}

pub fn emptiness(path: &Path, pairs: &Pairs) -> anyhow::Result<Outcome> {
    let a = automaton(path)?;
    let l = pairs_of(pairs.l.as_deref(), &a)?;
    let v = streett::streett_emptiness(&a, &l, None);
    let witness = v.witness.as_ref().map(|w| report(&a, w));
    let prose = if v.is_empty() { "no live execution".to_string() } else { "a live execution exists".to_string() };
    Ok(Outcome::json(&json!({ "empty": v.is_empty(), "explored": v.explored, "witness": witness }), prose, yes(!v.is_empty())))
}

pub fn lassos(path: &Path, pairs: &Pairs, g: &Global) -> anyhow::Result<Outcome> {
    let a = automaton(path)?;
    let l = pairs_of(pairs.l.as_deref(), &a)?;
    let k = g.bounds.unwrap_or(DEFAULT_LASSO_BOUND);
    let all = streett::enumerate_live_lassos(&a, &l, k, k);
    let listed: Vec<_> = all.iter().map(|x| report(&a, x)).collect();
    let prose = format!("{} live lassos with stem and cycle at most {k}", all.len());
    Ok(Outcome::json(&json!({ "bound": k, "lassos": listed }), prose, 0))
}

pub fn machine_closure(path: &Path, pairs: &Pairs) -> anyhow::Result<Outcome> {
    let a = automaton(path)?;
    let l = pairs_of(pairs.l.as_deref(), &a)?;
    Ok(match streett::machine_closure_check(&a, &l) {
        MachineClosure::Holds => Outcome::json(&json!({ "holds": true }), "machine closed", 0),
        MachineClosure::Fails { state } => Outcome::json(
            &json!({ "holds": false, "state": a.name(state) }),
            format!("reachable state {} has no live continuation", a.name(state)),
            1,
        ),
    })
}

pub fn closure_member(path: &Path, query: &Path, pairs: &Pairs) -> anyhow::Result<Outcome> {
    let a = automaton(path)?;
    let l = pairs_of(pairs.l.as_deref(), &a)?;
    let q = pairs_of(Some(query), &a)?;
    let mut out = Vec::new();
    let mut all = true;
    let mut prose = String::new();
    for p in &q {
        let v = streett::closure_member(&a, &l, p);
        let status = streett::derived_pair_check(&a, &l, p);
        all &= v.member;
        prose.push_str(&format!("{}: {}\n", p.id, if v.member { "member" } else { "not a member" }));
        out.push(json!({
            "id": p.id,
            "member": v.member,
            "status": status,
            "witness": v.witness.as_ref().map(|w| report(&a, w)),
        }));
    }
    Ok(Outcome::json(&json!({ "pairs": out }), prose, yes(all)))
}

fn lattice_for(a: &Automaton<String>, path: &Path) -> anyhow::Result<liveref_core::lattice::PairLattice<String>> {
    let reg = registry();
    Ok(load_lattice(path, 4, &|p: &PairDef| p.resolve(a, &reg))?)
}

pub fn lattice_check(files: &[std::path::PathBuf]) -> anyhow::Result<Outcome> {
    let [auto, lat] = files else {
        anyhow::bail!("lattice-check needs AUTOMATON LATTICE, or LATTICE with --sample-log");
    };
    let a = automaton(auto)?;
    let lat = lattice_for(&a, lat)?;
    let r = check_lattice_structure(&lat, &a);
    let prose = match r.first_failure() {
        None => "lattice structure holds".to_string(),
        Some(c) => format!("lattice {} fails{}", c.clause, c.detail.as_deref().map(|d| format!(": {d}")).unwrap_or_default()),
    };
    Ok(Outcome::json(&json!({ "ok": r.ok(), "clauses": r.clauses }), prose, yes(r.ok())))
}

fn named_pair(a: &Automaton<String>, p: &IndexedPair) -> PairDef {
    PairDef {
        id: p.id.clone(),
        red: RegionDef::States(state_names(a, &p.red)),
        green: RegionDef::States(state_names(a, &p.green)),
    }
}

pub fn lattice_certify(path: &Path, lattice: &Path, pairs: &Pairs) -> anyhow::Result<Outcome> {
    let a = automaton(path)?;
    let l = pairs_of(pairs.l.as_deref(), &a)?;
    let lat = lattice_for(&a, lattice)?;
    let cert = certify_lattice(&a, &l, &lat);
    let derived = cert.derived.as_ref().map(|d| named_pair(&a, d));
    let prose = match (&cert.refused, &derived) {
        (Some(why), _) => format!("not certified: {why}"),
        (None, Some(d)) => format!("certified; derived pair {}", serde_json::to_string(d).expect("pair serializes")),
        (None, None) => "certified".to_string(),
    };
    Ok(Outcome::json(&json!({ "certificate": cert, "derived": derived }), prose, yes(cert.certified)))
}

struct Loaded {
    a: Automaton<String>,
    b: Automaton<String>,
    l: Vec<IndexedPair>,
    m: Vec<IndexedPair>,
    cand: Candidate,
}

/// Safety checks ignore the candidate's pair map, so it is dropped before
/// resolving (its ids may refer to pairs that were not loaded).
fn load_problem(files: [&Path; 3], pairs: &Pairs, live: bool, g: &Global) -> anyhow::Result<Loaded> {
    let a = automaton(files[0])?;
    let b = automaton(files[1])?;
    let l = pairs_of(pairs.l.as_deref(), &a)?;
    let m = pairs_of(pairs.m.as_deref(), &b)?;
    let mut def: CandidateDef = read_json(files[2])?;
    if !live {
        def.h.clear();
    }
    let mut cand = def.resolve(&a, &l, &b, &registry()).with_context(|| format!("{}", files[2].display()))?;
    if g.bounds.is_some() {
        cand.bound = g.bounds;
    }
    Ok(Loaded { a, b, l, m, cand })
}

fn verdict_prose(r: &CheckReport) -> String {
    let mut s = format!("{}: {:?}", r.relation, r.verdict).to_lowercase();
    if let Some(cx) = &r.counterexample {
        s.push_str(&format!("\nfailed {}: {}", cx.clause, cx.detail));
        if let Some(st) = &cx.step {
            s.push_str(&format!("\n  at step {} -{}-> {}", st[0], st[1], st[2]));
        }
    }
    for o in &r.obligations {
        s.push_str(&format!("\nobligation: {o}"));
    }
    s
}

pub fn check_sim(variant: SimVariant, live: bool, files: [&Path; 3], pairs: &Pairs, g: &Global) -> anyhow::Result<Outcome> {
    let x = load_problem(files, pairs, live, g)?;
    let (a, b, cand) = (&x.a, &x.b, &x.cand);
    let r = if live {
        let p = Problem::live(a, &x.l, b, &x.m);
        let c = Certificates::default();
        match variant {
            SimVariant::Fwd => check_live_forward_sim(p, cand, &c),
            SimVariant::Refinement => check_live_refinement(p, cand, &c),
            SimVariant::Bwd => check_live_backward_sim(p, cand, &c),
            SimVariant::History => check_live_history(p, cand, &c),
            SimVariant::Prophecy => check_live_prophecy(p, cand, &c),
        }
    } else {
        match variant {
            SimVariant::Fwd => check_forward_sim(a, b, cand),
            SimVariant::Refinement => check_refinement(a, b, cand),
            SimVariant::Bwd => check_backward_sim(a, b, cand),
            SimVariant::History => check_history(a, b, cand),
            SimVariant::Prophecy => check_prophecy(a, b, cand),
        }
    }?;
    let code = r.verdict.exit_code() as u8;
    Ok(Outcome::json(&serde_json::to_value(&r)?, verdict_prose(&r), code))
}

/// One correspondence in file form.
#[derive(Serialize, Deserialize)]
struct CorrespondenceDef {
    concrete: LassoReport,
    #[serde(rename = "abstract")]
    abstract_: LassoReport,
    mapping: IndexMapping,
}

#[derive(Deserialize)]
struct CorrespondenceFile {
    correspondences: Vec<CorrespondenceDef>,
}

pub fn correspondence(
    dir: Direction,
    files: [&Path; 3],
    pairs: &Pairs,
    lasso: Option<&Path>,
    check: Option<&Path>,
    g: &Global,
) -> anyhow::Result<Outcome> {
    let x = load_problem(files, pairs, true, g)?;
    let p = Problem::live(&x.a, &x.l, &x.b, &x.m);
    let mut rows = Vec::new();
    let mut bad = 0;
    let mut record = |alpha: &Lasso, built: Result<Correspondence, liveref_core::CoreError>| -> anyhow::Result<()> {
        let concrete = alpha.describe(&x.a);
        match built {
            Ok(c) => {
                let valid = validate_correspondence(p, &x.cand, alpha, &c)?;
                bad += usize::from(valid.is_err());
                rows.push(json!({
                    "concrete": concrete,
                    "abstract": c.lasso.describe(&x.b),
                    "mapping": c.mapping,
                    "valid": valid.is_ok(),
                    "failure": valid.err(),
                }));
            }
            Err(e) => {
                bad += 1;
                rows.push(json!({ "concrete": concrete, "valid": false, "error": e.to_string() }));
            }
        }
        Ok(())
    };
    if let Some(path) = check {
        let file: CorrespondenceFile = read_json(path)?;
        for d in file.correspondences {
            let alpha = d.concrete.resolve(&x.a)?;
            let beta = d.abstract_.resolve(&x.b)?;
            record(&alpha, Ok(Correspondence { lasso: beta, mapping: d.mapping }))?;
        }
    } else {
        let alphas = match lasso {
            Some(path) => vec![read_json::<LassoReport>(path)?.resolve(&x.a)?],
            None => {
                let k = g.bounds.unwrap_or(DEFAULT_LASSO_BOUND);
                streett::enumerate_live_lassos(&x.a, &x.l, k, k).into_iter().take(MAX_CORRESPONDENCES).collect()
            }
        };
        for alpha in &alphas {
            let built = match dir {
                Direction::Fwd => build_correspondence_forward(p, &x.cand, alpha),
                Direction::Bwd => build_correspondence_backward(p, &x.cand, alpha),
            };
            record(alpha, built)?;
        }
    }
    let n = rows.len();
    let prose = format!("{} of {n} correspondences valid", n - bad);
    Ok(Outcome::json(&json!({ "correspondences": rows }), prose, yes(bad == 0)))
}

pub fn trace_inclusion(kind: InclusionKind, concrete: &Path, abstract_: &Path, pairs: &Pairs, g: &Global) -> anyhow::Result<Outcome> {
    let a = automaton(concrete)?;
    let b = automaton(abstract_)?;
    let v = match kind {
        InclusionKind::Safe => streett::safe_trace_inclusion(&a, &b, g.bounds.unwrap_or(DEFAULT_SAFE_CAP))?,
        InclusionKind::Live => {
            let l = pairs_of(pairs.l.as_deref(), &a)?;
            let m = pairs_of(pairs.m.as_deref(), &b)?;
            let mut bounds = InclusionBounds::default();
            if let Some(k) = g.bounds {
                bounds.stem = k;
                bounds.cycle = k;
            }
            streett::live_trace_inclusion(&a, &l, &b, &m, bounds)?
        }
    };
    let (value, prose, code) = match &v.outcome {
        InclusionOutcome::HoldsWithinBounds => (json!({ "outcome": "holds-within-bounds" }), "inclusion holds within bounds".to_string(), 0),
        InclusionOutcome::Counterexample { witness, trace } => {
            let w = match witness {
                Witness::Lasso(l) => json!({ "lasso": l.describe(&a) }),
                Witness::Finite(f) => json!({ "finite": describe_fragment(f, &a) }),
            };
            (
                json!({ "outcome": "counterexample", "trace": trace.render(), "witness": w }),
                format!("trace {} of the concrete automaton is not matched", trace.render()),
                1,
            )
        }
        InclusionOutcome::Unknown { reason } => (json!({ "outcome": "unknown", "reason": reason }), format!("unknown: {reason}"), 3),
    };
    let mut value = value;
    value["examined"] = json!(v.examined);
    value["bounds"] = serde_json::to_value(v.bounds)?;
    Ok(Outcome::json(&value, prose, code))
}

fn region(a: &Automaton<String>, spec: &str) -> anyhow::Result<Region<String>> {
    let def = match spec.strip_prefix("pred:") {
        Some(name) => RegionDef::Pred { pred: name.to_string() },
        None => RegionDef::States(spec.split(',').map(|s| s.trim().to_string()).filter(|s| !s.is_empty()).collect()),
    };
    Ok(def.resolve(a, &registry())?)
}

pub fn leadsto(path: &Path, p: &str, q: &str) -> anyhow::Result<Outcome> {
    let a = automaton(path)?;
    let (pr, qr) = (region(&a, p)?, region(&a, q)?);
    let (b, pair) = leads_to_transform(&a, &pr, &qr);
    let named = b.map_states(|(s, flag)| if *flag { format!("{s}/flag") } else { s.clone() });
    let idx = pair.index(&b);
    let out = PairsFile { pairs: vec![named_pair(&named, &idx)] };
    let prose = format!("{} states; pair {}", named.num_states(), idx.id);
    Ok(Outcome::json(&json!({ "automaton": named.to_def(), "pairs": out }), prose, 0))
}

pub fn forestify(path: &Path, g: &Global) -> anyhow::Result<Outcome> {
    let a = automaton(path)?;
    let depth = g.bounds.unwrap_or(DEFAULT_FOREST_DEPTH).max(1);
    let f = forest(&a, depth);
    let named = f.map_states(|h| {
        let mut s = h.states[0].clone();
        for (x, t) in h.actions.iter().zip(&h.states[1..]) {
            s.push_str(&format!(" {} {t}", x.text()));
        }
        s
    });
    let prose = format!("{} states at depth {depth}", named.num_states());
    Ok(Outcome::json(&json!({ "automaton": named.to_def() }), prose, 0))
}
