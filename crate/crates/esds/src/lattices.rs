//! The case study's lattices, stored as templates over one operation `{x}`
//! with `{r}` elements copied once per replica, and the predicate registry
//! they resolve against.

use std::path::Path;
use std::sync::Arc;

use liveref_core::format::{lattice_from_def, IncludeDef, LatticeDef, PairDef, Registry, RegionDef};
use liveref_core::lattice::{splice, PairLattice};
use liveref_core::liveness::Predicate;

use crate::component::Params;
use crate::error::EsdsError;
use crate::model::{intersect_all, Message, Node};
use crate::system::{channel, frontend, replica, Layout, SysState};

pub const REQ: &str = include_str!("../data/lattice_req.json");
pub const STRICT: &str = include_str!("../data/lattice_strict.json");
pub const STAB: &str = include_str!("../data/lattice_stab.json");

/// Include nesting allowed when expanding templates.
pub const MAX_DEPTH: usize = 4;

type Test = Arc<dyn Fn(&Params, &Layout, &SysState, &str, usize) -> bool + Send + Sync>;

/// Predicates over algorithm states. Arguments are an operation id and,
/// where named `(x,r)`, a replica `rN`.
pub fn registry(params: &Arc<Params>) -> Registry<SysState> {
    let mut reg = Registry::new();
    let l = Layout::of(params);
    let client = |p: &Params, x: &str| p.catalog.client(x);
    let per_op: Vec<(&str, Test)> = vec![
        ("wait", Arc::new(move |p, l, s, x, _| frontend(s, l, client(p, x)).wait.contains(x))),
        ("not_wait", Arc::new(move |p, l, s, x, _| !frontend(s, l, client(p, x)).wait.contains(x))),
        (
            "req_sent",
            Arc::new(move |p, l, s, x, _| (0..l.replicas).any(|r| has_request(s, l, client(p, x), r, x))),
        ),
        ("rept", Arc::new(move |p, l, s, x, _| frontend(s, l, client(p, x)).rept.iter().any(|(y, _)| y == x))),
        ("done_all", Arc::new(|_, l, s, x, _| done_all(s, l, x))),
        ("stable_all", Arc::new(|_, l, s, x, _| stable_all(s, l, x))),
    ];
    let per_replica: Vec<(&str, Test)> = vec![
        ("req_in", Arc::new(move |p, l, s, x, r| has_request(s, l, client(p, x), r, x))),
        ("pending_rcvd", Arc::new(|_, l, s, x, r| replica(s, l, r).pending.contains(x) && replica(s, l, r).rcvd.contains(x))),
        ("pending_done", Arc::new(|_, l, s, x, r| pending_done(s, l, x, r))),
        ("pending_done_strict", Arc::new(|p, l, s, x, r| p.catalog.op(x).strict && pending_done(s, l, x, r))),
        ("pending_done_nonstrict", Arc::new(|p, l, s, x, r| !p.catalog.op(x).strict && pending_done(s, l, x, r))),
        (
            "resp_in",
            Arc::new(move |p, l, s, x, r| {
                channel(s, l, Node::Replica(r), Node::Client(client(p, x))).queue.iter().any(|m| matches!(m, Message::Response(y, _) if y == x))
            }),
        ),
        ("done", Arc::new(|_, l, s, x, r| replica(s, l, r).done[r].contains(x))),
        ("stable_at", Arc::new(|_, l, s, x, r| replica(s, l, r).stable[r].contains(x))),
        ("stable_known_all", Arc::new(|_, l, s, x, r| stable_known_all(s, l, x, r))),
        // Strict sublattice: x ∈ pending_r and strict(x) are implied.
        ("sp_done_all", Arc::new(|p, l, s, x, r| strict_pending(p, l, s, x, r) && done_all(s, l, x))),
        ("sp_stable_at", Arc::new(|p, l, s, x, r| strict_pending(p, l, s, x, r) && replica(s, l, r).stable[r].contains(x))),
        ("sp_stable_all", Arc::new(|p, l, s, x, r| strict_pending(p, l, s, x, r) && stable_all(s, l, x))),
        ("sp_stable_known_all", Arc::new(|p, l, s, x, r| strict_pending(p, l, s, x, r) && stable_known_all(s, l, x, r))),
    ];
    for (name, test) in per_op {
        let p = params.clone();
        reg.family(name, move |args: &[String]| -> Option<Predicate<SysState>> {
            let [x] = args else { return None };
            p.catalog.get(x)?;
            let (p, x, t) = (p.clone(), x.clone(), test.clone());
            Some(Arc::new(move |s: &SysState| t(&p, &l, s, &x, 0)))
        });
    }
    for (name, test) in per_replica {
        let p = params.clone();
        reg.family(name, move |args: &[String]| -> Option<Predicate<SysState>> {
            let [x, r] = args else { return None };
            p.catalog.get(x)?;
            let r = r.strip_prefix('r')?.parse::<usize>().ok().filter(|r| *r < l.replicas)?;
            let (p, x, t) = (p.clone(), x.clone(), test.clone());
            Some(Arc::new(move |s: &SysState| t(&p, &l, s, &x, r)))
        });
    }
    reg
}

fn has_request(s: &SysState, l: &Layout, c: usize, r: usize, x: &str) -> bool {
    channel(s, l, Node::Client(c), Node::Replica(r)).queue.iter().any(|m| matches!(m, Message::Request(y) if y == x))
}

fn pending_done(s: &SysState, l: &Layout, x: &str, r: usize) -> bool {
    let rs = replica(s, l, r);
    rs.pending.contains(x) && rs.done[r].contains(x)
}

fn strict_pending(p: &Params, l: &Layout, s: &SysState, x: &str, r: usize) -> bool {
    p.catalog.op(x).strict && replica(s, l, r).pending.contains(x)
}

fn done_all(s: &SysState, l: &Layout, x: &str) -> bool {
    (0..l.replicas).all(|i| replica(s, l, i).done[i].contains(x))
}

fn stable_all(s: &SysState, l: &Layout, x: &str) -> bool {
    (0..l.replicas).all(|i| replica(s, l, i).stable[i].contains(x))
}

fn stable_known_all(s: &SysState, l: &Layout, x: &str, r: usize) -> bool {
    intersect_all(&replica(s, l, r).stable).contains(x)
}

fn subst(text: &str, x: &str, r: Option<usize>) -> String {
    let t = text.replace("{x}", x);
    match r {
        Some(r) => t.replace("{r}", &format!("r{r}")),
        None => t,
    }
}

fn subst_region(d: &RegionDef, x: &str, r: Option<usize>) -> RegionDef {
    match d {
        RegionDef::States(v) => RegionDef::States(v.iter().map(|s| subst(s, x, r)).collect()),
        RegionDef::Pred { pred } => RegionDef::Pred { pred: subst(pred, x, r) },
    }
}

/// Instantiates a template for operation `x`. With `fixed = Some(r)` every
/// `{r}` becomes `r`; otherwise each element, edge and include naming
/// `{r}` is copied once per replica.
pub fn expand(def: &LatticeDef, x: &str, replicas: usize, fixed: Option<usize>) -> LatticeDef {
    let copies = |text: &str| -> Vec<Option<usize>> {
        if fixed.is_some() || !text.contains("{r}") {
            vec![fixed]
        } else {
            (0..replicas).map(Some).collect()
        }
    };
    let mut out = LatticeDef { pairs: Vec::new(), order: Vec::new(), top: subst(&def.top, x, fixed), bottom: subst(&def.bottom, x, fixed), includes: Vec::new() };
    for p in &def.pairs {
        for r in copies(&p.id) {
            out.pairs.push(PairDef { id: subst(&p.id, x, r), red: subst_region(&p.red, x, r), green: subst_region(&p.green, x, r) });
        }
    }
    for [a, b] in &def.order {
        for r in copies(&format!("{a}{b}")) {
            out.order.push([subst(a, x, r), subst(b, x, r)]);
        }
    }
    for inc in &def.includes {
        for r in copies(&inc.element) {
            // The replica is carried in the file name until the include is
            // loaded.
            let file = match r {
                Some(r) => format!("{}#{r}", inc.file),
                None => inc.file.clone(),
            };
            out.includes.push(IncludeDef { element: subst(&inc.element, x, r), file });
        }
    }
    out
}

/// Builds the lattice for operation `x`; `load` returns the text of an
/// included file.
pub fn build_lattice(
    text: &str,
    params: &Arc<Params>,
    x: &str,
    load: &dyn Fn(&str) -> Result<String, EsdsError>,
) -> Result<PairLattice<SysState>, EsdsError> {
    build_at(text, params, x, None, load, MAX_DEPTH)
}

fn build_at(
    text: &str,
    params: &Arc<Params>,
    x: &str,
    fixed: Option<usize>,
    load: &dyn Fn(&str) -> Result<String, EsdsError>,
    depth: usize,
) -> Result<PairLattice<SysState>, EsdsError> {
    if params.catalog.get(x).is_none() {
        return Err(EsdsError::Config(format!("unknown operation {x}")));
    }
    let template: LatticeDef = liveref_core::format::parse_json(text)?;
    let mut def = expand(&template, x, params.replicas, fixed);
    let includes = std::mem::take(&mut def.includes);
    for inc in &includes {
        let never = RegionDef::Pred { pred: "false".into() };
        def.pairs.push(PairDef { id: inc.element.clone(), red: never.clone(), green: never });
    }
    let reg = registry(params);
    let resolve = |p: &PairDef| p.resolve_pred(&reg);
    let mut lat = lattice_from_def(&def, Path::new("."), 0, &resolve)?;
    for inc in &includes {
        if depth == 0 {
            return Err(EsdsError::Malformed(format!("include depth exhausted at {}", inc.element)));
        }
        let (file, r) = match inc.file.split_once('#') {
            Some((f, r)) => (f, r.parse::<usize>().ok()),
            None => (inc.file.as_str(), fixed),
        };
        let inner = build_at(&load(file)?, params, x, r, load, depth - 1)?;
        lat = splice(&lat, &inc.element, &inner)?;
    }
    Ok(lat)
}

/// Resolves includes from the shipped templates.
pub fn shipped(name: &str) -> Result<String, EsdsError> {
    match name {
        "lattice_req.json" => Ok(REQ.into()),
        "lattice_strict.json" => Ok(STRICT.into()),
        "lattice_stab.json" => Ok(STAB.into()),
        _ => Err(EsdsError::Config(format!("no shipped lattice {name}"))),
    }
}

/// Reads includes next to `path`.
pub fn load_lattice_file(path: &Path, params: &Arc<Params>, x: &str) -> Result<PairLattice<SysState>, EsdsError> {
    let base = path.parent().unwrap_or(Path::new(".")).to_path_buf();
    let load = move |f: &str| -> Result<String, EsdsError> { Ok(std::fs::read_to_string(base.join(f))?) };
    build_lattice(&std::fs::read_to_string(path)?, params, x, &load)
}

pub fn req_lattice(params: &Arc<Params>, x: &str) -> Result<PairLattice<SysState>, EsdsError> {
    build_lattice(REQ, params, x, &shipped)
}

pub fn stab_lattice(params: &Arc<Params>, x: &str) -> Result<PairLattice<SysState>, EsdsError> {
    build_lattice(STAB, params, x, &shipped)
}
