//! Log checkers for the two forward simulations of the case study:
//! F from the algorithm to ESDS-II and G from ESDS-II to ESDS-I.

use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;

use liveref_core::liveness::ComplementedPair;
use liveref_core::simulation::{Counterexample, Verdict};
use serde::Serialize;

use crate::component::{below, Kind, Params, Variant};
use crate::model::*;
use crate::monitor::{impl_family, m_family, view_stabilized, view_wait};
use crate::ops::{transitive_closure, OpId, Order, Value};
use crate::scheduler::Execution;
use crate::system::{channel, esds_spec, frontend, replica, spec, users, Layout, SysState, System};

pub fn is_algorithm(sys: &System) -> bool {
    sys.comps.iter().any(|c| matches!(c.kind, Kind::Replica { .. }))
}

/// `⋃_r done_r[r]`.
pub fn implementation_ops(p: &Params, s: &SysState) -> BTreeSet<OpId> {
    let l = Layout::of(p);
    (0..l.replicas).flat_map(|r| replica(s, &l, r).done[r].iter().cloned()).collect()
}

/// Least label of each operation over all replicas and all gossip in
/// transit.
pub fn global_labels(p: &Params, s: &SysState) -> BTreeMap<OpId, Label> {
    let l = Layout::of(p);
    let mut out = BTreeMap::new();
    for r in 0..l.replicas {
        merge_labels(&mut out, &replica(s, &l, r).label);
    }
    for (i, j) in l.channels() {
        for m in &channel(s, &l, i, j).queue {
            if let Message::Gossip(g) = m {
                merge_labels(&mut out, &g.labels);
            }
        }
    }
    out
}

/// The order the implementation has committed to: client constraints plus
/// label order among operations whose global label is at most that of
/// some operation stable everywhere. Once an operation is stable at every
/// replica no new label below it can appear, so the relation only grows.
pub fn implementation_po(p: &Params, s: &SysState) -> Order {
    let ops = implementation_ops(p, s);
    let glob = global_labels(p, s);
    let stable = view_stabilized(p, s);
    let mut po = p.catalog.csc(&ops);
    if let Some(m) = stable.iter().filter_map(|x| glob.get(x)).max() {
        for a in &ops {
            let Some(la) = glob.get(a).filter(|la| *la <= m) else { continue };
            for b in &ops {
                if glob.get(b).is_some_and(|lb| la < lb) {
                    po.insert((a.clone(), b.clone()));
                }
            }
        }
    }
    transitive_closure(&po)
}

/// `{(x, v) : ⟨response, x, v⟩ in some channel_rc, x ∈ wait_c}`.
pub fn potential_rept(p: &Params, s: &SysState) -> BTreeSet<(OpId, Value)> {
    let l = Layout::of(p);
    let mut out = BTreeSet::new();
    for c in 0..l.clients {
        let wait = &frontend(s, &l, c).wait;
        for r in 0..l.replicas {
            for m in &channel(s, &l, Node::Replica(r), Node::Client(c)).queue {
                if let Message::Response(x, v) = m {
                    if wait.contains(x) {
                        out.insert((x.clone(), v.clone()));
                    }
                }
            }
        }
    }
    out
}

/// Sorted by global label.
fn by_label(xs: &BTreeSet<OpId>, glob: &BTreeMap<OpId, Label>) -> Vec<OpId> {
    let mut v: Vec<OpId> = xs.iter().cloned().collect();
    v.sort_by_key(|x| (glob.get(x).copied(), x.clone()));
    v
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Mutation {
    #[default]
    None,
    /// F: gossip receipt no longer emits `add_constraints(s'.po)`.
    DropAddConstraints,
}

#[derive(Clone, Debug, Serialize)]
pub struct LogCheck {
    pub relation: &'static str,
    pub verdict: Verdict,
    pub transitions: usize,
    pub validated: usize,
    /// Concrete transitions matched by the empty fragment.
    pub empty_fragments: usize,
    /// Recipe actions whose precondition failed and that were left out.
    pub skipped: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub counterexample: Option<Counterexample>,
    #[serde(skip)]
    pub abstract_exec: Execution,
}

impl LogCheck {
    pub fn passed(&self) -> bool {
        self.verdict == Verdict::Pass
    }
}

/// Pair clauses for one concrete step: with `links` as (abstract, concrete)
/// pairs, a fragment avoids `q.R` unless `h(q).R` holds at an endpoint, and
/// visits `q.G` when `h(q).G` holds at an endpoint.
fn pair_clauses(
    links: &[(ComplementedPair<SysState>, ComplementedPair<SysState>)],
    s: &SysState,
    s2: &SysState,
    frag: &[SysState],
) -> Option<Counterexample> {
    for (q, h) in links {
        if !(h.red.contains(s) || h.red.contains(s2)) {
            if let Some(k) = frag.iter().position(|u| q.red.contains(u)) {
                let cx = Counterexample::new("live-fwd clause 2a", format!("fragment state {k} is red for {} but {} is red at neither endpoint", q.id, h.id));
                return Some(cx.with_pair(&q.id));
            }
        }
        if (h.green.contains(s) || h.green.contains(s2)) && !frag.iter().any(|u| q.green.contains(u)) {
            let cx = Counterexample::new("live-fwd clause 2b", format!("{} is green at an endpoint but the fragment never visits {}.G", h.id, q.id));
            return Some(cx.with_pair(&q.id));
        }
    }
    None
}

struct Matcher<'a> {
    abs: System,
    links: Vec<(ComplementedPair<SysState>, ComplementedPair<SysState>)>,
    relation: &'static str,
    related: Box<dyn Fn(&SysState, &SysState) -> Result<(), String> + 'a>,
}

impl Matcher<'_> {
    fn run(&self, exec: &Execution, recipe: &dyn Fn(usize, &SysState, &Action, &SysState, &SysState) -> Vec<Action>) -> LogCheck {
        let mut u = self.abs.initial();
        let mut out = LogCheck {
            relation: self.relation,
            verdict: Verdict::Pass,
            transitions: exec.len(),
            validated: 0,
            empty_fragments: 0,
            skipped: Vec::new(),
            counterexample: None,
            abstract_exec: Execution { states: vec![u.clone()], actions: Vec::new() },
        };
        if let Err(e) = (self.related)(&exec.states[0], &u) {
            out.verdict = Verdict::Fail;
            out.counterexample = Some(Counterexample::new(&format!("{} start", self.relation), e));
            return out;
        }
        for (i, a) in exec.actions.iter().enumerate() {
            let (s, s2) = (&exec.states[i], &exec.states[i + 1]);
            let mut frag = vec![u.clone()];
            let mut skipped_here = Vec::new();
            for b in recipe(i, s, a, s2, &u) {
                match self.abs.step(&u, &b) {
                    Ok(next) => {
                        u = next;
                        out.abstract_exec.actions.push(b);
                        out.abstract_exec.states.push(u.clone());
                        frag.push(u.clone());
                    }
                    Err(e) => skipped_here.push(format!("event {i}: {b}: {e}")),
                }
            }
            if frag.len() == 1 {
                out.empty_fragments += 1;
            }
            let fail = pair_clauses(&self.links, s, s2, &frag)
                .or_else(|| (self.related)(s2, &u).err().map(|e| Counterexample::new(self.relation, e)))
                .or_else(|| skipped_here.first().map(|e| Counterexample::new(&format!("{} step", self.relation), e.clone())));
            out.skipped.extend(skipped_here);
            if let Some(mut cx) = fail {
                cx.detail = format!("event {i} ({a}): {}", cx.detail);
                cx.step = Some([i.to_string(), a.to_string(), format!("{} abstract actions", frag.len() - 1)]);
                out.verdict = Verdict::Fail;
                out.counterexample = Some(cx);
                return out;
            }
            out.validated += 1;
        }
        out
    }
}

fn differ(what: &str) -> String {
    format!("{what} differs")
}

/// Checks F on an execution of the algorithm, building the ESDS-II
/// execution that matches it.
pub fn check_sim_f(params: &Arc<Params>, exec: &Execution, mutation: Mutation) -> LogCheck {
    let p = params.clone();
    let related = move |s: &SysState, u: &SysState| -> Result<(), String> {
        let (us, ss) = (users(s), users(u));
        let l = Layout::of(&p);
        let sp = spec(u);
        if us != ss {
            return Err(differ("requested/responded"));
        }
        if sp.wait != view_wait(&p, s) {
            return Err(differ("u.wait vs ⋃ wait_c"));
        }
        let mut rept: BTreeSet<(OpId, Value)> = (0..l.clients).flat_map(|c| frontend(s, &l, c).rept.iter().cloned()).collect();
        rept.extend(potential_rept(&p, s));
        if sp.rept != rept {
            return Err(differ("u.rept vs ⋃ rept_c ∪ potential_rept_c"));
        }
        if sp.ops != implementation_ops(&p, s) {
            return Err(differ("u.ops vs ⋃ done_r[r]"));
        }
        let po = implementation_po(&p, s);
        if let Some((a, b)) = sp.po.difference(&po).next() {
            return Err(format!("u.po ⊄ s.po: ({a},{b})"));
        }
        if sp.stabilized != view_stabilized(&p, s) {
            return Err(differ("u.stabilized vs ⋂ stable_r[r]"));
        }
        Ok(())
    };
    let imp = impl_family(params);
    let links = m_family(params).into_iter().zip(imp).collect();
    let m = Matcher { abs: esds_spec(params, Variant::II), links, relation: "F", related: Box::new(related) };
    let p = params.clone();
    let recipe = move |_: usize, _: &SysState, a: &Action, s2: &SysState, u: &SysState| -> Vec<Action> {
        let sp = spec(u);
        match a {
            Action::Request(_) | Action::Response(..) => vec![a.clone()],
            Action::DoIt { op, .. } if !sp.ops.contains(op) => {
                let mut po = sp.po.clone();
                po.extend(p.catalog.csc([op]));
                po.extend(sp.stabilized.iter().map(|y| (y.clone(), op.clone())));
                vec![Action::Enter { op: op.clone(), new_po: transitive_closure(&po) }]
            }
            Action::Send { from: Node::Replica(_), msg: Message::Response(x, v), .. } => vec![Action::Calculate(x.clone(), v.clone())],
            Action::Receive { msg: Message::Gossip(_), .. } => {
                let mut out = Vec::new();
                if mutation != Mutation::DropAddConstraints {
                    out.push(Action::AddConstraints { new_po: implementation_po(&p, s2) });
                }
                let glob = global_labels(&p, s2);
                out.extend(by_label(&view_stabilized(&p, s2), &glob).into_iter().map(Action::Stabilize));
                out
            }
            _ => Vec::new(),
        }
    };
    m.run(exec, &recipe)
}

/// Checks G on an ESDS-II execution, building the matching ESDS-I one.
pub fn check_sim_g(params: &Arc<Params>, exec: &Execution) -> LogCheck {
    let related = |s: &SysState, u: &SysState| -> Result<(), String> {
        let (a, b) = (spec(s), spec(u));
        if users(s) != users(u) {
            return Err(differ("requested/responded"));
        }
        for (what, same) in [("wait", a.wait == b.wait), ("rept", a.rept == b.rept), ("ops", a.ops == b.ops), ("po", a.po == b.po)] {
            if !same {
                return Err(differ(what));
            }
        }
        if !a.stabilized.is_subset(&b.stabilized) {
            return Err("u.stabilized ⊉ s.stabilized".into());
        }
        Ok(())
    };
    let fam = m_family(params);
    let links = fam.iter().cloned().zip(fam.iter().cloned()).collect();
    let m = Matcher { abs: esds_spec(params, Variant::I), links, relation: "G", related: Box::new(related) };
    let recipe = |_: usize, _: &SysState, a: &Action, s2: &SysState, u: &SysState| -> Vec<Action> {
        let (sp, up) = (spec(s2), spec(u));
        match a {
            // x and everything below it, bottom-up; empty once all are in.
            Action::Stabilize(x) => {
                let mut todo: Vec<OpId> = below(x, &sp.ops, &sp.po).into_iter().chain([x.clone()]).filter(|y| !up.stabilized.contains(y)).collect();
                todo.sort_by_key(|y| (below(y, &sp.ops, &sp.po).len(), y.clone()));
                todo.into_iter().map(Action::Stabilize).collect()
            }
            // ESDS-II may enter an operation again; ESDS-I cannot, and only
            // the new constraints matter.
            Action::Enter { op, new_po } if up.ops.contains(op) => vec![Action::AddConstraints { new_po: new_po.clone() }],
            _ => vec![a.clone()],
        }
    };
    m.run(exec, &recipe)
}
