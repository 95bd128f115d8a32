//! Plain and liveness-preserving simulation checkers.

use std::collections::BTreeSet;

use crate::automaton::{ActionLabel, Automaton, AutomatonBuilder, StateId, StateValue, Step};
use crate::error::CoreError;
use crate::execution::{plain_name, Fragment, Lasso};
use crate::liveness::pair::IndexedPair;
use crate::simulation::fragment::{pair_obligations, search_fragment, FragmentQuery, SearchResult};
use crate::simulation::relation::{Candidate, TargetTag};
use crate::simulation::report::{CheckReport, Counterexample};
use crate::state_set::StateSet;
use crate::streett::{check_externals, closure_member, find_live_lasso};

/// Concrete `(A, L)` and abstract `(B, M)`, with conditions resolved on the
/// explicit automata. Plain checks use empty conditions.
pub struct Problem<'a, S: StateValue, T: StateValue> {
    pub a: &'a Automaton<S>,
    pub l: &'a [IndexedPair],
    pub b: &'a Automaton<T>,
    pub m: &'a [IndexedPair],
}

impl<S: StateValue, T: StateValue> Clone for Problem<'_, S, T> {
    fn clone(&self) -> Self {
        *self
    }
}

impl<S: StateValue, T: StateValue> Copy for Problem<'_, S, T> {}

impl<'a, S: StateValue, T: StateValue> Problem<'a, S, T> {
    pub fn plain(a: &'a Automaton<S>, b: &'a Automaton<T>) -> Self {
        Problem { a, l: &[], b, m: &[] }
    }

    pub fn live(a: &'a Automaton<S>, l: &'a [IndexedPair], b: &'a Automaton<T>, m: &'a [IndexedPair]) -> Self {
        Problem { a, l, b, m }
    }
}

/// How claimed-derived targets of h get certified.
#[derive(Clone, Debug, Default)]
pub struct Certificates {
    /// Ids of M pairs whose targets a verified lattice already certifies.
    pub lattice: BTreeSet<String>,
    /// Leave remaining targets as obligations instead of running closure
    /// membership.
    pub manual_only: bool,
}

pub(crate) struct Ctx<'a, S: StateValue, T: StateValue> {
    pub a: &'a Automaton<S>,
    pub l: &'a [IndexedPair],
    pub b: &'a Automaton<T>,
    pub m: &'a [IndexedPair],
    pub cand: &'a Candidate,
    pub inv_a: StateSet,
    pub inv_b: StateSet,
    pub k: usize,
    pub links: Vec<(&'a IndexedPair, &'a IndexedPair)>,
}

#[derive(Clone, Copy)]
pub(crate) enum Constraints {
    None,
    All,
    Red(usize),
    Green(usize),
}

/// The bound used when the candidate gives none.
pub fn default_bound(nb: usize, m: usize) -> usize {
    nb * (m + 1)
}

/// The invariant, or the reachable set when absent; it must contain every
/// reachable state.
pub fn verify_invariant<S: StateValue>(
    a: &Automaton<S>,
    inv: Option<&StateSet>,
    which: &'static str,
) -> Result<StateSet, CoreError> {
    let reach = a.reachable();
    let Some(inv) = inv else { return Ok(reach) };
    if inv.universe() != a.num_states() {
        return Err(CoreError::Malformed(format!("invariant {which} has the wrong universe")));
    }
    if let Some(&s) = a.start().iter().find(|s| !inv.contains(**s)) {
        return Err(CoreError::InvariantNotInductive { which, state: format!("start state {}", plain_name(a, s)) });
    }
    for s in reach.iter() {
        for &i in a.out_steps(s) {
            let st = a.steps()[i];
            if !inv.contains(st.to) {
                let step = format!("{} -{}-> {}", plain_name(a, st.from), a.action(st.action).text(), plain_name(a, st.to));
                return Err(CoreError::InvariantNotInductive { which, state: step });
            }
        }
    }
    Ok(inv.clone())
}

impl<'a, S: StateValue, T: StateValue> Ctx<'a, S, T> {
    pub(crate) fn new(p: Problem<'a, S, T>, cand: &'a Candidate, live: bool) -> Result<Self, CoreError> {
        check_externals(p.a, p.b)?;
        if cand.g.concrete_size() != p.a.num_states() || cand.g.abstract_size() != p.b.num_states() {
            return Err(CoreError::Malformed("relation dimensions do not match the automata".into()));
        }
        let inv_a = verify_invariant(p.a, cand.inv_a.as_ref(), "I_A")?;
        let inv_b = verify_invariant(p.b, cand.inv_b.as_ref(), "I_B")?;
        let links = if live {
            cand.h.check_total(p.m)?;
            cand.h.links(p.m)
        } else {
            Vec::new()
        };
        let m = if live { p.m.len() } else { 0 };
        let k = cand.bound.unwrap_or_else(|| default_bound(p.b.num_states(), m));
        Ok(Ctx { a: p.a, l: p.l, b: p.b, m: p.m, cand, inv_a, inv_b, k, links })
    }

    pub(crate) fn label(&self, st: Step) -> Option<&'a ActionLabel> {
        let x = self.a.action(st.action);
        x.is_external().then_some(x)
    }

    fn obligations(&self, st: Step, c: Constraints) -> (Option<StateSet>, Vec<&'a IndexedPair>) {
        let nb = self.b.num_states();
        let chosen: &[(&IndexedPair, &IndexedPair)] = match c {
            Constraints::None => &[],
            Constraints::All => &self.links,
            Constraints::Red(i) | Constraints::Green(i) => &self.links[i..=i],
        };
        let (avoid, _) = pair_obligations(chosen, st.from, st.to, nb);
        let visit: Vec<&IndexedPair> = chosen
            .iter()
            .filter(|(_, p)| p.green.contains(st.from) || p.green.contains(st.to))
            .map(|(q, _)| *q)
            .collect();
        match c {
            Constraints::Red(_) => (avoid, Vec::new()),
            Constraints::Green(_) => (None, visit),
            _ => (avoid, visit),
        }
    }

    /// Fragment from any of `sources` to a state accepted by `target` that
    /// matches step `st`.
    pub(crate) fn search(
        &self,
        st: Step,
        sources: &[StateId],
        target: &dyn Fn(StateId) -> bool,
        c: Constraints,
        nonempty: bool,
    ) -> SearchResult {
        let (avoid, visit) = self.obligations(st, c);
        let q = FragmentQuery {
            sources,
            target,
            label: self.label(st),
            avoid,
            visit: visit.iter().map(|q| &q.green).collect(),
            nonempty,
            max_len: self.k,
        };
        search_fragment(self.b, &q)
    }

    pub(crate) fn forward_target(&self, s2: StateId) -> impl Fn(StateId) -> bool + '_ {
        move |v| self.cand.g.contains(s2, v) && self.inv_b.contains(v)
    }

    fn related_inv(&self, s: StateId) -> Vec<StateId> {
        self.cand.g.image(s).iter().copied().filter(|u| self.inv_b.contains(*u)).collect()
    }

    /// The fragment the forward checker commits to for `(st, u)`: the
    /// shortest nonempty valid one, else the shortest valid one.
    pub(crate) fn forward_choice(&self, st: Step, u: StateId) -> Option<Fragment> {
        let target = self.forward_target(st.to);
        self.search(st, &[u], &target, Constraints::All, true)
            .found()
            .or_else(|| self.search(st, &[u], &target, Constraints::All, false).found())
    }
}

// Which pair obligation alone is unsatisfiable, for a localized report.
fn diagnose<S: StateValue, T: StateValue>(
    ctx: &Ctx<'_, S, T>,
    run: &dyn Fn(Constraints) -> SearchResult,
    prefix: &str,
    red_clause: &str,
    green_clause: &str,
    base_clause: &str,
) -> (String, Option<String>) {
    if run(Constraints::None).found().is_none() {
        return (format!("{prefix} clause {base_clause}"), None);
    }
    for (i, (q, _)) in ctx.links.iter().enumerate() {
        if run(Constraints::Red(i)).found().is_none() {
            return (format!("{prefix} clause {red_clause}"), Some(q.id.clone()));
        }
        if run(Constraints::Green(i)).found().is_none() {
            return (format!("{prefix} clause {green_clause}"), Some(q.id.clone()));
        }
    }
    (format!("{prefix} clause {base_clause}"), None)
}

fn forward_clause1<S: StateValue, T: StateValue>(ctx: &Ctx<'_, S, T>, r: &mut CheckReport, prefix: &str) -> bool {
    let clause = format!("{prefix} clause 1");
    for &s in ctx.a.start() {
        if !ctx.cand.g.image(s).iter().any(|u| ctx.b.is_start(*u)) {
            let cx = Counterexample::new(&clause, "no related abstract start state").at_concrete(ctx.a, s);
            r.fail(cx, true);
            return false;
        }
    }
    r.ok(&clause);
    true
}

/// Single-step forward check; `None` when it passes.
fn forward_step<S: StateValue, T: StateValue>(
    ctx: &Ctx<'_, S, T>,
    st: Step,
    u: StateId,
    prefix: &str,
) -> Option<(Counterexample, bool)> {
    let target = ctx.forward_target(st.to);
    let c = if ctx.links.is_empty() { Constraints::None } else { Constraints::All };
    let res = ctx.search(st, &[u], &target, c, false);
    if matches!(res, SearchResult::Found(_)) {
        return None;
    }
    let exhaustive = res == SearchResult::Exhausted;
    let run = |c| ctx.search(st, &[u], &target, c, false);
    let (clause, pair) = diagnose(ctx, &run, prefix, "2a", "2b", "2");
    let detail = match &pair {
        Some(_) => "every trace-matching abstract fragment violates the pair obligation".to_string(),
        None if ctx.links.is_empty() || run(Constraints::None).found().is_none() => {
            "no abstract fragment with the same trace ends in a related state".to_string()
        }
        None => "pair obligations cannot be met by a single fragment".to_string(),
    };
    let mut cx = Counterexample::new(&clause, detail).at_step(ctx.a, st).at_abstract(ctx.b, u);
    if let Some(p) = pair {
        cx = cx.with_pair(&p);
    }
    Some((cx, exhaustive))
}

fn forward_clause2<S: StateValue, T: StateValue>(ctx: &Ctx<'_, S, T>, r: &mut CheckReport, prefix: &str) -> bool {
    for st in ctx.a.steps() {
        if !ctx.inv_a.contains(st.from) {
            continue;
        }
        for u in ctx.related_inv(st.from) {
            if let Some((cx, exhaustive)) = forward_step(ctx, *st, u, prefix) {
                r.bounded |= !exhaustive;
                r.fail(cx, exhaustive);
                return false;
            }
        }
    }
    r.ok(&format!("{prefix} clause 2"));
    true
}

/// Replays the single-step forward clause on one step and abstract state;
/// true when the step is matched.
pub fn replay_forward_step<S: StateValue, T: StateValue>(
    p: Problem<'_, S, T>,
    cand: &Candidate,
    live: bool,
    st: Step,
    u: StateId,
) -> Result<bool, CoreError> {
    let ctx = Ctx::new(p, cand, live)?;
    Ok(forward_step(&ctx, st, u, "replay").is_none())
}

pub fn check_forward_sim<S: StateValue, T: StateValue>(
    a: &Automaton<S>,
    b: &Automaton<T>,
    cand: &Candidate,
) -> Result<CheckReport, CoreError> {
    let ctx = Ctx::new(Problem::plain(a, b), cand, false)?;
    let mut r = CheckReport::new("forward", ctx.k);
    let _ = forward_clause1(&ctx, &mut r, "fwd") && forward_clause2(&ctx, &mut r, "fwd");
    Ok(r)
}

fn function_check<S: StateValue, T: StateValue>(ctx: &Ctx<'_, S, T>, r: &mut CheckReport, prefix: &str) -> bool {
    let clause = format!("{prefix} function");
    if let Some(s) = ctx.cand.g.first_non_functional(&ctx.inv_a) {
        let n = ctx.cand.g.image(s).len();
        r.fail(Counterexample::new(&clause, format!("state relates to {n} abstract states, expected 1")).at_concrete(ctx.a, s), true);
        return false;
    }
    r.ok(&clause);
    true
}

fn refinement_inner<S: StateValue, T: StateValue>(
    a: &Automaton<S>,
    b: &Automaton<T>,
    cand: &Candidate,
    relation: &str,
    prefix: &str,
) -> Result<CheckReport, CoreError> {
    let ctx = Ctx::new(Problem::plain(a, b), cand, false)?;
    let mut r = CheckReport::new(relation, ctx.k);
    let _ = function_check(&ctx, &mut r, prefix) && forward_clause1(&ctx, &mut r, prefix) && forward_clause2(&ctx, &mut r, prefix);
    Ok(r)
}

pub fn check_refinement<S: StateValue, T: StateValue>(
    a: &Automaton<S>,
    b: &Automaton<T>,
    cand: &Candidate,
) -> Result<CheckReport, CoreError> {
    refinement_inner(a, b, cand, "refinement", "ref")
}

/// g⁻¹ from B to A, with the invariants swapped.
fn inverse_candidate(cand: &Candidate) -> Candidate {
    Candidate {
        g: cand.g.transpose(),
        h: Default::default(),
        inv_a: cand.inv_b.clone(),
        inv_b: cand.inv_a.clone(),
        bound: cand.bound,
    }
}

fn backward_clauses<S: StateValue, T: StateValue>(ctx: &Ctx<'_, S, T>, r: &mut CheckReport, prefix: &str) -> bool {
    let c1 = format!("{prefix} clause 1");
    for s in ctx.inv_a.iter() {
        if ctx.related_inv(s).is_empty() {
            r.fail(Counterexample::new(&c1, "no related abstract state in I_B").at_concrete(ctx.a, s), true);
            return false;
        }
    }
    r.ok(&c1);
    let c2 = format!("{prefix} clause 2");
    for &s in ctx.a.start() {
        if let Some(u) = ctx.related_inv(s).into_iter().find(|u| !ctx.b.is_start(*u)) {
            let cx = Counterexample::new(&c2, "related abstract state is not a start state").at_concrete(ctx.a, s).at_abstract(ctx.b, u);
            r.fail(cx, true);
            return false;
        }
    }
    r.ok(&c2);
    for st in ctx.a.steps() {
        if !ctx.inv_a.contains(st.from) {
            continue;
        }
        for u2 in ctx.related_inv(st.to) {
            if let Some((cx, exhaustive)) = backward_step(ctx, *st, u2, prefix) {
                r.bounded |= !exhaustive;
                r.fail(cx, exhaustive);
                return false;
            }
        }
    }
    r.ok(&format!("{prefix} clause 3"));
    true
}

fn backward_step<S: StateValue, T: StateValue>(
    ctx: &Ctx<'_, S, T>,
    st: Step,
    u2: StateId,
    prefix: &str,
) -> Option<(Counterexample, bool)> {
    let sources = ctx.related_inv(st.from);
    let target = |v: StateId| v == u2;
    let c = if ctx.links.is_empty() { Constraints::None } else { Constraints::All };
    let res = ctx.search(st, &sources, &target, c, false);
    if matches!(res, SearchResult::Found(_)) {
        return None;
    }
    let exhaustive = res == SearchResult::Exhausted;
    let run = |c| ctx.search(st, &sources, &target, c, false);
    let (clause, pair) = diagnose(ctx, &run, prefix, "3a", "3b", "3");
    let mut cx = Counterexample::new(&clause, "no abstract fragment from a related state reaches this related state")
        .at_step(ctx.a, st)
        .at_abstract(ctx.b, u2);
    if let Some(p) = pair {
        cx = cx.with_pair(&p);
    }
    Some((cx, exhaustive))
}

/// Replays the single-step backward clause for one step and one abstract
/// post-state; true when matched.
pub fn replay_backward_step<S: StateValue, T: StateValue>(
    p: Problem<'_, S, T>,
    cand: &Candidate,
    live: bool,
    st: Step,
    u2: StateId,
) -> Result<bool, CoreError> {
    let ctx = Ctx::new(p, cand, live)?;
    Ok(backward_step(&ctx, st, u2, "replay").is_none())
}

pub fn check_backward_sim<S: StateValue, T: StateValue>(
    a: &Automaton<S>,
    b: &Automaton<T>,
    cand: &Candidate,
) -> Result<CheckReport, CoreError> {
    let ctx = Ctx::new(Problem::plain(a, b), cand, false)?;
    let mut r = CheckReport::new("backward", ctx.k);
    if backward_clauses(&ctx, &mut r, "bwd") {
        r.ok_note("bwd image-finite", "explicit relation");
    }
    Ok(r)
}

pub fn check_history<S: StateValue, T: StateValue>(
    a: &Automaton<S>,
    b: &Automaton<T>,
    cand: &Candidate,
) -> Result<CheckReport, CoreError> {
    let fwd = check_forward_sim(a, b, cand)?;
    let inv = refinement_inner(b, a, &inverse_candidate(cand), "inverse refinement", "inv-ref")?;
    Ok(CheckReport::combine("history", vec![fwd, inv]))
}

pub fn check_prophecy<S: StateValue, T: StateValue>(
    a: &Automaton<S>,
    b: &Automaton<T>,
    cand: &Candidate,
) -> Result<CheckReport, CoreError> {
    let bwd = check_backward_sim(a, b, cand)?;
    let inv = refinement_inner(b, a, &inverse_candidate(cand), "inverse refinement", "inv-ref")?;
    Ok(CheckReport::combine("prophecy", vec![bwd, inv]))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Confidence {
    Exact,
    Bounded,
}

/// Internal steps with an empty match for some related abstract state and
/// no nonempty match from any.
pub fn always_silent_transitions<S: StateValue, T: StateValue>(
    p: Problem<'_, S, T>,
    cand: &Candidate,
) -> Result<Vec<(Step, Confidence)>, CoreError> {
    let ctx = Ctx::new(p, cand, false)?;
    let mut out = Vec::new();
    for st in ctx.a.steps() {
        if ctx.label(*st).is_some() || !ctx.inv_a.contains(st.from) {
            continue;
        }
        let related = ctx.related_inv(st.from);
        if !related.iter().any(|u| ctx.cand.g.contains(st.to, *u)) {
            continue;
        }
        let target = ctx.forward_target(st.to);
        let mut confidence = Confidence::Exact;
        let mut nonempty = false;
        for u in &related {
            match ctx.search(*st, &[*u], &target, Constraints::None, true) {
                SearchResult::Found(_) => {
                    nonempty = true;
                    break;
                }
                SearchResult::Truncated => confidence = Confidence::Bounded,
                SearchResult::Exhausted => {}
            }
        }
        if !nonempty {
            out.push((*st, confidence));
        }
    }
    Ok(out)
}

/// Internal steps from an I_A state that some related abstract state can
/// match by staying put.
pub fn sometimes_silent_transitions<S: StateValue, T: StateValue>(
    p: Problem<'_, S, T>,
    cand: &Candidate,
) -> Result<Vec<Step>, CoreError> {
    let ctx = Ctx::new(p, cand, false)?;
    Ok(sometimes_silent_ids(&ctx).into_iter().map(|i| ctx.a.steps()[i]).collect())
}

fn sometimes_silent_ids<S: StateValue, T: StateValue>(ctx: &Ctx<'_, S, T>) -> Vec<usize> {
    (0..ctx.a.steps().len())
        .filter(|i| {
            let st = ctx.a.steps()[*i];
            ctx.label(st).is_none()
                && ctx.inv_a.contains(st.from)
                && ctx.related_inv(st.to).iter().any(|u| ctx.cand.g.contains(st.from, *u))
        })
        .collect()
}

/// Product of A with the abstract states the forward checker's committed
/// choices lead to. A step labelled `z{i}` is a silent choice for A's step
/// `i`, `e{i}` a nonempty one.
pub(crate) fn greedy_product<S: StateValue, T: StateValue>(ctx: &Ctx<'_, S, T>) -> Automaton<(StateId, StateId)> {
    let mut builder = AutomatonBuilder::new();
    let mut seen = std::collections::HashSet::new();
    let mut queue = std::collections::VecDeque::new();
    let mut used = BTreeSet::new();
    let mut edges = Vec::new();
    for &s in ctx.a.start() {
        for &u in ctx.cand.g.image(s) {
            if ctx.b.is_start(u) && ctx.inv_b.contains(u) && seen.insert((s, u)) {
                builder.push_state((s, u));
                builder.push_start((s, u));
                queue.push_back((s, u));
            }
        }
    }
    while let Some((s, u)) = queue.pop_front() {
        for &i in ctx.a.out_steps(s) {
            let st = ctx.a.steps()[i];
            let Some(frag) = ctx.forward_choice(st, u) else { continue };
            let next = (st.to, frag.lstate());
            if seen.insert(next) {
                builder.push_state(next);
                queue.push_back(next);
            }
            let name = format!("{}{i}", if frag.is_empty() { 'z' } else { 'e' });
            used.insert(name.clone());
            edges.push(((s, u), name, next));
        }
    }
    for n in &used {
        builder.push_internal(n);
    }
    for (from, name, to) in edges {
        builder.push_step(from, &name, to);
    }
    builder.build().expect("greedy product is well-formed")
}

fn lift_pairs(prod: &Automaton<(StateId, StateId)>, l: &[IndexedPair]) -> Vec<IndexedPair> {
    let n = prod.num_states();
    l.iter()
        .map(|p| {
            let lift = |set: &StateSet| StateSet::from_ids(n, (0..n).filter(|v| set.contains(prod.state(*v).0)));
            IndexedPair::new(&p.id, lift(&p.red), lift(&p.green))
        })
        .collect()
}

fn project_lasso<S: StateValue>(a: &Automaton<S>, prod: &Automaton<(StateId, StateId)>, l: &Lasso) -> Lasso {
    let project = |f: &Fragment| Fragment {
        states: f.states.iter().map(|v| prod.state(*v).0).collect(),
        actions: f
            .actions
            .iter()
            .map(|x| a.steps()[prod.action(*x).name[1..].parse::<usize>().expect("step index")].action)
            .collect(),
    };
    Lasso::new(project(&l.stem), project(&l.cycle)).expect("projection of a product lasso")
}

fn forward_clause3<S: StateValue, T: StateValue>(ctx: &Ctx<'_, S, T>, r: &mut CheckReport, prefix: &str) -> bool {
    let clause = format!("{prefix} clause 3");
    let prod = greedy_product(ctx);
    let lifted = lift_pairs(&prod, ctx.l);
    let silent = |i: usize| prod.action(prod.steps()[i].action).name.starts_with('z');
    let verdict = find_live_lasso(&prod, prod.start(), &StateSet::full(prod.num_states()), &silent, &lifted);
    match verdict.witness {
        Some(w) => {
            let lasso = project_lasso(ctx.a, &prod, &w);
            let mut cx = Counterexample::new(&clause, "a live execution is eventually matched only by empty fragments");
            cx.lasso = Some(lasso.describe(ctx.a));
            r.fail(cx, true);
            false
        }
        None => {
            r.ok(&clause);
            true
        }
    }
}

fn certify_targets<S: StateValue, T: StateValue>(
    ctx: &Ctx<'_, S, T>,
    certs: &Certificates,
    r: &mut CheckReport,
    prefix: &str,
) {
    let clause = format!("{prefix} h-certificate");
    for q in ctx.m {
        let t = ctx.cand.h.get(&q.id).expect("h is total");
        if t.tag == TargetTag::InL && ctx.l.iter().any(|p| p.same_sets(&t.pair)) {
            continue;
        }
        if certs.lattice.contains(&q.id) {
            r.ok_note(&clause, format!("{}: lattice", q.id));
            continue;
        }
        if certs.manual_only {
            r.obligation(format!("h({}) = {} must be shown to lie in the semantic closure of L", q.id, t.pair.id));
            continue;
        }
        let v = closure_member(ctx.a, ctx.l, &t.pair);
        if v.member {
            r.ok_note(&clause, format!("{}: closure membership", q.id));
        } else {
            let mut cx = Counterexample::new(&clause, "h target is violated by a live execution of A").with_pair(&q.id);
            cx.lasso = v.witness.map(|w| w.describe(ctx.a));
            r.fail(cx, true);
            return;
        }
    }
}

fn live_forward_inner<S: StateValue, T: StateValue>(
    p: Problem<'_, S, T>,
    cand: &Candidate,
    certs: &Certificates,
    relation: &str,
    prefix: &str,
    functional: bool,
) -> Result<CheckReport, CoreError> {
    let ctx = Ctx::new(p, cand, true)?;
    let mut r = CheckReport::new(relation, ctx.k);
    let _ = (!functional || function_check(&ctx, &mut r, prefix))
        && forward_clause1(&ctx, &mut r, prefix)
        && forward_clause2(&ctx, &mut r, prefix)
        && forward_clause3(&ctx, &mut r, prefix);
    if r.counterexample.is_none() {
        certify_targets(&ctx, certs, &mut r, prefix);
    }
    Ok(r)
}

pub fn check_live_forward_sim<S: StateValue, T: StateValue>(
    p: Problem<'_, S, T>,
    cand: &Candidate,
    certs: &Certificates,
) -> Result<CheckReport, CoreError> {
    live_forward_inner(p, cand, certs, "live forward", "live-fwd", false)
}

pub fn check_live_refinement<S: StateValue, T: StateValue>(
    p: Problem<'_, S, T>,
    cand: &Candidate,
    certs: &Certificates,
) -> Result<CheckReport, CoreError> {
    live_forward_inner(p, cand, certs, "live refinement", "live-ref", true)
}

pub fn check_live_backward_sim<S: StateValue, T: StateValue>(
    p: Problem<'_, S, T>,
    cand: &Candidate,
    certs: &Certificates,
) -> Result<CheckReport, CoreError> {
    let ctx = Ctx::new(p, cand, true)?;
    let mut r = CheckReport::new("live backward", ctx.k);
    if backward_clauses(&ctx, &mut r, "live-bwd") {
        let clause = "live-bwd clause 4";
        let ss: BTreeSet<usize> = sometimes_silent_ids(&ctx).into_iter().collect();
        let verdict = find_live_lasso(ctx.a, ctx.a.start(), &StateSet::full(ctx.a.num_states()), &|i| ss.contains(&i), ctx.l);
        match verdict.witness {
            Some(w) => {
                let mut cx = Counterexample::new(clause, "a live execution eventually takes only sometimes-silent steps");
                cx.lasso = Some(w.describe(ctx.a));
                r.fail(cx, true);
            }
            None => {
                r.ok(clause);
                r.ok_note("live-bwd image-finite", "explicit relation");
                certify_targets(&ctx, certs, &mut r, "live-bwd");
            }
        }
    }
    Ok(r)
}

pub fn check_live_history<S: StateValue, T: StateValue>(
    p: Problem<'_, S, T>,
    cand: &Candidate,
    certs: &Certificates,
) -> Result<CheckReport, CoreError> {
    let fwd = check_live_forward_sim(p, cand, certs)?;
    let inv = refinement_inner(p.b, p.a, &inverse_candidate(cand), "inverse refinement", "inv-ref")?;
    Ok(CheckReport::combine("live history", vec![fwd, inv]))
}

pub fn check_live_prophecy<S: StateValue, T: StateValue>(
    p: Problem<'_, S, T>,
    cand: &Candidate,
    certs: &Certificates,
) -> Result<CheckReport, CoreError> {
    let bwd = check_live_backward_sim(p, cand, certs)?;
    let inv = refinement_inner(p.b, p.a, &inverse_candidate(cand), "inverse refinement", "inv-ref")?;
    Ok(CheckReport::combine("live prophecy", vec![bwd, inv]))
}

/// Image-finiteness of a relation into a programmatic abstract system, the
/// extra requirement of the image-finite backward and prophecy variants.
pub fn check_image_finite<S: StateValue, T: crate::automaton::TransitionSystem>(
    a: &Automaton<S>,
    b: &T,
    rel: &dyn Fn(&S, &T::State) -> bool,
    bounds: &[usize],
) -> CheckReport {
    use crate::simulation::relation::{probe_image_finite, ImageFiniteness};
    let mut r = CheckReport::new("image-finite backward", bounds.last().copied().unwrap_or(0));
    match probe_image_finite(a, b, rel, bounds) {
        ImageFiniteness::Finite { largest } => r.ok_note("bwd image-finite", format!("largest image {largest}")),
        ImageFiniteness::Unbounded { state, sizes } => {
            let mut cx = Counterexample::new("bwd image-finite", format!("image grows with exploration bound: {sizes:?}"));
            cx.concrete_state = Some(state);
            r.bounded = true;
            r.fail(cx, true);
        }
    }
    r
}
