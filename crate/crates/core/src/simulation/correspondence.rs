//! Constructing abstract executions that correspond to concrete lassos.

use std::collections::HashMap;
use std::fmt::Write as _;

use serde::Serialize;

use crate::automaton::{AutomatonBuilder, StateId, StateValue, Step};
use crate::error::CoreError;
use crate::execution::{plain_name, Fragment, Lasso};
use crate::liveness::pair::is_live;
use crate::mapping::{check_live_index_mapping, IndexMapping, MappingViolation};
use crate::simulation::checks::{Constraints, Ctx, Problem};
use crate::simulation::relation::Candidate;
use crate::state_set::StateSet;
use crate::streett::{bfs_path, sccs};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Correspondence {
    pub lasso: Lasso,
    pub mapping: IndexMapping,
}

fn step_at(alpha: &Lasso, i: usize) -> Step {
    Step { from: alpha.state_at(i - 1), action: alpha.action_at(i), to: alpha.state_at(i) }
}

fn require_lasso<S: StateValue, T: StateValue>(ctx: &Ctx<'_, S, T>, alpha: &Lasso) -> Result<(), CoreError> {
    if alpha.is_lasso_of(ctx.a) {
        Ok(())
    } else {
        Err(CoreError::Malformed("input is not a lasso of the concrete automaton".into()))
    }
}

/// Assembles the abstract lasso and mapping from one fragment per concrete
/// position, closing the cycle at `prefix_len`.
fn assemble(u0: StateId, frags: &[Fragment], prefix_len: usize) -> Result<Correspondence, CoreError> {
    let mut stem = Fragment::single(u0);
    let mut table = vec![0];
    for f in &frags[..prefix_len] {
        stem = stem.concat(f)?;
        table.push(stem.len());
    }
    let mut cycle = Fragment::single(stem.lstate());
    for f in &frags[prefix_len..] {
        cycle = cycle.concat(f)?;
        table.push(stem.len() + cycle.len());
    }
    if cycle.is_empty() {
        return Err(CoreError::Breach("abstract cycle is empty although the candidate passed".into()));
    }
    let mapping = IndexMapping { table, prefix_len, period: frags.len() - prefix_len, increment: cycle.len() };
    Ok(Correspondence { lasso: Lasso::new(stem, cycle)?, mapping })
}

/// Walks `alpha`, committing at each step to the fragment the forward
/// checker chose, until a (position class, abstract state) pair repeats.
pub fn build_correspondence_forward<S: StateValue, T: StateValue>(
    p: Problem<'_, S, T>,
    cand: &Candidate,
    alpha: &Lasso,
) -> Result<Correspondence, CoreError> {
    let ctx = Ctx::new(p, cand, true)?;
    require_lasso(&ctx, alpha)?;
    let s0 = alpha.state_at(0);
    let u0 = ctx
        .cand
        .g
        .image(s0)
        .iter()
        .copied()
        .find(|u| ctx.b.is_start(*u) && ctx.inv_b.contains(*u))
        .ok_or_else(|| CoreError::Breach("no related abstract start state".into()))?;
    let mut seen: HashMap<(usize, StateId), usize> = HashMap::new();
    let mut frags = Vec::new();
    let mut u = u0;
    let limit = alpha.num_classes() * ctx.b.num_states() + alpha.stem_len() + 1;
    for i in 0..=limit {
        if i >= alpha.stem_len() {
            if let Some(&i0) = seen.get(&(alpha.class_of(i), u)) {
                return assemble(u0, &frags, i0);
            }
            seen.insert((alpha.class_of(i), u), i);
        }
        let st = step_at(alpha, i + 1);
        let f = ctx
            .forward_choice(st, u)
            .ok_or_else(|| CoreError::Breach(format!("no matching fragment at position {}", i + 1)))?;
        u = f.lstate();
        frags.push(f);
    }
    Err(CoreError::Breach("walk did not close".into()))
}

/// Finds an infinite path through the induced digraph folded onto
/// `alpha`'s position classes.
pub fn build_correspondence_backward<S: StateValue, T: StateValue>(
    p: Problem<'_, S, T>,
    cand: &Candidate,
    alpha: &Lasso,
) -> Result<Correspondence, CoreError> {
    let ctx = Ctx::new(p, cand, true)?;
    require_lasso(&ctx, alpha)?;
    let related = |s: StateId| -> Vec<StateId> { ctx.cand.g.image(s).iter().copied().filter(|u| ctx.inv_b.contains(*u)).collect() };
    let mut builder: AutomatonBuilder<(StateId, usize)> = AutomatonBuilder::new();
    let mut frags: Vec<Fragment> = Vec::new();
    let mut edges = Vec::new();
    let mut seen = std::collections::HashSet::new();
    let mut queue = std::collections::VecDeque::new();
    for u in related(alpha.state_at(0)) {
        seen.insert((u, 0));
        builder.push_state((u, 0));
        builder.push_start((u, 0));
        queue.push_back((u, 0));
    }
    if queue.is_empty() {
        return Err(CoreError::Breach("no related abstract state at position 0".into()));
    }
    while let Some((u, c)) = queue.pop_front() {
        let st = step_at(alpha, c + 1);
        let c2 = alpha.next_class(c);
        for u2 in related(st.to) {
            let target = |v: StateId| v == u2;
            let Some(f) = ctx.search(st, &[u], &target, Constraints::All, false).found() else { continue };
            if seen.insert((u2, c2)) {
                builder.push_state((u2, c2));
                queue.push_back((u2, c2));
            }
            edges.push(((u, c), frags.len(), (u2, c2)));
            frags.push(f);
        }
    }
    for i in 0..frags.len() {
        builder.push_internal(&format!("f{i}"));
    }
    for (from, i, to) in &edges {
        builder.push_step(*from, &format!("f{i}"), *to);
    }
    let graph = builder.build().expect("class graph is well-formed");
    let frag_of = |step: usize| -> &Fragment { &frags[graph.action(graph.steps()[step].action).name[1..].parse::<usize>().expect("edge label")] };
    let reach = graph.reachable();
    for comp in sccs(&graph, &reach, &|_| true) {
        let set = StateSet::from_ids(graph.num_states(), comp.iter().copied());
        let inner = comp.iter().flat_map(|v| graph.out_steps(*v).iter().copied()).find(|i| set.contains(graph.steps()[*i].to));
        let Some(edge) = inner else { continue };
        let st = graph.steps()[edge];
        let stem = bfs_path(&graph, graph.start(), None, &|_| true, &|v| v == st.from).expect("reachable");
        let back = bfs_path(&graph, &[st.to], Some(&set), &|_| true, &|v| v == st.from).expect("strongly connected");
        let mut path: Vec<&Fragment> = Vec::new();
        for (i, v) in stem.states.iter().enumerate().skip(1) {
            let prev = stem.states[i - 1];
            path.push(frag_of(step_between(&graph, prev, stem.actions[i - 1], *v)));
        }
        let prefix_len = path.len();
        path.push(frag_of(edge));
        for (i, v) in back.states.iter().enumerate().skip(1) {
            let prev = back.states[i - 1];
            path.push(frag_of(step_between(&graph, prev, back.actions[i - 1], *v)));
        }
        let u0 = graph.state(stem.states[0]).0;
        let owned: Vec<Fragment> = path.into_iter().cloned().collect();
        return assemble(u0, &owned, prefix_len);
    }
    Err(CoreError::Breach("induced digraph has no infinite path".into()))
}

fn step_between<S: StateValue>(a: &crate::automaton::Automaton<S>, from: StateId, action: usize, to: StateId) -> usize {
    a.out_steps(from)
        .iter()
        .copied()
        .find(|i| a.steps()[*i].action == action && a.steps()[*i].to == to)
        .expect("path step exists")
}

/// Re-validates a correspondence: the mapping must be a live index mapping
/// for `(g, h)` and the abstract lasso must be live in M.
pub fn validate_correspondence<S: StateValue, T: StateValue>(
    p: Problem<'_, S, T>,
    cand: &Candidate,
    alpha: &Lasso,
    corr: &Correspondence,
) -> Result<Result<(), CorrespondenceFailure>, CoreError> {
    if !corr.lasso.is_lasso_of(p.b) {
        return Ok(Err(CorrespondenceFailure::NotALasso));
    }
    let links = cand.h.links(p.m);
    let rel = |s: StateId, u: StateId| cand.g.contains(s, u);
    if let Err(v) = check_live_index_mapping(p.a, alpha, p.b, &corr.lasso, &rel, &links, &corr.mapping)? {
        return Ok(Err(CorrespondenceFailure::Mapping(v)));
    }
    if !is_live(&corr.lasso, p.m) {
        return Ok(Err(CorrespondenceFailure::NotLive));
    }
    Ok(Ok(()))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum CorrespondenceFailure {
    NotALasso,
    Mapping(MappingViolation),
    NotLive,
}

/// Level graph of abstract states along the first `steps` positions of a
/// concrete lasso. Node `(u, i)` has `u` related to the i-th concrete state.
#[derive(Clone, Debug, Serialize)]
pub struct InducedDigraph {
    pub levels: usize,
    pub nodes: Vec<(StateId, usize)>,
    pub edges: Vec<(usize, usize)>,
    pub roots: Vec<usize>,
}

impl InducedDigraph {
    pub fn to_dot<T: StateValue>(&self, b: &crate::automaton::Automaton<T>) -> String {
        let mut out = String::from("digraph induced {\n");
        for (i, (u, lvl)) in self.nodes.iter().enumerate() {
            let shape = if self.roots.contains(&i) { "doublecircle" } else { "circle" };
            let _ = writeln!(out, "  n{i} [label=\"{} @{lvl}\", shape={shape}];", plain_name(b, *u).replace('"', "'"));
        }
        for (x, y) in &self.edges {
            let _ = writeln!(out, "  n{x} -> n{y};");
        }
        out.push_str("}\n");
        out
    }
}

pub fn build_induced_digraph<S: StateValue, T: StateValue>(
    p: Problem<'_, S, T>,
    cand: &Candidate,
    alpha: &Lasso,
    steps: usize,
) -> Result<InducedDigraph, CoreError> {
    let ctx = Ctx::new(p, cand, true)?;
    require_lasso(&ctx, alpha)?;
    let mut nodes = Vec::new();
    let mut index: HashMap<(StateId, usize), usize> = HashMap::new();
    for i in 0..=steps {
        let level: Vec<StateId> =
            ctx.cand.g.image(alpha.state_at(i)).iter().copied().filter(|u| ctx.inv_b.contains(*u)).collect();
        if level.is_empty() {
            return Err(CoreError::Breach(format!("level {i} of the induced digraph is empty")));
        }
        for u in level {
            index.insert((u, i), nodes.len());
            nodes.push((u, i));
        }
    }
    let roots: Vec<usize> = (0..nodes.len()).filter(|n| nodes[*n].1 == 0).collect();
    let mut edges = Vec::new();
    let mut has_parent = vec![false; nodes.len()];
    for (x, &(u, i)) in nodes.iter().enumerate() {
        if i == steps {
            continue;
        }
        let st = step_at(alpha, i + 1);
        for (y, &(u2, j)) in nodes.iter().enumerate() {
            if j != i + 1 {
                continue;
            }
            let target = |v: StateId| v == u2;
            if ctx.search(st, &[u], &target, Constraints::All, false).found().is_some() {
                edges.push((x, y));
                has_parent[y] = true;
            }
        }
    }
    if let Some(orphan) = (0..nodes.len()).find(|n| nodes[*n].1 > 0 && !has_parent[*n]) {
        let (u, i) = nodes[orphan];
        return Err(CoreError::Breach(format!("node ({}, {i}) is not reachable from a root", plain_name(ctx.b, u))));
    }
    Ok(InducedDigraph { levels: steps + 1, nodes, edges, roots })
}
