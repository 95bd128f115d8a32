//! The component automata: Users, Frontend(c), Replica(r), Channel(i,j) and
//! the ESDS-I / ESDS-II specifications, in precondition-effect form.

use std::collections::BTreeSet;
use std::sync::Arc;

use crate::error::EsdsError;
use crate::model::*;
use crate::ops::{is_strict_order, transitive_closure, valset, Catalog, OpId, Order};

#[derive(Clone, Debug)]
pub struct Params {
    pub catalog: Arc<Catalog>,
    pub clients: usize,
    pub replicas: usize,
    pub valset_cap: usize,
}

impl Params {
    pub fn new(catalog: Catalog, clients: usize, replicas: usize) -> Arc<Self> {
        Arc::new(Params { catalog: Arc::new(catalog), clients, replicas, valset_cap: 1 << 14 })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Variant {
    I,
    II,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Kind {
    Users,
    /// A lossy front end never forwards requests to a replica.
    Frontend { client: usize, lossy: bool },
    Replica { replica: usize },
    Channel { from: Node, to: Node },
    Spec(Variant),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Role {
    Input,
    Output,
    Internal,
}

#[derive(Clone, Debug)]
pub struct Component {
    pub kind: Kind,
    pub params: Arc<Params>,
}

/// Parses `users`, `frontend:C`, `frontend-lossy:C`, `replica:R`,
/// `channel:c0:r1` (any of `cN`/`rN` endpoints), `esds-i` or `esds-ii`.
pub fn build_component(kind: &str, params: &Arc<Params>) -> Result<Component, EsdsError> {
    let parts: Vec<&str> = kind.split(':').collect();
    let idx = |s: &str, max: usize| s.parse::<usize>().ok().filter(|i| *i < max);
    let node = |s: &str| match s.split_at(1.min(s.len())) {
        ("c", n) => idx(n, params.clients).map(Node::Client),
        ("r", n) => idx(n, params.replicas).map(Node::Replica),
        _ => None,
    };
    let k = match parts.as_slice() {
        ["users"] => Some(Kind::Users),
        ["frontend", c] => idx(c, params.clients).map(|client| Kind::Frontend { client, lossy: false }),
        ["frontend-lossy", c] => idx(c, params.clients).map(|client| Kind::Frontend { client, lossy: true }),
        ["replica", r] => idx(r, params.replicas).map(|replica| Kind::Replica { replica }),
        ["channel", i, j] => match (node(i), node(j)) {
            (Some(a), Some(b)) if a != b && !matches!((a, b), (Node::Client(_), Node::Client(_))) => Some(Kind::Channel { from: a, to: b }),
            _ => None,
        },
        ["esds-i"] => Some(Kind::Spec(Variant::I)),
        ["esds-ii"] => Some(Kind::Spec(Variant::II)),
        _ => None,
    };
    k.map(|kind| Component { kind, params: params.clone() }).ok_or_else(|| EsdsError::UnknownKind(kind.to_string()))
}

fn subset<'a>(xs: impl IntoIterator<Item = &'a OpId>, of: &BTreeSet<OpId>) -> bool {
    xs.into_iter().all(|x| of.contains(x))
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

/// `y ⪯ x ∨ x ⪯ y` for every `y ∈ ops`.
fn totally_ordered_against(x: &OpId, ops: &BTreeSet<OpId>, po: &Order) -> Option<OpId> {
    ops.iter().find(|y| *y != x && !po.contains(&((*y).clone(), x.clone())) && !po.contains(&(x.clone(), (*y).clone()))).cloned()
}

pub fn below(x: &OpId, ops: &BTreeSet<OpId>, po: &Order) -> BTreeSet<OpId> {
    ops.iter().filter(|y| po.contains(&((*y).clone(), x.clone()))).cloned().collect()
}

impl Component {
    pub fn new(kind: Kind, params: &Arc<Params>) -> Self {
        Component { kind, params: params.clone() }
    }

    fn cat(&self) -> &Catalog {
        &self.params.catalog
    }

    fn known(&self, x: &OpId) -> bool {
        self.cat().get(x).is_some()
    }

    pub fn name(&self) -> String {
        match &self.kind {
            Kind::Users => "Users".into(),
            Kind::Frontend { client, lossy: false } => format!("Frontend(c{client})"),
            Kind::Frontend { client, lossy: true } => format!("LossyFrontend(c{client})"),
            Kind::Replica { replica } => format!("Replica(r{replica})"),
            Kind::Channel { from, to } => format!("Channel({from},{to})"),
            Kind::Spec(Variant::I) => "ESDS-I".into(),
            Kind::Spec(Variant::II) => "ESDS-II".into(),
        }
    }

    /// Action names this component has in its signature.
    pub fn families(&self) -> &'static [&'static str] {
        match self.kind {
            Kind::Users => &["request", "response"],
            Kind::Frontend { .. } => &["request", "response", "send", "receive"],
            Kind::Replica { .. } => &["send", "receive", "do_it"],
            Kind::Channel { .. } => &["send", "receive"],
            Kind::Spec(_) => &["request", "response", "enter", "add_constraints", "stabilize", "calculate"],
        }
    }

    /// Keys of the locally controlled action classes; two components of a
    /// composition may not share one.
    pub fn controlled_keys(&self) -> Vec<String> {
        match &self.kind {
            Kind::Users => vec!["request".into()],
            Kind::Frontend { client, .. } => vec![format!("response@c{client}"), format!("send@c{client}")],
            Kind::Replica { replica } => vec![format!("send@r{replica}"), format!("do_it@r{replica}")],
            Kind::Channel { from, to } => vec![format!("receive@{from}{to}")],
            Kind::Spec(_) => {
                let mut v: Vec<String> = (0..self.params.clients).map(|c| format!("response@c{c}")).collect();
                v.extend(["enter", "add_constraints", "stabilize", "calculate"].map(String::from));
                v
            }
        }
    }

    pub fn role(&self, a: &Action) -> Option<Role> {
        use Action::*;
        let client_of = |x: &OpId| self.cat().get(x).map(|o| o.client);
        match (&self.kind, a) {
            (Kind::Users, Request(x)) if self.known(x) => Some(Role::Output),
            (Kind::Users, Response(x, _)) if self.known(x) => Some(Role::Input),
            (Kind::Frontend { client, .. }, Request(x)) if client_of(x) == Some(*client) => Some(Role::Input),
            (Kind::Frontend { client, .. }, Response(x, _)) if client_of(x) == Some(*client) => Some(Role::Output),
            (Kind::Frontend { client, .. }, Send { from: Node::Client(c), to: Node::Replica(_), msg: Message::Request(_) }) if c == client => {
                Some(Role::Output)
            }
            (Kind::Frontend { client, .. }, Receive { from: Node::Replica(_), to: Node::Client(c), msg: Message::Response(..) })
                if c == client =>
            {
                Some(Role::Input)
            }
            (Kind::Replica { replica }, Receive { from: Node::Client(_), to: Node::Replica(r), msg: Message::Request(_) }) if r == replica => {
                Some(Role::Input)
            }
            (Kind::Replica { replica }, Receive { from: Node::Replica(q), to: Node::Replica(r), msg: Message::Gossip(_) })
                if r == replica && q != r =>
            {
                Some(Role::Input)
            }
            (Kind::Replica { replica }, Send { from: Node::Replica(r), to: Node::Client(_), msg: Message::Response(..) }) if r == replica => {
                Some(Role::Output)
            }
            (Kind::Replica { replica }, Send { from: Node::Replica(r), to: Node::Replica(q), msg: Message::Gossip(_) })
                if r == replica && q != r =>
            {
                Some(Role::Output)
            }
            (Kind::Replica { replica }, DoIt { replica: r, .. }) if r == replica => Some(Role::Internal),
            (Kind::Channel { from, to }, Send { from: f, to: t, .. }) if f == from && t == to => Some(Role::Input),
            (Kind::Channel { from, to }, Receive { from: f, to: t, .. }) if f == from && t == to => Some(Role::Output),
            (Kind::Spec(_), Request(x)) if self.known(x) => Some(Role::Input),
            (Kind::Spec(_), Response(x, _)) if self.known(x) => Some(Role::Output),
            (Kind::Spec(_), Enter { .. } | AddConstraints { .. } | Stabilize(_) | Calculate(..)) => Some(Role::Internal),
            _ => None,
        }
    }

    pub fn initial(&self) -> ComponentState {
        match self.kind {
            Kind::Users => ComponentState::Users(UsersState::default()),
            Kind::Frontend { .. } => ComponentState::Frontend(FrontendState::default()),
            Kind::Replica { .. } => ComponentState::Replica(ReplicaState::new(self.params.replicas)),
            Kind::Channel { .. } => ComponentState::Channel(ChannelState::default()),
            Kind::Spec(_) => ComponentState::Spec(SpecState::default()),
        }
    }

    /// The figure's precondition for a locally controlled action; input
    /// actions are always enabled.
    pub fn check(&self, st: &ComponentState, a: &Action) -> Result<(), String> {
        use Action::*;
        match self.role(a) {
            None => return Err(format!("{a} is not in the signature of {}", self.name())),
            Some(Role::Input) => return Ok(()),
            _ => {}
        }
        let cat = self.cat();
        match (&self.kind, st, a) {
            (Kind::Users, ComponentState::Users(u), Request(x)) => {
                ensure(!u.requested.contains(x), || format!("{x} already requested"))?;
                ensure(subset(&cat.op(x).prev, &u.requested), || format!("prev({x}) not yet requested"))
            }
            (Kind::Frontend { lossy, .. }, ComponentState::Frontend(f), Send { msg: Message::Request(x), .. }) => {
                ensure(!lossy, || "the lossy front end drops requests".into())?;
                ensure(f.wait.contains(x), || format!("{x} ∉ wait_c"))
            }
            (Kind::Frontend { .. }, ComponentState::Frontend(f), Response(x, v)) => {
                ensure(f.rept.contains(&(x.clone(), v.clone())), || format!("({x},v) ∉ rept_c"))?;
                ensure(f.wait.contains(x), || format!("{x} ∉ wait_c"))
            }
            (Kind::Replica { replica }, ComponentState::Replica(s), DoIt { op, label, .. }) => {
                let done = &s.done[*replica];
                ensure(s.rcvd.contains(op) && !done.contains(op), || format!("{op} ∉ rcvd_r - done_r[r]"))?;
                ensure(subset(&cat.op(op).prev, done), || format!("prev({op}) ⊄ done_r[r]"))?;
                ensure(done.iter().all(|y| label_lt(s.label.get(y), Some(label))), || format!("label not above done_r[r] for {op}"))
            }
            (Kind::Replica { replica }, ComponentState::Replica(s), Send { to: Node::Client(c), msg: Message::Response(x, v), .. }) => {
                let done = &s.done[*replica];
                ensure(s.pending.contains(x) && done.contains(x), || format!("{x} ∉ pending_r ∩ done_r[r]"))?;
                ensure(!cat.op(x).strict || s.stable_everywhere().contains(x), || format!("strict {x} not in ⋂ stable_r[i]"))?;
                ensure(*c == cat.client(x), || format!("{x} belongs to another client"))?;
                let vals = valset(cat, x, done, &s.local_constraints(done), self.params.valset_cap).map_err(|e| e.to_string())?;
                ensure(vals.contains(v), || format!("value for {x} ∉ valset(x, done_r[r], lc_r)"))
            }
            (Kind::Replica { replica }, ComponentState::Replica(s), Send { msg: Message::Gossip(g), .. }) => {
                ensure(*g == self.gossip(s, *replica), || "gossip does not carry the replica's current state".into())
            }
            (Kind::Channel { .. }, ComponentState::Channel(ch), Receive { msg, .. }) => {
                ensure(ch.queue.front() == Some(msg), || format!("{msg} is not at the head of the channel"))
            }
            (Kind::Spec(_), ComponentState::Spec(s), Response(x, v)) => {
                ensure(s.rept.contains(&(x.clone(), v.clone())), || format!("({x},v) ∉ rept"))?;
                ensure(s.wait.contains(x), || format!("{x} ∉ wait"))
            }
            (Kind::Spec(var), ComponentState::Spec(s), Enter { op: x, new_po }) => {
                ensure(s.wait.contains(x), || format!("{x} ∉ wait"))?;
                if *var == Variant::I {
                    ensure(!s.ops.contains(x), || format!("{x} ∈ ops"))?;
                }
                ensure(subset(&cat.op(x).prev, &s.ops), || format!("prev({x}) ⊄ ops"))?;
                ensure(new_po.iter().all(|(a, b)| (s.ops.contains(a) || a == x) && (s.ops.contains(b) || b == x)), || {
                    "span(new-po) ⊄ ops ∪ {x}".into()
                })?;
                ensure(s.po.is_subset(new_po), || "po ⊄ new-po".into())?;
                ensure(cat.csc([x]).is_subset(new_po), || format!("CSC({{{x}}}) ⊄ new-po"))?;
                ensure(s.stabilized.iter().all(|y| new_po.contains(&(y.clone(), x.clone()))), || {
                    format!("a stabilized operation is not before {x} in new-po")
                })?;
                ensure(is_partial_order(new_po), || "new-po is not a strict partial order".into())
            }
            (Kind::Spec(_), ComponentState::Spec(s), AddConstraints { new_po }) => {
                ensure(new_po.iter().all(|(a, b)| s.ops.contains(a) && s.ops.contains(b)), || "span(new-po) ⊄ ops".into())?;
                ensure(s.po.is_subset(new_po), || "po ⊄ new-po".into())?;
                ensure(is_partial_order(new_po), || "new-po is not a strict partial order".into())
            }
            (Kind::Spec(var), ComponentState::Spec(s), Stabilize(x)) => {
                ensure(s.ops.contains(x), || format!("{x} ∉ ops"))?;
                if let Some(y) = totally_ordered_against(x, &s.ops, &s.po) {
                    return Err(format!("{x} and {y} are unordered"));
                }
                let low = below(x, &s.ops, &s.po);
                match var {
                    Variant::I => {
                        ensure(!s.stabilized.contains(x), || format!("{x} ∈ stabilized"))?;
                        ensure(low.is_subset(&s.stabilized), || format!("ops below {x} are not all stabilized"))
                    }
                    Variant::II => {
                        let unordered = low.iter().any(|y| totally_ordered_against(y, &low, &s.po).is_some());
                        ensure(!unordered, || format!("po does not totally order the operations below {x}"))
                    }
                }
            }
            (Kind::Spec(_), ComponentState::Spec(s), Calculate(x, v)) => {
                ensure(s.ops.contains(x), || format!("{x} ∉ ops"))?;
                ensure(!cat.op(x).strict || s.stabilized.contains(x), || format!("strict {x} ∉ stabilized"))?;
                let vals = valset(cat, x, &s.ops, &s.po, self.params.valset_cap).map_err(|e| e.to_string())?;
                ensure(vals.contains(v), || format!("value for {x} ∉ valset(x, ops, po)"))
            }
            _ => Err(format!("{a} does not apply to {}", self.name())),
        }
    }

    pub fn gossip(&self, s: &ReplicaState, r: usize) -> Gossip {
        Gossip { rcvd: s.rcvd.clone(), done: s.done[r].clone(), labels: s.label.clone(), stable: s.stable[r].clone() }
    }

    /// Effect of `a`, which must be in the signature.
    pub fn apply(&self, st: &mut ComponentState, a: &Action) {
        use Action::*;
        match (&self.kind, st, a) {
            (Kind::Users, ComponentState::Users(u), Request(x)) => {
                u.requested.insert(x.clone());
            }
            (Kind::Users, ComponentState::Users(u), Response(x, _)) => {
                u.responded.insert(x.clone());
            }
            (Kind::Frontend { .. }, ComponentState::Frontend(f), Request(x)) => {
                f.wait.insert(x.clone());
            }
            (Kind::Frontend { .. }, ComponentState::Frontend(f), Receive { msg: Message::Response(x, v), .. }) => {
                if f.wait.contains(x) {
                    f.rept.insert((x.clone(), v.clone()));
                }
            }
            (Kind::Frontend { .. }, ComponentState::Frontend(f), Response(x, _)) => {
                f.wait.remove(x);
                f.rept.retain(|(y, _)| y != x);
            }
            (Kind::Replica { .. }, ComponentState::Replica(s), Receive { msg: Message::Request(x), .. }) => {
                s.pending.insert(x.clone());
                s.rcvd.insert(x.clone());
            }
            (Kind::Replica { replica }, ComponentState::Replica(s), DoIt { op, label, .. }) => {
                s.done[*replica].insert(op.clone());
                s.label.insert(op.clone(), *label);
            }
            (Kind::Replica { .. }, ComponentState::Replica(s), Send { msg: Message::Response(x, _), .. }) => {
                s.pending.remove(x);
            }
            (Kind::Replica { replica }, ComponentState::Replica(s), Receive { from: Node::Replica(q), msg: Message::Gossip(g), .. }) => {
                let (r, q) = (*replica, *q);
                s.rcvd.extend(g.rcvd.iter().cloned());
                let ds: Vec<OpId> = g.done.union(&g.stable).cloned().collect();
                s.done[q].extend(ds.iter().cloned());
                s.done[r].extend(ds);
                for i in (0..s.done.len()).filter(|i| *i != r && *i != q) {
                    s.done[i].extend(g.stable.iter().cloned());
                }
                merge_labels(&mut s.label, &g.labels);
                s.stable[q].extend(g.stable.iter().cloned());
                let everywhere = intersect_all(&s.done);
                s.stable[r].extend(g.stable.iter().cloned().chain(everywhere));
            }
            (Kind::Channel { .. }, ComponentState::Channel(ch), Send { msg, .. }) => ch.queue.push_back(msg.clone()),
            (Kind::Channel { .. }, ComponentState::Channel(ch), Receive { .. }) => {
                ch.queue.pop_front();
            }
            (Kind::Spec(_), ComponentState::Spec(s), Request(x)) => {
                s.wait.insert(x.clone());
            }
            (Kind::Spec(_), ComponentState::Spec(s), Enter { op, new_po }) => {
                s.ops.insert(op.clone());
                s.po = new_po.clone();
            }
            (Kind::Spec(_), ComponentState::Spec(s), AddConstraints { new_po }) => s.po = new_po.clone(),
            (Kind::Spec(_), ComponentState::Spec(s), Stabilize(x)) => {
                s.stabilized.insert(x.clone());
            }
            (Kind::Spec(_), ComponentState::Spec(s), Calculate(x, v)) => {
                if s.wait.contains(x) {
                    s.rept.insert((x.clone(), v.clone()));
                }
            }
            (Kind::Spec(_), ComponentState::Spec(s), Response(x, _)) => {
                s.wait.remove(x);
                s.rept.retain(|(y, _)| y != x);
            }
            _ => {}
        }
    }

    /// Enabled locally controlled actions. Parameters are chosen
    /// canonically: do_it uses the next label, enter the least admissible
    /// new-po; add_constraints is never offered.
    pub fn enabled(&self, st: &ComponentState) -> Vec<Action> {
        use Action::*;
        let cat = self.cat();
        let mut out = Vec::new();
        match (&self.kind, st) {
            (Kind::Users, ComponentState::Users(u)) => {
                for op in cat.iter() {
                    if !u.requested.contains(&op.id) && subset(&op.prev, &u.requested) {
                        out.push(Request(op.id.clone()));
                    }
                }
            }
            (Kind::Frontend { client, lossy }, ComponentState::Frontend(f)) => {
                for (x, v) in &f.rept {
                    if f.wait.contains(x) {
                        out.push(Response(x.clone(), v.clone()));
                    }
                }
                if !lossy {
                    for x in &f.wait {
                        for r in 0..self.params.replicas {
                            out.push(Send { from: Node::Client(*client), to: Node::Replica(r), msg: Message::Request(x.clone()) });
                        }
                    }
                }
            }
            (Kind::Replica { replica }, ComponentState::Replica(s)) => {
                let r = *replica;
                let done = &s.done[r];
                let next = Label { counter: 1 + done.iter().filter_map(|y| s.label.get(y)).map(|l| l.counter).max().unwrap_or(0), replica: r };
                for x in s.rcvd.difference(done) {
                    if subset(&cat.op(x).prev, done) {
                        out.push(DoIt { replica: r, op: x.clone(), label: next });
                    }
                }
                let stable = s.stable_everywhere();
                let lc = s.local_constraints(done);
                for x in s.pending.intersection(done) {
                    let op = cat.op(x);
                    if op.strict && !stable.contains(x) {
                        continue;
                    }
                    if let Ok(vals) = valset(cat, x, done, &lc, self.params.valset_cap) {
                        for v in vals {
                            out.push(Send { from: Node::Replica(r), to: Node::Client(op.client), msg: Message::Response(x.clone(), v) });
                        }
                    }
                }
                for q in (0..self.params.replicas).filter(|q| *q != r) {
                    out.push(Send { from: Node::Replica(r), to: Node::Replica(q), msg: Message::Gossip(self.gossip(s, r)) });
                }
            }
            (Kind::Channel { from, to }, ComponentState::Channel(ch)) => {
                if let Some(m) = ch.queue.front() {
                    out.push(Receive { from: *from, to: *to, msg: m.clone() });
                }
            }
            (Kind::Spec(var), ComponentState::Spec(s)) => {
                for (x, v) in &s.rept {
                    if s.wait.contains(x) {
                        out.push(Response(x.clone(), v.clone()));
                    }
                }
                for x in &s.wait {
                    if *var == Variant::I && s.ops.contains(x) {
                        continue;
                    }
                    if subset(&cat.op(x).prev, &s.ops) {
                        out.push(Enter { op: x.clone(), new_po: least_new_po(cat, s, x) });
                    }
                }
                for x in &s.ops {
                    let a = Stabilize(x.clone());
                    if self.check(st, &a).is_ok() {
                        out.push(a);
                    }
                    if cat.op(x).strict && !s.stabilized.contains(x) {
                        continue;
                    }
                    if let Ok(vals) = valset(cat, x, &s.ops, &s.po, self.params.valset_cap) {
                        out.extend(vals.into_iter().map(|v| Calculate(x.clone(), v)));
                    }
                }
            }
            _ => {}
        }
        out
    }
}

/// Strict (irreflexive) and transitively closed.
pub fn is_partial_order(po: &Order) -> bool {
    is_strict_order(po) && transitive_closure(po) == *po
}

/// `po ∪ CSC({x}) ∪ {(y, x) : y ∈ stabilized}`, closed transitively.
pub fn least_new_po(cat: &Catalog, s: &SpecState, x: &OpId) -> Order {
    let mut po = s.po.clone();
    po.extend(cat.csc([x]));
    po.extend(s.stabilized.iter().map(|y| (y.clone(), x.clone())));
    transitive_closure(&po)
}
