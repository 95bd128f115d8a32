//! Labels, messages, actions and component states.

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::ops::{OpId, Order, Value};

/// A replica-assigned label; absence from a label map stands for ∞.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Label {
    pub counter: u64,
    pub replica: usize,
}

/// `a < b` with `None` as ∞.
pub fn label_lt(a: Option<&Label>, b: Option<&Label>) -> bool {
    match (a, b) {
        (Some(a), Some(b)) => a < b,
        (Some(_), None) => true,
        (None, _) => false,
    }
}

/// Pointwise minimum.
pub fn merge_labels(into: &mut BTreeMap<OpId, Label>, from: &BTreeMap<OpId, Label>) {
    for (id, l) in from {
        into.entry(id.clone()).and_modify(|cur| *cur = (*cur).min(*l)).or_insert(*l);
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Node {
    Client(usize),
    Replica(usize),
}

impl fmt::Display for Node {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Node::Client(c) => write!(f, "c{c}"),
            Node::Replica(r) => write!(f, "r{r}"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Gossip {
    pub rcvd: BTreeSet<OpId>,
    pub done: BTreeSet<OpId>,
    pub labels: BTreeMap<OpId, Label>,
    pub stable: BTreeSet<OpId>,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Message {
    Request(OpId),
    Response(OpId, Value),
    Gossip(Gossip),
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Action {
    Request(OpId),
    Response(OpId, Value),
    Send { from: Node, to: Node, msg: Message },
    Receive { from: Node, to: Node, msg: Message },
    DoIt { replica: usize, op: OpId, label: Label },
    Enter { op: OpId, new_po: Order },
    AddConstraints { new_po: Order },
    Stabilize(OpId),
    Calculate(OpId, Value),
}

impl Action {
    /// The action's name without parameters, as used by hiding.
    pub fn family(&self) -> &'static str {
        match self {
            Action::Request(_) => "request",
            Action::Response(..) => "response",
            Action::Send { .. } => "send",
            Action::Receive { .. } => "receive",
            Action::DoIt { .. } => "do_it",
            Action::Enter { .. } => "enter",
            Action::AddConstraints { .. } => "add_constraints",
            Action::Stabilize(_) => "stabilize",
            Action::Calculate(..) => "calculate",
        }
    }
}

fn set(v: &BTreeSet<String>) -> String {
    v.iter().cloned().collect::<Vec<_>>().join(",")
}

impl fmt::Display for Message {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Message::Request(x) => write!(f, "<request,{x}>"),
            Message::Response(x, v) => write!(f, "<response,{x},{{{}}}>", set(v)),
            Message::Gossip(g) => write!(f, "<gossip,R={{{}}},D={{{}}},S={{{}}}>", set(&g.rcvd), set(&g.done), set(&g.stable)),
        }
    }
}

impl fmt::Display for Action {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Action::Request(x) => write!(f, "request({x})"),
            Action::Response(x, v) => write!(f, "response({x},{{{}}})", set(v)),
            Action::Send { from, to, msg } => write!(f, "send_{from}{to}({msg})"),
            Action::Receive { from, to, msg } => write!(f, "receive_{from}{to}({msg})"),
            Action::DoIt { replica, op, label } => write!(f, "do_it_r{replica}({op},({},{}))", label.counter, label.replica),
            Action::Enter { op, new_po } => write!(f, "enter({op},{} edges)", new_po.len()),
            Action::AddConstraints { new_po } => write!(f, "add_constraints({} edges)", new_po.len()),
            Action::Stabilize(x) => write!(f, "stabilize({x})"),
            Action::Calculate(x, v) => write!(f, "calculate({x},{{{}}})", set(v)),
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct UsersState {
    pub requested: BTreeSet<OpId>,
    /// Bookkeeping: operations that received a response.
    pub responded: BTreeSet<OpId>,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct FrontendState {
    pub wait: BTreeSet<OpId>,
    pub rept: BTreeSet<(OpId, Value)>,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct ReplicaState {
    pub pending: BTreeSet<OpId>,
    pub rcvd: BTreeSet<OpId>,
    pub done: Vec<BTreeSet<OpId>>,
    pub stable: Vec<BTreeSet<OpId>>,
    pub label: BTreeMap<OpId, Label>,
}

impl ReplicaState {
    pub fn new(replicas: usize) -> Self {
        ReplicaState { done: vec![BTreeSet::new(); replicas], stable: vec![BTreeSet::new(); replicas], ..Default::default() }
    }

    /// `lc_r`, restricted to `ids`.
    pub fn local_constraints(&self, ids: &BTreeSet<OpId>) -> Order {
        let mut out = Order::new();
        for a in ids {
            for b in ids {
                if label_lt(self.label.get(a), self.label.get(b)) {
                    out.insert((a.clone(), b.clone()));
                }
            }
        }
        out
    }

    /// `⋂_i stable_r[i]`.
    pub fn stable_everywhere(&self) -> BTreeSet<OpId> {
        intersect_all(&self.stable)
    }
}

pub fn intersect_all(sets: &[BTreeSet<OpId>]) -> BTreeSet<OpId> {
    let mut it = sets.iter();
    let Some(first) = it.next() else { return BTreeSet::new() };
    it.fold(first.clone(), |acc, s| acc.intersection(s).cloned().collect())
}

/// A FIFO channel. The figure's multiset is refined to a queue.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct ChannelState {
    pub queue: VecDeque<Message>,
}

/// ESDS-I and ESDS-II share this state.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct SpecState {
    pub wait: BTreeSet<OpId>,
    pub rept: BTreeSet<(OpId, Value)>,
    pub ops: BTreeSet<OpId>,
    pub po: Order,
    pub stabilized: BTreeSet<OpId>,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ComponentState {
    Users(UsersState),
    Frontend(FrontendState),
    Replica(ReplicaState),
    Channel(ChannelState),
    Spec(SpecState),
}
