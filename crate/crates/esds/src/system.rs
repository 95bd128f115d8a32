//! Parallel composition and hiding of components, and the two systems of
//! the case study: the algorithm and its specification.

use std::collections::BTreeSet;
use std::sync::Arc;

use liveref_core::TransitionSystem;

use crate::component::{Component, Kind, Params, Role, Variant};
use crate::error::EsdsError;
use crate::model::*;

/// Global state: one component state per component, in composition order.
pub type SysState = Vec<ComponentState>;

#[derive(Clone, Debug)]
pub struct System {
    pub comps: Vec<Component>,
    pub hidden: BTreeSet<String>,
    pub params: Arc<Params>,
}

pub fn compose_parallel(comps: Vec<Component>) -> Result<System, EsdsError> {
    let Some(first) = comps.first() else {
        return Err(EsdsError::Config("empty composition".into()));
    };
    let params = first.params.clone();
    let mut seen = BTreeSet::new();
    for c in &comps {
        for k in c.controlled_keys() {
            if !seen.insert(k.clone()) {
                return Err(EsdsError::SignatureClash(format!("{k} is controlled twice (second time by {})", c.name())));
            }
        }
    }
    Ok(System { comps, hidden: BTreeSet::new(), params })
}

pub fn hide_actions(mut sys: System, names: &[&str]) -> Result<System, EsdsError> {
    for n in names {
        if !sys.comps.iter().any(|c| c.families().contains(n)) {
            return Err(EsdsError::UnknownAction(n.to_string()));
        }
        sys.hidden.insert(n.to_string());
    }
    Ok(sys)
}

impl System {
    pub fn initial(&self) -> SysState {
        self.comps.iter().map(Component::initial).collect()
    }

    /// External means in some signature, not internal there, and not hidden.
    pub fn is_external(&self, a: &Action) -> bool {
        !self.hidden.contains(a.family()) && self.comps.iter().any(|c| matches!(c.role(a), Some(Role::Input | Role::Output)))
    }

    fn owner(&self, a: &Action) -> Option<usize> {
        self.comps.iter().position(|c| matches!(c.role(a), Some(Role::Output | Role::Internal)))
    }

    /// Locally controlled actions enabled in `s`, in component order.
    pub fn enabled(&self, s: &SysState) -> Vec<Action> {
        self.comps.iter().zip(s).flat_map(|(c, st)| c.enabled(st)).collect()
    }

    pub fn check(&self, s: &SysState, a: &Action) -> Result<(), String> {
        let Some(i) = self.owner(a) else {
            return Err(format!("{a} is not controlled by any component"));
        };
        self.comps[i].check(&s[i], a)
    }

    /// Applies `a` to every component with `a` in its signature, without
    /// checking the precondition.
    pub fn apply(&self, s: &mut SysState, a: &Action) {
        for (c, st) in self.comps.iter().zip(s.iter_mut()) {
            if c.role(a).is_some() {
                c.apply(st, a);
            }
        }
    }

    pub fn step(&self, s: &SysState, a: &Action) -> Result<SysState, String> {
        self.check(s, a)?;
        let mut t = s.clone();
        self.apply(&mut t, a);
        Ok(t)
    }

    pub fn index_of(&self, kind: &Kind) -> Option<usize> {
        self.comps.iter().position(|c| c.kind == *kind)
    }
}

impl TransitionSystem for System {
    type State = SysState;
    type Action = Action;

    fn initial_states(&self) -> Vec<SysState> {
        vec![self.initial()]
    }

    fn successors(&self, s: &SysState) -> Vec<(Action, SysState)> {
        self.enabled(s)
            .into_iter()
            .map(|a| {
                let mut t = s.clone();
                self.apply(&mut t, &a);
                (a, t)
            })
            .collect()
    }
}

/// Component order of the algorithm: Users, front ends, replicas, then
/// channels client→replica, replica→client and replica→replica.
#[derive(Clone, Copy, Debug)]
pub struct Layout {
    pub clients: usize,
    pub replicas: usize,
}

impl Layout {
    pub fn of(p: &Params) -> Self {
        Layout { clients: p.clients, replicas: p.replicas }
    }

    pub fn frontend(&self, c: usize) -> usize {
        1 + c
    }

    pub fn replica(&self, r: usize) -> usize {
        1 + self.clients + r
    }

    pub fn channels(&self) -> Vec<(Node, Node)> {
        let (nc, nr) = (self.clients, self.replicas);
        let mut v = Vec::new();
        for c in 0..nc {
            for r in 0..nr {
                v.push((Node::Client(c), Node::Replica(r)));
            }
        }
        for r in 0..nr {
            for c in 0..nc {
                v.push((Node::Replica(r), Node::Client(c)));
            }
        }
        for r in 0..nr {
            for q in (0..nr).filter(|q| *q != r) {
                v.push((Node::Replica(r), Node::Replica(q)));
            }
        }
        v
    }

    pub fn channel(&self, from: Node, to: Node) -> usize {
        let pos = self.channels().iter().position(|e| *e == (from, to)).unwrap_or_else(|| panic!("no channel {from}{to}"));
        1 + self.clients + self.replicas + pos
    }
}

/// Typed views into a global state of the algorithm.
pub fn users(s: &SysState) -> &UsersState {
    match &s[0] {
        ComponentState::Users(u) => u,
        other => panic!("expected Users state, found {other:?}"),
    }
}

pub fn frontend<'a>(s: &'a SysState, l: &Layout, c: usize) -> &'a FrontendState {
    match &s[l.frontend(c)] {
        ComponentState::Frontend(f) => f,
        other => panic!("expected Frontend state, found {other:?}"),
    }
}

pub fn replica<'a>(s: &'a SysState, l: &Layout, r: usize) -> &'a ReplicaState {
    match &s[l.replica(r)] {
        ComponentState::Replica(x) => x,
        other => panic!("expected Replica state, found {other:?}"),
    }
}

pub fn channel<'a>(s: &'a SysState, l: &Layout, from: Node, to: Node) -> &'a ChannelState {
    match &s[l.channel(from, to)] {
        ComponentState::Channel(x) => x,
        other => panic!("expected Channel state, found {other:?}"),
    }
}

/// The specification state of a `[Users, Spec]` system.
pub fn spec(s: &SysState) -> &SpecState {
    match &s[1] {
        ComponentState::Spec(x) => x,
        other => panic!("expected Spec state, found {other:?}"),
    }
}

/// ESDS-Alg with `send` and `receive` hidden. `lossy` replaces that
/// client's front end by one that never forwards requests.
pub fn esds_alg(params: &Arc<Params>, lossy: Option<usize>) -> System {
    let l = Layout::of(params);
    let mut comps = vec![Component::new(Kind::Users, params)];
    for c in 0..l.clients {
        comps.push(Component::new(Kind::Frontend { client: c, lossy: lossy == Some(c) }, params));
    }
    for r in 0..l.replicas {
        comps.push(Component::new(Kind::Replica { replica: r }, params));
    }
    for (from, to) in l.channels() {
        comps.push(Component::new(Kind::Channel { from, to }, params));
    }
    let sys = compose_parallel(comps).expect("the algorithm's components are compatible");
    hide_actions(sys, &["send", "receive"]).expect("send and receive are in the signature")
}

pub fn esds_spec(params: &Arc<Params>, variant: Variant) -> System {
    compose_parallel(vec![Component::new(Kind::Users, params), Component::new(Kind::Spec(variant), params)])
        .expect("Users and the specification are compatible")
}
