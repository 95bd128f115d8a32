//! Seeded fair scheduler over a composed system.

use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::checkers::{implementation_po, is_algorithm};
use crate::component::Kind;
use crate::config::RunConfig;
use crate::error::EsdsError;
use crate::model::*;
use crate::ops::is_strict_order;
use crate::system::{replica, spec, users, Layout, SysState, System};

/// States `states[0..=n]` and the actions between them.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Execution {
    pub states: Vec<SysState>,
    pub actions: Vec<Action>,
}

impl Execution {
    pub fn len(&self) -> usize {
        self.actions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.actions.is_empty()
    }

    pub fn last(&self) -> &SysState {
        self.states.last().expect("an execution has a first state")
    }
}

/// Fairness self-audit, written to the log header.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Audit {
    pub age_max: usize,
    /// Longest run of consecutive rounds any class stayed enabled unfired.
    pub max_wait: usize,
    /// Most classes enabled at once. One class fires per round, so oldest
    /// first keeps every wait within `age_max + max_classes - 1`.
    pub max_classes: usize,
    pub forced: usize,
    pub invariant_checks: usize,
}

impl Audit {
    pub fn within_bound(&self) -> bool {
        self.max_wait < self.age_max + self.max_classes.max(1)
    }
}

#[derive(Clone, Debug)]
pub struct RunOutcome {
    pub exec: Execution,
    pub quiescent: bool,
    pub audit: Audit,
}

/// Task class of an action: weak fairness is enforced per class.
pub fn task_class(a: &Action) -> String {
    match a {
        Action::Request(_) => "request".into(),
        Action::Response(x, _) => format!("response {x}"),
        Action::Send { from, msg: Message::Request(x), .. } => format!("forward {from} {x}"),
        Action::Send { from, msg: Message::Response(x, _), .. } => format!("reply {from} {x}"),
        Action::Send { from, to, msg: Message::Gossip(_) } => format!("gossip {from} {to}"),
        Action::Receive { from, to, .. } => format!("deliver {from} {to}"),
        Action::DoIt { replica, op, .. } => format!("do_it r{replica} {op}"),
        Action::Enter { op, .. } => format!("enter {op}"),
        Action::AddConstraints { .. } => "add_constraints".into(),
        Action::Stabilize(x) => format!("stabilize {x}"),
        Action::Calculate(x, _) => format!("calculate {x}"),
    }
}

/// Would delivering `r`'s current gossip change `q`, counting copies
/// already in transit?
fn gossip_useful(sys: &System, s: &SysState, l: &Layout, a: &Action) -> bool {
    let Action::Send { from, to, msg } = a else { return false };
    let (Node::Replica(_), Node::Replica(q)) = (*from, *to) else { return false };
    if crate::system::channel(s, l, *from, *to).queue.contains(msg) {
        return false;
    }
    let recv = Action::Receive { from: *from, to: *to, msg: msg.clone() };
    let k = l.replica(q);
    let mut st = s[k].clone();
    sys.comps[k].apply(&mut st, &recv);
    st != s[k]
}

pub fn check_invariants(sys: &System, s: &SysState) -> Result<(), String> {
    if is_algorithm(sys) {
        let l = Layout::of(&sys.params);
        for r in 0..l.replicas {
            let rs = replica(s, &l, r);
            if let Some(i) = (0..l.replicas).find(|i| !rs.stable[*i].is_subset(&rs.done[*i])) {
                return Err(format!("stable_r{r}[{i}] ⊄ done_r{r}[{i}]"));
            }
        }
        if !is_strict_order(&implementation_po(&sys.params, s)) {
            return Err("implementation po has a cycle".into());
        }
    } else {
        let sp = spec(s);
        if !sp.stabilized.is_subset(&sp.ops) {
            return Err("stabilized ⊄ ops".into());
        }
        if !is_strict_order(&sp.po) {
            return Err("po has a cycle".into());
        }
    }
    let u = users(s);
    if !u.responded.is_subset(&u.requested) {
        return Err("responded ⊄ requested".into());
    }
    Ok(())
}

/// Runs until the step budget or quiescence: no channel holds a message and
/// the only enabled actions are gossip sends that would change nothing.
pub fn run_fair_scheduler(sys: &System, cfg: &RunConfig) -> Result<RunOutcome, EsdsError> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let l = Layout::of(&sys.params);
    let alg = is_algorithm(sys);
    let mut s = sys.initial();
    let mut exec = Execution { states: vec![s.clone()], actions: Vec::new() };
    let mut audit = Audit { age_max: cfg.age_max, ..Audit::default() };
    let mut ages: BTreeMap<String, usize> = BTreeMap::new();
    let mut last_sent: BTreeMap<String, usize> = BTreeMap::new();
    let mut round_robin: BTreeMap<String, usize> = BTreeMap::new();
    let mut quiescent = false;
    check_invariants(sys, &s).map_err(|detail| EsdsError::Invariant { step: 0, detail })?;

    for step in 0..cfg.steps {
        let due = |class: &str| last_sent.get(class).map_or(true, |t| step - t >= cfg.gossip_epoch);
        let enabled = sys.enabled(&s);
        let mut classes: BTreeMap<String, Vec<Action>> = BTreeMap::new();
        let mut held_back: BTreeMap<String, Vec<Action>> = BTreeMap::new();
        for a in enabled {
            let class = task_class(&a);
            match &a {
                Action::Send { msg: Message::Gossip(_), .. } if alg => {
                    if gossip_useful(sys, &s, &l, &a) {
                        classes.entry(class).or_default().push(a);
                    } else {
                        if due(&class) {
                            held_back.entry(class).or_default().push(a);
                        }
                    }
                }
                Action::Send { to: Node::Replica(r), msg: Message::Request(_), .. } if alg => {
                    let turn = round_robin.get(&class).copied().unwrap_or(0) % l.replicas;
                    if *r == turn {
                        if due(&class) {
                            classes.entry(class).or_default().push(a);
                        } else {
                            held_back.entry(class).or_default().push(a);
                        }
                    }
                }
                _ => classes.entry(class).or_default().push(a),
            }
        }
        let channels_empty = !alg || l.channels().iter().all(|(i, j)| crate::system::channel(&s, &l, *i, *j).queue.is_empty());
        if alg && classes.is_empty() && channels_empty && held_back.keys().all(|k| k.starts_with("gossip")) {
            quiescent = true;
            break;
        }
        if classes.is_empty() {
            classes = held_back;
        } else {
            for (k, v) in held_back {
                if k.starts_with("gossip") {
                    classes.insert(k, v);
                }
            }
        }
        if classes.is_empty() {
            break;
        }
        ages.retain(|k, _| classes.contains_key(k));
        audit.max_classes = audit.max_classes.max(classes.len());
        let oldest = classes.keys().map(|k| (ages.get(k).copied().unwrap_or(0), k)).max_by(|a, b| a.0.cmp(&b.0).then(b.1.cmp(a.1)));
        let chosen = match oldest {
            Some((age, k)) if age >= cfg.age_max => {
                audit.forced += 1;
                k.clone()
            }
            _ => {
                let keys: Vec<&String> = classes.keys().collect();
                (*keys.choose(&mut rng).expect("nonempty")).clone()
            }
        };
        let acts = &classes[&chosen];
        let a = acts[rng.gen_range(0..acts.len())].clone();
        for k in classes.keys() {
            if *k != chosen {
                let age = ages.entry(k.clone()).or_insert(0);
                *age += 1;
                audit.max_wait = audit.max_wait.max(*age);
            }
        }
        ages.remove(&chosen);
        if matches!(a, Action::Send { msg: Message::Request(_) | Message::Gossip(_), .. }) {
            last_sent.insert(chosen.clone(), step);
            if matches!(a, Action::Send { msg: Message::Request(_), .. }) {
                *round_robin.entry(chosen.clone()).or_insert(0) += 1;
            }
        }
        s = sys.step(&s, &a).map_err(|detail| EsdsError::Invariant { step: step + 1, detail: format!("{a}: {detail}") })?;
        audit.invariant_checks += 1;
        check_invariants(sys, &s).map_err(|detail| EsdsError::Invariant { step: step + 1, detail })?;
        exec.actions.push(a);
        exec.states.push(s.clone());
    }
    Ok(RunOutcome { exec, quiescent, audit })
}

/// Index of the lossy front end in an algorithm system, if any.
pub fn lossy_client(sys: &System) -> Option<usize> {
    sys.comps.iter().find_map(|c| match c.kind {
        Kind::Frontend { client, lossy: true } => Some(client),
        _ => None,
    })
}
