//! Pair monitors over finite runs.
//!
//! A finite run cannot show `□◇R ⇒ □◇G`; the report uses the surrogate
//! "green observed at or after the last red" and says so in its label.

use std::collections::BTreeSet;
use std::sync::Arc;

use liveref_core::liveness::ComplementedPair;
use liveref_core::liveness::Region;
use serde::Serialize;

use crate::component::Params;
use crate::model::{intersect_all, ComponentState};
use crate::ops::OpId;
use crate::system::{frontend, replica, spec, Layout, SysState};

pub const SURROGATE: &str = "finite-run surrogate: discharged means green at or after the last red";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Status {
    NeverRed,
    Discharged,
    Outstanding,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct PairStatus {
    pub id: String,
    pub status: Status,
    pub last_red: Option<usize>,
    pub last_green: Option<usize>,
}

#[derive(Clone, Debug, Serialize)]
pub struct MonitorReport {
    pub label: &'static str,
    pub family: String,
    pub states: usize,
    pub pairs: Vec<PairStatus>,
}

impl MonitorReport {
    pub fn outstanding(&self) -> Vec<&PairStatus> {
        self.pairs.iter().filter(|p| p.status == Status::Outstanding).collect()
    }

    pub fn status(&self, id: &str) -> Option<Status> {
        self.pairs.iter().find(|p| p.id == id).map(|p| p.status)
    }
}

pub fn monitor_pairs(states: &[SysState], family: &str, pairs: &[ComplementedPair<SysState>]) -> MonitorReport {
    let pairs = pairs
        .iter()
        .map(|p| {
            let last_red = states.iter().rposition(|s| p.red.contains(s));
            let last_green = states.iter().rposition(|s| p.green.contains(s));
            let status = match (last_red, last_green) {
                (None, _) => Status::NeverRed,
                (Some(r), Some(g)) if g >= r => Status::Discharged,
                _ => Status::Outstanding,
            };
            PairStatus { id: p.id.clone(), status, last_red, last_green }
        })
        .collect();
    MonitorReport { label: SURROGATE, family: family.to_string(), states: states.len(), pairs }
}

fn is_spec_state(s: &SysState) -> bool {
    s.len() == 2 && matches!(s[1], ComponentState::Spec(_))
}

/// `wait` of the specification, or `⋃_c wait_c` of the algorithm.
pub fn view_wait(p: &Params, s: &SysState) -> BTreeSet<OpId> {
    if is_spec_state(s) {
        return spec(s).wait.clone();
    }
    let l = Layout::of(p);
    (0..l.clients).flat_map(|c| frontend(s, &l, c).wait.iter().cloned()).collect()
}

/// `stabilized` of the specification, or `⋂_r stable_r[r]` of the algorithm.
pub fn view_stabilized(p: &Params, s: &SysState) -> BTreeSet<OpId> {
    if is_spec_state(s) {
        return spec(s).stabilized.clone();
    }
    let l = Layout::of(p);
    let own: Vec<BTreeSet<OpId>> = (0..l.replicas).map(|r| replica(s, &l, r).stable[r].clone()).collect();
    intersect_all(&own)
}

fn op_pairs(p: &Arc<Params>, req: &str, stab: &str) -> Vec<ComplementedPair<SysState>> {
    let mut out = Vec::new();
    for x in p.catalog.ids() {
        let waiting = |x: &OpId| {
            let (p, x) = (p.clone(), x.clone());
            Region::pred(&format!("{x}∈wait"), move |s: &SysState| view_wait(&p, s).contains(&x))
        };
        let (p2, x2) = (p.clone(), x.clone());
        let answered = Region::pred(&format!("{x}∉wait"), move |s: &SysState| !view_wait(&p2, s).contains(&x2));
        let (p3, x3) = (p.clone(), x.clone());
        let stable = Region::pred(&format!("{x}∈stabilized"), move |s: &SysState| view_stabilized(&p3, s).contains(&x3));
        out.push(ComplementedPair::new(&format!("{req}({x})"), waiting(x), answered));
        out.push(ComplementedPair::new(&format!("{stab}({x})"), waiting(x), stable));
    }
    out
}

/// ⟨x∈wait, x∉wait⟩ and ⟨x∈wait, x∈stabilized⟩ for every operation, read
/// through the views so the same pairs apply to either system.
pub fn m_family(p: &Arc<Params>) -> Vec<ComplementedPair<SysState>> {
    op_pairs(p, "SpReq", "SpStab")
}

/// The implementation's pairs ⟨x∈wait_c, x∉wait_c⟩ and
/// ⟨x∈wait_c, x∈⋂_i stable_i[i]⟩. On algorithm states these coincide with
/// [`m_family`] evaluated through the views.
pub fn impl_family(p: &Arc<Params>) -> Vec<ComplementedPair<SysState>> {
    op_pairs(p, "ImpReq", "ImpStab")
}
