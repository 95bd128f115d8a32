//! Complemented-pairs lattices: finite ordered pair sets whose green states
//! are covered by the red states of immediate successors.

use std::collections::BTreeSet;

use serde::Serialize;

use crate::automaton::{Automaton, StateValue};
use crate::error::CoreError;
use crate::execution::plain_name;
use crate::liveness::pair::{ComplementedPair, IndexedPair};
use crate::streett::closure_member;

#[derive(Clone, Debug)]
pub struct PairLattice<S> {
    pub pairs: Vec<ComplementedPair<S>>,
    /// `below[i][j]` iff `pairs[i] ≺ pairs[j]`, transitively closed.
    below: Vec<Vec<bool>>,
    pub top: usize,
    pub bottom: usize,
}

impl<S: StateValue> PairLattice<S> {
    /// Builds the lattice and closes `order` transitively.
    pub fn new(pairs: Vec<ComplementedPair<S>>, order: &[(String, String)], top: &str, bottom: &str) -> Result<Self, CoreError> {
        let n = pairs.len();
        let mut seen = BTreeSet::new();
        for p in &pairs {
            if !seen.insert(p.id.as_str()) {
                return Err(CoreError::Lattice(format!("duplicate element {}", p.id)));
            }
        }
        let find = |id: &str| pairs.iter().position(|p| p.id == id).ok_or_else(|| CoreError::UnknownPair(id.to_string()));
        let mut below = vec![vec![false; n]; n];
        for (x, y) in order {
            below[find(x)?][find(y)?] = true;
        }
        for k in 0..n {
            for i in 0..n {
                if below[i][k] {
                    for j in 0..n {
                        if below[k][j] {
                            below[i][j] = true;
                        }
                    }
                }
            }
        }
        let (top, bottom) = (find(top)?, find(bottom)?);
        Ok(PairLattice { pairs, below, top, bottom })
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn index_of(&self, id: &str) -> Result<usize, CoreError> {
        self.pairs.iter().position(|p| p.id == id).ok_or_else(|| CoreError::UnknownPair(id.to_string()))
    }

    pub fn precedes(&self, i: usize, j: usize) -> bool {
        self.below[i][j]
    }

    /// Edges of the closed order, as ids.
    pub fn order(&self) -> Vec<(String, String)> {
        let n = self.len();
        let mut out = Vec::new();
        for i in 0..n {
            for j in 0..n {
                if self.below[i][j] {
                    out.push((self.pairs[i].id.clone(), self.pairs[j].id.clone()));
                }
            }
        }
        out
    }

    pub fn succ_indices(&self, r: usize) -> Vec<usize> {
        let n = self.len();
        (0..n)
            .filter(|w| self.below[r][*w] && !(0..n).any(|v| self.below[r][v] && self.below[v][*w]))
            .collect()
    }

    /// Immediate successors of `r`.
    pub fn succ(&self, r: &str) -> Result<Vec<&str>, CoreError> {
        let i = self.index_of(r)?;
        Ok(self.succ_indices(i).into_iter().map(|w| self.pairs[w].id.as_str()).collect())
    }

    /// ⟨bottom.R, top.G⟩.
    pub fn derived_pair(&self) -> ComplementedPair<S> {
        let b = &self.pairs[self.bottom];
        let t = &self.pairs[self.top];
        ComplementedPair::new(&format!("{}~{}", b.id, t.id), b.red.clone(), t.green.clone())
    }

    /// Clauses 2 and 3, which do not depend on states.
    fn order_clauses(&self) -> Vec<LatticeClause> {
        let n = self.len();
        let mut out = Vec::new();
        match (0..n).find(|i| self.below[*i][*i]) {
            Some(i) => out.push(LatticeClause::fail("clause 2", Some(&self.pairs[i].id), "order is not irreflexive")),
            None => out.push(LatticeClause::pass("clause 2")),
        }
        let not_below_top = (0..n).find(|i| *i != self.top && !self.below[*i][self.top]);
        let not_above_bottom = (0..n).find(|i| *i != self.bottom && !self.below[self.bottom][*i]);
        match (not_below_top, not_above_bottom) {
            (Some(i), _) => out.push(LatticeClause::fail("clause 3", Some(&self.pairs[i].id), "element is not below top")),
            (None, Some(i)) => out.push(LatticeClause::fail("clause 3", Some(&self.pairs[i].id), "element is not above bottom")),
            (None, None) => out.push(LatticeClause::pass("clause 3")),
        }
        out
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct LatticeClause {
    pub clause: String,
    pub ok: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub element: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub detail: Option<String>,
}

impl LatticeClause {
    fn pass(clause: &str) -> Self {
        LatticeClause { clause: clause.to_string(), ok: true, element: None, detail: None }
    }

    fn fail(clause: &str, element: Option<&str>, detail: impl Into<String>) -> Self {
        LatticeClause { clause: clause.to_string(), ok: false, element: element.map(str::to_string), detail: Some(detail.into()) }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct StructureReport {
    pub clauses: Vec<LatticeClause>,
}

impl StructureReport {
    pub fn ok(&self) -> bool {
        self.clauses.iter().all(|c| c.ok)
    }

    pub fn first_failure(&self) -> Option<&LatticeClause> {
        self.clauses.iter().find(|c| !c.ok)
    }
}

/// Clauses 1–4 on explicit states: finiteness, strict order, unique
/// top and bottom, and `r.G ⊆ ∪ {w.R : w ∈ succ(r)}` for every `r ≠ top`.
pub fn check_lattice_structure<S: StateValue>(lat: &PairLattice<S>, a: &Automaton<S>) -> StructureReport {
    let mut clauses = vec![LatticeClause::pass("clause 1")];
    clauses.extend(lat.order_clauses());
    let idx: Vec<IndexedPair> = lat.pairs.iter().map(|p| p.index(a)).collect();
    let mut c4 = LatticeClause::pass("clause 4");
    'outer: for r in 0..lat.len() {
        if r == lat.top {
            continue;
        }
        let succ = lat.succ_indices(r);
        for s in idx[r].green.iter() {
            if !succ.iter().any(|w| idx[*w].red.contains(s)) {
                c4 = LatticeClause::fail("clause 4", Some(&lat.pairs[r].id), format!("green state {} is red in no successor", plain_name(a, s)));
                break 'outer;
            }
        }
    }
    clauses.push(c4);
    StructureReport { clauses }
}

#[derive(Clone, Debug, Serialize)]
pub struct ElementCertificate {
    pub id: String,
    pub member: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct LatticeCertificate {
    pub structure: StructureReport,
    pub elements: Vec<ElementCertificate>,
    /// ⟨bottom.R, top.G⟩ as indexed sets, when certified.
    #[serde(skip)]
    pub derived: Option<IndexedPair>,
    pub derived_id: Option<String>,
    pub derived_member: bool,
    pub certified: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub refused: Option<String>,
}

/// Structural check, then closure membership of every element, then of the
/// derived pair.
pub fn certify_lattice<S: StateValue>(a: &Automaton<S>, l: &[IndexedPair], lat: &PairLattice<S>) -> LatticeCertificate {
    let structure = check_lattice_structure(lat, a);
    let mut cert = LatticeCertificate {
        structure,
        elements: Vec::new(),
        derived: None,
        derived_id: None,
        derived_member: false,
        certified: false,
        refused: None,
    };
    if let Some(f) = cert.structure.first_failure() {
        cert.refused = Some(format!("structure {} fails", f.clause));
        return cert;
    }
    for p in &lat.pairs {
        let member = closure_member(a, l, &p.index(a)).member;
        cert.elements.push(ElementCertificate { id: p.id.clone(), member });
        if !member && cert.refused.is_none() {
            cert.refused = Some(format!("element {} is not in the semantic closure", p.id));
        }
    }
    if cert.refused.is_some() {
        return cert;
    }
    let derived = lat.derived_pair().index(a);
    cert.derived_member = closure_member(a, l, &derived).member;
    cert.derived_id = Some(derived.id.clone());
    cert.derived = Some(derived);
    cert.certified = cert.derived_member;
    if !cert.derived_member {
        cert.refused = Some("derived pair is not in the semantic closure".into());
    }
    cert
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SampleViolation {
    pub element: String,
    pub sample: usize,
    pub state: String,
}

#[derive(Clone, Debug, Serialize)]
pub struct SampledReport {
    pub label: &'static str,
    pub samples: usize,
    pub order: Vec<LatticeClause>,
    pub violations: Vec<SampleViolation>,
}

impl SampledReport {
    pub fn ok(&self) -> bool {
        self.violations.is_empty() && self.order.iter().all(|c| c.ok)
    }
}

/// Clause 4 tested pointwise on sampled states, for predicate pairs over
/// unbounded state spaces.
pub fn check_lattice_sampled<S: StateValue>(lat: &PairLattice<S>, sample: &[S]) -> Result<SampledReport, CoreError> {
    if sample.is_empty() {
        return Err(CoreError::Lattice("empty sample".into()));
    }
    let succ: Vec<Vec<usize>> = (0..lat.len()).map(|r| lat.succ_indices(r)).collect();
    let mut violations = Vec::new();
    for (k, s) in sample.iter().enumerate() {
        for r in 0..lat.len() {
            if r == lat.top || !lat.pairs[r].green.contains(s) {
                continue;
            }
            if !succ[r].iter().any(|w| lat.pairs[*w].red.contains(s)) {
                violations.push(SampleViolation { element: lat.pairs[r].id.clone(), sample: k, state: format!("{s:?}") });
            }
        }
    }
    Ok(SampledReport { label: "sampled, not a proof", samples: sample.len(), order: lat.order_clauses(), violations })
}

/// Replaces the element `at` by a sub-lattice: edges into `at` enter the
/// sub-lattice's bottom and edges out of `at` leave its top. Sub-lattice
/// ids are prefixed with `at/`.
pub fn splice<S: StateValue>(outer: &PairLattice<S>, at: &str, inner: &PairLattice<S>) -> Result<PairLattice<S>, CoreError> {
    let k = outer.index_of(at)?;
    let rename = |id: &str| format!("{at}/{id}");
    let mut pairs: Vec<ComplementedPair<S>> = outer.pairs.iter().filter(|p| p.id != at).cloned().collect();
    for p in &inner.pairs {
        let mut p = p.clone();
        p.id = rename(&p.id);
        pairs.push(p);
    }
    let (itop, ibot) = (rename(&inner.pairs[inner.top].id), rename(&inner.pairs[inner.bottom].id));
    let mut order = Vec::new();
    for (x, y) in outer.order() {
        let xi = outer.index_of(&x)?;
        let yi = outer.index_of(&y)?;
        let x2 = if xi == k { itop.clone() } else { x };
        let y2 = if yi == k { ibot.clone() } else { y };
        order.push((x2, y2));
    }
    for (x, y) in inner.order() {
        order.push((rename(&x), rename(&y)));
    }
    let top = if outer.top == k { itop.clone() } else { outer.pairs[outer.top].id.clone() };
    let bottom = if outer.bottom == k { ibot.clone() } else { outer.pairs[outer.bottom].id.clone() };
    PairLattice::new(pairs, &order, &top, &bottom)
}
