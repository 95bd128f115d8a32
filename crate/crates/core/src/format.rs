//! JSON file formats for pairs, candidates and lattices, and the registry
//! of named predicates they refer to.

use std::collections::BTreeMap;
use std::path::Path;
use std::sync::Arc;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::automaton::{Automaton, AutomatonDef, StateId, StateValue};
use crate::error::CoreError;
use crate::lattice::{splice, PairLattice};
use crate::liveness::pair::{ComplementedPair, IndexedPair, Predicate, Region};
use crate::simulation::relation::{Candidate, PairMap, StateRelation, TargetTag};
use crate::state_set::StateSet;

/// Parses JSON, naming the offending field on failure.
pub fn parse_json<T: DeserializeOwned>(text: &str) -> Result<T, CoreError> {
    let de = &mut serde_json::Deserializer::from_str(text);
    serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        CoreError::Malformed(format!("at `{path}`: {}", e.into_inner()))
    })
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T, CoreError> {
    let text = std::fs::read_to_string(path).map_err(|e| CoreError::Malformed(format!("{}: {e}", path.display())))?;
    parse_json(&text).map_err(|e| match e {
        CoreError::Malformed(m) => CoreError::Malformed(format!("{}: {m}", path.display())),
        other => other,
    })
}

pub fn load_automaton(path: &Path) -> Result<Automaton<String>, CoreError> {
    let def: AutomatonDef = read_json(path)?;
    def.build().map_err(CoreError::Invalid)
}

pub type RelationPredicate<S, T> = Arc<dyn Fn(&S, &T) -> bool + Send + Sync>;
type PredicateFamily<S> = Arc<dyn Fn(&[String]) -> Option<Predicate<S>> + Send + Sync>;

/// Named state predicates, optionally parameterized as `name(arg, ...)`.
pub struct Registry<S> {
    preds: BTreeMap<String, Predicate<S>>,
    families: BTreeMap<String, PredicateFamily<S>>,
    relations: BTreeMap<String, RelationPredicate<S, S>>,
}

impl<S: StateValue> Default for Registry<S> {
    fn default() -> Self {
        Registry { preds: BTreeMap::new(), families: BTreeMap::new(), relations: BTreeMap::new() }
    }
}

impl<S: StateValue> Registry<S> {
    pub fn new() -> Self {
        Registry::default()
    }

    pub fn predicate(&mut self, name: &str, f: impl Fn(&S) -> bool + Send + Sync + 'static) {
        self.preds.insert(name.to_string(), Arc::new(f));
    }

    /// `name(args)` resolves through `make(args)`.
    pub fn family(&mut self, name: &str, make: impl Fn(&[String]) -> Option<Predicate<S>> + Send + Sync + 'static) {
        self.families.insert(name.to_string(), Arc::new(make));
    }

    pub fn relation(&mut self, name: &str, f: impl Fn(&S, &S) -> bool + Send + Sync + 'static) {
        self.relations.insert(name.to_string(), Arc::new(f));
    }

    pub fn names(&self) -> Vec<String> {
        self.preds.keys().chain(self.families.keys()).chain(self.relations.keys()).cloned().collect()
    }

    pub fn resolve(&self, name: &str) -> Result<Region<S>, CoreError> {
        match name {
            "true" => return Ok(Region::All),
            "false" => return Ok(Region::Empty),
            _ => {}
        }
        if let Some(p) = self.preds.get(name) {
            return Ok(Region::Pred { name: name.to_string(), test: p.clone() });
        }
        if let Some((base, args)) = split_call(name) {
            if let Some(f) = self.families.get(base) {
                if let Some(p) = f(&args) {
                    return Ok(Region::Pred { name: name.to_string(), test: p });
                }
            }
        }
        Err(CoreError::UnknownPredicate(name.to_string()))
    }

    pub fn resolve_relation(&self, name: &str) -> Result<RelationPredicate<S, S>, CoreError> {
        self.relations.get(name).cloned().ok_or_else(|| CoreError::UnknownPredicate(name.to_string()))
    }
}

/// `f(a, b)` into `("f", ["a", "b"])`.
pub fn split_call(text: &str) -> Option<(&str, Vec<String>)> {
    let open = text.find('(')?;
    let inner = text[open + 1..].strip_suffix(')')?;
    let args = if inner.trim().is_empty() { Vec::new() } else { inner.split(',').map(|s| s.trim().to_string()).collect() };
    Some((&text[..open], args))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum RegionDef {
    States(Vec<String>),
    Pred { pred: String },
}

impl RegionDef {
    pub fn resolve(&self, a: &Automaton<String>, reg: &Registry<String>) -> Result<Region<String>, CoreError> {
        match self {
            RegionDef::States(v) => {
                for s in v {
                    a.state_by_name(s).ok_or_else(|| CoreError::UnknownState(s.clone()))?;
                }
                Ok(Region::states(v.iter().cloned()))
            }
            RegionDef::Pred { pred } => reg.resolve(pred),
        }
    }

    /// Predicates only; explicit state lists need an automaton.
    pub fn resolve_pred<S: StateValue>(&self, reg: &Registry<S>) -> Result<Region<S>, CoreError> {
        match self {
            RegionDef::Pred { pred } => reg.resolve(pred),
            RegionDef::States(_) => Err(CoreError::Malformed("explicit state lists need an explicit automaton".into())),
        }
    }

    pub fn index(&self, a: &Automaton<String>, reg: &Registry<String>) -> Result<StateSet, CoreError> {
        Ok(self.resolve(a, reg)?.index(a))
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PairDef {
    pub id: String,
    pub red: RegionDef,
    pub green: RegionDef,
}

impl PairDef {
    pub fn resolve(&self, a: &Automaton<String>, reg: &Registry<String>) -> Result<ComplementedPair<String>, CoreError> {
        Ok(ComplementedPair::new(&self.id, self.red.resolve(a, reg)?, self.green.resolve(a, reg)?))
    }

    pub fn resolve_pred<S: StateValue>(&self, reg: &Registry<S>) -> Result<ComplementedPair<S>, CoreError> {
        Ok(ComplementedPair::new(&self.id, self.red.resolve_pred(reg)?, self.green.resolve_pred(reg)?))
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PairsFile {
    pub pairs: Vec<PairDef>,
}

impl PairsFile {
    pub fn index(&self, a: &Automaton<String>, reg: &Registry<String>) -> Result<Vec<IndexedPair>, CoreError> {
        self.pairs.iter().map(|p| Ok(p.resolve(a, reg)?.index(a))).collect()
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum RelationDef {
    Rows(Vec<[String; 2]>),
    Pred { pred: String },
}

fn default_tag() -> TargetTag {
    TargetTag::ClaimedDerived
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum TargetDef {
    /// A pair of L, by id.
    Id(String),
    Pair {
        #[serde(default)]
        id: Option<String>,
        red: RegionDef,
        green: RegionDef,
        #[serde(default = "default_tag")]
        tag: TargetTag,
    },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CandidateDef {
    pub g: RelationDef,
    #[serde(default)]
    pub h: BTreeMap<String, TargetDef>,
    #[serde(default)]
    pub inv_a: Option<RegionDef>,
    #[serde(default)]
    pub inv_b: Option<RegionDef>,
    #[serde(default)]
    pub bound: Option<usize>,
}

impl CandidateDef {
    pub fn resolve(
        &self,
        a: &Automaton<String>,
        l: &[IndexedPair],
        b: &Automaton<String>,
        reg: &Registry<String>,
    ) -> Result<Candidate, CoreError> {
        let g = match &self.g {
            RelationDef::Rows(rows) => {
                let mut pairs = Vec::new();
                for [s, u] in rows {
                    let s = a.state_by_name(s).ok_or_else(|| CoreError::UnknownState(s.clone()))?;
                    let u = b.state_by_name(u).ok_or_else(|| CoreError::UnknownState(u.clone()))?;
                    pairs.push((s, u));
                }
                StateRelation::from_pairs(a.num_states(), b.num_states(), pairs)
            }
            RelationDef::Pred { pred } => {
                let f = reg.resolve_relation(pred)?;
                StateRelation::from_fn(a, b, |s, u| f(s, u))
            }
        };
        let mut h = PairMap::new();
        for (q, t) in &self.h {
            match t {
                TargetDef::Id(id) => {
                    let p = l.iter().find(|p| &p.id == id).ok_or_else(|| CoreError::UnknownPair(id.clone()))?;
                    h.insert(q, p.clone(), TargetTag::InL);
                }
                TargetDef::Pair { id, red, green, tag } => {
                    let id = id.clone().unwrap_or_else(|| format!("h({q})"));
                    let pair = IndexedPair::new(&id, red.index(a, reg)?, green.index(a, reg)?);
                    h.insert(q, pair, *tag);
                }
            }
        }
        let inv_a = self.inv_a.as_ref().map(|r| r.index(a, reg)).transpose()?;
        let inv_b = self.inv_b.as_ref().map(|r| r.index(b, reg)).transpose()?;
        Ok(Candidate { g, h, inv_a, inv_b, bound: self.bound })
    }

    /// Writes a candidate over named automata back into file form.
    pub fn from_candidate(c: &Candidate, a: &Automaton<String>, b: &Automaton<String>) -> Self {
        let names = |x: &Automaton<String>, set: &StateSet| RegionDef::States(set.iter().map(|s| x.name(s).to_string()).collect());
        let h = c
            .h
            .targets
            .iter()
            .map(|(q, t)| {
                let def = TargetDef::Pair {
                    id: Some(t.pair.id.clone()),
                    red: names(a, &t.pair.red),
                    green: names(a, &t.pair.green),
                    tag: t.tag,
                };
                (q.clone(), def)
            })
            .collect();
        CandidateDef {
            g: RelationDef::Rows(c.g.rows().map(|(s, u)| [a.name(s).to_string(), b.name(u).to_string()]).collect()),
            h,
            inv_a: c.inv_a.as_ref().map(|s| names(a, s)),
            inv_b: c.inv_b.as_ref().map(|s| names(b, s)),
            bound: c.bound,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IncludeDef {
    /// Element of `order` replaced by the included lattice.
    pub element: String,
    pub file: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LatticeDef {
    pub pairs: Vec<PairDef>,
    pub order: Vec<[String; 2]>,
    pub top: String,
    pub bottom: String,
    #[serde(default)]
    pub includes: Vec<IncludeDef>,
}

/// Loads a lattice, expanding includes recursively up to `depth` levels.
/// `resolve` turns each pair definition into a pair over the target states.
pub fn load_lattice<S: StateValue>(
    path: &Path,
    depth: usize,
    resolve: &dyn Fn(&PairDef) -> Result<ComplementedPair<S>, CoreError>,
) -> Result<PairLattice<S>, CoreError> {
    let def: LatticeDef = read_json(path)?;
    let base = path.parent().unwrap_or(Path::new("."));
    lattice_from_def(&def, base, depth, resolve)
}

pub fn lattice_from_def<S: StateValue>(
    def: &LatticeDef,
    base: &Path,
    depth: usize,
    resolve: &dyn Fn(&PairDef) -> Result<ComplementedPair<S>, CoreError>,
) -> Result<PairLattice<S>, CoreError> {
    let mut pairs = def.pairs.iter().map(resolve).collect::<Result<Vec<_>, _>>()?;
    for inc in &def.includes {
        pairs.push(ComplementedPair::new(&inc.element, Region::Empty, Region::Empty));
    }
    let order: Vec<(String, String)> = def.order.iter().map(|[x, y]| (x.clone(), y.clone())).collect();
    let mut lat = PairLattice::new(pairs, &order, &def.top, &def.bottom)?;
    for inc in &def.includes {
        if depth == 0 {
            return Err(CoreError::Lattice(format!("include depth exhausted at {}", inc.element)));
        }
        let inner = load_lattice(&base.join(&inc.file), depth - 1, resolve)?;
        lat = splice(&lat, &inc.element, &inner)?;
    }
    Ok(lat)
}

/// A report of a lasso over named states, or of pairs, for CLI output.
pub fn state_names(a: &Automaton<String>, set: &StateSet) -> Vec<String> {
    set.iter().map(|s: StateId| a.name(s).to_string()).collect()
}
