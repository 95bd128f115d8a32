//! Operations on the replicated grow-only set and the `valset` function.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::error::EsdsError;

pub type OpId = String;
/// Elements visible to an operation.
pub type Value = BTreeSet<String>;
/// A binary relation on operation ids, `(before, after)`.
pub type Order = BTreeSet<(OpId, OpId)>;

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OpKind {
    Add(String),
    Read,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Operation {
    pub id: OpId,
    pub client: usize,
    #[serde(default)]
    pub prev: BTreeSet<OpId>,
    #[serde(default)]
    pub strict: bool,
    pub op: OpKind,
}

/// Every operation a run may request, by id.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Catalog {
    ops: BTreeMap<OpId, Operation>,
}

impl Catalog {
    pub fn new(ops: impl IntoIterator<Item = Operation>) -> Result<Self, EsdsError> {
        let mut map = BTreeMap::new();
        for op in ops {
            if map.contains_key(&op.id) {
                return Err(EsdsError::Config(format!("duplicate operation id {}", op.id)));
            }
            map.insert(op.id.clone(), op);
        }
        for op in map.values() {
            if let Some(p) = op.prev.iter().find(|p| !map.contains_key(*p) || *p == &op.id) {
                return Err(EsdsError::Config(format!("operation {} has bad prev entry {p}", op.id)));
            }
        }
        let cat = Catalog { ops: map };
        if !is_strict_order(&cat.csc(cat.ids())) {
            return Err(EsdsError::Config("prev constraints are cyclic".into()));
        }
        Ok(cat)
    }

    pub fn get(&self, id: &str) -> Option<&Operation> {
        self.ops.get(id)
    }

    pub fn op(&self, id: &str) -> &Operation {
        self.ops.get(id).unwrap_or_else(|| panic!("operation {id} is not in the catalog"))
    }

    pub fn ids(&self) -> impl Iterator<Item = &OpId> {
        self.ops.keys()
    }

    pub fn iter(&self) -> impl Iterator<Item = &Operation> {
        self.ops.values()
    }

    pub fn len(&self) -> usize {
        self.ops.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ops.is_empty()
    }

    pub fn client(&self, id: &str) -> usize {
        self.op(id).client
    }

    /// Client-specified constraints of `xs`: `(y, x)` for every `y ∈ x.prev`.
    pub fn csc<'a>(&self, xs: impl IntoIterator<Item = &'a OpId>) -> Order {
        let mut out = Order::new();
        for x in xs {
            for y in &self.op(x).prev {
                out.insert((y.clone(), x.clone()));
            }
        }
        out
    }
}

pub fn transitive_closure(order: &Order) -> Order {
    let mut succ: BTreeMap<&OpId, BTreeSet<&OpId>> = BTreeMap::new();
    for (a, b) in order {
        succ.entry(a).or_default().insert(b);
    }
    let mut out = Order::new();
    for start in succ.keys() {
        let mut stack: Vec<&OpId> = succ[start].iter().copied().collect();
        let mut seen = BTreeSet::new();
        while let Some(v) = stack.pop() {
            if seen.insert(v) {
                out.insert(((*start).clone(), v.clone()));
                if let Some(next) = succ.get(v) {
                    stack.extend(next.iter().copied());
                }
            }
        }
    }
    out
}

/// Irreflexive after closing transitively, so the relation is cycle-free.
pub fn is_strict_order(order: &Order) -> bool {
    transitive_closure(order).iter().all(|(a, b)| a != b)
}

/// Elements added by `ops`, plus the element of `x` itself when it adds one.
pub fn apply<'a>(cat: &Catalog, ops: impl IntoIterator<Item = &'a OpId>) -> Value {
    ops.into_iter()
        .filter_map(|y| match &cat.op(y).op {
            OpKind::Add(e) => Some(e.clone()),
            OpKind::Read => None,
        })
        .collect()
}

/// Values `x` may return given `ops` and `order`: one per down-closed `S`
/// with `{y ≺ x} ⊆ S ⊆ ops ∖ ({x} ∪ {y ≻ x})`, the value being the
/// elements of `S ∪ {x}`. More than `cap` candidate sets is an error.
pub fn valset(cat: &Catalog, x: &OpId, ops: &BTreeSet<OpId>, order: &Order, cap: usize) -> Result<BTreeSet<Value>, EsdsError> {
    if !ops.contains(x) {
        return Err(EsdsError::Valset(format!("{x} is not among the operations")));
    }
    let tc: Order = transitive_closure(order).into_iter().filter(|(a, b)| ops.contains(a) && ops.contains(b)).collect();
    let below = |y: &OpId| tc.contains(&(y.clone(), x.clone()));
    let above = |y: &OpId| tc.contains(&(x.clone(), y.clone()));
    let forced: BTreeSet<&OpId> = ops.iter().filter(|y| below(y)).collect();
    // Free operations in a linear extension of the order, so a predecessor
    // is always decided before its successors.
    let mut free: Vec<&OpId> = ops.iter().filter(|y| *y != x && !below(y) && !above(y)).collect();
    let rank = |y: &OpId| tc.iter().filter(|(_, b)| b == y).count();
    free.sort_by_key(|y| (rank(y), (*y).clone()));
    let preds: Vec<Vec<&OpId>> = free.iter().map(|y| ops.iter().filter(|z| tc.contains(&((*z).clone(), (*y).clone()))).collect()).collect();

    let mut values = BTreeSet::new();
    let mut count = 0usize;
    let mut chosen: BTreeSet<&OpId> = forced.clone();
    fn walk<'a>(
        i: usize,
        free: &[&'a OpId],
        preds: &[Vec<&'a OpId>],
        chosen: &mut BTreeSet<&'a OpId>,
        emit: &mut dyn FnMut(&BTreeSet<&'a OpId>) -> Result<(), EsdsError>,
    ) -> Result<(), EsdsError> {
        if i == free.len() {
            return emit(chosen);
        }
        walk(i + 1, free, preds, chosen, emit)?;
        if preds[i].iter().all(|z| chosen.contains(z)) {
            chosen.insert(free[i]);
            walk(i + 1, free, preds, chosen, emit)?;
            chosen.remove(free[i]);
        }
        Ok(())
    }
    let mut emit = |s: &BTreeSet<&OpId>| {
        count += 1;
        if count > cap {
            return Err(EsdsError::Valset(format!("more than {cap} candidate sets for {x}")));
        }
        values.insert(apply(cat, s.iter().copied().chain(std::iter::once(x))));
        Ok(())
    };
    // Forced predecessors are down-closed already: a predecessor of
    // something below x is below x.
    walk(0, &free, &preds, &mut chosen, &mut emit)?;
    Ok(values)
}
