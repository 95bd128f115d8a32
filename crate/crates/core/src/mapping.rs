//! Index mappings between two lassos, presented eventually periodically.

use serde::{Deserialize, Serialize};

use crate::automaton::{ActionLabel, Automaton, AutomatonBuilder, StateId, StateValue};
use crate::error::CoreError;
use crate::execution::Lasso;
use crate::liveness::pair::IndexedPair;
use crate::state_set::StateSet;
use crate::streett::{bfs_path, sccs};

/// `m(i) = table[i]` for `i <= prefix_len + period`, and
/// `m(i + period) = m(i) + increment` for `i >= prefix_len`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct IndexMapping {
    pub table: Vec<usize>,
    pub prefix_len: usize,
    pub period: usize,
    pub increment: usize,
}

impl IndexMapping {
    pub fn identity(l: &Lasso) -> Self {
        let n = l.stem_len() + l.cycle_len();
        IndexMapping { table: (0..=n).collect(), prefix_len: l.stem_len(), period: l.cycle_len(), increment: l.cycle_len() }
    }

    pub fn at(&self, i: usize) -> usize {
        if i < self.table.len() {
            return self.table[i];
        }
        let k = (i - self.prefix_len) / self.period;
        let r = (i - self.prefix_len) % self.period;
        self.table[self.prefix_len + r] + k * self.increment
    }

    /// The presentation must be consistent with `alpha`'s lasso shape.
    pub fn check_presentation(&self, alpha: &Lasso) -> Result<(), CoreError> {
        let bad = |m: &str| Err(CoreError::Presentation(m.to_string()));
        if self.period == 0 {
            return bad("period must be at least 1");
        }
        if self.table.len() != self.prefix_len + self.period + 1 {
            return bad("table must cover prefix plus one period");
        }
        if self.prefix_len < alpha.stem_len() || self.period % alpha.cycle_len() != 0 {
            return bad("presentation is not aligned with the lasso");
        }
        if self.table.windows(2).any(|w| w[0] > w[1]) {
            return bad("mapping must be nondecreasing");
        }
        if self.table[self.prefix_len + self.period] != self.table[self.prefix_len] + self.increment {
            return bad("increment disagrees with the table");
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum MappingClause {
    #[serde(rename = "clause 1")]
    Start,
    #[serde(rename = "clause 2")]
    Relation,
    #[serde(rename = "clause 3")]
    Trace,
    #[serde(rename = "clause 4")]
    Cofinal,
    #[serde(rename = "clause 5a")]
    Red,
    #[serde(rename = "clause 5b")]
    Green,
}

impl MappingClause {
    pub fn name(&self) -> &'static str {
        match self {
            MappingClause::Start => "clause 1",
            MappingClause::Relation => "clause 2",
            MappingClause::Trace => "clause 3",
            MappingClause::Cofinal => "clause 4",
            MappingClause::Red => "clause 5a",
            MappingClause::Green => "clause 5b",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct MappingViolation {
    pub clause: MappingClause,
    pub position: usize,
    pub pair: Option<String>,
}

/// Pairs for the live clauses: `(q over B, h(q) over A)`.
pub type PairLink<'a> = (&'a IndexedPair, &'a IndexedPair);

/// Plain index-mapping clauses 1–4.
pub fn check_index_mapping<S: StateValue, T: StateValue>(
    a: &Automaton<S>,
    alpha: &Lasso,
    b: &Automaton<T>,
    beta: &Lasso,
    rel: &dyn Fn(StateId, StateId) -> bool,
    m: &IndexMapping,
) -> Result<Result<(), MappingViolation>, CoreError> {
    check_live_index_mapping(a, alpha, b, beta, rel, &[], m)
}

/// Clauses 1–4 plus 5a/5b for every linked pair.
pub fn check_live_index_mapping<S: StateValue, T: StateValue>(
    a: &Automaton<S>,
    alpha: &Lasso,
    b: &Automaton<T>,
    beta: &Lasso,
    rel: &dyn Fn(StateId, StateId) -> bool,
    pairs: &[PairLink<'_>],
    m: &IndexMapping,
) -> Result<Result<(), MappingViolation>, CoreError> {
    m.check_presentation(alpha)?;
    let fail = |clause, position, pair: Option<&str>| Ok(Err(MappingViolation { clause, position, pair: pair.map(str::to_string) }));
    if m.at(0) != 0 {
        return fail(MappingClause::Start, 0, None);
    }
    // Beyond `horizon` every check repeats: alpha is periodic with `period`,
    // and beta's positions have entered its cycle and shift by a multiple of
    // the cycle length every `k` periods.
    let horizon = if m.increment == 0 {
        m.prefix_len + m.period
    } else {
        let c = beta.cycle_len();
        let k = c / gcd(m.increment, c);
        let base = m.at(m.prefix_len);
        let t = if base >= beta.stem_len() { 0 } else { (beta.stem_len() - base).div_ceil(m.increment) };
        m.prefix_len + m.period * (t + k)
    };
    if !rel(alpha.state_at(0), beta.state_at(0)) {
        return fail(MappingClause::Relation, 0, None);
    }
    for i in 1..=horizon {
        let (lo, hi) = (m.at(i - 1), m.at(i));
        if !rel(alpha.state_at(i), beta.state_at(hi)) {
            return fail(MappingClause::Relation, i, None);
        }
        let seg: Vec<&ActionLabel> =
            (lo + 1..=hi).map(|j| b.action(beta.action_at(j))).filter(|x| x.is_external()).collect();
        let own = a.action(alpha.action_at(i));
        let expected: Vec<&ActionLabel> = if own.is_external() { vec![own] } else { Vec::new() };
        if seg != expected {
            return fail(MappingClause::Trace, i, None);
        }
        let (s0, s1) = (alpha.state_at(i - 1), alpha.state_at(i));
        for (q, p) in pairs {
            let meets = |set: &StateSet| (lo..=hi).any(|j| set.contains(beta.state_at(j)));
            if meets(&q.red) && !(p.red.contains(s0) || p.red.contains(s1)) {
                return fail(MappingClause::Red, i, Some(&q.id));
            }
            if (p.green.contains(s0) || p.green.contains(s1)) && !meets(&q.green) {
                return fail(MappingClause::Green, i, Some(&q.id));
            }
        }
    }
    if m.increment == 0 {
        return fail(MappingClause::Cofinal, horizon, None);
    }
    Ok(Ok(()))
}

fn gcd(a: usize, b: usize) -> usize {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum MappingSearch {
    Found(IndexMapping),
    NoneExists,
    Unknown,
}

/// Searches the product of position classes of `alpha` and `beta` for an
/// eventually periodic index mapping; `bound` caps the product size.
pub fn find_index_mapping<S: StateValue, T: StateValue>(
    a: &Automaton<S>,
    alpha: &Lasso,
    b: &Automaton<T>,
    beta: &Lasso,
    rel: &dyn Fn(StateId, StateId) -> bool,
    bound: usize,
) -> MappingSearch {
    if !rel(alpha.state_at(0), beta.state_at(0)) {
        return MappingSearch::NoneExists;
    }
    // A segment matching one letter contains at most one full cycle of beta
    // unless that cycle is silent, so this length suffices.
    let max_seg = beta.stem_len() + 2 * beta.cycle_len();
    type Node = (usize, usize);
    let mut builder: AutomatonBuilder<Node> = AutomatonBuilder::new();
    let mut seen = std::collections::HashSet::new();
    let mut queue = std::collections::VecDeque::new();
    let mut weights = std::collections::BTreeSet::new();
    let mut edges = Vec::new();
    seen.insert((0, 0));
    builder.push_state((0, 0));
    builder.push_start((0, 0));
    queue.push_back((0usize, 0usize));
    while let Some((p, q)) = queue.pop_front() {
        if seen.len() > bound {
            return MappingSearch::Unknown;
        }
        let own = a.action(alpha.action_at(p + 1));
        let p2 = alpha.class_of(p + 1);
        let mut externals = 0;
        for len in 0..=max_seg {
            if len > 0 {
                let x = b.action(beta.action_at(q + len));
                if x.is_external() {
                    externals += 1;
                    if !own.is_external() || x != own || externals > 1 {
                        break;
                    }
                }
            }
            let matched = if own.is_external() { externals == 1 } else { externals == 0 };
            if !matched || !rel(alpha.state_at(p + 1), beta.state_at(q + len)) {
                continue;
            }
            let target = (p2, beta.class_of(q + len));
            if seen.insert(target) {
                builder.push_state(target);
                queue.push_back(target);
            }
            weights.insert(len);
            edges.push(((p, q), len, target));
        }
    }
    for w in &weights {
        builder.push_internal(&format!("w{w}"));
    }
    for (from, w, to) in &edges {
        builder.push_step(*from, &format!("w{w}"), *to);
    }
    let prod = builder.build().expect("position product is well-formed");
    let weight = |step: usize| -> usize { prod.action(prod.steps()[step].action).name[1..].parse().expect("weight label") };
    let reach = prod.reachable();
    for comp in sccs(&prod, &reach, &|_| true) {
        let set = StateSet::from_ids(prod.num_states(), comp.iter().copied());
        let best = comp
            .iter()
            .flat_map(|v| prod.out_steps(*v).iter().copied())
            .filter(|i| set.contains(prod.steps()[*i].to) && weight(*i) > 0)
            .min_by_key(|i| (weight(*i), *i));
        let Some(edge) = best else { continue };
        let st = prod.steps()[edge];
        let stem = bfs_path(&prod, prod.start(), None, &|_| true, &|v| v == st.from).expect("reachable");
        let back = bfs_path(&prod, &[st.to], Some(&set), &|_| true, &|v| v == st.from).expect("strongly connected");
        let mut table = vec![0];
        let mut acc = 0;
        for x in stem.actions.iter().chain(std::iter::once(&st.action)).chain(back.actions.iter()) {
            acc += prod.action(*x).name[1..].parse::<usize>().expect("weight label");
            table.push(acc);
        }
        let prefix_len = stem.len();
        let period = 1 + back.len();
        let increment = table[prefix_len + period] - table[prefix_len];
        return MappingSearch::Found(IndexMapping { table, prefix_len, period, increment });
    }
    MappingSearch::NoneExists
}
