use crate::execution::Lasso;
use crate::state_set::StateSet;

/// The □/◇ fragment over state sets.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Formula {
    Atom(StateSet),
    Not(Box<Formula>),
    And(Box<Formula>, Box<Formula>),
    Or(Box<Formula>, Box<Formula>),
    Implies(Box<Formula>, Box<Formula>),
    Always(Box<Formula>),
    Eventually(Box<Formula>),
}

impl Formula {
    pub fn atom(set: StateSet) -> Self {
        Formula::Atom(set)
    }

    pub fn not(f: Formula) -> Self {
        Formula::Not(Box::new(f))
    }

    pub fn and(f: Formula, g: Formula) -> Self {
        Formula::And(Box::new(f), Box::new(g))
    }

    pub fn or(f: Formula, g: Formula) -> Self {
        Formula::Or(Box::new(f), Box::new(g))
    }

    pub fn implies(f: Formula, g: Formula) -> Self {
        Formula::Implies(Box::new(f), Box::new(g))
    }

    pub fn always(f: Formula) -> Self {
        Formula::Always(Box::new(f))
    }

    pub fn eventually(f: Formula) -> Self {
        Formula::Eventually(Box::new(f))
    }

    /// □◇U
    pub fn infinitely_often(set: StateSet) -> Self {
        Formula::always(Formula::eventually(Formula::atom(set)))
    }

    /// ◇□U
    pub fn eventually_always(set: StateSet) -> Self {
        Formula::eventually(Formula::always(Formula::atom(set)))
    }
}

/// Truth of `f` at position 0 of the lasso's infinite state sequence.
pub fn eval_formula(l: &Lasso, f: &Formula) -> bool {
    eval_positions(l, f)[0]
}

// Positions 0..stem_len are stem states, stem_len..n are the cycle states;
// the successor of n-1 is stem_len.
fn eval_positions(l: &Lasso, f: &Formula) -> Vec<bool> {
    let k = l.stem_len();
    let n = k + l.cycle_len();
    let state = |i: usize| if i < k { l.stem.states[i] } else { l.cycle.states[i - k] };
    match f {
        Formula::Atom(set) => (0..n).map(|i| set.contains(state(i))).collect(),
        Formula::Not(g) => eval_positions(l, g).into_iter().map(|b| !b).collect(),
        Formula::And(a, b) => zip(l, a, b, |x, y| x && y),
        Formula::Or(a, b) => zip(l, a, b, |x, y| x || y),
        Formula::Implies(a, b) => zip(l, a, b, |x, y| !x || y),
        Formula::Always(g) => {
            let v = eval_positions(l, g);
            let on_cycle = v[k..].iter().all(|b| *b);
            let mut out = vec![on_cycle; n];
            let mut acc = on_cycle;
            for i in (0..k).rev() {
                acc = acc && v[i];
                out[i] = acc;
            }
            out
        }
        Formula::Eventually(g) => {
            let v = eval_positions(l, g);
            let on_cycle = v[k..].iter().any(|b| *b);
            let mut out = vec![on_cycle; n];
            let mut acc = on_cycle;
            for i in (0..k).rev() {
                acc = acc || v[i];
                out[i] = acc;
            }
            out
        }
    }
}

fn zip(l: &Lasso, a: &Formula, b: &Formula, op: impl Fn(bool, bool) -> bool) -> Vec<bool> {
    eval_positions(l, a).into_iter().zip(eval_positions(l, b)).map(|(x, y)| op(x, y)).collect()
}
