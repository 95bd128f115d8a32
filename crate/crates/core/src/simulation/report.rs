use serde::Serialize;

use crate::automaton::{Automaton, StateId, StateValue, Step};
use crate::execution::{plain_name, LassoReport};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Pass,
    Conditional,
    Unknown,
    Fail,
}

impl Verdict {
    pub fn exit_code(&self) -> i32 {
        match self {
            Verdict::Pass => 0,
            Verdict::Fail => 1,
            Verdict::Conditional => 2,
            Verdict::Unknown => 3,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ClauseResult {
    pub clause: String,
    pub ok: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

/// Ids behind a counterexample, for replaying the single-step check.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct StepRef {
    pub step: Option<Step>,
    pub concrete: Option<StateId>,
    pub abstract_state: Option<StateId>,
}

#[derive(Clone, Debug, Serialize)]
pub struct Counterexample {
    pub clause: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub step: Option<[String; 3]>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub concrete_state: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub abstract_state: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub pair: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lasso: Option<LassoReport>,
    pub detail: String,
    #[serde(skip)]
    pub ids: StepRef,
}

impl Counterexample {
    pub fn new(clause: &str, detail: impl Into<String>) -> Self {
        Counterexample {
            clause: clause.to_string(),
            step: None,
            concrete_state: None,
            abstract_state: None,
            pair: None,
            lasso: None,
            detail: detail.into(),
            ids: StepRef::default(),
        }
    }

    pub fn at_step<S: StateValue>(mut self, a: &Automaton<S>, st: Step) -> Self {
        self.step = Some([plain_name(a, st.from), a.action(st.action).text(), plain_name(a, st.to)]);
        self.ids.step = Some(st);
        self
    }

    pub fn at_concrete<S: StateValue>(mut self, a: &Automaton<S>, s: StateId) -> Self {
        self.concrete_state = Some(plain_name(a, s));
        self.ids.concrete = Some(s);
        self
    }

    pub fn at_abstract<T: StateValue>(mut self, b: &Automaton<T>, u: StateId) -> Self {
        self.abstract_state = Some(plain_name(b, u));
        self.ids.abstract_state = Some(u);
        self
    }

    pub fn with_pair(mut self, id: &str) -> Self {
        self.pair = Some(id.to_string());
        self
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct CheckReport {
    pub relation: String,
    pub verdict: Verdict,
    pub clauses: Vec<ClauseResult>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub counterexample: Option<Counterexample>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub obligations: Vec<String>,
    /// Fragment searches hit the length bound somewhere.
    pub bounded: bool,
    pub bound: usize,
}

impl CheckReport {
    pub fn new(relation: &str, bound: usize) -> Self {
        CheckReport {
            relation: relation.to_string(),
            verdict: Verdict::Pass,
            clauses: Vec::new(),
            counterexample: None,
            obligations: Vec::new(),
            bounded: false,
            bound,
        }
    }

    pub fn passed(&self) -> bool {
        self.verdict == Verdict::Pass
    }

    pub fn ok(&mut self, clause: &str) {
        self.clauses.push(ClauseResult { clause: clause.to_string(), ok: true, note: None });
    }

    pub fn ok_note(&mut self, clause: &str, note: impl Into<String>) {
        self.clauses.push(ClauseResult { clause: clause.to_string(), ok: true, note: Some(note.into()) });
    }

    /// Records a failed clause. A counterexample found only because the
    /// search bound was hit makes the verdict `unknown` rather than `fail`.
    pub fn fail(&mut self, cx: Counterexample, exhaustive: bool) {
        self.clauses.push(ClauseResult {
            clause: cx.clause.clone(),
            ok: false,
            note: if exhaustive { None } else { Some("no match within the search bound".into()) },
        });
        self.verdict = self.verdict.max(if exhaustive { Verdict::Fail } else { Verdict::Unknown });
        if self.counterexample.is_none() {
            self.counterexample = Some(cx);
        }
    }

    pub fn obligation(&mut self, text: String) {
        self.obligations.push(text);
        self.verdict = self.verdict.max(Verdict::Conditional);
    }

    /// Conjunction of several reports under one relation name.
    pub fn combine(relation: &str, parts: Vec<CheckReport>) -> CheckReport {
        let bound = parts.iter().map(|p| p.bound).max().unwrap_or(0);
        let mut out = CheckReport::new(relation, bound);
        for p in parts {
            out.verdict = out.verdict.max(p.verdict);
            out.bounded |= p.bounded;
            out.clauses.extend(p.clauses);
            out.obligations.extend(p.obligations);
            if out.counterexample.is_none() {
                out.counterexample = p.counterexample;
            }
        }
        out
    }

    pub fn failed_clause(&self) -> Option<&str> {
        self.counterexample.as_ref().map(|c| c.clause.as_str())
    }
}
