//! Line-delimited JSON execution logs and their replay.

use std::io::Write;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::component::{Params, Variant};
use crate::config::Config;
use crate::error::EsdsError;
use crate::model::Action;
use crate::scheduler::{Audit, Execution, RunOutcome};
use crate::system::{esds_alg, esds_spec, SysState, System};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum SystemKind {
    #[serde(rename = "esds-alg")]
    Alg,
    #[serde(rename = "esds-i")]
    SpecI,
    #[serde(rename = "esds-ii")]
    SpecII,
}

impl SystemKind {
    pub fn build(self, params: &Arc<Params>, lossy: Option<usize>) -> System {
        match self {
            SystemKind::Alg => esds_alg(params, lossy),
            SystemKind::SpecI => esds_spec(params, Variant::I),
            SystemKind::SpecII => esds_spec(params, Variant::II),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Header {
    pub seed: u64,
    pub config: Config,
    pub system: SystemKind,
    pub steps: usize,
    pub quiescent: bool,
    pub audit: Audit,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Line {
    Header(Header),
    Event { index: usize, pre: String, action: Action, post: String },
    /// Full state after `index` events.
    Snapshot { index: usize, state: SysState },
}

pub fn digest(s: &SysState) -> String {
    let bytes = serde_json::to_vec(s).expect("states serialize");
    hex::encode(Sha256::digest(bytes))
}

/// Header, a snapshot of the first state, then events with a snapshot every
/// `config.run.snapshot_every` events and after the last one.
pub fn log_lines(config: &Config, system: SystemKind, out: &RunOutcome) -> Vec<Line> {
    let exec = &out.exec;
    let header = Header { seed: config.run.seed, config: config.clone(), system, steps: exec.len(), quiescent: out.quiescent, audit: out.audit.clone() };
    let digests: Vec<String> = exec.states.iter().map(digest).collect();
    let mut lines = vec![Line::Header(header), Line::Snapshot { index: 0, state: exec.states[0].clone() }];
    for (i, a) in exec.actions.iter().enumerate() {
        lines.push(Line::Event { index: i, pre: digests[i].clone(), action: a.clone(), post: digests[i + 1].clone() });
        if (i + 1) % config.run.snapshot_every == 0 || i + 1 == exec.len() {
            lines.push(Line::Snapshot { index: i + 1, state: exec.states[i + 1].clone() });
        }
    }
    lines
}

pub fn write_log(w: &mut impl Write, lines: &[Line]) -> Result<(), EsdsError> {
    for l in lines {
        serde_json::to_writer(&mut *w, l).map_err(|e| EsdsError::Malformed(e.to_string()))?;
        w.write_all(b"\n")?;
    }
    Ok(())
}

pub fn render_log(lines: &[Line]) -> String {
    let mut buf = Vec::new();
    write_log(&mut buf, lines).expect("writing to memory");
    String::from_utf8(buf).expect("JSON is UTF-8")
}

pub fn parse_log(text: &str) -> Result<Vec<Line>, EsdsError> {
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(n, l)| liveref_core::format::parse_json::<Line>(l).map_err(|e| EsdsError::Malformed(format!("line {}: {e}", n + 1))))
        .collect()
}

#[derive(Clone, Debug)]
pub struct Replayed {
    pub header: Header,
    pub params: Arc<Params>,
    pub system: System,
    pub exec: Execution,
}

/// Re-executes every event from the first snapshot, checking each
/// precondition and both digests, and every later snapshot.
pub fn replay(lines: &[Line]) -> Result<Replayed, EsdsError> {
    let Some(Line::Header(header)) = lines.first() else {
        return Err(EsdsError::Malformed("log does not start with a header".into()));
    };
    let params = header.config.params()?;
    let system = header.system.build(&params, header.config.run.lossy);
    let mut s = system.initial();
    let mut exec = Execution { states: vec![s.clone()], actions: Vec::new() };
    let mut seen_start = false;
    for line in &lines[1..] {
        match line {
            Line::Header(_) => return Err(EsdsError::Malformed("second header".into())),
            Line::Snapshot { index, state } => {
                if *index != exec.len() || *state != s {
                    return Err(EsdsError::Replay { index: *index, detail: "snapshot does not match the replayed state".into() });
                }
                seen_start |= *index == 0;
            }
            Line::Event { index, pre, action, post } => {
                let fail = |detail: String| EsdsError::Replay { index: *index, detail };
                if !seen_start {
                    return Err(fail("no snapshot of the first state".into()));
                }
                if *index != exec.len() {
                    return Err(fail(format!("expected event {}", exec.len())));
                }
                if *pre != digest(&s) {
                    return Err(fail("pre-state digest mismatch".into()));
                }
                s = system.step(&s, action).map_err(|e| fail(format!("{action} is not enabled: {e}")))?;
                if *post != digest(&s) {
                    return Err(fail("post-state digest mismatch".into()));
                }
                exec.actions.push(action.clone());
                exec.states.push(s.clone());
            }
        }
    }
    if exec.len() != header.steps {
        return Err(EsdsError::Malformed(format!("header announces {} steps, log has {}", header.steps, exec.len())));
    }
    Ok(Replayed { header: header.clone(), params, system, exec })
}
