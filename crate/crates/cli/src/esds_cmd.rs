//! ESDS commands: runs, monitors, log-based simulation checks and sampled
//! lattice checks.

use std::io::Read;
use std::path::{Path, PathBuf};

use liveref_core::lattice::check_lattice_sampled;
use liveref_esds::checkers::{check_sim_f, check_sim_g, LogCheck, Mutation};
use liveref_esds::config::Config;
use liveref_esds::lattices::load_lattice_file;
use liveref_esds::log::{log_lines, parse_log, render_log, replay, Replayed, SystemKind};
use liveref_esds::monitor::{impl_family, m_family, monitor_pairs};
use liveref_esds::scheduler::run_fair_scheduler;
use serde_json::json;

use crate::{FMutation, Family, Global, Outcome, RunSystem};

fn read_log(path: Option<&Path>) -> anyhow::Result<Replayed> {
    let text = match path {
        Some(p) if p != Path::new("-") => std::fs::read_to_string(p).map_err(|e| anyhow::anyhow!("{}: {e}", p.display()))?,
        _ => {
            let mut s = String::new();
            std::io::stdin().read_to_string(&mut s)?;
            s
        }
    };
    Ok(replay(&parse_log(&text)?)?)
}

pub fn run(config: &Path, system: RunSystem, lossy: Option<usize>, g: &Global) -> anyhow::Result<Outcome> {
    let mut cfg = Config::load(config)?;
    if let Some(seed) = g.seed {
        cfg.run.seed = seed;
    }
    if let Some(steps) = g.bounds {
        cfg.run.steps = steps;
    }
    if lossy.is_some() {
        cfg.run.lossy = lossy;
    }
    let kind = match system {
        RunSystem::Alg => SystemKind::Alg,
        RunSystem::EsdsI => SystemKind::SpecI,
        RunSystem::EsdsII => SystemKind::SpecII,
    };
    let params = cfg.params()?;
    let sys = kind.build(&params, cfg.run.lossy);
    let out = run_fair_scheduler(&sys, &cfg.run)?;
    let lines = log_lines(&cfg, kind, &out);
    let prose = format!(
        "{} steps, {}; longest wait {} (age bound {}, {} classes at most)",
        out.exec.len(),
        if out.quiescent { "quiescent" } else { "step budget reached before quiescence" },
        out.audit.max_wait,
        out.audit.age_max,
        out.audit.max_classes,
    );
    Ok(Outcome { stdout: render_log(&lines), prose, code: if out.quiescent { 0 } else { 3 } })
}

pub fn monitor(log: Option<&Path>, family: Family) -> anyhow::Result<Outcome> {
    let r = read_log(log)?;
    let (name, pairs) = match family {
        Family::MI => ("M-I", m_family(&r.params)),
        Family::Impl => ("impl", impl_family(&r.params)),
    };
    let rep = monitor_pairs(&r.exec.states, name, &pairs);
    let outstanding: Vec<&str> = rep.outstanding().iter().map(|p| p.id.as_str()).collect();
    let prose = if outstanding.is_empty() {
        format!("{} pairs, none outstanding ({})", rep.pairs.len(), rep.label)
    } else {
        format!("outstanding: {} ({})", outstanding.join(", "), rep.label)
    };
    let code = if outstanding.is_empty() { 0 } else { 1 };
    Ok(Outcome::json(&serde_json::to_value(&rep)?, prose, code))
}

fn log_check(c: &LogCheck) -> anyhow::Result<Outcome> {
    let mut prose = format!("{}: {}/{} transitions validated", c.relation, c.validated, c.transitions);
    if let Some(cx) = &c.counterexample {
        prose.push_str(&format!("\nfailed {}: {}", cx.clause, cx.detail));
    }
    Ok(Outcome::json(&serde_json::to_value(c)?, prose, if c.passed() { 0 } else { 1 }))
}

pub fn check_f(log: Option<&Path>, mutation: Option<FMutation>) -> anyhow::Result<Outcome> {
    let r = read_log(log)?;
    anyhow::ensure!(r.header.system == SystemKind::Alg, "esds-check-f needs a log of the algorithm");
    let m = match mutation {
        None => Mutation::None,
        Some(FMutation::DropAddConstraints) => Mutation::DropAddConstraints,
    };
    log_check(&check_sim_f(&r.params, &r.exec, m))
}

pub fn check_g(log: Option<&Path>) -> anyhow::Result<Outcome> {
    let r = read_log(log)?;
    anyhow::ensure!(r.header.system == SystemKind::SpecII, "esds-check-g needs a log of ESDS-II");
    log_check(&check_sim_g(&r.params, &r.exec))
}

pub fn lattice_sampled(files: &[PathBuf], log: &Path, op: Option<&str>) -> anyhow::Result<Outcome> {
    let [lattice] = files else {
        anyhow::bail!("with --sample-log, lattice-check takes only the lattice file");
    };
    let r = read_log(Some(log))?;
    let ops: Vec<String> = match op {
        Some(x) => vec![x.to_string()],
        None => r.params.catalog.ids().into_iter().map(|x| x.to_string()).collect(),
    };
    let mut reports = Vec::new();
    let mut bad = Vec::new();
    for x in &ops {
        let lat = load_lattice_file(lattice, &r.params, x)?;
        let rep = check_lattice_sampled(&lat, &r.exec.states)?;
        if !rep.ok() {
            bad.push(x.clone());
        }
        reports.push(json!({ "op": x, "report": rep }));
    }
    let prose = if bad.is_empty() {
        format!("no violations over {} sampled states for {} operations (sampled, not a proof)", r.exec.states.len(), ops.len())
    } else {
        format!("violations for {}", bad.join(", "))
    };
    Ok(Outcome::json(&json!({ "lattices": reports }), prose, if bad.is_empty() { 0 } else { 1 }))
}
