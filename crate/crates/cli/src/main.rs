use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

mod esds_cmd;
mod explicit;

/// Exit code for input that does not parse or does not fit its schema.
const EXIT_MALFORMED: u8 = 64;

#[derive(Parser)]
#[command(name = "liveref", version, about = "Refinement and liveness checks for explicit automata, plus the ESDS case study")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    global: Global,
}

#[derive(Args, Clone, Debug, Default)]
pub struct Global {
    /// Overrides the command's default bound (search length, lasso size,
    /// exploration budget, run length).
    #[arg(long, global = true)]
    pub bounds: Option<usize>,
    /// Seed for anything randomized.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Machine mode: the JSON report only, no prose on stderr.
    #[arg(long, global = true)]
    pub json: bool,
}

#[derive(Args, Clone, Debug)]
pub struct Pairs {
    /// Pairs file for the (first) automaton.
    #[arg(long = "l", alias = "pairs")]
    pub l: Option<PathBuf>,
    /// Pairs file for the abstract automaton.
    #[arg(long = "m")]
    pub m: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum SimVariant {
    Fwd,
    Refinement,
    Bwd,
    History,
    Prophecy,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum Direction {
    Fwd,
    Bwd,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum InclusionKind {
    Safe,
    Live,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum RunSystem {
    Alg,
    EsdsI,
    EsdsII,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum Family {
    #[value(name = "M-I")]
    MI,
    #[value(name = "impl")]
    Impl,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum FMutation {
    DropAddConstraints,
}

#[derive(Subcommand)]
enum Command {
    /// Well-formedness of an automaton file.
    Validate { automaton: PathBuf },
    /// Reachable states, breadth first.
    Reachable { automaton: PathBuf },
    /// Is there a live execution? Prints a witness lasso if so.
    Emptiness {
        automaton: PathBuf,
        #[command(flatten)]
        pairs: Pairs,
    },
    /// Live lassos with stem and cycle up to --bounds (default 3).
    Lassos {
        automaton: PathBuf,
        #[command(flatten)]
        pairs: Pairs,
    },
    /// Does every reachable state have a live continuation?
    MachineClosure {
        automaton: PathBuf,
        #[command(flatten)]
        pairs: Pairs,
    },
    /// Semantic-closure membership of each pair in QUERY.
    ClosureMember {
        automaton: PathBuf,
        query: PathBuf,
        #[command(flatten)]
        pairs: Pairs,
    },
    /// Structural lattice check, or a sampled check over an ESDS log.
    LatticeCheck {
        /// `AUTOMATON LATTICE`, or just `LATTICE` with --sample-log.
        #[arg(num_args = 1..=2, required = true)]
        files: Vec<PathBuf>,
        /// ESDS execution log whose states are the sample.
        #[arg(long)]
        sample_log: Option<PathBuf>,
        /// ESDS operation the lattice is instantiated for (default: all).
        #[arg(long)]
        op: Option<String>,
    },
    /// Full lattice certification; prints the derived pair.
    LatticeCertify {
        automaton: PathBuf,
        lattice: PathBuf,
        #[command(flatten)]
        pairs: Pairs,
    },
    /// Safety simulation check.
    CheckSim {
        variant: SimVariant,
        concrete: PathBuf,
        abstract_: PathBuf,
        candidate: PathBuf,
        #[command(flatten)]
        pairs: Pairs,
    },
    /// Liveness-preserving simulation check.
    CheckLiveSim {
        variant: SimVariant,
        concrete: PathBuf,
        abstract_: PathBuf,
        candidate: PathBuf,
        #[command(flatten)]
        pairs: Pairs,
    },
    /// Abstract lassos and index mappings for concrete live lassos.
    Correspondence {
        direction: Direction,
        concrete: PathBuf,
        abstract_: PathBuf,
        candidate: PathBuf,
        #[command(flatten)]
        pairs: Pairs,
        /// A single concrete lasso (as printed by `lassos`) instead of all
        /// lassos within --bounds.
        #[arg(long)]
        lasso: Option<PathBuf>,
        /// Re-validate correspondences previously printed by this command.
        #[arg(long)]
        check: Option<PathBuf>,
    },
    /// Safe or live trace inclusion.
    TraceInclusion {
        kind: InclusionKind,
        concrete: PathBuf,
        abstract_: PathBuf,
        #[command(flatten)]
        pairs: Pairs,
    },
    /// Fair run of an ESDS system; the log goes to stdout.
    EsdsRun {
        config: PathBuf,
        #[arg(long, value_enum, default_value = "alg")]
        system: RunSystem,
        /// Client whose front end may drop requests.
        #[arg(long)]
        lossy: Option<usize>,
    },
    /// Pair monitors over a logged run (stdin when LOG is absent or `-`).
    EsdsMonitor {
        log: Option<PathBuf>,
        #[arg(long, value_enum, default_value = "M-I")]
        family: Family,
    },
    /// Algorithm-to-ESDS-II simulation over a logged run.
    EsdsCheckF {
        log: Option<PathBuf>,
        #[arg(long, value_enum)]
        mutation: Option<FMutation>,
    },
    /// ESDS-II-to-ESDS-I simulation over a logged run.
    EsdsCheckG { log: Option<PathBuf> },
    /// Adds the leads-to history flag; prints the automaton and its pair.
    Leadsto {
        automaton: PathBuf,
        /// Comma-separated state names, or `pred:NAME`.
        #[arg(long)]
        p: String,
        #[arg(long)]
        q: String,
    },
    /// Unfolds executions up to --bounds (default 3) steps into a forest.
    Forestify { automaton: PathBuf },
}

/// What a command produced: the stdout text, prose for stderr, exit code.
pub struct Outcome {
    pub stdout: String,
    pub prose: String,
    pub code: u8,
}

impl Outcome {
    pub fn json(value: &serde_json::Value, prose: impl Into<String>, code: u8) -> Self {
        let mut stdout = serde_json::to_string_pretty(value).expect("reports serialize");
        stdout.push('\n');
        Outcome { stdout, prose: prose.into(), code }
    }
}

fn dispatch(cmd: Command, g: &Global) -> anyhow::Result<Outcome> {
    use Command::*;
    match cmd {
        Validate { automaton } => explicit::validate(&automaton),
        Reachable { automaton } => explicit::reachable(&automaton, g),
        Emptiness { automaton, pairs } => explicit::emptiness(&automaton, &pairs),
        Lassos { automaton, pairs } => explicit::lassos(&automaton, &pairs, g),
        MachineClosure { automaton, pairs } => explicit::machine_closure(&automaton, &pairs),
        ClosureMember { automaton, query, pairs } => explicit::closure_member(&automaton, &query, &pairs),
        LatticeCheck { files, sample_log, op } => match sample_log {
            Some(log) => esds_cmd::lattice_sampled(&files, &log, op.as_deref()),
            None => explicit::lattice_check(&files),
        },
        LatticeCertify { automaton, lattice, pairs } => explicit::lattice_certify(&automaton, &lattice, &pairs),
        CheckSim { variant, concrete, abstract_, candidate, pairs } => {
            explicit::check_sim(variant, false, [&concrete, &abstract_, &candidate], &pairs, g)
        }
        CheckLiveSim { variant, concrete, abstract_, candidate, pairs } => {
            explicit::check_sim(variant, true, [&concrete, &abstract_, &candidate], &pairs, g)
        }
        Correspondence { direction, concrete, abstract_, candidate, pairs, lasso, check } => explicit::correspondence(
            direction,
            [&concrete, &abstract_, &candidate],
            &pairs,
            lasso.as_deref(),
            check.as_deref(),
            g,
        ),
        TraceInclusion { kind, concrete, abstract_, pairs } => explicit::trace_inclusion(kind, &concrete, &abstract_, &pairs, g),
        EsdsRun { config, system, lossy } => esds_cmd::run(&config, system, lossy, g),
        EsdsMonitor { log, family } => esds_cmd::monitor(log.as_deref(), family),
        EsdsCheckF { log, mutation } => esds_cmd::check_f(log.as_deref(), mutation),
        EsdsCheckG { log } => esds_cmd::check_g(log.as_deref()),
        Leadsto { automaton, p, q } => explicit::leadsto(&automaton, &p, &q),
        Forestify { automaton } => explicit::forestify(&automaton, g),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(EXIT_MALFORMED) } else { ExitCode::SUCCESS };
        }
    };
    match dispatch(cli.command, &cli.global) {
        Ok(out) => {
            print!("{}", out.stdout);
            if !cli.global.json && !out.prose.is_empty() {
                eprintln!("{}", out.prose.trim_end());
            }
            ExitCode::from(out.code)
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(EXIT_MALFORMED)
        }
    }
}
