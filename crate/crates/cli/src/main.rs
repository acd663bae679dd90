//! `dualmc`: state reachability for programs running under TSO.
//!
//! Exit codes: 0 safe, 1 target reachable, 2 usage or input error,
//! 3 resource limit.

mod report;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use thiserror::Error;

use dualmc_core::backward::{
    backward_reach_with, concretize_chain, BackwardOptions, EngineError, Verdict, WitnessError,
};
use dualmc_core::explore::{BoundedSearch, BoundedVerdict, ExploreError};
use dualmc_core::param::{concretize_param_chain, param_backward_reach_with};
use dualmc_core::program::{parse_program, ConcurrentProgram, ParamProgram, ParseError, Program};
use dualmc_core::runfile::{
    dtso_action_line, format_dtso_run, format_tso_run, parse_dtso_run, parse_tso_run, run_header, tso_action_line,
    RunFileError,
};
use dualmc_core::translate::{dtso_to_tso, tso_to_dtso, TranslateError};
use dualmc_core::{dtso, tso};

use report::{emit_report, Format, Report, VerdictLabel};

#[derive(Parser)]
#[command(
    name = "dualmc",
    version,
    about = "Reachability checking for programs running under TSO"
)]
struct Cli {
    #[command(subcommand)]
    mode: Mode,
}

#[derive(Subcommand)]
enum Mode {
    /// Decide whether a fixed-size program reaches its target.
    Check(Common),
    /// Decide whether any number of template copies reach the target.
    Param(Common),
    /// Bounded breadth-first search under TSO.
    ExploreTso(Explore),
    /// Bounded breadth-first search under Dual TSO.
    ExploreDtso(Explore),
    /// Translate a complete run into the other semantics.
    Translate(Translate),
}

#[derive(Args)]
struct Common {
    /// Program file.
    file: PathBuf,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    format: Format,
    /// Give up after generating this many configurations.
    #[arg(long, value_name = "N")]
    max_nodes: Option<u64>,
    /// Print a witness run when the target is reachable.
    #[arg(long)]
    witness: bool,
}

#[derive(Args)]
struct Explore {
    #[command(flatten)]
    common: Common,
    /// Maximum number of messages per buffer.
    #[arg(long, value_name = "K", default_value_t = 2)]
    buffer_bound: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Semantics {
    Tso,
    Dtso,
}

#[derive(Args)]
struct Translate {
    /// Run file whose header names the program.
    file: PathBuf,
    /// Semantics of the input run.
    #[arg(long, value_enum)]
    from: Semantics,
}

#[derive(Debug, Error)]
enum CliError {
    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{}: {source}", path.display())]
    Parse { path: PathBuf, source: ParseError },
    #[error("{}: {message}", path.display())]
    WrongKind { path: PathBuf, message: &'static str },
    #[error("{}: {source}", path.display())]
    RunFile { path: PathBuf, source: RunFileError },
    #[error("{}: input run does not replay: {source}", path.display())]
    Replay {
        path: PathBuf,
        source: dualmc_core::run::ReplayError,
    },
    #[error(transparent)]
    Translate(#[from] TranslateError),
    #[error("witness construction failed: {0}")]
    Witness(#[from] WitnessError),
    #[error("{0}")]
    Engine(#[from] EngineError),
    #[error("{0}")]
    Explore(#[from] ExploreError),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Engine(_) | CliError::Explore(_) => 3,
            _ => 2,
        }
    }
}

fn read(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.to_owned(),
        source,
    })
}

fn load(path: &Path) -> Result<Program, CliError> {
    parse_program(&read(path)?).map_err(|source| CliError::Parse {
        path: path.to_owned(),
        source,
    })
}

fn load_fixed(path: &Path) -> Result<ConcurrentProgram, CliError> {
    match load(path)? {
        Program::Fixed(p) => Ok(p),
        Program::Param(_) => Err(CliError::WrongKind {
            path: path.to_owned(),
            message: "expected a fixed-size program (`target`), found `ptarget`; use `param`",
        }),
    }
}

fn load_param(path: &Path) -> Result<ParamProgram, CliError> {
    match load(path)? {
        Program::Param(p) => Ok(p),
        Program::Fixed(_) => Err(CliError::WrongKind {
            path: path.to_owned(),
            message: "expected a parameterized program (`ptarget`), found `target`; use `check`",
        }),
    }
}

fn options(common: &Common) -> BackwardOptions {
    let mut opts = BackwardOptions::default();
    if let Some(n) = common.max_nodes {
        opts.max_nodes = n;
    }
    opts
}

fn label(v: Verdict) -> VerdictLabel {
    match v {
        Verdict::Reachable => VerdictLabel::Reachable,
        Verdict::Unreachable => VerdictLabel::Unreachable,
    }
}

fn check(common: &Common) -> Result<Report, CliError> {
    let program = load_fixed(&common.file)?;
    let start = Instant::now();
    let (stats, _) = backward_reach_with(&program, &program.target, &options(common))?;
    let witness = match (&stats.witness, common.witness) {
        (Some(chain), true) => {
            let run = concretize_chain(&program, chain)?;
            Some(run.actions.iter().map(|a| dtso_action_line(&program, a)).collect())
        }
        _ => None,
    };
    Ok(Report {
        verdict: label(stats.verdict),
        mode: "check".into(),
        configs_generated: stats.configs_generated,
        iterations: stats.iterations,
        time_ms: start.elapsed().as_millis() as u64,
        witness,
    })
}

fn param(common: &Common) -> Result<Report, CliError> {
    let program = load_param(&common.file)?;
    let start = Instant::now();
    let (stats, _) = param_backward_reach_with(&program, &program.target, &options(common))?;
    let witness = match (&stats.witness, common.witness) {
        (Some(chain), true) => {
            let (instance, run) = concretize_param_chain(&program, chain)?;
            Some(run.actions.iter().map(|a| dtso_action_line(&instance, a)).collect())
        }
        _ => None,
    };
    Ok(Report {
        verdict: label(stats.verdict),
        mode: "param".into(),
        configs_generated: stats.configs_generated,
        iterations: stats.iterations,
        time_ms: start.elapsed().as_millis() as u64,
        witness,
    })
}

fn bounded_report<A>(
    mode: &str,
    search: BoundedSearch<A>,
    start: Instant,
    want_witness: bool,
    line: impl Fn(&A) -> String,
) -> Report {
    let (verdict, witness) = match search.verdict {
        BoundedVerdict::Reachable(run) => (
            VerdictLabel::Reachable,
            want_witness.then(|| run.iter().map(line).collect()),
        ),
        BoundedVerdict::SafeWithinBound => (VerdictLabel::SafeWithinBound, None),
        BoundedVerdict::BoundExceeded => (VerdictLabel::BoundExceeded, None),
    };
    Report {
        verdict,
        mode: mode.into(),
        configs_generated: search.nodes as u64,
        iterations: search.nodes as u64,
        time_ms: start.elapsed().as_millis() as u64,
        witness,
    }
}

fn explore(args: &Explore, semantics: Semantics) -> Result<Report, CliError> {
    let common = &args.common;
    let program = load_fixed(&common.file)?;
    let max = common.max_nodes.map_or(tso::DEFAULT_EXPLORE_NODES, |n| n as usize);
    let start = Instant::now();
    Ok(match semantics {
        Semantics::Tso => {
            let s = tso::tso_bounded_search(&program, args.buffer_bound, &program.target, max)?;
            bounded_report("explore-tso", s, start, common.witness, |a| {
                tso_action_line(&program, a)
            })
        }
        Semantics::Dtso => {
            let s = dtso::dtso_bounded_search(&program, args.buffer_bound, &program.target, max)?;
            bounded_report("explore-dtso", s, start, common.witness, |a| {
                dtso_action_line(&program, a)
            })
        }
    })
}

/// Resolves the program named in a run file, first as given and then
/// relative to the run file's directory.
fn program_for_run(run_path: &Path, header: &str) -> PathBuf {
    let direct = PathBuf::from(header);
    if direct.exists() {
        return direct;
    }
    run_path.parent().map_or(direct.clone(), |dir| dir.join(&direct))
}

fn translate(args: &Translate) -> Result<String, CliError> {
    let text = read(&args.file)?;
    let run_err = |source| CliError::RunFile {
        path: args.file.clone(),
        source,
    };
    let header = run_header(&text).map_err(run_err)?;
    let program = load_fixed(&program_for_run(&args.file, &header))?;
    let replay_err = |source| CliError::Replay {
        path: args.file.clone(),
        source,
    };
    Ok(match args.from {
        Semantics::Tso => {
            let actions = parse_tso_run(&text, &program).map_err(run_err)?;
            let run = tso::tso_replay(&program, &actions).map_err(replay_err)?;
            format_dtso_run(&header, &program, &tso_to_dtso(&program, &run)?.actions)
        }
        Semantics::Dtso => {
            let actions = parse_dtso_run(&text, &program).map_err(run_err)?;
            let run = dtso::dtso_replay(&program, &actions).map_err(replay_err)?;
            format_tso_run(&header, &program, &dtso_to_tso(&program, &run)?.actions)
        }
    })
}

fn run(cli: &Cli) -> Result<(String, u8), CliError> {
    let (report, format) = match &cli.mode {
        Mode::Check(c) => (check(c)?, c.format),
        Mode::Param(c) => (param(c)?, c.format),
        Mode::ExploreTso(e) => (explore(e, Semantics::Tso)?, e.common.format),
        Mode::ExploreDtso(e) => (explore(e, Semantics::Dtso)?, e.common.format),
        Mode::Translate(t) => return translate(t).map(|out| (out, 0)),
    };
    Ok((emit_report(&report, format), report.verdict.exit_code()))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok((out, code)) => {
            print!("{out}");
            ExitCode::from(code)
        }
        Err(e) => {
            eprintln!("dualmc: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
