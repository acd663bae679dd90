//! Text format for runs.
//!
//! ```text
//! program corpus/sb.lit
//! t P1 q0 q1 w x 2
//! propagate P2 y
//! delete P2
//! update P1
//! ```
//!
//! The header names the program file. Transition lines repeat the source
//! syntax of the transition; `update` only occurs in TSO runs, `propagate`
//! and `delete` only in Dual TSO runs. Configurations are not stored; they
//! are recomputed by replay.

use std::fmt::Write as _;

use thiserror::Error;

use crate::dtso::DtsoAction;
use crate::program::{ConcurrentProgram, MemoryOp, ProcId, Transition};
use crate::tso::TsoAction;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RunFileError {
    #[error("line {line}: {message}")]
    Line { line: usize, message: String },
    #[error("missing `program <path>` header")]
    MissingHeader,
}

fn line_err(line: usize, message: impl Into<String>) -> RunFileError {
    RunFileError::Line {
        line,
        message: message.into(),
    }
}

fn op_text(program: &ConcurrentProgram, op: MemoryOp) -> String {
    let d = &program.domain;
    match op {
        MemoryOp::Nop => "nop".into(),
        MemoryOp::Fence => "fence".into(),
        MemoryOp::Read(x, v) => format!("r {} {}", d.var_name(x), v.0),
        MemoryOp::Write(x, v) => format!("w {} {}", d.var_name(x), v.0),
        MemoryOp::Arw(x, v, w) => format!("arw {} {} {}", d.var_name(x), v.0, w.0),
    }
}

fn transition_line(program: &ConcurrentProgram, proc: ProcId, t: &Transition) -> String {
    let a = &program.processes[proc];
    format!(
        "t {} {} {} {}",
        a.name,
        a.state_name(t.from),
        a.state_name(t.to),
        op_text(program, t.op)
    )
}

/// Renders one TSO action.
pub fn tso_action_line(program: &ConcurrentProgram, a: &TsoAction) -> String {
    match *a {
        TsoAction::Trans { proc, transition } => {
            transition_line(program, proc, &program.processes[proc].transitions[transition])
        }
        TsoAction::Update { proc } => format!("update {}", program.processes[proc].name),
    }
}

/// Renders one Dual TSO action.
pub fn dtso_action_line(program: &ConcurrentProgram, a: &DtsoAction) -> String {
    let name = |p: ProcId| &program.processes[p].name;
    match *a {
        DtsoAction::Trans { proc, transition } => {
            transition_line(program, proc, &program.processes[proc].transitions[transition])
        }
        DtsoAction::Propagate { proc, var } => format!("propagate {} {}", name(proc), program.domain.var_name(var)),
        DtsoAction::Delete { proc } => format!("delete {}", name(proc)),
    }
}

fn with_header(path: &str, lines: impl Iterator<Item = String>) -> String {
    let mut out = format!("program {path}\n");
    for l in lines {
        let _ = writeln!(out, "{l}");
    }
    out
}

pub fn format_tso_run(path: &str, program: &ConcurrentProgram, actions: &[TsoAction]) -> String {
    with_header(path, actions.iter().map(|a| tso_action_line(program, a)))
}

pub fn format_dtso_run(path: &str, program: &ConcurrentProgram, actions: &[DtsoAction]) -> String {
    with_header(path, actions.iter().map(|a| dtso_action_line(program, a)))
}

/// Non-empty lines with comments stripped, numbered from 1.
fn lines(text: &str) -> impl Iterator<Item = (usize, Vec<&str>)> {
    text.lines().enumerate().filter_map(|(i, l)| {
        let l = l.split('#').next().unwrap_or("");
        let toks: Vec<&str> = l.split_whitespace().collect();
        (!toks.is_empty()).then_some((i + 1, toks))
    })
}

/// The program path named by the header line.
pub fn run_header(text: &str) -> Result<String, RunFileError> {
    match lines(text).next() {
        Some((_, toks)) if toks.len() == 2 && toks[0] == "program" => Ok(toks[1].to_string()),
        _ => Err(RunFileError::MissingHeader),
    }
}

fn proc_of(program: &ConcurrentProgram, line: usize, name: &str) -> Result<ProcId, RunFileError> {
    program
        .process_id(name)
        .ok_or_else(|| line_err(line, format!("unknown process `{name}`")))
}

/// Resolves `t <proc> <from> <to> <op...>` to a transition index.
fn parse_transition(program: &ConcurrentProgram, line: usize, toks: &[&str]) -> Result<(ProcId, usize), RunFileError> {
    if toks.len() < 5 {
        return Err(line_err(line, "expected `t <process> <from> <to> <op>`"));
    }
    let proc = proc_of(program, line, toks[1])?;
    let a = &program.processes[proc];
    let wanted = toks[4..].join(" ");
    a.transitions
        .iter()
        .position(|t| {
            a.state_name(t.from) == toks[2] && a.state_name(t.to) == toks[3] && op_text(program, t.op) == wanted
        })
        .map(|i| (proc, i))
        .ok_or_else(|| {
            line_err(
                line,
                format!("process `{}` has no transition `{}`", toks[1], toks[2..].join(" ")),
            )
        })
}

fn body(text: &str) -> Result<impl Iterator<Item = (usize, Vec<&str>)>, RunFileError> {
    run_header(text)?;
    Ok(lines(text).skip(1))
}

pub fn parse_tso_run(text: &str, program: &ConcurrentProgram) -> Result<Vec<TsoAction>, RunFileError> {
    body(text)?
        .map(|(line, toks)| match toks[0] {
            "t" => {
                parse_transition(program, line, &toks).map(|(proc, transition)| TsoAction::Trans { proc, transition })
            }
            "update" if toks.len() == 2 => Ok(TsoAction::Update {
                proc: proc_of(program, line, toks[1])?,
            }),
            other => Err(line_err(line, format!("unexpected `{other}` in a TSO run"))),
        })
        .collect()
}

pub fn parse_dtso_run(text: &str, program: &ConcurrentProgram) -> Result<Vec<DtsoAction>, RunFileError> {
    body(text)?
        .map(|(line, toks)| match toks[0] {
            "t" => {
                parse_transition(program, line, &toks).map(|(proc, transition)| DtsoAction::Trans { proc, transition })
            }
            "propagate" if toks.len() == 3 => {
                let proc = proc_of(program, line, toks[1])?;
                let var = program
                    .domain
                    .var_id(toks[2])
                    .ok_or_else(|| line_err(line, format!("unknown variable `{}`", toks[2])))?;
                Ok(DtsoAction::Propagate { proc, var })
            }
            "delete" if toks.len() == 2 => Ok(DtsoAction::Delete {
                proc: proc_of(program, line, toks[1])?,
            }),
            other => Err(line_err(line, format!("unexpected `{other}` in a Dual TSO run"))),
        })
        .collect()
}
