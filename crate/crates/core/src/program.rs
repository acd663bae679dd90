//! Concurrent programs: finite automata over shared-memory operations, the
//! textual input format, validation and initial configurations.

use std::collections::{BTreeSet, HashMap};
use std::fmt;

use thiserror::Error;

/// Index of a declared shared variable.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct VarId(pub u16);

/// A value of the finite data domain.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Value(pub u16);

/// Index of a local state inside one automaton.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct StateId(pub u16);

/// Position of a process in the program (its process ID, 0-based).
pub type ProcId = usize;

/// Upper bound on the number of variables; the ordering code packs variable
/// sets into a `u64` mask.
pub const MAX_VARS: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum MemoryOp {
    Nop,
    Read(VarId, Value),
    Write(VarId, Value),
    Fence,
    /// Atomic read-write: succeeds when memory holds the first value and
    /// replaces it by the second.
    Arw(VarId, Value, Value),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Transition {
    pub from: StateId,
    pub op: MemoryOp,
    pub to: StateId,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Automaton {
    pub name: String,
    /// State names; `StateId(i)` names `states[i]`. The initial state is
    /// always `StateId(0)`.
    pub states: Vec<String>,
    pub init: StateId,
    pub transitions: Vec<Transition>,
}

impl Automaton {
    pub fn state_name(&self, s: StateId) -> &str {
        &self.states[s.0 as usize]
    }

    pub fn state_id(&self, name: &str) -> Option<StateId> {
        self.states.iter().position(|s| s == name).map(|i| StateId(i as u16))
    }
}

/// Shared part of both program kinds: the variables and the data domain.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Domain {
    pub vars: Vec<String>,
    /// Declared values in ascending order; always contains 0.
    pub values: Vec<Value>,
}

impl Domain {
    pub fn var_count(&self) -> usize {
        self.vars.len()
    }

    pub fn var_name(&self, x: VarId) -> &str {
        &self.vars[x.0 as usize]
    }

    pub fn var_id(&self, name: &str) -> Option<VarId> {
        self.vars.iter().position(|v| v == name).map(|i| VarId(i as u16))
    }

    pub fn vars(&self) -> impl Iterator<Item = VarId> + '_ {
        (0..self.vars.len()).map(|i| VarId(i as u16))
    }

    /// Every memory valuation over the domain, in lexicographic order.
    pub fn all_memories(&self) -> Vec<Vec<Value>> {
        let mut out = vec![Vec::new()];
        for _ in 0..self.vars.len() {
            out = out
                .into_iter()
                .flat_map(|m| {
                    self.values.iter().map(move |&v| {
                        let mut m = m.clone();
                        m.push(v);
                        m
                    })
                })
                .collect();
        }
        out
    }

    pub fn zero_memory(&self) -> Vec<Value> {
        vec![Value(0); self.vars.len()]
    }
}

/// A fixed-size program: one automaton per process plus a target global state.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConcurrentProgram {
    pub domain: Domain,
    pub processes: Vec<Automaton>,
    /// Target local state of each process, indexed by process ID.
    pub target: Vec<StateId>,
}

impl ConcurrentProgram {
    pub fn process_count(&self) -> usize {
        self.processes.len()
    }

    pub fn init_states(&self) -> Vec<StateId> {
        self.processes.iter().map(|a| a.init).collect()
    }

    pub fn process_id(&self, name: &str) -> Option<ProcId> {
        self.processes.iter().position(|a| a.name == name)
    }

    /// Renders a global state as `P=q P'=q'`.
    pub fn global_state_name(&self, states: &[StateId]) -> String {
        self.processes
            .iter()
            .zip(states)
            .map(|(a, &s)| format!("{}={}", a.name, a.state_name(s)))
            .collect::<Vec<_>>()
            .join(" ")
    }
}

/// A parameterized program: arbitrarily many copies of one template.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParamProgram {
    pub domain: Domain,
    pub template: Automaton,
    /// Multiset of target states, kept in file order.
    pub target: Vec<StateId>,
}

impl ParamProgram {
    /// The fixed-size instance with `n` copies of the template. Copies are
    /// named `<template>#<i>` and have no target of their own; the target
    /// vector is filled with the initial state.
    pub fn instance(&self, n: usize) -> ConcurrentProgram {
        let processes = (0..n)
            .map(|i| {
                let mut a = self.template.clone();
                a.name = format!("{}#{}", self.template.name, i);
                a
            })
            .collect();
        ConcurrentProgram {
            domain: self.domain.clone(),
            processes,
            target: vec![self.template.init; n],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Program {
    Fixed(ConcurrentProgram),
    Param(ParamProgram),
}

impl Program {
    pub fn domain(&self) -> &Domain {
        match self {
            Program::Fixed(p) => &p.domain,
            Program::Param(p) => &p.domain,
        }
    }
}

// ---------------------------------------------------------------------------
// Source syntax
// ---------------------------------------------------------------------------

/// A position in the source text (1-based line and column).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Pos {
    pub line: usize,
    pub column: usize,
}

impl fmt::Display for Pos {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.column)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Spanned<T> {
    pub value: T,
    pub pos: Pos,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SourceOp {
    Nop,
    Read(Spanned<String>, Spanned<u64>),
    Write(Spanned<String>, Spanned<u64>),
    Fence,
    Arw(Spanned<String>, Spanned<u64>, Spanned<u64>),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SourceTransition {
    pub from: Spanned<String>,
    pub to: Spanned<String>,
    pub op: SourceOp,
    pub pos: Pos,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SourceProcess {
    pub name: Spanned<String>,
    pub inits: Vec<Spanned<String>>,
    pub transitions: Vec<SourceTransition>,
}

/// A `process = state` pair in a target line.
pub type SourceTargetEntry = (Spanned<String>, Spanned<String>);

/// The syntax tree of a program file, before name resolution.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct SourceProgram {
    pub vars: Vec<Spanned<Vec<Spanned<String>>>>,
    pub values: Vec<Spanned<Vec<Spanned<u64>>>>,
    pub processes: Vec<SourceProcess>,
    pub targets: Vec<Spanned<Vec<SourceTargetEntry>>>,
    pub ptargets: Vec<Spanned<Vec<Spanned<String>>>>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum DiagnosticKind {
    UndeclaredIdentifier,
    DomainMissingZero,
    TargetDirectives,
    DuplicateProcess,
    Duplicate,
    Structure,
}

/// A semantic problem found by [`validate`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Diagnostic {
    pub kind: DiagnosticKind,
    pub pos: Pos,
    pub message: String,
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.pos, self.message)
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ParseError {
    #[error("syntax error at {pos}: {message}")]
    Syntax { pos: Pos, message: String },
    #[error("{}", join_diagnostics(.0))]
    Invalid(Vec<Diagnostic>),
}

fn join_diagnostics(d: &[Diagnostic]) -> String {
    d.iter().map(|d| d.to_string()).collect::<Vec<_>>().join("; ")
}

struct Token<'a> {
    text: &'a str,
    pos: Pos,
}

fn tokenize_line(line: &str, line_no: usize) -> Vec<Token<'_>> {
    let code = match line.find('#') {
        Some(i) => &line[..i],
        None => line,
    };
    let mut out = Vec::new();
    let mut start: Option<(usize, usize)> = None;
    for (col, (byte, ch)) in code.char_indices().enumerate() {
        if ch.is_whitespace() {
            if let Some((b, c)) = start.take() {
                out.push(Token {
                    text: &code[b..byte],
                    pos: Pos {
                        line: line_no,
                        column: c + 1,
                    },
                });
            }
        } else if start.is_none() {
            start = Some((byte, col));
        }
    }
    if let Some((b, c)) = start {
        out.push(Token {
            text: &code[b..],
            pos: Pos {
                line: line_no,
                column: c + 1,
            },
        });
    }
    out
}

fn syntax(pos: Pos, message: impl Into<String>) -> ParseError {
    ParseError::Syntax {
        pos,
        message: message.into(),
    }
}

fn is_ident(s: &str) -> bool {
    let mut chars = s.chars();
    match chars.next() {
        Some(c) if c.is_alphabetic() || c == '_' => {}
        _ => return false,
    }
    chars.all(|c| c.is_alphanumeric() || matches!(c, '_' | '\'' | '.' | '-'))
}

fn ident(tok: &Token<'_>) -> Result<Spanned<String>, ParseError> {
    if is_ident(tok.text) {
        Ok(Spanned {
            value: tok.text.to_string(),
            pos: tok.pos,
        })
    } else {
        Err(syntax(tok.pos, format!("expected identifier, found `{}`", tok.text)))
    }
}

fn uint(tok: &Token<'_>) -> Result<Spanned<u64>, ParseError> {
    tok.text
        .parse::<u64>()
        .map(|value| Spanned { value, pos: tok.pos })
        .map_err(|_| syntax(tok.pos, format!("expected unsigned integer, found `{}`", tok.text)))
}

fn end_pos(line_no: usize, line: &str) -> Pos {
    Pos {
        line: line_no,
        column: line.chars().count() + 1,
    }
}

/// Parses the program text into its syntax tree without resolving names.
pub fn parse_source(text: &str) -> Result<SourceProgram, ParseError> {
    let mut prog = SourceProgram::default();
    let mut current: Option<SourceProcess> = None;
    let mut last_line = (0, "");
    for (idx, line) in text.lines().enumerate() {
        let line_no = idx + 1;
        last_line = (line_no, line);
        let toks = tokenize_line(line, line_no);
        let Some(head) = toks.first() else { continue };
        let args = &toks[1..];
        let need_args = |n: usize| -> Result<(), ParseError> {
            if args.len() < n {
                Err(syntax(
                    end_pos(line_no, line),
                    format!("`{}` expects at least {} argument(s)", head.text, n),
                ))
            } else {
                Ok(())
            }
        };
        let exact_args = |n: usize| -> Result<(), ParseError> {
            if args.len() > n {
                return Err(syntax(args[n].pos, format!("unexpected token `{}`", args[n].text)));
            }
            need_args(n)
        };
        if let Some(proc_) = current.as_mut() {
            match head.text {
                "init" => {
                    exact_args(1)?;
                    proc_.inits.push(ident(&args[0])?);
                }
                "trans" => {
                    need_args(3)?;
                    let from = ident(&args[0])?;
                    let to = ident(&args[1])?;
                    let kind = &args[2];
                    let rest = &args[3..];
                    let arity = |n: usize| -> Result<(), ParseError> {
                        if rest.len() > n {
                            Err(syntax(rest[n].pos, format!("unexpected token `{}`", rest[n].text)))
                        } else if rest.len() < n {
                            Err(syntax(
                                end_pos(line_no, line),
                                format!("operation `{}` expects {} operand(s)", kind.text, n),
                            ))
                        } else {
                            Ok(())
                        }
                    };
                    let op = match kind.text {
                        "nop" => {
                            arity(0)?;
                            SourceOp::Nop
                        }
                        "fence" => {
                            arity(0)?;
                            SourceOp::Fence
                        }
                        "r" => {
                            arity(2)?;
                            SourceOp::Read(ident(&rest[0])?, uint(&rest[1])?)
                        }
                        "w" => {
                            arity(2)?;
                            SourceOp::Write(ident(&rest[0])?, uint(&rest[1])?)
                        }
                        "arw" => {
                            arity(3)?;
                            SourceOp::Arw(ident(&rest[0])?, uint(&rest[1])?, uint(&rest[2])?)
                        }
                        other => return Err(syntax(kind.pos, format!("unknown operation `{other}`"))),
                    };
                    proc_.transitions.push(SourceTransition {
                        from,
                        to,
                        op,
                        pos: head.pos,
                    });
                }
                "end" => {
                    exact_args(0)?;
                    prog.processes.push(current.take().expect("inside a process block"));
                }
                other => {
                    return Err(syntax(
                        head.pos,
                        format!("expected `init`, `trans` or `end`, found `{other}`"),
                    ))
                }
            }
            continue;
        }
        match head.text {
            "vars" => {
                need_args(1)?;
                let names = args.iter().map(ident).collect::<Result<_, _>>()?;
                prog.vars.push(Spanned {
                    value: names,
                    pos: head.pos,
                });
            }
            "values" => {
                need_args(1)?;
                let vals = args.iter().map(uint).collect::<Result<_, _>>()?;
                prog.values.push(Spanned {
                    value: vals,
                    pos: head.pos,
                });
            }
            "process" => {
                exact_args(1)?;
                current = Some(SourceProcess {
                    name: ident(&args[0])?,
                    inits: Vec::new(),
                    transitions: Vec::new(),
                });
            }
            "target" => {
                need_args(1)?;
                let mut entries = Vec::new();
                for tok in args {
                    let Some((name, state)) = tok.text.split_once('=') else {
                        return Err(syntax(
                            tok.pos,
                            format!("expected `<process>=<state>`, found `{}`", tok.text),
                        ));
                    };
                    let state_pos = Pos {
                        line: tok.pos.line,
                        column: tok.pos.column + name.chars().count() + 1,
                    };
                    let name = Token {
                        text: name,
                        pos: tok.pos,
                    };
                    let state = Token {
                        text: state,
                        pos: state_pos,
                    };
                    entries.push((ident(&name)?, ident(&state)?));
                }
                prog.targets.push(Spanned {
                    value: entries,
                    pos: head.pos,
                });
            }
            "ptarget" => {
                need_args(1)?;
                let states = args.iter().map(ident).collect::<Result<_, _>>()?;
                prog.ptargets.push(Spanned {
                    value: states,
                    pos: head.pos,
                });
            }
            other => {
                return Err(syntax(head.pos, format!("unknown directive `{other}`")));
            }
        }
    }
    if current.is_some() {
        return Err(syntax(
            end_pos(last_line.0, last_line.1),
            "missing `end` for process block",
        ));
    }
    Ok(prog)
}

fn diag(kind: DiagnosticKind, pos: Pos, message: impl Into<String>) -> Diagnostic {
    Diagnostic {
        kind,
        pos,
        message: message.into(),
    }
}

/// Collects the state names of a process in resolution order: the initial
/// state first, then first mention in transition order.
fn process_states(p: &SourceProcess) -> Vec<String> {
    let mut states: Vec<String> = Vec::new();
    let mut add = |s: &str| {
        if !states.iter().any(|x| x == s) {
            states.push(s.to_string());
        }
    };
    if let Some(i) = p.inits.first() {
        add(&i.value);
    }
    for t in &p.transitions {
        add(&t.from.value);
        add(&t.to.value);
    }
    states
}

/// Checks a parsed source for semantic problems. An empty result means the
/// source resolves to a well-formed program.
pub fn validate(src: &SourceProgram) -> Vec<Diagnostic> {
    use DiagnosticKind::*;
    let mut out = Vec::new();
    let origin = Pos { line: 1, column: 1 };

    let mut var_names: Vec<&str> = Vec::new();
    match src.vars.as_slice() {
        [] => out.push(diag(Structure, origin, "missing `vars` directive")),
        [decl] => {
            for v in &decl.value {
                if var_names.contains(&v.value.as_str()) {
                    out.push(diag(Duplicate, v.pos, format!("variable `{}` declared twice", v.value)));
                } else {
                    var_names.push(&v.value);
                }
            }
            if var_names.len() > MAX_VARS {
                out.push(diag(
                    Structure,
                    decl.pos,
                    format!("at most {MAX_VARS} variables are supported"),
                ));
            }
        }
        [_, second, ..] => out.push(diag(Duplicate, second.pos, "`vars` declared more than once")),
    }

    let mut values: Vec<u64> = Vec::new();
    match src.values.as_slice() {
        [] => out.push(diag(Structure, origin, "missing `values` directive")),
        [decl] => {
            for v in &decl.value {
                if v.value > u16::MAX as u64 {
                    out.push(diag(Structure, v.pos, format!("value {} out of range", v.value)));
                } else if values.contains(&v.value) {
                    out.push(diag(Duplicate, v.pos, format!("value {} declared twice", v.value)));
                } else {
                    values.push(v.value);
                }
            }
            if !values.contains(&0) {
                out.push(diag(DomainMissingZero, decl.pos, "domain must contain 0"));
            }
        }
        [_, second, ..] => out.push(diag(Duplicate, second.pos, "`values` declared more than once")),
    }

    if src.processes.is_empty() {
        out.push(diag(Structure, origin, "at least one process is required"));
    }
    let mut seen_procs: Vec<&str> = Vec::new();
    for p in &src.processes {
        if seen_procs.contains(&p.name.value.as_str()) {
            out.push(diag(
                DuplicateProcess,
                p.name.pos,
                format!("duplicate process name `{}`", p.name.value),
            ));
        } else {
            seen_procs.push(&p.name.value);
        }
        match p.inits.as_slice() {
            [] => out.push(diag(
                Structure,
                p.name.pos,
                format!("process `{}` has no `init` line", p.name.value),
            )),
            [_] => {}
            [_, second, ..] => out.push(diag(
                Duplicate,
                second.pos,
                format!("process `{}` has several `init` lines", p.name.value),
            )),
        }
        let check_var = |out: &mut Vec<Diagnostic>, x: &Spanned<String>| {
            if !var_names.contains(&x.value.as_str()) {
                out.push(diag(
                    UndeclaredIdentifier,
                    x.pos,
                    format!("undeclared variable `{}`", x.value),
                ));
            }
        };
        let check_val = |out: &mut Vec<Diagnostic>, v: &Spanned<u64>| {
            if !values.contains(&v.value) {
                out.push(diag(
                    UndeclaredIdentifier,
                    v.pos,
                    format!("undeclared value {}", v.value),
                ));
            }
        };
        let mut seen_trans: Vec<&SourceTransition> = Vec::new();
        for t in &p.transitions {
            match &t.op {
                SourceOp::Nop | SourceOp::Fence => {}
                SourceOp::Read(x, v) | SourceOp::Write(x, v) => {
                    check_var(&mut out, x);
                    check_val(&mut out, v);
                }
                SourceOp::Arw(x, v, w) => {
                    check_var(&mut out, x);
                    check_val(&mut out, v);
                    check_val(&mut out, w);
                }
            }
            let same = |a: &SourceTransition| {
                a.from.value == t.from.value && a.to.value == t.to.value && same_op(&a.op, &t.op)
            };
            if seen_trans.iter().any(|a| same(a)) {
                out.push(diag(Duplicate, t.pos, "duplicate transition"));
            } else {
                seen_trans.push(t);
            }
        }
    }

    match (src.targets.as_slice(), src.ptargets.as_slice()) {
        ([], []) => out.push(diag(
            TargetDirectives,
            origin,
            "exactly one of `target` or `ptarget` is required",
        )),
        ([_], []) => {
            let entries = &src.targets[0].value;
            let mut named: Vec<&str> = Vec::new();
            for (name, state) in entries {
                let Some(p) = src.processes.iter().find(|p| p.name.value == name.value) else {
                    out.push(diag(
                        UndeclaredIdentifier,
                        name.pos,
                        format!("target names unknown process `{}`", name.value),
                    ));
                    continue;
                };
                if named.contains(&name.value.as_str()) {
                    out.push(diag(
                        Duplicate,
                        name.pos,
                        format!("process `{}` targeted twice", name.value),
                    ));
                }
                named.push(&name.value);
                if !process_states(p).contains(&state.value) {
                    out.push(diag(
                        UndeclaredIdentifier,
                        state.pos,
                        format!("unknown state `{}` of process `{}`", state.value, name.value),
                    ));
                }
            }
            for p in &src.processes {
                if !entries.iter().any(|(n, _)| n.value == p.name.value) {
                    out.push(diag(
                        Structure,
                        src.targets[0].pos,
                        format!("target has no entry for process `{}`", p.name.value),
                    ));
                }
            }
        }
        ([], [pt]) => {
            if src.processes.len() != 1 {
                out.push(diag(Structure, pt.pos, "`ptarget` requires exactly one process block"));
            } else {
                let states = process_states(&src.processes[0]);
                for s in &pt.value {
                    if !states.contains(&s.value) {
                        out.push(diag(
                            UndeclaredIdentifier,
                            s.pos,
                            format!("unknown template state `{}`", s.value),
                        ));
                    }
                }
            }
        }
        (t, pt) => {
            let pos = t
                .iter()
                .map(|d| d.pos)
                .chain(pt.iter().map(|d| d.pos))
                .nth(1)
                .unwrap_or(origin);
            out.push(diag(
                TargetDirectives,
                pos,
                "exactly one `target` or `ptarget` directive is allowed",
            ));
        }
    }
    out
}

fn same_op(a: &SourceOp, b: &SourceOp) -> bool {
    match (a, b) {
        (SourceOp::Nop, SourceOp::Nop) | (SourceOp::Fence, SourceOp::Fence) => true,
        (SourceOp::Read(x, v), SourceOp::Read(y, w)) | (SourceOp::Write(x, v), SourceOp::Write(y, w)) => {
            x.value == y.value && v.value == w.value
        }
        (SourceOp::Arw(x, v, v2), SourceOp::Arw(y, w, w2)) => {
            x.value == y.value && v.value == w.value && v2.value == w2.value
        }
        _ => false,
    }
}

fn resolve_automaton(p: &SourceProcess, domain: &Domain) -> Automaton {
    let states = process_states(p);
    let sid = |s: &str| StateId(states.iter().position(|x| x == s).expect("mentioned state") as u16);
    let var = |x: &Spanned<String>| domain.var_id(&x.value).expect("validated variable");
    let val = |v: &Spanned<u64>| Value(v.value as u16);
    let transitions = p
        .transitions
        .iter()
        .map(|t| Transition {
            from: sid(&t.from.value),
            to: sid(&t.to.value),
            op: match &t.op {
                SourceOp::Nop => MemoryOp::Nop,
                SourceOp::Fence => MemoryOp::Fence,
                SourceOp::Read(x, v) => MemoryOp::Read(var(x), val(v)),
                SourceOp::Write(x, v) => MemoryOp::Write(var(x), val(v)),
                SourceOp::Arw(x, v, w) => MemoryOp::Arw(var(x), val(v), val(w)),
            },
        })
        .collect();
    Automaton {
        name: p.name.value.clone(),
        init: StateId(0),
        states,
        transitions,
    }
}

/// Resolves a validated source into a program.
fn resolve(src: &SourceProgram) -> Program {
    let vars = src.vars[0].value.iter().map(|v| v.value.clone()).collect();
    let values: BTreeSet<u16> = src.values[0].value.iter().map(|v| v.value as u16).collect();
    let domain = Domain {
        vars,
        values: values.into_iter().map(Value).collect(),
    };
    let automata: Vec<Automaton> = src.processes.iter().map(|p| resolve_automaton(p, &domain)).collect();
    if let Some(pt) = src.ptargets.first() {
        let template = automata.into_iter().next().expect("one template");
        let target = pt
            .value
            .iter()
            .map(|s| template.state_id(&s.value).expect("validated state"))
            .collect();
        Program::Param(ParamProgram {
            domain,
            template,
            target,
        })
    } else {
        let by_name: HashMap<&str, &str> = src.targets[0]
            .value
            .iter()
            .map(|(n, s)| (n.value.as_str(), s.value.as_str()))
            .collect();
        let target = automata
            .iter()
            .map(|a| a.state_id(by_name[a.name.as_str()]).expect("validated state"))
            .collect();
        Program::Fixed(ConcurrentProgram {
            domain,
            processes: automata,
            target,
        })
    }
}

/// Parses and validates a program file. Fixed mode is selected by a
/// `target` directive, parameterized mode by `ptarget`.
pub fn parse_program(text: &str) -> Result<Program, ParseError> {
    let src = parse_source(text)?;
    let diags = validate(&src);
    if diags.is_empty() {
        Ok(resolve(&src))
    } else {
        Err(ParseError::Invalid(diags))
    }
}

// ---------------------------------------------------------------------------
// Printing
// ---------------------------------------------------------------------------

fn write_automaton(f: &mut fmt::Formatter<'_>, a: &Automaton, d: &Domain) -> fmt::Result {
    writeln!(f, "process {}", a.name)?;
    writeln!(f, "  init {}", a.state_name(a.init))?;
    for t in &a.transitions {
        write!(f, "  trans {} {} ", a.state_name(t.from), a.state_name(t.to))?;
        match t.op {
            MemoryOp::Nop => writeln!(f, "nop")?,
            MemoryOp::Fence => writeln!(f, "fence")?,
            MemoryOp::Read(x, v) => writeln!(f, "r {} {}", d.var_name(x), v.0)?,
            MemoryOp::Write(x, v) => writeln!(f, "w {} {}", d.var_name(x), v.0)?,
            MemoryOp::Arw(x, v, w) => writeln!(f, "arw {} {} {}", d.var_name(x), v.0, w.0)?,
        }
    }
    writeln!(f, "end")
}

fn write_domain(f: &mut fmt::Formatter<'_>, d: &Domain) -> fmt::Result {
    writeln!(f, "vars {}", d.vars.join(" "))?;
    let vals: Vec<String> = d.values.iter().map(|v| v.0.to_string()).collect();
    writeln!(f, "values {}", vals.join(" "))
}

impl fmt::Display for Program {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Program::Fixed(p) => {
                write_domain(f, &p.domain)?;
                for a in &p.processes {
                    write_automaton(f, a, &p.domain)?;
                }
                writeln!(f, "target {}", p.global_state_name(&p.target))
            }
            Program::Param(p) => {
                write_domain(f, &p.domain)?;
                write_automaton(f, &p.template, &p.domain)?;
                let names: Vec<&str> = p.target.iter().map(|&s| p.template.state_name(s)).collect();
                writeln!(f, "ptarget {}", names.join(" "))
            }
        }
    }
}
