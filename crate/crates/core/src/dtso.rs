//! Dual TSO semantics: writes hit memory at once and every process reads
//! through a FIFO load buffer filled by `propagate` steps.

use std::collections::BTreeSet;
use std::fmt;

use crate::explore::{bfs, BoundedSearch, BoundedVerdict, ExploreError};
use crate::program::{ConcurrentProgram, MemoryOp, ParamProgram, ProcId, StateId, Value, VarId};
use crate::run::{replay_with, ReplayError, Run};

/// A load-buffer message: a speculated read `(x, v)` or, when `own` is set,
/// the process's own write `(x, v, own)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct DtsoMsg {
    pub var: VarId,
    pub val: Value,
    pub own: bool,
}

impl DtsoMsg {
    pub fn plain(var: VarId, val: Value) -> Self {
        DtsoMsg { var, val, own: false }
    }

    pub fn own(var: VarId, val: Value) -> Self {
        DtsoMsg { var, val, own: true }
    }
}

impl fmt::Display for DtsoMsg {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.own {
            write!(f, "({},{},own)", self.var.0, self.val.0)
        } else {
            write!(f, "({},{})", self.var.0, self.val.0)
        }
    }
}

/// Buffers are stored newest first: index 0 is the most recently added
/// message and the last element is the oldest (the head).
///
/// The same layout doubles as a parameterized configuration, whose process
/// sequence may have any length.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct DtsoConfig {
    pub states: Vec<StateId>,
    pub buffers: Vec<Vec<DtsoMsg>>,
    pub mem: Vec<Value>,
}

/// A parameterized configuration: an ordered sequence of processes (the
/// order is the process-ID order) plus memory.
pub type ParamConfig = DtsoConfig;

impl DtsoConfig {
    pub fn process_count(&self) -> usize {
        self.states.len()
    }

    pub fn buffers_empty(&self) -> bool {
        self.buffers.iter().all(Vec::is_empty)
    }

    pub fn max_buffer_len(&self) -> usize {
        self.buffers.iter().map(Vec::len).max().unwrap_or(0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum DtsoAction {
    Trans {
        proc: ProcId,
        transition: usize,
    },
    /// Appends `(x, mem(x))` at the newest end of `proc`'s buffer.
    Propagate {
        proc: ProcId,
        var: VarId,
    },
    /// Drops the oldest message of `proc`'s buffer.
    Delete {
        proc: ProcId,
    },
}

impl DtsoAction {
    pub fn proc(&self) -> ProcId {
        match *self {
            DtsoAction::Trans { proc, .. } | DtsoAction::Propagate { proc, .. } | DtsoAction::Delete { proc } => proc,
        }
    }

    /// The same action performed by another process.
    pub fn with_proc(self, proc: ProcId) -> Self {
        match self {
            DtsoAction::Trans { transition, .. } => DtsoAction::Trans { proc, transition },
            DtsoAction::Propagate { var, .. } => DtsoAction::Propagate { proc, var },
            DtsoAction::Delete { .. } => DtsoAction::Delete { proc },
        }
    }
}

pub type DtsoRun = Run<DtsoConfig, DtsoAction>;

pub fn initial_dtso_config(program: &ConcurrentProgram) -> DtsoConfig {
    DtsoConfig {
        states: program.init_states(),
        buffers: vec![Vec::new(); program.process_count()],
        mem: program.domain.zero_memory(),
    }
}

/// The initial configuration of the `n`-process instance.
pub fn initial_param_config(program: &ParamProgram, n: usize) -> ParamConfig {
    DtsoConfig {
        states: vec![program.template.init; n],
        buffers: vec![Vec::new(); n],
        mem: program.domain.zero_memory(),
    }
}

/// Whether a read `r(x, v)` is enabled on buffer `buf`: either the most
/// recent own-message on `x` carries `v`, or there is no own-message on `x`
/// and the oldest message is `(x, v)`.
pub fn read_enabled(buf: &[DtsoMsg], x: VarId, v: Value) -> bool {
    match buf.iter().find(|m| m.own && m.var == x) {
        Some(m) => m.val == v,
        None => buf.last() == Some(&DtsoMsg::plain(x, v)),
    }
}

/// Applies one action, returning `None` when it is disabled.
pub fn dtso_step(c: &DtsoConfig, program: &ConcurrentProgram, action: &DtsoAction) -> Option<DtsoConfig> {
    match *action {
        DtsoAction::Propagate { proc, var } => {
            if proc >= c.process_count() || var.0 as usize >= c.mem.len() {
                return None;
            }
            let mut d = c.clone();
            d.buffers[proc].insert(0, DtsoMsg::plain(var, c.mem[var.0 as usize]));
            Some(d)
        }
        DtsoAction::Delete { proc } => {
            let mut d = c.clone();
            d.buffers.get_mut(proc)?.pop()?;
            Some(d)
        }
        DtsoAction::Trans { proc, transition } => {
            let t = program.processes.get(proc)?.transitions.get(transition)?;
            if c.states[proc] != t.from {
                return None;
            }
            let buf = &c.buffers[proc];
            let mut d = c.clone();
            match t.op {
                MemoryOp::Nop => {}
                MemoryOp::Write(x, v) => {
                    d.mem[x.0 as usize] = v;
                    d.buffers[proc].insert(0, DtsoMsg::own(x, v));
                }
                MemoryOp::Read(x, v) => {
                    if !read_enabled(buf, x, v) {
                        return None;
                    }
                }
                MemoryOp::Fence => {
                    if !buf.is_empty() {
                        return None;
                    }
                }
                MemoryOp::Arw(x, v, w) => {
                    if !buf.is_empty() || c.mem[x.0 as usize] != v {
                        return None;
                    }
                    d.mem[x.0 as usize] = w;
                }
            }
            d.states[proc] = t.to;
            Some(d)
        }
    }
}

/// All one-step successors, ordered by process; within a process the
/// program transitions come first, then propagate for every variable, then
/// delete.
pub fn dtso_successors(c: &DtsoConfig, program: &ConcurrentProgram) -> Vec<(DtsoAction, DtsoConfig)> {
    let mut out = Vec::new();
    for (proc, aut) in program.processes.iter().enumerate() {
        for (transition, t) in aut.transitions.iter().enumerate() {
            if t.from != c.states[proc] {
                continue;
            }
            let a = DtsoAction::Trans { proc, transition };
            if let Some(d) = dtso_step(c, program, &a) {
                out.push((a, d));
            }
        }
        for var in program.domain.vars() {
            let a = DtsoAction::Propagate { proc, var };
            out.push((a, dtso_step(c, program, &a).expect("propagate is always enabled")));
        }
        let a = DtsoAction::Delete { proc };
        if let Some(d) = dtso_step(c, program, &a) {
            out.push((a, d));
        }
    }
    out
}

/// Replays a DTSO run from the initial configuration.
pub fn dtso_replay(program: &ConcurrentProgram, actions: &[DtsoAction]) -> Result<DtsoRun, ReplayError> {
    replay_with(initial_dtso_config(program), actions, |c, a| dtso_step(c, program, a))
}

/// Breadth-first search for `target` (with empty buffers) over
/// configurations whose load buffers never exceed `bound` messages.
pub fn dtso_bounded_reach(
    program: &ConcurrentProgram,
    bound: usize,
    target: &[StateId],
    max_nodes: usize,
) -> Result<BoundedVerdict<DtsoAction>, ExploreError> {
    dtso_bounded_search(program, bound, target, max_nodes).map(|s| s.verdict)
}

/// [`dtso_bounded_reach`] together with the number of visited configurations.
pub fn dtso_bounded_search(
    program: &ConcurrentProgram,
    bound: usize,
    target: &[StateId],
    max_nodes: usize,
) -> Result<BoundedSearch<DtsoAction>, ExploreError> {
    let ex = bfs(
        initial_dtso_config(program),
        |c| dtso_successors(c, program),
        |c| c.max_buffer_len() <= bound,
        |c| c.buffers_empty() && c.states == target,
        max_nodes,
    )?;
    Ok(BoundedSearch {
        verdict: ex.verdict(),
        nodes: ex.nodes.len(),
    })
}

/// Global states reachable with all buffers empty within the bound.
pub fn dtso_reachable_empty_buffer_states(
    program: &ConcurrentProgram,
    bound: usize,
    max_nodes: usize,
) -> Result<BTreeSet<Vec<StateId>>, ExploreError> {
    let ex = bfs(
        initial_dtso_config(program),
        |c| dtso_successors(c, program),
        |c| c.max_buffer_len() <= bound,
        |_| false,
        max_nodes,
    )?;
    Ok(ex
        .nodes
        .into_iter()
        .filter(|c| c.buffers_empty())
        .map(|c| c.states)
        .collect())
}
