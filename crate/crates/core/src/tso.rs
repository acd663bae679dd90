//! Classical TSO semantics: per-process FIFO store buffers drained into
//! shared memory by `update` steps.

use std::cell::Cell;
use std::collections::BTreeSet;

use crate::explore::{bfs, BoundedSearch, BoundedVerdict, Exploration, ExploreError};
use crate::program::{ConcurrentProgram, MemoryOp, ProcId, StateId, Value, VarId};
use crate::run::{replay_with, ReplayError, Run};

/// A pending store `(x, v)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct TsoMsg {
    pub var: VarId,
    pub val: Value,
}

/// Buffers are stored newest first: index 0 is the most recent write and the
/// last element is the oldest one, the next to reach memory.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct TsoConfig {
    pub states: Vec<StateId>,
    pub buffers: Vec<Vec<TsoMsg>>,
    pub mem: Vec<Value>,
}

impl TsoConfig {
    pub fn buffers_empty(&self) -> bool {
        self.buffers.iter().all(Vec::is_empty)
    }

    pub fn max_buffer_len(&self) -> usize {
        self.buffers.iter().map(Vec::len).max().unwrap_or(0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TsoAction {
    /// Transition `transition` of process `proc`'s automaton.
    Trans { proc: ProcId, transition: usize },
    /// Moves the oldest buffered store of `proc` to memory.
    Update { proc: ProcId },
}

impl TsoAction {
    pub fn proc(&self) -> ProcId {
        match *self {
            TsoAction::Trans { proc, .. } | TsoAction::Update { proc } => proc,
        }
    }
}

pub type TsoRun = Run<TsoConfig, TsoAction>;

pub fn initial_tso_config(program: &ConcurrentProgram) -> TsoConfig {
    TsoConfig {
        states: program.init_states(),
        buffers: vec![Vec::new(); program.process_count()],
        mem: program.domain.zero_memory(),
    }
}

/// Value a TSO read of `x` by a process with buffer `buf` observes.
fn visible_value(buf: &[TsoMsg], mem: &[Value], x: VarId) -> Value {
    buf.iter()
        .find(|m| m.var == x)
        .map(|m| m.val)
        .unwrap_or(mem[x.0 as usize])
}

/// Applies one action, returning `None` when it is disabled.
pub fn tso_step(c: &TsoConfig, program: &ConcurrentProgram, action: &TsoAction) -> Option<TsoConfig> {
    match *action {
        TsoAction::Update { proc } => {
            let mut d = c.clone();
            let m = d.buffers.get_mut(proc)?.pop()?;
            d.mem[m.var.0 as usize] = m.val;
            Some(d)
        }
        TsoAction::Trans { proc, transition } => {
            let t = program.processes.get(proc)?.transitions.get(transition)?;
            if c.states[proc] != t.from {
                return None;
            }
            let buf = &c.buffers[proc];
            let mut d = c.clone();
            match t.op {
                MemoryOp::Nop => {}
                MemoryOp::Write(x, v) => d.buffers[proc].insert(0, TsoMsg { var: x, val: v }),
                MemoryOp::Read(x, v) => {
                    if visible_value(buf, &c.mem, x) != v {
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

/// All one-step successors, ordered by process, then transition order, then
/// the process's update.
pub fn tso_successors(c: &TsoConfig, program: &ConcurrentProgram) -> Vec<(TsoAction, TsoConfig)> {
    let mut out = Vec::new();
    for (proc, aut) in program.processes.iter().enumerate() {
        for (transition, t) in aut.transitions.iter().enumerate() {
            if t.from != c.states[proc] {
                continue;
            }
            let a = TsoAction::Trans { proc, transition };
            if let Some(d) = tso_step(c, program, &a) {
                out.push((a, d));
            }
        }
        let a = TsoAction::Update { proc };
        if let Some(d) = tso_step(c, program, &a) {
            out.push((a, d));
        }
    }
    out
}

/// Replays a TSO run from the initial configuration.
pub fn tso_replay(program: &ConcurrentProgram, actions: &[TsoAction]) -> Result<TsoRun, ReplayError> {
    replay_with(initial_tso_config(program), actions, |c, a| tso_step(c, program, a))
}

/// Default node cap of the bounded explorers.
pub const DEFAULT_EXPLORE_NODES: usize = 5_000_000;

/// Successors used by the bounded explorer. A write that would push a
/// buffer past `bound` is fused with an immediate update of the same
/// process, so `bound = 0` explores exactly the sequentially consistent
/// runs. Fusing sets `pruned`, since the plain write was cut off.
fn bounded_successors(
    c: &TsoConfig,
    program: &ConcurrentProgram,
    bound: usize,
    pruned: &Cell<bool>,
) -> Vec<(Vec<TsoAction>, TsoConfig)> {
    tso_successors(c, program)
        .into_iter()
        .map(|(a, d)| {
            let p = a.proc();
            if d.buffers[p].len() > bound {
                pruned.set(true);
                let u = TsoAction::Update { proc: p };
                let e = tso_step(&d, program, &u).expect("nonempty buffer can be updated");
                (vec![a, u], e)
            } else {
                (vec![a], d)
            }
        })
        .collect()
}

fn explore_bounded(
    program: &ConcurrentProgram,
    bound: usize,
    goal: impl Fn(&TsoConfig) -> bool,
    max_nodes: usize,
) -> Result<(Exploration<TsoConfig, Vec<TsoAction>>, bool), ExploreError> {
    let pruned = Cell::new(false);
    let ex = bfs(
        initial_tso_config(program),
        |c| bounded_successors(c, program, bound, &pruned),
        |_| true,
        goal,
        max_nodes,
    )?;
    Ok((ex, pruned.get()))
}

/// Breadth-first search for `target` (with empty buffers) over
/// configurations whose buffers never exceed `bound` messages.
pub fn tso_bounded_reach(
    program: &ConcurrentProgram,
    bound: usize,
    target: &[StateId],
    max_nodes: usize,
) -> Result<BoundedVerdict<TsoAction>, ExploreError> {
    tso_bounded_search(program, bound, target, max_nodes).map(|s| s.verdict)
}

/// [`tso_bounded_reach`] together with the number of visited configurations.
pub fn tso_bounded_search(
    program: &ConcurrentProgram,
    bound: usize,
    target: &[StateId],
    max_nodes: usize,
) -> Result<BoundedSearch<TsoAction>, ExploreError> {
    let (ex, pruned) = explore_bounded(program, bound, |c| c.buffers_empty() && c.states == target, max_nodes)?;
    let verdict = match ex.goal {
        Some(g) => BoundedVerdict::Reachable(ex.path_to(g).into_iter().flatten().collect()),
        None if pruned => BoundedVerdict::BoundExceeded,
        None => BoundedVerdict::SafeWithinBound,
    };
    Ok(BoundedSearch {
        verdict,
        nodes: ex.nodes.len(),
    })
}

/// Global states reachable with all buffers empty, exploring only
/// configurations whose buffers hold at most `bound` messages.
pub fn tso_reachable_empty_buffer_states(
    program: &ConcurrentProgram,
    bound: usize,
    max_nodes: usize,
) -> Result<BTreeSet<Vec<StateId>>, ExploreError> {
    let (ex, _) = explore_bounded(program, bound, |_| false, max_nodes)?;
    Ok(ex
        .nodes
        .into_iter()
        .filter(|c| c.buffers_empty())
        .map(|c| c.states)
        .collect())
}
