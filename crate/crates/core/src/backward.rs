//! Backward reachability for fixed-size programs under Dual TSO.
//!
//! Upward-closed sets of configurations are kept as minor sets. Starting from
//! the target configurations, the engine repeatedly adds minimal
//! predecessors until a minor covers the initial configuration or nothing
//! new appears.

use std::collections::{HashSet, VecDeque};

use thiserror::Error;

use crate::dtso::{dtso_replay, dtso_step, DtsoAction, DtsoConfig, DtsoMsg, DtsoRun};
use crate::ordering::{param_leq_along, FixedOrder, InsertOutcome, MinorSet, Quasi};
use crate::program::{Automaton, ConcurrentProgram, MemoryOp, StateId, Value, VarId};
use crate::run::ReplayError;

/// Default cap on generated candidate configurations.
pub const DEFAULT_MAX_NODES: u64 = 10_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BackwardOptions {
    /// Abort once this many candidates have been generated.
    pub max_nodes: u64,
}

impl Default for BackwardOptions {
    fn default() -> Self {
        BackwardOptions {
            max_nodes: DEFAULT_MAX_NODES,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
pub enum EngineError {
    #[error("resource limit: more than {0} configurations generated")]
    NodeLimit(u64),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Reachable,
    Unreachable,
}

/// One backward step: the predecessor performs `action` (process indices
/// refer to the predecessor). `inserted` names a process that exists only
/// in the predecessor, which happens in parameterized mode.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Step {
    pub action: DtsoAction,
    pub inserted: Option<usize>,
}

/// An abstract witness: `configs[0]` covers the initial configuration,
/// the last element is a target minor, and `configs[i]` performing
/// `steps[i]` reaches a configuration above `configs[i + 1]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WitnessChain {
    pub configs: Vec<DtsoConfig>,
    pub steps: Vec<Step>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BackwardStats {
    pub verdict: Verdict,
    /// Every candidate produced by minpre, counted before subsumption.
    pub configs_generated: u64,
    /// Minors taken off the worklist.
    pub iterations: u64,
    pub frontier_peak: usize,
    /// Size of the minor set when the search stopped.
    pub minors: usize,
    pub witness: Option<WitnessChain>,
}

/// Predecessor of a single process: new local state, buffer and, for memory
/// rewinds, memory.
#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) struct LocalPre {
    pub action: LocalAction,
    pub state: StateId,
    pub buffer: Vec<DtsoMsg>,
    pub mem: Option<Vec<Value>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum LocalAction {
    Trans(usize),
    Propagate(VarId),
    Delete,
}

impl LocalAction {
    pub(crate) fn for_proc(self, proc: usize) -> DtsoAction {
        match self {
            LocalAction::Trans(transition) => DtsoAction::Trans { proc, transition },
            LocalAction::Propagate(var) => DtsoAction::Propagate { proc, var },
            LocalAction::Delete => DtsoAction::Delete { proc },
        }
    }
}

fn with_var(mem: &[Value], x: VarId, v: Value) -> Vec<Value> {
    let mut m = mem.to_vec();
    m[x.0 as usize] = v;
    m
}

/// Minimal predecessors of one process with local state `state`, buffer
/// `buf` and global memory `mem`, one case per kind of step.
pub(crate) fn local_predecessors(
    aut: &Automaton,
    values: &[Value],
    var_count: usize,
    state: StateId,
    buf: &[DtsoMsg],
    mem: &[Value],
) -> Vec<LocalPre> {
    let mut out = Vec::new();
    let vars = (0..var_count).map(|i| VarId(i as u16));
    let has_own = |x: VarId| buf.iter().any(|m| m.own && m.var == x);
    for (ti, t) in aut.transitions.iter().enumerate() {
        if t.to != state {
            continue;
        }
        let action = LocalAction::Trans(ti);
        let pre = |buffer: Vec<DtsoMsg>, mem: Option<Vec<Value>>| LocalPre {
            action,
            state: t.from,
            buffer,
            mem,
        };
        match t.op {
            MemoryOp::Nop => out.push(pre(buf.to_vec(), None)),
            MemoryOp::Write(x, v) => {
                if buf.first() != Some(&DtsoMsg::own(x, v)) || mem[x.0 as usize] != v {
                    continue;
                }
                let w = &buf[1..];
                let first_own = w.iter().position(|m| m.own && m.var == x).unwrap_or(w.len());
                for &prior in values {
                    let m = with_var(mem, x, prior);
                    out.push(pre(w.to_vec(), Some(m.clone())));
                    // The write may hide an older own x-message that was the
                    // delimiter before it.
                    for pos in 0..=first_own {
                        for &hidden in values {
                            let mut b = w.to_vec();
                            b.insert(pos, DtsoMsg::own(x, hidden));
                            out.push(pre(b, Some(m.clone())));
                        }
                    }
                }
            }
            MemoryOp::Read(x, v) => match buf.iter().find(|m| m.own && m.var == x) {
                Some(m) if m.val == v => out.push(pre(buf.to_vec(), None)),
                Some(_) => {}
                None if buf.last() == Some(&DtsoMsg::plain(x, v)) => out.push(pre(buf.to_vec(), None)),
                None => {
                    let mut b = buf.to_vec();
                    b.push(DtsoMsg::plain(x, v));
                    out.push(pre(b, None));
                }
            },
            MemoryOp::Fence => {
                if buf.is_empty() {
                    out.push(pre(Vec::new(), None));
                }
            }
            MemoryOp::Arw(x, v, w) => {
                if buf.is_empty() && mem[x.0 as usize] == w {
                    out.push(pre(Vec::new(), Some(with_var(mem, x, v))));
                }
            }
        }
    }
    for x in vars.clone() {
        if buf.first() == Some(&DtsoMsg::plain(x, mem[x.0 as usize])) {
            out.push(LocalPre {
                action: LocalAction::Propagate(x),
                state,
                buffer: buf[1..].to_vec(),
                mem: None,
            });
        }
    }
    for x in vars {
        if has_own(x) {
            continue;
        }
        for &v in values {
            let mut b = buf.to_vec();
            b.push(DtsoMsg::own(x, v));
            out.push(LocalPre {
                action: LocalAction::Delete,
                state,
                buffer: b,
                mem: None,
            });
        }
    }
    out
}

/// Replaces process `p`'s component of `c` by a local predecessor.
pub(crate) fn apply_local(c: &DtsoConfig, p: usize, pre: LocalPre) -> DtsoConfig {
    let mut d = c.clone();
    d.states[p] = pre.state;
    d.buffers[p] = pre.buffer;
    if let Some(m) = pre.mem {
        d.mem = m;
    }
    d
}

/// All minimal one-step predecessors of `c`, with the step producing each.
pub fn predecessors(c: &DtsoConfig, program: &ConcurrentProgram) -> Vec<(Step, DtsoConfig)> {
    let d = &program.domain;
    let mut out = Vec::new();
    for (p, aut) in program.processes.iter().enumerate() {
        for pre in local_predecessors(aut, &d.values, d.var_count(), c.states[p], &c.buffers[p], &c.mem) {
            let step = Step {
                action: pre.action.for_proc(p),
                inserted: None,
            };
            out.push((step, apply_local(c, p, pre)));
        }
    }
    out
}

/// `min` of the predecessors of `c` together with `c` itself.
pub fn minpre_config(c: &DtsoConfig, program: &ConcurrentProgram) -> MinorSet<FixedOrder> {
    let mut set = MinorSet::new();
    set.insert(c.clone());
    for (_, d) in predecessors(c, program) {
        set.insert(d);
    }
    set
}

/// One configuration per memory valuation, with the target states and
/// empty buffers.
pub fn target_to_minors(program: &ConcurrentProgram, target: &[StateId]) -> MinorSet<FixedOrder> {
    let mut set = MinorSet::new();
    for mem in program.domain.all_memories() {
        set.insert(DtsoConfig {
            states: target.to_vec(),
            buffers: vec![Vec::new(); program.process_count()],
            mem,
        });
    }
    set
}

/// Whether `c` lies below the initial configuration (which makes them
/// equal: initial states, empty buffers, zero memory).
pub fn covers_initial(c: &DtsoConfig, program: &ConcurrentProgram) -> bool {
    c.states == program.init_states() && c.buffers_empty() && c.mem.iter().all(|v| v.0 == 0)
}

/// Static over-approximation of reachable configurations. A configuration
/// outside it has an unreachable upward closure, so the engine may drop it.
///
/// A process can only hold `(x, v, own)` if it executed `w(x, v)` on some
/// path to its current local state, and memory or plain messages can only
/// carry 0 or a value some transition stores.
#[derive(Debug, Clone)]
pub struct Pruner {
    stored: HashSet<(VarId, Value)>,
    /// Per process, per local state: `None` if the state is unreachable in
    /// the automaton, otherwise the own-messages it may hold.
    own: Vec<Vec<Option<OwnSet>>>,
}

type OwnSet = HashSet<(VarId, Value)>;

fn own_sets(aut: &Automaton) -> Vec<Option<OwnSet>> {
    let mut sets: Vec<Option<OwnSet>> = vec![None; aut.states.len()];
    sets[aut.init.0 as usize] = Some(HashSet::new());
    let mut changed = true;
    while changed {
        changed = false;
        for t in &aut.transitions {
            let Some(mut add) = sets[t.from.0 as usize].clone() else {
                continue;
            };
            if let MemoryOp::Write(x, v) = t.op {
                add.insert((x, v));
            }
            match &mut sets[t.to.0 as usize] {
                Some(to) => {
                    let before = to.len();
                    to.extend(add);
                    changed |= to.len() != before;
                }
                slot @ None => {
                    *slot = Some(add);
                    changed = true;
                }
            }
        }
    }
    sets
}

impl Pruner {
    pub fn new<'a>(domain: &crate::program::Domain, automata: impl IntoIterator<Item = &'a Automaton>) -> Self {
        let automata: Vec<&Automaton> = automata.into_iter().collect();
        let mut stored: HashSet<(VarId, Value)> = domain.vars().map(|x| (x, Value(0))).collect();
        for a in &automata {
            for t in &a.transitions {
                match t.op {
                    MemoryOp::Write(x, v) | MemoryOp::Arw(x, _, v) => {
                        stored.insert((x, v));
                    }
                    _ => {}
                }
            }
        }
        Pruner {
            stored,
            own: automata.iter().map(|a| own_sets(a)).collect(),
        }
    }

    pub fn for_program(program: &ConcurrentProgram) -> Self {
        Pruner::new(&program.domain, &program.processes)
    }

    /// Whether process component `(state, buf)` of automaton `proc` and the
    /// memory may be reachable.
    fn admits_proc(&self, proc: usize, state: StateId, buf: &[DtsoMsg]) -> bool {
        let Some(own) = &self.own[proc][state.0 as usize] else {
            return false;
        };
        buf.iter().all(|m| {
            if m.own {
                own.contains(&(m.var, m.val))
            } else {
                self.stored.contains(&(m.var, m.val))
            }
        })
    }

    /// Whether automaton `proc` may hold `(x, v, own)` in local state `state`.
    pub fn may_own(&self, proc: usize, state: StateId, x: VarId, v: Value) -> bool {
        self.own[proc][state.0 as usize]
            .as_ref()
            .is_some_and(|s| s.contains(&(x, v)))
    }

    fn admits_mem(&self, mem: &[Value]) -> bool {
        mem.iter()
            .enumerate()
            .all(|(i, &v)| self.stored.contains(&(VarId(i as u16), v)))
    }

    pub fn admits(&self, c: &DtsoConfig) -> bool {
        self.admits_mem(&c.mem) && (0..c.process_count()).all(|p| self.admits_proc(p, c.states[p], &c.buffers[p]))
    }

    /// Like [`Pruner::admits`] when every process runs automaton 0.
    pub fn admits_uniform(&self, c: &DtsoConfig) -> bool {
        self.admits_mem(&c.mem) && (0..c.process_count()).all(|p| self.admits_proc(0, c.states[p], &c.buffers[p]))
    }
}

/// The backward fixpoint shared by the fixed-size and parameterized engines.
pub(crate) fn run_engine<O: Quasi>(
    targets: MinorSet<O>,
    mut pre: impl FnMut(&DtsoConfig) -> Vec<(Step, DtsoConfig)>,
    covers: impl Fn(&DtsoConfig) -> bool,
    admits: impl Fn(&DtsoConfig) -> bool,
    opts: &BackwardOptions,
) -> Result<(BackwardStats, MinorSet<O>), EngineError> {
    let mut minors: MinorSet<O> = MinorSet::new();
    let mut parent: Vec<Option<(usize, Step)>> = Vec::new();
    let mut queue = VecDeque::new();
    let mut stats = BackwardStats {
        verdict: Verdict::Unreachable,
        configs_generated: 0,
        iterations: 0,
        frontier_peak: 0,
        minors: 0,
        witness: None,
    };
    let chain = |minors: &MinorSet<O>, parent: &[Option<(usize, Step)>], mut id: usize| {
        let mut configs = vec![minors.get(crate::ordering::ElemId(id)).clone()];
        let mut steps = Vec::new();
        while let Some((p, s)) = parent[id] {
            steps.push(s);
            configs.push(minors.get(crate::ordering::ElemId(p)).clone());
            id = p;
        }
        WitnessChain { configs, steps }
    };
    for t in targets.configs().into_iter().filter(|t| admits(t)) {
        stats.configs_generated += 1;
        if let InsertOutcome::Inserted { id, .. } = minors.insert(t) {
            parent.push(None);
            if covers(minors.get(id)) {
                stats.verdict = Verdict::Reachable;
                stats.witness = Some(chain(&minors, &parent, id.0));
                stats.minors = minors.len();
                return Ok((stats, minors));
            }
            queue.push_back(id);
        }
    }
    stats.frontier_peak = queue.len();
    while let Some(id) = queue.pop_front() {
        if !minors.is_live(id) {
            continue;
        }
        stats.iterations += 1;
        let c = minors.get(id).clone();
        for (step, d) in pre(&c) {
            if !admits(&d) {
                continue;
            }
            stats.configs_generated += 1;
            if stats.configs_generated > opts.max_nodes {
                return Err(EngineError::NodeLimit(opts.max_nodes));
            }
            if let InsertOutcome::Inserted { id: new, .. } = minors.insert(d) {
                parent.push(Some((id.0, step)));
                if covers(minors.get(new)) {
                    stats.verdict = Verdict::Reachable;
                    stats.witness = Some(chain(&minors, &parent, new.0));
                    stats.minors = minors.len();
                    return Ok((stats, minors));
                }
                queue.push_back(new);
            }
        }
        stats.frontier_peak = stats.frontier_peak.max(queue.len());
    }
    stats.minors = minors.len();
    Ok((stats, minors))
}

/// Decides whether `target` (with empty buffers) is reachable.
pub fn backward_reach(program: &ConcurrentProgram, target: &[StateId]) -> Result<BackwardStats, EngineError> {
    backward_reach_with(program, target, &BackwardOptions::default()).map(|(s, _)| s)
}

/// Like [`backward_reach`], also returning the final minor set.
pub fn backward_reach_with(
    program: &ConcurrentProgram,
    target: &[StateId],
    opts: &BackwardOptions,
) -> Result<(BackwardStats, MinorSet<FixedOrder>), EngineError> {
    let pruner = Pruner::for_program(program);
    run_engine(
        target_to_minors(program, target),
        |c| predecessors(c, program),
        |c| covers_initial(c, program),
        |c| pruner.admits(c),
        opts,
    )
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum WitnessError {
    #[error("witness step {step} could not be realised")]
    Stuck { step: usize },
    #[error("witness does not start at an initial configuration")]
    NotInitial,
    #[error(transparent)]
    Replay(#[from] ReplayError),
}

/// Turns an abstract witness into a concrete DTSO run of `program` that ends
/// with empty buffers in the chain's final global state. Before each step
/// the acting process may first drop messages from its buffer.
pub fn concretize_chain(program: &ConcurrentProgram, chain: &WitnessChain) -> Result<DtsoRun, WitnessError> {
    let first = chain.configs.first().ok_or(WitnessError::NotInitial)?;
    if first.process_count() != program.process_count() || !covers_initial(first, program) {
        return Err(WitnessError::NotInitial);
    }
    let mut d = first.clone();
    let mut map: Vec<usize> = (0..first.process_count()).collect();
    let mut actions = Vec::new();
    for (i, step) in chain.steps.iter().enumerate() {
        let next = &chain.configs[i + 1];
        let mut next_map = map.clone();
        if let Some(k) = step.inserted {
            next_map.remove(k);
        }
        if param_leq_along(next, &d, &next_map) {
            map = next_map;
            continue;
        }
        let p = map[step.action.proc()];
        let a = step.action.with_proc(p);
        let mut e = d.clone();
        let mut drops = 0;
        let found = loop {
            if let Some(f) = dtso_step(&e, program, &a) {
                if param_leq_along(next, &f, &next_map) {
                    break Some(f);
                }
            }
            if e.buffers[p].is_empty() {
                break None;
            }
            e.buffers[p].pop();
            drops += 1;
        };
        let f = found.ok_or(WitnessError::Stuck { step: i + 1 })?;
        actions.extend(std::iter::repeat_n(DtsoAction::Delete { proc: p }, drops));
        actions.push(a);
        d = f;
        map = next_map;
    }
    for (p, b) in d.buffers.iter().enumerate() {
        actions.extend(std::iter::repeat_n(DtsoAction::Delete { proc: p }, b.len()));
    }
    Ok(dtso_replay(program, &actions)?)
}
