//! Translations between complete TSO and Dual TSO runs.
//!
//! Both directions split the source run into phases delimited by memory
//! updates and replay each process's moves inside a phase in process-ID
//! order. The bookkeeping tables are exposed so they can be inspected and
//! tested on their own; the produced runs are always checked by replay.

use thiserror::Error;

use crate::dtso::{dtso_replay, DtsoAction, DtsoConfig, DtsoMsg, DtsoRun};
use crate::program::{ConcurrentProgram, MemoryOp, ProcId, Transition};
use crate::run::ReplayError;
use crate::tso::{tso_replay, TsoAction, TsoConfig, TsoMsg, TsoRun};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TranslateError {
    #[error("the source run does not end with empty buffers")]
    NotDrained,
    #[error("the source run is malformed: {0}")]
    Malformed(String),
    #[error("the translated run does not replay: {0}")]
    Replay(#[from] ReplayError),
}

fn transition(program: &ConcurrentProgram, proc: ProcId, index: usize) -> Result<&Transition, TranslateError> {
    program
        .processes
        .get(proc)
        .and_then(|a| a.transitions.get(index))
        .ok_or_else(|| TranslateError::Malformed(format!("process {proc} has no transition {index}")))
}

/// Bookkeeping for the Dual TSO to TSO direction. Step indices are 1-based
/// as in `c_0 -t_1-> c_1 ...`; phase `r` runs between the `r`-th and
/// `(r+1)`-th memory-changing step.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DtsoTables {
    /// `writes[r - 1]` is the step index `i_r` of the `r`-th write or
    /// atomic read-write.
    pub writes: Vec<usize>,
    /// `index[j][p]`: for each message of `p`'s buffer in `c_j` (newest
    /// first), the phase at which it entered the buffer.
    pub index: Vec<Vec<Vec<usize>>>,
    /// `view[p][j]`: the phase whose memory process `p` observes in `c_j`.
    pub view: Vec<Vec<usize>>,
    /// `alpha[r][p][l]`: the step index of `p`'s `l`-th move in phase `r`;
    /// entry 0 is the point where the phase starts for `p`.
    pub alpha: Vec<Vec<Vec<usize>>>,
}

impl DtsoTables {
    /// Phase count minus one (`k`).
    pub fn last_phase(&self) -> usize {
        self.writes.len()
    }

    /// Number of moves of `p` in phase `r`.
    pub fn sharp(&self, r: usize, p: ProcId) -> usize {
        self.alpha[r][p].len() - 1
    }

    /// `i_r`, with `i_0 = 0`.
    fn i(&self, r: usize) -> usize {
        if r == 0 {
            0
        } else {
            self.writes[r - 1]
        }
    }

    /// The largest phase `r` with `i_r <= j`.
    fn phase_at(&self, j: usize) -> usize {
        self.writes.partition_point(|&i| i <= j)
    }
}

fn is_memory_write(t: &Transition) -> bool {
    matches!(t.op, MemoryOp::Write(..) | MemoryOp::Arw(..))
}

/// Computes the index, view and scheduling tables of a Dual TSO run.
pub fn compute_index_view(program: &ConcurrentProgram, run: &DtsoRun) -> Result<DtsoTables, TranslateError> {
    let n = run.actions.len();
    let procs = program.process_count();
    let mut writes = Vec::new();
    for (j, a) in run.actions.iter().enumerate() {
        if let DtsoAction::Trans { proc, transition: ti } = *a {
            if is_memory_write(transition(program, proc, ti)?) {
                writes.push(j + 1);
            }
        }
    }
    let mut tables = DtsoTables {
        writes,
        index: Vec::with_capacity(n + 1),
        view: vec![Vec::new(); procs],
        alpha: Vec::new(),
    };
    let mut index = vec![Vec::new(); procs];
    tables.index.push(index.clone());
    for (j, a) in run.actions.iter().enumerate() {
        let step = j + 1;
        match *a {
            DtsoAction::Trans { proc, transition: ti } => {
                if let MemoryOp::Write(..) = transition(program, proc, ti)?.op {
                    index[proc].insert(0, tables.phase_at(step));
                }
            }
            DtsoAction::Propagate { proc, .. } => index[proc].insert(0, tables.phase_at(step)),
            DtsoAction::Delete { proc } => {
                index[proc]
                    .pop()
                    .ok_or_else(|| TranslateError::Malformed(format!("step {step} deletes from an empty buffer")))?;
            }
        }
        tables.index.push(index.clone());
    }
    for p in 0..procs {
        tables.view[p] = (0..=n)
            .map(|j| match tables.index[j][p].last() {
                Some(&r) => r,
                None => tables.phase_at(j),
            })
            .collect();
    }
    let k = tables.last_phase();
    for r in 0..=k {
        let mut row = Vec::with_capacity(procs);
        for p in 0..procs {
            let start = match (0..=n).find(|&j| tables.view[p][j] == r) {
                Some(j) => j,
                None => {
                    let prev: &Vec<usize> = &tables.alpha[r - 1][p];
                    *prev.last().expect("alpha rows are nonempty")
                }
            };
            let mut moves = vec![start];
            for j in start + 1..=n {
                if tables.view[p][j] == r && matches!(run.actions[j - 1], DtsoAction::Trans { proc, .. } if proc == p) {
                    moves.push(j);
                }
            }
            row.push(moves);
        }
        tables.alpha.push(row);
    }
    Ok(tables)
}

/// The store-buffer image of a load buffer: the oldest message is dropped
/// (its write already reached memory in the current phase) and only own
/// messages are kept.
pub fn tso_image(buf: &[DtsoMsg]) -> Vec<TsoMsg> {
    match buf.split_last() {
        None => Vec::new(),
        Some((_, rest)) => rest
            .iter()
            .filter(|m| m.own)
            .map(|m| TsoMsg { var: m.var, val: m.val })
            .collect(),
    }
}

/// The TSO configuration reached after `p`'s `l`-th move in phase `r`.
/// Processes before `p` have finished the phase; those after it have not
/// started.
pub fn phase_config(run: &DtsoRun, tables: &DtsoTables, r: usize, p: ProcId, l: usize) -> TsoConfig {
    let procs = run.configs[0].process_count();
    let at = |q: ProcId| -> &DtsoConfig {
        let row = &tables.alpha[r][q];
        let j = if q < p {
            *row.last().expect("alpha rows are nonempty")
        } else if q > p {
            row[0]
        } else {
            row[l]
        };
        &run.configs[j]
    };
    TsoConfig {
        states: (0..procs).map(|q| at(q).states[q]).collect(),
        buffers: (0..procs).map(|q| tso_image(&at(q).buffers[q])).collect(),
        mem: run.configs[tables.i(r)].mem.clone(),
    }
}

/// Builds a TSO run with the same memory updates and final global state as
/// a complete Dual TSO run.
pub fn dtso_to_tso(program: &ConcurrentProgram, run: &DtsoRun) -> Result<TsoRun, TranslateError> {
    if !run.last().buffers_empty() {
        return Err(TranslateError::NotDrained);
    }
    let tables = compute_index_view(program, run)?;
    let k = tables.last_phase();
    let mut out = Vec::new();
    for r in 0..=k {
        for p in 0..program.process_count() {
            for &j in &tables.alpha[r][p][1..] {
                if let DtsoAction::Trans { proc, transition } = run.actions[j - 1] {
                    out.push(TsoAction::Trans { proc, transition });
                }
            }
        }
        if r < k {
            let j = tables.writes[r];
            let DtsoAction::Trans { proc, transition: ti } = run.actions[j - 1] else {
                unreachable!("phase boundaries are transitions")
            };
            match transition(program, proc, ti)?.op {
                MemoryOp::Arw(..) => out.push(TsoAction::Trans { proc, transition: ti }),
                _ => {
                    if run.configs[j - 1].buffers[proc].is_empty() {
                        out.push(TsoAction::Trans { proc, transition: ti });
                    }
                    out.push(TsoAction::Update { proc });
                }
            }
        }
    }
    Ok(tso_replay(program, &out)?)
}

/// Bookkeeping for the TSO to Dual TSO direction. Fences are treated like
/// atomic read-writes: they appear both among the updates and the writes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TsoTables {
    /// Step indices `i_1 < ... < i_m` of updates, atomic read-writes and fences.
    pub updates: Vec<usize>,
    /// Step indices of writes, atomic read-writes and fences.
    pub writes: Vec<usize>,
    /// `matching[j]` is the write matched with update step `j`.
    pub matching: Vec<Option<usize>>,
    /// `label[j]`: the load-buffer message the Dual TSO run needs for step `j`.
    pub label: Vec<Option<DtsoMsg>>,
    /// `pos[r + 1][p]`: the last step of `p` simulated by the end of phase `r`.
    pub pos: Vec<Vec<usize>>,
    /// `owner[j]`: process performing step `j`.
    pub owner: Vec<ProcId>,
}

impl TsoTables {
    pub fn pos(&self, r: isize, p: ProcId) -> usize {
        self.pos[(r + 1) as usize][p]
    }
}

fn is_barrier(op: MemoryOp) -> bool {
    matches!(op, MemoryOp::Arw(..) | MemoryOp::Fence)
}

/// Computes the match, label and pos tables of a TSO run.
pub fn compute_match_label_pos(program: &ConcurrentProgram, run: &TsoRun) -> Result<TsoTables, TranslateError> {
    let n = run.actions.len();
    let procs = program.process_count();
    let mut t = TsoTables {
        updates: Vec::new(),
        writes: Vec::new(),
        matching: vec![None; n + 1],
        label: vec![None; n + 1],
        pos: vec![vec![0; procs]],
        owner: vec![0; n + 1],
    };
    let mut pending: Vec<std::collections::VecDeque<usize>> = vec![Default::default(); procs];
    for (j0, a) in run.actions.iter().enumerate() {
        let j = j0 + 1;
        t.owner[j] = a.proc();
        match *a {
            TsoAction::Update { proc } => {
                let w = pending[proc]
                    .pop_front()
                    .ok_or_else(|| TranslateError::Malformed(format!("step {j} updates an empty buffer")))?;
                t.updates.push(j);
                t.matching[j] = Some(w);
                let TsoAction::Trans { transition: ti, .. } = run.actions[w - 1] else {
                    unreachable!()
                };
                if let MemoryOp::Write(x, v) = transition(program, proc, ti)?.op {
                    t.label[j] = Some(DtsoMsg::own(x, v));
                }
            }
            TsoAction::Trans { proc, transition: ti } => match transition(program, proc, ti)?.op {
                MemoryOp::Write(..) => {
                    t.writes.push(j);
                    pending[proc].push_back(j);
                }
                op if is_barrier(op) => {
                    t.writes.push(j);
                    t.updates.push(j);
                    t.matching[j] = Some(j);
                }
                MemoryOp::Read(x, v) if !run.configs[j - 1].buffers[proc].iter().any(|m| m.var == x) => {
                    t.label[j] = Some(DtsoMsg::plain(x, v));
                }
                _ => {}
            },
        }
    }
    for &u in &t.updates {
        let mut row = t.pos.last().expect("nonempty").clone();
        row[t.owner[u]] = t.matching[u].expect("updates are matched");
        t.pos.push(row);
    }
    Ok(t)
}

/// Builds a Dual TSO run reaching the same final global state as a complete
/// TSO run.
pub fn tso_to_dtso(program: &ConcurrentProgram, run: &TsoRun) -> Result<DtsoRun, TranslateError> {
    if !run.last().buffers_empty() {
        return Err(TranslateError::NotDrained);
    }
    let t = compute_match_label_pos(program, run)?;
    let n = run.actions.len();
    let m = t.updates.len();
    let procs = program.process_count();
    let mut out = Vec::new();
    let i = |r: usize| if r == 0 { 0 } else { t.updates[r - 1] };
    let propagate = |out: &mut Vec<DtsoAction>, lo: usize, hi: usize| {
        for p in 0..procs {
            for j in lo + 1..hi {
                if let Some(msg) = t.label[j].filter(|l| !l.own && t.owner[j] == p) {
                    out.push(DtsoAction::Propagate { proc: p, var: msg.var });
                }
            }
        }
    };
    // Replays the steps of `p` in `(from, to]`; `native` is the step that is
    // emitted as is because it changes memory in the Dual TSO run.
    let simulate = |out: &mut Vec<DtsoAction>, p: ProcId, from: usize, to: usize, native: Option<usize>| {
        for j in from + 1..=to {
            if t.owner[j] != p {
                continue;
            }
            match run.actions[j - 1] {
                TsoAction::Update { proc } => out.push(DtsoAction::Delete { proc }),
                TsoAction::Trans { proc, transition } => {
                    out.push(DtsoAction::Trans { proc, transition });
                    if Some(j) != native && t.label[j].is_some_and(|l| !l.own) {
                        out.push(DtsoAction::Delete { proc });
                    }
                }
            }
        }
    };
    for r in 0..m {
        propagate(&mut out, i(r), i(r + 1));
        let u = t.updates[r];
        let p = t.owner[u];
        let target = t.matching[u].expect("updates are matched");
        simulate(&mut out, p, t.pos(r as isize - 1, p), target, Some(target));
    }
    propagate(&mut out, i(m), n + 1);
    for p in 0..procs {
        simulate(&mut out, p, t.pos(m as isize - 1, p), n, None);
    }
    Ok(dtso_replay(program, &out)?)
}
