//! Backward reachability for parameterized programs: any number of copies of
//! one template, ordered by the embedding `⊴`.
//!
//! Predecessors come in two flavours. Each existing process can step back
//! exactly as in the fixed-size engine, and a memory-changing step (a write
//! or an atomic read-write) may also have been taken by a process that is
//! not present in the successor because the embedding dropped it. Such a
//! process is inserted at every position of the process sequence.

use crate::backward::{
    concretize_chain, local_predecessors, run_engine, BackwardOptions, BackwardStats, EngineError, Pruner, Step,
    WitnessChain, WitnessError,
};
use crate::dtso::{DtsoAction, DtsoMsg, DtsoRun, ParamConfig};
use crate::ordering::{MinorSet, ParamOrder};
use crate::program::{ConcurrentProgram, MemoryOp, ParamProgram, StateId, Value, VarId};

/// One minimal configuration per memory valuation: the target states in
/// the listed order, with empty buffers.
pub fn param_target_to_minors(program: &ParamProgram, target: &[StateId]) -> MinorSet<ParamOrder> {
    let mut set = MinorSet::new();
    for mem in program.domain.all_memories() {
        set.insert(ParamConfig {
            states: target.to_vec(),
            buffers: vec![Vec::new(); target.len()],
            mem,
        });
    }
    set
}

/// Whether `a` embeds into the initial configuration of some instance.
pub fn param_covers_initial(a: &ParamConfig, program: &ParamProgram) -> bool {
    a.states.iter().all(|&s| s == program.template.init) && a.buffers_empty() && a.mem.iter().all(|v| v.0 == 0)
}

/// Every sequence of own-messages over pairwise distinct variables whose
/// messages satisfy `allowed`, in every order.
pub fn own_sequences(var_count: usize, values: &[Value], allowed: impl Fn(VarId, Value) -> bool) -> Vec<Vec<DtsoMsg>> {
    fn extend(
        cur: &mut Vec<DtsoMsg>,
        used: u64,
        var_count: usize,
        values: &[Value],
        allowed: &dyn Fn(VarId, Value) -> bool,
        out: &mut Vec<Vec<DtsoMsg>>,
    ) {
        out.push(cur.clone());
        for x in 0..var_count {
            if used & (1 << x) != 0 {
                continue;
            }
            let var = VarId(x as u16);
            for &v in values.iter().filter(|&&v| allowed(var, v)) {
                cur.push(DtsoMsg::own(var, v));
                extend(cur, used | (1 << x), var_count, values, allowed, out);
                cur.pop();
            }
        }
    }
    let mut out = Vec::new();
    extend(&mut Vec::new(), 0, var_count, values, &allowed, &mut out);
    out
}

fn insert_proc(a: &ParamConfig, pos: usize, state: StateId, buffer: Vec<DtsoMsg>, mem: Vec<Value>) -> ParamConfig {
    let mut c = a.clone();
    c.states.insert(pos, state);
    c.buffers.insert(pos, buffer);
    c.mem = mem;
    c
}

/// Predecessors of `a`, drawing the buffers of inserted writers from
/// `fresh(state)`.
fn predecessors_with<'f>(
    a: &ParamConfig,
    program: &ParamProgram,
    fresh: impl Fn(StateId) -> &'f [Vec<DtsoMsg>],
) -> Vec<(Step, ParamConfig)> {
    let d = &program.domain;
    let aut = &program.template;
    let mut out = Vec::new();
    for p in 0..a.process_count() {
        for pre in local_predecessors(aut, &d.values, d.var_count(), a.states[p], &a.buffers[p], &a.mem) {
            let step = Step {
                action: pre.action.for_proc(p),
                inserted: None,
            };
            out.push((step, crate::backward::apply_local(a, p, pre)));
        }
    }
    for (transition, t) in aut.transitions.iter().enumerate() {
        let step = |proc| Step {
            action: DtsoAction::Trans { proc, transition },
            inserted: Some(proc),
        };
        match t.op {
            MemoryOp::Write(x, v) if a.mem[x.0 as usize] == v => {
                for &prior in &d.values {
                    let mut mem = a.mem.clone();
                    mem[x.0 as usize] = prior;
                    for b in fresh(t.from) {
                        for pos in 0..=a.process_count() {
                            out.push((step(pos), insert_proc(a, pos, t.from, b.clone(), mem.clone())));
                        }
                    }
                }
            }
            MemoryOp::Arw(x, v, w) if a.mem[x.0 as usize] == w => {
                let mut mem = a.mem.clone();
                mem[x.0 as usize] = v;
                for pos in 0..=a.process_count() {
                    out.push((step(pos), insert_proc(a, pos, t.from, Vec::new(), mem.clone())));
                }
            }
            _ => {}
        }
    }
    out
}

/// All minimal one-step predecessors of `a` under `⊴`, including those that
/// add a process.
pub fn param_predecessors(a: &ParamConfig, program: &ParamProgram) -> Vec<(Step, ParamConfig)> {
    let all = own_sequences(program.domain.var_count(), &program.domain.values, |_, _| true);
    predecessors_with(a, program, |_| &all)
}

/// `min` of the predecessors of `a` together with `a`.
pub fn param_minpre(a: &ParamConfig, program: &ParamProgram) -> MinorSet<ParamOrder> {
    let mut set = MinorSet::new();
    set.insert(a.clone());
    for (_, d) in param_predecessors(a, program) {
        set.insert(d);
    }
    set
}

/// Decides whether some instance reaches a configuration whose states embed
/// `target` (in order) with all buffers empty.
pub fn param_backward_reach(program: &ParamProgram, target: &[StateId]) -> Result<BackwardStats, EngineError> {
    param_backward_reach_with(program, target, &BackwardOptions::default()).map(|(s, _)| s)
}

pub fn param_backward_reach_with(
    program: &ParamProgram,
    target: &[StateId],
    opts: &BackwardOptions,
) -> Result<(BackwardStats, MinorSet<ParamOrder>), EngineError> {
    let pruner = Pruner::new(&program.domain, [&program.template]);
    let d = &program.domain;
    let fresh: Vec<Vec<Vec<DtsoMsg>>> = (0..program.template.states.len())
        .map(|q| {
            let q = StateId(q as u16);
            own_sequences(d.var_count(), &d.values, |x, v| pruner.may_own(0, q, x, v))
        })
        .collect();
    run_engine(
        param_target_to_minors(program, target),
        |a| predecessors_with(a, program, |q| &fresh[q.0 as usize]),
        |a| param_covers_initial(a, program),
        |a| pruner.admits_uniform(a),
        opts,
    )
}

/// Realises a parameterized witness on the instance whose size is the
/// number of processes in the chain's first configuration.
pub fn concretize_param_chain(
    program: &ParamProgram,
    chain: &WitnessChain,
) -> Result<(ConcurrentProgram, DtsoRun), WitnessError> {
    let n = chain.configs.first().ok_or(WitnessError::NotInitial)?.process_count();
    let instance = program.instance(n);
    let run = concretize_chain(&instance, chain)?;
    Ok((instance, run))
}
