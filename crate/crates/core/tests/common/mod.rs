//! Generators, oracles and checks shared by the property suites and the
//! acceptance harness.

#![allow(dead_code)]

use std::collections::{BTreeSet, HashMap, VecDeque};
use std::ops::RangeInclusive;
use std::path::PathBuf;

use proptest::collection::vec;
use proptest::prelude::*;
use proptest::sample::{select, Index};
use proptest::test_runner::TestCaseError;

use dualmc_core::backward::{backward_reach, minpre_config};
use dualmc_core::dtso::{
    dtso_reachable_empty_buffer_states, dtso_step, dtso_successors, DtsoAction, DtsoConfig, DtsoMsg, ParamConfig,
};
use dualmc_core::ordering::{config_leq, config_leq_unchecked, own_decompose, param_leq, subword, word_leq};
use dualmc_core::param::param_minpre;
use dualmc_core::program::{parse_program, ConcurrentProgram, ParamProgram, Program, StateId, Value, VarId};
use dualmc_core::tso::tso_reachable_empty_buffer_states;

pub fn corpus_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../corpus")
}

pub fn load(name: &str) -> Program {
    let path = corpus_dir().join(name);
    let text = std::fs::read_to_string(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
    parse_program(&text).unwrap_or_else(|e| panic!("{}: {e}", path.display()))
}

pub fn load_fixed(name: &str) -> ConcurrentProgram {
    match load(name) {
        Program::Fixed(p) => p,
        Program::Param(_) => panic!("{name} is parameterized"),
    }
}

pub fn load_param(name: &str) -> ParamProgram {
    match load(name) {
        Program::Param(p) => p,
        Program::Fixed(_) => panic!("{name} is not parameterized"),
    }
}

/// Fixed-size benchmarks with the expected "safe under TSO" answer.
pub const FIXED_TABLE: [(&str, &str, bool); 12] = [
    ("SB", "sb.lit", false),
    ("LB", "lb.lit", true),
    ("WRC", "wrc.lit", true),
    ("ISA2", "isa2.lit", true),
    ("RWC", "rwc.lit", false),
    ("W+RWC", "w+rwc.lit", false),
    ("IRIW", "iriw.lit", true),
    ("MP", "mp.lit", true),
    ("Simple Dekker", "simple-dekker.lit", false),
    ("Dekker", "dekker.lit", false),
    ("Peterson", "peterson.lit", false),
    ("Repeated Peterson", "repeated-peterson.lit", false),
];

/// Parameterized benchmarks with the expected "safe under TSO" answer.
pub const PARAM_TABLE: [(&str, &str, bool); 8] = [
    ("SB", "sb-param.lit", false),
    ("LB", "lb-param.lit", true),
    ("MP", "mp-param.lit", true),
    ("WRC", "wrc-param.lit", true),
    ("ISA2", "isa2-param.lit", true),
    ("RWC", "rwc-param.lit", false),
    ("W+RWC", "w+rwc-param.lit", false),
    ("IRIW", "iriw-param.lit", true),
];

// ---------------------------------------------------------------------------
// Random programs
// ---------------------------------------------------------------------------

/// Size limits for random programs.
#[derive(Debug, Clone)]
pub struct Shape {
    pub procs: RangeInclusive<usize>,
    pub states: usize,
    pub vars: usize,
    /// Maximum number of non-zero values.
    pub values: usize,
    pub transitions: usize,
}

#[derive(Debug, Clone)]
enum Op {
    Nop,
    Read(usize, usize),
    Write(usize, usize),
    Fence,
    Arw(usize, usize, usize),
}

fn op(vars: usize, values: usize) -> impl Strategy<Value = Op> {
    prop_oneof![
        1 => Just(Op::Nop),
        3 => (0..vars, 0..=values).prop_map(|(x, v)| Op::Read(x, v)),
        3 => (0..vars, 0..=values).prop_map(|(x, v)| Op::Write(x, v)),
        1 => Just(Op::Fence),
        1 => (0..vars, 0..=values, 0..=values).prop_map(|(x, v, w)| Op::Arw(x, v, w)),
    ]
}

fn op_text(op: &Op) -> String {
    match *op {
        Op::Nop => "nop".into(),
        Op::Fence => "fence".into(),
        Op::Read(x, v) => format!("r x{x} {v}"),
        Op::Write(x, v) => format!("w x{x} {v}"),
        Op::Arw(x, v, w) => format!("arw x{x} {v} {w}"),
    }
}

type RawProc = Vec<(usize, usize, Op)>;

/// Renders one automaton and returns the states it mentions.
fn automaton_text(name: &str, raw: &RawProc) -> (String, Vec<usize>) {
    let mut text = format!("process {name}\n  init s0\n");
    let mut seen = BTreeSet::new();
    let mut mentioned = BTreeSet::from([0]);
    for (from, to, op) in raw {
        let line = format!("  trans s{from} s{to} {}\n", op_text(op));
        if seen.insert(line.clone()) {
            text.push_str(&line);
            mentioned.extend([*from, *to]);
        }
    }
    text.push_str("end\n");
    (text, mentioned.into_iter().collect())
}

fn header(vars: usize, values: usize) -> String {
    let vars: Vec<String> = (0..vars).map(|x| format!("x{x}")).collect();
    let values: Vec<String> = (0..=values).map(|v| v.to_string()).collect();
    format!("vars {}\nvalues {}\n", vars.join(" "), values.join(" "))
}

/// An arbitrary automaton, or a straight-line one as in litmus tests.
fn raw_proc(shape: &Shape, vars: usize, values: usize) -> impl Strategy<Value = RawProc> {
    let any_graph = vec(
        (0..shape.states, 0..shape.states, op(vars, values)),
        1..=shape.transitions,
    );
    let chain = vec(op(vars, values), 1..shape.states.max(2))
        .prop_map(|ops| ops.into_iter().enumerate().map(|(i, op)| (i, i + 1, op)).collect());
    prop_oneof![any_graph, chain]
}

fn fixed_text(vars: usize, values: usize, procs: &[RawProc], picks: &[Index]) -> String {
    let mut text = header(vars, values);
    let mut target = Vec::new();
    for (i, raw) in procs.iter().enumerate() {
        let (body, mentioned) = automaton_text(&format!("P{i}"), raw);
        text.push_str(&body);
        target.push(format!("P{i}=s{}", picks[i].get(&mentioned)));
    }
    text.push_str(&format!("target {}\n", target.join(" ")));
    text
}

pub fn fixed_program(shape: Shape) -> impl Strategy<Value = ConcurrentProgram> {
    let procs = shape.procs.clone();
    (1..=shape.vars, 1..=shape.values)
        .prop_flat_map(move |(vars, values)| {
            let raw = raw_proc(&shape, vars, values);
            (
                Just((vars, values)),
                vec(raw, procs.clone()),
                vec(any::<Index>(), *procs.end()),
            )
        })
        .prop_map(|((vars, values), procs, picks)| {
            let text = fixed_text(vars, values, &procs, &picks);
            match parse_program(&text) {
                Ok(Program::Fixed(p)) => p,
                other => panic!("generated program is invalid: {other:?}\n{text}"),
            }
        })
}

/// A single template with a target of one or two local states.
pub fn param_program(shape: Shape) -> impl Strategy<Value = ParamProgram> {
    (1..=shape.vars, 1..=shape.values)
        .prop_flat_map(move |(vars, values)| {
            (
                Just((vars, values)),
                raw_proc(&shape, vars, values),
                vec(any::<Index>(), 1..=2),
            )
        })
        .prop_map(|((vars, values), raw, picks)| {
            let (body, mentioned) = automaton_text("T", &raw);
            let target: Vec<String> = picks.iter().map(|i| format!("s{}", i.get(&mentioned))).collect();
            let text = format!("{}{body}ptarget {}\n", header(vars, values), target.join(" "));
            match parse_program(&text) {
                Ok(Program::Param(p)) => p,
                other => panic!("generated template is invalid: {other:?}\n{text}"),
            }
        })
}

/// The shape used by the one-step predecessor oracles.
pub fn small_shape() -> Shape {
    Shape {
        procs: 1..=2,
        states: 3,
        vars: 2,
        values: 2,
        transitions: 4,
    }
}

// ---------------------------------------------------------------------------
// Random words and configurations
// ---------------------------------------------------------------------------

pub fn msg(vars: usize, values: Vec<Value>) -> impl Strategy<Value = DtsoMsg> {
    (0..vars, select(values), any::<bool>()).prop_map(|(x, val, own)| DtsoMsg {
        var: VarId(x as u16),
        val,
        own,
    })
}

pub fn plain_msg(vars: usize, values: Vec<Value>) -> impl Strategy<Value = DtsoMsg> {
    (0..vars, select(values)).prop_map(|(x, v)| DtsoMsg::plain(VarId(x as u16), v))
}

pub fn word(vars: usize, values: Vec<Value>, max_len: usize) -> impl Strategy<Value = Vec<DtsoMsg>> {
    vec(msg(vars, values), 0..=max_len)
}

/// Inserts up to `extra` messages drawn from `m` at random positions.
pub fn pad<S>(w: Vec<DtsoMsg>, extra: usize, m: S) -> impl Strategy<Value = Vec<DtsoMsg>>
where
    S: Strategy<Value = DtsoMsg>,
{
    vec((any::<Index>(), m), 0..=extra).prop_map(move |ins| {
        let mut out = w.clone();
        for (at, m) in ins {
            out.insert(at.index(out.len() + 1), m);
        }
        out
    })
}

fn values_of(p: &ConcurrentProgram) -> Vec<Value> {
    p.domain.values.clone()
}

fn state(count: usize) -> impl Strategy<Value = StateId> {
    (0..count).prop_map(|s| StateId(s as u16))
}

fn memory(vars: usize, values: Vec<Value>) -> impl Strategy<Value = Vec<Value>> {
    vec(select(values), vars..=vars)
}

/// A configuration of `p` with buffers of at most `max_len` messages.
pub fn config(p: &ConcurrentProgram, max_len: usize) -> BoxedStrategy<DtsoConfig> {
    let (n, vars, values) = (p.process_count(), p.domain.var_count(), values_of(p));
    let states: Vec<_> = p.processes.iter().map(|a| state(a.states.len())).collect();
    let buffers = vec(word(vars, values.clone(), max_len), n..=n);
    (states, buffers, memory(vars, values))
        .prop_map(|(states, buffers, mem)| DtsoConfig { states, buffers, mem })
        .boxed()
}

/// A probe close to `c`: each component is kept, padded or redrawn.
pub fn near(p: &ConcurrentProgram, c: &DtsoConfig, max_len: usize) -> BoxedStrategy<DtsoConfig> {
    let (vars, values) = (p.domain.var_count(), values_of(p));
    let states: Vec<_> = p
        .processes
        .iter()
        .zip(&c.states)
        .map(|(a, &s)| prop_oneof![2 => Just(s), 1 => state(a.states.len())])
        .collect();
    let buffers: Vec<_> = c
        .buffers
        .iter()
        .map(|b| {
            let room = max_len.saturating_sub(b.len());
            prop_oneof![
                2 => Just(b.clone()),
                2 => pad(b.clone(), room, msg(vars, values.clone())),
                1 => word(vars, values.clone(), max_len),
            ]
        })
        .collect();
    let mem: Vec<_> = c
        .mem
        .iter()
        .map(|&v| prop_oneof![2 => Just(v), 1 => select(values.clone())])
        .collect();
    (states, buffers, mem)
        .prop_map(|(states, buffers, mem)| DtsoConfig { states, buffers, mem })
        .boxed()
}

/// A parameterized configuration with `procs` processes.
pub fn param_config(p: &ParamProgram, procs: RangeInclusive<usize>, max_len: usize) -> BoxedStrategy<ParamConfig> {
    let (vars, values) = (p.domain.var_count(), p.domain.values.clone());
    let proc = (state(p.template.states.len()), word(vars, values.clone(), max_len));
    (vec(proc, procs), memory(vars, values))
        .prop_map(|(ps, mem)| {
            let (states, buffers) = ps.into_iter().unzip();
            DtsoConfig { states, buffers, mem }
        })
        .boxed()
}

/// A probe for `a` with at most one more process: slots copy (and possibly
/// pad) a process of `a` or are drawn afresh.
pub fn param_near(p: &ParamProgram, a: &ParamConfig, max_len: usize) -> BoxedStrategy<ParamConfig> {
    let (vars, values) = (p.domain.var_count(), p.domain.values.clone());
    let procs: Vec<(StateId, Vec<DtsoMsg>)> = a.states.iter().copied().zip(a.buffers.iter().cloned()).collect();
    let fresh = (state(p.template.states.len()), word(vars, values.clone(), max_len));
    let slot = if procs.is_empty() {
        fresh.boxed()
    } else {
        let vals = values.clone();
        let copied = select(procs).prop_flat_map(move |(s, b)| {
            let room = max_len.saturating_sub(b.len());
            (Just(s), pad(b, room, msg(vars, vals.clone())))
        });
        prop_oneof![3 => copied, 1 => fresh].boxed()
    };
    let mem: Vec<_> = a
        .mem
        .iter()
        .map(|&v| prop_oneof![3 => Just(v), 1 => select(values.clone())])
        .collect();
    (vec(slot, 0..=a.process_count() + 1), mem)
        .prop_map(|(ps, mem)| {
            let (states, buffers) = ps.into_iter().unzip();
            DtsoConfig { states, buffers, mem }
        })
        .boxed()
}

// ---------------------------------------------------------------------------
// Oracles
// ---------------------------------------------------------------------------

/// Subword by trying every selection of positions of `v`.
pub fn subword_oracle<T: PartialEq>(u: &[T], v: &[T]) -> bool {
    (0u32..1 << v.len()).any(|mask| {
        let picked: Vec<&T> = v
            .iter()
            .enumerate()
            .filter(|(i, _)| mask & (1 << i) != 0)
            .map(|(_, m)| m)
            .collect();
        picked.len() == u.len() && picked.iter().zip(u).all(|(a, b)| *a == b)
    })
}

/// Splits `w` at the first (most recent) own-message of each variable.
pub fn decompose_oracle(w: &[DtsoMsg]) -> (Vec<DtsoMsg>, Vec<Vec<DtsoMsg>>) {
    let mut delims = Vec::new();
    let mut frags = vec![Vec::new()];
    for (i, m) in w.iter().enumerate() {
        if m.own && !w[..i].iter().any(|n| n.own && n.var == m.var) {
            delims.push(*m);
            frags.push(Vec::new());
        } else {
            frags.last_mut().unwrap().push(*m);
        }
    }
    (delims, frags)
}

pub fn word_leq_oracle(u: &[DtsoMsg], w: &[DtsoMsg]) -> bool {
    let (du, fu) = decompose_oracle(u);
    let (dw, fw) = decompose_oracle(w);
    du == dw && fu.iter().zip(&fw).all(|(a, b)| subword_oracle(a, b))
}

/// Tries every strictly increasing injection of `a`'s processes into `b`'s.
pub fn param_leq_oracle(a: &ParamConfig, b: &ParamConfig) -> bool {
    fn go(a: &ParamConfig, b: &ParamConfig, i: usize, from: usize) -> bool {
        i == a.process_count()
            || (from..b.process_count()).any(|j| {
                a.states[i] == b.states[j] && word_leq_oracle(&a.buffers[i], &b.buffers[j]) && go(a, b, i + 1, j + 1)
            })
    }
    a.mem == b.mem && go(a, b, 0, 0)
}

/// Every subsequence of `w` that lies below `w` in the buffer ordering.
pub fn buffers_below(w: &[DtsoMsg]) -> Vec<Vec<DtsoMsg>> {
    (0u32..1 << w.len())
        .map(|mask| {
            w.iter()
                .enumerate()
                .filter(|(i, _)| mask & (1 << i) != 0)
                .map(|(_, m)| *m)
                .collect::<Vec<_>>()
        })
        .filter(|sub| word_leq(sub, w))
        .collect()
}

/// The finite downward closure of `d` for a fixed process set.
pub fn configs_below(d: &DtsoConfig) -> Vec<DtsoConfig> {
    let mut out = vec![DtsoConfig {
        states: d.states.clone(),
        buffers: Vec::new(),
        mem: d.mem.clone(),
    }];
    for b in &d.buffers {
        let below = buffers_below(b);
        out = out
            .into_iter()
            .flat_map(|c| {
                below.iter().map(move |sub| {
                    let mut c = c.clone();
                    c.buffers.push(sub.clone());
                    c
                })
            })
            .collect();
    }
    out
}

/// The finite downward closure of `b` under the parameterized ordering.
pub fn param_configs_below(b: &ParamConfig) -> Vec<ParamConfig> {
    let n = b.process_count();
    let mut out = Vec::new();
    for mask in 0u32..1 << n {
        let keep: Vec<usize> = (0..n).filter(|i| mask & (1 << i) != 0).collect();
        let sub = DtsoConfig {
            states: keep.iter().map(|&i| b.states[i]).collect(),
            buffers: keep.iter().map(|&i| b.buffers[i].clone()).collect(),
            mem: b.mem.clone(),
        };
        out.extend(configs_below(&sub));
    }
    out
}

/// Whether some configuration below `d` is in `↑c` or has a successor there.
pub fn pre_closure_oracle(p: &ConcurrentProgram, c: &DtsoConfig, d: &DtsoConfig) -> bool {
    configs_below(d)
        .iter()
        .any(|e| config_leq_unchecked(c, e) || dtso_successors(e, p).iter().any(|(_, f)| config_leq_unchecked(c, f)))
}

pub fn param_pre_closure_oracle(p: &ParamProgram, a: &ParamConfig, b: &ParamConfig) -> bool {
    let mut instances: HashMap<usize, ConcurrentProgram> = HashMap::new();
    param_configs_below(b).iter().any(|g| {
        if param_leq(a, g) {
            return true;
        }
        let inst = instances
            .entry(g.process_count())
            .or_insert_with(|| p.instance(g.process_count()));
        dtso_successors(g, inst).iter().any(|(_, f)| param_leq(a, f))
    })
}

// ---------------------------------------------------------------------------
// Checks
// ---------------------------------------------------------------------------

fn fail(msg: String) -> Result<(), TestCaseError> {
    Err(TestCaseError::fail(msg))
}

/// A target `c` drawn below a successor of a random `d`, so that `d` is a
/// predecessor by construction.
fn stepped_target(p: &ConcurrentProgram, d: &DtsoConfig, step: Index, below: Index, max_len: usize) -> DtsoConfig {
    let succ = dtso_successors(d, p);
    let (_, s) = &succ[step.index(succ.len())];
    let candidates: Vec<DtsoConfig> = configs_below(s)
        .into_iter()
        .filter(|c| c.max_buffer_len() <= max_len)
        .collect();
    below.get(&candidates).clone()
}

/// A program, a target `c`, and two probes: a guaranteed predecessor and
/// a random configuration near `c`.
pub fn minpre_case() -> impl Strategy<Value = (ConcurrentProgram, DtsoConfig, [DtsoConfig; 2], Index)> {
    fixed_program(small_shape())
        .prop_flat_map(|p| {
            let d = config(&p, 2);
            (Just(p), d, any::<Index>(), any::<Index>())
        })
        .prop_flat_map(|(p, d, step, below)| {
            let c = stepped_target(&p, &d, step, below, 2);
            let near = near(&p, &c, 3);
            (Just(p), Just(c), Just(d), near, any::<Index>())
        })
        .prop_map(|(p, c, d, near, pick)| (p, c, [d, near], pick))
}

/// The probe and one element of the computed minor set must both agree with
/// the downward-closure oracle.
/// Returns whether the probe lies in the upward closure of the minors.
pub fn check_minpre(p: &ConcurrentProgram, c: &DtsoConfig, d: &DtsoConfig, pick: Index) -> Result<bool, TestCaseError> {
    let minors = minpre_config(c, p);
    let engine = minors.covers(d);
    let oracle = pre_closure_oracle(p, c, d);
    if engine != oracle {
        return Err(TestCaseError::fail(format!(
            "probe {d:?}: minpre says {engine}, oracle says {oracle}"
        )));
    }
    let elems = minors.configs();
    let e = &elems[pick.index(elems.len())];
    if !pre_closure_oracle(p, c, e) {
        return Err(TestCaseError::fail(format!(
            "minor {e:?} has no step into the upward closure"
        )));
    }
    Ok(engine)
}

fn param_stepped_target(p: &ParamProgram, b: &ParamConfig, step: Index, below: Index) -> ParamConfig {
    let succ = dtso_successors(b, &p.instance(b.process_count()));
    let (_, s) = &succ[step.index(succ.len())];
    let candidates: Vec<ParamConfig> = param_configs_below(s)
        .into_iter()
        .filter(|a| a.max_buffer_len() <= 2 && a.process_count() > 0)
        .collect();
    below.get(&candidates).clone()
}

pub fn param_minpre_case() -> impl Strategy<Value = (ParamProgram, ParamConfig, [ParamConfig; 2], Index)> {
    param_program(Shape {
        procs: 1..=1,
        ..small_shape()
    })
    .prop_flat_map(|p| {
        let b = param_config(&p, 1..=3, 2);
        (Just(p), b, any::<Index>(), any::<Index>())
    })
    .prop_flat_map(|(p, b, step, below)| {
        let a = param_stepped_target(&p, &b, step, below);
        let near = param_near(&p, &a, 2);
        (Just(p), Just(a), Just(b), near, any::<Index>())
    })
    .prop_map(|(p, a, b, near, pick)| (p, a, [b, near], pick))
}

pub fn check_param_minpre(
    p: &ParamProgram,
    a: &ParamConfig,
    b: &ParamConfig,
    pick: Index,
) -> Result<bool, TestCaseError> {
    let minors = param_minpre(a, p);
    let engine = minors.covers(b);
    let oracle = param_pre_closure_oracle(p, a, b);
    if engine != oracle {
        return Err(TestCaseError::fail(format!(
            "probe {b:?}: param_minpre says {engine}, oracle says {oracle}"
        )));
    }
    let elems = minors.configs();
    let e = &elems[pick.index(elems.len())];
    if !param_pre_closure_oracle(p, a, e) {
        return Err(TestCaseError::fail(format!(
            "minor {e:?} has no step into the upward closure"
        )));
    }
    Ok(engine)
}

pub type MonotonicityCase = (ConcurrentProgram, DtsoConfig, Index, Vec<Vec<(Index, DtsoMsg)>>);

pub fn monotonicity_case() -> impl Strategy<Value = MonotonicityCase> {
    fixed_program(small_shape()).prop_flat_map(|p| {
        let c1 = config(&p, 2);
        let n = p.process_count();
        let pads = vec(
            vec((any::<Index>(), plain_msg(p.domain.var_count(), values_of(&p))), 0..=2),
            n..=n,
        );
        (Just(p), c1, any::<Index>(), pads)
    })
}

/// From `c3 ⊒ c1`, firing the action of `c1 → c2` after deleting some of
/// the acting process's oldest messages reaches a configuration above `c2`.
pub fn check_monotonicity(
    p: &ConcurrentProgram,
    c1: &DtsoConfig,
    pick: Index,
    pads: &[Vec<(Index, DtsoMsg)>],
) -> Result<(), TestCaseError> {
    let succ = dtso_successors(c1, p);
    let (action, c2) = &succ[pick.index(succ.len())];
    let mut c3 = c1.clone();
    for (b, ins) in c3.buffers.iter_mut().zip(pads) {
        for &(at, m) in ins {
            b.insert(at.index(b.len() + 1), m);
        }
    }
    if !config_leq(c1, &c3).unwrap() {
        return fail(format!("padding produced {c3:?}, not above {c1:?}"));
    }
    let depth = c3.max_buffer_len() + 1;
    let moves = [*action, DtsoAction::Delete { proc: action.proc() }];
    let mut queue = VecDeque::from([(c3, 0)]);
    let mut seen = BTreeSet::new();
    while let Some((c, k)) = queue.pop_front() {
        if config_leq_unchecked(c2, &c) {
            return Ok(());
        }
        if k == depth || !seen.insert(c.clone()) {
            continue;
        }
        for m in &moves {
            if let Some(next) = dtso_step(&c, p, m) {
                queue.push_back((next, k + 1));
            }
        }
    }
    fail(format!(
        "no configuration above {c2:?} within {depth} steps of the padded {c1:?}"
    ))
}

/// Outcome of comparing the two bounded searches on one program.
#[derive(Debug)]
pub enum Equivalence {
    /// Both searches are unchanged between the two largest bounds, agree
    /// there, and agree with the backward engine. `relaxed` is set when some
    /// state is missed by the TSO search at bound 0.
    Agree {
        relaxed: bool,
    },
    /// Some search changed at the largest bound, or hit the node cap.
    Inconclusive,
    Disagree(String),
}

pub fn check_equivalence(p: &ConcurrentProgram, max_bound: usize, max_nodes: usize) -> Equivalence {
    // The bounds mean different things in the two semantics (a Dual TSO
    // write needs room for its own message), so only the limits compare.
    let (mut tso, mut dtso) = (Vec::new(), Vec::new());
    for k in 0..=max_bound {
        let (Ok(t), Ok(d)) = (
            tso_reachable_empty_buffer_states(p, k, max_nodes),
            dtso_reachable_empty_buffer_states(p, k, max_nodes),
        ) else {
            return Equivalence::Inconclusive;
        };
        tso.push(t);
        dtso.push(d);
    }
    if tso[max_bound - 1] != tso[max_bound] || dtso[max_bound - 1] != dtso[max_bound] {
        return Equivalence::Inconclusive;
    }
    let stable = &tso[max_bound];
    if *stable != dtso[max_bound] {
        return Equivalence::Disagree(format!("TSO {stable:?} vs Dual TSO {:?}", dtso[max_bound]));
    }
    for g in global_states(p) {
        let Ok(stats) = backward_reach(p, &g) else {
            return Equivalence::Inconclusive;
        };
        let backward = stats.verdict == dualmc_core::backward::Verdict::Reachable;
        if backward != stable.contains(&g) {
            return Equivalence::Disagree(format!("{g:?}: backward {backward}, bounded {}", !backward));
        }
    }
    Equivalence::Agree {
        relaxed: tso[0] != *stable,
    }
}

fn global_states(p: &ConcurrentProgram) -> Vec<Vec<StateId>> {
    p.processes.iter().fold(vec![Vec::new()], |acc, a| {
        acc.into_iter()
            .flat_map(|g| {
                (0..a.states.len()).map(move |s| {
                    let mut g = g.clone();
                    g.push(StateId(s as u16));
                    g
                })
            })
            .collect()
    })
}

/// Two straight-line processes over two variables: process `p` first
/// writes variable `p`, then performs one or two operations biased towards
/// reading the other variable as zero, so store buffering often shows.
pub fn litmus_program(values: usize) -> impl Strategy<Value = ConcurrentProgram> {
    let proc = |p: usize| {
        let other = 1 - p;
        let follow = prop_oneof![
            3 => Just(Op::Read(other, 0)),
            1 => (0..2usize, 0..=values).prop_map(|(x, v)| Op::Read(x, v)),
            1 => (0..2usize, 1..=values).prop_map(|(x, v)| Op::Write(x, v)),
            1 => Just(Op::Fence),
        ];
        (1..=values, vec(follow, 1..=2)).prop_map(move |(v, ops)| {
            std::iter::once(Op::Write(p, v))
                .chain(ops)
                .enumerate()
                .map(|(i, op)| (i, i + 1, op))
                .collect::<RawProc>()
        })
    };
    (proc(0), proc(1), vec(any::<Index>(), 2..=2)).prop_map(move |(a, b, picks)| {
        let text = fixed_text(2, values, &[a, b], &picks);
        match parse_program(&text) {
            Ok(Program::Fixed(p)) => p,
            other => panic!("generated program is invalid: {other:?}\n{text}"),
        }
    })
}

pub fn equivalence_program() -> impl Strategy<Value = ConcurrentProgram> {
    prop_oneof![
        fixed_program(Shape {
            procs: 2..=2,
            states: 4,
            vars: 2,
            values: 2,
            transitions: 4
        }),
        (1..=2usize).prop_flat_map(litmus_program),
    ]
}

// ---------------------------------------------------------------------------
// Ordering laws
// ---------------------------------------------------------------------------

fn law_values() -> Vec<Value> {
    vec![Value(0), Value(1)]
}

/// A word and two successive random enlargements of it.
pub fn word_chain() -> impl Strategy<Value = (Vec<DtsoMsg>, Vec<DtsoMsg>, Vec<DtsoMsg>)> {
    word(2, law_values(), 4)
        .prop_flat_map(|u| (Just(u.clone()), pad(u, 2, msg(2, law_values()))))
        .prop_flat_map(|(u, v)| (Just(u), Just(v.clone()), pad(v, 2, msg(2, law_values()))))
}

pub fn check_subword(u: &[DtsoMsg], v: &[DtsoMsg], w: &[DtsoMsg]) -> Result<(), TestCaseError> {
    prop_assert!(subword(u, u));
    prop_assert_eq!(subword(u, v), subword_oracle(u, v));
    prop_assert_eq!(subword(v, u), subword_oracle(v, u));
    prop_assert!(subword(u, w) || !(subword(u, v) && subword(v, w)));
    Ok(())
}

pub fn check_word_leq(u: &[DtsoMsg], v: &[DtsoMsg], w: &[DtsoMsg]) -> Result<(), TestCaseError> {
    prop_assert!(word_leq(u, u));
    prop_assert_eq!(word_leq(u, v), word_leq_oracle(u, v));
    prop_assert_eq!(word_leq(v, w), word_leq_oracle(v, w));
    prop_assert_eq!(word_leq(w, u), word_leq_oracle(w, u));
    prop_assert!(word_leq(u, w) || !(word_leq(u, v) && word_leq(v, w)));
    Ok(())
}

pub fn check_decomposition(w: &[DtsoMsg]) -> Result<(), TestCaseError> {
    let d = own_decompose(w);
    prop_assert_eq!(d.reassemble(), w.to_vec());
    prop_assert_eq!(d.fragments.len(), d.delimiters.len() + 1);
    let vars: BTreeSet<VarId> = d.delimiters.iter().map(|&(x, _)| x).collect();
    prop_assert_eq!(vars.len(), d.delimiters.len());
    for (i, frag) in d.fragments.iter().enumerate() {
        for m in frag.iter().filter(|m| m.own) {
            prop_assert!(d.delimiters[..i].iter().any(|&(x, _)| x == m.var));
        }
    }
    let (delims, frags) = decompose_oracle(w);
    prop_assert_eq!(delims.iter().map(|m| (m.var, m.val)).collect::<Vec<_>>(), d.delimiters);
    prop_assert_eq!(frags, d.fragments);
    Ok(())
}

/// Three two-process configurations, each an enlargement of the previous
/// one in every buffer, with states and memory possibly redrawn.
pub fn config_chain() -> impl Strategy<Value = (DtsoConfig, DtsoConfig, DtsoConfig)> {
    let grow = |c: DtsoConfig| {
        let bufs: Vec<_> = c
            .buffers
            .iter()
            .map(|b| pad(b.clone(), 2, msg(2, law_values())))
            .collect();
        let states = prop_oneof![4 => Just(c.states.clone()), 1 => vec(state(2), 2..=2)];
        let mem = prop_oneof![4 => Just(c.mem.clone()), 1 => memory(2, law_values())];
        (bufs, states, mem).prop_map(|(buffers, states, mem)| DtsoConfig { states, buffers, mem })
    };
    (
        vec(state(2), 2..=2),
        vec(word(2, law_values(), 3), 2..=2),
        memory(2, law_values()),
    )
        .prop_map(|(states, buffers, mem)| DtsoConfig { states, buffers, mem })
        .prop_flat_map(move |a| (Just(a.clone()), grow(a)))
        .prop_flat_map(move |(a, b)| (Just(a), Just(b.clone()), grow(b)))
}

pub fn check_config_leq(a: &DtsoConfig, b: &DtsoConfig, c: &DtsoConfig) -> Result<(), TestCaseError> {
    let oracle = |x: &DtsoConfig, y: &DtsoConfig| {
        x.states == y.states && x.mem == y.mem && x.buffers.iter().zip(&y.buffers).all(|(u, w)| word_leq_oracle(u, w))
    };
    prop_assert!(config_leq(a, a).unwrap());
    prop_assert_eq!(config_leq(a, b).unwrap(), oracle(a, b));
    prop_assert_eq!(config_leq(b, a).unwrap(), oracle(b, a));
    prop_assert!(config_leq(a, c).unwrap() || !(config_leq(a, b).unwrap() && config_leq(b, c).unwrap()));
    Ok(())
}

fn small_param_config(procs: RangeInclusive<usize>) -> impl Strategy<Value = ParamConfig> {
    (
        vec((state(2), word(2, law_values(), 2)), procs),
        memory(1, law_values()),
    )
        .prop_map(|(ps, mem)| {
            let (states, buffers) = ps.into_iter().unzip();
            DtsoConfig { states, buffers, mem }
        })
}

/// Parameterized configurations of at most four processes where the later
/// ones often extend the earlier ones.
pub fn param_chain() -> impl Strategy<Value = (ParamConfig, ParamConfig, ParamConfig)> {
    fn grow(a: ParamConfig) -> impl Strategy<Value = ParamConfig> {
        let procs: Vec<(StateId, Vec<DtsoMsg>)> = a.states.iter().copied().zip(a.buffers.iter().cloned()).collect();
        let padded: Vec<_> = procs
            .into_iter()
            .map(|(s, b)| (Just(s), pad(b, 1, msg(2, law_values()))))
            .collect();
        let extra = vec(
            (any::<Index>(), state(2), word(2, law_values(), 2)),
            0..=4 - a.process_count(),
        );
        let mem = prop_oneof![5 => Just(a.mem.clone()), 1 => memory(1, law_values())];
        (padded, extra, mem).prop_map(|(mut ps, extra, mem)| {
            for (at, s, b) in extra {
                ps.insert(at.index(ps.len() + 1), (s, b));
            }
            let (states, buffers) = ps.into_iter().unzip();
            DtsoConfig { states, buffers, mem }
        })
    }
    let any_or_grow = |a: ParamConfig| {
        let n = a.process_count();
        prop_oneof![3 => grow(a).boxed(), 1 => small_param_config(n..=4).boxed()]
    };
    small_param_config(0..=3)
        .prop_flat_map(move |a| (Just(a.clone()), any_or_grow(a)))
        .prop_flat_map(move |(a, b)| (Just(a), Just(b.clone()), any_or_grow(b)))
}

pub fn check_param_leq(a: &ParamConfig, b: &ParamConfig, c: &ParamConfig) -> Result<(), TestCaseError> {
    prop_assert!(param_leq(a, a));
    for (x, y) in [(a, b), (b, c), (a, c), (b, a), (c, a)] {
        prop_assert_eq!(param_leq(x, y), param_leq_oracle(x, y), "{:?} vs {:?}", x, y);
    }
    prop_assert!(param_leq(a, c) || !(param_leq(a, b) && param_leq(b, c)));
    Ok(())
}
