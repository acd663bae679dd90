//! The well-quasi-orderings on load buffers and configurations, and minor
//! sets (antichains) representing upward-closed sets.

use std::collections::hash_map::DefaultHasher;
use std::collections::HashMap;
use std::hash::{Hash, Hasher};
use std::marker::PhantomData;

use thiserror::Error;

use crate::dtso::{DtsoConfig, DtsoMsg, ParamConfig};
use crate::program::{Value, VarId};

/// Whether `u` embeds into `v` as a (not necessarily contiguous) subword.
pub fn subword<T: PartialEq>(u: &[T], v: &[T]) -> bool {
    let mut rest = v.iter();
    u.iter().all(|a| rest.any(|b| b == a))
}

/// A buffer split at the most recent own-message of each variable.
///
/// Reassembling `fragments[0] · d_1 · fragments[1] · ... · d_m ·
/// fragments[m]` with `d_i = (x_i, v_i, own)` gives back the word.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OwnDecomposition {
    pub fragments: Vec<Vec<DtsoMsg>>,
    pub delimiters: Vec<(VarId, Value)>,
}

impl OwnDecomposition {
    pub fn reassemble(&self) -> Vec<DtsoMsg> {
        let mut out = self.fragments[0].clone();
        for (&(x, v), frag) in self.delimiters.iter().zip(&self.fragments[1..]) {
            out.push(DtsoMsg::own(x, v));
            out.extend_from_slice(frag);
        }
        out
    }
}

#[inline]
fn bit(x: VarId) -> u64 {
    1u64 << x.0
}

/// Whether `m` is a delimiter given the set `seen` of variables whose most
/// recent own-message was already passed.
#[inline]
fn is_delimiter(m: &DtsoMsg, seen: u64) -> bool {
    m.own && seen & bit(m.var) == 0
}

pub fn own_decompose(w: &[DtsoMsg]) -> OwnDecomposition {
    let mut fragments = vec![Vec::new()];
    let mut delimiters = Vec::new();
    let mut seen = 0u64;
    for m in w {
        if is_delimiter(m, seen) {
            seen |= bit(m.var);
            delimiters.push((m.var, m.val));
            fragments.push(Vec::new());
        } else {
            fragments.last_mut().expect("nonempty").push(*m);
        }
    }
    OwnDecomposition { fragments, delimiters }
}

/// The buffer ordering: equal delimiter sequences and fragment-wise subword.
pub fn word_leq(w: &[DtsoMsg], w2: &[DtsoMsg]) -> bool {
    let (mut i, mut j) = (0, 0);
    let mut seen = 0u64;
    loop {
        // Embed the current fragment of `w` into the current fragment of `w2`.
        while i < w.len() && !is_delimiter(&w[i], seen) {
            loop {
                if j >= w2.len() || is_delimiter(&w2[j], seen) {
                    return false;
                }
                j += 1;
                if w2[j - 1] == w[i] {
                    break;
                }
            }
            i += 1;
        }
        while j < w2.len() && !is_delimiter(&w2[j], seen) {
            j += 1;
        }
        match (i < w.len(), j < w2.len()) {
            (false, false) => return true,
            (true, true) if w[i] == w2[j] => {
                seen |= bit(w[i].var);
                i += 1;
                j += 1;
            }
            _ => return false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
pub enum OrderingError {
    #[error("configurations have {0} and {1} processes")]
    ProcessCountMismatch(usize, usize),
    #[error("configurations have {0} and {1} variables")]
    VariableCountMismatch(usize, usize),
}

/// The configuration ordering for a fixed process set.
pub fn config_leq(c: &DtsoConfig, d: &DtsoConfig) -> Result<bool, OrderingError> {
    if c.process_count() != d.process_count() {
        return Err(OrderingError::ProcessCountMismatch(
            c.process_count(),
            d.process_count(),
        ));
    }
    if c.mem.len() != d.mem.len() {
        return Err(OrderingError::VariableCountMismatch(c.mem.len(), d.mem.len()));
    }
    Ok(config_leq_unchecked(c, d))
}

/// [`config_leq`] for callers that guarantee matching shapes.
pub fn config_leq_unchecked(c: &DtsoConfig, d: &DtsoConfig) -> bool {
    c.states == d.states && c.mem == d.mem && c.buffers.iter().zip(&d.buffers).all(|(a, b)| word_leq(a, b))
}

/// Whether process `i` of `a` can be mapped to process `j` of `b`.
#[inline]
fn proc_leq(a: &ParamConfig, i: usize, b: &ParamConfig, j: usize) -> bool {
    a.states[i] == b.states[j] && word_leq(&a.buffers[i], &b.buffers[j])
}

/// The parameterized ordering: equal memory and a strictly order-preserving
/// injection of `a`'s processes into `b`'s with equal states and ordered
/// buffers. Greedy earliest matching decides it.
pub fn param_leq(a: &ParamConfig, b: &ParamConfig) -> bool {
    param_embedding(a, b).is_some()
}

/// The greedy earliest embedding of `a` into `b`, if one exists.
pub fn param_embedding(a: &ParamConfig, b: &ParamConfig) -> Option<Vec<usize>> {
    if a.mem != b.mem || a.process_count() > b.process_count() {
        return None;
    }
    let mut map = Vec::with_capacity(a.process_count());
    let mut j = 0;
    for i in 0..a.process_count() {
        loop {
            if b.process_count() - j < a.process_count() - i {
                return None;
            }
            j += 1;
            if proc_leq(a, i, b, j - 1) {
                map.push(j - 1);
                break;
            }
        }
    }
    Some(map)
}

/// Whether `a` embeds into `b` along the given injection.
pub fn param_leq_along(a: &ParamConfig, b: &ParamConfig, map: &[usize]) -> bool {
    a.mem == b.mem
        && map.len() == a.process_count()
        && map.windows(2).all(|w| w[0] < w[1])
        && map
            .iter()
            .enumerate()
            .all(|(i, &j)| j < b.process_count() && proc_leq(a, i, b, j))
}

/// A quasi-ordering on configurations usable in a [`MinorSet`].
pub trait Quasi {
    /// Comparable configurations must share this key.
    fn key(c: &DtsoConfig) -> u64;
    fn leq(a: &DtsoConfig, b: &DtsoConfig) -> bool;
}

fn hash_of<T: Hash + ?Sized>(t: &T) -> u64 {
    let mut h = DefaultHasher::new();
    t.hash(&mut h);
    h.finish()
}

/// The fixed-size ordering: comparable configurations agree on states and
/// memory.
#[derive(Debug, Clone, Copy, Default)]
pub struct FixedOrder;

impl Quasi for FixedOrder {
    fn key(c: &DtsoConfig) -> u64 {
        hash_of(&(&c.states, &c.mem))
    }

    fn leq(a: &DtsoConfig, b: &DtsoConfig) -> bool {
        config_leq_unchecked(a, b)
    }
}

/// The parameterized ordering: comparable configurations agree on memory.
#[derive(Debug, Clone, Copy, Default)]
pub struct ParamOrder;

impl Quasi for ParamOrder {
    fn key(c: &DtsoConfig) -> u64 {
        hash_of(&c.mem)
    }

    fn leq(a: &DtsoConfig, b: &DtsoConfig) -> bool {
        param_leq(a, b)
    }
}

/// Stable handle of an element ever inserted into a [`MinorSet`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ElemId(pub usize);

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum InsertOutcome {
    /// Some stored element is below the candidate; nothing changed.
    Subsumed,
    /// The candidate was stored; the listed elements above it were dropped.
    Inserted { id: ElemId, removed: Vec<ElemId> },
}

/// An antichain of configurations. Every inserted configuration keeps its
/// [`ElemId`] and stays readable after removal, so callers can attach
/// metadata such as parent links.
#[derive(Debug, Clone)]
pub struct MinorSet<O: Quasi> {
    elems: Vec<DtsoConfig>,
    live: Vec<bool>,
    buckets: HashMap<u64, Vec<ElemId>>,
    len: usize,
    _order: PhantomData<O>,
}

impl<O: Quasi> Default for MinorSet<O> {
    fn default() -> Self {
        MinorSet {
            elems: Vec::new(),
            live: Vec::new(),
            buckets: HashMap::new(),
            len: 0,
            _order: PhantomData,
        }
    }
}

impl<O: Quasi> MinorSet<O> {
    pub fn new() -> Self {
        Self::default()
    }

    /// Number of live elements.
    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn get(&self, id: ElemId) -> &DtsoConfig {
        &self.elems[id.0]
    }

    pub fn is_live(&self, id: ElemId) -> bool {
        self.live[id.0]
    }

    /// Whether some live element is below `c`.
    pub fn covers(&self, c: &DtsoConfig) -> bool {
        self.buckets
            .get(&O::key(c))
            .is_some_and(|b| b.iter().any(|&id| O::leq(&self.elems[id.0], c)))
    }

    pub fn insert(&mut self, c: DtsoConfig) -> InsertOutcome {
        let key = O::key(&c);
        let bucket = self.buckets.entry(key).or_default();
        if bucket.iter().any(|&id| O::leq(&self.elems[id.0], &c)) {
            return InsertOutcome::Subsumed;
        }
        let mut removed = Vec::new();
        bucket.retain(|&id| {
            let above = O::leq(&c, &self.elems[id.0]);
            if above {
                removed.push(id);
            }
            !above
        });
        let id = ElemId(self.elems.len());
        bucket.push(id);
        for r in &removed {
            self.live[r.0] = false;
        }
        self.len = self.len + 1 - removed.len();
        self.elems.push(c);
        self.live.push(true);
        InsertOutcome::Inserted { id, removed }
    }

    /// Live elements in insertion order.
    pub fn iter(&self) -> impl Iterator<Item = (ElemId, &DtsoConfig)> {
        self.elems
            .iter()
            .enumerate()
            .filter(|(i, _)| self.live[*i])
            .map(|(i, c)| (ElemId(i), c))
    }

    pub fn configs(&self) -> Vec<DtsoConfig> {
        self.iter().map(|(_, c)| c.clone()).collect()
    }
}

pub fn minor_insert<O: Quasi>(set: &mut MinorSet<O>, c: DtsoConfig) -> InsertOutcome {
    set.insert(c)
}

/// The minimal elements of a collection.
pub fn minor_min<O: Quasi>(configs: impl IntoIterator<Item = DtsoConfig>) -> MinorSet<O> {
    let mut set = MinorSet::new();
    for c in configs {
        set.insert(c);
    }
    set
}
