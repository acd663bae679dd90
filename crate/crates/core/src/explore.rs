//! Breadth-first exploration shared by the bounded TSO and DTSO explorers.

use std::collections::{HashMap, VecDeque};
use std::hash::Hash;

use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
pub enum ExploreError {
    #[error("node limit of {0} configurations exceeded")]
    NodeLimit(usize),
}

/// Result of a bounded forward search.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum BoundedVerdict<A> {
    /// A run from the initial configuration to a target configuration.
    Reachable(Vec<A>),
    /// The bounded state space was exhausted and nothing was pruned.
    SafeWithinBound,
    /// The bounded state space was exhausted, but some enabled step was
    /// pruned by the buffer bound, so safety only holds relative to it.
    BoundExceeded,
}

/// A bounded verdict with the number of configurations visited.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BoundedSearch<A> {
    pub verdict: BoundedVerdict<A>,
    pub nodes: usize,
}

/// The full bounded state space, in breadth-first discovery order.
#[derive(Debug, Clone)]
pub struct Exploration<C, A> {
    pub nodes: Vec<C>,
    /// Parent index and the action that discovered each node.
    pub parents: Vec<Option<(usize, A)>>,
    /// True when some successor was discarded for exceeding the bound.
    pub pruned: bool,
    /// Index of the first node satisfying the goal, when one was given.
    pub goal: Option<usize>,
}

impl<C, A: Clone> Exploration<C, A> {
    /// Actions leading from the root to `node`.
    pub fn path_to(&self, mut node: usize) -> Vec<A> {
        let mut out = Vec::new();
        while let Some((parent, a)) = &self.parents[node] {
            out.push(a.clone());
            node = *parent;
        }
        out.reverse();
        out
    }

    pub fn verdict(&self) -> BoundedVerdict<A> {
        match self.goal {
            Some(g) => BoundedVerdict::Reachable(self.path_to(g)),
            None if self.pruned => BoundedVerdict::BoundExceeded,
            None => BoundedVerdict::SafeWithinBound,
        }
    }
}

/// Explores from `root`. Successors failing `within` are pruned; the search
/// stops at the first node satisfying `goal`.
pub fn bfs<C, A, S, W, G>(
    root: C,
    mut successors: S,
    within: W,
    goal: G,
    max_nodes: usize,
) -> Result<Exploration<C, A>, ExploreError>
where
    C: Clone + Eq + Hash,
    A: Clone,
    S: FnMut(&C) -> Vec<(A, C)>,
    W: Fn(&C) -> bool,
    G: Fn(&C) -> bool,
{
    let mut index: HashMap<C, usize> = HashMap::new();
    let mut ex = Exploration {
        nodes: vec![root.clone()],
        parents: vec![None],
        pruned: false,
        goal: None,
    };
    index.insert(root.clone(), 0);
    if goal(&root) {
        ex.goal = Some(0);
        return Ok(ex);
    }
    let mut queue = VecDeque::from([0usize]);
    while let Some(i) = queue.pop_front() {
        let current = ex.nodes[i].clone();
        for (a, next) in successors(&current) {
            if !within(&next) {
                ex.pruned = true;
                continue;
            }
            if index.contains_key(&next) {
                continue;
            }
            if ex.nodes.len() >= max_nodes {
                return Err(ExploreError::NodeLimit(max_nodes));
            }
            let id = ex.nodes.len();
            index.insert(next.clone(), id);
            ex.nodes.push(next.clone());
            ex.parents.push(Some((i, a)));
            if goal(&next) {
                ex.goal = Some(id);
                return Ok(ex);
            }
            queue.push_back(id);
        }
    }
    Ok(ex)
}
