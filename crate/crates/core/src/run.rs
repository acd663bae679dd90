//! Runs (sequences of configurations and actions) and step-by-step replay.

use thiserror::Error;

/// A run `c_0 -a_1-> c_1 ... -a_n-> c_n`; `configs.len() == actions.len() + 1`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Run<C, A> {
    pub configs: Vec<C>,
    pub actions: Vec<A>,
}

impl<C, A> Run<C, A> {
    pub fn last(&self) -> &C {
        self.configs.last().expect("a run has at least one configuration")
    }

    pub fn len(&self) -> usize {
        self.actions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.actions.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ReplayError {
    #[error("step {step}: action `{action}` is not enabled")]
    Disabled { step: usize, action: String },
    #[error("action `{action}` refers to a process or transition outside the program")]
    OutOfRange { action: String },
}

/// Replays `actions` from `init` using a one-step function that returns
/// `None` when the action is disabled.
pub fn replay_with<C: Clone, A: Clone + std::fmt::Debug>(
    init: C,
    actions: &[A],
    mut step: impl FnMut(&C, &A) -> Option<C>,
) -> Result<Run<C, A>, ReplayError> {
    let mut configs = vec![init];
    for (i, a) in actions.iter().enumerate() {
        let next = step(configs.last().expect("nonempty"), a).ok_or_else(|| ReplayError::Disabled {
            step: i + 1,
            action: format!("{a:?}"),
        })?;
        configs.push(next);
    }
    Ok(Run {
        configs,
        actions: actions.to_vec(),
    })
}
