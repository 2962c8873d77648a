//! Independent validation of a reported diff trace against the semantics.

use thiserror::Error;

use super::{Correspondence, DiffError, DiffTrace};
use crate::model::ActivityDiagram;
use crate::semantics::{AdState, Machine};

#[derive(Debug, Error)]
pub enum ConformanceError {
    #[error(transparent)]
    Diff(#[from] DiffError),
    #[error("trace is empty")]
    Empty,
    #[error("step {0}: state does not exist in {1}")]
    UnknownState(usize, String),
    #[error("step {0}: state of {1} is not a successor of the previous one")]
    NotASuccessor(usize, String),
    #[error("step 0: state of {0} is not initial")]
    NotInitial(String),
    #[error("step {0}: states do not correspond")]
    NotCorresponding(usize),
    #[error("step {0}: missing counterpart in the second diagram")]
    MissingCounterpart(usize),
    #[error("last step has a counterpart in the second diagram")]
    LastMatched,
    #[error("last step can be matched by the second diagram")]
    Matchable,
}

/// Checks that `trace` is a trace of `ad1`, that its prefix is matched by a
/// trace of `ad2` step by step, and that its last state has no
/// corresponding successor in `ad2`.
pub fn check_diff_trace(ad1: &ActivityDiagram, ad2: &ActivityDiagram, trace: &DiffTrace) -> Result<(), ConformanceError> {
    let m1 = Machine::new(ad1).map_err(DiffError::from)?;
    let m2 = Machine::new(ad2).map_err(DiffError::from)?;
    let corr = Correspondence::new(&m1, &m2)?;
    if trace.steps.is_empty() {
        return Err(ConformanceError::Empty);
    }
    let k = trace.steps.len() - 1;
    let mut prev: Option<(AdState, AdState)> = None;
    for (i, step) in trace.steps.iter().enumerate() {
        let s1 = step
            .s1
            .to_state(&m1)
            .ok_or_else(|| ConformanceError::UnknownState(i, ad1.name.clone()))?;
        let ok1 = match &prev {
            None => m1.initial_states().map_err(DiffError::from)?.contains(&s1),
            Some((p1, _)) => m1.successors(p1).map_err(DiffError::from)?.contains(&s1),
        };
        if !ok1 {
            return Err(if i == 0 {
                ConformanceError::NotInitial(ad1.name.clone())
            } else {
                ConformanceError::NotASuccessor(i, ad1.name.clone())
            });
        }
        let options2 = match &prev {
            None => m2.initial_states().map_err(DiffError::from)?,
            Some((_, p2)) => m2.successors(p2).map_err(DiffError::from)?,
        };
        if i == k {
            if step.s2.is_some() {
                return Err(ConformanceError::LastMatched);
            }
            if options2.iter().any(|s2| corr.holds(&s1, s2)) {
                return Err(ConformanceError::Matchable);
            }
            return Ok(());
        }
        let s2 = step
            .s2
            .as_ref()
            .ok_or(ConformanceError::MissingCounterpart(i))?
            .to_state(&m2)
            .ok_or_else(|| ConformanceError::UnknownState(i, ad2.name.clone()))?;
        if !options2.contains(&s2) {
            return Err(if i == 0 {
                ConformanceError::NotInitial(ad2.name.clone())
            } else {
                ConformanceError::NotASuccessor(i, ad2.name.clone())
            });
        }
        if !corr.holds(&s1, &s2) {
            return Err(ConformanceError::NotCorresponding(i));
        }
        prev = Some((s1, s2));
    }
    unreachable!("loop returns at the last step")
}
