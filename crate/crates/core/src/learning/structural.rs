use crate::index::PrefixTree;
use crate::model::Itemset;
use crate::Result;

use super::candidates::CandidateQueue;
use super::state::{MiningObserver, MiningState};

#[derive(Clone, Debug, PartialEq)]
pub struct StepOutcome {
    /// The candidate added to the model, or `None` when the queue ran dry.
    pub accepted: Option<Itemset>,
    pub proposed: usize,
    pub rejected: usize,
    /// Average objective on entry.
    pub mean_cost_before: f64,
    /// Average objective after the step (equal to the entry value when
    /// nothing was accepted).
    pub mean_cost_after: f64,
}

/// One structural EM iteration: pull candidates until one strictly lowers
/// the average objective. Rejected candidates are remembered by the queue.
pub fn structural_step(
    state: &mut MiningState<'_>,
    queue: &mut CandidateQueue,
    index: &PrefixTree,
) -> Result<StepOutcome> {
    structural_step_observed(state, queue, index, &mut ())
}

pub(crate) fn structural_step_observed(
    state: &mut MiningState<'_>,
    queue: &mut CandidateQueue,
    index: &PrefixTree,
    observer: &mut dyn MiningObserver,
) -> Result<StepOutcome> {
    let before = state.mean_cost();
    let mut outcome = StepOutcome {
        accepted: None,
        proposed: 0,
        rejected: 0,
        mean_cost_before: before,
        mean_cost_after: before,
    };
    while let Some(candidate) = queue.next_candidate(state.model(), index) {
        outcome.proposed += 1;
        let trial = state.try_candidate(&candidate.itemset, candidate.support, observer)?;
        if trial.accepted {
            outcome.mean_cost_after = trial.mean_cost_after;
            outcome.accepted = Some(candidate.itemset);
            return Ok(outcome);
        }
        outcome.rejected += 1;
        queue.reject(candidate.itemset);
    }
    Ok(outcome)
}
