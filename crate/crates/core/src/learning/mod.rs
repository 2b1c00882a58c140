//! Parameter estimation and itemset discovery.
//!
//! [`MiningState`] holds the model together with per-transaction caches of
//! supported itemsets and current coverings. [`hard_em`] fits probabilities for
//! a fixed itemset set, [`structural_step`] tries candidates from a
//! [`CandidateQueue`] until one lowers the average objective, and [`iim_mine`]
//! alternates the two starting from the singleton model.

mod candidates;
mod miner;
mod state;
mod structural;

pub use candidates::{candidate_gen, Candidate, CandidateQueue};
pub use miner::{
    iim_mine, iim_mine_observed, singleton_model, MiningConfig, MiningResult, MiningStats,
};
pub use state::{hard_em, HardEmOutcome, MStepView, MiningObserver, MiningState};
pub use structural::{structural_step, StepOutcome};
