use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

use crate::db::TransactionDb;
use crate::index::PrefixTree;
use crate::model::{CoveringState, Itemset, ItemsetModel};
use crate::{Error, Result};

use super::candidates::CandidateQueue;
use super::state::{MiningObserver, MiningState};
use super::structural::structural_step_observed;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MiningConfig {
    /// Structural EM iterations; each one ends with an accepted candidate or
    /// an exhausted queue.
    pub max_iterations: usize,
    pub queue_capacity: usize,
    pub em_tolerance: f64,
    pub em_max_iterations: usize,
    /// Run hard EM after this many accepted candidates.
    pub em_every: usize,
    pub threads: usize,
    pub seed: u64,
}

impl Default for MiningConfig {
    fn default() -> Self {
        MiningConfig {
            max_iterations: 1000,
            queue_capacity: 100_000,
            em_tolerance: 1e-5,
            em_max_iterations: 100,
            em_every: 5,
            threads: std::thread::available_parallelism().map_or(1, |n| n.get()),
            seed: 0,
        }
    }
}

impl MiningConfig {
    pub fn validate(&self) -> Result<()> {
        let counts = [
            ("queue_capacity", self.queue_capacity),
            ("em_max_iterations", self.em_max_iterations),
            ("em_every", self.em_every),
            ("threads", self.threads),
        ];
        if let Some((name, _)) = counts.iter().find(|(_, v)| *v == 0) {
            return Err(Error::InvalidConfig(format!("{name} must be at least 1")));
        }
        if self.em_tolerance.is_nan() || self.em_tolerance <= 0.0 {
            return Err(Error::InvalidConfig("em_tolerance must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct MiningStats {
    pub iterations: usize,
    pub proposed: usize,
    pub accepted: usize,
    pub rejected: usize,
    pub hard_em_runs: usize,
    pub exhausted: bool,
    pub index_time: Duration,
    pub structural_time: Duration,
    pub hard_em_time: Duration,
}

#[derive(Clone, Debug)]
pub struct MiningResult {
    /// Model over the database's dense item ids.
    pub model: ItemsetModel,
    pub coverings: CoveringState,
    pub stats: MiningStats,
}

/// All singletons of the database with their relative supports.
pub fn singleton_model(db: &TransactionDb) -> ItemsetModel {
    let m = db.len() as f64;
    let mut model = ItemsetModel::new();
    for item in db.items() {
        let support = db.item_support(item);
        model
            .insert(Itemset::singleton(item), support as f64 / m, support)
            .expect("distinct singletons");
    }
    model
}

pub fn iim_mine(db: &TransactionDb, config: &MiningConfig) -> Result<MiningResult> {
    iim_mine_observed(db, config, &mut ())
}

/// Mines with an observer that sees every M-step.
pub fn iim_mine_observed(
    db: &TransactionDb,
    config: &MiningConfig,
    observer: &mut (dyn MiningObserver + Send),
) -> Result<MiningResult> {
    if db.is_empty() {
        return Err(Error::EmptyDatabase);
    }
    config.validate()?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(config.threads)
        .build()
        .map_err(|e| Error::InvalidConfig(e.to_string()))?;
    pool.install(|| run(db, config, observer))
}

fn run(
    db: &TransactionDb,
    config: &MiningConfig,
    observer: &mut dyn MiningObserver,
) -> Result<MiningResult> {
    let mut stats = MiningStats::default();

    let started = Instant::now();
    let index = PrefixTree::build(db);
    stats.index_time = started.elapsed();

    let mut state = MiningState::new(db, singleton_model(db))?;
    let mut queue = CandidateQueue::new(config.queue_capacity);
    let mut pending = 0;

    let hard_em = |state: &mut MiningState<'_>,
                   stats: &mut MiningStats,
                   observer: &mut dyn MiningObserver| {
        let started = Instant::now();
        state.hard_em(config.em_tolerance, config.em_max_iterations, observer)?;
        stats.hard_em_runs += 1;
        stats.hard_em_time += started.elapsed();
        Ok::<(), Error>(())
    };

    while stats.iterations < config.max_iterations {
        stats.iterations += 1;
        let started = Instant::now();
        let step = structural_step_observed(&mut state, &mut queue, &index, observer)?;
        stats.structural_time += started.elapsed();
        stats.proposed += step.proposed;
        stats.rejected += step.rejected;
        if step.accepted.is_none() {
            stats.exhausted = true;
            break;
        }
        stats.accepted += 1;
        pending += 1;
        if pending == config.em_every {
            hard_em(&mut state, &mut stats, observer)?;
            pending = 0;
        }
    }
    if pending > 0 {
        hard_em(&mut state, &mut stats, observer)?;
    }

    let coverings = state.covering_state();
    Ok(MiningResult {
        model: state.into_model(),
        coverings,
        stats,
    })
}
