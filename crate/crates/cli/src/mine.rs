use std::io::Write;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use itemset_core::db::TransactionDb;
use itemset_core::learning::{iim_mine, MiningConfig};
use itemset_core::ranking::{by_probability, rank_by_usage, RankedItemset};
use itemset_core::ItemId;

use crate::{tsv, with_output, CliError, CliResult, MineArgs, SortKey};

/// Summary of a mining run, printed as JSON on stderr.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub iterations: usize,
    pub proposed: usize,
    pub accepted: usize,
    pub rejected: usize,
    pub hard_em_runs: usize,
    pub exhausted: bool,
    pub itemsets: usize,
    pub non_singletons: usize,
    pub transactions: usize,
    pub load_secs: f64,
    pub index_secs: f64,
    pub structural_secs: f64,
    pub hard_em_secs: f64,
    pub total_secs: f64,
    pub seed: u64,
    pub config: MiningConfig,
}

impl MineArgs {
    pub fn config(&self) -> MiningConfig {
        let defaults = MiningConfig::default();
        MiningConfig {
            max_iterations: self.iterations,
            queue_capacity: self.queue_size,
            em_tolerance: self.em_tolerance,
            em_every: self.em_every,
            threads: self.threads.unwrap_or(defaults.threads),
            seed: self.seed,
            ..defaults
        }
    }
}

pub fn cmd_mine(args: &MineArgs, out: &mut dyn Write, err: &mut dyn Write) -> CliResult<RunReport> {
    let started = Instant::now();
    let config = args.config();
    config.validate()?;
    let db = TransactionDb::load_fimi(&args.input).map_err(CliError::file(&args.input))?;
    let load_secs = started.elapsed().as_secs_f64();

    let result = iim_mine(&db, &config)?;

    let model = result.model.map_items(|i| ItemId(db.original_id(i)))?;
    let counts = result.coverings.usage_counts();
    let usage: Vec<u64> = result
        .model
        .entries()
        .iter()
        .map(|e| counts.get(&e.itemset).copied().unwrap_or(0))
        .collect();
    let mut ranked: Vec<RankedItemset> = rank_by_usage(&model, &usage)?;
    if args.sort == SortKey::Probability {
        ranked.sort_by(by_probability);
    }
    if args.no_singletons {
        ranked.retain(|r| !r.itemset.is_singleton());
    }

    with_output(args.output.as_deref(), out, |w| {
        tsv::write_ranked(w, &ranked)
    })?;
    if let Some(path) = &args.model_out {
        model
            .to_file(db.universe_size() as u32)
            .write(path)
            .map_err(CliError::file(path))?;
    }

    let stats = &result.stats;
    let report = RunReport {
        iterations: stats.iterations,
        proposed: stats.proposed,
        accepted: stats.accepted,
        rejected: stats.rejected,
        hard_em_runs: stats.hard_em_runs,
        exhausted: stats.exhausted,
        itemsets: model.len(),
        non_singletons: model
            .entries()
            .iter()
            .filter(|e| !e.itemset.is_singleton())
            .count(),
        transactions: db.len(),
        load_secs,
        index_secs: stats.index_time.as_secs_f64(),
        structural_secs: stats.structural_time.as_secs_f64(),
        hard_em_secs: stats.hard_em_time.as_secs_f64(),
        total_secs: started.elapsed().as_secs_f64(),
        seed: args.seed,
        config,
    };
    writeln!(
        err,
        "{}",
        serde_json::to_string(&report).map_err(|e| CliError::Data(e.to_string()))?
    )?;
    Ok(report)
}
