use std::fs::File;
use std::io::{BufReader, Write};
use std::path::Path;
use std::time::Instant;

use itemset_core::evaluation::{generate_db, iid, precision_recall, RECALL_LEVELS};
use itemset_core::learning::{iim_mine, MiningConfig};
use itemset_core::{Itemset, ItemsetModel};

use crate::synth::load_model;
use crate::{tsv, CliError, CliResult, EvalCommand, IidArgs, PrArgs, ScalingArgs};

pub fn cmd_eval(cmd: &EvalCommand, out: &mut dyn Write) -> CliResult<()> {
    match cmd {
        EvalCommand::Pr(args) => eval_pr(args, out),
        EvalCommand::Iid(args) => eval_iid(args, out),
        EvalCommand::Scaling(args) => eval_scaling(args, out),
    }
}

fn mined_itemsets(path: &Path, no_singletons: bool) -> CliResult<Vec<Itemset>> {
    let file = File::open(path).map_err(|e| CliError::File {
        path: path.to_path_buf(),
        source: e.into(),
    })?;
    Ok(tsv::read_ranked(BufReader::new(file))?
        .into_iter()
        .map(|(_, row)| row.itemset)
        .filter(|s| !(no_singletons && s.is_singleton()))
        .collect())
}

fn eval_pr(args: &PrArgs, out: &mut dyn Write) -> CliResult<()> {
    let mined = mined_itemsets(&args.mined, args.no_singletons)?;
    let truth: Vec<Itemset> = load_model(&args.truth)?
        .entries()
        .iter()
        .map(|e| e.itemset.clone())
        .filter(|s| !(args.no_singletons && s.is_singleton()))
        .collect();
    let curve = precision_recall(&mined, &truth)?;
    writeln!(out, "k\tprecision\trecall")?;
    for (k, (recall, precision)) in curve.points.iter().enumerate() {
        writeln!(out, "{}\t{precision}\t{recall}", k + 1)?;
    }
    writeln!(out)?;
    writeln!(out, "recall\tinterpolated_precision")?;
    for (level, precision) in RECALL_LEVELS.iter().zip(curve.interpolated) {
        writeln!(out, "{level:.1}\t{precision}")?;
    }
    Ok(())
}

fn eval_iid(args: &IidArgs, out: &mut dyn Write) -> CliResult<()> {
    if args.top < 2 {
        return Err(CliError::Usage("--top must be at least 2".into()));
    }
    let mined = mined_itemsets(&args.mined, args.no_singletons)?;
    let report = iid(&mined, args.top)?;
    writeln!(out, "requested\tused\tiid")?;
    writeln!(
        out,
        "{}\t{}\t{}",
        report.requested, report.used, report.value
    )?;
    Ok(())
}

#[derive(Clone, Debug, PartialEq)]
pub struct ScalingRow {
    pub transactions: usize,
    /// Fastest mining wall-clock time over the repeats.
    pub seconds: f64,
    pub accepted: usize,
    pub itemsets: usize,
}

/// Samples a database of each size from `model` and times mining on it.
pub fn scaling(
    model: &ItemsetModel,
    sizes: &[usize],
    config: &MiningConfig,
    repeats: usize,
) -> CliResult<Vec<ScalingRow>> {
    if repeats == 0 {
        return Err(CliError::Usage("--repeats must be at least 1".into()));
    }
    sizes
        .iter()
        .map(|&m| {
            let db = generate_db(model, m, config.seed)?;
            let mut best = f64::INFINITY;
            let mut last = None;
            for _ in 0..repeats {
                let started = Instant::now();
                let result = iim_mine(&db, config)?;
                best = best.min(started.elapsed().as_secs_f64());
                last = Some(result);
            }
            let result = last.expect("at least one repeat");
            Ok(ScalingRow {
                transactions: m,
                seconds: best,
                accepted: result.stats.accepted,
                itemsets: result.model.len(),
            })
        })
        .collect()
}

fn eval_scaling(args: &ScalingArgs, out: &mut dyn Write) -> CliResult<()> {
    let model = load_model(&args.model)?;
    let defaults = MiningConfig::default();
    let config = MiningConfig {
        max_iterations: args.iterations,
        queue_capacity: args.queue_size,
        threads: args.threads.unwrap_or(defaults.threads),
        seed: args.seed,
        ..defaults
    };
    config.validate()?;
    let rows = scaling(&model, &args.sizes, &config, args.repeats)?;
    writeln!(out, "transactions\tseconds\tratio\taccepted\titemsets")?;
    let mut previous: Option<f64> = None;
    for row in &rows {
        let ratio = previous.map_or("-".to_string(), |p| (row.seconds / p).to_string());
        writeln!(
            out,
            "{}\t{}\t{}\t{}\t{}",
            row.transactions, row.seconds, ratio, row.accepted, row.itemsets
        )?;
        previous = Some(row.seconds);
    }
    Ok(())
}
