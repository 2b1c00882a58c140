//! Synthetic data generation and evaluation metrics.

use std::collections::HashSet;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::db::TransactionDb;
use crate::model::{sample_transaction, Itemset, ItemsetModel, Transaction};
use crate::{Error, Result};

/// One generated transaction with the model positions that fired.
#[derive(Clone, Debug, PartialEq)]
pub struct Sample {
    pub transaction: Transaction,
    pub fired: Vec<usize>,
}

/// Random stream for transaction `j`. Each transaction draws from its own
/// ChaCha stream so results do not depend on scheduling.
pub fn transaction_rng(seed: u64, j: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(j);
    rng
}

pub fn generate_samples(model: &ItemsetModel, m: usize, seed: u64) -> Result<Vec<Sample>> {
    if m == 0 {
        return Err(Error::InvalidConfig("need at least one transaction".into()));
    }
    Ok((0..m as u64)
        .into_par_iter()
        .map(|j| {
            let (transaction, fired) = sample_transaction(model, &mut transaction_rng(seed, j));
            Sample { transaction, fired }
        })
        .collect())
}

/// Samples `m` transactions. Item ids of the model are used as original ids.
pub fn generate_db(model: &ItemsetModel, m: usize, seed: u64) -> Result<TransactionDb> {
    let raw: Vec<Vec<u32>> = generate_samples(model, m, seed)?
        .into_iter()
        .map(|s| s.transaction.items().iter().map(|i| i.0).collect())
        .collect();
    Ok(TransactionDb::from_raw(&raw))
}

#[derive(Clone, Debug, PartialEq)]
pub struct PrCurve {
    /// `(recall, precision)` after each of the top-k mined itemsets.
    pub points: Vec<(f64, f64)>,
    /// Interpolated precision at recall 0.0, 0.1, ..., 1.0.
    pub interpolated: [f64; 11],
}

pub const RECALL_LEVELS: [f64; 11] = [0.0, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0];

/// Precision and recall of each top-k prefix of `mined` against `truth`,
/// matching itemsets by exact equality.
pub fn precision_recall(mined: &[Itemset], truth: &[Itemset]) -> Result<PrCurve> {
    let truth: HashSet<&Itemset> = truth.iter().collect();
    if truth.is_empty() {
        return Err(Error::EmptyTruth);
    }
    let mut hits = 0usize;
    let points: Vec<(f64, f64)> = mined
        .iter()
        .enumerate()
        .map(|(k, s)| {
            if truth.contains(s) {
                hits += 1;
            }
            (
                hits as f64 / truth.len() as f64,
                hits as f64 / (k + 1) as f64,
            )
        })
        .collect();
    let mut interpolated = [0.0; 11];
    for (slot, level) in interpolated.iter_mut().zip(RECALL_LEVELS) {
        *slot = points
            .iter()
            .filter(|(r, _)| *r >= level)
            .map(|(_, p)| *p)
            .fold(0.0, f64::max);
    }
    Ok(PrCurve {
        points,
        interpolated,
    })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct IidReport {
    pub requested: usize,
    /// Itemsets actually used; less than `requested` for short lists.
    pub used: usize,
    pub value: f64,
}

impl IidReport {
    pub fn shortfall(&self) -> usize {
        self.requested - self.used
    }
}

/// Average over the top-`k` itemsets of each one's smallest symmetric
/// difference to the others.
pub fn iid(itemsets: &[Itemset], k: usize) -> Result<IidReport> {
    if k < 2 {
        return Err(Error::TooFewItemsets(k));
    }
    let top = &itemsets[..k.min(itemsets.len())];
    if top.len() < 2 {
        return Err(Error::TooFewItemsets(top.len()));
    }
    let total: usize = top
        .iter()
        .enumerate()
        .map(|(i, a)| {
            top.iter()
                .enumerate()
                .filter(|&(j, _)| j != i)
                .map(|(_, b)| a.symmetric_difference_len(b))
                .min()
                .expect("at least two itemsets")
        })
        .sum();
    Ok(IidReport {
        requested: k,
        used: top.len(),
        value: total as f64 / top.len() as f64,
    })
}
