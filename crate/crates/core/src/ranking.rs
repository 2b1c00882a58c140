//! Interestingness ranking of mined itemsets.
//!
//! Interestingness is the fraction of an itemset's supporting transactions
//! whose covering actually uses it. Ranking sorts by interestingness, then by
//! probability, then lexicographically by itemset.

use std::cmp::Ordering;

use crate::model::{CoveringState, Itemset, ItemsetModel};
use crate::{Error, Result};

#[derive(Clone, Debug, PartialEq)]
pub struct RankedItemset {
    pub itemset: Itemset,
    pub interestingness: f64,
    pub pi: f64,
    pub support: u64,
    pub usage: u64,
}

pub fn interestingness(usage: u64, support: u64) -> Result<f64> {
    if usage > support {
        return Err(Error::UsageExceedsSupport { usage, support });
    }
    if support == 0 {
        return Ok(0.0);
    }
    Ok(usage as f64 / support as f64)
}

pub fn rank(model: &ItemsetModel, coverings: &CoveringState) -> Result<Vec<RankedItemset>> {
    let counts = coverings.usage_counts();
    let usage: Vec<u64> = model
        .entries()
        .iter()
        .map(|e| counts.get(&e.itemset).copied().unwrap_or(0))
        .collect();
    rank_by_usage(model, &usage)
}

/// Ranks with usage counts given per model position.
pub fn rank_by_usage(model: &ItemsetModel, usage: &[u64]) -> Result<Vec<RankedItemset>> {
    let mut ranked = model
        .entries()
        .iter()
        .zip(usage)
        .map(|(e, &u)| {
            Ok(RankedItemset {
                itemset: e.itemset.clone(),
                interestingness: interestingness(u, e.support)?,
                pi: e.pi,
                support: e.support,
                usage: u,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    ranked.sort_by(by_interestingness);
    Ok(ranked)
}

pub fn by_interestingness(a: &RankedItemset, b: &RankedItemset) -> Ordering {
    b.interestingness
        .total_cmp(&a.interestingness)
        .then(b.pi.total_cmp(&a.pi))
        .then_with(|| a.itemset.cmp(&b.itemset))
}

/// Probability-first order, for callers who prefer it.
pub fn by_probability(a: &RankedItemset, b: &RankedItemset) -> Ordering {
    b.pi.total_cmp(&a.pi)
        .then(b.interestingness.total_cmp(&a.interestingness))
        .then_with(|| a.itemset.cmp(&b.itemset))
}
