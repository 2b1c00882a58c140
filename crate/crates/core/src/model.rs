//! Items, itemsets, transactions and the Bernoulli itemset model.

use std::collections::HashMap;
use std::fmt;
use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::Path;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Arc;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Probabilities are clamped to `[PROB_FLOOR, 1 - PROB_FLOOR]` before taking logs.
pub const PROB_FLOOR: f64 = 1e-12;

pub fn clamp_probability(pi: f64) -> f64 {
    pi.clamp(PROB_FLOOR, 1.0 - PROB_FLOOR)
}

/// Cost of including an itemset: `-ln(pi)` on the clamped probability.
pub fn inclusion_cost(pi: f64) -> f64 {
    -clamp_probability(pi).ln()
}

/// Cost of leaving an itemset out: `-ln(1 - pi)` on the clamped probability.
pub fn exclusion_cost(pi: f64) -> f64 {
    -(-clamp_probability(pi)).ln_1p()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ItemId(pub u32);

impl fmt::Display for ItemId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

/// A non-empty set of items kept in canonical (sorted, duplicate-free) form.
///
/// Cloning is cheap: the item slice is reference counted.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Itemset(Arc<[ItemId]>);

impl Itemset {
    /// Returns `None` for an empty input.
    pub fn new(items: impl IntoIterator<Item = ItemId>) -> Option<Self> {
        let mut items: Vec<ItemId> = items.into_iter().collect();
        if items.is_empty() {
            return None;
        }
        items.sort_unstable();
        items.dedup();
        Some(Itemset(items.into()))
    }

    /// Convenience constructor from raw ids.
    ///
    /// Panics on an empty input.
    pub fn of(ids: &[u32]) -> Self {
        Self::new(ids.iter().map(|&i| ItemId(i))).expect("itemset must be non-empty")
    }

    pub fn singleton(item: ItemId) -> Self {
        Itemset(Arc::from([item]))
    }

    pub fn items(&self) -> &[ItemId] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn is_singleton(&self) -> bool {
        self.0.len() == 1
    }

    pub fn contains(&self, item: ItemId) -> bool {
        self.0.binary_search(&item).is_ok()
    }

    /// Subset test against a sorted item slice.
    pub fn is_subset_of(&self, sorted: &[ItemId]) -> bool {
        is_sorted_subset(&self.0, sorted)
    }

    pub fn union(&self, other: &Itemset) -> Itemset {
        let (a, b) = (&self.0, &other.0);
        let mut out = Vec::with_capacity(a.len() + b.len());
        let (mut i, mut j) = (0, 0);
        while i < a.len() && j < b.len() {
            match a[i].cmp(&b[j]) {
                std::cmp::Ordering::Less => {
                    out.push(a[i]);
                    i += 1;
                }
                std::cmp::Ordering::Greater => {
                    out.push(b[j]);
                    j += 1;
                }
                std::cmp::Ordering::Equal => {
                    out.push(a[i]);
                    i += 1;
                    j += 1;
                }
            }
        }
        out.extend_from_slice(&a[i..]);
        out.extend_from_slice(&b[j..]);
        Itemset(out.into())
    }

    /// Size of the symmetric difference.
    pub fn symmetric_difference_len(&self, other: &Itemset) -> usize {
        let (a, b) = (&self.0, &other.0);
        let (mut i, mut j, mut shared) = (0, 0, 0);
        while i < a.len() && j < b.len() {
            match a[i].cmp(&b[j]) {
                std::cmp::Ordering::Less => i += 1,
                std::cmp::Ordering::Greater => j += 1,
                std::cmp::Ordering::Equal => {
                    shared += 1;
                    i += 1;
                    j += 1;
                }
            }
        }
        a.len() + b.len() - 2 * shared
    }

    /// Applies an item relabeling and re-canonicalizes.
    pub fn map_items(&self, f: impl Fn(ItemId) -> ItemId) -> Itemset {
        Itemset::new(self.0.iter().map(|&i| f(i))).expect("non-empty")
    }

    pub fn raw_ids(&self) -> Vec<u32> {
        self.0.iter().map(|i| i.0).collect()
    }
}

impl fmt::Debug for Itemset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.0.iter().map(|i| i.0)).finish()
    }
}

pub(crate) fn is_sorted_subset(small: &[ItemId], large: &[ItemId]) -> bool {
    if small.len() > large.len() {
        return false;
    }
    let mut rest = large;
    for item in small {
        match rest.binary_search(item) {
            Ok(pos) => rest = &rest[pos + 1..],
            Err(_) => return false,
        }
    }
    true
}

/// A transaction: sorted, duplicate-free, possibly empty.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct Transaction {
    items: Vec<ItemId>,
}

impl Transaction {
    pub fn new(items: impl IntoIterator<Item = ItemId>) -> Self {
        let mut items: Vec<ItemId> = items.into_iter().collect();
        items.sort_unstable();
        items.dedup();
        Transaction { items }
    }

    pub fn of(ids: &[u32]) -> Self {
        Self::new(ids.iter().map(|&i| ItemId(i)))
    }

    pub fn items(&self) -> &[ItemId] {
        &self.items
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    pub fn contains(&self, item: ItemId) -> bool {
        self.items.binary_search(&item).is_ok()
    }

    pub fn supports(&self, itemset: &Itemset) -> bool {
        itemset.is_subset_of(&self.items)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ModelEntry {
    pub itemset: Itemset,
    pub pi: f64,
    /// Number of database transactions containing the itemset.
    pub support: u64,
}

static GENERATIONS: AtomicU64 = AtomicU64::new(1);

fn next_generation() -> u64 {
    GENERATIONS.fetch_add(1, Ordering::Relaxed)
}

/// The set of itemsets with their inclusion probabilities and cached supports.
///
/// Entries keep insertion order. The generation id changes whenever the set of
/// itemsets changes (not when probabilities change) and is unique across all
/// models in the process, so caches can be keyed on it.
#[derive(Clone, Debug)]
pub struct ItemsetModel {
    entries: Vec<ModelEntry>,
    positions: HashMap<Itemset, usize>,
    generation: u64,
}

impl Default for ItemsetModel {
    fn default() -> Self {
        Self::new()
    }
}

impl ItemsetModel {
    pub fn new() -> Self {
        ItemsetModel {
            entries: Vec::new(),
            positions: HashMap::new(),
            generation: next_generation(),
        }
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn generation(&self) -> u64 {
        self.generation
    }

    pub fn entries(&self) -> &[ModelEntry] {
        &self.entries
    }

    pub fn entry(&self, idx: usize) -> &ModelEntry {
        &self.entries[idx]
    }

    pub fn position(&self, itemset: &Itemset) -> Option<usize> {
        self.positions.get(itemset).copied()
    }

    pub fn contains(&self, itemset: &Itemset) -> bool {
        self.positions.contains_key(itemset)
    }

    pub fn get(&self, itemset: &Itemset) -> Option<&ModelEntry> {
        self.position(itemset).map(|p| &self.entries[p])
    }

    pub fn pi(&self, itemset: &Itemset) -> Option<f64> {
        self.get(itemset).map(|e| e.pi)
    }

    pub fn pis(&self) -> Vec<f64> {
        self.entries.iter().map(|e| e.pi).collect()
    }

    /// Appends an itemset and returns its position.
    pub fn insert(&mut self, itemset: Itemset, pi: f64, support: u64) -> Result<usize> {
        check_probability(pi)?;
        if self.positions.contains_key(&itemset) {
            return Err(Error::InvalidModel(format!(
                "duplicate itemset {itemset:?}"
            )));
        }
        let pos = self.entries.len();
        self.positions.insert(itemset.clone(), pos);
        self.entries.push(ModelEntry {
            itemset,
            pi,
            support,
        });
        self.generation = next_generation();
        Ok(pos)
    }

    pub fn set_pi(&mut self, idx: usize, pi: f64) -> Result<()> {
        check_probability(pi)?;
        self.entries[idx].pi = pi;
        Ok(())
    }

    /// Replaces every probability; `pis` is indexed like `entries()`.
    pub fn set_pis(&mut self, pis: &[f64]) -> Result<()> {
        if pis.len() != self.entries.len() {
            return Err(Error::InvalidModel(format!(
                "expected {} probabilities, got {}",
                self.entries.len(),
                pis.len()
            )));
        }
        for &pi in pis {
            check_probability(pi)?;
        }
        for (entry, &pi) in self.entries.iter_mut().zip(pis) {
            entry.pi = pi;
        }
        Ok(())
    }

    /// Keeps entries for which `keep(position, entry)` holds. Returns the old
    /// position of each surviving entry, in order.
    pub fn retain(&mut self, mut keep: impl FnMut(usize, &ModelEntry) -> bool) -> Vec<usize> {
        let mut kept = Vec::with_capacity(self.entries.len());
        let old = std::mem::take(&mut self.entries);
        for (pos, entry) in old.into_iter().enumerate() {
            if keep(pos, &entry) {
                kept.push(pos);
                self.entries.push(entry);
            }
        }
        if kept.len() != self.positions.len() {
            self.positions = self
                .entries
                .iter()
                .enumerate()
                .map(|(p, e)| (e.itemset.clone(), p))
                .collect();
            self.generation = next_generation();
        }
        kept
    }

    /// True when every item of `items` lies in at least one model itemset.
    pub fn covers_items(&self, items: impl IntoIterator<Item = ItemId>) -> bool {
        let mut present = std::collections::HashSet::new();
        for e in &self.entries {
            present.extend(e.itemset.items().iter().copied());
        }
        items.into_iter().all(|i| present.contains(&i))
    }

    /// Relabels every itemset, keeping entry order, probabilities and supports.
    pub fn map_items(&self, f: impl Fn(ItemId) -> ItemId) -> Result<ItemsetModel> {
        let mut out = ItemsetModel::new();
        for e in &self.entries {
            out.insert(e.itemset.map_items(&f), e.pi, e.support)?;
        }
        Ok(out)
    }

    pub fn to_file(&self, universe: u32) -> ModelFile {
        ModelFile {
            itemsets: self
                .entries
                .iter()
                .map(|e| ModelFileEntry {
                    items: e.itemset.raw_ids(),
                    pi: e.pi,
                    support: e.support,
                })
                .collect(),
            universe,
        }
    }

    /// Builds a model from its serialized form. Missing supports read as 0.
    pub fn from_file(file: &ModelFile) -> Result<ItemsetModel> {
        let mut model = ItemsetModel::new();
        for entry in &file.itemsets {
            let itemset = Itemset::new(entry.items.iter().map(|&i| ItemId(i)))
                .ok_or_else(|| Error::InvalidModel("empty itemset".into()))?;
            model.insert(itemset, entry.pi, entry.support)?;
        }
        Ok(model)
    }
}

fn check_probability(pi: f64) -> Result<()> {
    if (0.0..=1.0).contains(&pi) {
        Ok(())
    } else {
        Err(Error::InvalidModel(format!(
            "probability {pi} outside [0, 1]"
        )))
    }
}

/// JSON form of a model: `{"itemsets": [{"items": [..], "pi": .., "support": ..}], "universe": n}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelFile {
    pub itemsets: Vec<ModelFileEntry>,
    pub universe: u32,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelFileEntry {
    pub items: Vec<u32>,
    pub pi: f64,
    #[serde(default)]
    pub support: u64,
}

impl ModelFile {
    pub fn read(path: impl AsRef<Path>) -> Result<ModelFile> {
        let reader = BufReader::new(File::open(path)?);
        Ok(serde_json::from_reader(reader)?)
    }

    pub fn write(&self, path: impl AsRef<Path>) -> Result<()> {
        let mut writer = BufWriter::new(File::create(path)?);
        serde_json::to_writer_pretty(&mut writer, self)?;
        writer.write_all(b"\n")?;
        writer.flush()?;
        Ok(())
    }
}

/// Negative log-probability of `(transaction, z)` where `z` selects `chosen`.
///
/// Sums `-ln pi` over chosen itemsets and `-ln(1 - pi)` over every other model
/// itemset, in model order. Rejects coverings that use a non-model itemset, an
/// itemset not contained in the transaction, or leave an item uncovered.
pub fn objective_cost(
    model: &ItemsetModel,
    transaction: &Transaction,
    chosen: &[Itemset],
) -> Result<f64> {
    let mut selected = vec![false; model.len()];
    let mut covered = vec![false; transaction.len()];
    for itemset in chosen {
        let pos = model
            .position(itemset)
            .ok_or_else(|| Error::InvalidCovering(format!("{itemset:?} is not in the model")))?;
        if !transaction.supports(itemset) {
            return Err(Error::InvalidCovering(format!(
                "{itemset:?} is not a subset of the transaction"
            )));
        }
        selected[pos] = true;
        for item in itemset.items() {
            let at = transaction.items().binary_search(item).expect("subset");
            covered[at] = true;
        }
    }
    if let Some(at) = covered.iter().position(|c| !c) {
        return Err(Error::InvalidCovering(format!(
            "item {} is not covered",
            transaction.items()[at]
        )));
    }
    Ok(model
        .entries()
        .iter()
        .zip(&selected)
        .map(|(e, &on)| {
            if on {
                inclusion_cost(e.pi)
            } else {
                exclusion_cost(e.pi)
            }
        })
        .sum())
}

/// Draws one transaction from the generative model: every itemset fires
/// independently with its probability and the transaction is the union of
/// those that fired. Returns the positions of the fired itemsets.
pub fn sample_transaction<R: Rng + ?Sized>(
    model: &ItemsetModel,
    rng: &mut R,
) -> (Transaction, Vec<usize>) {
    let mut fired = Vec::new();
    let mut items = Vec::new();
    for (pos, entry) in model.entries().iter().enumerate() {
        if rng.gen_bool(entry.pi) {
            fired.push(pos);
            items.extend_from_slice(entry.itemset.items());
        }
    }
    (Transaction::new(items), fired)
}

/// One transaction's covering: the itemsets with `z = 1` and the objective value.
#[derive(Clone, Debug, PartialEq)]
pub struct TransactionCover {
    pub chosen: Vec<Itemset>,
    pub cost: f64,
}

/// Coverings for every transaction of a database, indexed by transaction.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct CoveringState {
    covers: Vec<TransactionCover>,
}

impl CoveringState {
    pub fn new(covers: Vec<TransactionCover>) -> Self {
        CoveringState { covers }
    }

    pub fn len(&self) -> usize {
        self.covers.len()
    }

    pub fn is_empty(&self) -> bool {
        self.covers.is_empty()
    }

    pub fn get(&self, j: usize) -> &TransactionCover {
        &self.covers[j]
    }

    pub fn iter(&self) -> impl Iterator<Item = &TransactionCover> {
        self.covers.iter()
    }

    /// Number of transactions each itemset explains.
    pub fn usage_counts(&self) -> HashMap<Itemset, u64> {
        let mut usage = HashMap::new();
        for cover in &self.covers {
            for s in &cover.chosen {
                *usage.entry(s.clone()).or_insert(0) += 1;
            }
        }
        usage
    }

    pub fn mean_cost(&self) -> f64 {
        if self.covers.is_empty() {
            return 0.0;
        }
        self.covers.iter().map(|c| c.cost).sum::<f64>() / self.covers.len() as f64
    }
}
