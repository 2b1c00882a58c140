//! Transaction databases and the FIMI text format.
//!
//! Items are relabeled at load time to dense ids `0..n` in decreasing-support
//! order (ties by ascending original id), so `ItemId(0)` is the most frequent
//! item. The original ids are kept for output.

use std::collections::HashMap;
use std::fs::File;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use crate::model::{ItemId, Itemset, Transaction};
use crate::{Error, Result};

#[derive(Clone, Debug)]
pub struct TransactionDb {
    transactions: Vec<Transaction>,
    item_supports: Vec<u64>,
    original_ids: Vec<u32>,
    dense_ids: HashMap<u32, ItemId>,
    tidlists: Vec<Vec<u32>>,
}

impl TransactionDb {
    /// Builds a database from transactions given in original ids. Duplicate
    /// items within a transaction are collapsed; empty transactions are kept.
    pub fn from_raw<T: AsRef<[u32]>>(raw: &[T]) -> TransactionDb {
        let mut counts: HashMap<u32, u64> = HashMap::new();
        let mut lines: Vec<Vec<u32>> = Vec::with_capacity(raw.len());
        for t in raw {
            let mut line = t.as_ref().to_vec();
            line.sort_unstable();
            line.dedup();
            for &i in &line {
                *counts.entry(i).or_insert(0) += 1;
            }
            lines.push(line);
        }

        let mut order: Vec<(u32, u64)> = counts.into_iter().collect();
        order.sort_unstable_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(&b.0)));
        let original_ids: Vec<u32> = order.iter().map(|&(id, _)| id).collect();
        let item_supports: Vec<u64> = order.iter().map(|&(_, c)| c).collect();
        let dense_ids: HashMap<u32, ItemId> = original_ids
            .iter()
            .enumerate()
            .map(|(d, &id)| (id, ItemId(d as u32)))
            .collect();

        let mut tidlists = vec![Vec::new(); original_ids.len()];
        let transactions = lines
            .into_iter()
            .enumerate()
            .map(|(j, line)| {
                let t = Transaction::new(line.iter().map(|id| dense_ids[id]));
                for item in t.items() {
                    tidlists[item.0 as usize].push(j as u32);
                }
                t
            })
            .collect();

        TransactionDb {
            transactions,
            item_supports,
            original_ids,
            dense_ids,
            tidlists,
        }
    }

    pub fn load_fimi(path: impl AsRef<Path>) -> Result<TransactionDb> {
        let file = File::open(path)?;
        Self::read_fimi(BufReader::new(file))
    }

    pub fn read_fimi(reader: impl BufRead) -> Result<TransactionDb> {
        Ok(Self::from_raw(&parse_fimi(reader)?))
    }

    /// Number of transactions `m`.
    pub fn len(&self) -> usize {
        self.transactions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.transactions.is_empty()
    }

    /// Number of distinct items `n`.
    pub fn universe_size(&self) -> usize {
        self.original_ids.len()
    }

    pub fn transactions(&self) -> &[Transaction] {
        &self.transactions
    }

    pub fn transaction(&self, j: usize) -> &Transaction {
        &self.transactions[j]
    }

    /// Items in dense order, most frequent first.
    pub fn items(&self) -> impl Iterator<Item = ItemId> {
        (0..self.original_ids.len() as u32).map(ItemId)
    }

    pub fn item_support(&self, item: ItemId) -> u64 {
        self.item_supports
            .get(item.0 as usize)
            .copied()
            .unwrap_or(0)
    }

    /// Support of an item given by its original id.
    pub fn support_of_original(&self, id: u32) -> u64 {
        self.dense_id(id).map_or(0, |d| self.item_support(d))
    }

    pub fn original_id(&self, item: ItemId) -> u32 {
        self.original_ids[item.0 as usize]
    }

    pub fn dense_id(&self, original: u32) -> Option<ItemId> {
        self.dense_ids.get(&original).copied()
    }

    /// Translates a dense itemset back to original ids.
    pub fn to_original(&self, itemset: &Itemset) -> Itemset {
        itemset.map_items(|i| ItemId(self.original_id(i)))
    }

    /// Translates an itemset in original ids; `None` if any item is unknown.
    pub fn to_dense(&self, itemset: &Itemset) -> Option<Itemset> {
        let items: Option<Vec<ItemId>> =
            itemset.items().iter().map(|i| self.dense_id(i.0)).collect();
        Itemset::new(items?)
    }

    /// Transaction `j` in original ids, ascending.
    pub fn raw_transaction(&self, j: usize) -> Vec<u32> {
        let mut ids: Vec<u32> = self.transactions[j]
            .items()
            .iter()
            .map(|&i| self.original_id(i))
            .collect();
        ids.sort_unstable();
        ids
    }

    /// Indices of transactions containing `item`, ascending.
    pub fn tidlist(&self, item: ItemId) -> &[u32] {
        self.tidlists
            .get(item.0 as usize)
            .map_or(&[], |v| v.as_slice())
    }

    /// Indices of the transactions that contain every item of `itemset`.
    pub fn supporting_transactions(&self, itemset: &Itemset) -> Vec<u32> {
        // dense ids ascend with decreasing support, so the last item is the rarest
        let rarest = *itemset.items().last().expect("non-empty");
        self.tidlist(rarest)
            .iter()
            .copied()
            .filter(|&j| self.transactions[j as usize].supports(itemset))
            .collect()
    }
}

/// Parses FIMI text: one transaction per line, whitespace-separated
/// non-negative integers. Blank lines are empty transactions.
pub fn parse_fimi(reader: impl BufRead) -> Result<Vec<Vec<u32>>> {
    let mut out = Vec::new();
    for (n, line) in reader.lines().enumerate() {
        let line = line?;
        let items = line
            .split_whitespace()
            .map(|tok| {
                tok.parse::<u32>().map_err(|_| Error::Parse {
                    line: n + 1,
                    token: tok.to_string(),
                })
            })
            .collect::<Result<Vec<u32>>>()?;
        out.push(items);
    }
    Ok(out)
}

/// Writes transactions in FIMI format, one line each (blank for empty).
pub fn write_fimi<W: Write, T: AsRef<[u32]>>(mut writer: W, transactions: &[T]) -> Result<()> {
    let mut line = String::new();
    for t in transactions {
        line.clear();
        for (k, id) in t.as_ref().iter().enumerate() {
            if k > 0 {
                line.push(' ');
            }
            line.push_str(&id.to_string());
        }
        line.push('\n');
        writer.write_all(line.as_bytes())?;
    }
    writer.flush()?;
    Ok(())
}
