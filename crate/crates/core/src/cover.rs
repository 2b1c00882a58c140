//! Per-transaction inference: choose model itemsets whose union is the
//! transaction, minimizing the total selection weight `-ln pi`.
//!
//! The greedy solver repeatedly takes the itemset with the lowest weight per
//! newly covered item. Ties go to the itemset covering more new items, then to
//! the lexicographically smallest itemset. It is implemented with a lazily
//! re-evaluated priority queue: a popped entry whose new-item count is stale
//! is pushed back with its refreshed key, which is sound because keys only get
//! worse as coverage grows.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::model::{exclusion_cost, inclusion_cost, ItemId, Itemset, ItemsetModel, Transaction};
use crate::{Error, Result};

/// Exhaustive search is refused above this many supported itemsets.
pub const ORACLE_LIMIT: usize = 25;

/// The model itemsets contained in a transaction, with their selection weights.
#[derive(Clone, Debug, PartialEq)]
pub struct SupportedSet {
    pub itemsets: Vec<(Itemset, f64)>,
}

impl SupportedSet {
    pub fn len(&self) -> usize {
        self.itemsets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.itemsets.is_empty()
    }
}

/// Selection weight of an itemset with probability `pi`.
pub fn selection_weight(pi: f64) -> f64 {
    inclusion_cost(pi)
}

pub fn supported_itemsets(model: &ItemsetModel, transaction: &Transaction) -> SupportedSet {
    SupportedSet {
        itemsets: model
            .entries()
            .iter()
            .filter(|e| transaction.supports(&e.itemset))
            .map(|e| (e.itemset.clone(), selection_weight(e.pi)))
            .collect(),
    }
}

/// Number of distinct items covered by a collection of itemsets.
pub fn coverage<'a>(itemsets: impl IntoIterator<Item = &'a Itemset>) -> usize {
    let mut items: Vec<ItemId> = itemsets
        .into_iter()
        .flat_map(|s| s.items().iter().copied())
        .collect();
    items.sort_unstable();
    items.dedup();
    items.len()
}

pub fn greedy_cover(supported: &SupportedSet, transaction: &Transaction) -> Result<Vec<Itemset>> {
    if let Some((s, _)) = supported
        .itemsets
        .iter()
        .find(|(s, _)| !transaction.supports(s))
    {
        return Err(Error::InvalidCovering(format!(
            "{s:?} is not a subset of the transaction"
        )));
    }
    let candidates: Vec<(&[ItemId], f64)> = supported
        .itemsets
        .iter()
        .map(|(s, w)| (s.items(), *w))
        .collect();
    let picked =
        greedy_select(transaction.items(), &candidates).map_err(|item| Error::Infeasible {
            transaction: 0,
            item: item.0,
        })?;
    Ok(picked
        .into_iter()
        .map(|p| supported.itemsets[p].0.clone())
        .collect())
}

struct HeapEntry<'a> {
    ratio: f64,
    fresh: usize,
    items: &'a [ItemId],
    pos: usize,
}

impl HeapEntry<'_> {
    // Greater means preferred.
    fn rank(&self, other: &Self) -> Ordering {
        other
            .ratio
            .total_cmp(&self.ratio)
            .then(self.fresh.cmp(&other.fresh))
            .then_with(|| other.items.cmp(self.items))
            .then(other.pos.cmp(&self.pos))
    }
}

impl PartialEq for HeapEntry<'_> {
    fn eq(&self, other: &Self) -> bool {
        self.rank(other) == Ordering::Equal
    }
}

impl Eq for HeapEntry<'_> {}

impl PartialOrd for HeapEntry<'_> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for HeapEntry<'_> {
    fn cmp(&self, other: &Self) -> Ordering {
        self.rank(other)
    }
}

/// Greedy weighted set cover of `items` (sorted) by `candidates`, each a sorted
/// subset of `items` with its weight. Returns candidate positions in selection
/// order, or the first item no candidate contains.
pub(crate) fn greedy_select(
    items: &[ItemId],
    candidates: &[(&[ItemId], f64)],
) -> std::result::Result<Vec<usize>, ItemId> {
    // one row of `words` bitset words per candidate, over positions in `items`
    let words = items.len().div_ceil(64).max(1);
    let mut local = vec![0u64; candidates.len() * words];
    for (row, (set, _)) in local.chunks_exact_mut(words).zip(candidates) {
        for i in set.iter() {
            let p = items.binary_search(i).expect("candidate must be a subset");
            row[p / 64] |= 1 << (p % 64);
        }
    }
    let row = |pos: usize| &local[pos * words..(pos + 1) * words];

    let mut covered = vec![0u64; words];
    for r in local.chunks_exact(words) {
        for (c, w) in covered.iter_mut().zip(r) {
            *c |= w;
        }
    }
    if let Some(p) = (0..items.len()).find(|&p| covered[p / 64] & (1 << (p % 64)) == 0) {
        return Err(items[p]);
    }
    covered.fill(0);

    let mut heap: BinaryHeap<HeapEntry> = candidates
        .iter()
        .enumerate()
        .map(|(pos, (set, w))| HeapEntry {
            ratio: w / set.len() as f64,
            fresh: set.len(),
            items: set,
            pos,
        })
        .collect();

    let mut remaining = items.len();
    let mut chosen = Vec::new();
    while remaining > 0 {
        let top = heap.pop().expect("feasible cover exists");
        let fresh: usize = row(top.pos)
            .iter()
            .zip(&covered)
            .map(|(w, c)| (w & !c).count_ones() as usize)
            .sum();
        if fresh == 0 {
            continue;
        }
        if fresh != top.fresh {
            heap.push(HeapEntry {
                ratio: candidates[top.pos].1 / fresh as f64,
                fresh,
                ..top
            });
            continue;
        }
        for (c, w) in covered.iter_mut().zip(row(top.pos)) {
            *c |= w;
        }
        remaining -= fresh;
        chosen.push(top.pos);
    }
    Ok(chosen)
}

/// Exact minimizer of the full objective (chosen inclusion costs plus exclusion
/// costs of every other model itemset) by enumerating all subsets of the
/// supported itemsets. Equal-cost coverings are broken by the lexicographically
/// smallest sorted list of itemsets. Test oracle for small instances only.
pub fn exact_cover_oracle(
    supported: &SupportedSet,
    transaction: &Transaction,
    model: &ItemsetModel,
) -> Result<Vec<Itemset>> {
    let k = supported.len();
    if k > ORACLE_LIMIT {
        return Err(Error::InstanceTooLarge {
            size: k,
            limit: ORACLE_LIMIT,
        });
    }
    let mut deltas = Vec::with_capacity(k);
    let mut in_supported = vec![false; model.len()];
    for (s, _) in &supported.itemsets {
        if !transaction.supports(s) {
            return Err(Error::InvalidCovering(format!(
                "{s:?} is not a subset of the transaction"
            )));
        }
        let pos = model
            .position(s)
            .ok_or_else(|| Error::InvalidModel(format!("{s:?} is not in the model")))?;
        in_supported[pos] = true;
        let pi = model.entry(pos).pi;
        deltas.push((inclusion_cost(pi), exclusion_cost(pi)));
    }
    let masks = bitmasks(transaction, supported);
    let full = full_mask(transaction.len());
    let unsupported: f64 = model
        .entries()
        .iter()
        .zip(&in_supported)
        .filter(|(_, &on)| !on)
        .map(|(e, _)| exclusion_cost(e.pi))
        .sum();

    let mut best: Option<(f64, Vec<Itemset>)> = None;
    for subset in 0u64..(1u64 << k) {
        let mut union = vec![0u64; full.len()];
        let mut cost = unsupported;
        for (b, (on_cost, off_cost)) in deltas.iter().enumerate() {
            if subset >> b & 1 == 1 {
                for (u, m) in union.iter_mut().zip(&masks[b]) {
                    *u |= m;
                }
                cost += on_cost;
            } else {
                cost += off_cost;
            }
        }
        if union != full {
            continue;
        }
        let better = match &best {
            None => true,
            Some((c, _)) if cost < *c => true,
            Some((c, _)) if cost > *c => false,
            Some((_, sets)) => sorted_selection(supported, subset) < *sets,
        };
        if better {
            best = Some((cost, sorted_selection(supported, subset)));
        }
    }
    match best {
        Some((_, sets)) => Ok(sets),
        None => {
            let union: Vec<ItemId> = supported
                .itemsets
                .iter()
                .flat_map(|(s, _)| s.items().iter().copied())
                .collect();
            let missing = transaction
                .items()
                .iter()
                .find(|i| !union.contains(i))
                .copied()
                .unwrap_or(ItemId(0));
            Err(Error::Infeasible {
                transaction: 0,
                item: missing.0,
            })
        }
    }
}

fn sorted_selection(supported: &SupportedSet, subset: u64) -> Vec<Itemset> {
    let mut sets: Vec<Itemset> = (0..supported.len())
        .filter(|b| subset >> b & 1 == 1)
        .map(|b| supported.itemsets[b].0.clone())
        .collect();
    sets.sort();
    sets
}

fn full_mask(n: usize) -> Vec<u64> {
    let mut words = vec![u64::MAX; n / 64];
    if !n.is_multiple_of(64) {
        words.push((1u64 << (n % 64)) - 1);
    }
    words
}

fn bitmasks(transaction: &Transaction, supported: &SupportedSet) -> Vec<Vec<u64>> {
    let words = full_mask(transaction.len()).len();
    supported
        .itemsets
        .iter()
        .map(|(s, _)| {
            let mut mask = vec![0u64; words];
            for item in s.items() {
                let p = transaction.items().binary_search(item).expect("subset");
                mask[p / 64] |= 1 << (p % 64);
            }
            mask
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn model(entries: &[(&[u32], f64)]) -> ItemsetModel {
        let mut m = ItemsetModel::new();
        for (items, pi) in entries {
            m.insert(Itemset::of(items), *pi, 0).unwrap();
        }
        m
    }

    fn sets(list: &[&[u32]]) -> Vec<Itemset> {
        list.iter().map(|s| Itemset::of(s)).collect()
    }

    #[test]
    fn supported_is_the_subset_filter() {
        let m = model(&[(&[1, 2], 0.5), (&[3, 4], 0.5)]);
        let sup = supported_itemsets(&m, &Transaction::of(&[1, 2, 3]));
        assert_eq!(sup.itemsets.len(), 1);
        assert_eq!(sup.itemsets[0].0, Itemset::of(&[1, 2]));
        assert!((sup.itemsets[0].1 - 2f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn singletons_always_supported() {
        let m = model(&[(&[1], 0.2), (&[2], 0.2), (&[3], 0.2), (&[4], 0.2)]);
        let sup = supported_itemsets(&m, &Transaction::of(&[1, 2, 3]));
        assert_eq!(sup.len(), 3);
    }

    #[test]
    fn forced_single_cover() {
        let m = model(&[(&[1], 0.5)]);
        let x = Transaction::of(&[1]);
        let chosen = greedy_cover(&supported_itemsets(&m, &x), &x).unwrap();
        assert_eq!(chosen, sets(&[&[1]]));
    }

    #[test]
    fn hand_traced_instance() {
        let m = model(&[(&[1, 2], 0.5), (&[2, 3], 0.25), (&[3], 0.5), (&[1], 0.1)]);
        let x = Transaction::of(&[1, 2, 3]);
        let sup = supported_itemsets(&m, &x);
        // ratios: {1,2} 0.3466, {2,3} 0.6931, {3} 0.6931, {1} 2.3026
        let chosen = greedy_cover(&sup, &x).unwrap();
        assert_eq!(chosen, sets(&[&[1, 2], &[3]]));
        let oracle = exact_cover_oracle(&sup, &x, &m).unwrap();
        assert_eq!(oracle, sets(&[&[1, 2], &[3]]));
        // cost of the optimum: -ln .5 -ln .5 -ln .75 -ln .9
        let cost = crate::model::objective_cost(&m, &x, &oracle).unwrap();
        let expected = 2.0 * 2f64.ln() - 0.75f64.ln() - 0.9f64.ln();
        assert!((cost - expected).abs() < 1e-12);
    }

    #[test]
    fn zero_weight_itemset_goes_first() {
        let x = Transaction::of(&[1, 2, 3]);
        let sup = SupportedSet {
            itemsets: vec![
                (Itemset::of(&[1, 2, 3]), 0.01),
                (Itemset::of(&[3]), 0.0),
                (Itemset::of(&[1]), 5.0),
                (Itemset::of(&[2]), 5.0),
            ],
        };
        let chosen = greedy_cover(&sup, &x).unwrap();
        assert_eq!(chosen[0], Itemset::of(&[3]));
    }

    #[test]
    fn ties_prefer_more_new_items_then_smaller_itemset() {
        let x = Transaction::of(&[1, 2, 3, 4]);
        // {1,2} and {3,4} tie on ratio and size; {1,2,3,4} ties on ratio with more items
        let sup = SupportedSet {
            itemsets: vec![
                (Itemset::of(&[3, 4]), 1.0),
                (Itemset::of(&[1, 2]), 1.0),
                (Itemset::of(&[1, 2, 3, 4]), 2.0),
            ],
        };
        assert_eq!(greedy_cover(&sup, &x).unwrap(), sets(&[&[1, 2, 3, 4]]));
        let sup = SupportedSet {
            itemsets: sup.itemsets[..2].to_vec(),
        };
        assert_eq!(greedy_cover(&sup, &x).unwrap(), sets(&[&[1, 2], &[3, 4]]));
    }

    #[test]
    fn infeasible_instance_is_an_error() {
        let x = Transaction::of(&[1, 2]);
        let sup = SupportedSet {
            itemsets: vec![(Itemset::of(&[1]), 1.0)],
        };
        assert!(matches!(
            greedy_cover(&sup, &x),
            Err(Error::Infeasible { item: 2, .. })
        ));
    }

    #[test]
    fn empty_transaction_has_empty_cover() {
        let x = Transaction::default();
        let sup = SupportedSet { itemsets: vec![] };
        assert!(greedy_cover(&sup, &x).unwrap().is_empty());
        let m = model(&[(&[1], 0.4)]);
        assert!(exact_cover_oracle(&sup, &x, &m).unwrap().is_empty());
    }

    #[test]
    fn oracle_with_equal_singletons() {
        let m = model(&[(&[1], 0.3), (&[2], 0.3), (&[3], 0.3)]);
        let x = Transaction::of(&[1, 2, 3]);
        let chosen = exact_cover_oracle(&supported_itemsets(&m, &x), &x, &m).unwrap();
        assert_eq!(chosen, sets(&[&[1], &[2], &[3]]));
    }

    #[test]
    fn oracle_refuses_large_instances() {
        let mut m = ItemsetModel::new();
        let items: Vec<u32> = (0..26).collect();
        for i in 0..26u32 {
            m.insert(Itemset::of(&[i]), 0.5, 0).unwrap();
        }
        let x = Transaction::of(&items);
        let sup = supported_itemsets(&m, &x);
        assert!(matches!(
            exact_cover_oracle(&sup, &x, &m),
            Err(Error::InstanceTooLarge { size: 26, .. })
        ));
    }

    fn instance() -> impl Strategy<Value = (Vec<u32>, Vec<(Vec<u32>, f64)>)> {
        (1usize..=6).prop_flat_map(|n| {
            let items: Vec<u32> = (0..n as u32).collect();
            let sets = proptest::collection::vec(
                (
                    proptest::sample::subsequence(items.clone(), 1..=n),
                    0.05f64..0.95,
                ),
                0..8,
            );
            (Just(items), sets)
        })
    }

    fn supported_from(items: &[u32], raw: &[(Vec<u32>, f64)]) -> SupportedSet {
        let mut seen = std::collections::HashSet::new();
        let mut itemsets = Vec::new();
        for (s, pi) in raw {
            let s = Itemset::of(s);
            if seen.insert(s.clone()) {
                itemsets.push((s, selection_weight(*pi)));
            }
        }
        for &i in items {
            let s = Itemset::of(&[i]);
            if seen.insert(s.clone()) {
                itemsets.push((s, selection_weight(0.5)));
            }
        }
        SupportedSet { itemsets }
    }

    proptest! {
        #[test]
        fn every_pick_adds_new_items((items, raw) in instance()) {
            let x = Transaction::of(&items);
            let sup = supported_from(&items, &raw);
            let chosen = greedy_cover(&sup, &x).unwrap();
            let mut covered: Vec<Itemset> = Vec::new();
            for s in &chosen {
                let before = coverage(&covered);
                covered.push(s.clone());
                prop_assert!(coverage(&covered) > before);
            }
            prop_assert_eq!(coverage(&covered), x.len());
            // deterministic
            prop_assert_eq!(greedy_cover(&sup, &x).unwrap(), chosen);
        }

        #[test]
        fn coverage_is_monotone_submodular(
            sets in proptest::collection::vec(proptest::collection::vec(0u32..10, 1..5), 1..8),
            extra in proptest::collection::vec(0u32..10, 1..5),
            split in 0usize..8,
        ) {
            let all: Vec<Itemset> = sets.iter().map(|s| Itemset::of(s)).collect();
            let s = Itemset::of(&extra);
            let split = split.min(all.len());
            let a = &all[..split];
            let b = &all[..];
            let gain = |base: &[Itemset]| {
                let with: Vec<&Itemset> = base.iter().chain(std::iter::once(&s)).collect();
                coverage(with) as i64 - coverage(base) as i64
            };
            prop_assert!(gain(a) >= gain(b));
            prop_assert!(gain(b) >= 0);
            prop_assert!(coverage(b) >= coverage(a));
        }
    }
}
