use std::cmp::Ordering;
use std::collections::{BinaryHeap, HashMap, HashSet};

use crate::index::PrefixTree;
use crate::model::{Itemset, ItemsetModel};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Candidate {
    pub itemset: Itemset,
    pub support: u64,
}

#[derive(Debug, PartialEq, Eq)]
struct Queued {
    support: u64,
    seq: u64,
    itemset: Itemset,
}

impl Ord for Queued {
    fn cmp(&self, other: &Self) -> Ordering {
        self.support
            .cmp(&other.support)
            .then(other.seq.cmp(&self.seq))
    }
}

impl PartialOrd for Queued {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Support-ordered queue of pairwise unions of model itemsets.
///
/// The queue is rebuilt whenever the model's itemset set changes. Rejected
/// candidates and computed supports are remembered across rebuilds.
#[derive(Debug)]
pub struct CandidateQueue {
    capacity: usize,
    heap: BinaryHeap<Queued>,
    queued: HashSet<Itemset>,
    rejected: HashSet<Itemset>,
    supports: HashMap<Itemset, u64>,
    built_for: Option<u64>,
    next_seq: u64,
}

impl CandidateQueue {
    pub fn new(capacity: usize) -> Self {
        CandidateQueue {
            capacity: capacity.max(1),
            heap: BinaryHeap::new(),
            queued: HashSet::new(),
            rejected: HashSet::new(),
            supports: HashMap::new(),
            built_for: None,
            next_seq: 0,
        }
    }

    pub fn len(&self) -> usize {
        self.heap.len()
    }

    pub fn is_empty(&self) -> bool {
        self.heap.is_empty()
    }

    pub fn reject(&mut self, itemset: Itemset) {
        self.rejected.insert(itemset);
    }

    pub fn is_rejected(&self, itemset: &Itemset) -> bool {
        self.rejected.contains(itemset)
    }

    pub fn rejected_count(&self) -> usize {
        self.rejected.len()
    }

    /// Highest-support candidate that is neither in the model nor rejected.
    /// Returns `None` once a fresh rebuild yields nothing.
    pub fn next_candidate(
        &mut self,
        model: &ItemsetModel,
        index: &PrefixTree,
    ) -> Option<Candidate> {
        let mut rebuilt = false;
        if self.built_for != Some(model.generation()) {
            self.rebuild(model, index);
            rebuilt = true;
        }
        loop {
            while let Some(top) = self.heap.pop() {
                self.queued.remove(&top.itemset);
                if model.contains(&top.itemset) || self.rejected.contains(&top.itemset) {
                    continue;
                }
                return Some(Candidate {
                    itemset: top.itemset,
                    support: top.support,
                });
            }
            if rebuilt {
                return None;
            }
            self.rebuild(model, index);
            rebuilt = true;
        }
    }

    fn rebuild(&mut self, model: &ItemsetModel, index: &PrefixTree) {
        self.heap.clear();
        self.queued.clear();
        self.built_for = Some(model.generation());

        let mut ranked: Vec<(u64, &Itemset)> = model
            .entries()
            .iter()
            .map(|e| (e.support, &e.itemset))
            .collect();
        ranked.sort_by(|a, b| b.0.cmp(&a.0).then_with(|| a.1.cmp(b.1)));

        'pairs: for (i, &(_, first)) in ranked.iter().enumerate() {
            for &(_, second) in &ranked[i + 1..] {
                let union = first.union(second);
                if model.contains(&union)
                    || self.rejected.contains(&union)
                    || self.queued.contains(&union)
                {
                    continue;
                }
                let support = *self
                    .supports
                    .entry(union.clone())
                    .or_insert_with(|| index.support(&union));
                self.queued.insert(union.clone());
                self.heap.push(Queued {
                    support,
                    seq: self.next_seq,
                    itemset: union,
                });
                self.next_seq += 1;
                if self.heap.len() >= self.capacity {
                    break 'pairs;
                }
            }
        }
    }
}

/// Next candidate itemset to try, or `None` when the queue is exhausted.
pub fn candidate_gen(
    queue: &mut CandidateQueue,
    model: &ItemsetModel,
    index: &PrefixTree,
) -> Option<Candidate> {
    queue.next_candidate(model, index)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::db::TransactionDb;

    fn setup() -> (TransactionDb, PrefixTree) {
        // supports: A=1 -> 10, B=2 -> 8, C=3 -> 2
        let mut raw = Vec::new();
        for k in 0..10 {
            let mut t = vec![1];
            if k < 8 {
                t.push(2);
            }
            if k < 2 {
                t.push(3);
            }
            raw.push(t);
        }
        let db = TransactionDb::from_raw(&raw);
        let tree = PrefixTree::build(&db);
        (db, tree)
    }

    fn singletons(db: &TransactionDb) -> ItemsetModel {
        let mut model = ItemsetModel::new();
        for item in db.items() {
            model
                .insert(Itemset::singleton(item), 0.5, db.item_support(item))
                .unwrap();
        }
        model
    }

    #[test]
    fn pairs_come_in_rank_order() {
        let (db, tree) = setup();
        let model = singletons(&db);
        let mut q = CandidateQueue::new(100);
        q.rebuild(&model, &tree);
        let mut order: Vec<_> = q.heap.iter().map(|e| (e.seq, e.itemset.clone())).collect();
        order.sort();
        let d = |ids: &[u32]| db.to_dense(&Itemset::of(ids)).unwrap();
        let expected = vec![d(&[1, 2]), d(&[1, 3]), d(&[2, 3])];
        assert_eq!(
            order.into_iter().map(|(_, s)| s).collect::<Vec<_>>(),
            expected
        );
    }

    #[test]
    fn pops_by_support_and_never_repeats_rejections() {
        let (db, tree) = setup();
        let model = singletons(&db);
        let mut q = CandidateQueue::new(100);
        let first = q.next_candidate(&model, &tree).unwrap();
        assert_eq!(first.support, 8);
        assert_eq!(first.itemset, db.to_dense(&Itemset::of(&[1, 2])).unwrap());
        q.reject(first.itemset.clone());
        let second = q.next_candidate(&model, &tree).unwrap();
        assert_eq!(second.support, 2);
        q.reject(second.itemset.clone());
        let third = q.next_candidate(&model, &tree).unwrap();
        q.reject(third.itemset.clone());
        assert!(q.next_candidate(&model, &tree).is_none());
        assert_eq!(q.rejected_count(), 3);
    }

    #[test]
    fn capacity_limits_each_build() {
        let (db, tree) = setup();
        let model = singletons(&db);
        let mut q = CandidateQueue::new(1);
        let mut seen = HashSet::new();
        while let Some(c) = q.next_candidate(&model, &tree) {
            assert!(q.len() <= 1);
            assert!(seen.insert(c.itemset.clone()));
            q.reject(c.itemset);
        }
        assert_eq!(seen.len(), 3);
    }

    #[test]
    fn unions_already_in_model_are_skipped() {
        let (db, tree) = setup();
        let mut model = singletons(&db);
        let ab = db.to_dense(&Itemset::of(&[1, 2])).unwrap();
        model.insert(ab.clone(), 0.5, 8).unwrap();
        let mut q = CandidateQueue::new(100);
        while let Some(c) = q.next_candidate(&model, &tree) {
            assert!(!model.contains(&c.itemset));
            assert_ne!(c.itemset, ab);
            q.reject(c.itemset);
        }
    }

    #[test]
    fn model_change_triggers_rebuild() {
        let (db, tree) = setup();
        let mut model = singletons(&db);
        let mut q = CandidateQueue::new(100);
        let c = q.next_candidate(&model, &tree).unwrap();
        model.insert(c.itemset.clone(), 0.5, c.support).unwrap();
        let next = q.next_candidate(&model, &tree).unwrap();
        // {A,B} u {C} = {A,B,C} is now reachable alongside {A,C} and {B,C}
        assert_eq!(next.support, 2);
        let mut all = vec![next.itemset];
        q.reject(all[0].clone());
        while let Some(c) = q.next_candidate(&model, &tree) {
            all.push(c.itemset.clone());
            q.reject(c.itemset);
        }
        assert!(all.contains(&db.to_dense(&Itemset::of(&[1, 2, 3])).unwrap()));
    }
}
