//! Prefix-tree index over a transaction database for exact itemset supports.
//!
//! Transactions are inserted with items in the database's dense order (most
//! frequent first), so common prefixes share nodes. Chains where a node has a
//! single child carrying the same count are collapsed into one node holding an
//! item run. There are no cross links between nodes of the same item; a
//! support query is a depth-first search pruned by the item order.
//!
//! Nodes are stored in preorder, so every subtree is a contiguous range of
//! node ids and the search is a forward scan that jumps over pruned subtrees.

use std::collections::BTreeMap;

use crate::db::TransactionDb;
use crate::model::{ItemId, Itemset};

#[derive(Clone, Copy, Debug)]
struct Node {
    run_start: u32,
    run_len: u32,
    /// One past the last node id of this node's subtree.
    end: u32,
    count: u64,
}

#[derive(Clone, Debug)]
pub struct PrefixTree {
    nodes: Vec<Node>,
    runs: Vec<ItemId>,
}

const ROOT: usize = 0;

#[derive(Default)]
struct Building {
    count: u64,
    children: BTreeMap<ItemId, Building>,
}

impl PrefixTree {
    pub fn build(db: &TransactionDb) -> PrefixTree {
        let mut root = Building {
            count: db.len() as u64,
            ..Default::default()
        };
        for t in db.transactions() {
            let mut node = &mut root;
            for &item in t.items() {
                node = node.children.entry(item).or_default();
                node.count += 1;
            }
        }

        let mut tree = PrefixTree {
            nodes: vec![Node {
                run_start: 0,
                run_len: 0,
                end: 0,
                count: root.count,
            }],
            runs: Vec::new(),
        };
        // (parent, item, subtree); popping in reverse item order yields preorder
        let mut stack: Vec<(usize, ItemId, Building)> = root
            .children
            .into_iter()
            .rev()
            .map(|(item, child)| (ROOT, item, child))
            .collect();
        let mut parents = vec![usize::MAX];
        while let Some((parent, item, mut node)) = stack.pop() {
            let run_start = tree.runs.len() as u32;
            tree.runs.push(item);
            while node.children.len() == 1
                && node.children.values().next().map(|c| c.count) == Some(node.count)
            {
                let (next, child) = node.children.pop_first().expect("one child");
                tree.runs.push(next);
                node = child;
            }
            let id = tree.nodes.len();
            tree.nodes.push(Node {
                run_start,
                run_len: tree.runs.len() as u32 - run_start,
                end: 0,
                count: node.count,
            });
            parents.push(parent);
            stack.extend(
                node.children
                    .into_iter()
                    .rev()
                    .map(|(item, child)| (id, item, child)),
            );
        }
        // subtree ends, children after parents in preorder
        let n = tree.nodes.len();
        let mut ends: Vec<usize> = (1..=n).collect();
        for id in (1..n).rev() {
            let parent = parents[id];
            ends[parent] = ends[parent].max(ends[id]);
        }
        for (node, end) in tree.nodes.iter_mut().zip(ends) {
            node.end = end as u32;
        }
        tree
    }

    /// Number of transactions indexed.
    pub fn transaction_count(&self) -> u64 {
        self.nodes[ROOT].count
    }

    /// Number of nodes, root excluded.
    pub fn node_count(&self) -> usize {
        self.nodes.len() - 1
    }

    fn run(&self, id: usize) -> &[ItemId] {
        let node = &self.nodes[id];
        &self.runs[node.run_start as usize..(node.run_start + node.run_len) as usize]
    }

    /// Number of transactions containing every item of `itemset`.
    pub fn support(&self, itemset: &Itemset) -> u64 {
        let query = itemset.items();
        let mut total = 0;
        // (subtree end, query items matched on the path to that subtree's root)
        let mut open: Vec<(usize, usize)> = vec![(self.nodes.len(), 0)];
        let mut id = 1;
        while id < self.nodes.len() {
            while open.last().is_some_and(|&(end, _)| id >= end) {
                open.pop();
            }
            let &(parent_end, mut matched) = open.last().expect("root stays open");
            let node = &self.nodes[id];
            let run = self.run(id);
            if run[0] > query[matched] {
                // siblings are sorted, so the rest of them start even later
                id = parent_end;
                continue;
            }
            let mut dead = false;
            for &item in run {
                if matched == query.len() {
                    break;
                }
                match item.cmp(&query[matched]) {
                    std::cmp::Ordering::Equal => matched += 1,
                    std::cmp::Ordering::Greater => {
                        dead = true;
                        break;
                    }
                    std::cmp::Ordering::Less => {}
                }
            }
            if dead {
                id = node.end as usize;
            } else if matched == query.len() {
                total += node.count;
                id = node.end as usize;
            } else {
                open.push((node.end as usize, matched));
                id += 1;
            }
        }
        total
    }
}
