use rayon::prelude::*;

use crate::cover::greedy_select;
use crate::db::TransactionDb;
use crate::model::{
    exclusion_cost, inclusion_cost, CoveringState, ItemId, Itemset, ItemsetModel, TransactionCover,
};
use crate::{Error, Result};

/// Receives a view of the model and coverings after every M-step, including
/// the tentative M-steps run while a candidate is on trial.
pub trait MiningObserver {
    /// Trial views are materialized only when this returns true.
    fn wants_m_steps(&self) -> bool {
        false
    }

    fn on_m_step(&mut self, _view: &MStepView<'_>) {}
}

impl MiningObserver for () {}

pub struct MStepView<'a> {
    pub model: &'a ItemsetModel,
    /// Chosen model positions per transaction.
    pub coverings: &'a [Vec<u32>],
    pub transactions: usize,
    /// True while a candidate is on trial (its outcome is not yet known).
    pub trial: bool,
}

impl MStepView<'_> {
    pub fn chosen(&self, j: usize) -> impl Iterator<Item = &Itemset> {
        self.coverings[j]
            .iter()
            .map(|&p| &self.model.entry(p as usize).itemset)
    }
}

/// E-step under the current probabilities, shared by every candidate trial
/// until the model changes.
#[derive(Clone, Debug)]
struct Baseline {
    weights: Vec<f64>,
    chosen: Vec<Vec<u32>>,
    usage: Vec<u64>,
}

pub(crate) struct Trial {
    pub accepted: bool,
    pub mean_cost_after: f64,
}

/// Model plus per-transaction caches: the supported model positions and the
/// current covering of every transaction. Positions refer to
/// `model.entries()` and are kept ascending.
#[derive(Clone, Debug)]
pub struct MiningState<'db> {
    db: &'db TransactionDb,
    model: ItemsetModel,
    supported: Vec<Vec<u32>>,
    chosen: Vec<Vec<u32>>,
    usage: Vec<u64>,
    baseline: Option<Baseline>,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HardEmOutcome {
    pub iterations: usize,
    pub converged: bool,
    pub pruned: usize,
}

impl<'db> MiningState<'db> {
    /// Indexes the model against the database and solves an initial E-step
    /// with the model's probabilities left as they are.
    pub fn new(db: &'db TransactionDb, model: ItemsetModel) -> Result<Self> {
        let supported = supported_positions(db, &model);
        let mut state = MiningState {
            db,
            model,
            supported,
            chosen: Vec::new(),
            usage: Vec::new(),
            baseline: None,
        };
        let weights = state.weights();
        state.chosen = state.e_step(&weights)?;
        state.usage = count_usage(&state.chosen, state.model.len());
        Ok(state)
    }

    pub fn db(&self) -> &'db TransactionDb {
        self.db
    }

    pub fn model(&self) -> &ItemsetModel {
        &self.model
    }

    pub fn into_model(self) -> ItemsetModel {
        self.model
    }

    /// Number of transactions each model itemset explains, by position.
    pub fn usage(&self) -> &[u64] {
        &self.usage
    }

    /// Chosen model positions for transaction `j`.
    pub fn chosen(&self, j: usize) -> &[u32] {
        &self.chosen[j]
    }

    /// Average objective over all transactions for the current probabilities
    /// and coverings.
    pub fn mean_cost(&self) -> f64 {
        mean_cost(&self.model.pis(), &self.usage, self.db.len())
    }

    /// Coverings with each transaction's full objective value.
    pub fn covering_state(&self) -> CoveringState {
        let on: Vec<f64> = self
            .model
            .entries()
            .iter()
            .map(|e| inclusion_cost(e.pi))
            .collect();
        let off: Vec<f64> = self
            .model
            .entries()
            .iter()
            .map(|e| exclusion_cost(e.pi))
            .collect();
        let covers = self
            .chosen
            .par_iter()
            .map(|picked| {
                let mut next = picked.iter().peekable();
                let mut cost = 0.0;
                for p in 0..on.len() {
                    if next.peek() == Some(&&(p as u32)) {
                        next.next();
                        cost += on[p];
                    } else {
                        cost += off[p];
                    }
                }
                TransactionCover {
                    chosen: picked
                        .iter()
                        .map(|&p| self.model.entry(p as usize).itemset.clone())
                        .collect(),
                    cost,
                }
            })
            .collect();
        CoveringState::new(covers)
    }

    fn weights(&self) -> Vec<f64> {
        self.model
            .entries()
            .iter()
            .map(|e| inclusion_cost(e.pi))
            .collect()
    }

    fn solve(
        &self,
        j: usize,
        weights: &[f64],
        forced: Option<(u32, &[ItemId])>,
    ) -> Result<Vec<u32>> {
        let mut candidates: Vec<(&[ItemId], f64)> = self.supported[j]
            .iter()
            .map(|&p| {
                (
                    self.model.entry(p as usize).itemset.items(),
                    weights[p as usize],
                )
            })
            .collect();
        if let Some((_, items)) = forced {
            candidates.push((items, 0.0));
        }
        let transaction = self.db.transaction(j);
        let picks =
            greedy_select(transaction.items(), &candidates).map_err(|item| Error::Infeasible {
                transaction: j,
                item: self.db.original_id(item),
            })?;
        let mut positions: Vec<u32> = picks
            .into_iter()
            .map(|k| match self.supported[j].get(k) {
                Some(&p) => p,
                None => forced.expect("forced candidate").0,
            })
            .collect();
        positions.sort_unstable();
        Ok(positions)
    }

    fn e_step(&self, weights: &[f64]) -> Result<Vec<Vec<u32>>> {
        (0..self.db.len())
            .into_par_iter()
            .map(|j| self.solve(j, weights, None))
            .collect()
    }

    fn ensure_baseline(&mut self) -> Result<()> {
        if self.baseline.is_none() {
            let weights = self.weights();
            let chosen = self.e_step(&weights)?;
            let usage = count_usage(&chosen, self.model.len());
            self.baseline = Some(Baseline {
                weights,
                chosen,
                usage,
            });
        }
        Ok(())
    }

    /// Hard EM: alternate E-steps and M-steps until the L2 change of the
    /// probability vector is at most `tolerance` or `max_iterations` is hit,
    /// then drop unused non-singleton itemsets.
    pub fn hard_em(
        &mut self,
        tolerance: f64,
        max_iterations: usize,
        observer: &mut dyn MiningObserver,
    ) -> Result<HardEmOutcome> {
        let m = self.db.len();
        let mut pis = self.model.pis();
        let mut outcome = HardEmOutcome {
            iterations: 0,
            converged: false,
            pruned: 0,
        };
        while outcome.iterations < max_iterations {
            outcome.iterations += 1;
            let weights: Vec<f64> = pis.iter().map(|&p| inclusion_cost(p)).collect();
            self.chosen = self.e_step(&weights)?;
            self.usage = count_usage(&self.chosen, self.model.len());
            let next = m_step(&self.usage, m);
            let change = l2_distance(&pis, &next);
            self.model.set_pis(&next)?;
            self.baseline = None;
            observer.on_m_step(&MStepView {
                model: &self.model,
                coverings: &self.chosen,
                transactions: m,
                trial: false,
            });
            pis = next;
            if change <= tolerance {
                outcome.converged = true;
                break;
            }
        }
        outcome.pruned = self.prune_unused();
        Ok(outcome)
    }

    /// Removes non-singleton itemsets no transaction uses. Singletons stay so
    /// every database item remains coverable.
    pub fn prune_unused(&mut self) -> usize {
        let usage = &self.usage;
        let kept = self
            .model
            .retain(|p, e| usage[p] > 0 || e.itemset.is_singleton());
        let removed = usage.len() - kept.len();
        if removed == 0 {
            return 0;
        }
        let mut remap = vec![u32::MAX; usage.len()];
        for (new, &old) in kept.iter().enumerate() {
            remap[old] = new as u32;
        }
        let apply = |lists: &mut Vec<Vec<u32>>| {
            for list in lists.iter_mut() {
                list.retain(|&p| remap[p as usize] != u32::MAX);
                for p in list.iter_mut() {
                    *p = remap[*p as usize];
                }
            }
        };
        apply(&mut self.supported);
        apply(&mut self.chosen);
        self.usage = kept.iter().map(|&old| self.usage[old]).collect();
        self.baseline = None;
        removed
    }

    /// One candidate trial. The candidate joins with selection weight zero,
    /// every transaction is re-solved, all probabilities are re-estimated and
    /// the average objective is evaluated at the new probabilities with those
    /// coverings. The candidate is kept only on strict improvement; otherwise
    /// the state is left untouched.
    pub(crate) fn try_candidate(
        &mut self,
        candidate: &Itemset,
        support: u64,
        observer: &mut dyn MiningObserver,
    ) -> Result<Trial> {
        self.ensure_baseline()?;
        let m = self.db.len();
        let before = self.mean_cost();
        let baseline = self.baseline.as_ref().expect("baseline");
        let new_pos = self.model.len() as u32;

        // Transactions that do not contain the candidate keep their baseline
        // solution: their supported sets and weights are unchanged.
        let tids = self.db.supporting_transactions(candidate);
        let overrides: Vec<(u32, Vec<u32>)> = tids
            .par_iter()
            .map(|&j| {
                self.solve(
                    j as usize,
                    &baseline.weights,
                    Some((new_pos, candidate.items())),
                )
                .map(|c| (j, c))
            })
            .collect::<Result<_>>()?;

        let mut usage = baseline.usage.clone();
        usage.push(0);
        for (j, picked) in &overrides {
            for &p in &baseline.chosen[*j as usize] {
                usage[p as usize] -= 1;
            }
            for &p in picked {
                usage[p as usize] += 1;
            }
        }
        let pis = m_step(&usage, m);

        if observer.wants_m_steps() {
            let mut model = self.model.clone();
            model.insert(candidate.clone(), 0.0, support)?;
            model.set_pis(&pis)?;
            let mut coverings = baseline.chosen.clone();
            for (j, picked) in &overrides {
                coverings[*j as usize] = picked.clone();
            }
            observer.on_m_step(&MStepView {
                model: &model,
                coverings: &coverings,
                transactions: m,
                trial: true,
            });
        }

        let after = mean_cost(&pis, &usage, m);
        if after >= before {
            return Ok(Trial {
                accepted: false,
                mean_cost_after: after,
            });
        }

        let baseline = self.baseline.take().expect("baseline");
        let pos = self
            .model
            .insert(candidate.clone(), pis[new_pos as usize], support)?;
        debug_assert_eq!(pos, new_pos as usize);
        self.model.set_pis(&pis)?;
        self.chosen = baseline.chosen;
        for (j, picked) in overrides {
            self.supported[j as usize].push(new_pos);
            self.chosen[j as usize] = picked;
        }
        self.usage = usage;
        Ok(Trial {
            accepted: true,
            mean_cost_after: after,
        })
    }
}

/// Runs hard EM on `model` over `db` and returns the fitted model with its
/// final coverings.
pub fn hard_em(
    model: ItemsetModel,
    db: &TransactionDb,
    tolerance: f64,
    max_iterations: usize,
) -> Result<(ItemsetModel, CoveringState)> {
    if tolerance.is_nan() || tolerance <= 0.0 || max_iterations == 0 {
        return Err(Error::InvalidConfig(
            "hard EM needs a positive tolerance and at least one iteration".into(),
        ));
    }
    let mut state = MiningState::new(db, model)?;
    state.hard_em(tolerance, max_iterations, &mut ())?;
    let coverings = state.covering_state();
    Ok((state.into_model(), coverings))
}

fn supported_positions(db: &TransactionDb, model: &ItemsetModel) -> Vec<Vec<u32>> {
    let mut lists = vec![Vec::new(); db.len()];
    for (pos, entry) in model.entries().iter().enumerate() {
        for j in db.supporting_transactions(&entry.itemset) {
            lists[j as usize].push(pos as u32);
        }
    }
    lists
}

fn count_usage(chosen: &[Vec<u32>], len: usize) -> Vec<u64> {
    let mut usage = vec![0u64; len];
    for picked in chosen {
        for &p in picked {
            usage[p as usize] += 1;
        }
    }
    usage
}

pub(crate) fn m_step(usage: &[u64], transactions: usize) -> Vec<f64> {
    usage
        .iter()
        .map(|&u| u as f64 / transactions as f64)
        .collect()
}

/// Average objective from per-itemset usage counts: each itemset contributes
/// its inclusion cost for every transaction using it and its exclusion cost
/// for every other transaction.
pub(crate) fn mean_cost(pis: &[f64], usage: &[u64], transactions: usize) -> f64 {
    if transactions == 0 {
        return 0.0;
    }
    let m = transactions as u64;
    let total: f64 = pis
        .iter()
        .zip(usage)
        .map(|(&pi, &u)| u as f64 * inclusion_cost(pi) + (m - u) as f64 * exclusion_cost(pi))
        .sum();
    total / transactions as f64
}

fn l2_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}
