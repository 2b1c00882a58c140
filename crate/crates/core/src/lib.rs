//! Interesting itemset mining under a Bernoulli itemset-union generative model.
//!
//! Every transaction is explained as the union of a few itemsets, each included
//! independently with its own probability. Per-transaction inference is a
//! weighted set cover solved greedily, parameters are fitted with hard EM, and
//! new itemsets are discovered by structural EM over pairwise unions of the
//! current model. Mined itemsets are ranked by the fraction of their supporting
//! transactions they actually explain.
//!
//! ```no_run
//! use itemset_core::{db::TransactionDb, learning::{iim_mine, MiningConfig}, ranking::rank};
//!
//! let db = TransactionDb::load_fimi("retail.dat")?;
//! let mined = iim_mine(&db, &MiningConfig::default())?;
//! for entry in rank(&mined.model, &mined.coverings)?.iter().take(10) {
//!     println!("{:.3} {:?}", entry.interestingness, entry.itemset);
//! }
//! # Ok::<(), itemset_core::Error>(())
//! ```

pub mod cover;
pub mod db;
mod error;
pub mod evaluation;
pub mod index;
pub mod learning;
pub mod model;
pub mod ranking;

pub use error::{Error, Result};
pub use model::{CoveringState, ItemId, Itemset, ItemsetModel, Transaction};
