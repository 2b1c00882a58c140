use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("line {line}: invalid item token {token:?}")]
    Parse { line: usize, token: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("malformed model file: {0}")]
    Json(#[from] serde_json::Error),

    #[error("invalid model: {0}")]
    InvalidModel(String),

    #[error("invalid covering: {0}")]
    InvalidCovering(String),

    /// A transaction item is contained in no supported itemset. Only happens
    /// when the model no longer covers every database item.
    #[error("item {item} of transaction {transaction} is not covered by any supported itemset")]
    Infeasible { transaction: usize, item: u32 },

    #[error("exhaustive cover search limited to {limit} itemsets, got {size}")]
    InstanceTooLarge { size: usize, limit: usize },

    #[error("empty database")]
    EmptyDatabase,

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("usage {usage} exceeds support {support}")]
    UsageExceedsSupport { usage: u64, support: u64 },

    #[error("need at least two itemsets, got {0}")]
    TooFewItemsets(usize),

    #[error("truth set is empty")]
    EmptyTruth,
}
