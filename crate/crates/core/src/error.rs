use crate::rat::Rat;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum Error {
    #[error("item size {0} outside [0, 12]")]
    SizeOutOfRange(Rat),
    #[error("bin count must be at least 1")]
    ZeroBins,
    #[error("bin {bin} (load {load}) matches no bin type")]
    Unclassifiable { bin: usize, load: Rat },
    #[error("item {item} does not fit in any bin")]
    NoFit { item: usize },
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("internal invariant violated: {0}")]
    Invariant(String),
    #[error("instance too large for exact oracle: {items} items, limit {limit}")]
    OracleTooLarge { items: usize, limit: usize },
    #[error("more than {0} distinct subset sums")]
    TooManySubsetSums(usize),
    #[error("common denominator of the item sizes overflows 128 bits")]
    DenominatorOverflow,
}

impl Error {
    /// True for errors caused by search or size limits rather than bad input.
    pub fn is_resource_limit(&self) -> bool {
        matches!(
            self,
            Error::OracleTooLarge { .. } | Error::TooManySubsetSums(_) | Error::DenominatorOverflow
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
