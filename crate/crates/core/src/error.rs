use thiserror::Error;

/// Errors surfaced by the engine. Batch paths collect these per row rather
/// than aborting; loaders and single assessments return them directly.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid CN code {input:?}: contains non-digit characters")]
    CnNonDigit { input: String },

    #[error("invalid CN code {input:?}: length {len} not one of 2, 4, 6 or 8")]
    CnBadLength { input: String, len: usize },

    #[error("annex list is empty")]
    EmptyAnnex,

    #[error("annex entry {longer:?} is redundant: {shorter:?} already covers it")]
    RedundantAnnexEntry { shorter: String, longer: String },

    #[error("good {good:?} lists unknown input {input:?}")]
    DanglingInput { good: String, input: String },

    #[error("bill-of-materials cycle: {}", .0.join(" -> "))]
    CycleDetected(Vec<String>),

    #[error("negative quantity {value} for {context}")]
    NegativeQuantity { context: String, value: String },

    #[error("duplicate good id {0:?}")]
    DuplicateGood(String),

    #[error("no intensity default for country {country:?}, sector {sector}")]
    MissingDefault { country: String, sector: String },

    #[error("duplicate intensity default for country {country:?}, sector {sector}")]
    DuplicateDefault { country: String, sector: String },

    #[error("price rows for {country:?} not strictly increasing at {date}")]
    PriceOrder { country: String, date: String },

    #[error("unknown good {0:?}")]
    UnknownGood(String),

    #[error("unit mismatch for good {good:?}: declared quantity is tonnes but the good is {unit}-basis")]
    UnitMismatch { good: String, unit: String },

    #[error("series {country}/{cn_code} has fewer than {needed} points ending at {at}")]
    InsufficientHistory {
        country: String,
        cn_code: String,
        needed: usize,
        at: String,
    },

    #[error("series {country}/{cn_code} baseline mean {mean} below minimum {min}")]
    BaselineTooSmall {
        country: String,
        cn_code: String,
        mean: String,
        min: String,
    },

    #[error("missing or malformed header: expected {expected:?}")]
    MissingHeader { expected: String },

    #[error("{0}")]
    Parse(String),

    #[error("invalid document: {0}")]
    Document(String),
}

pub type Result<T> = std::result::Result<T, Error>;
