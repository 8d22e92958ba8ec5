use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Every failure the library can report.
///
/// Each variant carries a stable machine-readable code (see [`Error::code`])
/// which the CLI prints alongside the message.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("two streams agree on their first {cap} bits (inputs possibly not distinct)")]
    DepthCapExceeded { cap: usize },

    #[error("words {0} and {1} are prefix-comparable and cannot be compared lexicographically")]
    IncomparabilityViolated(String, String),

    #[error("empty input")]
    EmptyInput,

    #[error("tree is not radix-shaped: {0}")]
    NotRadixShaped(String),

    #[error("tree is not full: {0}")]
    NotFull(String),

    #[error("vertex set is not a binary tree: {0}")]
    NotATree(String),

    #[error("word {0} is not a leaf of the tree")]
    NotALeaf(String),

    #[error("the trivial tree has no predecessor")]
    TrivialTree,

    #[error("leaf count {n} exceeds the enumeration guard of {max}")]
    TooLarge { n: usize, max: usize },

    #[error("bad label set: {0}")]
    BadLabelSet(String),

    #[error("didendritic axiom {axiom} violated: {detail}")]
    AxiomViolation { axiom: String, detail: String },

    #[error("left/right seed axiom {axiom} violated: {detail}")]
    SeedAxiomViolation { axiom: String, detail: String },

    #[error("restriction to an empty label subset")]
    EmptySubset,

    #[error("label set of size {n} exceeds the guard of {max}")]
    TooManyLabels { n: usize, max: usize },

    #[error("degenerate sample: {0}")]
    DegenerateSample(String),

    #[error("property (T) violated: {0}")]
    PropertyTViolated(String),

    #[error("property (LR) violated: {0}")]
    PropertyLRViolated(String),

    #[error("leaf word {0} has zero mass under the source measure")]
    ZeroMassLeaf(String),

    #[error("expected trees with {expected} leaves, found one with {found}")]
    WrongLeafCount { expected: usize, found: usize },

    #[error("invalid measure: {0}")]
    InvalidMeasure(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

impl Error {
    /// Stable identifier used in machine-readable output.
    pub fn code(&self) -> &'static str {
        match self {
            Error::DepthCapExceeded { .. } => "DepthCapExceeded",
            Error::IncomparabilityViolated(..) => "IncomparabilityViolated",
            Error::EmptyInput => "EmptyInput",
            Error::NotRadixShaped(_) => "NotRadixShaped",
            Error::NotFull(_) => "NotFull",
            Error::NotATree(_) => "NotATree",
            Error::NotALeaf(_) => "NotALeaf",
            Error::TrivialTree => "TrivialTree",
            Error::TooLarge { .. } => "TooLarge",
            Error::BadLabelSet(_) => "BadLabelSet",
            Error::AxiomViolation { .. } => "AxiomViolation",
            Error::SeedAxiomViolation { .. } => "SeedAxiomViolation",
            Error::EmptySubset => "EmptySubset",
            Error::TooManyLabels { .. } => "TooManyLabels",
            Error::DegenerateSample(_) => "DegenerateSample",
            Error::PropertyTViolated(_) => "PropertyTViolated",
            Error::PropertyLRViolated(_) => "PropertyLRViolated",
            Error::ZeroMassLeaf(_) => "ZeroMassLeaf",
            Error::WrongLeafCount { .. } => "WrongLeafCount",
            Error::InvalidMeasure(_) => "InvalidMeasure",
            Error::Parse(_) => "Parse",
            Error::InvalidArgument(_) => "InvalidArgument",
        }
    }
}
