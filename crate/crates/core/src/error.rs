use thiserror::Error;

/// Errors raised by the library. Solver runs never return these; they report
/// failure through [`crate::Status`] instead.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("resolution level j1 = {0} is too large for the node count to fit in usize")]
    ResolutionTooLarge(u32),

    #[error("invalid stop criteria: {0}")]
    InvalidCriteria(String),

    #[error("quadrature needs at least one node")]
    ZeroPoints,

    #[error("trace has {found} iterates, at least {needed} are required")]
    TraceTooShort { needed: usize, found: usize },

    #[error("no iterate triple lies in the asymptotic error window")]
    NoUsableTriple,

    #[error("no iterate pair lies in the asymptotic error window")]
    NoUsablePair,

    #[error("unknown function `{0}` (expected one of f1..f7)")]
    UnknownFunction(String),

    #[error("unknown method `{0}` (expected one of newton, wf, fs, oz, klw, new)")]
    UnknownMethod(String),

    #[error("unknown output format `{0}` (supported: text, csv, json)")]
    UnknownFormat(String),
}

pub type Result<T> = std::result::Result<T, Error>;
