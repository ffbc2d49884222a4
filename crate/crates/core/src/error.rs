//! Crate-wide error type.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Error, Debug, Clone, PartialEq)]
pub enum Error {
    /// Input points do not satisfy the geometric preconditions of an
    /// operation (non-collinear cross-ratio arguments, mismatched dimensions,
    /// non-SPD shape matrix, ...).
    #[error("invalid geometry: {0}")]
    InvalidGeometry(String),

    /// A chord degenerated: coincident points or a zero-length direction.
    #[error("degenerate chord: {0}")]
    DegenerateChord(String),

    /// A point that must lie inside the open domain does not.
    #[error("point outside domain: {0}")]
    OutsideDomain(String),

    /// The supporting hyperplane is not unique at the given boundary point.
    #[error("supporting hyperplane not unique: {0}")]
    NonUniqueSupport(String),

    /// An iterative numeric procedure failed to reach its tolerance.
    #[error("numerical failure: {0}")]
    NumericalFailure(String),

    /// An enumeration exceeded its element budget.
    #[error("budget exceeded: {0}")]
    BudgetExceeded(String),

    /// A spectral gap too small to decide proximality reliably.
    #[error("spectral ambiguity: {0}")]
    SpectralAmbiguity(String),

    /// Patterson-Sullivan weights requested at a non-supercritical parameter.
    #[error("subcritical parameter: {0}")]
    SubcriticalParameter(String),

    /// A generator does not preserve the scenario domain.
    #[error("generator does not preserve domain: {0}")]
    NotAnAutomorphism(String),

    /// Axis data requested from an element without an attracting/repelling
    /// fixed-point pair.
    #[error("not biproximal: {0}")]
    NotBiproximal(String),

    /// The scenario lacks a property the operation requires (e.g. freeness).
    #[error("unsupported scenario: {0}")]
    UnsupportedScenario(String),

    /// Too few samples, shells, or lengths for the requested statistic.
    #[error("insufficient data: {0}")]
    InsufficientData(String),

    /// Malformed experiment configuration.
    #[error("config error: {0}")]
    Config(String),
}
