use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Every failure the library can report.
///
/// Indices carried in variants are 1-based, matching how parameters are
/// numbered in user-facing output.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("domain violation at index {index}: {detail}")]
    DomainViolation { index: usize, detail: String },

    #[error("shape error: {0}")]
    Shape(String),

    #[error("invalid value: {0}")]
    Value(String),

    #[error("capacity exceeded: {requested} > limit {limit} ({what})")]
    Capacity {
        what: &'static str,
        requested: u128,
        limit: u128,
    },

    #[error("singular input: {0}")]
    SingularInput(String),

    #[error("confluent extrapolation unstable: residual {residual:.3e} exceeds {bound:.3e}")]
    ExtrapolationUnstable { residual: f64, bound: f64 },

    #[error("numerical failure: {0}")]
    NumericalFailure(String),

    #[error("singular sample: |1 - y*lambda| = {0:.3e}")]
    SingularSample(f64),

    #[error("truncation too coarse: tail bound {bound:.3e} > tolerance {tolerance:.3e}")]
    TruncationTooCoarse { bound: f64, tolerance: f64 },

    #[error("generator count mismatch: {0} vs {1}")]
    GeneratorMismatch(usize, usize),

    #[error("parity contract violated: {0}")]
    Parity(String),

    #[error("singular block: {0}")]
    SingularBlock(&'static str),

    #[error("superdeterminant forms disagree by {0:.3e}")]
    FormMismatch(f64),

    #[error("D-block eigenvalue modulus {0} too close to the unit circle")]
    SpectrumOnCircle(f64),

    #[error("square root requested on the branch cut at {0}")]
    Branch(num_complex::Complex64),

    #[error("jet inverse with zero constant term")]
    DivisionByZeroJet,

    #[error("point not regular: margin {margin:.3e} below {required:.3e}")]
    SingularPoint { margin: f64, required: f64 },

    #[error("grid of {grid} points may alias modes up to {order}; need at least {required}")]
    AliasWarning { grid: usize, order: u32, required: usize },

    #[error("permutation crosses the p/q block split: {0}")]
    BlockViolation(String),
}

impl Error {
    /// Whether the failure stems from bad input rather than from the numerics.
    pub fn is_input_error(&self) -> bool {
        matches!(
            self,
            Error::DomainViolation { .. }
                | Error::Shape(_)
                | Error::Value(_)
                | Error::Capacity { .. }
                | Error::GeneratorMismatch(..)
                | Error::Parity(_)
                | Error::BlockViolation(_)
                | Error::AliasWarning { .. }
        )
    }
}
