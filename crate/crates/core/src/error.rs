use thiserror::Error;

/// Failures raised by the exact and numeric pipelines.
///
/// Every variant is a mathematical condition, not a programming error: the
/// CLI maps all of them to exit code 3.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("even part vanishes{}", fmt_index(*.index))]
    VanishingEvenPart { index: Option<i64> },

    #[error("parse error at position {position}: {message}")]
    Parse { position: usize, message: String },

    #[error("division by zero in {context}")]
    DivisionByZero { context: &'static str },

    #[error("index {n} is outside the computed range")]
    IndexOutOfRange { n: i64 },

    #[error("exact division failed: numerator is not a multiple of the divisor")]
    NotDivisible,

    #[error("leading coefficient C3 vanishes at n = {n}")]
    SingularLeadingCoefficient { n: i64 },

    #[error("Casoratian vanishes at n = {n}")]
    SingularCasoratian { n: i64 },

    #[error("consistency check failed: {0}")]
    Consistency(String),

    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("alpha has vanishing even part; the curve data is undefined")]
    DegenerateAlpha,

    #[error("singular curve: discriminant g2^3 - 27 g3^2 vanishes")]
    SingularCurve,

    #[error("no branch choice meets tolerance (best residual {best:e})")]
    BranchFailure { best: f64 },

    #[error("argument outside the reliable evaluation domain: {0}")]
    Domain(String),
}

fn fmt_index(index: Option<i64>) -> String {
    match index {
        Some(n) => format!(" at n = {n}"),
        None => String::new(),
    }
}

impl Error {
    pub(crate) fn vanishing() -> Self {
        Error::VanishingEvenPart { index: None }
    }

    pub(crate) fn vanishing_at(n: i64) -> Self {
        Error::VanishingEvenPart { index: Some(n) }
    }

    /// Attach an index to a `VanishingEvenPart` raised without one.
    pub(crate) fn at_index(self, n: i64) -> Self {
        match self {
            Error::VanishingEvenPart { index: None } => Error::vanishing_at(n),
            other => other,
        }
    }

    /// Short machine-readable tag used in diagnostics.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::VanishingEvenPart { .. } => "VanishingEvenPart",
            Error::Parse { .. } => "ParseError",
            Error::DivisionByZero { .. } => "DivisionByZero",
            Error::IndexOutOfRange { .. } => "IndexOutOfRange",
            Error::NotDivisible => "NotDivisible",
            Error::SingularLeadingCoefficient { .. } => "SingularLeadingCoefficient",
            Error::SingularCasoratian { .. } => "SingularCasoratian",
            Error::Consistency(_) => "ConsistencyError",
            Error::InvalidParams(_) => "InvalidParams",
            Error::DegenerateAlpha => "DegenerateAlpha",
            Error::SingularCurve => "SingularCurve",
            Error::BranchFailure { .. } => "BranchFailure",
            Error::Domain(_) => "DomainError",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
