use thiserror::Error;

/// Errors raised by the algebra, complex and bundle layers.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
  #[error("algebra has no blocks")]
  EmptyAlgebra,
  #[error("block weights sum to {0}, expected 1")]
  NotNormalized(f64),
  #[error("invalid factor block `{label}`: {reason}")]
  InvalidBlock { label: String, reason: String },
  #[error("duplicate block label `{0}`")]
  DuplicateLabel(String),
  #[error("shape mismatch: {0}")]
  ShapeMismatch(String),
  #[error("morphism is not an endomorphism")]
  NotEndomorphism,
  #[error("d∘d ≠ 0 at degree {degree} (residual {residual:e})")]
  NotAComplex { degree: usize, residual: f64 },
  #[error("hermitian eigensolve failed in block {block}")]
  EigensolveFailure { block: usize },
  #[error("no grid points inside the fit window")]
  EmptyWindow,
  #[error("density minus offset is nonpositive at λ = {lambda:e}")]
  NonpositiveDensity { lambda: f64 },
  #[error("spectral gap above λ is {gap:e}, below tolerance")]
  GapTooSmall { gap: f64 },
  #[error("eigenvalue {eigenvalue:e} lies within the tie band of λ = {lambda:e}")]
  BoundaryTie { eigenvalue: f64, lambda: f64 },
  #[error("homotopy certificate failed at degree {degree} (residual {residual:e})")]
  CertificateFailed { degree: usize, residual: f64 },
  #[error("chain map check failed for {what} (residual {residual:e})")]
  ChainMapFailed { what: String, residual: f64 },
  #[error("relation `{relation}` violated (residual {residual:e})")]
  RelationViolated { relation: String, residual: f64 },
  #[error("monodromy image of `{0}` is not invertible")]
  NotInvertible(String),
  #[error("cocycle condition violated on {what} (residual {residual:e})")]
  CocycleViolated { what: String, residual: f64 },
  #[error("unknown group element `{0}`")]
  UnknownGroupElement(String),
  #[error("unknown cell `{0}`")]
  UnknownCell(String),
  #[error("invalid cell data: {0}")]
  InvalidCell(String),
  #[error("subdivision unsupported for dimension {0}")]
  UnsupportedDimension(usize),
  #[error("no Morse value for cell `{0}`")]
  MissingCellValue(String),
  #[error("invalid matching: {0}")]
  InvalidMatching(String),
  #[error("deformation parameter must be positive, got {0}")]
  NonpositiveT(f64),
  #[error("invalid parameter: {0}")]
  InvalidParameter(String),
  #[error("parse error in {path}: {location}")]
  Parse { path: String, location: String },
}

/// Coarse failure class used to map errors onto process exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorClass {
  /// Input does not describe a valid object.
  Validation,
  /// Input is valid but a numerical precondition does not hold.
  Numerical,
}

impl Error {
  /// Stable machine-readable code.
  pub fn code(&self) -> &'static str {
    match self {
      Error::EmptyAlgebra => "EmptyAlgebra",
      Error::NotNormalized(_) => "NotNormalized",
      Error::InvalidBlock { .. } => "InvalidBlock",
      Error::DuplicateLabel(_) => "DuplicateLabel",
      Error::ShapeMismatch(_) => "ShapeMismatch",
      Error::NotEndomorphism => "NotEndomorphism",
      Error::NotAComplex { .. } => "NotAComplex",
      Error::EigensolveFailure { .. } => "EigensolveFailure",
      Error::EmptyWindow => "EmptyWindow",
      Error::NonpositiveDensity { .. } => "NonpositiveDensity",
      Error::GapTooSmall { .. } => "GapTooSmall",
      Error::BoundaryTie { .. } => "BoundaryTie",
      Error::CertificateFailed { .. } => "CertificateFailed",
      Error::ChainMapFailed { .. } => "ChainMapFailed",
      Error::RelationViolated { .. } => "RelationViolated",
      Error::NotInvertible(_) => "NotInvertible",
      Error::CocycleViolated { .. } => "CocycleViolated",
      Error::UnknownGroupElement(_) => "UnknownGroupElement",
      Error::UnknownCell(_) => "UnknownCell",
      Error::InvalidCell(_) => "InvalidCell",
      Error::UnsupportedDimension(_) => "UnsupportedDimension",
      Error::MissingCellValue(_) => "MissingCellValue",
      Error::InvalidMatching(_) => "InvalidMatching",
      Error::NonpositiveT(_) => "NonpositiveT",
      Error::InvalidParameter(_) => "InvalidParameter",
      Error::Parse { .. } => "ParseError",
    }
  }

  pub fn class(&self) -> ErrorClass {
    match self {
      Error::EigensolveFailure { .. }
      | Error::EmptyWindow
      | Error::NonpositiveDensity { .. }
      | Error::GapTooSmall { .. }
      | Error::BoundaryTie { .. }
      | Error::CertificateFailed { .. }
      | Error::ChainMapFailed { .. } => ErrorClass::Numerical,
      _ => ErrorClass::Validation,
    }
  }
}

pub type Result<T> = std::result::Result<T, Error>;
