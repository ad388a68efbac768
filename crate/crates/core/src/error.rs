use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Failures raised by the numerical operations.
///
/// Numeric payloads are stored as `f64` whatever scalar the computation
/// ran in, so the error type stays independent of the scalar parameter.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("malformed coefficients: {0}")]
    MalformedCoefficients(String),
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("quadrature error estimate {estimate:e} exceeds tolerance {tol:e}")]
    QuadratureFailure { estimate: f64, tol: f64 },
    #[error("step size underflow at t = {t} for lambda = {lambda_re}{lambda_im:+}i")]
    StepSizeUnderflow { lambda_re: f64, lambda_im: f64, t: f64 },
    #[error("pair is not in the maximal relation (residual {residual:e})")]
    NotInMaximalRelation { residual: f64 },
    #[error("boundary matrix is singular (condition number {cond:e})")]
    SingularBoundaryMatrix { cond: f64 },
    #[error("root finding failed: {0}")]
    RootFindingFailure(String),
    #[error("Weyl constraint system is singular (condition number {cond:e})")]
    SingularConstraintSystem { cond: f64 },
    #[error("pencil C0 - C1 M is singular (condition number {cond:e})")]
    SingularPencil { cond: f64 },
    #[error("epsilon extrapolation did not stabilise (spread {spread:e})")]
    ExtrapolationDivergence { spread: f64 },
    #[error("jump matrix is not positive semidefinite (min eigenvalue {min_eig:e})")]
    NotPsd { min_eig: f64 },
    #[error("element is not in the domain of the multiplication operator")]
    UnboundedElement,
    #[error("unsupported weight structure: {0}")]
    UnsupportedWeightStructure(String),
    #[error("parse error: {0}")]
    Parse(String),
}

impl Error {
    /// Input problems (as opposed to numerical breakdowns).
    pub fn is_validation(&self) -> bool {
        matches!(
            self,
            Error::MalformedCoefficients(_)
                | Error::InvalidInput(_)
                | Error::Parse(_)
                | Error::UnsupportedWeightStructure(_)
                | Error::NotInMaximalRelation { .. }
        )
    }
}
