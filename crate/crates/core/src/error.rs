use thiserror::Error;

use crate::algebra::AlgebraShape;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid algebra shape: {0}")]
    InvalidShape(String),

    #[error("shape mismatch: {left} vs {right}")]
    ShapeMismatch { left: AlgebraShape, right: AlgebraShape },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("invalid state: {0}")]
    InvalidState(String),

    #[error("zero vector")]
    ZeroVector,

    #[error("numerical failure: {0}")]
    NumericalFailure(String),

    #[error("element is not self-adjoint (‖x − x*‖ = {defect:.3e}, tolerance {tol:.3e})")]
    NotSelfAdjoint { defect: f64, tol: f64 },

    #[error("element is not a projection within tolerance {tol:.3e}")]
    NotAProjection { tol: f64 },

    #[error("{lambda} is not in the spectrum (distance {distance:.3e}, cluster tolerance {cluster_tol:.3e})")]
    NotInSpectrum {
        lambda: f64,
        distance: f64,
        cluster_tol: f64,
    },

    #[error("state is not an eigenstate (residual {residual:.3e}, tolerance {tol:.3e})")]
    NotAnEigenstate { residual: f64, tol: f64 },

    #[error("compression undefined: E(p) = {weight:.3e} is not above {tol:.3e}")]
    ZeroWeight { weight: f64, tol: f64 },

    #[error("witness requires distinct finite eigenvalues, got {0} and {1}")]
    DegenerateWitness(f64, f64),

    #[error("function {name} is not finite at {at}")]
    EvaluatorDomain { name: String, at: f64 },

    #[error("unbound name `{0}`")]
    UnboundName(String),

    #[error(transparent)]
    Syntax(#[from] crate::expr::SyntaxError),

    #[error("malformed document: {0}")]
    Format(String),
}

impl Error {
    pub(crate) fn shape_mismatch(left: &AlgebraShape, right: &AlgebraShape) -> Self {
        Error::ShapeMismatch {
            left: left.clone(),
            right: right.clone(),
        }
    }
}

impl From<serde_json::Error> for Error {
    fn from(err: serde_json::Error) -> Self {
        Error::Format(err.to_string())
    }
}
