use thiserror::Error;

/// Errors produced by the analytic formulas, the Fock-space oracle and the
/// sweep front end.
#[derive(Debug, Error)]
pub enum Error {
    #[error("{name} = {value} is outside the allowed range {range}")]
    Domain {
        name: &'static str,
        value: f64,
        range: &'static str,
    },

    #[error("unphysical quadrature variances: 16 var_x var_y = {product} < 1")]
    Unphysical { product: f64 },

    #[error("degenerate input: alpha = r = 0 leaves the squeezing fraction undefined")]
    DegenerateInput,

    #[error("squeezing parameter r = {given} is inconsistent with the photon budget (expected {expected})")]
    InconsistentSqueezing { given: f64, expected: f64 },

    #[error("cutoff {cutoff} too small: tail mass {tail:.3e} exceeds the budget {budget:.3e}")]
    CutoffTooSmall {
        cutoff: usize,
        tail: f64,
        budget: f64,
    },

    #[error("cutoff mismatch: {0} vs {1}")]
    CutoffMismatch(usize, usize),

    #[error("expected a {expected}-mode object, got {got} modes")]
    ModeMismatch { expected: usize, got: usize },

    #[error("operator is not Hermitian (max deviation {0:.3e})")]
    NotHermitian(f64),

    #[error("estimator variance {0:.3e} is too small for a sensitivity estimate")]
    ZeroVarianceEstimator(f64),

    #[error("config error: {0}")]
    Config(String),

    #[error("linear algebra backend failure: {0}")]
    Linalg(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
