//! Error taxonomy for the whole pipeline.
//!
//! The variants fall into three groups that the command-line front end maps
//! onto distinct exit codes: bad input (vectors of the wrong shape, classes
//! that are not roots, invalid configuration), resource exhaustion (the
//! enumeration cap), and genuine computational failures (vanishing sections,
//! non-convergent degree estimates, method disagreement).

use crate::degree::DegreeCertificate;
use crate::lattice::LatticeVector;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// Malformed or out-of-range input (vector shape, configuration values).
    #[error("invalid input: {0}")]
    Input(String),

    /// A class that was required to satisfy a precondition (for example
    /// membership in the enumerated root set) does not.
    #[error("precondition violated: {0}")]
    Precondition(String),

    /// The splitting vector pairs to zero with an enumerated root, so the
    /// positive/negative partition of the root system is ill-defined.  The
    /// root is boxed to keep the error (and every `Result` carrying it) small.
    #[error("splitting vector pairs to zero with root {root:?}; perturb the splitting vector")]
    Splitting { root: Box<LatticeVector> },

    /// Enumeration would produce more vectors than the configured cap.
    #[error("enumeration would emit {needed} vectors, exceeding the cap of {cap}")]
    Resource { needed: u64, cap: u64 },

    /// A Gram matrix that must be positive definite is not.
    #[error("gram matrix is not positive definite: {0}")]
    Geometry(String),

    /// A Gram matrix is positive definite but too ill-conditioned to
    /// orthonormalize reliably.
    #[error("condition estimate {estimate:.3e} exceeds the limit {limit:.3e}")]
    Conditioning { estimate: f64, limit: f64 },

    /// Base-point construction ran out of perturbation retries without
    /// certifying genericity against the enumerated roots.
    #[error(
        "base point construction failed after {attempts} attempts; \
         nearest offending root {root:?} (margin {margin:.3e})"
    )]
    Construction {
        attempts: u32,
        root: Box<LatticeVector>,
        margin: f64,
    },

    /// The family parameter is too large: epsilon^2 >= 2 degenerates the
    /// frame metric.
    #[error("epsilon = {epsilon} is outside (0, sqrt(2)); the frame metric degenerates")]
    DegenerateMetric { epsilon: f64 },

    /// A map that must avoid zero vanishes (or nearly vanishes) at a grid
    /// point.
    #[error("map vanishes near {point:?} (|w| = {norm:.3e})")]
    Vanishing { point: [f64; 3], norm: f64 },

    /// A wall section vanishes on the verification grid, so the family does
    /// not stay inside a single chamber for this class.
    #[error("wall section of {alpha:?} is not bounded away from zero (min |w| = {min:.3e})")]
    Wall { alpha: Box<LatticeVector>, min: f64 },

    /// The degree estimate did not settle to an integer within the residual
    /// budget at the finest grid refinement.
    #[error(
        "degree estimate {raw:.6} has residual {residual:.3} at refinement level {level}; \
         no further refinement available"
    )]
    NonConvergence { raw: f64, residual: f64, level: u32 },

    /// Preimage solutions stayed degenerate (non-transverse or clustered)
    /// through the full regular-value retry budget.
    #[error("preimage computation stayed degenerate after {retries} regular-value retries")]
    Degenerate { retries: u32 },

    /// The two independent degree methods disagree.  Both certificates are
    /// carried so the caller can audit the failure.
    #[error(
        "degree methods disagree: kronecker {} vs preimage {}",
        kronecker.degree, preimage.degree
    )]
    MethodDisagreement {
        kronecker: Box<DegreeCertificate>,
        preimage: Box<DegreeCertificate>,
    },

    /// An arithmetic convention was violated (divisibility or parity of a
    /// characteristic-number formula).
    #[error("convention violated: {0}")]
    Convention(String),

    /// Filesystem or serialization failure in the front end.
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Exit-code class used by the command-line front end:
    /// 1 input, 2 resource, 3 computation.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Input(_)
            | Error::Precondition(_)
            | Error::Convention(_)
            | Error::DegenerateMetric { .. } => 1,
            Error::Resource { .. } => 2,
            _ => 3,
        }
    }
}
