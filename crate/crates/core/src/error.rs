use thiserror::Error;

pub type Result<T> = core::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("transform determinant {0} is not ±1")]
    BadDeterminant(f64),

    #[error("squeeze factor must be positive, got {0}")]
    NonPositiveSqueeze(f64),

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: &'static str },

    #[error("region is empty or malformed: {0}")]
    BadRegion(&'static str),

    #[error("angle θ = {0} is outside the admissible range for this criterion")]
    DegenerateAngle(f64),

    #[error("covariance matrix is singular or unphysical (det = {0})")]
    SingularCovariance(f64),

    #[error("cat state with odd parity needs γ > 0; normalization diverges at γ = 0")]
    SingularNormalization,

    #[error("Fock cutoff {cutoff} too small: trace deficit {deficit:e}")]
    CutoffTooSmall { cutoff: usize, deficit: f64 },

    #[error("Fock cutoff mismatch: {0} vs {1}")]
    CutoffMismatch(usize, usize),

    #[error("quadrature did not converge: successive estimates {coarse} and {fine} differ beyond tolerance")]
    NonConvergence { coarse: f64, fine: f64 },

    #[error("full-plane integration needs a truncation box")]
    MissingTruncation,

    #[error("criterion II is not violated on the full plane (value {value}, bound {bound})")]
    NotViolated { value: f64, bound: f64 },

    #[error("expectation of a Hermitian operator has imaginary part {0:e}")]
    NonRealExpectation(f64),

    #[error("operation not supported for this Wigner backend: {0}")]
    Unsupported(&'static str),
}
