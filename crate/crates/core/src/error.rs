//! Error type shared across the crate.

use thiserror::Error;

/// Everything that can go wrong, from bad curve data to a survey that
/// cannot certify its own rounding.
#[derive(Debug, Error)]
pub enum Error {
    /// Point counting is O(p) per prime; refuse absurd requests.
    #[error("prime {0} exceeds the point-counting limit {1}")]
    PrimeTooLarge(u64, u64),

    /// The given Weierstrass coefficients have discriminant zero.
    #[error("singular curve: discriminant vanishes for {0}")]
    SingularCurve(String),

    /// A root number must be +1 or -1.
    #[error("root number must be +1 or -1, got {0}")]
    InvalidRootNumber(i64),

    /// Neither choice of sign makes the functional equation self-consistent.
    #[error("root-number detection is indeterminate for {label}: diff(+1)={plus:.3e}, diff(-1)={minus:.3e}")]
    IndeterminateRootNumber {
        label: String,
        plus: f64,
        minus: f64,
    },

    /// A supplied root number contradicts the detected one.
    #[error("root number mismatch for {label}: supplied {supplied}, detected {detected}")]
    RootNumberMismatch {
        label: String,
        supplied: i8,
        detected: i8,
    },

    /// The AGM iteration failed to converge (should never happen for
    /// positive inputs; guards against NaN propagation).
    #[error("AGM failed to converge")]
    AgmNoConvergence,

    /// No primitive character of the requested order exists modulo m.
    #[error("no primitive order-{k} character exists modulo {m}")]
    NoPrimitiveCharacter { k: u64, m: u64 },

    /// The inner/outer certification boxes are only defined for some k.
    #[error("region {region} is not defined for k={k}")]
    RegionUndefined { region: String, k: u64 },

    /// Character arguments must be coprime to the conductor.
    #[error("gcd({a}, {m}) != 1: character argument must be coprime to the conductor")]
    NotCoprime { a: u64, m: u64 },

    /// A coefficient table was asked for more terms than it holds.
    #[error("coefficient table holds {have} terms but {needed} are needed")]
    InsufficientCoefficients { needed: u64, have: u64 },

    /// After unrotating, the candidate lattice vector kept a large
    /// imaginary part: the rotation did not cancel.
    #[error("rotation inconsistency (check root number / Gauss sum): |Im| = {imag:.3e} exceeds {tol:.3e}")]
    RotationInconsistency { imag: f64, tol: f64 },

    /// A rounding residual too large to certify, even after retrying at
    /// higher precision.
    #[error("cannot certify rounding: residual {0:.6e} after precision retry")]
    InsufficientPrecision(f64),

    /// The smoothed modular-symbol extrapolation failed its convergence
    /// check.
    #[error("modular-symbol smoothing did not converge: {0}")]
    SmoothingFailed(String),

    /// Monte Carlo or series evaluation outside the analytic domain.
    #[error("argument outside domain of analyticity: {0}")]
    OutsideAnalyticity(String),

    /// Bad configuration (CLI arguments, survey parameters, ...).
    #[error("configuration error: {0}")]
    Config(String),

    /// Malformed curve catalogue data.
    #[error("catalogue error: {0}")]
    Catalogue(String),

    /// Checkpoint file corrupt or inconsistent with the output.
    #[error("checkpoint error: {0}")]
    Checkpoint(String),

    /// Any I/O failure, wrapped.
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}
