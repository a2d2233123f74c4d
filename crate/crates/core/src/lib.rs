//! Central values of twisted elliptic-curve L-functions.
//!
//! Given an elliptic curve E/ℚ and an odd prime k, this crate computes the
//! central values L_E(1, χ) for Dirichlet characters χ of order k, decides
//! *exactly* whether each value vanishes by recognising an associated
//! algebraic number in a cyclotomic lattice, and compares the observed
//! vanishing statistics against random-matrix predictions.
//!
//! The pipeline, module by module:
//!
//! * [`curve`] — curve arithmetic: coefficients a_n by point counting, the
//!   real period Ω_E by the arithmetic–geometric mean, and detection of the
//!   root number w_E from the functional equation itself.
//! * [`dirichlet`] — order-k characters of admissible conductor m,
//!   organised into Galois conjugacy classes, with Gauss sums.
//! * [`lvalue`] — the smoothed approximate functional equation for
//!   L_E(1, χ), evaluated for a whole conjugacy class in one pass.
//! * [`cyclotomic`] — the real cyclotomic lattice ℤ[ζ_k]⁺ under its
//!   archimedean embedding; rounding, residuals, and the nested boxes
//!   R ⊆ R₂ ⊆ R′ that certify the rounding.
//! * [`rmt`] — moments of characteristic polynomials of random unitary
//!   matrices, the Barnes-type constants entering them, and a Monte Carlo
//!   sampler over U(N) for cross-checking.
//! * [`survey`] — the batch driver: sweep conductors m ≤ X, write one CSV
//!   row per conjugate, checkpoint, resume, and summarise.
//!
//! Everything is deterministic: a survey writes byte-identical output for
//! any `--jobs` value, and Monte Carlo runs are reproducible from a seed.

pub mod catalogue;
pub mod curve;
pub mod cyclotomic;
pub mod dirichlet;
pub mod error;
pub mod lvalue;
pub mod primes;
pub mod rmt;
pub mod survey;

pub use catalogue::builtin_curve;
pub use curve::{CoefficientTable, CurveData};
pub use cyclotomic::{EmbeddingMatrix, RealCycloElement, Region};
pub use dirichlet::{admissible_conductors, CharacterSpec, ConductorFactorization, ConjugacyClass};
pub use error::Error;
pub use lvalue::{
    check_central_value_identity, class_l_values, smoothed_modular_symbol, table_length_for,
    twist_record, AfeParams, TwistRecord,
};
pub use rmt::{
    barnes_g_half, class_vanishing_probability, heuristic_sum, mc_haar_moment, moment_product,
    Classification, RmtModel,
};
pub use survey::{
    predict_report, read_survey_csv, run_survey, summarize_rows, SurveyConfig, SurveySummary,
};

/// Convenience alias used throughout: `Result<T, elltwist::Error>`.
pub type Result<T> = std::result::Result<T, error::Error>;
