//! Spectral distances between normal matrices and their spectral measures.
//!
//! - optimal matching distance `δ(a, b) = min_σ max_i |α_i - β_σ(i)|`,
//! - unitary orbit distance `d_U(a, b) = inf_u ‖a - u b u*‖`,
//! - `W_∞` between discrete probability measures.
//!
//! For Hermitian pairs `δ ≤ d_U` always holds and the sorted-eigenvalue
//! alignment attains it, so the two coincide; the same is true of unitary
//! pairs. For general normal pairs only `d_U ≤ δ` is guaranteed.

mod matching;
mod matrix;
mod measure;
mod unitary;
pub mod weyl;

pub use matching::{bottleneck_assignment, matching_distance, sorted_matching_distance, EigenMultiset};
pub use matrix::{
    operator_norm, random_hermitian, random_normal, random_unitary, CMatrix, NormalMatrix,
    SpectralKind, HERMITIAN_TOL, NORMALITY_TOL,
};
pub use measure::{
    expand_atoms, spectral_measure, wasserstein_inf, winf_pair, ComplexPlane, DiscreteMeasure,
    Euclidean, Metric, RealLine, ATOM_MERGE_TOL,
};
pub use unitary::{unitary_distance, UnitaryDistance, UnitaryDistanceOptions, MIN_RANDOM_STARTS, MIN_STARTS};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TransportError {
    #[error("size mismatch: {0} vs {1}")]
    SizeMismatch(usize, usize),
    #[error("empty multiset")]
    Empty,
    #[error("matrix is not normal: ‖aa* - a*a‖ = {0:e}")]
    NotNormal(f64),
    #[error("matrix is not square: {0}x{1}")]
    NotSquare(usize, usize),
    #[error("invalid measure: {0}")]
    InvalidMeasure(String),
    #[error("atom {0} lies outside the metric space")]
    IncompatibleSpaces(usize),
    #[error("invalid option: {0}")]
    InvalidOption(String),
}
