//! Seeded trials comparing `δ` with the optimised `d_U` on random pairs.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{
    random_hermitian, random_normal, random_unitary, unitary_distance, winf_pair, NormalMatrix,
    TransportError, UnitaryDistanceOptions,
};
use crate::rng::{mix, trial_stream};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PairKind {
    Hermitian,
    Unitary,
    Normal,
}

impl PairKind {
    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "hermitian" => Some(Self::Hermitian),
            "unitary" => Some(Self::Unitary),
            "normal" => Some(Self::Normal),
            _ => None,
        }
    }

    fn sample(self, n: usize, rng: &mut crate::rng::StreamRng) -> NormalMatrix {
        match self {
            Self::Hermitian => random_hermitian(n, rng),
            Self::Unitary => random_unitary(n, rng),
            Self::Normal => random_normal(n, rng),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeylRow {
    pub trial: u64,
    pub delta: f64,
    pub d_u: f64,
    /// `d_u - delta`.
    pub gap: f64,
    pub w_inf: f64,
    pub converged: bool,
    pub certified: bool,
}

/// One pair drawn from the trial's stream; the optimiser's random starts use
/// an independent stream derived from the same trial index.
pub fn weyl_trial(kind: PairKind, n: usize, seed: u64, trial: u64, tol: f64) -> Result<WeylRow, TransportError> {
    let mut rng = trial_stream(seed, trial);
    let a = kind.sample(n, &mut rng);
    let b = kind.sample(n, &mut rng);
    let opts = UnitaryDistanceOptions {
        tol,
        seed: mix(seed ^ 0x5745_594c, trial),
        ..UnitaryDistanceOptions::default()
    };
    let r = unitary_distance(&a, &b, &opts)?;
    Ok(WeylRow {
        trial,
        delta: r.matching,
        d_u: r.value,
        gap: r.gap(),
        w_inf: winf_pair(&a, &b)?,
        converged: r.converged,
        certified: r.certified,
    })
}

/// Trials `0..trials` in parallel, returned in trial order.
pub fn weyl_table(kind: PairKind, n: usize, trials: u64, seed: u64, tol: f64) -> Result<Vec<WeylRow>, TransportError> {
    if n == 0 {
        return Err(TransportError::Empty);
    }
    (0..trials)
        .into_par_iter()
        .map(|t| weyl_trial(kind, n, seed, t, tol))
        .collect()
}
