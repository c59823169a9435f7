//! Random algebra descriptors driven by a random walk and a simplex tower,
//! with Monte-Carlo estimators for the probability-one statements.
//!
//! The descriptor's trace space is the almost-sure class given by the
//! classification of the random tower (a lookup, not a computation on the
//! sample); the sample itself only feeds finite-stage diagnostics. Finite
//! horizon estimates are proxies: "returns to 0 within the horizon" can only
//! underestimate the almost-sure event.

use std::num::NonZeroU64;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::rng::{mix, stream, trial_stream};
use crate::simplex::{CoveringTracker, MeasureScheme, SimplexError, TowerBuilder};
use crate::stats::{wilson_interval, Interval, Z95};
use crate::walk::{Barrier, WalkError, WalkParams, Walker};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SamplerError {
    #[error(transparent)]
    Walk(#[from] WalkError),
    #[error(transparent)]
    Simplex(#[from] SimplexError),
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("descriptor invariant violated: {0}")]
    InvalidDescriptor(String),
}

/// Affine homeomorphism class of the trace simplex.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "tag", rename_all = "snake_case")]
pub enum TraceSpaceTag {
    /// A single trace.
    JiangSu,
    /// Finite-dimensional simplex with `extreme_points` vertices, that is of
    /// dimension `extreme_points - 1`.
    FiniteDim { extreme_points: u64 },
    /// Bauer simplex whose boundary is `{1/n} ∪ {0}`.
    BauerOneOverN,
    /// Bauer simplex whose boundary is the Cantor set.
    BauerCantor,
    Poulsen,
}

impl TraceSpaceTag {
    pub fn finite_dim(extreme_points: u64) -> Result<Self, SamplerError> {
        if extreme_points == 0 {
            return Err(SamplerError::InvalidDescriptor("a simplex has at least one extreme point".into()));
        }
        Ok(Self::FiniteDim { extreme_points })
    }

    pub fn label(&self) -> String {
        match self {
            Self::JiangSu => "JiangSu".into(),
            Self::FiniteDim { extreme_points } => format!("FiniteDim({extreme_points})"),
            Self::BauerOneOverN => "BauerOneOverN".into(),
            Self::BauerCantor => "BauerCantor".into(),
            Self::Poulsen => "Poulsen".into(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Finiteness {
    StablyFinite,
    PurelyInfinite,
}

/// `(K_0, K_0^+, [1], K_1)` for an algebra with `K_0 = Z`, `K_1 = 0`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct KTheoryInvariant {
    /// Positive cone `N_0` (stably finite) rather than all of `Z`.
    pub standard_order: bool,
    /// `[1]` as a multiple of the generator.
    pub unit_class: u64,
}

impl KTheoryInvariant {
    pub fn k0(&self) -> &'static str {
        "Z"
    }

    pub fn k1(&self) -> &'static str {
        "0"
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct AlgebraDescriptor {
    pub finiteness: Finiteness,
    /// `None` exactly in the purely infinite case.
    pub trace_space: Option<TraceSpaceTag>,
    pub k_theory: KTheoryInvariant,
    /// The trace space was read off an unfinished absorbing run.
    pub censored: bool,
}

impl AlgebraDescriptor {
    pub fn new(unit_class: u64, finiteness: Finiteness, trace_space: Option<TraceSpaceTag>) -> Result<Self, SamplerError> {
        if unit_class == 0 {
            return Err(SamplerError::InvalidDescriptor("unit class must be positive".into()));
        }
        if (finiteness == Finiteness::PurelyInfinite) != trace_space.is_none() {
            return Err(SamplerError::InvalidDescriptor(
                "an algebra has no traces exactly when it is purely infinite".into(),
            ));
        }
        Ok(Self {
            finiteness,
            trace_space,
            k_theory: KTheoryInvariant {
                standard_order: finiteness == Finiteness::StablyFinite,
                unit_class,
            },
            censored: false,
        })
    }

    pub fn unit_class(&self) -> u64 {
        self.k_theory.unit_class
    }

    /// K-theory `(Z, N_0, 1, 0)`.
    pub fn is_strongly_k_contractible(&self) -> bool {
        self.k_theory.standard_order && self.k_theory.unit_class == 1
    }

    pub fn model_label(&self) -> String {
        let k = NonZeroU64::new(self.unit_class()).expect("checked at construction");
        classify_k_contractible(self.finiteness, k)
    }
}

/// Model algebra with K-theory `(Z, ·, k, 0)` in the given finiteness case.
pub fn classify_k_contractible(finiteness: Finiteness, k: NonZeroU64) -> String {
    match (finiteness, k.get()) {
        (Finiteness::PurelyInfinite, k) => format!("M_{k}(O_infinity)"),
        (Finiteness::StablyFinite, 1) => "lim Z_{p,q}".into(),
        (Finiteness::StablyFinite, k) => format!("lim M_{k}(Z_{{p,q}})"),
    }
}

/// Almost-sure trace space of the random inductive limit for a reflecting
/// walk: the Jiang-Su class when the walk is recurrent, otherwise the class
/// determined by the measure scheme.
pub fn classify_trace_space(params: &WalkParams, scheme: MeasureScheme) -> Result<TraceSpaceTag, SamplerError> {
    if params.barrier() != Barrier::Reflecting {
        return Err(WalkError::UnsupportedBarrier { required: Barrier::Reflecting }.into());
    }
    Ok(if params.p() <= params.q() {
        TraceSpaceTag::JiangSu
    } else {
        match scheme {
            MeasureScheme::BarycenterPointMass => TraceSpaceTag::BauerOneOverN,
            MeasureScheme::UniformVertices => TraceSpaceTag::BauerCantor,
            MeasureScheme::LebesgueFaces => TraceSpaceTag::Poulsen,
        }
    })
}

/// Base dimensions whose covering radius is sampled along a run.
pub const COVERING_BASES: [usize; 2] = [1, 2];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CoveringSample {
    pub base_dim: usize,
    /// Time of the first visit to `base_dim`.
    pub from_step: u64,
    /// Covering radius of the images of all later top vertices.
    pub radius: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Diagnostics {
    pub horizon: u64,
    /// Number of `n` in `1..=horizon` with `Y_n = 0`.
    pub visits_to_zero: u64,
    pub max_dimension: u64,
    pub final_dimension: u64,
    /// First time the absorbing walk sits at 0.
    pub absorbed_at: Option<u64>,
    pub covering: Vec<CoveringSample>,
}

/// Runs the walk `Y_0 .. Y_horizon` and its tower, and returns the
/// descriptor of the limit algebra together with finite-stage diagnostics.
///
/// Reflecting walks give the almost-sure class from
/// [`classify_trace_space`]. Absorbing walks give the finite-dimensional
/// simplex of dimension `sup Y`; if the walk has not been absorbed by the
/// horizon the running supremum is reported with `censored` set.
pub fn sample_algebra(
    params: &WalkParams,
    scheme: MeasureScheme,
    horizon: u64,
    seed: u64,
) -> Result<(AlgebraDescriptor, Diagnostics), SamplerError> {
    if horizon == 0 {
        return Err(SamplerError::InvalidParams("horizon must be >= 1".into()));
    }
    let mut walker = Walker::new(params, stream(mix(seed, 0)));
    let mut tower = TowerBuilder::new(scheme, mix(seed, 1));
    let mut trackers: Vec<(CoveringTracker, u64)> = Vec::new();
    let mut diag = Diagnostics {
        horizon,
        visits_to_zero: 0,
        max_dimension: 0,
        final_dimension: 0,
        absorbed_at: None,
        covering: Vec::new(),
    };

    for n in 0..=horizon {
        let y = walker.next().expect("walks are infinite");
        if let Some(map) = tower.push(y)? {
            for (tracker, _) in &mut trackers {
                tracker.apply(&map);
            }
        }
        let y_dim = y as usize;
        if COVERING_BASES.contains(&y_dim) && trackers.iter().all(|(t, _)| t.base_dim() != y_dim) {
            trackers.push((CoveringTracker::new(y_dim), n));
        }
        diag.max_dimension = diag.max_dimension.max(y);
        diag.final_dimension = y;
        if y == 0 {
            if n > 0 {
                diag.visits_to_zero += 1;
            }
            if params.barrier() == Barrier::Absorbing {
                diag.absorbed_at = Some(n);
                break;
            }
        }
    }

    trackers.sort_by_key(|(t, _)| t.base_dim());
    for (tracker, from_step) in trackers {
        diag.covering.push(CoveringSample { base_dim: tracker.base_dim(), from_step, radius: tracker.radius()? });
    }

    let descriptor = match params.barrier() {
        Barrier::Reflecting => {
            let tag = classify_trace_space(params, scheme)?;
            AlgebraDescriptor::new(1, Finiteness::StablyFinite, Some(tag))?
        }
        Barrier::Absorbing => {
            let tag = TraceSpaceTag::finite_dim(diag.max_dimension + 1)?;
            let mut d = AlgebraDescriptor::new(1, Finiteness::StablyFinite, Some(tag))?;
            d.censored = diag.absorbed_at.is_none();
            d
        }
    };
    Ok((descriptor, diag))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProportionEstimate {
    pub trials: u64,
    pub horizon: u64,
    pub successes: u64,
    pub estimate: f64,
    /// Wilson 95% interval.
    pub ci: Interval,
}

impl ProportionEstimate {
    fn new(successes: u64, trials: u64, horizon: u64) -> Self {
        Self {
            trials,
            horizon,
            successes,
            estimate: successes as f64 / trials as f64,
            ci: wilson_interval(successes, trials, Z95),
        }
    }
}

/// Whether the walk of trial `trial` visits 0 at some time in `1..=horizon`.
pub fn returns_to_zero(params: &WalkParams, horizon: u64, seed: u64, trial: u64) -> bool {
    Walker::new(params, trial_stream(seed, trial))
        .skip(1)
        .take(horizon as usize)
        .any(|y| y == 0)
}

/// Fraction of trials returning to 0 within the horizon: the finite-horizon
/// proxy for the probability that the limit is the Jiang-Su algebra.
pub fn estimate_prob_jiang_su(
    params: &WalkParams,
    trials: u64,
    horizon: u64,
    seed: u64,
) -> Result<ProportionEstimate, SamplerError> {
    if trials == 0 {
        return Err(SamplerError::InvalidParams("trials must be >= 1".into()));
    }
    if horizon == 0 {
        return Err(SamplerError::InvalidParams("horizon must be >= 1".into()));
    }
    let successes = (0..trials)
        .into_par_iter()
        .filter(|&t| returns_to_zero(params, horizon, seed, t))
        .count() as u64;
    Ok(ProportionEstimate::new(successes, trials, horizon))
}

/// Supremum of an absorbing walk, observed up to a cut-off.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "outcome", content = "sup", rename_all = "snake_case")]
pub enum SupOutcome {
    /// Absorbed with this supremum.
    Absorbed(u64),
    /// Rose above the cut-off before absorption.
    Exceeded,
    /// Neither absorbed nor above the cut-off within the horizon.
    Censored,
}

/// Runs trial `trial` until absorption, until the walk exceeds `k_max`, or
/// for `horizon` steps.
pub fn observe_sup(params: &WalkParams, k_max: u64, horizon: u64, seed: u64, trial: u64) -> SupOutcome {
    let mut sup = 0;
    for y in Walker::new(params, trial_stream(seed, trial)).take(horizon as usize + 1) {
        sup = sup.max(y);
        if sup > k_max {
            return SupOutcome::Exceeded;
        }
        if y == 0 {
            return SupOutcome::Absorbed(sup);
        }
    }
    SupOutcome::Censored
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SupHistogram {
    pub trials: u64,
    pub horizon: u64,
    /// `counts[k]` trials were absorbed with supremum exactly `k`.
    pub counts: Vec<u64>,
    pub exceeded: u64,
    pub censored: u64,
}

impl SupHistogram {
    pub fn k_max(&self) -> u64 {
        self.counts.len() as u64 - 1
    }

    /// Empirical `P(sup ≤ k)`.
    pub fn cdf(&self, k: u64) -> f64 {
        let hits: u64 = self.counts.iter().take(k as usize + 1).sum();
        hits as f64 / self.trials as f64
    }
}

/// Empirical law of `sup Y` for an absorbing walk, tracked up to `k_max`.
pub fn estimate_sup_histogram(
    params: &WalkParams,
    k_max: u64,
    trials: u64,
    horizon: u64,
    seed: u64,
) -> Result<SupHistogram, SamplerError> {
    if params.barrier() != Barrier::Absorbing {
        return Err(WalkError::UnsupportedBarrier { required: Barrier::Absorbing }.into());
    }
    if trials == 0 {
        return Err(SamplerError::InvalidParams("trials must be >= 1".into()));
    }
    let outcomes: Vec<SupOutcome> = (0..trials)
        .into_par_iter()
        .map(|t| observe_sup(params, k_max, horizon, seed, t))
        .collect();
    let mut hist = SupHistogram {
        trials,
        horizon,
        counts: vec![0; k_max as usize + 1],
        exceeded: 0,
        censored: 0,
    };
    for o in outcomes {
        match o {
            SupOutcome::Absorbed(s) => hist.counts[s as usize] += 1,
            SupOutcome::Exceeded => hist.exceeded += 1,
            SupOutcome::Censored => hist.censored += 1,
        }
    }
    Ok(hist)
}
