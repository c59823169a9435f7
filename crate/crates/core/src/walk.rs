//! Nearest-neighbour random walk on the nonnegative integers.
//!
//! Away from 0 the walk steps up with probability `p` and down with
//! probability `q = 1 - p`. At 0 it either reflects (always steps to 1) or is
//! absorbed (stays at 0 forever).

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::rng::{stream, StreamRng};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum WalkError {
    #[error("invalid walk parameters: {0}")]
    InvalidParams(String),
    #[error("operation requires a {required:?} barrier")]
    UnsupportedBarrier { required: Barrier },
    #[error("invalid trajectory at step {step}: {from} -> {to}")]
    InvalidTrajectory { step: usize, from: u64, to: u64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Barrier {
    Reflecting,
    Absorbing,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Recurrence {
    Recurrent,
    Transient,
}

/// Tolerance on `p + q = 1` and on the total mass of the initial law.
pub const PROBABILITY_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WalkParams {
    p: f64,
    q: f64,
    barrier: Barrier,
    /// `initial[i]` is the probability of starting at state `i`.
    initial: Vec<f64>,
}

impl WalkParams {
    pub fn new(p: f64, q: f64, barrier: Barrier, initial: Vec<f64>) -> Result<Self, WalkError> {
        if !(0.0..=1.0).contains(&p) || !(0.0..=1.0).contains(&q) {
            return Err(WalkError::InvalidParams(format!(
                "p = {p} and q = {q} must lie in [0, 1]"
            )));
        }
        if (p + q - 1.0).abs() > PROBABILITY_TOL {
            return Err(WalkError::InvalidParams(format!(
                "p + q = {} must equal 1",
                p + q
            )));
        }
        if initial.is_empty() {
            return Err(WalkError::InvalidParams(
                "initial distribution is empty".into(),
            ));
        }
        if initial.iter().any(|&x| x < 0.0 || !x.is_finite()) {
            return Err(WalkError::InvalidParams(
                "initial distribution has a negative or non-finite entry".into(),
            ));
        }
        let total: f64 = initial.iter().sum();
        if (total - 1.0).abs() > PROBABILITY_TOL {
            return Err(WalkError::InvalidParams(format!(
                "initial distribution sums to {total}, not 1"
            )));
        }
        Ok(Self {
            p,
            q,
            barrier,
            initial,
        })
    }

    /// Walk started deterministically at `start`, with `q = 1 - p`.
    pub fn from_start(p: f64, barrier: Barrier, start: u64) -> Result<Self, WalkError> {
        let mut initial = vec![0.0; start as usize + 1];
        initial[start as usize] = 1.0;
        Self::new(p, 1.0 - p, barrier, initial)
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn q(&self) -> f64 {
        self.q
    }

    pub fn barrier(&self) -> Barrier {
        self.barrier
    }

    pub fn initial(&self) -> &[f64] {
        &self.initial
    }

    pub fn with_barrier(&self, barrier: Barrier) -> Self {
        Self {
            barrier,
            ..self.clone()
        }
    }

    pub fn sample_initial<R: Rng + ?Sized>(&self, rng: &mut R) -> u64 {
        if self.initial.len() == 1 {
            return 0;
        }
        let u: f64 = rng.random();
        let mut acc = 0.0;
        for (i, &w) in self.initial.iter().enumerate() {
            acc += w;
            if u < acc {
                return i as u64;
            }
        }
        // Rounding left a sliver of mass above the last positive entry.
        self.initial.iter().rposition(|&w| w > 0.0).unwrap_or(0) as u64
    }

    pub fn step<R: Rng + ?Sized>(&self, state: u64, rng: &mut R) -> u64 {
        if state == 0 {
            return match self.barrier {
                Barrier::Reflecting => 1,
                Barrier::Absorbing => 0,
            };
        }
        if rng.random::<f64>() < self.p {
            state + 1
        } else {
            state - 1
        }
    }
}

/// Lazily generated path `Y_0, Y_1, ...` driven by one RNG stream.
pub struct Walker<'a> {
    params: &'a WalkParams,
    rng: StreamRng,
    next: Option<u64>,
}

impl<'a> Walker<'a> {
    pub fn new(params: &'a WalkParams, mut rng: StreamRng) -> Self {
        let start = params.sample_initial(&mut rng);
        Self {
            params,
            rng,
            next: Some(start),
        }
    }
}

impl Iterator for Walker<'_> {
    type Item = u64;

    fn next(&mut self) -> Option<u64> {
        let current = self.next?;
        self.next = Some(self.params.step(current, &mut self.rng));
        Some(current)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Trajectory {
    states: Vec<u64>,
}

impl Trajectory {
    /// Checks the step structure for the given barrier.
    pub fn new(states: Vec<u64>, barrier: Barrier) -> Result<Self, WalkError> {
        let t = Self { states };
        t.validate(barrier)?;
        Ok(t)
    }

    /// A path whose consecutive states differ by exactly one.
    pub fn from_steps(states: Vec<u64>) -> Result<Self, WalkError> {
        for (k, w) in states.windows(2).enumerate() {
            if w[0].abs_diff(w[1]) != 1 {
                return Err(WalkError::InvalidTrajectory {
                    step: k + 1,
                    from: w[0],
                    to: w[1],
                });
            }
        }
        Ok(Self { states })
    }

    pub fn validate(&self, barrier: Barrier) -> Result<(), WalkError> {
        for (k, w) in self.states.windows(2).enumerate() {
            let ok = match (w[0], barrier) {
                (0, Barrier::Reflecting) => w[1] == 1,
                (0, Barrier::Absorbing) => w[1] == 0,
                (a, _) => a.abs_diff(w[1]) == 1,
            };
            if !ok {
                return Err(WalkError::InvalidTrajectory {
                    step: k + 1,
                    from: w[0],
                    to: w[1],
                });
            }
        }
        Ok(())
    }

    pub fn states(&self) -> &[u64] {
        &self.states
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn max(&self) -> u64 {
        self.states.iter().copied().max().unwrap_or(0)
    }

    /// Prefix up to and including the first visit to 0 (the whole path if
    /// it never visits 0).
    pub fn until_absorbed(&self) -> Trajectory {
        let end = self
            .states
            .iter()
            .position(|&y| y == 0)
            .map_or(self.states.len(), |i| i + 1);
        Trajectory {
            states: self.states[..end].to_vec(),
        }
    }
}

/// `length` states `Y_0 .. Y_{length-1}`, fully determined by the seed.
pub fn sample_trajectory(
    params: &WalkParams,
    length: usize,
    seed: u64,
) -> Result<Trajectory, WalkError> {
    if length == 0 {
        return Err(WalkError::InvalidParams("length must be >= 1".into()));
    }
    let states = Walker::new(params, stream(seed)).take(length).collect();
    Ok(Trajectory { states })
}

/// The reflecting walk is recurrent iff `p <= q`.
pub fn classify_walk(params: &WalkParams) -> Result<Recurrence, WalkError> {
    if params.barrier != Barrier::Reflecting {
        return Err(WalkError::UnsupportedBarrier {
            required: Barrier::Reflecting,
        });
    }
    Ok(if params.p <= params.q {
        Recurrence::Recurrent
    } else {
        Recurrence::Transient
    })
}

/// Smallest truncation level tried by [`hit_zero_probability`].
pub const INITIAL_TRUNCATION: usize = 16;
/// Largest truncation level tried by [`hit_zero_probability`].
pub const MAX_TRUNCATION: usize = 1 << 22;
/// Successive truncated values closer than this are declared converged.
pub const TRUNCATION_TOL: f64 = 1e-12;

/// Probability that the walk started at `from` ever reaches 0.
///
/// For `p <= q` the walk is recurrent and the value is 1. Otherwise
/// first-step analysis on `{0..K}` with `h_0 = 1`, `h_K = 0` gives a value
/// that decreases monotonically in `K`; `K` doubles from 16 until successive
/// values differ by less than `1e-12`, or up to `2^22`.
pub fn hit_zero_probability(params: &WalkParams, from: u64) -> f64 {
    if from == 0 || params.p <= params.q {
        return 1.0;
    }
    let mut k = INITIAL_TRUNCATION.max(2 * from as usize);
    let mut prev = absorb_low_probability(params.p, params.q, k, from as usize);
    while k < MAX_TRUNCATION {
        k *= 2;
        let h = absorb_low_probability(params.p, params.q, k, from as usize);
        if (prev - h).abs() < TRUNCATION_TOL {
            return h;
        }
        prev = h;
    }
    prev
}

/// `P(sup_n Y_n <= k)` for the absorbing walk, averaged over the initial
/// law. Solved on `{0..k+1}` with absorption at both ends.
pub fn sup_distribution(params: &WalkParams, k: u64) -> Result<f64, WalkError> {
    if params.barrier != Barrier::Absorbing {
        return Err(WalkError::UnsupportedBarrier {
            required: Barrier::Absorbing,
        });
    }
    let top = k as usize + 1;
    let total = params
        .initial
        .iter()
        .enumerate()
        .filter(|&(i, &w)| w > 0.0 && i < top)
        .map(|(i, &w)| w * absorb_low_probability(params.p, params.q, top, i))
        .sum();
    Ok(total)
}

/// Probability of hitting 0 before `top` from `from`, by solving
/// `h_i = p h_{i+1} + q h_{i-1}`, `h_0 = 1`, `h_top = 0` with the Thomas
/// algorithm.
fn absorb_low_probability(p: f64, q: f64, top: usize, from: usize) -> f64 {
    if from == 0 {
        return 1.0;
    }
    if from >= top {
        return 0.0;
    }
    // Unknowns h_1 .. h_{top-1}: -q h_{i-1} + h_i - p h_{i+1} = 0.
    let n = top - 1;
    let mut c_prime = vec![0.0; n];
    let mut d_prime = vec![0.0; n];
    for i in 0..n {
        let rhs = if i == 0 { q } else { 0.0 };
        let (below_c, below_d) = if i == 0 {
            (0.0, 0.0)
        } else {
            (c_prime[i - 1], d_prime[i - 1])
        };
        let denom = 1.0 - (-q) * below_c;
        c_prime[i] = -p / denom;
        d_prime[i] = (rhs - (-q) * below_d) / denom;
    }
    let mut h = d_prime[n - 1];
    for i in (from - 1..n - 1).rev() {
        h = d_prime[i] - c_prime[i] * h;
    }
    h
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn params(p: f64, barrier: Barrier, start: u64) -> WalkParams {
        WalkParams::from_start(p, barrier, start).unwrap()
    }

    #[test]
    fn deterministic_drift() {
        let t = sample_trajectory(&params(1.0, Barrier::Reflecting, 0), 5, 3).unwrap();
        assert_eq!(t.states(), &[0, 1, 2, 3, 4]);
    }

    #[test]
    fn same_seed_same_path() {
        let w = params(0.5, Barrier::Reflecting, 2);
        assert_eq!(
            sample_trajectory(&w, 200, 11).unwrap(),
            sample_trajectory(&w, 200, 11).unwrap()
        );
        assert_ne!(
            sample_trajectory(&w, 200, 11).unwrap(),
            sample_trajectory(&w, 200, 12).unwrap()
        );
    }

    #[test]
    fn barrier_behaviour() {
        let r = sample_trajectory(&params(0.3, Barrier::Reflecting, 0), 500, 5).unwrap();
        r.validate(Barrier::Reflecting).unwrap();
        assert!(r.states().windows(2).all(|w| w != [0, 0]));

        let a = sample_trajectory(&params(0.3, Barrier::Absorbing, 3), 500, 5).unwrap();
        a.validate(Barrier::Absorbing).unwrap();
        let first = a.states().iter().position(|&y| y == 0).unwrap();
        assert!(a.states()[first..].iter().all(|&y| y == 0));
    }

    #[test]
    fn rejects_bad_params() {
        assert!(WalkParams::new(0.6, 0.5, Barrier::Reflecting, vec![1.0]).is_err());
        assert!(WalkParams::new(1.2, -0.2, Barrier::Reflecting, vec![1.0]).is_err());
        assert!(WalkParams::new(0.5, 0.5, Barrier::Reflecting, vec![0.5, 0.4]).is_err());
        assert!(WalkParams::new(0.5, 0.5, Barrier::Reflecting, vec![1.5, -0.5]).is_err());
        assert!(sample_trajectory(&params(0.5, Barrier::Reflecting, 0), 0, 1).is_err());
    }

    #[test]
    fn initial_law_is_respected() {
        let w = WalkParams::new(0.5, 0.5, Barrier::Reflecting, vec![0.0, 0.25, 0.0, 0.75]).unwrap();
        let mut counts = [0u32; 4];
        for seed in 0..4000 {
            let t = sample_trajectory(&w, 1, seed).unwrap();
            counts[t.states()[0] as usize] += 1;
        }
        assert_eq!(counts[0] + counts[2], 0);
        let frac = counts[3] as f64 / 4000.0;
        assert!((frac - 0.75).abs() < 3.0 * (0.75f64 * 0.25 / 4000.0).sqrt());
    }

    #[test]
    fn trajectory_validation() {
        assert!(Trajectory::new(vec![0, 1, 0, 1], Barrier::Reflecting).is_ok());
        assert!(Trajectory::new(vec![0, 0], Barrier::Reflecting).is_err());
        assert!(Trajectory::new(vec![1, 0, 0], Barrier::Absorbing).is_ok());
        assert!(Trajectory::new(vec![1, 0, 1], Barrier::Absorbing).is_err());
        assert!(Trajectory::new(vec![1, 3], Barrier::Reflecting).is_err());
    }

    #[test]
    fn recurrence_classes() {
        assert_eq!(
            classify_walk(&params(0.5, Barrier::Reflecting, 0)).unwrap(),
            Recurrence::Recurrent
        );
        assert_eq!(
            classify_walk(&params(0.6, Barrier::Reflecting, 0)).unwrap(),
            Recurrence::Transient
        );
        assert_eq!(
            classify_walk(&params(0.4, Barrier::Reflecting, 0)).unwrap(),
            Recurrence::Recurrent
        );
        assert!(matches!(
            classify_walk(&params(0.4, Barrier::Absorbing, 0)),
            Err(WalkError::UnsupportedBarrier { .. })
        ));
    }

    #[test]
    fn hit_zero_against_closed_form() {
        let w = params(0.6, Barrier::Reflecting, 1);
        assert_eq!(hit_zero_probability(&w, 0), 1.0);
        assert_abs_diff_eq!(hit_zero_probability(&w, 1), 2.0 / 3.0, epsilon = 1e-9);
        for i in 1..6 {
            let closed = (0.4f64 / 0.6).powi(i as i32);
            assert_abs_diff_eq!(hit_zero_probability(&w, i), closed, epsilon = 1e-9);
        }
        for p in [0.1, 0.3, 0.45, 0.5] {
            let w = params(p, Barrier::Reflecting, 1);
            for i in [1, 5, 40] {
                assert_abs_diff_eq!(hit_zero_probability(&w, i), 1.0, epsilon = 1e-9);
            }
        }
        assert_eq!(hit_zero_probability(&params(1.0, Barrier::Reflecting, 1), 3), 0.0);
    }

    #[test]
    fn sup_distribution_symmetric_gamblers_ruin() {
        let w = params(0.5, Barrier::Absorbing, 1);
        for k in 1..=10u64 {
            let expected = k as f64 / (k as f64 + 1.0);
            assert_abs_diff_eq!(sup_distribution(&w, k).unwrap(), expected, epsilon = 1e-12);
        }
        assert_eq!(sup_distribution(&params(0.5, Barrier::Absorbing, 0), 0).unwrap(), 1.0);
        assert_eq!(sup_distribution(&params(0.5, Barrier::Absorbing, 4), 3).unwrap(), 0.0);
        assert!(sup_distribution(&params(0.5, Barrier::Reflecting, 1), 3).is_err());
    }

    #[test]
    fn sup_distribution_increases_to_hit_probability() {
        let w = params(0.6, Barrier::Absorbing, 1);
        let limit = hit_zero_probability(&w, 1);
        let mut prev = 0.0;
        for k in 1..200 {
            let v = sup_distribution(&w, k).unwrap();
            assert!(v >= prev - 1e-15);
            assert!(v <= limit + 1e-12);
            prev = v;
        }
        assert_abs_diff_eq!(prev, 2.0 / 3.0, epsilon = 1e-9);
    }
}
