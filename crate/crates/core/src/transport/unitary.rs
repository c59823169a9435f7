use itertools::Itertools;
use nalgebra::{DVector, SymmetricEigen, SVD};
use num_complex::Complex64;
use rand::SeedableRng;
use serde::{Deserialize, Serialize};

use super::matching::{matching_distance, sorted_matching_distance};
use super::matrix::{haar_unitary, CMatrix, NormalMatrix};
use super::TransportError;
use crate::rng::StreamRng;

/// Minimum number of starting points per optimisation.
pub const MIN_STARTS: usize = 20;
/// Haar-random starts always run after the deterministic ones.
pub const MIN_RANDOM_STARTS: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UnitaryDistanceOptions {
    /// Gradient-norm stopping tolerance.
    pub tol: f64,
    /// Total number of starts, raised to at least [`MIN_STARTS`] and to the
    /// deterministic starts plus [`MIN_RANDOM_STARTS`].
    pub starts: usize,
    pub max_iters: usize,
    /// Seed for the Haar-random starts.
    pub seed: u64,
    /// Stop as soon as a start comes within `certify_tol` of `δ` when `δ`
    /// is a lower bound (Hermitian or unitary pairs).
    pub stop_at_lower_bound: bool,
    pub certify_tol: f64,
}

impl Default for UnitaryDistanceOptions {
    fn default() -> Self {
        Self {
            tol: 1e-8,
            starts: MIN_STARTS,
            max_iters: 1_000,
            seed: 0,
            stop_at_lower_bound: true,
            certify_tol: 1e-10,
        }
    }
}

impl UnitaryDistanceOptions {
    pub fn with_tol(tol: f64) -> Self {
        Self { tol, ..Self::default() }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct UnitaryDistance {
    /// Best value of `‖a - u b u*‖` found; an upper bound for `d_U`.
    pub value: f64,
    /// Unitary attaining `value`.
    pub certificate: CMatrix,
    /// Optimal matching distance of the spectra.
    pub matching: f64,
    /// Whether `matching` is a lower bound for `d_U` (Hermitian or unitary pair).
    pub lower_bound_valid: bool,
    /// Some start reached the gradient tolerance or the certified lower bound.
    pub converged: bool,
    /// `value` is within `certify_tol` of a valid lower bound.
    pub certified: bool,
    pub gradient_norm: f64,
    pub starts_run: usize,
    /// Index of the start that produced `value`.
    pub best_start: usize,
}

impl UnitaryDistance {
    /// `value - matching`.
    pub fn gap(&self) -> f64 {
        self.value - self.matching
    }
}

/// Upper estimate of `d_U(a, b) = inf_u ‖a - u b u*‖` by multi-start
/// Riemannian conjugate-gradient descent on `U(n)`.
///
/// Starts, in order: the identity, the remaining permutation matrices when
/// `n ≤ 4`, then Haar-random unitaries. Each iterate moves by
/// `u ← exp(t K) u` with `K` skew-Hermitian. The objective is the top
/// singular value of `a - u b u*`; its gradient comes from the top singular
/// pair.
pub fn unitary_distance(
    a: &NormalMatrix,
    b: &NormalMatrix,
    opts: &UnitaryDistanceOptions,
) -> Result<UnitaryDistance, TransportError> {
    let n = a.n();
    if n != b.n() {
        return Err(TransportError::SizeMismatch(n, b.n()));
    }
    if opts.tol.is_nan() || opts.tol <= 0.0 {
        return Err(TransportError::InvalidOption("tol must be positive".into()));
    }

    let lower_bound_valid =
        (a.is_hermitian() && b.is_hermitian()) || (a.is_unitary() && b.is_unitary());
    let matching = match (a.sorted_real_spectrum(), b.sorted_real_spectrum()) {
        (Some(x), Some(y)) => sorted_matching_distance(&x, &y)?,
        _ => matching_distance(&a.spectrum(), &b.spectrum())?,
    };
    let scale = a.entries().norm().max(b.entries().norm()).max(1.0);
    let target = lower_bound_valid && opts.stop_at_lower_bound;
    let target_value = matching + opts.certify_tol * scale;

    let mut rng = StreamRng::seed_from_u64(opts.seed);
    let fixed = start_points(n).count();
    let total = opts.starts.max(MIN_STARTS).max(fixed + MIN_RANDOM_STARTS);
    let mut best: Option<(Run, usize)> = None;
    let mut any_converged = false;
    let mut starts_run = 0;

    for (index, start) in start_points(n).chain(std::iter::repeat_with(|| None)).take(total).enumerate() {
        let u0 = start.unwrap_or_else(|| haar_unitary(n, &mut rng));
        let run = descend(a.entries(), b.entries(), u0, opts, target.then_some(target_value), scale);
        starts_run += 1;
        let reached = run.grad_norm < opts.tol || (target && run.value <= target_value);
        any_converged |= reached;
        let better = best.as_ref().is_none_or(|(b, _)| run.value < b.value);
        if better {
            best = Some((run, index));
        }
        if target && best.as_ref().is_some_and(|(b, _)| b.value <= target_value) {
            break;
        }
    }

    let (run, best_start) = best.expect("at least one start");
    debug_assert!(
        !lower_bound_valid || run.value >= matching - 1e-8 * scale,
        "value {} below the matching lower bound {matching}",
        run.value
    );
    Ok(UnitaryDistance {
        value: run.value,
        certified: lower_bound_valid && run.value <= target_value,
        certificate: run.u,
        matching,
        lower_bound_valid,
        converged: any_converged,
        gradient_norm: run.grad_norm,
        starts_run,
        best_start,
    })
}

/// Identity followed by the other permutation matrices for `n ≤ 4`.
fn start_points(n: usize) -> impl Iterator<Item = Option<CMatrix>> {
    let perms: Vec<Vec<usize>> = if n <= 4 {
        (0..n).permutations(n).collect()
    } else {
        vec![(0..n).collect()]
    };
    perms.into_iter().map(move |p| {
        let mut u = CMatrix::zeros(n, n);
        for (i, &j) in p.iter().enumerate() {
            u[(j, i)] = Complex64::new(1.0, 0.0);
        }
        Some(u)
    })
}

struct Run {
    value: f64,
    grad_norm: f64,
    u: CMatrix,
}

struct Eval {
    /// Objective being descended (smoothed or exact).
    value: f64,
    /// Exact `σ_1(a - u b u*)`.
    sigma: f64,
    grad: CMatrix,
}

/// `σ_1(a - u b u*)`, or with `beta` its log-sum-exp smoothing
/// `(1/β) log Σ_i exp(β σ_i)`, and the Riemannian gradient in
/// left-trivialised coordinates: with `c = u b u*` and
/// `G = Σ_i w_i x_i y_i*` (softmax weights over the singular triples, or the
/// top triple alone), `M = c G* - G* c` and `grad = (M - M*) / 2`.
fn evaluate(a: &CMatrix, b: &CMatrix, u: &CMatrix, beta: Option<f64>) -> Eval {
    let c = u * b * u.adjoint();
    let svd = SVD::new(a - &c, true, true);
    let s = &svd.singular_values;
    let xs = svd.u.as_ref().expect("left vectors");
    let ys = svd.v_t.as_ref().expect("right vectors");
    let top = s.imax();
    let sigma = s[top];
    let (value, g_adj) = match beta {
        None => (sigma, ys.row(top).adjoint() * xs.column(top).adjoint()),
        Some(beta) => {
            let w: Vec<f64> = s.iter().map(|&x| (beta * (x - sigma)).exp()).collect();
            let total: f64 = w.iter().sum();
            let mut g_adj = CMatrix::zeros(a.nrows(), a.nrows());
            for (i, wi) in w.iter().enumerate() {
                if *wi > 1e-18 * total {
                    g_adj += ys.row(i).adjoint() * xs.column(i).adjoint() * Complex64::new(wi / total, 0.0);
                }
            }
            (sigma + total.ln() / beta, g_adj)
        }
    };
    let m = &c * &g_adj - &g_adj * &c;
    let grad = (&m - m.adjoint()).scale(0.5);
    Eval { value, sigma, grad }
}

fn inner(x: &CMatrix, y: &CMatrix) -> f64 {
    x.iter().zip(y.iter()).map(|(p, q)| (p.conj() * q).re).sum()
}

/// `exp(t K)` for skew-Hermitian `K`, from the eigen-decomposition of `iK`.
struct SkewExp {
    vectors: CMatrix,
    values: DVector<f64>,
}

impl SkewExp {
    fn new(k: &CMatrix) -> Self {
        let h = k.map(|z| Complex64::new(-z.im, z.re));
        let h = (&h + h.adjoint()).scale(0.5);
        let eig = SymmetricEigen::new(h);
        Self { vectors: eig.eigenvectors, values: eig.eigenvalues }
    }

    fn spectral_radius(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    fn at(&self, t: f64) -> CMatrix {
        let mut v = self.vectors.clone();
        for (j, mut col) in v.column_iter_mut().enumerate() {
            col *= Complex64::from_polar(1.0, -t * self.values[j]);
        }
        v * self.vectors.adjoint()
    }
}

/// Smoothing levels `β · scale` used to escape a stall at a kink of the
/// exact objective (where the top singular values coalesce). Coarser levels
/// bias towards spread-out singular values and are avoided.
const SMOOTHING: [f64; 4] = [1e3, 1e4, 1e5, 1e6];
const SMOOTH_ITERS: usize = 200;
/// A phase stops when `STALL_WINDOW` iterations gain less than this
/// relative decrease.
const STALL_RTOL: f64 = 1e-13;
const STALL_WINDOW: usize = 40;

fn descend(a: &CMatrix, b: &CMatrix, u: CMatrix, opts: &UnitaryDistanceOptions, target: Option<f64>, scale: f64) -> Run {
    let done = |e: &Eval| inner(&e.grad, &e.grad).sqrt() < opts.tol || target.is_some_and(|t| e.sigma <= t);
    let (mut u, mut eval) = phase(a, b, u, None, opts.tol, opts.max_iters, target);
    for kappa in SMOOTHING {
        if done(&eval) {
            break;
        }
        let (smoothed, _) = phase(a, b, u.clone(), Some(kappa / scale), opts.tol, SMOOTH_ITERS, target);
        let (next_u, next) = phase(a, b, smoothed, None, opts.tol, opts.max_iters, target);
        if next.sigma < eval.sigma {
            u = next_u;
            eval = next;
        }
    }
    Run { value: eval.sigma, grad_norm: inner(&eval.grad, &eval.grad).sqrt(), u }
}

/// Polak-Ribière conjugate gradient with Armijo backtracking along
/// `t ↦ exp(t K) u`.
fn phase(
    a: &CMatrix,
    b: &CMatrix,
    mut u: CMatrix,
    beta: Option<f64>,
    tol: f64,
    max_iters: usize,
    target: Option<f64>,
) -> (CMatrix, Eval) {
    let mut cur = evaluate(a, b, &u, beta);
    let mut grad_sq = inner(&cur.grad, &cur.grad);
    let mut dir = -cur.grad.clone();
    let mut step_angle = 0.1;
    let mut checkpoint = cur.value;

    for iter in 1..=max_iters {
        if grad_sq.sqrt() < tol || target.is_some_and(|t| cur.sigma <= t) {
            break;
        }
        if iter % STALL_WINDOW == 0 {
            if checkpoint - cur.value <= STALL_RTOL * cur.value.abs().max(1.0) {
                break;
            }
            checkpoint = cur.value;
        }
        let mut slope = inner(&cur.grad, &dir);
        let mut steepest = false;
        if slope >= 0.0 {
            dir = -cur.grad.clone();
            slope = -grad_sq;
            steepest = true;
        }
        let exp = SkewExp::new(&dir);
        let radius = exp.spectral_radius();
        if radius == 0.0 {
            break;
        }
        let mut t = step_angle / radius;
        let mut accepted = None;
        while t * radius > 1e-16 {
            let cand_u = exp.at(t) * &u;
            let cand = evaluate(a, b, &cand_u, beta);
            if cand.value <= cur.value + 1e-4 * t * slope {
                accepted = Some((cand_u, cand));
                break;
            }
            t *= 0.5;
        }
        let Some((next_u, next)) = accepted else {
            if steepest {
                break;
            }
            dir = -cur.grad.clone();
            continue;
        };
        step_angle = (2.0 * t * radius).min(1.0);
        let next_grad_sq = inner(&next.grad, &next.grad);
        let pr = (inner(&next.grad, &(&next.grad - &cur.grad)) / grad_sq).max(0.0);
        dir = &dir * Complex64::new(pr, 0.0) - &next.grad;
        u = next_u;
        cur = next;
        grad_sq = next_grad_sq;
    }
    (u, cur)
}
