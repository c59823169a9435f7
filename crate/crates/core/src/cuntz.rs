//! Cuntz semigroup models: `Lsc([0,1], N̄)` for `C([0,1])`, the pullback
//! picture for one-dimensional NCCW complexes, dimension functions, and
//! `Cu(Z) = N_0 ⊔ (0, ∞]`.

use std::cmp::Ordering;
use std::fmt;
use std::ops::Add;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use thiserror::Error;

use crate::intlinalg::{cokernel, IntMatrix};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CuntzError {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("shape mismatch: {0}x{1} vs {2}x{3}")]
    ShapeMismatch(usize, usize, usize, usize),
    #[error("chain is not increasing at position {0}")]
    NotIncreasing(usize),
    #[error("empty chain")]
    EmptyChain,
    #[error("invalid step function: {0}")]
    InvalidStep(String),
    #[error("matrix entry ({0}, {1}) is negative")]
    NegativeEntry(usize, usize),
    #[error("invalid Cu(Z) element: {0}")]
    InvalidElement(String),
}

/// `N_0 ∪ {∞}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ExtNat {
    Fin(u64),
    Inf,
}

impl ExtNat {
    pub const ZERO: ExtNat = ExtNat::Fin(0);

    pub fn is_zero(self) -> bool {
        self == Self::ZERO
    }

    /// `k · self` with `0 · ∞ = 0`. Panics on overflow.
    pub fn scale(self, k: u64) -> ExtNat {
        match self {
            _ if k == 0 => Self::ZERO,
            Self::Inf => Self::Inf,
            Self::Fin(x) => Self::Fin(x.checked_mul(k).expect("ExtNat overflow")),
        }
    }
}

impl From<u64> for ExtNat {
    fn from(x: u64) -> Self {
        Self::Fin(x)
    }
}

impl Ord for ExtNat {
    fn cmp(&self, other: &Self) -> Ordering {
        match (self, other) {
            (Self::Fin(a), Self::Fin(b)) => a.cmp(b),
            (Self::Fin(_), Self::Inf) => Ordering::Less,
            (Self::Inf, Self::Fin(_)) => Ordering::Greater,
            (Self::Inf, Self::Inf) => Ordering::Equal,
        }
    }
}

impl PartialOrd for ExtNat {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Add for ExtNat {
    type Output = ExtNat;

    /// Panics on overflow of the finite part.
    fn add(self, rhs: ExtNat) -> ExtNat {
        match (self, rhs) {
            (Self::Fin(a), Self::Fin(b)) => Self::Fin(a.checked_add(b).expect("ExtNat overflow")),
            _ => Self::Inf,
        }
    }
}

impl fmt::Display for ExtNat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Fin(x) => write!(f, "{x}"),
            Self::Inf => write!(f, "inf"),
        }
    }
}

/// Lower semicontinuous step function `[0,1] -> N̄`.
///
/// With breakpoints `0 < b_1 < ... < b_k < 1`, `intervals[i]` is the value on
/// the `i`-th open subinterval and `points` holds `f(0), f(b_1), ..., f(b_k),
/// f(1)`. Values are kept in canonical form: a breakpoint whose two sides
/// and own value agree is removed.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct LscStep {
    breakpoints: Vec<BigRational>,
    intervals: Vec<ExtNat>,
    points: Vec<ExtNat>,
}

impl LscStep {
    pub fn new(breakpoints: Vec<BigRational>, intervals: Vec<ExtNat>, points: Vec<ExtNat>) -> Result<Self, CuntzError> {
        let k = breakpoints.len();
        if intervals.len() != k + 1 || points.len() != k + 2 {
            return Err(CuntzError::InvalidStep(format!(
                "{k} breakpoints need {} interval and {} point values, got {} and {}",
                k + 1,
                k + 2,
                intervals.len(),
                points.len()
            )));
        }
        if breakpoints.iter().any(|b| !b.is_positive() || *b >= BigRational::one()) {
            return Err(CuntzError::InvalidStep("breakpoints must lie in (0, 1)".into()));
        }
        if breakpoints.windows(2).any(|w| w[0] >= w[1]) {
            return Err(CuntzError::InvalidStep("breakpoints must be strictly increasing".into()));
        }
        for (j, p) in points.iter().enumerate() {
            let left = j.checked_sub(1).map(|i| intervals[i]);
            let right = intervals.get(j).copied();
            if left.into_iter().chain(right).any(|side| *p > side) {
                return Err(CuntzError::InvalidStep(format!("not lower semicontinuous at point {j}")));
            }
        }
        Ok(Self { breakpoints, intervals, points }.canonical())
    }

    pub fn zero() -> Self {
        Self::constant(ExtNat::ZERO)
    }

    pub fn constant(v: ExtNat) -> Self {
        Self { breakpoints: Vec::new(), intervals: vec![v], points: vec![v, v] }
    }

    /// `v · 1_(a,b)` for `0 ≤ a < b ≤ 1`.
    pub fn open_indicator(a: BigRational, b: BigRational, v: ExtNat) -> Result<Self, CuntzError> {
        if a.is_negative() || b > BigRational::one() || a >= b {
            return Err(CuntzError::InvalidStep(format!("({a}, {b}) is not a subinterval of [0, 1]")));
        }
        let mut breakpoints = Vec::new();
        let mut intervals = Vec::new();
        if a.is_positive() {
            breakpoints.push(a);
            intervals.push(ExtNat::ZERO);
        }
        intervals.push(v);
        if b < BigRational::one() {
            breakpoints.push(b);
            intervals.push(ExtNat::ZERO);
        }
        let points = vec![ExtNat::ZERO; breakpoints.len() + 2];
        Self::new(breakpoints, intervals, points)
    }

    pub fn breakpoints(&self) -> &[BigRational] {
        &self.breakpoints
    }

    pub fn interval_values(&self) -> &[ExtNat] {
        &self.intervals
    }

    /// `f(0), f(b_1), ..., f(b_k), f(1)`.
    pub fn point_values(&self) -> &[ExtNat] {
        &self.points
    }

    pub fn at_zero(&self) -> ExtNat {
        self.points[0]
    }

    pub fn at_one(&self) -> ExtNat {
        *self.points.last().expect("at least two point values")
    }

    pub fn eval(&self, x: &BigRational) -> ExtNat {
        if x.is_zero() {
            return self.at_zero();
        }
        if x.is_one() {
            return self.at_one();
        }
        match self.breakpoints.binary_search(x) {
            Ok(i) => self.points[i + 1],
            Err(i) => self.intervals[i],
        }
    }

    /// Removes redundant breakpoints; idempotent.
    pub fn canonical(mut self) -> Self {
        let mut i = 0;
        while i < self.breakpoints.len() {
            let v = self.intervals[i];
            if self.intervals[i + 1] == v && self.points[i + 1] == v {
                self.breakpoints.remove(i);
                self.intervals.remove(i + 1);
                self.points.remove(i + 1);
            } else {
                i += 1;
            }
        }
        self
    }

    /// Pieces of the common refinement of two partitions, as
    /// `(f-value, g-value)` pairs: points and open intervals interleaved.
    fn refine<'a>(&'a self, other: &'a Self) -> (Vec<BigRational>, Vec<(ExtNat, ExtNat)>, Vec<(ExtNat, ExtNat)>) {
        let mut cuts: Vec<BigRational> = self.breakpoints.iter().chain(&other.breakpoints).cloned().collect();
        cuts.sort();
        cuts.dedup();
        let mut probes: Vec<BigRational> = Vec::with_capacity(cuts.len() + 1);
        let mut lo = BigRational::zero();
        for c in cuts.iter().chain(std::iter::once(&BigRational::one())) {
            probes.push((&lo + c) / BigRational::from_integer(2.into()));
            lo = c.clone();
        }
        let intervals = probes.iter().map(|x| (self.eval(x), other.eval(x))).collect();
        let points = std::iter::once(BigRational::zero())
            .chain(cuts.iter().cloned())
            .chain(std::iter::once(BigRational::one()))
            .map(|x| (self.eval(&x), other.eval(&x)))
            .collect();
        (cuts, intervals, points)
    }

    fn combine(&self, other: &Self, op: impl Fn(ExtNat, ExtNat) -> ExtNat) -> Self {
        let (cuts, intervals, points) = self.refine(other);
        Self {
            breakpoints: cuts,
            intervals: intervals.into_iter().map(|(a, b)| op(a, b)).collect(),
            points: points.into_iter().map(|(a, b)| op(a, b)).collect(),
        }
        .canonical()
    }

    /// Lebesgue measure of the open support `{f > 0}`.
    pub fn support_length(&self) -> BigRational {
        let mut lo = BigRational::zero();
        let mut total = BigRational::zero();
        for (i, v) in self.intervals.iter().enumerate() {
            let hi = self.breakpoints.get(i).cloned().unwrap_or_else(BigRational::one);
            if !v.is_zero() {
                total += &hi - &lo;
            }
            lo = hi;
        }
        total
    }
}

impl fmt::Display for LscStep {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[0]={}", self.points[0])?;
        for (i, v) in self.intervals.iter().enumerate() {
            write!(f, " ({})={}", i, v)?;
            if let Some(b) = self.breakpoints.get(i) {
                write!(f, " [{b}]={}", self.points[i + 1])?;
            }
        }
        write!(f, " [1]={}", self.at_one())
    }
}

/// Pointwise sum, the Cuntz addition of the model.
pub fn lsc_add(f: &LscStep, g: &LscStep) -> LscStep {
    f.combine(g, |a, b| a + b)
}

/// Pointwise `f ≤ g` on every interval, breakpoint and endpoint.
pub fn lsc_leq(f: &LscStep, g: &LscStep) -> bool {
    let (_, intervals, points) = f.refine(g);
    intervals.iter().chain(&points).all(|(a, b)| a <= b)
}

/// Pointwise maximum.
pub fn lsc_max(f: &LscStep, g: &LscStep) -> LscStep {
    f.combine(g, |a, b| a.max(b))
}

/// Supremum of an increasing chain.
pub fn lsc_sup_chain(chain: &[LscStep]) -> Result<LscStep, CuntzError> {
    let first = chain.first().ok_or(CuntzError::EmptyChain)?;
    if let Some(i) = chain.windows(2).position(|w| !lsc_leq(&w[0], &w[1])) {
        return Err(CuntzError::NotIncreasing(i + 1));
    }
    Ok(chain[1..].iter().fold(first.clone(), |acc, f| lsc_max(&acc, f)))
}

/// Element `(f, v)` of the Cuntz semigroup of the pullback of
/// `C([0,1], F_2)` along `M_0, M_1: F_1 -> F_2` (given by multiplicities,
/// `m x n` for `F_1` with `n` and `F_2` with `m` summands).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CuNccwElement {
    pub f: Vec<LscStep>,
    pub v: Vec<ExtNat>,
    pub m0: IntMatrix,
    pub m1: IntMatrix,
}

impl CuNccwElement {
    /// Componentwise sum; the multiplicity matrices must agree.
    pub fn add(&self, other: &Self) -> Result<Self, CuntzError> {
        if self.m0 != other.m0 || self.m1 != other.m1 || self.f.len() != other.f.len() || self.v.len() != other.v.len() {
            return Err(CuntzError::DimensionMismatch("elements of different algebras".into()));
        }
        Ok(Self {
            f: self.f.iter().zip(&other.f).map(|(a, b)| lsc_add(a, b)).collect(),
            v: self.v.iter().zip(&other.v).map(|(a, b)| *a + *b).collect(),
            m0: self.m0.clone(),
            m1: self.m1.clone(),
        })
    }
}

/// `M v` over `N̄` with `0 · ∞ = 0`.
fn apply_multiplicities(m: &IntMatrix, v: &[ExtNat]) -> Result<Vec<ExtNat>, CuntzError> {
    (0..m.rows())
        .map(|i| {
            (0..m.cols()).try_fold(ExtNat::ZERO, |acc, j| {
                let k = m.get(i, j);
                if k.is_negative() {
                    return Err(CuntzError::NegativeEntry(i, j));
                }
                let k = k.to_u64().ok_or_else(|| CuntzError::DimensionMismatch("multiplicity too large".into()))?;
                Ok(acc + v[j].scale(k))
            })
        })
        .collect()
}

/// Boundary conditions `f(0) = M_0 v` and `f(1) = M_1 v`.
pub fn nccw_check(e: &CuNccwElement) -> Result<bool, CuntzError> {
    let (m, n) = (e.m0.rows(), e.m0.cols());
    if e.m1.rows() != m || e.m1.cols() != n {
        return Err(CuntzError::DimensionMismatch(format!(
            "M0 is {m}x{n} but M1 is {}x{}",
            e.m1.rows(),
            e.m1.cols()
        )));
    }
    if e.f.len() != m || e.v.len() != n {
        return Err(CuntzError::DimensionMismatch(format!(
            "expected {m} functions and {n} values, got {} and {}",
            e.f.len(),
            e.v.len()
        )));
    }
    let at0 = apply_multiplicities(&e.m0, &e.v)?;
    let at1 = apply_multiplicities(&e.m1, &e.v)?;
    Ok(e.f.iter().zip(at0.iter().zip(&at1)).all(|(f, (a, b))| f.at_zero() == *a && f.at_one() == *b))
}

/// Whether `M_0 - M_1: Z^n -> Z^m` is surjective, which makes `K_1` of the
/// pullback vanish.
pub fn k1_trivial(m0: &IntMatrix, m1: &IntMatrix) -> Result<bool, CuntzError> {
    if m0.rows() != m1.rows() || m0.cols() != m1.cols() {
        return Err(CuntzError::ShapeMismatch(m0.rows(), m0.cols(), m1.rows(), m1.cols()));
    }
    let diff = m0.sub(m1).expect("shapes agree");
    Ok(cokernel(&diff).is_trivial())
}

/// Multiplicity matrices of the dimension-drop algebra `Z_{p,q}` with
/// `F_1 = M_p ⊕ M_q` and `F_2 = M_p ⊗ M_q`.
pub fn dimension_drop_model(p: u64, q: u64) -> (IntMatrix, IntMatrix) {
    let m = |a: u64, b: u64| IntMatrix::new(1, 2, vec![BigInt::from(a), BigInt::from(b)]).expect("1x2 matrix");
    (m(q, 0), m(0, p))
}

/// The class of the unit of `Z_{p,q}`: `f ≡ pq`, `v = (p, q)`.
pub fn dimension_drop_unit(p: u64, q: u64) -> CuNccwElement {
    let (m0, m1) = dimension_drop_model(p, q);
    CuNccwElement {
        f: vec![LscStep::constant(ExtNat::Fin(p * q))],
        v: vec![ExtNat::Fin(p), ExtNat::Fin(q)],
        m0,
        m1,
    }
}

/// Measure on `[0,1]` against which a dimension function is evaluated.
#[derive(Debug, Clone, PartialEq)]
pub enum DimMeasure {
    Lebesgue,
    /// Point masses `(x, weight)`.
    Atoms(Vec<(BigRational, BigRational)>),
}

/// `d_μ(f) = μ({f > 0})`.
pub fn dim_function(f: &LscStep, measure: &DimMeasure) -> BigRational {
    match measure {
        DimMeasure::Lebesgue => f.support_length(),
        DimMeasure::Atoms(atoms) => atoms
            .iter()
            .filter(|(x, _)| !f.eval(x).is_zero())
            .map(|(_, w)| w.clone())
            .sum(),
    }
}

/// Element of `Cu(Z) = N_0 ⊔ (0, ∞]`: classes of projections and soft
/// elements (functions on the one-point trace space).
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CuZ {
    Compact(u64),
    Soft(f64),
}

impl CuZ {
    /// A soft element; `t` must lie in `(0, ∞]`.
    pub fn soft(t: f64) -> Result<Self, CuntzError> {
        if t > 0.0 {
            Ok(Self::Soft(t))
        } else {
            Err(CuntzError::InvalidElement(format!("soft value {t} is not in (0, inf]")))
        }
    }

    /// Value of the unique normalised dimension function.
    pub fn rank(self) -> f64 {
        match self {
            Self::Compact(k) => k as f64,
            Self::Soft(t) => t,
        }
    }

    pub fn leq(self, other: CuZ) -> bool {
        match (self, other) {
            (Self::Compact(j), Self::Compact(k)) => j <= k,
            (Self::Soft(s), Self::Compact(k)) => s <= k as f64,
            (Self::Compact(j), Self::Soft(t)) => j == 0 || (j as f64) < t,
            (Self::Soft(s), Self::Soft(t)) => s <= t,
        }
    }
}

impl Add for CuZ {
    type Output = CuZ;

    fn add(self, rhs: CuZ) -> CuZ {
        match (self, rhs) {
            (Self::Compact(j), Self::Compact(k)) => Self::Compact(j + k),
            (a, b) => Self::Soft(a.rank() + b.rank()),
        }
    }
}
