use num_bigint::BigInt;
use num_complex::Complex64;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive};

use super::{matrix::NormalMatrix, TransportError};

/// Eigenvalues closer than this are merged into one atom.
pub const ATOM_MERGE_TOL: f64 = 1e-9;

/// Distance oracle on a point type.
pub trait Metric<P> {
    fn distance(&self, x: &P, y: &P) -> f64;

    fn contains(&self, _x: &P) -> bool {
        true
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct ComplexPlane;

impl Metric<Complex64> for ComplexPlane {
    fn distance(&self, x: &Complex64, y: &Complex64) -> f64 {
        (x - y).norm()
    }

    fn contains(&self, x: &Complex64) -> bool {
        x.re.is_finite() && x.im.is_finite()
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct RealLine;

impl Metric<f64> for RealLine {
    fn distance(&self, x: &f64, y: &f64) -> f64 {
        (x - y).abs()
    }

    fn contains(&self, x: &f64) -> bool {
        x.is_finite()
    }
}

/// ℝ^dim with the Euclidean distance.
#[derive(Debug, Clone, Copy)]
pub struct Euclidean {
    pub dim: usize,
}

impl Metric<Vec<f64>> for Euclidean {
    fn distance(&self, x: &Vec<f64>, y: &Vec<f64>) -> f64 {
        x.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt()
    }

    fn contains(&self, x: &Vec<f64>) -> bool {
        x.len() == self.dim && x.iter().all(|v| v.is_finite())
    }
}

/// Finitely supported probability measure with exact rational weights.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteMeasure<P> {
    atoms: Vec<P>,
    weights: Vec<BigRational>,
}

impl<P> DiscreteMeasure<P> {
    pub fn new(atoms: Vec<P>, weights: Vec<BigRational>) -> Result<Self, TransportError> {
        if atoms.len() != weights.len() {
            return Err(TransportError::SizeMismatch(atoms.len(), weights.len()));
        }
        if atoms.is_empty() {
            return Err(TransportError::Empty);
        }
        if let Some(i) = weights.iter().position(|w| !w.is_positive()) {
            return Err(TransportError::InvalidMeasure(format!("weight {i} is not positive")));
        }
        let total: BigRational = weights.iter().sum();
        if !total.is_one() {
            return Err(TransportError::InvalidMeasure(format!("weights sum to {total}")));
        }
        Ok(Self { atoms, weights })
    }

    /// Normalised counting measure; repeated atoms are kept separate.
    pub fn uniform(atoms: Vec<P>) -> Result<Self, TransportError> {
        let n = atoms.len();
        if n == 0 {
            return Err(TransportError::Empty);
        }
        let w = BigRational::new(BigInt::one(), BigInt::from(n));
        Self::new(atoms, vec![w; n])
    }

    pub fn dirac(x: P) -> Self {
        Self { atoms: vec![x], weights: vec![BigRational::one()] }
    }

    pub fn atoms(&self) -> &[P] {
        &self.atoms
    }

    pub fn weights(&self) -> &[BigRational] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    /// Least common denominator of the weights.
    pub fn common_denominator(&self) -> BigInt {
        self.weights.iter().fold(BigInt::one(), |acc, w| acc.lcm(w.denom()))
    }

    /// Integer multiplicities `w_i * denom`.
    pub fn multiplicities(&self, denom: &BigInt) -> Vec<BigInt> {
        self.weights
            .iter()
            .map(|w| (w * BigRational::from_integer(denom.clone())).to_integer())
            .collect()
    }
}

/// Equal-weight expansion: each atom repeated `w_i * denom` times.
pub fn expand_atoms<P: Clone>(mu: &DiscreteMeasure<P>, denom: &BigInt) -> Vec<P> {
    let mut out = Vec::new();
    for (x, m) in mu.atoms.iter().zip(mu.multiplicities(denom)) {
        let m = m.to_usize().expect("multiplicity fits in memory");
        out.extend(std::iter::repeat_n(x.clone(), m));
    }
    out
}

/// `W_∞(μ, ν)`: the least `r` such that `μ(U) ≤ ν(U_r)` for every open `U`.
///
/// Weights are brought to a common denominator `L`; the measures then become
/// `L` equal-weight atoms each (with multiplicity) and `W_∞` is their
/// bottleneck matching value. Feasibility of a threshold is a max-flow with
/// the multiplicities as capacities, which is the same matching problem
/// without materialising the copies.
pub fn wasserstein_inf<P, M: Metric<P>>(
    mu: &DiscreteMeasure<P>,
    nu: &DiscreteMeasure<P>,
    metric: &M,
) -> Result<f64, TransportError> {
    for (i, x) in mu.atoms.iter().chain(&nu.atoms).enumerate() {
        if !metric.contains(x) {
            return Err(TransportError::IncompatibleSpaces(i));
        }
    }
    let denom = mu.common_denominator().lcm(&nu.common_denominator());
    let to_cap = |m: BigInt| {
        m.to_i64()
            .ok_or_else(|| TransportError::InvalidMeasure("common denominator exceeds 2^63".into()))
    };
    let supply = mu.multiplicities(&denom).into_iter().map(to_cap).collect::<Result<Vec<_>, _>>()?;
    let demand = nu.multiplicities(&denom).into_iter().map(to_cap).collect::<Result<Vec<_>, _>>()?;
    let total = to_cap(denom)?;

    let cost: Vec<Vec<f64>> = mu
        .atoms
        .iter()
        .map(|x| nu.atoms.iter().map(|y| metric.distance(x, y)).collect())
        .collect();
    let mut thresholds: Vec<f64> = cost.iter().flatten().copied().collect();
    thresholds.sort_by(f64::total_cmp);
    thresholds.dedup();

    let feasible = |t: f64| {
        let (m, n) = (supply.len(), demand.len());
        let mut net = FlowNetwork::new(m + n + 2);
        let (s, z) = (m + n, m + n + 1);
        for (i, &c) in supply.iter().enumerate() {
            net.add_edge(s, i, c);
        }
        for (j, &c) in demand.iter().enumerate() {
            net.add_edge(m + j, z, c);
        }
        for i in 0..m {
            for j in 0..n {
                if cost[i][j] <= t {
                    net.add_edge(i, m + j, total);
                }
            }
        }
        net.max_flow(s, z) == total
    };

    let (mut lo, mut hi) = (0, thresholds.len() - 1);
    while lo < hi {
        let mid = (lo + hi) / 2;
        if feasible(thresholds[mid]) {
            hi = mid;
        } else {
            lo = mid + 1;
        }
    }
    Ok(thresholds[lo])
}

/// Normalised counting measure on the eigenvalues; eigenvalues within
/// [`ATOM_MERGE_TOL`] of a cluster share one atom at the cluster mean.
pub fn spectral_measure(a: &NormalMatrix) -> DiscreteMeasure<Complex64> {
    let (mut vals, _) = a.eigen();
    vals.sort_by(|x, y| x.re.total_cmp(&y.re).then(x.im.total_cmp(&y.im)));
    let mut clusters: Vec<(Complex64, usize)> = Vec::new();
    for z in vals {
        match clusters
            .iter_mut()
            .find(|(c, k)| (c / *k as f64 - z).norm() <= ATOM_MERGE_TOL)
        {
            Some((c, k)) => {
                *c += z;
                *k += 1;
            }
            None => clusters.push((z, 1)),
        }
    }
    let n = BigInt::from(a.n());
    let (atoms, weights) = clusters
        .into_iter()
        .map(|(c, k)| (c / k as f64, BigRational::new(BigInt::from(k), n.clone())))
        .unzip();
    DiscreteMeasure::new(atoms, weights).expect("counting weights sum to one")
}

/// `W_∞` of the spectral measures (the trace on `M_n` is unique).
pub fn winf_pair(a: &NormalMatrix, b: &NormalMatrix) -> Result<f64, TransportError> {
    if a.n() != b.n() {
        return Err(TransportError::SizeMismatch(a.n(), b.n()));
    }
    wasserstein_inf(&spectral_measure(a), &spectral_measure(b), &ComplexPlane)
}

/// Dinic max-flow on integer capacities.
struct FlowNetwork {
    head: Vec<Vec<usize>>,
    to: Vec<usize>,
    cap: Vec<i64>,
}

impl FlowNetwork {
    fn new(nodes: usize) -> Self {
        Self { head: vec![Vec::new(); nodes], to: Vec::new(), cap: Vec::new() }
    }

    fn add_edge(&mut self, u: usize, v: usize, c: i64) {
        self.head[u].push(self.to.len());
        self.to.push(v);
        self.cap.push(c);
        self.head[v].push(self.to.len());
        self.to.push(u);
        self.cap.push(0);
    }

    fn max_flow(&mut self, s: usize, t: usize) -> i64 {
        let mut flow = 0;
        loop {
            let Some(level) = self.levels(s, t) else { return flow };
            let mut next = vec![0usize; self.head.len()];
            loop {
                let pushed = self.push(s, t, i64::MAX, &level, &mut next);
                if pushed == 0 {
                    break;
                }
                flow += pushed;
            }
        }
    }

    fn levels(&self, s: usize, t: usize) -> Option<Vec<i64>> {
        let mut level = vec![-1; self.head.len()];
        level[s] = 0;
        let mut queue = std::collections::VecDeque::from([s]);
        while let Some(u) = queue.pop_front() {
            for &e in &self.head[u] {
                let v = self.to[e];
                if self.cap[e] > 0 && level[v] < 0 {
                    level[v] = level[u] + 1;
                    queue.push_back(v);
                }
            }
        }
        (level[t] >= 0).then_some(level)
    }

    fn push(&mut self, u: usize, t: usize, limit: i64, level: &[i64], next: &mut [usize]) -> i64 {
        if u == t {
            return limit;
        }
        while next[u] < self.head[u].len() {
            let e = self.head[u][next[u]];
            let v = self.to[e];
            if self.cap[e] > 0 && level[v] == level[u] + 1 {
                let pushed = self.push(v, t, limit.min(self.cap[e]), level, next);
                if pushed > 0 {
                    self.cap[e] -= pushed;
                    self.cap[e ^ 1] += pushed;
                    return pushed;
                }
            }
            next[u] += 1;
        }
        0
    }
}
