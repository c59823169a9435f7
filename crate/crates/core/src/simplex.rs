//! Random projective systems of finite-dimensional simplices.
//!
//! A tower follows a walk `Y_0, Y_1, ...`: when the dimension drops the
//! connecting map `Δ_{Y_k} -> Δ_{Y_{k-1}}` is the inclusion of the base face;
//! when it rises the map is a collapse fixing the base and sending the top
//! vertex to a point of the base drawn from the measure scheme. Collapse
//! points are the columns of a representing matrix.
//!
//! Distances between points of a simplex are half the `ℓ¹` distance of their
//! barycentric coordinates, so distinct vertices are at distance 1.

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::rng::{stream, StreamRng};
use crate::walk::Trajectory;

/// Tolerance on the coordinate sum of a barycentric vector.
pub const BARYCENTRIC_TOL: f64 = 1e-12;
/// Grid spacing used by [`covering_radius`].
pub const GRID_DENOMINATOR: usize = 8;
/// Largest grid [`covering_radius`] will enumerate.
pub const MAX_GRID_POINTS: usize = 200_000;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SimplexError {
    #[error("not a barycentric vector: {0}")]
    NotBarycentric(String),
    #[error("trajectory must move by ±1 at every step; step {step} goes {from} -> {to}")]
    InvalidTrajectory { step: usize, from: u64, to: u64 },
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("a 1/{GRID_DENOMINATOR} grid on a {0}-simplex has too many points")]
    GridTooLarge(u64),
    #[error("malformed tower document: {0}")]
    Malformed(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct BarycentricVector {
    coords: Vec<f64>,
}

impl BarycentricVector {
    pub fn new(coords: Vec<f64>) -> Result<Self, SimplexError> {
        Self::with_tolerance(coords, BARYCENTRIC_TOL)
    }

    pub fn with_tolerance(coords: Vec<f64>, tol: f64) -> Result<Self, SimplexError> {
        if coords.is_empty() {
            return Err(SimplexError::NotBarycentric("no coordinates".into()));
        }
        if coords.iter().any(|&x| x < 0.0 || !x.is_finite()) {
            return Err(SimplexError::NotBarycentric(format!(
                "negative or non-finite coordinate in {coords:?}"
            )));
        }
        let sum: f64 = coords.iter().sum();
        if (sum - 1.0).abs() > tol {
            return Err(SimplexError::NotBarycentric(format!(
                "coordinates sum to {sum}"
            )));
        }
        Ok(Self { coords })
    }

    pub fn vertex(dim: usize, i: usize) -> Self {
        let mut coords = vec![0.0; dim + 1];
        coords[i] = 1.0;
        Self { coords }
    }

    pub fn barycenter(dim: usize) -> Self {
        Self {
            coords: vec![1.0 / (dim as f64 + 1.0); dim + 1],
        }
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    /// Dimension of the simplex this point lives in.
    pub fn dim(&self) -> usize {
        self.coords.len() - 1
    }

    pub fn distance(&self, other: &BarycentricVector) -> f64 {
        half_l1(&self.coords, &other.coords)
    }
}

fn half_l1(a: &[f64], b: &[f64]) -> f64 {
    0.5 * a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum::<f64>()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum MeasureScheme {
    /// Point mass at the barycentre of the base.
    #[serde(rename = "barycenter")]
    BarycenterPointMass,
    /// Uniform on the vertices of the base.
    #[serde(rename = "vertices")]
    UniformVertices,
    /// Lebesgue measure on successively smaller faces of the base.
    #[serde(rename = "faces")]
    LebesgueFaces,
}

impl MeasureScheme {
    pub const ALL: [MeasureScheme; 3] = [
        MeasureScheme::BarycenterPointMass,
        MeasureScheme::UniformVertices,
        MeasureScheme::LebesgueFaces,
    ];

    pub fn name(self) -> &'static str {
        match self {
            MeasureScheme::BarycenterPointMass => "barycenter",
            MeasureScheme::UniformVertices => "vertices",
            MeasureScheme::LebesgueFaces => "faces",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "barycenter" | "I" => Some(MeasureScheme::BarycenterPointMass),
            "vertices" | "II" => Some(MeasureScheme::UniformVertices),
            "faces" | "III" => Some(MeasureScheme::LebesgueFaces),
            _ => None,
        }
    }
}

/// Index of the top vertex of the face sampled on the `visit`-th collapse
/// (0-based) into dimension `n`. The faces `conv{e_0..e_t}` of the base
/// `Δ_{n-1}` are cycled with `t = n-1, n-2, ..., 0, n-1, ...`.
pub fn face_top(n: usize, visit: u64) -> usize {
    let base = n - 1;
    base - (visit % n as u64) as usize
}

/// Image of the new top vertex for a collapse `Δ_n -> Δ_{n-1}`; a point of
/// the base with `n` coordinates. `visit` counts earlier collapses into
/// dimension `n` and only matters for [`MeasureScheme::LebesgueFaces`].
///
/// Panics if `n == 0`.
pub fn draw_collapse<R: Rng + ?Sized>(
    scheme: MeasureScheme,
    n: usize,
    visit: u64,
    rng: &mut R,
) -> BarycentricVector {
    assert!(n >= 1, "Δ_0 has no base to collapse onto");
    if n == 1 {
        return BarycentricVector::vertex(0, 0);
    }
    match scheme {
        MeasureScheme::BarycenterPointMass => BarycentricVector::barycenter(n - 1),
        MeasureScheme::UniformVertices => {
            BarycentricVector::vertex(n - 1, rng.random_range(0..n))
        }
        MeasureScheme::LebesgueFaces => {
            let top = face_top(n, visit);
            let mut coords = uniform_on_simplex(top, rng);
            coords.resize(n, 0.0);
            BarycentricVector { coords }
        }
    }
}

/// Uniform point of the standard `dim`-simplex via spacings of sorted
/// uniforms.
fn uniform_on_simplex<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> Vec<f64> {
    let mut cuts: Vec<f64> = (0..dim).map(|_| rng.random::<f64>()).collect();
    cuts.sort_by(f64::total_cmp);
    let mut coords = Vec::with_capacity(dim + 1);
    let mut last = 0.0;
    for c in cuts {
        coords.push(c - last);
        last = c;
    }
    coords.push(1.0 - last);
    coords
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", content = "point", rename_all = "lowercase")]
pub enum SimplexMap {
    Inclusion,
    Collapse(BarycentricVector),
}

/// Generates connecting maps one step at a time, so long towers can be
/// consumed without being stored.
pub struct TowerBuilder {
    scheme: MeasureScheme,
    rng: StreamRng,
    visits: Vec<u64>,
    prev: Option<u64>,
    step: usize,
}

impl TowerBuilder {
    pub fn new(scheme: MeasureScheme, seed: u64) -> Self {
        Self {
            scheme,
            rng: stream(seed),
            visits: Vec::new(),
            prev: None,
            step: 0,
        }
    }

    /// Feeds the next dimension; returns the map into the previous level
    /// (`None` for the first level).
    pub fn push(&mut self, dim: u64) -> Result<Option<SimplexMap>, SimplexError> {
        let prev = self.prev.replace(dim);
        let Some(prev) = prev else {
            return Ok(None);
        };
        self.step += 1;
        if dim + 1 == prev {
            Ok(Some(SimplexMap::Inclusion))
        } else if dim == prev + 1 {
            let n = dim as usize;
            if self.visits.len() <= n {
                self.visits.resize(n + 1, 0);
            }
            let v = draw_collapse(self.scheme, n, self.visits[n], &mut self.rng);
            self.visits[n] += 1;
            Ok(Some(SimplexMap::Collapse(v)))
        } else {
            Err(SimplexError::InvalidTrajectory {
                step: self.step,
                from: prev,
                to: dim,
            })
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimplexTower {
    dims: Trajectory,
    /// `maps[k-1]` connects level `k` to level `k-1`.
    maps: Vec<SimplexMap>,
}

pub fn build_tower(
    trajectory: &Trajectory,
    scheme: MeasureScheme,
    seed: u64,
) -> Result<SimplexTower, SimplexError> {
    let mut builder = TowerBuilder::new(scheme, seed);
    let mut maps = Vec::with_capacity(trajectory.len().saturating_sub(1));
    for &d in trajectory.states() {
        if let Some(m) = builder.push(d)? {
            maps.push(m);
        }
    }
    Ok(SimplexTower {
        dims: trajectory.clone(),
        maps,
    })
}

impl SimplexTower {
    pub fn dims(&self) -> &[u64] {
        self.dims.states()
    }

    pub fn maps(&self) -> &[SimplexMap] {
        &self.maps
    }

    /// Number of levels.
    pub fn len(&self) -> usize {
        self.dims.len()
    }

    pub fn is_empty(&self) -> bool {
        self.dims.is_empty()
    }

    /// The map from level `k` down to level `k - 1`, for `k >= 1`.
    pub fn map(&self, k: usize) -> &SimplexMap {
        &self.maps[k - 1]
    }

    /// Checks the structural invariants; used after deserialization.
    pub fn validate(&self) -> Result<(), SimplexError> {
        let dims = self.dims();
        if dims.is_empty() {
            return Err(SimplexError::Malformed("tower has no levels".into()));
        }
        if self.maps.len() + 1 != dims.len() {
            return Err(SimplexError::Malformed(format!(
                "{} levels but {} maps",
                dims.len(),
                self.maps.len()
            )));
        }
        for k in 1..dims.len() {
            let (lo, hi) = (dims[k - 1], dims[k]);
            match self.map(k) {
                SimplexMap::Inclusion if hi + 1 == lo => {}
                SimplexMap::Collapse(v) if hi == lo + 1 => {
                    if v.coords.len() as u64 != lo + 1 {
                        return Err(SimplexError::Malformed(format!(
                            "collapse at level {k} has {} coordinates, expected {}",
                            v.coords.len(),
                            lo + 1
                        )));
                    }
                    BarycentricVector::new(v.coords.clone())?;
                }
                _ => {
                    return Err(SimplexError::Malformed(format!(
                        "map at level {k} does not match step {lo} -> {hi}"
                    )))
                }
            }
        }
        Ok(())
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("towers serialize")
    }

    pub fn from_json(s: &str) -> Result<Self, SimplexError> {
        let tower: SimplexTower =
            serde_json::from_str(s).map_err(|e| SimplexError::Malformed(e.to_string()))?;
        tower.validate()?;
        Ok(tower)
    }
}

/// Applies one connecting map (level `k` to `k - 1`) to a point of `Δ_{dims[k]}`.
fn apply_map(map: &SimplexMap, x: &[f64]) -> Vec<f64> {
    match map {
        SimplexMap::Inclusion => {
            let mut y = x.to_vec();
            y.push(0.0);
            y
        }
        SimplexMap::Collapse(v) => {
            let (base, top) = x.split_at(x.len() - 1);
            base.iter()
                .zip(&v.coords)
                .map(|(b, vi)| b + top[0] * vi)
                .collect()
        }
    }
}

/// Image of `point ∈ Δ_{dims[from]}` at level `to <= from`.
pub fn pushdown(
    tower: &SimplexTower,
    from: usize,
    point: &BarycentricVector,
    to: usize,
) -> Result<BarycentricVector, SimplexError> {
    if to > from || from >= tower.len() {
        return Err(SimplexError::DimensionMismatch(format!(
            "cannot push level {from} down to level {to} in a tower of {} levels",
            tower.len()
        )));
    }
    if point.dim() as u64 != tower.dims()[from] {
        return Err(SimplexError::DimensionMismatch(format!(
            "point has dimension {}, level {from} has dimension {}",
            point.dim(),
            tower.dims()[from]
        )));
    }
    let mut x = point.coords.clone();
    for k in (to + 1..=from).rev() {
        x = apply_map(tower.map(k), &x);
    }
    Ok(BarycentricVector { coords: x })
}

/// Tracks, for a fixed base level, the images in the base simplex of the
/// vertices of the current level, and collects every top-vertex image.
pub struct CoveringTracker {
    base_dim: usize,
    columns: Vec<Vec<f64>>,
    points: Vec<Vec<f64>>,
}

impl CoveringTracker {
    pub fn new(base_dim: usize) -> Self {
        let columns: Vec<Vec<f64>> = (0..=base_dim)
            .map(|i| BarycentricVector::vertex(base_dim, i).coords)
            .collect();
        Self {
            base_dim,
            points: columns.clone(),
            columns,
        }
    }

    pub fn base_dim(&self) -> usize {
        self.base_dim
    }

    /// Feeds the map from the next level down to the current one.
    pub fn apply(&mut self, map: &SimplexMap) {
        match map {
            SimplexMap::Inclusion => {
                self.columns.pop();
            }
            SimplexMap::Collapse(v) => {
                let mut img = vec![0.0; self.base_dim + 1];
                for (w, col) in v.coords.iter().zip(&self.columns) {
                    if *w != 0.0 {
                        for (acc, c) in img.iter_mut().zip(col) {
                            *acc += w * c;
                        }
                    }
                }
                self.columns.push(img.clone());
                self.points.push(img);
            }
        }
    }

    /// Pushed-down points, base vertices first.
    pub fn points(&self) -> &[Vec<f64>] {
        &self.points
    }

    pub fn radius(&self) -> Result<f64, SimplexError> {
        let grid = simplex_grid(self.base_dim, GRID_DENOMINATOR)?;
        Ok(grid
            .iter()
            .map(|g| {
                self.points
                    .iter()
                    .map(|p| half_l1(g, p))
                    .fold(f64::INFINITY, f64::min)
            })
            .fold(0.0, f64::max))
    }
}

/// All points of `Δ_dim` whose coordinates are multiples of `1/denominator`.
pub fn simplex_grid(dim: usize, denominator: usize) -> Result<Vec<Vec<f64>>, SimplexError> {
    // C(denominator + dim, dim) points.
    let mut count: u128 = 1;
    for i in 1..=dim as u128 {
        count = count * (denominator as u128 + i) / i;
        if count > MAX_GRID_POINTS as u128 {
            return Err(SimplexError::GridTooLarge(dim as u64));
        }
    }
    let mut out = Vec::with_capacity(count as usize);
    let mut parts = vec![0usize; dim + 1];
    compositions(denominator, 0, &mut parts, &mut |c| {
        out.push(c.iter().map(|&k| k as f64 / denominator as f64).collect());
    });
    Ok(out)
}

fn compositions(remaining: usize, idx: usize, parts: &mut [usize], emit: &mut impl FnMut(&[usize])) {
    if idx + 1 == parts.len() {
        parts[idx] = remaining;
        emit(parts);
        return;
    }
    for k in 0..=remaining {
        parts[idx] = k;
        compositions(remaining - k, idx + 1, parts, emit);
    }
}

/// Covering radius of `Δ_{dims[level]}` by the images of all top vertices
/// from higher levels together with its own vertices, measured as the
/// largest distance from a point of the `1/8` grid to the nearest image.
pub fn covering_radius(tower: &SimplexTower, level: usize) -> Result<f64, SimplexError> {
    if level >= tower.len() {
        return Err(SimplexError::DimensionMismatch(format!(
            "level {level} out of range for a tower of {} levels",
            tower.len()
        )));
    }
    let mut tracker = CoveringTracker::new(tower.dims()[level] as usize);
    for k in level + 1..tower.len() {
        tracker.apply(tower.map(k));
    }
    tracker.radius()
}
