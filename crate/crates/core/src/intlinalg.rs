//! Exact integer linear algebra.
//!
//! Everything here works over arbitrary-precision integers: intermediate
//! entries of a Smith reduction can grow well past the input magnitudes and
//! no overflow is ever silently tolerated.

use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum IntLinAlgError {
    #[error("expected {expected} entries for a {rows}x{cols} matrix, got {got}")]
    EntryCount {
        rows: usize,
        cols: usize,
        expected: usize,
        got: usize,
    },
    #[error("cannot multiply {0}x{1} by {2}x{3}")]
    ShapeMismatch(usize, usize, usize, usize),
}

/// Dense row-major integer matrix.
#[derive(Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct IntMatrix {
    rows: usize,
    cols: usize,
    entries: Vec<BigInt>,
}

impl IntMatrix {
    pub fn new(rows: usize, cols: usize, entries: Vec<BigInt>) -> Result<Self, IntLinAlgError> {
        if entries.len() != rows * cols {
            return Err(IntLinAlgError::EntryCount {
                rows,
                cols,
                expected: rows * cols,
                got: entries.len(),
            });
        }
        Ok(Self {
            rows,
            cols,
            entries,
        })
    }

    pub fn from_i64(rows: usize, cols: usize, entries: &[i64]) -> Result<Self, IntLinAlgError> {
        Self::new(rows, cols, entries.iter().map(|&x| BigInt::from(x)).collect())
    }

    /// Builds a matrix from rows of machine integers. Panics on ragged input.
    pub fn from_rows(rows: &[Vec<i64>]) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        assert!(rows.iter().all(|row| row.len() == c), "ragged rows");
        let entries = rows.iter().flatten().map(|&x| BigInt::from(x)).collect();
        Self {
            rows: r,
            cols: c,
            entries,
        }
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            entries: vec![BigInt::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.entries[i * n + i] = BigInt::one();
        }
        m
    }

    pub fn diagonal(rows: usize, cols: usize, diag: &[BigInt]) -> Self {
        let mut m = Self::zeros(rows, cols);
        for (i, d) in diag.iter().enumerate().take(rows.min(cols)) {
            m.entries[i * cols + i] = d.clone();
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn entries(&self) -> &[BigInt] {
        &self.entries
    }

    pub fn get(&self, r: usize, c: usize) -> &BigInt {
        &self.entries[r * self.cols + c]
    }

    pub fn set(&mut self, r: usize, c: usize, value: BigInt) {
        self.entries[r * self.cols + c] = value;
    }

    pub fn is_zero(&self) -> bool {
        self.entries.iter().all(Zero::is_zero)
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.cols, self.rows);
        for r in 0..self.rows {
            for c in 0..self.cols {
                t.entries[c * self.rows + r] = self.get(r, c).clone();
            }
        }
        t
    }

    pub fn mul(&self, other: &IntMatrix) -> Result<IntMatrix, IntLinAlgError> {
        if self.cols != other.rows {
            return Err(IntLinAlgError::ShapeMismatch(
                self.rows, self.cols, other.rows, other.cols,
            ));
        }
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a.is_zero() {
                    continue;
                }
                for j in 0..other.cols {
                    let b = other.get(k, j);
                    if !b.is_zero() {
                        out.entries[i * other.cols + j] += a * b;
                    }
                }
            }
        }
        Ok(out)
    }

    pub fn sub(&self, other: &IntMatrix) -> Result<IntMatrix, IntLinAlgError> {
        if self.rows != other.rows || self.cols != other.cols {
            return Err(IntLinAlgError::ShapeMismatch(
                self.rows, self.cols, other.rows, other.cols,
            ));
        }
        let entries = self
            .entries
            .iter()
            .zip(&other.entries)
            .map(|(a, b)| a - b)
            .collect();
        Ok(Self {
            rows: self.rows,
            cols: self.cols,
            entries,
        })
    }

    /// Rows `start..end` as a new matrix.
    pub fn row_block(&self, start: usize, end: usize) -> IntMatrix {
        let entries = self.entries[start * self.cols..end * self.cols].to_vec();
        Self {
            rows: end - start,
            cols: self.cols,
            entries,
        }
    }

    /// Columns `start..end` as a new matrix.
    pub fn col_block(&self, start: usize, end: usize) -> IntMatrix {
        let mut out = Self::zeros(self.rows, end - start);
        for r in 0..self.rows {
            for c in start..end {
                out.set(r, c - start, self.get(r, c).clone());
            }
        }
        out
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for c in 0..self.cols {
            self.entries.swap(a * self.cols + c, b * self.cols + c);
        }
    }

    fn swap_cols(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for r in 0..self.rows {
            self.entries.swap(r * self.cols + a, r * self.cols + b);
        }
    }

    /// row[dst] += factor * row[src]
    fn add_row_multiple(&mut self, dst: usize, src: usize, factor: &BigInt) {
        if factor.is_zero() {
            return;
        }
        for c in 0..self.cols {
            let v = &self.entries[src * self.cols + c] * factor;
            self.entries[dst * self.cols + c] += v;
        }
    }

    /// col[dst] += factor * col[src]
    fn add_col_multiple(&mut self, dst: usize, src: usize, factor: &BigInt) {
        if factor.is_zero() {
            return;
        }
        for r in 0..self.rows {
            let v = &self.entries[r * self.cols + src] * factor;
            self.entries[r * self.cols + dst] += v;
        }
    }

    fn negate_row(&mut self, r: usize) {
        for c in 0..self.cols {
            let v = &mut self.entries[r * self.cols + c];
            *v = -std::mem::take(v);
        }
    }
}

impl fmt::Debug for IntMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "IntMatrix{}x{}[", self.rows, self.cols)?;
        for r in 0..self.rows {
            if r > 0 {
                write!(f, "; ")?;
            }
            for c in 0..self.cols {
                if c > 0 {
                    write!(f, " ")?;
                }
                write!(f, "{}", self.get(r, c))?;
            }
        }
        write!(f, "]")
    }
}

/// `U * m * V = D` with `U`, `V` unimodular and `D` diagonal, nonnegative,
/// with each nonzero diagonal entry dividing the next.
#[derive(Debug, Clone)]
pub struct SmithForm {
    pub u: IntMatrix,
    pub d: IntMatrix,
    pub v: IntMatrix,
    pub rank: usize,
}

impl SmithForm {
    /// The nonzero diagonal entries `d_1 | d_2 | ... | d_rank`.
    pub fn invariant_factors(&self) -> Vec<BigInt> {
        (0..self.rank).map(|i| self.d.get(i, i).clone()).collect()
    }
}

/// Smith normal form with transforms.
///
/// Pivots on the entry of smallest nonzero absolute value in the remaining
/// block, which keeps entry growth modest on the inputs seen here.
pub fn smith_normal_form(m: &IntMatrix) -> SmithForm {
    let (rows, cols) = (m.rows, m.cols);
    let mut d = m.clone();
    let mut u = IntMatrix::identity(rows);
    let mut v = IntMatrix::identity(cols);
    let mut t = 0;

    while t < rows.min(cols) {
        let Some((pr, pc)) = smallest_nonzero(&d, t) else {
            break;
        };
        d.swap_rows(t, pr);
        u.swap_rows(t, pr);
        d.swap_cols(t, pc);
        v.swap_cols(t, pc);

        // Clear column t and row t. A nonzero remainder becomes the new,
        // strictly smaller, pivot.
        let mut dirty = false;
        for r in t + 1..rows {
            if d.get(r, t).is_zero() {
                continue;
            }
            let q = -d.get(r, t).div_floor(d.get(t, t));
            d.add_row_multiple(r, t, &q);
            u.add_row_multiple(r, t, &q);
            dirty |= !d.get(r, t).is_zero();
        }
        for c in t + 1..cols {
            if d.get(t, c).is_zero() {
                continue;
            }
            let q = -d.get(t, c).div_floor(d.get(t, t));
            d.add_col_multiple(c, t, &q);
            v.add_col_multiple(c, t, &q);
            dirty |= !d.get(t, c).is_zero();
        }
        if dirty {
            continue;
        }

        // Pivot must divide the whole remaining block; otherwise fold the
        // offending row in and reduce again.
        let pivot = d.get(t, t).clone();
        let offender = (t + 1..rows)
            .flat_map(|r| (t + 1..cols).map(move |c| (r, c)))
            .find(|&(r, c)| !d.get(r, c).is_multiple_of(&pivot));
        if let Some((r, _)) = offender {
            let one = BigInt::one();
            d.add_row_multiple(t, r, &one);
            u.add_row_multiple(t, r, &one);
            continue;
        }

        if pivot.is_negative() {
            d.negate_row(t);
            u.negate_row(t);
        }
        t += 1;
    }

    SmithForm { u, d, v, rank: t }
}

fn smallest_nonzero(m: &IntMatrix, t: usize) -> Option<(usize, usize)> {
    let mut best: Option<(usize, usize)> = None;
    for r in t..m.rows {
        for c in t..m.cols {
            let x = m.get(r, c);
            if x.is_zero() {
                continue;
            }
            match best {
                Some((br, bc)) if m.get(br, bc).abs() <= x.abs() => {}
                _ => best = Some((r, c)),
            }
        }
    }
    best
}

/// Finitely generated abelian group `Z^free_rank ⊕ Z/d_1 ⊕ ... ⊕ Z/d_k`
/// in invariant-factor form (`d_i >= 2`, `d_i | d_{i+1}`).
#[derive(Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct FGAbelianGroup {
    free_rank: usize,
    torsion: Vec<BigInt>,
}

impl FGAbelianGroup {
    pub fn zero() -> Self {
        Self::free(0)
    }

    pub fn free(rank: usize) -> Self {
        Self {
            free_rank: rank,
            torsion: Vec::new(),
        }
    }

    pub fn cyclic(order: u64) -> Self {
        Self::from_factors(0, &[BigInt::from(order)])
    }

    /// Any list of cyclic orders, normalized to invariant-factor form.
    /// Orders of 0 count as free summands, orders of 1 vanish.
    pub fn from_factors(free_rank: usize, orders: &[BigInt]) -> Self {
        let mut free_rank = free_rank;
        let mut nontrivial = Vec::new();
        for o in orders {
            let o = o.abs();
            if o.is_zero() {
                free_rank += 1;
            } else if !o.is_one() {
                nontrivial.push(o);
            }
        }
        let k = nontrivial.len();
        let snf = smith_normal_form(&IntMatrix::diagonal(k, k, &nontrivial));
        let torsion = snf
            .invariant_factors()
            .into_iter()
            .filter(|d| !d.is_one())
            .collect();
        Self { free_rank, torsion }
    }

    pub fn free_rank(&self) -> usize {
        self.free_rank
    }

    pub fn torsion(&self) -> &[BigInt] {
        &self.torsion
    }

    pub fn is_trivial(&self) -> bool {
        self.free_rank == 0 && self.torsion.is_empty()
    }

    pub fn is_free(&self) -> bool {
        self.torsion.is_empty()
    }

    pub fn direct_sum(&self, other: &FGAbelianGroup) -> FGAbelianGroup {
        let orders: Vec<BigInt> = self.torsion.iter().chain(&other.torsion).cloned().collect();
        Self::from_factors(self.free_rank + other.free_rank, &orders)
    }
}

impl fmt::Display for FGAbelianGroup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_trivial() {
            return write!(f, "0");
        }
        let mut parts = Vec::new();
        match self.free_rank {
            0 => {}
            1 => parts.push("Z".to_string()),
            r => parts.push(format!("Z^{r}")),
        }
        parts.extend(self.torsion.iter().map(|d| format!("Z/{d}")));
        write!(f, "{}", parts.join(" + "))
    }
}

impl fmt::Debug for FGAbelianGroup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "FGAbelianGroup({self})")
    }
}

/// Cokernel of `m` viewed as a map `Z^cols -> Z^rows`.
pub fn cokernel(m: &IntMatrix) -> FGAbelianGroup {
    let snf = smith_normal_form(m);
    FGAbelianGroup::from_factors(m.rows - snf.rank, &snf.invariant_factors())
}

/// Rank of the kernel of `m: Z^cols -> Z^rows`.
pub fn kernel_rank(m: &IntMatrix) -> usize {
    m.cols - smith_normal_form(m).rank
}

/// A basis of `ker m` as the columns of a `cols x kernel_rank` matrix.
pub fn kernel_basis(m: &IntMatrix) -> IntMatrix {
    let snf = smith_normal_form(m);
    snf.v.col_block(snf.rank, m.cols)
}

pub fn rank(m: &IntMatrix) -> usize {
    smith_normal_form(m).rank
}
