use nalgebra::{DMatrix, Schur, SymmetricEigen, SVD};
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::{EigenMultiset, TransportError};

pub type CMatrix = DMatrix<Complex64>;

/// Relative bound on `‖aa* - a*a‖` accepted as normal.
pub const NORMALITY_TOL: f64 = 1e-10;
/// Relative bound for the Hermitian / unitary flags.
pub const HERMITIAN_TOL: f64 = 1e-12;

/// Largest size at which the operator norm uses a full SVD.
const SVD_MAX_DIM: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SpectralKind {
    Hermitian,
    Unitary,
    Normal,
}

/// A square complex matrix certified normal at construction.
#[derive(Debug, Clone, PartialEq)]
pub struct NormalMatrix {
    entries: CMatrix,
    kind: SpectralKind,
    residual: f64,
}

impl NormalMatrix {
    pub fn new(entries: CMatrix) -> Result<Self, TransportError> {
        let (r, c) = entries.shape();
        if r != c {
            return Err(TransportError::NotSquare(r, c));
        }
        if r == 0 {
            return Err(TransportError::Empty);
        }
        let adj = entries.adjoint();
        let scale = operator_norm(&entries).max(1.0);
        let residual = operator_norm(&(&entries * &adj - &adj * &entries));
        if residual > NORMALITY_TOL * scale * scale {
            return Err(TransportError::NotNormal(residual));
        }
        let kind = if operator_norm(&(&entries - &adj)) <= HERMITIAN_TOL * scale {
            SpectralKind::Hermitian
        } else if operator_norm(&(&adj * &entries - CMatrix::identity(r, r))) <= HERMITIAN_TOL * 10.0 {
            SpectralKind::Unitary
        } else {
            SpectralKind::Normal
        };
        Ok(Self { entries, kind, residual })
    }

    pub fn from_real_diagonal(values: &[f64]) -> Result<Self, TransportError> {
        let d: Vec<Complex64> = values.iter().map(|&x| Complex64::new(x, 0.0)).collect();
        Self::from_diagonal(&d)
    }

    pub fn from_diagonal(values: &[Complex64]) -> Result<Self, TransportError> {
        Self::new(CMatrix::from_diagonal(&nalgebra::DVector::from_column_slice(values)))
    }

    pub fn n(&self) -> usize {
        self.entries.nrows()
    }

    pub fn entries(&self) -> &CMatrix {
        &self.entries
    }

    pub fn kind(&self) -> SpectralKind {
        self.kind
    }

    pub fn is_hermitian(&self) -> bool {
        self.kind == SpectralKind::Hermitian
    }

    pub fn is_unitary(&self) -> bool {
        self.kind == SpectralKind::Unitary
    }

    pub fn normality_residual(&self) -> f64 {
        self.residual
    }

    /// Eigenvalues and a unitary `q` whose columns are matching eigenvectors.
    pub fn eigen(&self) -> (Vec<Complex64>, CMatrix) {
        if self.is_hermitian() {
            let herm = (&self.entries + self.entries.adjoint()).scale(0.5);
            let eig = SymmetricEigen::new(herm);
            let vals = eig.eigenvalues.iter().map(|&x| Complex64::new(x, 0.0)).collect();
            (vals, eig.eigenvectors)
        } else {
            let (q, t) = Schur::new(self.entries.clone()).unpack();
            let vals = (0..self.n()).map(|i| t[(i, i)]).collect();
            (vals, q)
        }
    }

    pub fn spectrum(&self) -> EigenMultiset {
        EigenMultiset::new(self.eigen().0).expect("non-empty matrix")
    }

    /// Real eigenvalues in increasing order. Hermitian matrices only.
    pub fn sorted_real_spectrum(&self) -> Option<Vec<f64>> {
        if !self.is_hermitian() {
            return None;
        }
        let mut v: Vec<f64> = self.eigen().0.iter().map(|z| z.re).collect();
        v.sort_by(f64::total_cmp);
        Some(v)
    }
}

/// Largest singular value.
pub fn operator_norm(m: &CMatrix) -> f64 {
    if m.is_empty() {
        return 0.0;
    }
    if m.nrows().max(m.ncols()) <= SVD_MAX_DIM {
        return SVD::new(m.clone(), false, false).singular_values.max();
    }
    power_iteration_norm(m)
}

fn power_iteration_norm(m: &CMatrix) -> f64 {
    let gram = m.adjoint() * m;
    let mut x = nalgebra::DVector::from_element(gram.ncols(), Complex64::new(1.0, 0.0));
    x.unscale_mut(x.norm());
    let mut lambda = 0.0;
    for _ in 0..10_000 {
        let y = &gram * &x;
        let next = y.norm();
        if next == 0.0 {
            return 0.0;
        }
        x = y.unscale(next);
        if (next - lambda).abs() <= 1e-15 * next {
            lambda = next;
            break;
        }
        lambda = next;
    }
    lambda.sqrt()
}

fn complex_gaussian<R: Rng + ?Sized>(rng: &mut R) -> Complex64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

fn ginibre<R: Rng + ?Sized>(n: usize, rng: &mut R) -> CMatrix {
    CMatrix::from_fn(n, n, |_, _| complex_gaussian(rng))
}

/// GUE sample `(x + x*) / 2`.
pub fn random_hermitian<R: Rng + ?Sized>(n: usize, rng: &mut R) -> NormalMatrix {
    let x = ginibre(n, rng);
    let h = (&x + x.adjoint()).scale(0.5);
    NormalMatrix::new(h).expect("Hermitian by construction")
}

/// Haar-distributed unitary: QR of a Ginibre matrix with the phases of
/// `diag(r)` moved into `q`.
pub fn random_unitary<R: Rng + ?Sized>(n: usize, rng: &mut R) -> NormalMatrix {
    NormalMatrix::new(haar_unitary(n, rng)).expect("unitary by construction")
}

pub(crate) fn haar_unitary<R: Rng + ?Sized>(n: usize, rng: &mut R) -> CMatrix {
    let (mut q, r) = ginibre(n, rng).qr().unpack();
    for j in 0..n {
        let d = r[(j, j)];
        let phase = if d.norm() > 0.0 { d / d.norm() } else { Complex64::new(1.0, 0.0) };
        let mut col = q.column_mut(j);
        col *= phase;
    }
    q
}

/// `q diag(λ) q*` with Haar `q` and complex Gaussian eigenvalues.
pub fn random_normal<R: Rng + ?Sized>(n: usize, rng: &mut R) -> NormalMatrix {
    let q = haar_unitary(n, rng);
    let lambda: Vec<Complex64> = (0..n).map(|_| complex_gaussian(rng)).collect();
    let d = CMatrix::from_diagonal(&nalgebra::DVector::from_vec(lambda));
    NormalMatrix::new(&q * d * q.adjoint()).expect("normal by construction")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::stream;

    #[test]
    fn rejects_non_normal() {
        let m = CMatrix::from_row_slice(
            2,
            2,
            &[0.0, 1.0, 0.0, 0.0].map(|x| Complex64::new(x, 0.0)),
        );
        assert!(matches!(NormalMatrix::new(m), Err(TransportError::NotNormal(_))));
        let r = CMatrix::zeros(2, 3);
        assert_eq!(NormalMatrix::new(r), Err(TransportError::NotSquare(2, 3)));
    }

    #[test]
    fn kinds() {
        let mut rng = stream(3);
        assert_eq!(random_hermitian(4, &mut rng).kind(), SpectralKind::Hermitian);
        assert_eq!(random_unitary(4, &mut rng).kind(), SpectralKind::Unitary);
        assert_eq!(random_normal(4, &mut rng).kind(), SpectralKind::Normal);
    }

    #[test]
    fn eigen_reconstructs() {
        let mut rng = stream(5);
        for a in [random_hermitian(5, &mut rng), random_unitary(5, &mut rng), random_normal(5, &mut rng)] {
            let (vals, q) = a.eigen();
            let d = CMatrix::from_diagonal(&nalgebra::DVector::from_vec(vals));
            let err = operator_norm(&(&q * d * q.adjoint() - a.entries()));
            assert!(err < 1e-10, "{err}");
        }
    }

    #[test]
    fn norm_paths_agree() {
        let mut rng = stream(9);
        let m = ginibre(6, &mut rng);
        let a = operator_norm(&m);
        let b = power_iteration_norm(&m);
        assert!((a - b).abs() < 1e-6 * a);
    }
}
