//! Complex linear algebra primitives: Hermitian matrices with covariance
//! semantics, positive-definite solves, and square-root factors.

use nalgebra::{Cholesky, DMatrix, DVector, Dyn, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;
pub type CVector = DVector<C64>;
pub type CMatrix = DMatrix<C64>;

/// Relative eigenvalue threshold below which a covariance matrix is rejected
/// as non-PSD: all eigenvalues must satisfy `lambda >= -PSD_EPS * lambda_max`.
pub const PSD_EPS: f64 = 1e-10;

/// Relative floor applied to eigenvalues when forming a square-root factor.
/// Guards factorization at condition numbers around 1e9 (60 dB CNR).
pub const SQRT_FACTOR_FLOOR: f64 = 1e-12;

/// A square complex matrix with exact conjugate symmetry.
///
/// The invariant `m[(i, j)] == conj(m[(j, i)])` holds bit-exactly: all
/// constructors either mirror the lower triangle or average `(A + A^H) / 2`.
#[derive(Debug, Clone, PartialEq)]
pub struct HermitianMatrix {
    m: CMatrix,
}

impl HermitianMatrix {
    /// Builds from an explicit matrix, rejecting inputs whose asymmetry
    /// exceeds `tol` relative to the largest entry magnitude.
    pub fn try_from_matrix(m: CMatrix, tol: f64) -> Result<Self> {
        if m.nrows() != m.ncols() {
            return Err(Error::DimensionMismatch {
                expected: m.nrows(),
                got: m.ncols(),
            });
        }
        let scale = m.iter().map(|z| z.norm()).fold(0.0f64, f64::max).max(1.0);
        let mut max_asym = 0.0f64;
        for i in 0..m.nrows() {
            for j in 0..i {
                max_asym = max_asym.max((m[(i, j)] - m[(j, i)].conj()).norm());
            }
            max_asym = max_asym.max(m[(i, i)].im.abs());
        }
        if max_asym > tol * scale {
            return Err(Error::NotHermitian {
                max_asymmetry: max_asym,
                tolerance: tol * scale,
            });
        }
        Ok(Self::symmetrized(m))
    }

    /// Forces conjugate symmetry by averaging `(A + A^H) / 2`. Intended for
    /// products like `F * S * F^H` that are Hermitian up to rounding.
    pub fn symmetrized(m: CMatrix) -> Self {
        assert_eq!(m.nrows(), m.ncols(), "Hermitian matrix must be square");
        let n = m.nrows();
        let mut out = CMatrix::zeros(n, n);
        for i in 0..n {
            out[(i, i)] = C64::new(m[(i, i)].re, 0.0);
            for j in 0..i {
                let v = (m[(i, j)] + m[(j, i)].conj()) * C64::new(0.5, 0.0);
                out[(i, j)] = v;
                out[(j, i)] = v.conj();
            }
        }
        Self { m: out }
    }

    /// Builds order `n` from a generator evaluated on the lower triangle
    /// (`i >= j`); the upper triangle is the conjugate mirror.
    pub fn from_lower_fn(n: usize, mut f: impl FnMut(usize, usize) -> C64) -> Self {
        let mut m = CMatrix::zeros(n, n);
        for i in 0..n {
            for j in 0..=i {
                let v = if i == j {
                    C64::new(f(i, j).re, 0.0)
                } else {
                    f(i, j)
                };
                m[(i, j)] = v;
                m[(j, i)] = v.conj();
            }
        }
        Self { m }
    }

    pub fn identity(n: usize) -> Self {
        Self {
            m: CMatrix::identity(n, n),
        }
    }

    pub fn order(&self) -> usize {
        self.m.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.m
    }

    pub fn into_matrix(self) -> CMatrix {
        self.m
    }

    pub fn entry(&self, i: usize, j: usize) -> C64 {
        self.m[(i, j)]
    }

    pub fn trace_real(&self) -> f64 {
        (0..self.order()).map(|i| self.m[(i, i)].re).sum()
    }

    /// Scales every entry by a real factor.
    pub fn scaled(&self, s: f64) -> Self {
        Self {
            m: self.m.map(|z| z * s),
        }
    }

    /// Real eigenvalues in ascending order.
    pub fn eigenvalues(&self) -> Vec<f64> {
        let eig = SymmetricEigen::new(self.m.clone());
        let mut vals: Vec<f64> = eig.eigenvalues.iter().copied().collect();
        vals.sort_by(|a, b| a.total_cmp(b));
        vals
    }

    /// Checks the covariance PSD invariant: every eigenvalue at least
    /// `-eps * lambda_max`.
    pub fn check_psd(&self, eps: f64) -> Result<()> {
        let vals = self.eigenvalues();
        let max = vals.last().copied().unwrap_or(0.0).max(0.0);
        let min = vals.first().copied().unwrap_or(0.0);
        if min < -eps * max {
            return Err(Error::NotPositiveSemiDefinite {
                min_eigenvalue: min,
                threshold: eps * max,
            });
        }
        Ok(())
    }

    /// Square-root factor `L` with `L L^H ~= A`, via eigendecomposition with
    /// eigenvalues floored at `floor_ratio * lambda_max`.
    pub fn sqrt_factor(&self, floor_ratio: f64) -> Result<CMatrix> {
        self.check_psd(PSD_EPS)?;
        let eig = SymmetricEigen::new(self.m.clone());
        let lambda_max = eig.eigenvalues.iter().copied().fold(0.0f64, f64::max);
        let floor = floor_ratio * lambda_max;
        let n = self.order();
        let mut l = eig.eigenvectors;
        for j in 0..n {
            let s = eig.eigenvalues[j].max(floor).max(0.0).sqrt();
            for i in 0..n {
                l[(i, j)] *= s;
            }
        }
        Ok(l)
    }

    /// Principal submatrix at the given 0-based indices.
    pub fn principal_submatrix(&self, idx: &[usize]) -> Self {
        let k = idx.len();
        let mut m = CMatrix::zeros(k, k);
        for (a, &i) in idx.iter().enumerate() {
            for (b, &j) in idx.iter().enumerate() {
                m[(a, b)] = self.m[(i, j)];
            }
        }
        Self { m }
    }

    /// Positive-definite solve operator backed by a Cholesky factor.
    /// The explicit inverse is never materialized.
    pub fn hpd_solve(&self) -> Result<HpdSolve> {
        HpdSolve::new(self)
    }
}

/// Solve operator for a Hermitian positive-definite matrix.
///
/// Factored once, reused for every quadratic form sharing the same matrix.
#[derive(Debug, Clone)]
pub struct HpdSolve {
    chol: Cholesky<C64, Dyn>,
    order: usize,
}

impl HpdSolve {
    pub fn new(a: &HermitianMatrix) -> Result<Self> {
        let order = a.order();
        let chol = Cholesky::new(a.matrix().clone()).ok_or(Error::SingularMatrix)?;
        Ok(Self { chol, order })
    }

    pub fn order(&self) -> usize {
        self.order
    }

    /// `A^{-1} v`.
    pub fn solve(&self, v: &CVector) -> CVector {
        self.chol.solve(v)
    }

    /// Sesquilinear form `a^H A^{-1} b`.
    pub fn quad_form(&self, a: &CVector, b: &CVector) -> C64 {
        a.dotc(&self.solve(b))
    }

    /// `a^H A^{-1} a`, which is real and nonnegative for positive-definite A.
    pub fn quad_form_self(&self, a: &CVector) -> f64 {
        self.quad_form(a, a).re
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn symmetrized_is_exactly_hermitian() {
        let m = CMatrix::from_fn(5, 5, |i, j| c(i as f64 + 0.3, j as f64 - 1.7));
        let h = HermitianMatrix::symmetrized(m);
        for i in 0..5 {
            assert_eq!(h.entry(i, i).im, 0.0);
            for j in 0..5 {
                assert_eq!(h.entry(i, j), h.entry(j, i).conj());
            }
        }
    }

    #[test]
    fn try_from_matrix_rejects_asymmetric() {
        let mut m = CMatrix::identity(3, 3);
        m[(0, 1)] = c(1.0, 0.0);
        let err = HermitianMatrix::try_from_matrix(m, 1e-12).unwrap_err();
        assert!(matches!(err, Error::NotHermitian { .. }));
    }

    #[test]
    fn eigenvalues_of_diagonal() {
        let h = HermitianMatrix::from_lower_fn(3, |i, j| {
            if i == j {
                c((i + 1) as f64, 0.0)
            } else {
                c(0.0, 0.0)
            }
        });
        let vals = h.eigenvalues();
        assert_relative_eq!(vals[0], 1.0, epsilon = 1e-12);
        assert_relative_eq!(vals[2], 3.0, epsilon = 1e-12);
    }

    #[test]
    fn sqrt_factor_reconstructs() {
        // random-ish HPD matrix: A = B B^H + I
        let b = CMatrix::from_fn(4, 4, |i, j| c((i * j) as f64 * 0.17 - 0.4, (i + j) as f64 * 0.11));
        let a = HermitianMatrix::symmetrized(&b * b.adjoint() + CMatrix::identity(4, 4));
        let l = a.sqrt_factor(SQRT_FACTOR_FLOOR).unwrap();
        let rec = &l * l.adjoint();
        for i in 0..4 {
            for j in 0..4 {
                assert_relative_eq!(rec[(i, j)].re, a.entry(i, j).re, epsilon = 1e-9);
                assert_relative_eq!(rec[(i, j)].im, a.entry(i, j).im, epsilon = 1e-9);
            }
        }
    }

    #[test]
    fn hpd_solve_matches_direct_inverse() {
        let b = CMatrix::from_fn(4, 4, |i, j| c((i as f64 - j as f64) * 0.3, (i + 2 * j) as f64 * 0.05));
        let a = HermitianMatrix::symmetrized(&b * b.adjoint() + CMatrix::identity(4, 4) * c(2.0, 0.0));
        let solve = a.hpd_solve().unwrap();
        let v = CVector::from_fn(4, |i, _| c(i as f64 + 0.5, -(i as f64)));
        let x = solve.solve(&v);
        let back = a.matrix() * &x;
        for i in 0..4 {
            assert_relative_eq!(back[i].re, v[i].re, epsilon = 1e-10);
            assert_relative_eq!(back[i].im, v[i].im, epsilon = 1e-10);
        }
        // quadratic form is real for the self case
        assert!(solve.quad_form_self(&v) > 0.0);
    }

    #[test]
    fn principal_submatrix_picks_entries() {
        let h = HermitianMatrix::from_lower_fn(4, |i, j| c((10 * i + j) as f64, if i != j { 1.0 } else { 0.0 }));
        let sub = h.principal_submatrix(&[1, 3]);
        assert_eq!(sub.order(), 2);
        assert_eq!(sub.entry(0, 0), h.entry(1, 1));
        assert_eq!(sub.entry(1, 0), h.entry(3, 1));
    }

    #[test]
    fn check_psd_flags_indefinite() {
        let h = HermitianMatrix::from_lower_fn(2, |i, j| {
            if i == j {
                c(if i == 0 { 1.0 } else { -1.0 }, 0.0)
            } else {
                c(0.0, 0.0)
            }
        });
        assert!(h.check_psd(PSD_EPS).is_err());
    }
}
