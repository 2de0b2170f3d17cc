//! Dense complex arrays of rank 3 and 4 over an `n`-dimensional index set,
//! plus the small amount of Hermitian linear algebra the curvature code needs.

use std::ops::{Index, IndexMut};

use nalgebra::{Cholesky, DMatrix, Dyn};
use num_complex::Complex64;

use crate::error::GeometryError;

pub type CMatrix = DMatrix<Complex64>;

pub(crate) const ZERO: Complex64 = Complex64::new(0.0, 0.0);

#[derive(Clone, Debug, PartialEq)]
pub struct Tensor3 {
    n: usize,
    data: Vec<Complex64>,
}

impl Tensor3 {
    pub fn zeros(n: usize) -> Self {
        Self { n, data: vec![ZERO; n * n * n] }
    }

    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize, usize) -> Complex64) -> Self {
        let mut t = Self::zeros(n);
        for a in 0..n {
            for b in 0..n {
                for c in 0..n {
                    t[[a, b, c]] = f(a, b, c);
                }
            }
        }
        t
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    #[inline]
    fn offset(&self, [a, b, c]: [usize; 3]) -> usize {
        (a * self.n + b) * self.n + c
    }
}

impl Index<[usize; 3]> for Tensor3 {
    type Output = Complex64;
    #[inline]
    fn index(&self, idx: [usize; 3]) -> &Complex64 {
        &self.data[self.offset(idx)]
    }
}

impl IndexMut<[usize; 3]> for Tensor3 {
    #[inline]
    fn index_mut(&mut self, idx: [usize; 3]) -> &mut Complex64 {
        let o = self.offset(idx);
        &mut self.data[o]
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Tensor4 {
    n: usize,
    data: Vec<Complex64>,
}

impl Tensor4 {
    pub fn zeros(n: usize) -> Self {
        Self { n, data: vec![ZERO; n * n * n * n] }
    }

    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize, usize, usize) -> Complex64) -> Self {
        let mut t = Self::zeros(n);
        for a in 0..n {
            for b in 0..n {
                for c in 0..n {
                    for d in 0..n {
                        t[[a, b, c, d]] = f(a, b, c, d);
                    }
                }
            }
        }
        t
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn max_abs_diff(&self, other: &Tensor4) -> f64 {
        assert_eq!(self.n, other.n, "tensor dimensions differ");
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    pub fn scale(&self, s: Complex64) -> Tensor4 {
        Tensor4 { n: self.n, data: self.data.iter().map(|z| z * s).collect() }
    }

    /// Transforms every slot by the frame `e` (columns are the new basis
    /// vectors): holomorphic slots (0, 2) pick up `e`, antiholomorphic slots
    /// (1, 3) pick up `conj(e)`.
    pub fn change_frame(&self, e: &CMatrix) -> Tensor4 {
        let n = self.n;
        let mut cur = self.clone();
        for slot in 0..4 {
            let conj = slot % 2 == 1;
            let mut next = Tensor4::zeros(n);
            for a in 0..n {
                for b in 0..n {
                    for c in 0..n {
                        for d in 0..n {
                            let mut idx = [a, b, c, d];
                            let target = idx[slot];
                            let mut acc = ZERO;
                            for m in 0..n {
                                idx[slot] = m;
                                let coeff = if conj { e[(m, target)].conj() } else { e[(m, target)] };
                                acc += coeff * cur[idx];
                            }
                            next[[a, b, c, d]] = acc;
                        }
                    }
                }
            }
            cur = next;
        }
        cur
    }

    #[inline]
    fn offset(&self, [a, b, c, d]: [usize; 4]) -> usize {
        ((a * self.n + b) * self.n + c) * self.n + d
    }
}

impl Index<[usize; 4]> for Tensor4 {
    type Output = Complex64;
    #[inline]
    fn index(&self, idx: [usize; 4]) -> &Complex64 {
        &self.data[self.offset(idx)]
    }
}

impl IndexMut<[usize; 4]> for Tensor4 {
    #[inline]
    fn index_mut(&mut self, idx: [usize; 4]) -> &mut Complex64 {
        let o = self.offset(idx);
        &mut self.data[o]
    }
}

pub fn max_abs(m: &CMatrix) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// `max |m_ij - conj(m_ji)|`.
pub fn hermitian_residual(m: &CMatrix) -> f64 {
    max_abs(&(m - m.adjoint()))
}

/// Frame `E` whose columns `e_a = Σ_i E[i][a] ∂_i` are unitary for the
/// metric `g[i][j] = g_{i j̄}`, i.e. `Σ E[i][a] conj(E[j][b]) g_{i j̄} = δ_ab`.
///
/// Built from the Cholesky factor `g = L Lᴴ` as `E = (Lᵀ)⁻¹`, so the frame is
/// upper triangular and fully determined by `g`.
pub fn orthonormal_frame(g: &CMatrix) -> Result<CMatrix, GeometryError> {
    let n = g.nrows();
    let chol = cholesky(g)?;
    let lt = chol.l().transpose();
    lt.solve_upper_triangular(&CMatrix::identity(n, n))
        .ok_or(GeometryError::NotPositiveDefinite)
}

/// Cholesky factorisation of a Hermitian matrix, rejecting anything that is
/// not positive definite. nalgebra's complex factorisation happily takes
/// square roots of negative pivots, so the pivots are checked here.
pub fn cholesky(g: &CMatrix) -> Result<Cholesky<Complex64, Dyn>, GeometryError> {
    let chol = Cholesky::new(g.clone()).ok_or(GeometryError::NotPositiveDefinite)?;
    let l = chol.l_dirty();
    let scale = g.diagonal().iter().map(|z| z.norm()).fold(0.0, f64::max).max(f64::MIN_POSITIVE);
    for k in 0..g.nrows() {
        let d = l[(k, k)];
        if !(d.re > 0.0) || d.im.abs() > 1e-12 * d.re || d.re * d.re < 1e-14 * scale {
            return Err(GeometryError::NotPositiveDefinite);
        }
    }
    Ok(chol)
}

/// Eigenvalues of a Hermitian matrix in ascending order.
pub fn hermitian_eigenvalues(g: &CMatrix) -> Vec<f64> {
    let eig = nalgebra::linalg::SymmetricEigen::new(g.clone());
    let mut values: Vec<f64> = eig.eigenvalues.iter().copied().collect();
    values.sort_by(f64::total_cmp);
    values
}

/// `g(X, Y̅) = Σ X^i conj(Y^j) g_{i j̄}`.
pub fn metric_pairing(g: &CMatrix, x: &[Complex64], y: &[Complex64]) -> Complex64 {
    let n = g.nrows();
    let mut acc = ZERO;
    for i in 0..n {
        for j in 0..n {
            acc += x[i] * y[j].conj() * g[(i, j)];
        }
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn frame_gram(g: &CMatrix, e: &CMatrix) -> CMatrix {
        let n = g.nrows();
        CMatrix::from_fn(n, n, |a, b| {
            let ea: Vec<_> = (0..n).map(|i| e[(i, a)]).collect();
            let eb: Vec<_> = (0..n).map(|i| e[(i, b)]).collect();
            metric_pairing(g, &ea, &eb)
        })
    }

    #[test]
    fn identity_frame() {
        let g = CMatrix::identity(3, 3);
        let e = orthonormal_frame(&g).unwrap();
        assert!(max_abs(&(e - CMatrix::identity(3, 3))) < 1e-15);
    }

    #[test]
    fn diagonal_frame() {
        let g = CMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![c(4.0, 0.0), c(1.0, 0.0)]));
        let e = orthonormal_frame(&g).unwrap();
        let expected = CMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![c(0.5, 0.0), c(1.0, 0.0)]));
        assert!(max_abs(&(e - expected)) < 1e-15);
    }

    #[test]
    fn scaled_identity_frame() {
        // g = I/4 at |z|^2 = 4 for the Hopf metric
        let g = CMatrix::identity(2, 2) * c(0.25, 0.0);
        let e = orthonormal_frame(&g).unwrap();
        assert!(max_abs(&(e - CMatrix::identity(2, 2) * c(2.0, 0.0))) < 1e-15);
    }

    #[test]
    fn complex_hermitian_frame_is_unitary() {
        let g = CMatrix::from_row_slice(
            3,
            3,
            &[
                c(2.0, 0.0), c(0.3, 0.4), c(-0.1, 0.2),
                c(0.3, -0.4), c(1.5, 0.0), c(0.05, -0.3),
                c(-0.1, -0.2), c(0.05, 0.3), c(1.2, 0.0),
            ],
        );
        let e = orthonormal_frame(&g).unwrap();
        let gram = frame_gram(&g, &e);
        assert!(max_abs(&(gram - CMatrix::identity(3, 3))) < 1e-12);
        // upper triangular
        for i in 0..3 {
            for j in 0..i {
                assert_eq!(e[(i, j)], ZERO);
            }
        }
    }

    #[test]
    fn rejects_indefinite() {
        let g = CMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![c(1.0, 0.0), c(-1.0, 0.0)]));
        assert_eq!(orthonormal_frame(&g), Err(GeometryError::NotPositiveDefinite));
    }

    #[test]
    fn eigenvalues_of_hermitian() {
        let g = CMatrix::from_row_slice(2, 2, &[c(2.0, 0.0), c(0.0, 1.0), c(0.0, -1.0), c(2.0, 0.0)]);
        let ev = hermitian_eigenvalues(&g);
        assert!((ev[0] - 1.0).abs() < 1e-12 && (ev[1] - 3.0).abs() < 1e-12);
    }
}
