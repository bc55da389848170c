//! Thin dense helpers over `nalgebra` for real matrices acting on complex vectors.

use nalgebra::{DMatrix, Dyn, LU};
use num_complex::Complex64;

/// LU factorization of a real square matrix, applied to complex right-hand sides
/// by solving real and imaginary parts together.
#[derive(Debug, Clone)]
pub struct RealLu {
    lu: LU<f64, Dyn, Dyn>,
    dim: usize,
}

impl RealLu {
    /// Returns `None` when the matrix is singular to working precision.
    pub fn new(m: &DMatrix<f64>) -> Option<Self> {
        let dim = m.nrows();
        let scale = m.amax();
        if scale == 0.0 || !scale.is_finite() {
            return None;
        }
        let lu = m.clone().lu();
        let u = lu.u();
        let min_pivot = (0..dim).map(|i| u[(i, i)].abs()).fold(f64::INFINITY, f64::min);
        if !(min_pivot > scale * 1e-14 * dim as f64) {
            return None;
        }
        Some(Self { lu, dim })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn solve_complex(&self, rhs: &[Complex64]) -> Vec<Complex64> {
        let mut b = DMatrix::<f64>::zeros(self.dim, 2);
        for (i, v) in rhs.iter().enumerate() {
            b[(i, 0)] = v.re;
            b[(i, 1)] = v.im;
        }
        self.lu.solve_mut(&mut b);
        (0..self.dim).map(|i| Complex64::new(b[(i, 0)], b[(i, 1)])).collect()
    }

    pub fn solve_matrix(&self, rhs: &DMatrix<f64>) -> DMatrix<f64> {
        let mut b = rhs.clone();
        self.lu.solve_mut(&mut b);
        b
    }
}

/// `y -= m · x` for a real matrix and complex vectors.
#[inline]
pub(crate) fn sub_mat_vec(m: &DMatrix<f64>, x: &[Complex64], y: &mut [Complex64]) {
    for (i, yi) in y.iter_mut().enumerate() {
        let mut acc = Complex64::new(0.0, 0.0);
        for (j, xj) in x.iter().enumerate() {
            acc += *xj * m[(i, j)];
        }
        *yi -= acc;
    }
}

/// `y += m · x`.
#[inline]
pub(crate) fn add_mat_vec(m: &DMatrix<f64>, x: &[Complex64], y: &mut [Complex64]) {
    for (i, yi) in y.iter_mut().enumerate() {
        let mut acc = Complex64::new(0.0, 0.0);
        for (j, xj) in x.iter().enumerate() {
            acc += *xj * m[(i, j)];
        }
        *yi += acc;
    }
}
