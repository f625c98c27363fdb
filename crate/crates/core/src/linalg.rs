//! Small dense helpers on top of nalgebra.

use nalgebra::{DMatrix, DVector, SymmetricEigen};

/// Eigenvalues below this fraction of the spectral radius count as zero.
pub const RANK_TOL: f64 = 1e-12;

/// Eigendecomposition of a symmetric positive semidefinite matrix with tiny
/// eigenvalues flushed to zero.
#[derive(Debug, Clone, PartialEq)]
pub struct PsdEigen {
    pub values: DVector<f64>,
    pub vectors: DMatrix<f64>,
}

impl PsdEigen {
    pub fn new(q: &DMatrix<f64>) -> Self {
        let n = q.nrows();
        if n == 0 {
            return PsdEigen { values: DVector::zeros(0), vectors: DMatrix::zeros(0, 0) };
        }
        let eig = SymmetricEigen::new(q.clone());
        let scale = eig.eigenvalues.iter().fold(0.0_f64, |m, v| m.max(v.abs())).max(f64::MIN_POSITIVE);
        let values = eig.eigenvalues.map(|v| if v <= RANK_TOL * scale.max(1.0) { 0.0 } else { v });
        PsdEigen { values, vectors: eig.eigenvectors }
    }

    pub fn dim(&self) -> usize {
        self.values.len()
    }

    pub fn is_zero(&self) -> bool {
        self.values.iter().all(|v| *v == 0.0)
    }

    pub fn is_definite(&self) -> bool {
        self.values.iter().all(|v| *v > 0.0)
    }

    /// Coordinates of `y` in the eigenbasis.
    pub fn coords(&self, y: &DVector<f64>) -> DVector<f64> {
        self.vectors.transpose() * y
    }

    /// Moore-Penrose pseudo-inverse.
    pub fn pinv(&self) -> DMatrix<f64> {
        let inv = self.values.map(|v| if v > 0.0 { 1.0 / v } else { 0.0 });
        &self.vectors * DMatrix::from_diagonal(&inv) * self.vectors.transpose()
    }

    /// `½ yᵀQ⁺y`, or `+∞` when `y` leaves the range of `Q` by more than
    /// `range_tol` (relative to `‖y‖`).
    pub fn half_pinv_form(&self, y: &DVector<f64>, range_tol: f64) -> f64 {
        let z = self.coords(y);
        let scale = 1.0 + y.norm();
        let mut acc = 0.0;
        for (zi, qi) in z.iter().zip(self.values.iter()) {
            if *qi > 0.0 {
                acc += zi * zi / qi;
            } else if zi.abs() > range_tol * scale {
                return f64::INFINITY;
            }
        }
        0.5 * acc
    }
}

/// Least-squares solution of `a x = b` with rank-revealing SVD; `None` if
/// the columns of `a` are linearly dependent.
pub fn full_rank_lstsq(a: &DMatrix<f64>, b: &DVector<f64>) -> Option<DVector<f64>> {
    let svd = a.clone().svd(true, true);
    let smax = svd.singular_values.iter().cloned().fold(0.0, f64::max);
    let smin = svd.singular_values.iter().cloned().fold(f64::INFINITY, f64::min);
    if a.ncols() > a.nrows() || smin <= 1e-10 * smax.max(1e-300) {
        return None;
    }
    svd.solve(b, 0.0).ok()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pinv_of_singular_psd() {
        let q = DMatrix::from_row_slice(2, 2, &[2.0, 2.0, 2.0, 2.0]);
        let e = PsdEigen::new(&q);
        assert!(!e.is_definite());
        let p = e.pinv();
        let back = &q * &p * &q;
        assert!((back - &q).norm() < 1e-12);
        let inside = DVector::from_vec(vec![1.0, 1.0]);
        assert!((e.half_pinv_form(&inside, 1e-9) - 0.25).abs() < 1e-12);
        let outside = DVector::from_vec(vec![1.0, -1.0]);
        assert!(e.half_pinv_form(&outside, 1e-9).is_infinite());
    }

    #[test]
    fn lstsq_rejects_dependent_columns() {
        let a = DMatrix::from_row_slice(3, 2, &[1.0, 2.0, 1.0, 2.0, 1.0, 2.0]);
        assert!(full_rank_lstsq(&a, &DVector::from_vec(vec![1.0, 1.0, 1.0])).is_none());
        let a = DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, 2.0]);
        let x = full_rank_lstsq(&a, &DVector::from_vec(vec![1.0, 1.0])).unwrap();
        assert!((x[1] - 0.5).abs() < 1e-15);
    }
}
