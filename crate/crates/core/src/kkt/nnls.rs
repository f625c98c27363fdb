//! Exact nonnegative least squares for a handful of columns.

use nalgebra::{DMatrix, DVector};

/// Columns beyond this count fall back to projected gradient.
const MAX_ENUMERATED: usize = 12;

/// `min_{λ >= 0} ‖c + Σ λ_j a_j‖`; returns `(λ, norm)`.
pub fn nnls(c: &[f64], cols: &[Vec<f64>]) -> (Vec<f64>, f64) {
    let k = cols.len();
    let n = c.len();
    let cv = DVector::from_column_slice(c);
    let mut best = (vec![0.0; k], cv.norm());
    if k == 0 {
        return best;
    }
    let a = DMatrix::from_fn(n, k, |i, j| cols[j][i]);
    if k <= MAX_ENUMERATED {
        for mask in 1u32..(1u32 << k) {
            let support: Vec<usize> = (0..k).filter(|j| mask & (1 << j) != 0).collect();
            let sub = a.select_columns(&support);
            let svd = sub.clone().svd(true, true);
            let smax = svd.singular_values.max();
            let Ok(sol) = svd.solve(&(-&cv), 1e-12 * smax.max(1e-300)) else { continue };
            if sol.iter().any(|v| *v < 0.0 || !v.is_finite()) {
                continue;
            }
            let r = (&cv + &sub * &sol).norm();
            if r < best.1 {
                let mut lam = vec![0.0; k];
                for (s, v) in support.iter().zip(sol.iter()) {
                    lam[*s] = *v;
                }
                best = (lam, r);
            }
        }
        return best;
    }
    let lip = a.norm_squared().max(f64::MIN_POSITIVE);
    let mut lam = DVector::zeros(k);
    for _ in 0..20_000 {
        let resid = &cv + &a * &lam;
        lam = (&lam - a.transpose() * resid / lip).map(|v| v.max(0.0));
    }
    let r = (&cv + &a * &lam).norm();
    if r < best.1 {
        best = (lam.iter().copied().collect(), r);
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn simple_cases() {
        let (l, r) = nnls(&[3.0], &[vec![-1.0]]);
        assert!((l[0] - 3.0).abs() < 1e-12 && r < 1e-12);
        let (l, r) = nnls(&[3.0], &[vec![1.0]]);
        assert_eq!(l[0], 0.0);
        assert!((r - 3.0).abs() < 1e-12);
        let (_, r) = nnls(&[1.0, 1.0], &[vec![-1.0, 0.0], vec![0.0, -2.0]]);
        assert!(r < 1e-12);
    }

    #[test]
    fn matches_grid_oracle() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        for _ in 0..30 {
            let c: Vec<f64> = (0..2).map(|_| rng.gen_range(-2.0..2.0)).collect();
            let cols: Vec<Vec<f64>> = (0..2).map(|_| (0..2).map(|_| rng.gen_range(-2.0..2.0)).collect()).collect();
            let (_, r) = nnls(&c, &cols);
            let mut best = f64::INFINITY;
            for i in 0..=400 {
                for j in 0..=400 {
                    let (a, b) = (i as f64 * 0.02, j as f64 * 0.02);
                    let v = [c[0] + a * cols[0][0] + b * cols[1][0], c[1] + a * cols[0][1] + b * cols[1][1]];
                    best = best.min((v[0] * v[0] + v[1] * v[1]).sqrt());
                }
            }
            assert!(r <= best + 1e-12, "{r} > {best}");
        }
    }
}
