//! Closed-form ε-subdifferentials of quadratic-like terms and the
//! alternating-projection test for `0 ∈ C_0 + … + C_k`.

use nalgebra::DVector;

use crate::error::{Error, Result};
use crate::expr::{Expr, Quadratic, TOL_MEMBERSHIP};
use crate::linalg::PsdEigen;

/// `{c + y : y ∈ range(M), ½ yᵀM⁺y <= r}` for PSD `M`. With `M = 0` or
/// `r = 0` this is the singleton `{c}`.
#[derive(Debug, Clone)]
pub struct Ellipsoid {
    pub center: DVector<f64>,
    pub eig: PsdEigen,
    pub radius: f64,
}

impl Ellipsoid {
    pub fn singleton(c: DVector<f64>) -> Self {
        let n = c.len();
        Ellipsoid { eig: PsdEigen::new(&nalgebra::DMatrix::zeros(n, n)), center: c, radius: 0.0 }
    }

    /// `∂_ε φ(x*)` for `φ = Σ w_i f_i` with every `f_i` quadratic-like.
    pub fn eps_subdifferential(terms: &[(f64, &Expr)], x_star: &[f64], eps: f64) -> Result<Ellipsoid> {
        let n = x_star.len();
        let mut q = Quadratic::zero(n);
        for (w, f) in terms {
            if *w == 0.0 {
                continue;
            }
            let fq = f.as_quadratic(n).ok_or_else(|| Error::UnsupportedAtomForMembership(describe(f)))?;
            q = q.plus(&fq.scaled(*w));
        }
        let (lo, hi) = crate::expr::eigen_range(&q.q);
        if lo < -1e-12 * hi.abs().max(1.0) {
            return Err(Error::NotConvex(format!("quadratic part has eigenvalue {lo}")));
        }
        Ok(Ellipsoid { center: q.gradient(x_star), eig: PsdEigen::new(&q.q), radius: eps.max(0.0) })
    }

    pub fn dim(&self) -> usize {
        self.center.len()
    }

    /// `½ (v − c)ᵀM⁺(v − c)`, `+∞` off the affine hull.
    pub fn gauge(&self, v: &DVector<f64>) -> f64 {
        let y = v - &self.center;
        if self.eig.is_zero() {
            return if y.norm() <= TOL_MEMBERSHIP * (1.0 + v.norm()) { 0.0 } else { f64::INFINITY };
        }
        self.eig.half_pinv_form(&y, 1e-9)
    }

    pub fn contains(&self, v: &DVector<f64>) -> bool {
        self.gauge(v) <= self.radius + TOL_MEMBERSHIP
    }

    /// Euclidean projection.
    pub fn project(&self, z: &DVector<f64>) -> DVector<f64> {
        let w = self.eig.coords(&(z - &self.center));
        let q = &self.eig.values;
        let mut y = DVector::zeros(w.len());
        if self.radius > 0.0 {
            let level = |t: f64| -> f64 {
                (0..w.len()).filter(|&i| q[i] > 0.0).map(|i| 0.5 * q[i] * w[i] * w[i] / ((q[i] + t) * (q[i] + t))).sum()
            };
            let shrink = |t: f64| DVector::from_iterator(w.len(), (0..w.len()).map(|i| if q[i] > 0.0 { w[i] * q[i] / (q[i] + t) } else { 0.0 }));
            if level(0.0) <= self.radius {
                y = shrink(0.0);
            } else {
                let bound: f64 = (0..w.len()).filter(|&i| q[i] > 0.0).map(|i| 0.5 * q[i] * w[i] * w[i]).sum();
                let (mut lo, mut hi) = (0.0, (bound / self.radius).sqrt().max(f64::MIN_POSITIVE));
                while level(hi) > self.radius {
                    hi *= 2.0;
                }
                for _ in 0..200 {
                    let mid = 0.5 * (lo + hi);
                    if mid <= lo || mid >= hi {
                        break;
                    }
                    if level(mid) > self.radius {
                        lo = mid;
                    } else {
                        hi = mid;
                    }
                }
                y = shrink(hi);
            }
        }
        &self.center + &self.eig.vectors * y
    }
}

fn describe(f: &Expr) -> String {
    match f {
        Expr::Norm2OfAffineMap(_) => "a norm term".into(),
        Expr::MaxOf(_) => "a max term".into(),
        Expr::Product(..) | Expr::Power(..) => "a product or power term".into(),
        _ => "a non-quadratic term".into(),
    }
}

/// Outcome of the set-sum test.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InclusionVerdict {
    Holds,
    Fails,
    Inconclusive,
}

#[derive(Debug, Clone)]
pub struct Inclusion {
    pub verdict: InclusionVerdict,
    /// `‖Σ v_i‖` at the final iterate, with every `v_i ∈ C_i`.
    pub residual: f64,
    pub vectors: Vec<DVector<f64>>,
    pub iterations: usize,
}

pub const TOL_KKT: f64 = 1e-7;
pub const MAX_PROJECTION_ITERS: usize = 10_000;

/// Alternating projection between `C_0 × … × C_k` and `{Σ v_i = 0}`.
pub fn zero_in_sum(sets: &[Ellipsoid], warm: Option<&[DVector<f64>]>) -> Inclusion {
    let k = sets.len();
    let n = sets[0].dim();
    let mut v: Vec<DVector<f64>> = match warm {
        Some(w) if w.len() == k => sets.iter().zip(w).map(|(s, x)| s.project(x)).collect(),
        _ => sets.iter().map(|s| s.center.clone()).collect(),
    };
    let sum = |v: &[DVector<f64>]| v.iter().fold(DVector::zeros(n), |a, b| a + b);
    let mut residual = sum(&v).norm();
    for it in 0..MAX_PROJECTION_ITERS {
        if residual <= TOL_KKT {
            return Inclusion { verdict: InclusionVerdict::Holds, residual, vectors: v, iterations: it };
        }
        let mean = sum(&v) / k as f64;
        let next: Vec<DVector<f64>> = sets.iter().zip(&v).map(|(s, x)| s.project(&(x - &mean))).collect();
        let moved: f64 = next.iter().zip(&v).map(|(a, b)| (a - b).norm_squared()).sum::<f64>().sqrt();
        let scale: f64 = 1.0 + v.iter().map(|x| x.norm_squared()).sum::<f64>().sqrt();
        v = next;
        residual = sum(&v).norm();
        if residual > TOL_KKT && moved <= 1e-14 * scale {
            return Inclusion { verdict: InclusionVerdict::Fails, residual, vectors: v, iterations: it + 1 };
        }
    }
    let verdict = if residual <= TOL_KKT { InclusionVerdict::Holds } else { InclusionVerdict::Inconclusive };
    Inclusion { verdict, residual, vectors: v, iterations: MAX_PROJECTION_ITERS }
}
