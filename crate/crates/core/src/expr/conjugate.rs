//! Closed-form Fenchel conjugates and ε-subdifferential membership.
//!
//! Membership uses the conjugate form of the definition:
//! `v ∈ ∂_ε φ(x*)  ⇔  φ(x*) + φ*(v) − ⟨v, x*⟩ ≤ ε`.

use nalgebra::{DMatrix, DVector};

use super::{dot, Affine, AffineMap, Expr};
use crate::error::{Error, Result};
use crate::linalg::{full_rank_lstsq, PsdEigen};

/// Absolute slack in the Fenchel membership inequality.
pub const TOL_MEMBERSHIP: f64 = 1e-9;

/// Tolerance for "v lies in a subspace / on a point" tests inside conjugates.
const RANGE_TOL: f64 = 1e-9;

/// Piece count above which the max-of-affine conjugate is not enumerated.
const MAX_AFFINE_PIECES: usize = 8;

#[derive(Debug, Clone, PartialEq)]
pub enum ConjugateForm {
    /// `φ*(v) = offset` at `v = point`, `+∞` elsewhere (affine `φ`).
    Indicator { point: Vec<f64>, offset: f64 },
    /// `φ*(v) = ½(v−b)ᵀQ⁺(v−b) − c` on `b + range(Q)`, `+∞` elsewhere.
    Quadratic { eig: PsdEigen, b: DVector<f64>, c: f64 },
    /// `φ = ‖Ax+b‖` with `A` of full row rank: `φ*(v) = −⟨w, b⟩` when
    /// `v = Aᵀw` with `‖w‖ ≤ 1`, `+∞` otherwise.
    NormBall { map: AffineMap, a: DMatrix<f64>, gram_inv: DMatrix<f64> },
    /// `φ = maxᵢ(aᵢ·x + bᵢ)`: `φ*(v) = min{−Σλᵢbᵢ : λ ∈ Δ, Σλᵢaᵢ = v}`.
    MaxOfAffine { pieces: Vec<Affine> },
    /// `(wφ)*(v) = w φ*(v/w)`, `w > 0`.
    Scaled { weight: f64, inner: Box<ConjugateForm> },
    Unavailable,
}

impl ConjugateForm {
    pub fn is_available(&self) -> bool {
        match self {
            ConjugateForm::Unavailable => false,
            ConjugateForm::Scaled { inner, .. } => inner.is_available(),
            _ => true,
        }
    }

    /// `φ*(v)`, possibly `+∞`. Panics if called on `Unavailable`.
    pub fn eval(&self, v: &[f64]) -> f64 {
        match self {
            ConjugateForm::Indicator { point, offset } => {
                let scale = 1.0 + point.iter().fold(0.0_f64, |m, p| m.max(p.abs()));
                let off = v.iter().zip(point).fold(0.0_f64, |m, (a, b)| m.max((a - b).abs()));
                if off <= RANGE_TOL * scale {
                    *offset
                } else {
                    f64::INFINITY
                }
            }
            ConjugateForm::Quadratic { eig, b, c } => {
                let y = DVector::from_column_slice(v) - b;
                eig.half_pinv_form(&y, RANGE_TOL) - c
            }
            ConjugateForm::NormBall { map, a, gram_inv } => {
                let vv = DVector::from_column_slice(v);
                let w = gram_inv * (a * &vv);
                let back = a.transpose() * &w;
                if (back - &vv).norm() > RANGE_TOL * (1.0 + vv.norm()) || w.norm() > 1.0 + RANGE_TOL {
                    return f64::INFINITY;
                }
                -w.dot(&map.offset())
            }
            ConjugateForm::MaxOfAffine { pieces } => max_affine_conjugate(pieces, v),
            ConjugateForm::Scaled { weight, inner } => {
                let scaled: Vec<f64> = v.iter().map(|x| x / weight).collect();
                weight * inner.eval(&scaled)
            }
            ConjugateForm::Unavailable => panic!("conjugate is unavailable"),
        }
    }
}

pub(super) fn conjugate(e: &Expr, n: usize) -> ConjugateForm {
    if let Some(q) = e.as_quadratic(n) {
        let eig = PsdEigen::new(&q.q);
        let (lo, _) = super::cert::eigen_range(&q.q);
        let scale = eig.values.iter().fold(1.0_f64, |m, v| m.max(v.abs()));
        if lo < -crate::linalg::RANK_TOL * scale {
            return ConjugateForm::Unavailable;
        }
        if eig.is_zero() {
            return ConjugateForm::Indicator { point: q.b.as_slice().to_vec(), offset: -q.c };
        }
        return ConjugateForm::Quadratic { eig, b: q.b, c: q.c };
    }
    match e {
        Expr::Norm2OfAffineMap(m) => {
            let a = m.matrix(n);
            let gram = &a * a.transpose();
            match gram.clone().try_inverse() {
                Some(inv) if PsdEigen::new(&gram).is_definite() => {
                    ConjugateForm::NormBall { map: m.clone(), a, gram_inv: inv }
                }
                _ => ConjugateForm::Unavailable,
            }
        }
        Expr::MaxOf(es) if es.len() <= MAX_AFFINE_PIECES => {
            let pieces: Option<Vec<Affine>> = es
                .iter()
                .map(|p| {
                    let q = p.as_quadratic(n)?;
                    q.q.iter().all(|v| *v == 0.0).then(|| Affine::new(q.b.as_slice().to_vec(), q.c))
                })
                .collect();
            pieces.map_or(ConjugateForm::Unavailable, |pieces| ConjugateForm::MaxOfAffine { pieces })
        }
        Expr::NonnegCombination(ts) => {
            let active: Vec<&(f64, Expr)> = ts.iter().filter(|(w, _)| *w > 0.0).collect();
            match active.as_slice() {
                [] => ConjugateForm::Indicator { point: vec![0.0; n], offset: 0.0 },
                [(w, inner)] => {
                    let c = conjugate(inner, n);
                    if c.is_available() {
                        ConjugateForm::Scaled { weight: *w, inner: Box::new(c) }
                    } else {
                        ConjugateForm::Unavailable
                    }
                }
                _ => ConjugateForm::Unavailable,
            }
        }
        _ => ConjugateForm::Unavailable,
    }
}

/// LP over the simplex, solved by enumerating basic feasible solutions.
fn max_affine_conjugate(pieces: &[Affine], v: &[f64]) -> f64 {
    let n = v.len();
    let k = pieces.len();
    let rows = n + 1;
    let rhs = DVector::from_iterator(rows, v.iter().copied().chain(std::iter::once(1.0)));
    let mut best = f64::INFINITY;
    for mask in 1u32..(1u32 << k) {
        let support: Vec<usize> = (0..k).filter(|i| mask & (1 << i) != 0).collect();
        if support.len() > rows {
            continue;
        }
        let m = DMatrix::from_fn(rows, support.len(), |r, c| {
            let p = &pieces[support[c]];
            if r < n {
                p.a[r]
            } else {
                1.0
            }
        });
        let Some(lambda) = full_rank_lstsq(&m, &rhs) else { continue };
        if lambda.iter().any(|l| *l < -RANGE_TOL) {
            continue;
        }
        if (&m * &lambda - &rhs).norm() > RANGE_TOL * (1.0 + rhs.norm()) {
            continue;
        }
        let obj: f64 = support.iter().zip(lambda.iter()).map(|(i, l)| -l.max(0.0) * pieces[*i].b).sum();
        best = best.min(obj);
    }
    best
}

fn require_convex(f: &Expr) -> Result<()> {
    let cert = f.convexity();
    if cert.is_convex() {
        Ok(())
    } else {
        Err(Error::NotConvex(cert.trace.first().cloned().unwrap_or_default()))
    }
}

/// `φ(x*) + φ*(v) − ⟨v, x*⟩`: the smallest `ε` with `v ∈ ∂_ε φ(x*)`
/// (`+∞` when no such `ε` exists).
pub fn fenchel_gap(f: &Expr, x_star: &[f64], v: &[f64]) -> Result<f64> {
    f.check_dim(x_star.len())?;
    if v.len() != x_star.len() {
        return Err(Error::DimensionMismatch { expected: x_star.len(), got: v.len() });
    }
    require_convex(f)?;
    let conj = f.conjugate(x_star.len());
    if !conj.is_available() {
        return Err(Error::ConjugateUnavailable);
    }
    let cv = conj.eval(v);
    if cv.is_infinite() {
        return Ok(f64::INFINITY);
    }
    Ok((f.value(x_star) + cv - dot(v, x_star)).max(0.0))
}

/// `v ∈ ∂_eps f(x*)` through the conjugate, with [`TOL_MEMBERSHIP`] slack.
pub fn eps_subdiff_contains(f: &Expr, x_star: &[f64], v: &[f64], eps: f64) -> Result<bool> {
    if !(eps >= 0.0) {
        return Err(Error::InvalidArgument(format!("eps must be >= 0, got {eps}")));
    }
    Ok(fenchel_gap(f, x_star, v)? <= eps + TOL_MEMBERSHIP)
}

/// Membership in `∂_{μ·eps}(μf)(x*) = μ ∂_eps f(x*)`: tests `v/μ ∈ ∂_{eps/μ} f(x*)`.
pub fn scaled_eps_subdiff_contains(f: &Expr, x_star: &[f64], v: &[f64], eps: f64, mu: f64) -> Result<bool> {
    if !(mu > 0.0) {
        return Err(Error::NonPositiveMultiplier(mu));
    }
    let scaled: Vec<f64> = v.iter().map(|x| x / mu).collect();
    eps_subdiff_contains(f, x_star, &scaled, eps / mu)
}

/// Refutation-only fallback when no conjugate is available: the index of the
/// first sample `x` with `f(x) − f(x*) < ⟨v, x − x*⟩ − eps` by more than
/// [`TOL_MEMBERSHIP`]. `None` means "not refuted on these samples".
pub fn eps_subdiff_refute_sampled(
    f: &Expr,
    x_star: &[f64],
    v: &[f64],
    eps: f64,
    samples: &[Vec<f64>],
) -> Result<Option<usize>> {
    f.check_dim(x_star.len())?;
    let f0 = f.value(x_star);
    for (i, x) in samples.iter().enumerate() {
        if x.len() != x_star.len() {
            return Err(Error::DimensionMismatch { expected: x_star.len(), got: x.len() });
        }
        let lin: f64 = v.iter().zip(x.iter().zip(x_star)).map(|(vi, (a, b))| vi * (a - b)).sum();
        if f.value(x) - f0 < lin - eps - TOL_MEMBERSHIP {
            return Ok(Some(i));
        }
    }
    Ok(None)
}

/// A split `eps1 + eps2 = eps`, `v1 + v2 = v` with `vi ∈ ∂_{epsi} fi(x)`.
#[derive(Debug, Clone, PartialEq)]
pub struct SumSplit {
    pub eps1: f64,
    pub eps2: f64,
    pub v1: Vec<f64>,
    pub v2: Vec<f64>,
}

/// Finds a sum-rule decomposition of `v ∈ ∂_eps(f1 + f2)(x)`.
///
/// For quadratic-like terms the split of `v` minimizing the combined gap
/// `G1(v1) + G2(v − v1)` is available in closed form,
/// `v1 = ∇f1(x) + Q1(Q1+Q2)⁺(v − ∇f1(x) − ∇f2(x))`. Every `eps1` in
/// `[G1(v1), eps − G2(v2)]` is then admissible; the returned `eps1` is the
/// point of the `resolution·eps` grid nearest the middle of that range, or
/// the middle itself when no grid point falls inside.
///
/// Returns `Ok(None)` when no admissible split is found.
pub fn check_sum_rule_decomposition(
    f1: &Expr,
    f2: &Expr,
    x: &[f64],
    eps: f64,
    v: &[f64],
    resolution: f64,
) -> Result<Option<SumSplit>> {
    let n = x.len();
    if !(eps >= 0.0) || !(resolution > 0.0) {
        return Err(Error::InvalidArgument("eps must be >= 0 and resolution > 0".into()));
    }
    require_convex(f1)?;
    require_convex(f2)?;
    for f in [f1, f2] {
        if !f.conjugate(n).is_available() {
            return Err(Error::ConjugateUnavailable);
        }
    }
    let (Some(q1), Some(q2)) = (f1.as_quadratic(n), f2.as_quadratic(n)) else {
        return Err(Error::UnsupportedAtomForMembership("sum-rule split of non-quadratic terms".into()));
    };
    let sum = Expr::Quadratic(q1.plus(&q2));
    if fenchel_gap(&sum, x, v)? > eps + TOL_MEMBERSHIP {
        return Err(Error::Precondition("v is not in the eps-subdifferential of f1 + f2".into()));
    }
    let (g1, g2) = (q1.gradient(x), q2.gradient(x));
    let d = DVector::from_column_slice(v) - &g1 - &g2;
    let pinv = PsdEigen::new(&(&q1.q + &q2.q)).pinv();
    let u = &g1 + &q1.q * (pinv * d);
    let v1: Vec<f64> = u.as_slice().to_vec();
    let v2: Vec<f64> = v.iter().zip(&v1).map(|(a, b)| a - b).collect();
    let e1 = fenchel_gap(f1, x, &v1)?;
    let e2 = fenchel_gap(f2, x, &v2)?;
    if !(e1 + e2 <= eps + TOL_MEMBERSHIP) {
        return Ok(None);
    }
    let (lo, hi) = (e1.min(eps), (eps - e2).max(0.0));
    let mid = 0.5 * (lo + hi.max(lo));
    let step = resolution * eps;
    let mut eps1 = mid;
    if step > 0.0 {
        let snapped = (mid / step).round() * step;
        if snapped >= lo && snapped <= hi {
            eps1 = snapped;
        }
    }
    let eps1 = eps1.clamp(0.0, eps);
    let eps2 = eps - eps1;
    let ok = eps_subdiff_contains(f1, x, &v1, eps1)? && eps_subdiff_contains(f2, x, &v2, eps2)?;
    Ok(ok.then_some(SumSplit { eps1, eps2, v1, v2 }))
}
