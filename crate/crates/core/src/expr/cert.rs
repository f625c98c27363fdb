//! Convexity certificates from a fixed set of composition rules.

use nalgebra::{DMatrix, SymmetricEigen};

use super::Expr;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CertStatus {
    CertifiedConvex,
    CertifiedStrictlyConvex,
    Unknown,
}

/// Certificate status plus the list of rules that fired, outermost first.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvexCert {
    pub status: CertStatus,
    pub trace: Vec<String>,
}

impl ConvexCert {
    pub fn is_convex(&self) -> bool {
        matches!(self.status, CertStatus::CertifiedConvex | CertStatus::CertifiedStrictlyConvex)
    }

    pub fn is_strictly_convex(&self) -> bool {
        self.status == CertStatus::CertifiedStrictlyConvex
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Curvature {
    Affine,
    Convex { strict: bool },
    Concave,
    Unknown,
}

pub(super) fn certify(e: &Expr) -> ConvexCert {
    let mut trace = Vec::new();
    let status = match curvature(e, &mut trace, 0) {
        Curvature::Affine | Curvature::Convex { strict: false } => CertStatus::CertifiedConvex,
        Curvature::Convex { strict: true } => CertStatus::CertifiedStrictlyConvex,
        Curvature::Concave | Curvature::Unknown => CertStatus::Unknown,
    };
    ConvexCert { status, trace }
}

/// Smallest and largest eigenvalue of a symmetric matrix.
pub(crate) fn eigen_range(q: &DMatrix<f64>) -> (f64, f64) {
    if q.nrows() == 0 {
        return (0.0, 0.0);
    }
    let eig = SymmetricEigen::new(q.clone());
    let lo = eig.eigenvalues.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = eig.eigenvalues.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    (lo, hi)
}

fn curvature(e: &Expr, trace: &mut Vec<String>, depth: usize) -> Curvature {
    let note = |trace: &mut Vec<String>, s: String| trace.push(format!("{}{s}", "  ".repeat(depth)));
    match e {
        Expr::Constant(_) => {
            note(trace, "constant: affine".into());
            Curvature::Affine
        }
        Expr::Affine(_) => {
            note(trace, "affine: affine".into());
            Curvature::Affine
        }
        Expr::Quadratic(q) => {
            let (lo, hi) = eigen_range(&q.q);
            let tol = 1e-12 * hi.abs().max(lo.abs()).max(1.0);
            let c = if lo.abs() <= tol && hi.abs() <= tol {
                Curvature::Affine
            } else if lo > tol {
                Curvature::Convex { strict: true }
            } else if lo >= -tol {
                Curvature::Convex { strict: false }
            } else if hi <= tol {
                Curvature::Concave
            } else {
                Curvature::Unknown
            };
            let label = match c {
                Curvature::Affine => "zero Hessian",
                Curvature::Convex { strict: true } => "positive definite",
                Curvature::Convex { strict: false } => "positive semidefinite",
                Curvature::Concave => "negative semidefinite",
                Curvature::Unknown => "indefinite",
            };
            note(trace, format!("quadratic: {label} (eigenvalues in [{lo:.3e}, {hi:.3e}])"));
            c
        }
        Expr::SquareOfAffine(_) => {
            note(trace, "square of affine: convex (convex ∘ affine)".into());
            Curvature::Convex { strict: false }
        }
        Expr::Norm2OfAffineMap(_) => {
            note(trace, "norm of affine map: convex (norm ∘ affine)".into());
            Curvature::Convex { strict: false }
        }
        Expr::MaxOf(es) => {
            note(trace, format!("max of {} pieces", es.len()));
            let cs: Vec<Curvature> = es.iter().map(|x| curvature(x, trace, depth + 1)).collect();
            if cs.iter().all(|c| matches!(c, Curvature::Affine | Curvature::Convex { .. })) {
                let strict = cs.iter().all(|c| matches!(c, Curvature::Convex { strict: true }));
                if cs.iter().all(|c| *c == Curvature::Affine) && cs.len() <= 1 {
                    Curvature::Affine
                } else {
                    Curvature::Convex { strict }
                }
            } else {
                Curvature::Unknown
            }
        }
        Expr::NonnegCombination(ts) => {
            note(trace, format!("nonnegative combination of {} terms", ts.len()));
            let cs: Vec<(f64, Curvature)> = ts.iter().map(|(w, x)| (*w, curvature(x, trace, depth + 1))).collect();
            let active: Vec<Curvature> = cs.iter().filter(|(w, _)| *w > 0.0).map(|(_, c)| *c).collect();
            if active.iter().all(|c| *c == Curvature::Affine) {
                Curvature::Affine
            } else if active.iter().all(|c| matches!(c, Curvature::Affine | Curvature::Convex { .. })) {
                Curvature::Convex { strict: active.iter().any(|c| matches!(c, Curvature::Convex { strict: true })) }
            } else if active.iter().all(|c| matches!(c, Curvature::Affine | Curvature::Concave)) {
                Curvature::Concave
            } else {
                Curvature::Unknown
            }
        }
        Expr::Negate(x) => {
            note(trace, "negation".into());
            match curvature(x, trace, depth + 1) {
                Curvature::Affine => Curvature::Affine,
                Curvature::Convex { .. } => Curvature::Concave,
                Curvature::Concave => Curvature::Convex { strict: false },
                Curvature::Unknown => Curvature::Unknown,
            }
        }
        Expr::Power(x, k) => {
            let inner = curvature(x, trace, depth + 1);
            if inner == Curvature::Affine && k % 2 == 0 && *k > 0 {
                note(trace, format!("even power {k} of affine: convex (convex ∘ affine)"));
                Curvature::Convex { strict: false }
            } else if *k == 1 {
                note(trace, "power 1: identity".into());
                inner
            } else {
                note(trace, format!("power {k}: no rule applies"));
                Curvature::Unknown
            }
        }
        Expr::Product(..) => {
            note(trace, "product: no rule applies".into());
            Curvature::Unknown
        }
    }
}
