//! Scalar functions `ℝⁿ → ℝ` for objective bounds and constraints.
//!
//! An [`Expr`] is an immutable tree of atoms. The convex fragment (affine,
//! quadratic, squared affine, Euclidean norm of an affine map, pointwise max,
//! nonnegative combinations) feeds the convexity certificate, conjugates and
//! ε-subdifferential tests. `Negate`, `Product` and `Power` form the general
//! arithmetic fragment needed by nonconvex objectives; those are accepted by
//! evaluation and the sample-based certifiers but not by the KKT machinery.

mod cert;
mod conjugate;
mod lower;
mod parse;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

pub use cert::{CertStatus, ConvexCert};
pub(crate) use cert::eigen_range;
pub use conjugate::{
    check_sum_rule_decomposition, eps_subdiff_contains, eps_subdiff_refute_sampled, fenchel_gap,
    scaled_eps_subdiff_contains, ConjugateForm, SumSplit, TOL_MEMBERSHIP,
};
pub use parse::{parse_ast, Ast};

/// `a·x + b`.
#[derive(Debug, Clone, PartialEq)]
pub struct Affine {
    pub a: Vec<f64>,
    pub b: f64,
}

impl Affine {
    pub fn new(a: Vec<f64>, b: f64) -> Self {
        Affine { a, b }
    }

    pub fn value(&self, x: &[f64]) -> f64 {
        dot(&self.a, x) + self.b
    }
}

/// `x ↦ Ax + b`, one [`Affine`] per output row.
#[derive(Debug, Clone, PartialEq)]
pub struct AffineMap {
    pub rows: Vec<Affine>,
}

impl AffineMap {
    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        self.rows.iter().map(|r| r.value(x)).collect()
    }

    pub fn matrix(&self, n: usize) -> DMatrix<f64> {
        DMatrix::from_fn(self.rows.len(), n, |i, j| self.rows[i].a[j])
    }

    pub fn offset(&self) -> DVector<f64> {
        DVector::from_iterator(self.rows.len(), self.rows.iter().map(|r| r.b))
    }
}

/// `½ xᵀQx + bᵀx + c` with symmetric `Q`.
#[derive(Debug, Clone, PartialEq)]
pub struct Quadratic {
    pub q: DMatrix<f64>,
    pub b: DVector<f64>,
    pub c: f64,
}

impl Quadratic {
    /// Builds the form, symmetrizing `q` (which leaves `xᵀQx` unchanged).
    pub fn new(q: DMatrix<f64>, b: DVector<f64>, c: f64) -> Result<Self> {
        let n = b.len();
        if q.nrows() != n || q.ncols() != n {
            return Err(Error::DimensionMismatch { expected: n, got: q.nrows() });
        }
        let q = (&q + q.transpose()) * 0.5;
        Ok(Quadratic { q, b, c })
    }

    pub fn zero(n: usize) -> Self {
        Quadratic { q: DMatrix::zeros(n, n), b: DVector::zeros(n), c: 0.0 }
    }

    pub fn dim(&self) -> usize {
        self.b.len()
    }

    pub fn value(&self, x: &[f64]) -> f64 {
        let xv = DVector::from_column_slice(x);
        0.5 * xv.dot(&(&self.q * &xv)) + self.b.dot(&xv) + self.c
    }

    pub fn gradient(&self, x: &[f64]) -> DVector<f64> {
        let xv = DVector::from_column_slice(x);
        &self.q * xv + &self.b
    }

    pub fn scaled(&self, k: f64) -> Quadratic {
        Quadratic { q: &self.q * k, b: &self.b * k, c: self.c * k }
    }

    pub fn plus(&self, other: &Quadratic) -> Quadratic {
        Quadratic { q: &self.q + &other.q, b: &self.b + &other.b, c: self.c + other.c }
    }
}

/// Expression tree for a scalar function of `x = (x1, …, xn)`.
#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Constant(f64),
    Affine(Affine),
    Quadratic(Quadratic),
    /// `(a·x + b)²`
    SquareOfAffine(Affine),
    /// `‖Ax + b‖₂`
    Norm2OfAffineMap(AffineMap),
    MaxOf(Vec<Expr>),
    /// `Σ wᵢ eᵢ` with every `wᵢ >= 0`.
    NonnegCombination(Vec<(f64, Expr)>),
    Negate(Box<Expr>),
    Product(Box<Expr>, Box<Expr>),
    Power(Box<Expr>, u32),
}

impl Expr {
    /// Parses the expression grammar and lowers it onto the atom set for
    /// functions of `n` variables.
    pub fn parse(src: &str, n: usize) -> Result<Expr> {
        let ast = parse_ast(src)?;
        lower::lower(&ast, n)
    }

    pub fn nonneg_combination(terms: Vec<(f64, Expr)>) -> Result<Expr> {
        if let Some((w, _)) = terms.iter().find(|(w, _)| !(*w >= 0.0) || !w.is_finite()) {
            return Err(Error::InvalidArgument(format!("combination weight {w} must be finite and >= 0")));
        }
        Ok(Expr::NonnegCombination(terms))
    }

    pub fn quadratic(q: DMatrix<f64>, b: DVector<f64>, c: f64) -> Result<Expr> {
        Ok(Expr::Quadratic(Quadratic::new(q, b, c)?))
    }

    pub fn affine(a: Vec<f64>, b: f64) -> Expr {
        Expr::Affine(Affine::new(a, b))
    }

    /// `w·self`, folding the weight into closed-form atoms where possible.
    pub fn scaled(self, w: f64) -> Expr {
        match self {
            Expr::Constant(c) => Expr::Constant(w * c),
            Expr::Affine(a) => Expr::Affine(Affine::new(a.a.iter().map(|v| w * v).collect(), w * a.b)),
            Expr::Quadratic(q) => Expr::Quadratic(q.scaled(w)),
            e if w >= 0.0 => Expr::NonnegCombination(vec![(w, e)]),
            e => Expr::NonnegCombination(vec![(-w, Expr::Negate(Box::new(e)))]),
        }
    }

    /// Checks that every vector-carrying atom has length `n`.
    pub fn check_dim(&self, n: usize) -> Result<()> {
        let bad = |got: usize| if got == n { Ok(()) } else { Err(Error::DimensionMismatch { expected: n, got }) };
        match self {
            Expr::Constant(_) => Ok(()),
            Expr::Affine(a) | Expr::SquareOfAffine(a) => bad(a.a.len()),
            Expr::Quadratic(q) => bad(q.dim()),
            Expr::Norm2OfAffineMap(m) => m.rows.iter().try_for_each(|r| bad(r.a.len())),
            Expr::MaxOf(es) => es.iter().try_for_each(|e| e.check_dim(n)),
            Expr::NonnegCombination(ts) => ts.iter().try_for_each(|(_, e)| e.check_dim(n)),
            Expr::Negate(e) | Expr::Power(e, _) => e.check_dim(n),
            Expr::Product(a, b) => {
                a.check_dim(n)?;
                b.check_dim(n)
            }
        }
    }

    /// Evaluates at `x`, checking dimensions first.
    pub fn eval(&self, x: &[f64]) -> Result<f64> {
        self.check_dim(x.len())?;
        Ok(self.value(x))
    }

    /// Evaluation without the dimension check; callers validate once up front.
    pub fn value(&self, x: &[f64]) -> f64 {
        match self {
            Expr::Constant(c) => *c,
            Expr::Affine(a) => a.value(x),
            Expr::Quadratic(q) => q.value(x),
            Expr::SquareOfAffine(a) => {
                let t = a.value(x);
                t * t
            }
            Expr::Norm2OfAffineMap(m) => norm(&m.apply(x)),
            Expr::MaxOf(es) => es.iter().map(|e| e.value(x)).fold(f64::NEG_INFINITY, f64::max),
            Expr::NonnegCombination(ts) => ts.iter().map(|(w, e)| w * e.value(x)).sum(),
            Expr::Negate(e) => -e.value(x),
            Expr::Product(a, b) => a.value(x) * b.value(x),
            Expr::Power(e, k) => e.value(x).powi(*k as i32),
        }
    }

    /// A subgradient at `x` for convex trees, the gradient wherever the tree
    /// is differentiable. At kinks the selection is deterministic: the first
    /// maximizing piece of a `MaxOf`, and the center `0` of the dual ball for
    /// a norm whose argument vanishes.
    pub fn subgradient(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.check_dim(x.len())?;
        Ok(self.grad(x))
    }

    pub(crate) fn grad(&self, x: &[f64]) -> Vec<f64> {
        let n = x.len();
        match self {
            Expr::Constant(_) => vec![0.0; n],
            Expr::Affine(a) => a.a.clone(),
            Expr::Quadratic(q) => q.gradient(x).as_slice().to_vec(),
            Expr::SquareOfAffine(a) => {
                let t = 2.0 * a.value(x);
                a.a.iter().map(|v| t * v).collect()
            }
            Expr::Norm2OfAffineMap(m) => {
                let r = m.apply(x);
                let nr = norm(&r);
                let mut g = vec![0.0; n];
                if nr > 0.0 {
                    for (ri, row) in r.iter().zip(&m.rows) {
                        axpy(ri / nr, &row.a, &mut g);
                    }
                }
                g
            }
            Expr::MaxOf(es) => {
                let idx = first_argmax(es.iter().map(|e| e.value(x)));
                es[idx].grad(x)
            }
            Expr::NonnegCombination(ts) => {
                let mut g = vec![0.0; n];
                for (w, e) in ts {
                    axpy(*w, &e.grad(x), &mut g);
                }
                g
            }
            Expr::Negate(e) => e.grad(x).into_iter().map(|v| -v).collect(),
            Expr::Product(a, b) => {
                let (va, vb) = (a.value(x), b.value(x));
                let mut g = vec![0.0; n];
                axpy(vb, &a.grad(x), &mut g);
                axpy(va, &b.grad(x), &mut g);
                g
            }
            Expr::Power(e, k) => match k {
                0 => vec![0.0; n],
                k => {
                    let t = *k as f64 * e.value(x).powi(*k as i32 - 1);
                    e.grad(x).into_iter().map(|v| t * v).collect()
                }
            },
        }
    }

    /// `None` when the tree is differentiable at `x`, otherwise a description
    /// of the first kink found.
    pub fn nonsmooth_reason(&self, x: &[f64]) -> Option<String> {
        match self {
            Expr::Constant(_) | Expr::Affine(_) | Expr::Quadratic(_) | Expr::SquareOfAffine(_) => None,
            Expr::Norm2OfAffineMap(m) => {
                let r = m.apply(x);
                (norm(&r) <= 1e-12).then(|| "norm argument vanishes".to_string())
            }
            Expr::MaxOf(es) => {
                let vals: Vec<f64> = es.iter().map(|e| e.value(x)).collect();
                let best = vals.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
                let scale = 1.0 + best.abs();
                let active: Vec<usize> = (0..vals.len()).filter(|&i| best - vals[i] <= 1e-12 * scale).collect();
                if active.len() > 1 {
                    let g0 = es[active[0]].grad(x);
                    let differ = active[1..].iter().any(|&i| {
                        es[i].grad(x).iter().zip(&g0).any(|(a, b)| (a - b).abs() > 1e-12 * (1.0 + b.abs()))
                    });
                    if differ {
                        return Some(format!("max has {} active pieces with distinct gradients", active.len()));
                    }
                }
                active.iter().find_map(|&i| es[i].nonsmooth_reason(x))
            }
            Expr::NonnegCombination(ts) => ts.iter().filter(|(w, _)| *w > 0.0).find_map(|(_, e)| e.nonsmooth_reason(x)),
            Expr::Negate(e) | Expr::Power(e, _) => e.nonsmooth_reason(x),
            Expr::Product(a, b) => a.nonsmooth_reason(x).or_else(|| b.nonsmooth_reason(x)),
        }
    }

    /// Convexity certificate from the fixed composition rules.
    pub fn convexity(&self) -> ConvexCert {
        cert::certify(self)
    }

    /// Closed-form conjugate, or [`ConjugateForm::Unavailable`].
    pub fn conjugate(&self, n: usize) -> ConjugateForm {
        conjugate::conjugate(self, n)
    }

    /// Collapses trees built only from constant, affine and quadratic pieces
    /// (including squared affines and their nonnegative combinations) into a
    /// single quadratic form.
    pub fn as_quadratic(&self, n: usize) -> Option<Quadratic> {
        match self {
            Expr::Constant(c) => Some(Quadratic { c: *c, ..Quadratic::zero(n) }),
            Expr::Affine(a) => Some(Quadratic { q: DMatrix::zeros(n, n), b: DVector::from_column_slice(&a.a), c: a.b }),
            Expr::Quadratic(q) => Some(q.clone()),
            Expr::SquareOfAffine(a) => {
                let av = DVector::from_column_slice(&a.a);
                Some(Quadratic { q: &av * av.transpose() * 2.0, b: &av * (2.0 * a.b), c: a.b * a.b })
            }
            Expr::NonnegCombination(ts) => ts.iter().try_fold(Quadratic::zero(n), |acc, (w, e)| {
                Some(acc.plus(&e.as_quadratic(n)?.scaled(*w)))
            }),
            Expr::Negate(e) => Some(e.as_quadratic(n)?.scaled(-1.0)),
            _ => None,
        }
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub(crate) fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

pub(crate) fn axpy(k: f64, x: &[f64], y: &mut [f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += k * xi;
    }
}

/// Index of the first maximum; ties go to the smallest index.
pub(crate) fn first_argmax(vals: impl Iterator<Item = f64>) -> usize {
    let mut best = (0, f64::NEG_INFINITY);
    for (i, v) in vals.enumerate() {
        if v > best.1 {
            best = (i, v);
        }
    }
    best.0
}
