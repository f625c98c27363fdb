//! Problem container: interval objective `[fL, fU]`, inequality constraints,
//! the tolerance interval ℰ, and finite sample sets standing in for `X`.

mod file;
mod samples;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::expr::{norm, ConvexCert, Expr};
use crate::interval::Interval;

pub use file::ProblemFile;
pub use samples::{SampleSet, SampleSpec};

/// Default feasibility tolerance `g_j(x) <= tol`.
pub const TOL_FEASIBLE: f64 = 1e-8;
/// Constraints with `|g_j(x)| <= TOL_ACTIVE` count as active.
pub const TOL_ACTIVE: f64 = 1e-6;
/// MFCQ holds when the min-norm convex combination of active gradients exceeds this.
pub const TOL_MFCQ: f64 = 1e-6;

/// The tolerance interval `ℰ = [εL, εU]` with `0 <= εL <= εU`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Epsilon {
    interval: Interval,
}

impl Epsilon {
    pub fn new(lo: f64, hi: f64) -> Result<Self> {
        if !(lo >= 0.0 && lo <= hi && hi.is_finite()) {
            return Err(Error::InvalidEpsilon { lo, hi });
        }
        Ok(Epsilon { interval: Interval::new(lo, hi)? })
    }

    pub fn zero() -> Self {
        Epsilon { interval: Interval::ZERO }
    }

    pub fn lo(&self) -> f64 {
        self.interval.lo()
    }

    pub fn hi(&self) -> f64 {
        self.interval.hi()
    }

    pub fn interval(&self) -> Interval {
        self.interval
    }

    /// Shift vector of the biobjective reduction. The order is swapped
    /// relative to the interval: `(εU, εL)`.
    pub fn eps_vec(&self) -> [f64; 2] {
        [self.hi(), self.lo()]
    }

    pub fn is_zero(&self) -> bool {
        self.interval == Interval::ZERO
    }

    /// `0 ≺_LU ℰ`.
    pub fn is_positive(&self) -> bool {
        Interval::ZERO.lt_lu(self.interval)
    }

    /// `0 ≺ˢ_LU ℰ`.
    pub fn is_strictly_positive(&self) -> bool {
        Interval::ZERO.lt_strict_lu(self.interval)
    }
}

impl std::fmt::Display for Epsilon {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        self.interval.fmt(f)
    }
}

/// Convexity certificates for every function of a problem.
#[derive(Debug, Clone)]
pub struct ConvexSummary {
    pub lower: ConvexCert,
    pub upper: ConvexCert,
    pub constraints: Vec<ConvexCert>,
}

impl ConvexSummary {
    pub fn all_convex(&self) -> bool {
        self.lower.is_convex() && self.upper.is_convex() && self.constraints.iter().all(ConvexCert::is_convex)
    }

    pub fn constraints_convex(&self) -> bool {
        self.constraints.iter().all(ConvexCert::is_convex)
    }

    pub fn objective_strictly_convex(&self) -> bool {
        self.lower.is_strictly_convex() && self.upper.is_strictly_convex()
    }
}

/// `min [fL(x), fU(x)]` subject to `g_j(x) <= 0`.
#[derive(Debug, Clone)]
pub struct Problem {
    pub name: String,
    n: usize,
    lower: Expr,
    upper: Expr,
    constraints: Vec<Expr>,
    convexity: ConvexSummary,
}

/// Outcome of the heuristic Slater search. `witness == None` is
/// inconclusive, never a disproof.
#[derive(Debug, Clone, PartialEq)]
pub struct SlaterResult {
    pub witness: Option<Vec<f64>>,
    pub best_value: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MfcqResult {
    pub holds: bool,
    /// `min ‖Σ λ_j ∇g_j(x*)‖` over the simplex on the active set.
    pub min_norm: f64,
    pub lambda: Vec<f64>,
    pub active: Vec<usize>,
}

impl Problem {
    pub fn new(name: impl Into<String>, n: usize, lower: Expr, upper: Expr, constraints: Vec<Expr>) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidArgument("dimension must be positive".into()));
        }
        lower.check_dim(n)?;
        upper.check_dim(n)?;
        for g in &constraints {
            g.check_dim(n)?;
        }
        let convexity = ConvexSummary {
            lower: lower.convexity(),
            upper: upper.convexity(),
            constraints: constraints.iter().map(Expr::convexity).collect(),
        };
        Ok(Problem { name: name.into(), n, lower, upper, constraints, convexity })
    }

    /// Convenience constructor from expression strings.
    pub fn from_strs(name: &str, n: usize, lower: &str, upper: &str, constraints: &[&str]) -> Result<Self> {
        let gs = constraints.iter().map(|g| Expr::parse(g, n)).collect::<Result<Vec<_>>>()?;
        Problem::new(name, n, Expr::parse(lower, n)?, Expr::parse(upper, n)?, gs)
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn lower(&self) -> &Expr {
        &self.lower
    }

    pub fn upper(&self) -> &Expr {
        &self.upper
    }

    pub fn constraints(&self) -> &[Expr] {
        &self.constraints
    }

    pub fn num_constraints(&self) -> usize {
        self.constraints.len()
    }

    pub fn convexity(&self) -> &ConvexSummary {
        &self.convexity
    }

    fn check_point(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.n {
            return Err(Error::DimensionMismatch { expected: self.n, got: x.len() });
        }
        Ok(())
    }

    /// `max_j g_j(x)`, or `-∞` without constraints.
    pub fn max_constraint(&self, x: &[f64]) -> f64 {
        self.constraints.iter().map(|g| g.value(x)).fold(f64::NEG_INFINITY, f64::max)
    }

    /// `g_j(x) <= tol` for every `j`.
    pub fn feasible(&self, x: &[f64], tol: f64) -> bool {
        x.len() == self.n && self.constraints.iter().all(|g| g.value(x) <= tol)
    }

    /// `f(x) = [fL(x), fU(x)]`.
    pub fn interval_value(&self, x: &[f64]) -> Result<Interval> {
        self.check_point(x)?;
        let (lo, hi) = (self.lower.value(x), self.upper.value(x));
        if lo > hi {
            return Err(Error::LowerExceedsUpper { point: x.to_vec(), lo, hi });
        }
        Interval::new(lo, hi)
    }

    /// The biobjective map `F(x) = (fL(x), fU(x))`.
    pub fn biobjective(&self) -> impl Fn(&[f64]) -> [f64; 2] + '_ {
        move |x| [self.lower.value(x), self.upper.value(x)]
    }

    /// Checks `fL <= fU` on every sample; returns the first violation.
    pub fn validate_order(&self, samples: &SampleSet) -> Result<()> {
        for x in samples.points() {
            let (lo, hi) = (self.lower.value(x), self.upper.value(x));
            if lo > hi {
                return Err(Error::LowerExceedsUpper { point: x.clone(), lo, hi });
            }
        }
        Ok(())
    }

    /// `J(x*) = {j : |g_j(x*)| <= tol}` (0-based indices).
    pub fn active_set(&self, x: &[f64], tol: f64) -> Result<Vec<usize>> {
        self.check_point(x)?;
        let worst = self.max_constraint(x);
        if worst > tol.max(TOL_FEASIBLE) {
            return Err(Error::Infeasible { max_violation: worst });
        }
        Ok((0..self.constraints.len()).filter(|&j| self.constraints[j].value(x).abs() <= tol).collect())
    }

    /// Searches for `x̂` with `max_j g_j(x̂) < 0` by normalized subgradient
    /// descent on `max_j g_j` from seeded starts.
    pub fn check_slater(&self, seed: u64, budget: usize) -> SlaterResult {
        if self.constraints.is_empty() {
            return SlaterResult { witness: Some(vec![0.0; self.n]), best_value: f64::NEG_INFINITY };
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let starts = 8;
        let per_start = (budget / starts).max(1);
        let mut best = (vec![0.0; self.n], self.max_constraint(&vec![0.0; self.n]));
        for s in 0..starts {
            let mut x: Vec<f64> = if s == 0 {
                vec![0.0; self.n]
            } else {
                let r = 10f64.powi(s as i32 % 3);
                (0..self.n).map(|_| rng.gen_range(-r..=r)).collect()
            };
            for k in 1..=per_start {
                let h = self.max_constraint(&x);
                if h < best.1 {
                    best = (x.clone(), h);
                }
                let j = crate::expr::first_argmax(self.constraints.iter().map(|g| g.value(&x)));
                let grad = self.constraints[j].grad(&x);
                let gn = norm(&grad);
                if gn == 0.0 {
                    break;
                }
                let step = 1.0 / (k as f64).sqrt();
                for (xi, gi) in x.iter_mut().zip(&grad) {
                    *xi -= step * gi / gn;
                }
            }
        }
        let witness = (best.1 < 0.0).then(|| best.0.clone());
        SlaterResult { witness, best_value: best.1 }
    }

    /// MFCQ at `x*` for smooth constraints.
    pub fn check_mfcq(&self, x: &[f64]) -> Result<MfcqResult> {
        let active = self.active_set(x, TOL_ACTIVE)?;
        if active.is_empty() {
            return Ok(MfcqResult { holds: true, min_norm: f64::INFINITY, lambda: vec![], active });
        }
        for &j in &active {
            if let Some(reason) = self.constraints[j].nonsmooth_reason(x) {
                return Err(Error::NonSmoothAtPoint(format!("constraint g{}: {reason}", j + 1)));
            }
        }
        let grads: Vec<Vec<f64>> = active.iter().map(|&j| self.constraints[j].grad(x)).collect();
        let (lambda, min_norm) = min_norm_in_hull(&grads);
        Ok(MfcqResult { holds: min_norm > TOL_MFCQ, min_norm, lambda, active })
    }
}

/// Minimum-norm point of `conv{g_1, …, g_k}`: returns the simplex weights and
/// the norm. Projected gradient on the simplex, polished by exact
/// enumeration of supports when `k` is small.
pub(crate) fn min_norm_in_hull(grads: &[Vec<f64>]) -> (Vec<f64>, f64) {
    let k = grads.len();
    let n = grads[0].len();
    let combo = |lam: &[f64]| {
        let mut v = vec![0.0; n];
        for (l, g) in lam.iter().zip(grads) {
            crate::expr::axpy(*l, g, &mut v);
        }
        v
    };
    // Lipschitz constant of ∇(½‖Gλ‖²) bounded by ‖G‖_F².
    let lip: f64 = grads.iter().map(|g| crate::expr::dot(g, g)).sum::<f64>().max(f64::MIN_POSITIVE);
    let mut lam = vec![1.0 / k as f64; k];
    for _ in 0..5000 {
        let v = combo(&lam);
        let step: Vec<f64> = grads.iter().zip(&lam).map(|(g, l)| l - crate::expr::dot(g, &v) / lip).collect();
        lam = project_simplex(&step);
    }
    let mut best = (lam.clone(), norm(&combo(&lam)));
    if k <= 12 {
        for mask in 1u32..(1u32 << k) {
            let support: Vec<usize> = (0..k).filter(|i| mask & (1 << i) != 0).collect();
            if let Some(w) = affine_min_norm(grads, &support) {
                if w.iter().all(|x| *x >= 0.0) {
                    let mut full = vec![0.0; k];
                    for (i, wi) in support.iter().zip(&w) {
                        full[*i] = *wi;
                    }
                    let r = norm(&combo(&full));
                    if r < best.1 {
                        best = (full, r);
                    }
                }
            }
        }
    }
    best
}

/// Minimum-norm point of the affine hull of the selected gradients, as
/// weights summing to one. `None` if the KKT system is singular.
fn affine_min_norm(grads: &[Vec<f64>], support: &[usize]) -> Option<Vec<f64>> {
    use nalgebra::{DMatrix, DVector};
    let s = support.len();
    let mut kkt = DMatrix::zeros(s + 1, s + 1);
    for (a, &i) in support.iter().enumerate() {
        for (b, &j) in support.iter().enumerate() {
            kkt[(a, b)] = crate::expr::dot(&grads[i], &grads[j]);
        }
        kkt[(a, s)] = 1.0;
        kkt[(s, a)] = 1.0;
    }
    let mut rhs = DVector::zeros(s + 1);
    rhs[s] = 1.0;
    let sol = kkt.lu().solve(&rhs)?;
    let w: Vec<f64> = sol.iter().take(s).copied().collect();
    w.iter().all(|x| x.is_finite()).then_some(w)
}

/// Euclidean projection onto the probability simplex.
pub(crate) fn project_simplex(y: &[f64]) -> Vec<f64> {
    let mut u: Vec<f64> = y.to_vec();
    u.sort_by(|a, b| b.partial_cmp(a).unwrap_or(std::cmp::Ordering::Equal));
    let mut css = 0.0;
    let mut theta = 0.0;
    for (i, ui) in u.iter().enumerate() {
        css += ui;
        let t = (css - 1.0) / (i + 1) as f64;
        if ui - t > 0.0 {
            theta = t;
        }
    }
    y.iter().map(|v| (v - theta).max(0.0)).collect()
}
