//! KKT-type conditions for approximate LU solutions of convex instances.
//!
//! Membership in `∂_ε(μφ)(x*)` is decided with closed-form ellipsoids, so the
//! set-valued machinery accepts quadratic-like atoms (constants, affine maps,
//! PSD quadratics, squared affines and their nonnegative combinations). The
//! quasi condition only needs gradients and accepts any atom smooth at `x*`.

pub mod nnls;
mod sets;

use std::fmt;

use nalgebra::{DMatrix, DVector};

pub use sets::{zero_in_sum, Ellipsoid, Inclusion, InclusionVerdict, MAX_PROJECTION_ITERS, TOL_KKT};

use crate::certify::{certify_on_set, Certificate, SolutionKind};
use crate::error::{Error, Result};
use crate::expr::{eps_subdiff_contains, Expr, Quadratic};
use crate::linalg::PsdEigen;
use crate::problem::{Epsilon, MfcqResult, Problem, SampleSet, TOL_ACTIVE, TOL_FEASIBLE};
use crate::report::{num, point};

/// Slack allowed in the scalar inequality of each theorem.
pub const TOL_SCALAR: f64 = 1e-9;

/// Multipliers and slack parameters of a KKT certificate. Unused fields
/// stay zero.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct KktWitness {
    pub mu_l: f64,
    pub mu_u: f64,
    pub lambda: Vec<f64>,
    pub eps0: f64,
    pub eps_j: Vec<f64>,
    pub gamma1: f64,
    pub gamma2: f64,
    pub mu1: f64,
    pub mu2: f64,
    pub residual: f64,
    /// Optional decomposition `v_0, v_1, …` used to warm-start verification.
    pub decomposition: Option<Vec<Vec<f64>>>,
}

impl KktWitness {
    /// Witness with the given multipliers and all slacks zero.
    pub fn new(mu_l: f64, mu_u: f64, lambda: Vec<f64>) -> Self {
        let m = lambda.len();
        KktWitness { mu_l, mu_u, lambda, eps_j: vec![0.0; m], ..Default::default() }
    }

    fn validate(&self, m: usize) -> Result<()> {
        if self.lambda.len() != m {
            return Err(Error::DimensionMismatch { expected: m, got: self.lambda.len() });
        }
        if self.eps_j.len() != m {
            return Err(Error::DimensionMismatch { expected: m, got: self.eps_j.len() });
        }
        let scalars = [self.mu_l, self.mu_u, self.eps0, self.gamma1, self.gamma2, self.mu1, self.mu2];
        let all = scalars.iter().chain(&self.lambda).chain(&self.eps_j);
        if all.clone().any(|v| !(v.is_finite() && *v >= 0.0)) {
            return Err(Error::Precondition("witness entries must be finite and nonnegative".into()));
        }
        Ok(())
    }
}

impl fmt::Display for KktWitness {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "muL = {}, muU = {}", num(self.mu_l), num(self.mu_u))?;
        writeln!(f, "lambda = {}", point(&self.lambda))?;
        writeln!(f, "eps0 = {}, eps_j = {}", num(self.eps0), point(&self.eps_j))?;
        if self.mu1 != 0.0 || self.mu2 != 0.0 || self.gamma1 != 0.0 || self.gamma2 != 0.0 {
            writeln!(f, "mu1 = {}, gamma1 = {}, mu2 = {}, gamma2 = {}", num(self.mu1), num(self.gamma1), num(self.mu2), num(self.gamma2))?;
        }
        write!(f, "residual = {}", num(self.residual))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Theorem {
    WeakElu,
    Elu,
    Quasi,
    ScalarEps,
}

impl fmt::Display for Theorem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Theorem::WeakElu => "weakly E-LU KKT condition",
            Theorem::Elu => "E-LU KKT condition",
            Theorem::Quasi => "E-quasi-LU KKT condition",
            Theorem::ScalarEps => "scalar eps-solution condition",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KktVerdict {
    Holds,
    Fails,
    Inconclusive,
}

#[derive(Debug, Clone)]
pub struct KktReport {
    pub theorem: Theorem,
    pub verdict: KktVerdict,
    pub witness: KktWitness,
    pub inclusion_residual: f64,
    pub inequality_lhs: f64,
    pub inequality_rhs: f64,
    pub notes: Vec<String>,
}

impl KktReport {
    pub fn holds(&self) -> bool {
        self.verdict == KktVerdict::Holds
    }
}

impl fmt::Display for KktReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "theorem: {}", self.theorem)?;
        writeln!(f, "{}", self.witness)?;
        writeln!(f, "inclusion residual: {}", num(self.inclusion_residual))?;
        writeln!(f, "scalar inequality: {} <= {}", num(self.inequality_lhs), num(self.inequality_rhs))?;
        for n in &self.notes {
            writeln!(f, "note: {n}")?;
        }
        let v = match self.verdict {
            KktVerdict::Holds => "HOLDS",
            KktVerdict::Fails => "FAILS",
            KktVerdict::Inconclusive => "INCONCLUSIVE",
        };
        write!(f, "verdict: {v}")
    }
}

fn require_convex(p: &Problem) -> Result<()> {
    let c = p.convexity();
    if !c.lower.is_convex() {
        return Err(Error::NotConvex("lower objective".into()));
    }
    if !c.upper.is_convex() {
        return Err(Error::NotConvex("upper objective".into()));
    }
    if let Some(j) = c.constraints.iter().position(|c| !c.is_convex()) {
        return Err(Error::NotConvex(format!("constraint g{}", j + 1)));
    }
    Ok(())
}

fn require_feasible(p: &Problem, x: &[f64]) -> Result<()> {
    if x.len() != p.dim() {
        return Err(Error::DimensionMismatch { expected: p.dim(), got: x.len() });
    }
    if !p.feasible(x, TOL_FEASIBLE) {
        return Err(Error::Infeasible { max_violation: p.max_constraint(x) });
    }
    Ok(())
}

fn constraint_sets(p: &Problem, x: &[f64], w: &KktWitness) -> Result<Vec<Ellipsoid>> {
    p.constraints()
        .iter()
        .zip(w.lambda.iter().zip(&w.eps_j))
        .map(|(g, (l, e))| Ellipsoid::eps_subdifferential(&[(*l, g)], x, *e))
        .collect()
}

/// Expressions whose ε-subdifferentials the sets describe, for the
/// independent Fenchel membership cross-check.
type Member = (Expr, f64);

fn finish(
    theorem: Theorem,
    sets: &[Ellipsoid],
    members: Vec<Member>,
    x: &[f64],
    mut witness: KktWitness,
    lhs: f64,
    rhs: f64,
    mut notes: Vec<String>,
) -> KktReport {
    let warm: Option<Vec<DVector<f64>>> =
        witness.decomposition.as_ref().map(|d| d.iter().map(|v| DVector::from_column_slice(v)).collect());
    let inc = zero_in_sum(sets, warm.as_deref());
    witness.residual = inc.residual;
    let ineq_ok = lhs <= rhs + TOL_SCALAR;
    let mut verdict = match (inc.verdict, ineq_ok) {
        (InclusionVerdict::Holds, true) => KktVerdict::Holds,
        (InclusionVerdict::Fails, _) | (_, false) => KktVerdict::Fails,
        (InclusionVerdict::Inconclusive, true) => KktVerdict::Inconclusive,
    };
    if inc.verdict == InclusionVerdict::Inconclusive {
        notes.push(format!("alternating projection stopped after {} iterations", inc.iterations));
    }
    if verdict == KktVerdict::Holds {
        for (i, ((e, eps), v)) in members.iter().zip(&inc.vectors).enumerate() {
            let ok = eps_subdiff_contains(e, x, v.as_slice(), *eps).unwrap_or(false);
            if !ok {
                notes.push(format!("summand {i} failed the Fenchel membership cross-check"));
                verdict = KktVerdict::Inconclusive;
            }
        }
        witness.decomposition = Some(inc.vectors.iter().map(|v| v.iter().copied().collect()).collect());
    }
    if !ineq_ok {
        notes.push("scalar inequality violated".into());
    }
    KktReport { theorem, verdict, witness, inclusion_residual: inc.residual, inequality_lhs: lhs, inequality_rhs: rhs, notes }
}

fn lambda_g(p: &Problem, x: &[f64], lambda: &[f64]) -> f64 {
    p.constraints().iter().zip(lambda).map(|(g, l)| l * g.value(x)).sum()
}

fn constraint_members(p: &Problem, w: &KktWitness) -> Vec<Member> {
    p.constraints().iter().zip(w.lambda.iter().zip(&w.eps_j)).map(|(g, (l, e))| (g.clone().scaled(*l), *e)).collect()
}

fn combo(terms: &[(f64, &Expr)]) -> Expr {
    let ts: Vec<(f64, Expr)> = terms.iter().map(|(w, e)| (*w, (*e).clone())).collect();
    Expr::nonneg_combination(ts).expect("weights validated")
}

/// Checks `0 ∈ ∂_{ε0}(μL fL + μU fU)(x*) + Σ ∂_{εj}(λj gj)(x*)` and
/// `Σ_{j>=0} εj − μL εU − μU εL <= Σ λj gj(x*)`.
pub fn verify_weak_elu_kkt(p: &Problem, x: &[f64], eps: Epsilon, w: &KktWitness) -> Result<KktReport> {
    require_convex(p)?;
    require_feasible(p, x)?;
    w.validate(p.num_constraints())?;
    if (w.mu_l + w.mu_u - 1.0).abs() > 1e-12 {
        return Err(Error::Precondition("weights must satisfy muL + muU = 1".into()));
    }
    let obj = [(w.mu_l, p.lower()), (w.mu_u, p.upper())];
    let mut sets = vec![Ellipsoid::eps_subdifferential(&obj, x, w.eps0)?];
    sets.extend(constraint_sets(p, x, w)?);
    let mut members = vec![(combo(&obj), w.eps0)];
    members.extend(constraint_members(p, w));
    let lhs = w.eps0 + w.eps_j.iter().sum::<f64>() - w.mu_l * eps.hi() - w.mu_u * eps.lo();
    let rhs = lambda_g(p, x, &w.lambda);
    Ok(finish(Theorem::WeakElu, &sets, members, x, w.clone(), lhs, rhs, vec![]))
}

/// Checks `0 ∈ ∂_{ε0}(fL + fU)(x*) + μ1 ∂_{γ1} fL(x*) + μ2 ∂_{γ2} fU(x*) + Σ ∂_{εj}(λj gj)(x*)`
/// and `ε0 + μ1γ1 + μ2γ2 − (1+μ1)εU − (1+μ2)εL + Σ λj εj <= Σ λj gj(x*)`.
/// The conclusion is conditional on the closedness condition, which the
/// caller must assert.
pub fn verify_elu_kkt(p: &Problem, x: &[f64], eps: Epsilon, w: &KktWitness, assume_cc: bool) -> Result<KktReport> {
    if !assume_cc {
        return Err(Error::CcNotAsserted);
    }
    require_convex(p)?;
    require_feasible(p, x)?;
    w.validate(p.num_constraints())?;
    let obj = [(1.0, p.lower()), (1.0, p.upper())];
    let mut sets = vec![
        Ellipsoid::eps_subdifferential(&obj, x, w.eps0)?,
        Ellipsoid::eps_subdifferential(&[(w.mu1, p.lower())], x, w.mu1 * w.gamma1)?,
        Ellipsoid::eps_subdifferential(&[(w.mu2, p.upper())], x, w.mu2 * w.gamma2)?,
    ];
    sets.extend(constraint_sets(p, x, w)?);
    let mut members = vec![
        (combo(&obj), w.eps0),
        (p.lower().clone().scaled(w.mu1), w.mu1 * w.gamma1),
        (p.upper().clone().scaled(w.mu2), w.mu2 * w.gamma2),
    ];
    members.extend(constraint_members(p, w));
    let weighted: f64 = w.lambda.iter().zip(&w.eps_j).map(|(l, e)| l * e).sum();
    let lhs = w.eps0 + w.mu1 * w.gamma1 + w.mu2 * w.gamma2 - (1.0 + w.mu1) * eps.hi() - (1.0 + w.mu2) * eps.lo() + weighted;
    let rhs = lambda_g(p, x, &w.lambda);
    let notes = vec!["conclusion is conditional on the asserted closedness condition".into()];
    Ok(finish(Theorem::Elu, &sets, members, x, w.clone(), lhs, rhs, notes))
}

/// A candidate decomposition `0 = v0 + Σ vj` with matching slacks.
#[derive(Debug, Clone)]
struct Candidate {
    lambda: Vec<f64>,
    eps0: f64,
    eps_j: Vec<f64>,
    v: Vec<Vec<f64>>,
}

fn quadratic_of(terms: &[(f64, &Expr)], n: usize) -> Option<Quadratic> {
    terms.iter().try_fold(Quadratic::zero(n), |acc, (w, e)| {
        if *w == 0.0 {
            Some(acc)
        } else {
            Some(acc.plus(&e.as_quadratic(n)?.scaled(*w)))
        }
    })
}

/// Candidates for `φ = Σ w f` at `x*`: gradient-based multipliers on the
/// active set, then Lagrangian dual ascent when every piece is quadratic-like.
fn candidates(phi: &[(f64, &Expr)], p: &Problem, x: &[f64]) -> Result<Vec<Candidate>> {
    let n = p.dim();
    let m = p.num_constraints();
    let set0 = Ellipsoid::eps_subdifferential(phi, x, 0.0)?;
    let grad_phi: Vec<f64> = set0.center.iter().copied().collect();
    let active = p.active_set(x, TOL_ACTIVE)?;
    let grads: Vec<Vec<f64>> = active.iter().map(|&j| p.constraints()[j].grad(x)).collect();
    let mut out = Vec::new();

    let mut lambdas = vec![nnls::nnls(&grad_phi, &grads).0];
    if set0.eig.is_definite() {
        let inv_sqrt = {
            let e = &set0.eig;
            let d = e.values.map(|v| 1.0 / v.sqrt());
            &e.vectors * DMatrix::from_diagonal(&d) * e.vectors.transpose()
        };
        let tr = |v: &[f64]| -> Vec<f64> { (&inv_sqrt * DVector::from_column_slice(v)).iter().copied().collect() };
        let cols: Vec<Vec<f64>> = grads.iter().map(|g| tr(g)).collect();
        lambdas.push(nnls::nnls(&tr(&grad_phi), &cols).0);
    }
    for la in lambdas {
        let mut lambda = vec![0.0; m];
        let mut vs = vec![vec![0.0; n]; m];
        let mut v0 = vec![0.0; n];
        for (k, &j) in active.iter().enumerate() {
            lambda[j] = la[k];
            for i in 0..n {
                vs[j][i] = la[k] * grads[k][i];
                v0[i] -= vs[j][i];
            }
        }
        let eps0 = set0.gauge(&DVector::from_column_slice(&v0));
        if eps0.is_finite() {
            let mut v = vec![v0];
            v.extend(vs);
            out.push(Candidate { lambda, eps0, eps_j: vec![0.0; m], v });
        }
    }

    if let Some(c) = dual_candidate(phi, p, x, out.first().map(|c| c.lambda.clone())) {
        out.push(c);
    }
    Ok(out)
}

/// Best Lagrangian dual point found: `value = d(λ) = min_x φ(x) + Σ λj gj(x)`
/// attained at `xbar`.
pub(crate) struct DualPoint {
    pub value: f64,
    pub lambda: Vec<f64>,
    pub xbar: DVector<f64>,
    qphi: Quadratic,
    qg: Vec<Quadratic>,
}

/// Maximizes the dual function by projected gradient ascent with
/// backtracking, for quadratic-like `φ` and constraints. `None` when the
/// dual stays at `−∞` from every start.
pub(crate) fn maximize_dual(phi: &[(f64, &Expr)], p: &Problem, start: Option<Vec<f64>>) -> Option<DualPoint> {
    let n = p.dim();
    let m = p.num_constraints();
    let qphi = quadratic_of(phi, n)?;
    let qg: Vec<Quadratic> = p.constraints().iter().map(|g| g.as_quadratic(n)).collect::<Option<_>>()?;
    let inner = |lam: &[f64]| -> Option<(f64, DVector<f64>)> {
        let mut q = qphi.clone();
        for (l, g) in lam.iter().zip(&qg) {
            q = q.plus(&g.scaled(*l));
        }
        let eig = PsdEigen::new(&q.q);
        if eig.values.iter().any(|v| *v < 0.0) {
            return None;
        }
        let xbar = -(eig.pinv() * &q.b);
        let resid = (&q.q * &xbar + &q.b).norm();
        if resid > 1e-9 * (1.0 + q.b.norm()) {
            return None;
        }
        Some((q.value(xbar.as_slice()), xbar))
    };
    let mut starts = vec![vec![1.0; m], vec![10.0; m], vec![0.0; m]];
    if let Some(s) = start {
        starts.insert(0, s);
    }
    let mut best: Option<(f64, Vec<f64>, DVector<f64>)> = None;
    for s in starts {
        let Some((mut d, mut xbar)) = inner(&s) else { continue };
        let mut lam = s;
        let mut step = 1.0;
        for _ in 0..2000 {
            if m == 0 {
                break;
            }
            let grad: Vec<f64> = qg.iter().map(|g| g.value(xbar.as_slice())).collect();
            let mut improved = false;
            while step > 1e-14 {
                let trial: Vec<f64> = lam.iter().zip(&grad).map(|(l, g)| (l + step * g).max(0.0)).collect();
                if let Some((dt, xt)) = inner(&trial) {
                    if dt > d {
                        lam = trial;
                        d = dt;
                        xbar = xt;
                        improved = true;
                        step *= 2.0;
                        break;
                    }
                }
                step *= 0.5;
            }
            if !improved {
                break;
            }
        }
        if best.as_ref().is_none_or(|b| d > b.0) {
            best = Some((d, lam, xbar));
        }
    }
    let (value, lambda, xbar) = best?;
    Some(DualPoint { value, lambda, xbar, qphi, qg })
}

/// Reads a decomposition off the best dual point: `v0 = ∇φ(x̄)`,
/// `vj = λj∇gj(x̄)`, slacks are Bregman gaps at `x*`.
fn dual_candidate(phi: &[(f64, &Expr)], p: &Problem, x_star: &[f64], start: Option<Vec<f64>>) -> Option<Candidate> {
    if p.num_constraints() == 0 {
        return None;
    }
    let DualPoint { lambda, xbar, qphi, qg, .. } = maximize_dual(phi, p, start)?;
    let xs = DVector::from_column_slice(x_star);
    let bregman = |q: &Quadratic| -> f64 {
        let diff = &xs - &xbar;
        (0.5 * diff.dot(&(&q.q * &diff))).max(0.0)
    };
    let mut v = vec![qphi.gradient(xbar.as_slice()).iter().copied().collect::<Vec<f64>>()];
    let mut eps_j = Vec::with_capacity(lambda.len());
    for (l, g) in lambda.iter().zip(&qg) {
        v.push((g.gradient(xbar.as_slice()) * *l).iter().copied().collect());
        eps_j.push(l * bregman(g));
    }
    Some(Candidate { lambda, eps0: bregman(&qphi), eps_j, v })
}

fn candidate_witness(c: &Candidate, mu_l: f64, mu_u: f64, extra0: f64) -> KktWitness {
    KktWitness {
        mu_l,
        mu_u,
        lambda: c.lambda.clone(),
        eps0: c.eps0 + extra0.max(0.0),
        eps_j: c.eps_j.clone(),
        decomposition: Some(c.v.clone()),
        ..Default::default()
    }
}

/// Grid search over `μL ∈ {0, 1/r, …, 1}` for a witness of the weakly
/// ℰ-LU condition. `None` is inconclusive at this resolution.
pub fn search_weak_elu_witness(p: &Problem, x: &[f64], eps: Epsilon, resolution: usize) -> Result<Option<KktWitness>> {
    require_convex(p)?;
    require_feasible(p, x)?;
    let r = resolution.max(1);
    for i in 0..=r {
        let mu_l = i as f64 / r as f64;
        let mu_u = 1.0 - mu_l;
        let obj = [(mu_l, p.lower()), (mu_u, p.upper())];
        let budget = mu_l * eps.hi() + mu_u * eps.lo();
        for c in candidates(&obj, p, x)? {
            let room = budget + lambda_g(p, x, &c.lambda) - c.eps0 - c.eps_j.iter().sum::<f64>();
            if room < -TOL_SCALAR {
                continue;
            }
            let w = candidate_witness(&c, mu_l, mu_u, room);
            let report = verify_weak_elu_kkt(p, x, eps, &w)?;
            if report.holds() {
                return Ok(Some(report.witness));
            }
        }
    }
    Ok(None)
}

/// Witness search for the ℰ-LU condition with `μ1 = μ2 = 0`.
pub fn search_elu_witness(p: &Problem, x: &[f64], eps: Epsilon, assume_cc: bool) -> Result<Option<KktWitness>> {
    if !assume_cc {
        return Err(Error::CcNotAsserted);
    }
    require_convex(p)?;
    require_feasible(p, x)?;
    let obj = [(1.0, p.lower()), (1.0, p.upper())];
    for c in candidates(&obj, p, x)? {
        let weighted: f64 = c.lambda.iter().zip(&c.eps_j).map(|(l, e)| l * e).sum();
        let room = eps.hi() + eps.lo() + lambda_g(p, x, &c.lambda) - c.eps0 - weighted;
        if room < -TOL_SCALAR {
            continue;
        }
        let mut w = candidate_witness(&c, 1.0, 1.0, room);
        w.decomposition = w.decomposition.map(|mut d| {
            let n = p.dim();
            d.insert(1, vec![0.0; n]);
            d.insert(2, vec![0.0; n]);
            d
        });
        let report = verify_elu_kkt(p, x, eps, &w, true)?;
        if report.holds() {
            return Ok(Some(report.witness));
        }
    }
    Ok(None)
}

/// Decides whether `x*` is an `ε`-solution of `min φ` over the feasible set
/// of `p` through `0 ∈ ∂_{ε0}φ(x*) + Σ ∂_{εj}(λj gj)(x*)` with
/// `Σ_{j>=0} εj − ε <= Σ λj gj(x*)`.
pub fn scalar_eps_solution_check(phi: &Expr, p: &Problem, x: &[f64], eps: f64) -> Result<KktReport> {
    if !phi.convexity().is_convex() {
        return Err(Error::NotConvex("scalar objective".into()));
    }
    if !p.convexity().constraints_convex() {
        return Err(Error::NotConvex("constraints".into()));
    }
    require_feasible(p, x)?;
    phi.check_dim(p.dim())?;
    let obj = [(1.0, phi)];
    let mut last = None;
    for c in candidates(&obj, p, x)? {
        let room = eps + lambda_g(p, x, &c.lambda) - c.eps0 - c.eps_j.iter().sum::<f64>();
        if room < -TOL_SCALAR {
            continue;
        }
        let w = candidate_witness(&c, 1.0, 0.0, room);
        let report = scalar_report(phi, p, x, eps, &w)?;
        if report.holds() {
            return Ok(report);
        }
        last = Some(report);
    }
    Ok(last.unwrap_or_else(|| KktReport {
        theorem: Theorem::ScalarEps,
        verdict: KktVerdict::Fails,
        witness: KktWitness::new(1.0, 0.0, vec![0.0; p.num_constraints()]),
        inclusion_residual: f64::INFINITY,
        inequality_lhs: f64::INFINITY,
        inequality_rhs: 0.0,
        notes: vec!["no multipliers satisfy the scalar inequality".into()],
    }))
}

fn scalar_report(phi: &Expr, p: &Problem, x: &[f64], eps: f64, w: &KktWitness) -> Result<KktReport> {
    let mut sets = vec![Ellipsoid::eps_subdifferential(&[(1.0, phi)], x, w.eps0)?];
    sets.extend(constraint_sets(p, x, w)?);
    let mut members = vec![(phi.clone(), w.eps0)];
    members.extend(constraint_members(p, w));
    let lhs = w.eps0 + w.eps_j.iter().sum::<f64>() - eps;
    let rhs = lambda_g(p, x, &w.lambda);
    Ok(finish(Theorem::ScalarEps, &sets, members, x, w.clone(), lhs, rhs, vec![]))
}

/// Result of minimizing the quasi residual.
#[derive(Debug, Clone)]
pub struct QuasiKkt {
    pub witness: KktWitness,
    /// `min ‖μL∇fL + μU∇fU + Σ λj∇gj‖ − (μLεU + μUεL)`; may be negative.
    pub margin: f64,
    pub gradient_norm: f64,
    pub radius: f64,
    pub active: Vec<usize>,
    pub mfcq: MfcqResult,
    pub holds: bool,
}

impl fmt::Display for QuasiKkt {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "theorem: {}", Theorem::Quasi)?;
        let act: Vec<String> = self.active.iter().map(|j| format!("g{}", j + 1)).collect();
        writeln!(f, "active constraints: {{{}}}", act.join(", "))?;
        writeln!(f, "MFCQ: {} (min-norm {})", if self.mfcq.holds { "holds" } else { "fails" }, num(self.mfcq.min_norm))?;
        writeln!(f, "muL = {}, muU = {}", num(self.witness.mu_l), num(self.witness.mu_u))?;
        writeln!(f, "lambda = {}", point(&self.witness.lambda))?;
        writeln!(f, "combined gradient norm: {}", num(self.gradient_norm))?;
        writeln!(f, "ball radius: {}", num(self.radius))?;
        writeln!(f, "residual: {}", num(self.witness.residual))?;
        write!(f, "verdict: {}", if self.holds { "HOLDS" } else { "FAILS" })
    }
}

/// Minimizes the quasi residual over `μL + μU = 1`, `λ >= 0` on the
/// active set and `λ = 0` off it.
pub fn quasi_kkt_residual(p: &Problem, x: &[f64], eps: Epsilon) -> Result<QuasiKkt> {
    require_convex(p)?;
    require_feasible(p, x)?;
    let active = p.active_set(x, TOL_ACTIVE)?;
    for (name, e) in [("lower objective", p.lower()), ("upper objective", p.upper())] {
        if let Some(r) = e.nonsmooth_reason(x) {
            return Err(Error::NonSmoothAtPoint(format!("{name}: {r}")));
        }
    }
    let mfcq = p.check_mfcq(x)?;
    let a = p.lower().grad(x);
    let b = p.upper().grad(x);
    let grads: Vec<Vec<f64>> = active.iter().map(|&j| p.constraints()[j].grad(x)).collect();
    let eval = |mu: f64| -> (f64, Vec<f64>, f64) {
        let c: Vec<f64> = a.iter().zip(&b).map(|(u, v)| mu * u + (1.0 - mu) * v).collect();
        let (lam, r) = nnls::nnls(&c, &grads);
        let radius = mu * eps.hi() + (1.0 - mu) * eps.lo();
        (r - radius, lam, r)
    };
    let mut best = (f64::INFINITY, 0.0, vec![], 0.0);
    let consider = |mu: f64, best: &mut (f64, f64, Vec<f64>, f64)| {
        let (h, lam, r) = eval(mu);
        if h < best.0 {
            *best = (h, mu, lam, r);
        }
        h
    };
    let grid: usize = 20;
    let mut grid_best = 0;
    let mut grid_val = f64::INFINITY;
    for i in 0..=grid {
        let h = consider(i as f64 / grid as f64, &mut best);
        if h < grid_val {
            grid_val = h;
            grid_best = i;
        }
    }
    let (mut lo, mut hi) = (grid_best.saturating_sub(1) as f64 / grid as f64, (grid_best + 1).min(grid) as f64 / grid as f64);
    let phi = (5f64.sqrt() - 1.0) / 2.0;
    for _ in 0..80 {
        let m1 = hi - phi * (hi - lo);
        let m2 = lo + phi * (hi - lo);
        if consider(m1, &mut best) <= consider(m2, &mut best) {
            hi = m2;
        } else {
            lo = m1;
        }
    }
    let (margin, mu_l, lam, r) = best;
    let mut lambda = vec![0.0; p.num_constraints()];
    for (k, &j) in active.iter().enumerate() {
        lambda[j] = lam[k];
    }
    let radius = mu_l * eps.hi() + (1.0 - mu_l) * eps.lo();
    let witness = KktWitness { residual: margin.max(0.0), ..KktWitness::new(mu_l, 1.0 - mu_l, lambda) };
    Ok(QuasiKkt { witness, margin, gradient_norm: r, radius, active, mfcq, holds: margin <= TOL_KKT })
}

#[derive(Debug, Clone)]
pub struct Sufficiency {
    pub certified: bool,
    pub tag: &'static str,
    pub cross_check: Option<Certificate>,
}

impl Sufficiency {
    /// Sufficiency certified but the sample oracle found a refuter.
    pub fn disagrees(&self) -> bool {
        self.certified && self.cross_check.as_ref().is_some_and(|c| !c.passed())
    }
}

/// Under strict convexity of both objective bounds, a passing quasi
/// residual certifies `x*` as ℰ-quasi-LU. The optional sample set runs the
/// brute-force oracle as a cross-check.
pub fn quasi_sufficiency_check(
    p: &Problem,
    x: &[f64],
    eps: Epsilon,
    q: &QuasiKkt,
    samples: Option<&SampleSet>,
) -> Result<Sufficiency> {
    if !p.convexity().objective_strictly_convex() {
        return Err(Error::StrictConvexityNotCertified);
    }
    let certified = q.holds;
    let cross_check = samples.map(|s| certify_on_set(SolutionKind::EQuasiLU, p, x, eps, s)).transpose()?;
    let tag = if certified { "E-quasi-LU by sufficiency" } else { "not certified" };
    Ok(Sufficiency { certified, tag, cross_check })
}
