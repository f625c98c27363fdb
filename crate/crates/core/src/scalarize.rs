//! Weighted-sum scalarization `φ = μL fL + (1 − μL) fU` and the bridge from
//! scalar ε-solutions to weakly ℰ-LU solutions.

use std::fmt;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::expr::{norm, Expr};
use crate::kkt::{maximize_dual, scalar_eps_solution_check};
use crate::problem::{Epsilon, Problem, TOL_FEASIBLE};
use crate::report::{csv_row, num, point};

/// Iterations per step-size round of the subgradient method.
const ROUND: usize = 500;

#[derive(Debug, Clone, PartialEq)]
pub struct ScalarSolution {
    pub mu_l: f64,
    pub x: Vec<f64>,
    pub value: f64,
    /// Upper bound on `φ(x) − inf_X φ`; `+∞` when no dual bound is available.
    pub gap: f64,
    pub lower_bound: f64,
    pub penalty: f64,
    pub iterations: usize,
    /// Best feasible objective value after each round.
    pub history: Vec<f64>,
}

fn check_weight(mu_l: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&mu_l) {
        return Err(Error::InvalidArgument(format!("weight muL must lie in [0, 1], got {mu_l}")));
    }
    Ok(())
}

/// `μL fL + (1 − μL) fU` as an expression.
pub fn weighted_objective(p: &Problem, mu_l: f64) -> Result<Expr> {
    check_weight(mu_l)?;
    Expr::nonneg_combination(vec![(mu_l, p.lower().clone()), (1.0 - mu_l, p.upper().clone())])
}

/// Minimizes `φ` over the feasible set by a subgradient method on the exact
/// penalty `φ + ρ Σ max(0, gj)`, with steps `α/√k` restarted from the best
/// point each round. `ρ` doubles after rounds without a feasible iterate.
/// For quadratic-like instances the Lagrangian dual supplies a certified
/// lower bound and a closed-form candidate point.
pub fn weighted_sum_solve(p: &Problem, mu_l: f64, budget: usize) -> Result<ScalarSolution> {
    check_weight(mu_l)?;
    if !p.convexity().all_convex() {
        return Err(Error::NotConvex("weighted-sum solve needs a convex-certified problem".into()));
    }
    let n = p.dim();
    let phi = |x: &[f64]| mu_l * p.lower().value(x) + (1.0 - mu_l) * p.upper().value(x);
    let phi_grad = |x: &[f64]| -> Vec<f64> {
        let (a, b) = (p.lower().grad(x), p.upper().grad(x));
        a.iter().zip(&b).map(|(u, v)| mu_l * u + (1.0 - mu_l) * v).collect()
    };
    let mut rho = 1.0;
    let mut alpha = 1.0;
    let mut x = vec![0.0; n];
    let mut best: Option<(Vec<f64>, f64)> = None;
    let mut history = Vec::new();
    let mut used = 0;
    while used < budget {
        let start = x.clone();
        let iters = ROUND.min(budget - used);
        let mut round_best: Option<(Vec<f64>, f64)> = None;
        for k in 1..=iters {
            let violation = p.max_constraint(&x);
            let val = phi(&x);
            if violation <= TOL_FEASIBLE && best.as_ref().is_none_or(|b| val < b.1) {
                best = Some((x.clone(), val));
            }
            let pen = val + rho * p.constraints().iter().map(|g| g.value(&x).max(0.0)).sum::<f64>();
            if round_best.as_ref().is_none_or(|b| pen < b.1) {
                round_best = Some((x.clone(), pen));
            }
            let mut g = phi_grad(&x);
            for c in p.constraints() {
                if c.value(&x) > 0.0 {
                    crate::expr::axpy(rho, &c.grad(&x), &mut g);
                }
            }
            let gn = norm(&g);
            if gn == 0.0 {
                break;
            }
            let step = alpha / (k as f64).sqrt();
            for (xi, gi) in x.iter_mut().zip(&g) {
                *xi -= step * gi / gn;
            }
        }
        used += iters;
        if best.is_none() {
            rho *= 2.0;
        }
        let (rx, _) = round_best.expect("round ran at least once");
        let travel = 2.0 * alpha * (iters as f64).sqrt();
        let moved = norm(&rx.iter().zip(&start).map(|(a, b)| a - b).collect::<Vec<_>>());
        if moved < 0.25 * travel {
            alpha *= 0.5;
        }
        x = best.as_ref().map_or(rx, |b| b.0.clone());
        history.push(best.as_ref().map_or(f64::INFINITY, |b| b.1));
    }

    let terms = [(mu_l, p.lower()), (1.0 - mu_l, p.upper())];
    let dual = maximize_dual(&terms, p, None);
    if let Some(d) = &dual {
        let xbar: Vec<f64> = d.xbar.iter().copied().collect();
        let v = phi(&xbar);
        if p.feasible(&xbar, TOL_FEASIBLE) && best.as_ref().is_none_or(|b| v < b.1) {
            best = Some((xbar, v));
        }
    }
    let (x, value) = best.ok_or(Error::NoFeasiblePointFound)?;
    let lower_bound = dual.map_or(f64::NEG_INFINITY, |d| d.value);
    let gap = if lower_bound.is_finite() {
        (value - lower_bound).max(0.0) + 1e-9 * (1.0 + value.abs())
    } else {
        f64::INFINITY
    };
    Ok(ScalarSolution { mu_l, x, value, gap, lower_bound, penalty: rho, iterations: used, history })
}

/// Tolerance intervals under which a scalar `s`-solution of the weighted sum
/// is weakly ℰ-LU: any `ℰ` with `μL εU + (1 − μL) εL >= s`.
#[derive(Debug, Clone, PartialEq)]
pub struct Bridge {
    pub mu_l: f64,
    pub scalar_eps: f64,
    /// `ℰ = [s, s]`.
    pub symmetric: Epsilon,
    /// `ℰ = [0, s/μL]`, when `μL > 0`.
    pub lower_extreme: Option<Epsilon>,
}

impl Bridge {
    pub fn options(&self) -> Vec<Epsilon> {
        std::iter::once(self.symmetric).chain(self.lower_extreme).collect()
    }
}

/// Verifies that `x̂` is a `scalar_eps`-solution of the weighted sum and
/// returns the bridged tolerance intervals.
pub fn bridge_to_weak_elu(p: &Problem, x: &[f64], mu_l: f64, scalar_eps: f64) -> Result<Bridge> {
    if !(scalar_eps >= 0.0 && scalar_eps.is_finite()) {
        return Err(Error::Precondition(format!("scalar tolerance {scalar_eps} is not a finite nonnegative number")));
    }
    let phi = weighted_objective(p, mu_l)?;
    let check = scalar_eps_solution_check(&phi, p, x, scalar_eps)
        .map_err(|e| Error::Precondition(format!("cannot verify the scalar eps-solution: {e}")))?;
    if !check.holds() {
        return Err(Error::Precondition(format!("{} is not verified as a {}-solution of the weighted sum", point(x), num(scalar_eps))));
    }
    Ok(bridge_options(mu_l, scalar_eps))
}

pub(crate) fn bridge_options(mu_l: f64, s: f64) -> Bridge {
    Bridge {
        mu_l,
        scalar_eps: s,
        symmetric: Epsilon::new(s, s).expect("finite nonnegative"),
        lower_extreme: (mu_l > 0.0).then(|| Epsilon::new(0.0, s / mu_l).expect("finite nonnegative")),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FrontierPoint {
    pub mu_l: f64,
    pub x: Vec<f64>,
    pub f_lower: f64,
    pub f_upper: f64,
    pub gap: f64,
}

/// One weight of a sweep: a point or the reason the solve failed.
#[derive(Debug, Clone)]
pub struct FrontierRow {
    pub mu_l: f64,
    pub outcome: std::result::Result<FrontierPoint, String>,
}

/// Runs [`weighted_sum_solve`] per weight; rows come back sorted by `μL`.
pub fn frontier_sweep(p: &Problem, weights: &[f64], budget: usize) -> Vec<FrontierRow> {
    let mut ws = weights.to_vec();
    ws.sort_by(|a, b| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal));
    ws.par_iter()
        .map(|&mu_l| {
            let outcome = weighted_sum_solve(p, mu_l, budget)
                .map(|s| FrontierPoint {
                    mu_l,
                    f_lower: p.lower().value(&s.x),
                    f_upper: p.upper().value(&s.x),
                    x: s.x,
                    gap: s.gap,
                })
                .map_err(|e| e.to_string());
            FrontierRow { mu_l, outcome }
        })
        .collect()
}

/// `k + 1` evenly spaced weights in `[0, 1]`.
pub fn even_weights(k: usize) -> Vec<f64> {
    let k = k.max(1);
    (0..=k).map(|i| i as f64 / k as f64).collect()
}

/// CSV with header `muL,x1..xn,fL,fU,gap`; failed weights become `#` lines.
pub fn frontier_csv(rows: &[FrontierRow], n: usize) -> String {
    let mut out = String::from("muL");
    for i in 1..=n {
        out.push_str(&format!(",x{i}"));
    }
    out.push_str(",fL,fU,gap\n");
    for r in rows {
        match &r.outcome {
            Ok(fp) => {
                let mut row = vec![fp.mu_l];
                row.extend(&fp.x);
                row.extend([fp.f_lower, fp.f_upper, fp.gap]);
                out.push_str(&csv_row(&row));
                out.push('\n');
            }
            Err(e) => out.push_str(&format!("# muL={}: {e}\n", num(r.mu_l))),
        }
    }
    out
}

impl fmt::Display for ScalarSolution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "muL = {}", num(self.mu_l))?;
        writeln!(f, "x = {}", point(&self.x))?;
        writeln!(f, "phi(x) = {}", num(self.value))?;
        writeln!(f, "dual lower bound = {}", num(self.lower_bound))?;
        writeln!(f, "gap = {}", num(self.gap))?;
        write!(f, "iterations = {}, final penalty = {}", self.iterations, num(self.penalty))
    }
}
