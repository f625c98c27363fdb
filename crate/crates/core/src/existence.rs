//! Constructive existence procedures on finite ground sets.

use std::fmt;

use rayon::prelude::*;

use crate::certify::{certify_on_set, violates, Certificate, SolutionKind};
use crate::error::{Error, Result};
use crate::interval::Interval;
use crate::problem::{Epsilon, Problem, SampleSet, SampleSpec, TOL_FEASIBLE};
use crate::report::{csv_row, point};

/// Empirical lower bound of `f` over `S ∩ X`.
#[derive(Debug, Clone, PartialEq)]
pub struct LuBound {
    /// `[min fL, min fU]`, or `None` when no sample point is feasible.
    pub bound: Option<Interval>,
    pub argmin_lower: Option<usize>,
    pub argmin_upper: Option<usize>,
    pub feasible: usize,
    pub sample: String,
}

impl fmt::Display for LuBound {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "sample: {} ({} feasible points)", self.sample, self.feasible)?;
        match self.bound {
            Some(b) => writeln!(f, "empirical bound: {b}")?,
            None => writeln!(f, "empirical bound: none (no feasible sample point)")?,
        }
        write!(f, "criterion: f is LU-bounded below on X iff fL is bounded below on X")
    }
}

/// `[min_S fL, min_S fU]` over the feasible sample points.
pub fn lu_bounded_below(p: &Problem, s: &SampleSet) -> Result<LuBound> {
    if s.is_empty() {
        return Err(Error::EmptySample);
    }
    let mut lo: Option<(usize, f64)> = None;
    let mut hi: Option<(usize, f64)> = None;
    let mut feasible = 0;
    for (i, x) in s.points().iter().enumerate() {
        if !p.feasible(x, TOL_FEASIBLE) {
            continue;
        }
        feasible += 1;
        let v = p.interval_value(x)?;
        if lo.is_none_or(|(_, m)| v.lo() < m) {
            lo = Some((i, v.lo()));
        }
        if hi.is_none_or(|(_, m)| v.hi() < m) {
            hi = Some((i, v.hi()));
        }
    }
    let bound = match (lo, hi) {
        (Some((_, a)), Some((_, b))) => Some(Interval::new(a, b)?),
        _ => None,
    };
    Ok(LuBound {
        bound,
        argmin_lower: lo.map(|(i, _)| i),
        argmin_upper: hi.map(|(i, _)| i),
        feasible,
        sample: s.descriptor(),
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct TraceStep {
    pub point: Vec<f64>,
    pub value: Interval,
    /// Position in the sample set; `None` for a starting point outside it.
    pub index: Option<usize>,
}

/// Iterates of a descent or Ekeland run, with the final certificates.
#[derive(Debug, Clone)]
pub struct DescentTrace {
    pub kind: SolutionKind,
    pub eps: Epsilon,
    pub steps: Vec<TraceStep>,
    pub termination: String,
    /// Certificate on the sublevel set `{x ∈ S ∩ X : f(x) ⪯_LU f(x0)}`, when applicable.
    pub sublevel: Option<Certificate>,
    pub full: Certificate,
}

impl DescentTrace {
    /// Number of moves made.
    pub fn len(&self) -> usize {
        self.steps.len() - 1
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn result(&self) -> &[f64] {
        &self.steps.last().expect("trace has a start").point
    }

    /// `ceil((fL(x0) − bL) / εU)` for an analytic lower bound `bL` of fL.
    pub fn iteration_bound(&self, lower_bound: f64) -> Option<u64> {
        (self.eps.hi() > 0.0).then(|| ((self.steps[0].value.lo() - lower_bound) / self.eps.hi()).ceil().max(0.0) as u64)
    }

    /// CSV with columns `step, x1..xn, fL, fU`.
    pub fn to_csv(&self) -> String {
        let n = self.steps[0].point.len();
        let mut out = String::from("step");
        for i in 1..=n {
            out.push_str(&format!(",x{i}"));
        }
        out.push_str(",fL,fU\n");
        for (k, s) in self.steps.iter().enumerate() {
            let mut row = s.point.clone();
            row.push(s.value.lo());
            row.push(s.value.hi());
            out.push_str(&format!("{k},{}\n", csv_row(&row)));
        }
        out
    }
}

impl fmt::Display for DescentTrace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "target: {}", self.kind)?;
        writeln!(f, "E: {}", self.eps)?;
        for (k, s) in self.steps.iter().enumerate() {
            writeln!(f, "step {k}: x = {} f = {}", point(&s.point), s.value)?;
        }
        writeln!(f, "moves: {}", self.len())?;
        writeln!(f, "termination: {}", self.termination)?;
        if let Some(c) = &self.sublevel {
            writeln!(f, "sublevel check: {}", if c.passed() { "PASS" } else { "REFUTED" })?;
        }
        write!(f, "full check: {} on {}", if self.full.passed() { "PASS" } else { "REFUTED" }, self.full.sample)
    }
}

fn first_improver(kind: SolutionKind, p: &Problem, s: &SampleSet, current: &[f64], eps: Epsilon) -> Result<Option<usize>> {
    let test = |x: &Vec<f64>| -> Result<bool> {
        if !p.feasible(x, TOL_FEASIBLE) || x.as_slice() == current {
            return Ok(false);
        }
        violates(kind, p, current, x, eps)
    };
    match s.points().par_iter().position_first(|x| !matches!(test(x), Ok(false))) {
        Some(i) => {
            test(&s.points()[i])?;
            Ok(Some(i))
        }
        None => Ok(None),
    }
}

fn start(p: &Problem, x0: &[f64], s: &SampleSet) -> Result<TraceStep> {
    if x0.len() != p.dim() {
        return Err(Error::DimensionMismatch { expected: p.dim(), got: x0.len() });
    }
    if !p.feasible(x0, TOL_FEASIBLE) {
        return Err(Error::Infeasible { max_violation: p.max_constraint(x0) });
    }
    Ok(TraceStep {
        point: x0.to_vec(),
        value: p.interval_value(x0)?,
        index: s.points().iter().position(|x| x.as_slice() == x0),
    })
}

fn run(kind: SolutionKind, p: &Problem, s: &SampleSet, x0: &[f64], eps: Epsilon) -> Result<Vec<TraceStep>> {
    let mut steps = vec![start(p, x0, s)?];
    for _ in 0..=s.len() {
        let cur = steps.last().expect("nonempty").point.clone();
        match first_improver(kind, p, s, &cur, eps)? {
            Some(i) => {
                let x = s.points()[i].clone();
                let value = p.interval_value(&x)?;
                steps.push(TraceStep { point: x, value, index: Some(i) });
            }
            None => return Ok(steps),
        }
    }
    Err(Error::Precondition("descent revisited a point; the sample set is inconsistent".into()))
}

/// Greedy descent: move to the first `x ∈ S ∩ X` with
/// `f(x) ≺_LU f(current) − ℰ` until none exists.
pub fn descend_to_elu(p: &Problem, s: &SampleSet, x0: &[f64], eps: Epsilon) -> Result<(Vec<f64>, DescentTrace)> {
    if !eps.is_positive() {
        return Err(Error::EpsilonHypothesis("descent needs 0 ≺_LU E"));
    }
    let steps = run(SolutionKind::ELU, p, s, x0, eps)?;
    let x_star = steps.last().expect("nonempty").point.clone();
    let f0 = steps[0].value;
    let sub_points: Vec<Vec<f64>> = s
        .points()
        .iter()
        .filter(|x| p.feasible(x, TOL_FEASIBLE) && p.interval_value(x).map(|v| v.le_lu(f0)).unwrap_or(false))
        .cloned()
        .collect();
    let sub = SampleSet::generate(SampleSpec::Explicit { points: sub_points }, p.dim())?;
    let sublevel = certify_on_set(SolutionKind::ELU, p, &x_star, eps, &sub)?;
    let full = certify_on_set(SolutionKind::ELU, p, &x_star, eps, s)?;
    let termination = format!("no sample point improves on f(x*) - E = {}", steps.last().expect("nonempty").value.sub(eps.interval()));
    Ok((x_star, DescentTrace { kind: SolutionKind::ELU, eps, steps, termination, sublevel: Some(sublevel), full }))
}

/// Finite Ekeland selection: move to the first `x ≠ current` in `S ∩ X`
/// with `F(x) ≤ F(current) − ‖x − current‖·(εU, εL)` and one strict
/// component, until none exists.
pub fn ekeland_quasi(p: &Problem, s: &SampleSet, eps: Epsilon, x0: &[f64]) -> Result<(Vec<f64>, DescentTrace)> {
    if !eps.is_strictly_positive() {
        return Err(Error::EpsilonHypothesis("Ekeland selection needs both endpoints of E positive"));
    }
    let steps = run(SolutionKind::EQuasiLU, p, s, x0, eps)?;
    let x_star = steps.last().expect("nonempty").point.clone();
    let full = certify_on_set(SolutionKind::EQuasiLU, p, &x_star, eps, s)?;
    let termination = format!("no sample point satisfies the distance-penalized dominance at {}", point(&x_star));
    Ok((x_star, DescentTrace { kind: SolutionKind::EQuasiLU, eps, steps, termination, sublevel: None, full }))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn quad_free() -> Problem {
        Problem::from_strs("q", 1, "x1^2", "2*x1^2", &[]).unwrap()
    }

    #[test]
    fn bound_examples() {
        let p = quad_free();
        let s = SampleSet::grid(-1.0, 1.0, 20, 1).unwrap();
        let b = lu_bounded_below(&p, &s).unwrap();
        assert_eq!(b.bound, Some(Interval::ZERO));
        let c = Problem::from_strs("c", 1, "1", "3", &[]).unwrap();
        assert_eq!(lu_bounded_below(&c, &s).unwrap().bound, Some(Interval::new(1.0, 3.0).unwrap()));
        let e = SampleSet::explicit(vec![], 1).unwrap();
        assert!(matches!(lu_bounded_below(&p, &e), Err(Error::EmptySample)));
        let g = Problem::from_strs("g", 1, "x1", "x1", &["5 - x1"]).unwrap();
        assert_eq!(lu_bounded_below(&g, &s).unwrap().bound, None);
    }

    #[test]
    fn descent_bound_example() {
        let p = quad_free();
        let s = SampleSet::grid(-2.0, 2.0, 40, 1).unwrap();
        let e = Epsilon::new(0.5, 1.0).unwrap();
        let (x, t) = descend_to_elu(&p, &s, &[2.0], e).unwrap();
        assert!(t.len() as u64 <= t.iteration_bound(0.0).unwrap());
        assert_eq!(t.iteration_bound(0.0), Some(4));
        for w in t.steps.windows(2) {
            assert!(w[0].value.lo() - w[1].value.lo() >= 1.0);
            assert!(w[0].value.hi() - w[1].value.hi() >= 0.5);
        }
        assert!(t.full.passed() && t.sublevel.as_ref().unwrap().passed());
        assert!(x[0].abs() <= 2.0);
        assert!(t.to_csv().starts_with("step,x1,fL,fU\n0,2,4,8\n"));
    }

    #[test]
    fn descent_rejects_zero_eps_and_stays_put_at_minimum() {
        let p = quad_free();
        let s = SampleSet::grid(-1.0, 1.0, 10, 1).unwrap();
        assert!(matches!(descend_to_elu(&p, &s, &[1.0], Epsilon::zero()), Err(Error::EpsilonHypothesis(_))));
        let (_, t) = descend_to_elu(&p, &s, &[0.0], Epsilon::new(0.1, 0.1).unwrap()).unwrap();
        assert!(t.is_empty());
    }

    #[test]
    fn ekeland_examples() {
        let p = quad_free();
        let s = SampleSet::grid(-1.0, 1.0, 200, 1).unwrap();
        let e = Epsilon::new(0.5, 0.5).unwrap();
        let (x, t) = ekeland_quasi(&p, &s, e, &[1.0]).unwrap();
        assert!(t.full.passed());
        assert!(x[0].abs() <= 0.5);
        let single = SampleSet::explicit(vec![vec![0.3]], 1).unwrap();
        let (x, _) = ekeland_quasi(&p, &single, e, &[0.3]).unwrap();
        assert_eq!(x, vec![0.3]);
        assert!(ekeland_quasi(&p, &s, Epsilon::new(0.0, 1.0).unwrap(), &[1.0]).is_err());
    }
}
