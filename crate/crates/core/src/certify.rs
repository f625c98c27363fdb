//! Sample-relative certification of the six LU solution concepts.
//!
//! Every certificate is relative to a [`SampleSet`]: `PassOnSample` means no
//! feasible sample point violates the definition, `Refuted` carries the first
//! violator in sample order.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::expr::norm;
use crate::interval::Interval;
use crate::problem::{Epsilon, Problem, SampleSet, TOL_FEASIBLE};
use crate::report::{num, point};

/// Margin a strict comparison must clear before it counts as a violation.
pub const TOL_VIOLATE: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SolutionKind {
    LU,
    WeakLU,
    ELU,
    WeakELU,
    EQuasiLU,
    WeakEQuasiLU,
}

impl SolutionKind {
    pub const ALL: [SolutionKind; 6] = [
        SolutionKind::LU,
        SolutionKind::WeakLU,
        SolutionKind::ELU,
        SolutionKind::WeakELU,
        SolutionKind::EQuasiLU,
        SolutionKind::WeakEQuasiLU,
    ];

    /// Short name used on the command line.
    pub fn cli_name(self) -> &'static str {
        match self {
            SolutionKind::LU => "lu",
            SolutionKind::WeakLU => "wlu",
            SolutionKind::ELU => "elu",
            SolutionKind::WeakELU => "welu",
            SolutionKind::EQuasiLU => "eq",
            SolutionKind::WeakEQuasiLU => "weq",
        }
    }

    pub fn is_weak(self) -> bool {
        matches!(self, SolutionKind::WeakLU | SolutionKind::WeakELU | SolutionKind::WeakEQuasiLU)
    }

    pub fn is_quasi(self) -> bool {
        matches!(self, SolutionKind::EQuasiLU | SolutionKind::WeakEQuasiLU)
    }

    pub fn uses_eps(self) -> bool {
        !matches!(self, SolutionKind::LU | SolutionKind::WeakLU)
    }

    /// The weak counterpart (identity on weak kinds).
    pub fn weak(self) -> SolutionKind {
        match self {
            SolutionKind::LU => SolutionKind::WeakLU,
            SolutionKind::ELU => SolutionKind::WeakELU,
            SolutionKind::EQuasiLU => SolutionKind::WeakEQuasiLU,
            k => k,
        }
    }
}

impl fmt::Display for SolutionKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SolutionKind::LU => "LU",
            SolutionKind::WeakLU => "weakly LU",
            SolutionKind::ELU => "E-LU",
            SolutionKind::WeakELU => "weakly E-LU",
            SolutionKind::EQuasiLU => "E-quasi-LU",
            SolutionKind::WeakEQuasiLU => "weakly E-quasi-LU",
        })
    }
}

impl FromStr for SolutionKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        SolutionKind::ALL
            .into_iter()
            .find(|k| k.cli_name() == s)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown kind `{s}` (expected lu, wlu, elu, welu, eq, weq)")))
    }
}

/// `‖x − y‖₂`.
pub fn distance(x: &[f64], y: &[f64]) -> f64 {
    let d: Vec<f64> = x.iter().zip(y).map(|(a, b)| a - b).collect();
    norm(&d)
}

/// `A ≺_LU B` where the strict part must clear `tol`.
fn lt_lu_margin(a: Interval, b: Interval, tol: f64) -> bool {
    let (dl, du) = (b.lo() - a.lo(), b.hi() - a.hi());
    dl >= 0.0 && du >= 0.0 && (dl > tol || du > tol)
}

/// `A ≺ˢ_LU B` with both gaps clearing `tol`.
fn lt_strict_lu_margin(a: Interval, b: Interval, tol: f64) -> bool {
    b.lo() - a.lo() > tol && b.hi() - a.hi() > tol
}

/// The interval `x` must dominate: `f(x*) − ℰ`, `f(x*) − ‖x − x*‖ℰ`, or `f(x*)`.
fn target(kind: SolutionKind, fx_star: Interval, eps: Epsilon, dist: f64) -> Interval {
    match kind {
        SolutionKind::LU | SolutionKind::WeakLU => fx_star,
        SolutionKind::ELU | SolutionKind::WeakELU => fx_star.sub(eps.interval()),
        SolutionKind::EQuasiLU | SolutionKind::WeakEQuasiLU => fx_star.sub(eps.interval().scale(dist)),
    }
}

/// Does `x` witness that `x*` is not a `kind` solution, with margin `tol`?
/// Feasibility of `x` is the caller's responsibility.
pub fn violates_with_tol(kind: SolutionKind, p: &Problem, x_star: &[f64], x: &[f64], eps: Epsilon, tol: f64) -> Result<bool> {
    let fs = p.interval_value(x_star)?;
    let fx = p.interval_value(x)?;
    Ok(violates_values(kind, fs, fx, eps, distance(x, x_star), tol))
}

fn violates_values(kind: SolutionKind, fs: Interval, fx: Interval, eps: Epsilon, dist: f64, tol: f64) -> bool {
    let t = target(kind, fs, eps, dist);
    if kind.is_weak() {
        lt_strict_lu_margin(fx, t, tol)
    } else {
        lt_lu_margin(fx, t, tol)
    }
}

/// [`violates_with_tol`] at the default margin.
pub fn violates(kind: SolutionKind, p: &Problem, x_star: &[f64], x: &[f64], eps: Epsilon) -> Result<bool> {
    violates_with_tol(kind, p, x_star, x, eps, TOL_VIOLATE)
}

/// The same test phrased for the biobjective map `F = (fL, fU)`:
/// `F(x) ∈ F(x*) − d·(εU, εL) − K` with `K = ℝ²₊∖{0}` or `int ℝ²₊`.
pub fn violates_biobjective(kind: SolutionKind, p: &Problem, x_star: &[f64], x: &[f64], eps: Epsilon, tol: f64) -> bool {
    let f = p.biobjective();
    let (fs, fx) = (f(x_star), f(x));
    biobjective_values(kind, fs, fx, eps, distance(x, x_star), tol)
}

fn biobjective_values(kind: SolutionKind, fs: [f64; 2], fx: [f64; 2], eps: Epsilon, dist: f64, tol: f64) -> bool {
    let shift = match kind {
        SolutionKind::LU | SolutionKind::WeakLU => [0.0, 0.0],
        SolutionKind::ELU | SolutionKind::WeakELU => eps.eps_vec(),
        SolutionKind::EQuasiLU | SolutionKind::WeakEQuasiLU => {
            let e = eps.eps_vec();
            [dist * e[0], dist * e[1]]
        }
    };
    // cone element y with F(x) = F(x*) − shift − y
    let y = [(fs[0] - shift[0]) - fx[0], (fs[1] - shift[1]) - fx[1]];
    if kind.is_weak() {
        y.iter().all(|c| *c > tol)
    } else {
        y.iter().all(|c| *c >= 0.0) && y.iter().any(|c| *c > tol)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    PassOnSample,
    Refuted,
}

/// Which test produced a certificate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Route {
    Interval,
    Biobjective,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Refuter {
    /// Position in the sample set.
    pub index: usize,
    pub point: Vec<f64>,
    pub value: Interval,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Certificate {
    pub kind: SolutionKind,
    pub route: Route,
    pub verdict: Verdict,
    pub refuter: Option<Refuter>,
    pub x_star: Vec<f64>,
    pub value: Interval,
    pub eps: Epsilon,
    pub sample: String,
    pub feasible_checked: usize,
    pub tol: f64,
}

impl Certificate {
    pub fn passed(&self) -> bool {
        self.verdict == Verdict::PassOnSample
    }

    pub fn refuter_index(&self) -> Option<usize> {
        self.refuter.as_ref().map(|r| r.index)
    }
}

impl fmt::Display for Certificate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let route = match self.route {
            Route::Interval => "interval order",
            Route::Biobjective => "biobjective cone",
        };
        writeln!(f, "kind: {}", self.kind)?;
        writeln!(f, "route: {route}")?;
        writeln!(f, "x*: {}", point(&self.x_star))?;
        writeln!(f, "f(x*): {}", self.value)?;
        if self.kind.uses_eps() {
            writeln!(f, "E: {}", self.eps)?;
        }
        writeln!(f, "sample: {} ({} feasible points checked)", self.sample, self.feasible_checked)?;
        writeln!(f, "tolerance: {}", num(self.tol))?;
        match (&self.verdict, &self.refuter) {
            (Verdict::Refuted, Some(r)) => {
                writeln!(f, "verdict: REFUTED")?;
                write!(f, "refuter: #{} {} with f = {}", r.index, point(&r.point), r.value)
            }
            _ => write!(f, "verdict: PASS (relative to the sample set)"),
        }
    }
}

fn scan(
    kind: SolutionKind,
    route: Route,
    p: &Problem,
    x_star: &[f64],
    eps: Epsilon,
    s: &SampleSet,
    tol: f64,
) -> Result<Certificate> {
    if !p.feasible(x_star, TOL_FEASIBLE) {
        if x_star.len() != p.dim() {
            return Err(Error::DimensionMismatch { expected: p.dim(), got: x_star.len() });
        }
        return Err(Error::Infeasible { max_violation: p.max_constraint(x_star) });
    }
    let fs = p.interval_value(x_star)?;
    let f = p.biobjective();
    let fs_vec = f(x_star);
    let pts = s.points();
    // Some(true) marks a violator; errors short-circuit as well.
    let test = |x: &Vec<f64>| -> Result<bool> {
        if !p.feasible(x, TOL_FEASIBLE) {
            return Ok(false);
        }
        let dist = distance(x, x_star);
        Ok(match route {
            Route::Interval => violates_values(kind, fs, p.interval_value(x)?, eps, dist, tol),
            Route::Biobjective => biobjective_values(kind, fs_vec, f(x), eps, dist, tol),
        })
    };
    let hit = pts.par_iter().position_first(|x| !matches!(test(x), Ok(false)));
    let refuter = match hit {
        Some(i) => {
            test(&pts[i])?;
            Some(Refuter { index: i, point: pts[i].clone(), value: p.interval_value(&pts[i])? })
        }
        None => None,
    };
    let limit = refuter.as_ref().map_or(pts.len(), |r| r.index + 1);
    let feasible_checked = pts[..limit].par_iter().filter(|x| p.feasible(x, TOL_FEASIBLE)).count();
    Ok(Certificate {
        kind,
        route,
        verdict: if refuter.is_some() { Verdict::Refuted } else { Verdict::PassOnSample },
        refuter,
        x_star: x_star.to_vec(),
        value: fs,
        eps: if kind.uses_eps() { eps } else { Epsilon::zero() },
        sample: s.descriptor(),
        feasible_checked,
        tol,
    })
}

/// Scans `S ∩ X` in sample order with the interval-order definitions.
pub fn certify_on_set(kind: SolutionKind, p: &Problem, x_star: &[f64], eps: Epsilon, s: &SampleSet) -> Result<Certificate> {
    scan(kind, Route::Interval, p, x_star, eps, s, TOL_VIOLATE)
}

pub fn certify_on_set_with_tol(
    kind: SolutionKind,
    p: &Problem,
    x_star: &[f64],
    eps: Epsilon,
    s: &SampleSet,
    tol: f64,
) -> Result<Certificate> {
    scan(kind, Route::Interval, p, x_star, eps, s, tol)
}

/// Same scan through approximate efficiency of `F = (fL, fU)`.
pub fn certify_via_biobjective(kind: SolutionKind, p: &Problem, x_star: &[f64], eps: Epsilon, s: &SampleSet) -> Result<Certificate> {
    scan(kind, Route::Biobjective, p, x_star, eps, s, TOL_VIOLATE)
}

pub fn certify_via_biobjective_with_tol(
    kind: SolutionKind,
    p: &Problem,
    x_star: &[f64],
    eps: Epsilon,
    s: &SampleSet,
    tol: f64,
) -> Result<Certificate> {
    scan(kind, Route::Biobjective, p, x_star, eps, s, tol)
}

/// Outcome of testing the characterization of ℰ-LU solutions through
/// `X(x*, ℰ) = {x : f(x) ⪯_LU f(x*) − ℰ}`.
#[derive(Debug, Clone, PartialEq)]
pub enum XSetOutcome {
    EmptyIntersection,
    EqualityHolds { members: usize },
    EqualityFails { index: usize, point: Vec<f64>, gap: f64 },
}

/// Builds `X(x*, ℰ) ∩ X ∩ S` and checks
/// `fL(x) + fU(x) = fL(x*) + fU(x*) − εU − εL` on each member.
pub fn lemma_x_set_check(p: &Problem, x_star: &[f64], eps: Epsilon, s: &SampleSet) -> Result<XSetOutcome> {
    if !p.feasible(x_star, TOL_FEASIBLE) {
        return Err(Error::Infeasible { max_violation: p.max_constraint(x_star) });
    }
    let t = p.interval_value(x_star)?.sub(eps.interval());
    let mut members = 0;
    for (i, x) in s.points().iter().enumerate() {
        if !p.feasible(x, TOL_FEASIBLE) {
            continue;
        }
        let fx = p.interval_value(x)?;
        if !fx.le_lu(t) {
            continue;
        }
        members += 1;
        let gap = (t.lo() - fx.lo()) + (t.hi() - fx.hi());
        if gap > 2.0 * TOL_VIOLATE {
            return Ok(XSetOutcome::EqualityFails { index: i, point: x.clone(), gap });
        }
    }
    Ok(if members == 0 { XSetOutcome::EmptyIntersection } else { XSetOutcome::EqualityHolds { members } })
}

/// Seeded multistart compass search for a point violating `kind` at `x*`.
/// Any returned point satisfies [`violates`] and is feasible; `None` is
/// inconclusive.
pub fn refute_search(
    kind: SolutionKind,
    p: &Problem,
    x_star: &[f64],
    eps: Epsilon,
    budget: usize,
    seed: u64,
) -> Result<Option<Vec<f64>>> {
    let fs = p.interval_value(x_star)?;
    let n = p.dim();
    let score = |x: &[f64]| -> f64 {
        let fx = [p.lower().value(x), p.upper().value(x)];
        let t = target(kind, fs, eps, distance(x, x_star));
        let margin = (t.lo() - fx[0]).min(t.hi() - fx[1]);
        let infeas = p.max_constraint(x).max(0.0);
        if margin.is_finite() {
            margin - 1e3 * infeas
        } else {
            f64::NEG_INFINITY
        }
    };
    let accept = |x: &[f64]| -> bool {
        p.feasible(x, TOL_FEASIBLE) && matches!(violates(kind, p, x_star, x, eps), Ok(true))
    };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let scale = norm(x_star).max(1.0);
    let starts = 16usize;
    let per_start = (budget / starts).max(4 * n + 1);
    for s in 0..starts {
        let mut x: Vec<f64> = if s == 0 {
            x_star.to_vec()
        } else {
            let r = scale * 2f64.powi(s as i32 % 4 - 1);
            x_star.iter().map(|v| v + rng.gen_range(-r..=r)).collect()
        };
        if accept(&x) {
            return Ok(Some(x));
        }
        let mut best = score(&x);
        let mut step = 0.5 * scale;
        let mut evals = 0;
        while evals < per_start && step > 1e-12 * scale {
            let mut moved = false;
            'dirs: for i in 0..n {
                for sign in [1.0, -1.0] {
                    let mut y = x.clone();
                    y[i] += sign * step;
                    evals += 1;
                    let v = score(&y);
                    if v > best {
                        best = v;
                        x = y;
                        moved = true;
                        if accept(&x) {
                            return Ok(Some(x));
                        }
                        break 'dirs;
                    }
                }
            }
            if moved {
                step *= 1.5;
            } else {
                step *= 0.5;
            }
        }
    }
    Ok(None)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ex31() -> Problem {
        Problem::from_strs("ex31", 2, "x1^2 + (x1*x2 - 1)^2", "2*x1^2 + (x1*x2 - 1)^2", &[]).unwrap()
    }

    fn quad() -> Problem {
        Problem::from_strs("quad", 1, "x1^2", "2*x1^2", &["1 - x1"]).unwrap()
    }

    fn eps(lo: f64, hi: f64) -> Epsilon {
        Epsilon::new(lo, hi).unwrap()
    }

    #[test]
    fn kind_names_round_trip() {
        for k in SolutionKind::ALL {
            assert_eq!(k.cli_name().parse::<SolutionKind>().unwrap(), k);
        }
        assert!("x".parse::<SolutionKind>().is_err());
    }

    #[test]
    fn weak_elu_violation_example() {
        let p = ex31();
        let e = eps(0.1, 0.5);
        assert!(violates(SolutionKind::WeakELU, &p, &[1.0, 1.0], &[0.1, 10.0], e).unwrap());
        assert!(violates_biobjective(SolutionKind::WeakELU, &p, &[1.0, 1.0], &[0.1, 10.0], e, TOL_VIOLATE));
    }

    #[test]
    fn self_never_violates_quasi() {
        let p = quad();
        for k in SolutionKind::ALL {
            assert!(!violates(k, &p, &[2.0], &[2.0], eps(0.3, 0.7)).unwrap());
        }
    }

    #[test]
    fn zero_eps_matches_exact() {
        let p = ex31();
        let s = SampleSet::grid(-2.0, 2.0, 20, 2).unwrap();
        for xs in [[1.0, 1.0], [0.0, 0.0], [0.2, 4.0]] {
            let a = certify_on_set(SolutionKind::ELU, &p, &xs, Epsilon::zero(), &s).unwrap();
            let b = certify_on_set(SolutionKind::LU, &p, &xs, Epsilon::zero(), &s).unwrap();
            assert_eq!(a.verdict, b.verdict);
            assert_eq!(a.refuter, b.refuter);
        }
    }

    #[test]
    fn sequence_family_refutes_weak_lu() {
        let p = ex31();
        let mut pts: Vec<Vec<f64>> = (1..=100).map(|k| vec![1.0 / k as f64, k as f64]).collect();
        pts.push(vec![1.0, 1.0]);
        let s = SampleSet::explicit(pts, 2).unwrap();
        let c = certify_on_set(SolutionKind::WeakLU, &p, &[1.0, 1.0], Epsilon::zero(), &s).unwrap();
        assert_eq!(c.verdict, Verdict::Refuted);
        assert_eq!(c.refuter_index(), Some(1));
    }

    #[test]
    fn one_dimensional_pass() {
        let p = quad();
        let s = SampleSet::grid(1.0, 3.0, 200, 1).unwrap();
        for k in SolutionKind::ALL {
            let c = certify_on_set(k, &p, &[1.0], Epsilon::zero(), &s).unwrap();
            assert!(c.passed(), "{k}");
        }
    }

    #[test]
    fn empty_feasible_sample_passes() {
        let p = quad();
        let s = SampleSet::grid(-1.0, 0.5, 10, 1).unwrap();
        let c = certify_on_set(SolutionKind::LU, &p, &[2.0], Epsilon::zero(), &s).unwrap();
        assert!(c.passed());
        assert_eq!(c.feasible_checked, 0);
    }

    #[test]
    fn infeasible_x_star_is_an_error() {
        let p = quad();
        let s = SampleSet::grid(1.0, 3.0, 4, 1).unwrap();
        assert!(matches!(certify_on_set(SolutionKind::LU, &p, &[0.0], Epsilon::zero(), &s), Err(Error::Infeasible { .. })));
    }

    #[test]
    fn x_set_examples() {
        let p = Problem::from_strs("lin", 1, "x1", "x1 + 1", &["-x1", "x1 - 1"]).unwrap();
        let s = SampleSet::grid(0.0, 1.0, 100, 1).unwrap();
        let e = eps(1.0, 1.0);
        assert_eq!(lemma_x_set_check(&p, &[1.0], e, &s).unwrap(), XSetOutcome::EqualityHolds { members: 1 });
        assert_eq!(lemma_x_set_check(&p, &[0.5], e, &s).unwrap(), XSetOutcome::EmptyIntersection);
        let c = Problem::from_strs("const", 1, "1", "2", &[]).unwrap();
        let s = SampleSet::grid(-1.0, 1.0, 10, 1).unwrap();
        assert_eq!(lemma_x_set_check(&c, &[0.0], eps(5.0, 5.0), &s).unwrap(), XSetOutcome::EmptyIntersection);
        let q = quad();
        let s = SampleSet::grid(1.0, 3.0, 20, 1).unwrap();
        match lemma_x_set_check(&q, &[3.0], eps(0.1, 0.1), &s).unwrap() {
            XSetOutcome::EqualityFails { index, .. } => {
                let cert = certify_on_set(SolutionKind::ELU, &q, &[3.0], eps(0.1, 0.1), &s).unwrap();
                assert_eq!(cert.verdict, Verdict::Refuted);
                assert!(cert.refuter_index().unwrap() <= index);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn refute_search_examples() {
        let p = Problem::from_strs("free", 1, "x1^2", "2*x1^2", &[]).unwrap();
        let r = refute_search(SolutionKind::ELU, &p, &[2.0], eps(0.01, 0.01), 2000, 1).unwrap().unwrap();
        assert!(violates(SolutionKind::ELU, &p, &[2.0], &r, eps(0.01, 0.01)).unwrap());
        assert!(refute_search(SolutionKind::LU, &quad(), &[1.0], Epsilon::zero(), 2000, 1).unwrap().is_none());
        let e = ex31();
        let r = refute_search(SolutionKind::WeakLU, &e, &[0.01, 100.0], Epsilon::zero(), 20000, 3).unwrap().unwrap();
        assert!(violates(SolutionKind::WeakLU, &e, &[0.01, 100.0], &r, Epsilon::zero()).unwrap());
    }
}
