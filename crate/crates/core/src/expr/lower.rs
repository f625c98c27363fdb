//! Lowering from the syntax tree onto the atom set.
//!
//! Polynomial subtrees of degree at most two collapse into a single
//! `Constant`/`Affine`/`Quadratic` atom; everything else maps structurally.

use std::collections::BTreeMap;

use nalgebra::{DMatrix, DVector};

use super::parse::{Ast, Func, Pos};
use super::{Affine, AffineMap, Expr, Quadratic};
use crate::error::{Error, Result};

/// Monomials keyed by their sorted 0-based variable indices.
#[derive(Debug, Clone, Default)]
struct Poly(BTreeMap<Vec<usize>, f64>);

const MAX_EXPANDED_DEGREE: usize = 8;

impl Poly {
    fn constant(c: f64) -> Poly {
        let mut m = BTreeMap::new();
        m.insert(Vec::new(), c);
        Poly(m).pruned()
    }

    fn var(i: usize) -> Poly {
        let mut m = BTreeMap::new();
        m.insert(vec![i], 1.0);
        Poly(m)
    }

    fn pruned(mut self) -> Poly {
        self.0.retain(|_, c| *c != 0.0);
        self
    }

    fn degree(&self) -> usize {
        self.0.keys().map(Vec::len).max().unwrap_or(0)
    }

    fn constant_value(&self) -> Option<f64> {
        (self.degree() == 0).then(|| self.0.get(&Vec::new()).copied().unwrap_or(0.0))
    }

    fn add(mut self, other: &Poly, sign: f64) -> Poly {
        for (k, c) in &other.0 {
            *self.0.entry(k.clone()).or_insert(0.0) += sign * c;
        }
        self.pruned()
    }

    fn mul(&self, other: &Poly) -> Option<Poly> {
        if self.degree() + other.degree() > MAX_EXPANDED_DEGREE {
            return None;
        }
        let mut out = BTreeMap::new();
        for (ka, ca) in &self.0 {
            for (kb, cb) in &other.0 {
                let mut k: Vec<usize> = ka.iter().chain(kb).copied().collect();
                k.sort_unstable();
                *out.entry(k).or_insert(0.0) += ca * cb;
            }
        }
        Some(Poly(out).pruned())
    }

    fn to_expr(&self, n: usize) -> Expr {
        debug_assert!(self.degree() <= 2);
        let c = self.0.get(&Vec::new()).copied().unwrap_or(0.0);
        if self.degree() == 0 {
            return Expr::Constant(c);
        }
        let mut b = vec![0.0; n];
        let mut q = DMatrix::zeros(n, n);
        for (k, v) in &self.0 {
            match k.as_slice() {
                [i] => b[*i] += v,
                [i, j] if i == j => q[(*i, *i)] += 2.0 * v,
                [i, j] => {
                    q[(*i, *j)] += v;
                    q[(*j, *i)] += v;
                }
                _ => {}
            }
        }
        if self.degree() == 1 {
            Expr::Affine(Affine::new(b, c))
        } else {
            Expr::Quadratic(Quadratic { q, b: DVector::from_vec(b), c })
        }
    }

    fn to_affine(&self, n: usize) -> Option<Affine> {
        if self.degree() > 1 {
            return None;
        }
        let mut a = vec![0.0; n];
        for (k, v) in &self.0 {
            if let [i] = k.as_slice() {
                a[*i] += v;
            }
        }
        Some(Affine::new(a, self.0.get(&Vec::new()).copied().unwrap_or(0.0)))
    }
}

/// Polynomial expansion, or `None` when the subtree is not a polynomial (or
/// would expand beyond [`MAX_EXPANDED_DEGREE`]).
fn poly(ast: &Ast) -> Option<Poly> {
    match ast {
        Ast::Num(v) => Some(Poly::constant(*v)),
        Ast::Var(k, _) => Some(Poly::var(k - 1)),
        Ast::Neg(e) => Some(Poly::default().add(&poly(e)?, -1.0)),
        Ast::Add(a, b) => Some(poly(a)?.add(&poly(b)?, 1.0)),
        Ast::Sub(a, b) => Some(poly(a)?.add(&poly(b)?, -1.0)),
        Ast::Mul(a, b) => poly(a)?.mul(&poly(b)?),
        Ast::Pow(e, k) => pow(poly(e)?, *k),
        Ast::Call(Func::Sq, args, _) => pow(poly(&args[0])?, 2),
        Ast::Call(..) => None,
    }
}

fn pow(base: Poly, k: u32) -> Option<Poly> {
    if base.degree() * k as usize > MAX_EXPANDED_DEGREE {
        return None;
    }
    (0..k).try_fold(Poly::constant(1.0), |acc, _| acc.mul(&base))
}

fn check_vars(ast: &Ast, n: usize) -> Result<()> {
    match ast {
        Ast::Var(k, pos) if *k > n => Err(Error::Parse {
            line: pos.line,
            col: pos.col,
            msg: format!("variable x{k} exceeds problem dimension {n}"),
        }),
        Ast::Num(_) | Ast::Var(..) => Ok(()),
        Ast::Neg(e) | Ast::Pow(e, _) => check_vars(e, n),
        Ast::Add(a, b) | Ast::Sub(a, b) | Ast::Mul(a, b) => {
            check_vars(a, n)?;
            check_vars(b, n)
        }
        Ast::Call(_, args, _) => args.iter().try_for_each(|a| check_vars(a, n)),
    }
}

pub(super) fn lower(ast: &Ast, n: usize) -> Result<Expr> {
    check_vars(ast, n)?;
    lower_checked(ast, n)
}

fn low_degree(ast: &Ast) -> Option<Poly> {
    poly(ast).filter(|p| p.degree() <= 2)
}

fn lower_checked(ast: &Ast, n: usize) -> Result<Expr> {
    if let Some(p) = low_degree(ast) {
        return Ok(p.to_expr(n));
    }
    match ast {
        Ast::Add(..) | Ast::Sub(..) => {
            let mut terms = Vec::new();
            flatten_sum(ast, 1.0, &mut terms);
            let mut quad = Poly::default();
            let mut rest: Vec<(f64, Expr)> = Vec::new();
            for (sign, t) in terms {
                match low_degree(t) {
                    Some(p) => quad = quad.add(&p, sign),
                    None => rest.push((1.0, lower_checked(t, n)?.scaled(sign))),
                }
            }
            let mut out: Vec<(f64, Expr)> = Vec::new();
            if !quad.0.is_empty() {
                out.push((1.0, quad.to_expr(n)));
            }
            for (w, e) in rest {
                match e {
                    Expr::NonnegCombination(inner) => out.extend(inner.into_iter().map(|(v, e)| (w * v, e))),
                    e => out.push((w, e)),
                }
            }
            Ok(Expr::NonnegCombination(out))
        }
        Ast::Neg(e) => Ok(lower_checked(e, n)?.scaled(-1.0)),
        Ast::Mul(a, b) => {
            if let Some(c) = poly(a).and_then(|p| p.constant_value()) {
                return Ok(lower_checked(b, n)?.scaled(c));
            }
            if let Some(c) = poly(b).and_then(|p| p.constant_value()) {
                return Ok(lower_checked(a, n)?.scaled(c));
            }
            Ok(Expr::Product(Box::new(lower_checked(a, n)?), Box::new(lower_checked(b, n)?)))
        }
        Ast::Pow(e, k) => lower_power(e, *k, n),
        Ast::Call(Func::Sq, args, _) => lower_power(&args[0], 2, n),
        Ast::Call(Func::Abs, args, _) => match poly(&args[0]).and_then(|p| p.to_affine(n)) {
            Some(a) => Ok(Expr::Norm2OfAffineMap(AffineMap { rows: vec![a] })),
            None => {
                let inner = lower_checked(&args[0], n)?;
                Ok(Expr::MaxOf(vec![inner.clone(), inner.scaled(-1.0)]))
            }
        },
        Ast::Call(Func::Norm2, args, pos) => {
            let rows = args
                .iter()
                .map(|a| poly(a).and_then(|p| p.to_affine(n)))
                .collect::<Option<Vec<_>>>()
                .ok_or_else(|| err_at(*pos, "norm2 arguments must be affine"))?;
            Ok(Expr::Norm2OfAffineMap(AffineMap { rows }))
        }
        Ast::Call(Func::Max, args, _) => {
            if args.len() == 1 {
                return lower_checked(&args[0], n);
            }
            Ok(Expr::MaxOf(args.iter().map(|a| lower_checked(a, n)).collect::<Result<_>>()?))
        }
        Ast::Num(_) | Ast::Var(..) => unreachable!("polynomial leaves are handled above"),
    }
}

fn lower_power(base: &Ast, k: u32, n: usize) -> Result<Expr> {
    match k {
        0 => Ok(Expr::Constant(1.0)),
        1 => lower_checked(base, n),
        _ => match poly(base).and_then(|p| p.to_affine(n)) {
            Some(a) if k == 2 => Ok(Expr::SquareOfAffine(a)),
            _ => Ok(Expr::Power(Box::new(lower_checked(base, n)?), k)),
        },
    }
}

fn flatten_sum<'a>(ast: &'a Ast, sign: f64, out: &mut Vec<(f64, &'a Ast)>) {
    match ast {
        Ast::Add(a, b) => {
            flatten_sum(a, sign, out);
            flatten_sum(b, sign, out);
        }
        Ast::Sub(a, b) => {
            flatten_sum(a, sign, out);
            flatten_sum(b, -sign, out);
        }
        other => out.push((sign, other)),
    }
}

fn err_at(pos: Pos, msg: &str) -> Error {
    Error::Parse { line: pos.line, col: pos.col, msg: msg.into() }
}
