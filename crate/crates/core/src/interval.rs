//! Closed bounded real intervals `[lo, hi]` with Minkowski arithmetic and the
//! lower-upper (LU) partial order.
//!
//! Equality and the order predicates compare endpoints exactly. Tolerances are
//! applied by the callers that need them (see [`crate::certify`]).

use std::fmt;
use std::ops::{Add, Neg, Sub};

use crate::error::{Error, Result};

/// A closed bounded interval with finite endpoints, `lo <= hi`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Interval {
    lo: f64,
    hi: f64,
}

impl Interval {
    pub const ZERO: Interval = Interval { lo: 0.0, hi: 0.0 };

    pub fn new(lo: f64, hi: f64) -> Result<Self> {
        if !lo.is_finite() || !hi.is_finite() {
            return Err(Error::InvalidInterval { lo, hi, reason: "endpoints must be finite" });
        }
        if lo > hi {
            return Err(Error::InvalidInterval { lo, hi, reason: "lower endpoint exceeds upper" });
        }
        Ok(Interval { lo, hi })
    }

    /// Degenerate interval `[a, a]`.
    pub fn point(a: f64) -> Result<Self> {
        Self::new(a, a)
    }

    #[inline]
    pub fn lo(&self) -> f64 {
        self.lo
    }

    #[inline]
    pub fn hi(&self) -> f64 {
        self.hi
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn is_degenerate(&self) -> bool {
        self.lo == self.hi
    }

    pub fn contains(&self, x: f64) -> bool {
        self.lo <= x && x <= self.hi
    }

    /// `[a.lo + b.lo, a.hi + b.hi]`.
    pub fn add(self, other: Interval) -> Interval {
        Interval { lo: self.lo + other.lo, hi: self.hi + other.hi }
    }

    /// `[a.lo - b.hi, a.hi - b.lo]`. Note that `A - A` is not `[0, 0]` unless `A` is degenerate.
    pub fn sub(self, other: Interval) -> Interval {
        Interval { lo: self.lo - other.hi, hi: self.hi - other.lo }
    }

    /// `{k a : a in A}`; the endpoints swap when `k < 0`.
    pub fn scale(self, k: f64) -> Interval {
        if k >= 0.0 {
            Interval { lo: k * self.lo, hi: k * self.hi }
        } else {
            Interval { lo: k * self.hi, hi: k * self.lo }
        }
    }

    /// Hausdorff distance, which for intervals reduces to the larger endpoint gap.
    pub fn hausdorff(self, other: Interval) -> f64 {
        (self.lo - other.lo).abs().max((self.hi - other.hi).abs())
    }

    /// `A ⪯_LU B`: both endpoints of `A` are at most those of `B`.
    pub fn le_lu(self, other: Interval) -> bool {
        self.lo <= other.lo && self.hi <= other.hi
    }

    /// `A ≺_LU B`: `A ⪯_LU B` and `A != B`.
    pub fn lt_lu(self, other: Interval) -> bool {
        self.le_lu(other) && self != other
    }

    /// `A ≺ˢ_LU B`: both endpoint inequalities strict.
    pub fn lt_strict_lu(self, other: Interval) -> bool {
        self.lo < other.lo && self.hi < other.hi
    }
}

impl Add for Interval {
    type Output = Interval;
    fn add(self, rhs: Interval) -> Interval {
        Interval::add(self, rhs)
    }
}

impl Sub for Interval {
    type Output = Interval;
    fn sub(self, rhs: Interval) -> Interval {
        Interval::sub(self, rhs)
    }
}

impl Neg for Interval {
    type Output = Interval;
    fn neg(self) -> Interval {
        self.scale(-1.0)
    }
}

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}, {}]", crate::report::num(self.lo), crate::report::num(self.hi))
    }
}
