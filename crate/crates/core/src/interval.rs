//! Closed-interval arithmetic on scalars and boxes.
//!
//! All extensions here return the exact image hull of the operation over
//! the operand intervals, evaluated in round-to-nearest double precision.
//! No outward rounding is performed; callers that need containment
//! checks should compare with a small tolerance (the estimator uses 1e-9).

use std::f64::consts::{FRAC_PI_2, PI, TAU};
use std::fmt;
use std::ops::{Add, Index, IndexMut, Mul, Neg, Sub};

use crate::error::{Error, Result};

/// A nonempty closed interval `[lo, hi]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

/// Binary arithmetic operations with an interval extension.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ArithOp {
    Add,
    Sub,
    Mul,
    Div,
}

/// Univariate library functions with an interval extension.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ElemFn {
    Exp,
    Ln,
    Sin,
    Cos,
    /// Integer power `x^q`.
    Pow(i32),
}

impl Interval {
    /// Builds `[lo, hi]`. Panics if `lo > hi` or either endpoint is NaN.
    pub fn new(lo: f64, hi: f64) -> Self {
        assert!(lo <= hi, "invalid interval [{lo}, {hi}]");
        Interval { lo, hi }
    }

    /// Fallible constructor for user-provided bounds.
    pub fn try_new(lo: f64, hi: f64) -> Result<Self> {
        if lo.is_nan() || hi.is_nan() || lo > hi {
            return Err(Error::Input(format!("invalid interval [{lo}, {hi}]")));
        }
        Ok(Interval { lo, hi })
    }

    pub fn point(x: f64) -> Self {
        Interval { lo: x, hi: x }
    }

    /// The interval `[mid - rad, mid + rad]`.
    pub fn from_mid_rad(mid: f64, rad: f64) -> Self {
        Interval::new(mid - rad.abs(), mid + rad.abs())
    }

    pub fn mid(&self) -> f64 {
        0.5 * (self.hi + self.lo)
    }

    pub fn rad(&self) -> f64 {
        0.5 * (self.hi - self.lo)
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn mid_rad(&self) -> (f64, f64) {
        (self.mid(), self.rad())
    }

    pub fn contains(&self, x: f64) -> bool {
        self.lo <= x && x <= self.hi
    }

    pub fn contains_tol(&self, x: f64, tol: f64) -> bool {
        self.lo - tol <= x && x <= self.hi + tol
    }

    pub fn contains_zero(&self) -> bool {
        self.lo <= 0.0 && 0.0 <= self.hi
    }

    pub fn is_degenerate(&self) -> bool {
        self.lo == self.hi
    }

    /// Smallest interval containing both operands.
    pub fn hull(&self, other: &Interval) -> Interval {
        Interval::new(self.lo.min(other.lo), self.hi.max(other.hi))
    }

    /// Intersection, `None` when disjoint.
    pub fn intersect(&self, other: &Interval) -> Option<Interval> {
        let lo = self.lo.max(other.lo);
        let hi = self.hi.min(other.hi);
        (lo <= hi).then_some(Interval { lo, hi })
    }

    pub fn scale(&self, q: f64) -> Interval {
        let (a, b) = (self.lo * q, self.hi * q);
        Interval::new(a.min(b), a.max(b))
    }

    pub fn shift(&self, r: f64) -> Interval {
        Interval::new(self.lo + r, self.hi + r)
    }

    pub fn div(&self, rhs: &Interval) -> Result<Interval> {
        if rhs.contains_zero() {
            return Err(Error::Domain(format!(
                "division by interval [{}, {}] containing zero",
                rhs.lo, rhs.hi
            )));
        }
        let c = [
            self.lo / rhs.lo,
            self.lo / rhs.hi,
            self.hi / rhs.lo,
            self.hi / rhs.hi,
        ];
        Ok(min_max(&c))
    }

    /// Division of the interval by a nonzero scalar.
    pub fn div_scalar(&self, q: f64) -> Result<Interval> {
        if q == 0.0 {
            return Err(Error::Domain("division by zero constant".into()));
        }
        let (a, b) = (self.lo / q, self.hi / q);
        Ok(Interval::new(a.min(b), a.max(b)))
    }

    pub fn exp(&self) -> Interval {
        Interval::new(self.lo.exp(), self.hi.exp())
    }

    pub fn ln(&self) -> Result<Interval> {
        if self.lo <= 0.0 {
            return Err(Error::Domain(format!(
                "logarithm of interval [{}, {}] with non-positive lower bound",
                self.lo, self.hi
            )));
        }
        Ok(Interval::new(self.lo.ln(), self.hi.ln()))
    }

    pub fn sin(&self) -> Interval {
        periodic_image(self, f64::sin, FRAC_PI_2, -FRAC_PI_2)
    }

    pub fn cos(&self) -> Interval {
        periodic_image(self, f64::cos, 0.0, PI)
    }

    pub fn powi(&self, q: i32) -> Result<Interval> {
        if q == 0 {
            return Ok(Interval::point(1.0));
        }
        if q < 0 {
            let pos = self.powi(-q)?;
            return Interval::point(1.0).div(&pos);
        }
        let (a, b) = (self.lo.powi(q), self.hi.powi(q));
        if q % 2 == 1 {
            return Ok(Interval::new(a, b));
        }
        if self.lo >= 0.0 {
            Ok(Interval::new(a, b))
        } else if self.hi <= 0.0 {
            Ok(Interval::new(b, a))
        } else {
            Ok(Interval::new(0.0, a.max(b)))
        }
    }

    pub fn elem(&self, f: ElemFn) -> Result<Interval> {
        match f {
            ElemFn::Exp => Ok(self.exp()),
            ElemFn::Ln => self.ln(),
            ElemFn::Sin => Ok(self.sin()),
            ElemFn::Cos => Ok(self.cos()),
            ElemFn::Pow(q) => self.powi(q),
        }
    }
}

/// Image hull of a 2π-periodic function with maximum attained at
/// `argmax + 2πk` and minimum at `argmin + 2πk`.
fn periodic_image(x: &Interval, f: fn(f64) -> f64, argmax: f64, argmin: f64) -> Interval {
    let (fa, fb) = (f(x.lo), f(x.hi));
    let mut lo = fa.min(fb);
    let mut hi = fa.max(fb);
    if x.width() >= TAU {
        return Interval::new(-1.0, 1.0);
    }
    if hits_lattice(x, argmax) {
        hi = 1.0;
    }
    if hits_lattice(x, argmin) {
        lo = -1.0;
    }
    Interval::new(lo, hi)
}

/// Whether some point `offset + 2πk` lies in `x`.
fn hits_lattice(x: &Interval, offset: f64) -> bool {
    let k = ((x.lo - offset) / TAU).ceil();
    offset + TAU * k <= x.hi
}

fn min_max(v: &[f64]) -> Interval {
    let lo = v.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    Interval::new(lo, hi)
}

impl Add for Interval {
    type Output = Interval;
    fn add(self, rhs: Interval) -> Interval {
        Interval::new(self.lo + rhs.lo, self.hi + rhs.hi)
    }
}

impl Sub for Interval {
    type Output = Interval;
    fn sub(self, rhs: Interval) -> Interval {
        Interval::new(self.lo - rhs.hi, self.hi - rhs.lo)
    }
}

impl Mul for Interval {
    type Output = Interval;
    fn mul(self, rhs: Interval) -> Interval {
        min_max(&[
            self.lo * rhs.lo,
            self.lo * rhs.hi,
            self.hi * rhs.lo,
            self.hi * rhs.hi,
        ])
    }
}

impl Neg for Interval {
    type Output = Interval;
    fn neg(self) -> Interval {
        Interval::new(-self.hi, -self.lo)
    }
}

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}, {}]", self.lo, self.hi)
    }
}

/// Interval extension of a binary arithmetic operation.
pub fn iv_arith(op: ArithOp, x: Interval, w: Interval) -> Result<Interval> {
    match op {
        ArithOp::Add => Ok(x + w),
        ArithOp::Sub => Ok(x - w),
        ArithOp::Mul => Ok(x * w),
        ArithOp::Div => x.div(&w),
    }
}

/// Interval extension of a library function.
pub fn iv_elem(f: ElemFn, x: Interval) -> Result<Interval> {
    x.elem(f)
}

pub fn iv_midrad(x: Interval) -> (f64, f64) {
    x.mid_rad()
}

/// A box: an ordered list of intervals.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct IntervalVector(pub Vec<Interval>);

impl IntervalVector {
    pub fn new(items: Vec<Interval>) -> Self {
        IntervalVector(items)
    }

    pub fn from_bounds(lo: &[f64], hi: &[f64]) -> Result<Self> {
        if lo.len() != hi.len() {
            return Err(Error::Shape(format!(
                "bound lengths differ: {} vs {}",
                lo.len(),
                hi.len()
            )));
        }
        lo.iter()
            .zip(hi)
            .map(|(&l, &h)| Interval::try_new(l, h))
            .collect::<Result<Vec<_>>>()
            .map(IntervalVector)
    }

    pub fn points(x: &[f64]) -> Self {
        IntervalVector(x.iter().map(|&v| Interval::point(v)).collect())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Interval> {
        self.0.iter()
    }

    pub fn lo(&self) -> Vec<f64> {
        self.0.iter().map(|i| i.lo).collect()
    }

    pub fn hi(&self) -> Vec<f64> {
        self.0.iter().map(|i| i.hi).collect()
    }

    pub fn mid(&self) -> Vec<f64> {
        self.0.iter().map(Interval::mid).collect()
    }

    pub fn rad(&self) -> Vec<f64> {
        self.0.iter().map(Interval::rad).collect()
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        self.contains_tol(x, 0.0)
    }

    pub fn contains_tol(&self, x: &[f64], tol: f64) -> bool {
        x.len() == self.len() && self.0.iter().zip(x).all(|(i, &v)| i.contains_tol(v, tol))
    }

    /// Cartesian product `self × other`.
    pub fn concat(&self, other: &IntervalVector) -> IntervalVector {
        let mut v = self.0.clone();
        v.extend_from_slice(&other.0);
        IntervalVector(v)
    }

    /// `(Π widths)^(1/n)`; zero for an empty box.
    pub fn volume_root(&self) -> f64 {
        if self.0.is_empty() {
            return 0.0;
        }
        let n = self.0.len() as f64;
        // Sum of logs keeps tiny widths from underflowing the product.
        if self.0.iter().any(|i| i.width() <= 0.0) {
            return 0.0;
        }
        let log_sum: f64 = self.0.iter().map(|i| i.width().ln()).sum();
        (log_sum / n).exp()
    }
}

impl Index<usize> for IntervalVector {
    type Output = Interval;
    fn index(&self, i: usize) -> &Interval {
        &self.0[i]
    }
}

impl IndexMut<usize> for IntervalVector {
    fn index_mut(&mut self, i: usize) -> &mut Interval {
        &mut self.0[i]
    }
}

impl FromIterator<Interval> for IntervalVector {
    fn from_iter<I: IntoIterator<Item = Interval>>(iter: I) -> Self {
        IntervalVector(iter.into_iter().collect())
    }
}
