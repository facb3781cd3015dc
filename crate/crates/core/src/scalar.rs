//! Scalar field abstraction and compensated accumulation.
//!
//! Sequences live in `w`, the space of all complex sequences, so every
//! operation is generic over [`Scalar`]. `f64` is the fast real path and
//! `Complex64` the general one.

use std::fmt::Debug;
use std::ops::{Add, Div, Mul, Neg, Sub};

use num_complex::Complex64;

pub trait Scalar:
    Copy
    + Send
    + Sync
    + Debug
    + PartialEq
    + 'static
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Neg<Output = Self>
    + Mul<f64, Output = Self>
    + Div<f64, Output = Self>
{
    fn zero() -> Self;
    fn one() -> Self;
    fn from_real(re: f64) -> Self;
    /// Modulus `|x|`.
    fn modulus(self) -> f64;
    fn is_finite(self) -> bool;
    /// Error-free transformation: `a + b = s + e` exactly, with `s = fl(a + b)`.
    fn two_sum(a: Self, b: Self) -> (Self, Self);
    /// Error-free product of a scalar with a real count.
    fn two_prod_real(a: Self, b: f64) -> (Self, Self);
    /// `%.12g`-style rendering used by trace files.
    fn format_sig(self, digits: usize) -> String;
}

#[inline]
fn two_sum_f64(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    let e = (a - (s - bb)) + (b - bb);
    (s, e)
}

#[inline]
fn two_prod_f64(a: f64, b: f64) -> (f64, f64) {
    let p = a * b;
    (p, a.mul_add(b, -p))
}

impl Scalar for f64 {
    fn zero() -> Self {
        0.0
    }
    fn one() -> Self {
        1.0
    }
    fn from_real(re: f64) -> Self {
        re
    }
    fn modulus(self) -> f64 {
        self.abs()
    }
    fn is_finite(self) -> bool {
        f64::is_finite(self)
    }
    fn two_sum(a: Self, b: Self) -> (Self, Self) {
        two_sum_f64(a, b)
    }
    fn two_prod_real(a: Self, b: f64) -> (Self, Self) {
        two_prod_f64(a, b)
    }
    fn format_sig(self, digits: usize) -> String {
        format_g(self, digits)
    }
}

impl Scalar for Complex64 {
    fn zero() -> Self {
        Complex64::new(0.0, 0.0)
    }
    fn one() -> Self {
        Complex64::new(1.0, 0.0)
    }
    fn from_real(re: f64) -> Self {
        Complex64::new(re, 0.0)
    }
    fn modulus(self) -> f64 {
        self.norm()
    }
    fn is_finite(self) -> bool {
        self.re.is_finite() && self.im.is_finite()
    }
    fn two_sum(a: Self, b: Self) -> (Self, Self) {
        let (sr, er) = two_sum_f64(a.re, b.re);
        let (si, ei) = two_sum_f64(a.im, b.im);
        (Complex64::new(sr, si), Complex64::new(er, ei))
    }
    fn two_prod_real(a: Self, b: f64) -> (Self, Self) {
        let (pr, er) = two_prod_f64(a.re, b);
        let (pi, ei) = two_prod_f64(a.im, b);
        (Complex64::new(pr, pi), Complex64::new(er, ei))
    }
    fn format_sig(self, digits: usize) -> String {
        let re = format_g(self.re, digits);
        let im = format_g(self.im.abs(), digits);
        let sign = if self.im.is_sign_negative() { '-' } else { '+' };
        format!("{re}{sign}{im}i")
    }
}

/// Renders `v` like C's `%.{digits}g`: shortest of fixed/scientific with
/// trailing zeros removed.
pub fn format_g(v: f64, digits: usize) -> String {
    if v.is_nan() {
        return "nan".to_string();
    }
    if v.is_infinite() {
        return if v > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if v == 0.0 {
        return "0".to_string();
    }
    let digits = digits.max(1);
    // Round first so the exponent reflects the rounded mantissa.
    let sci = format!("{:.*e}", digits - 1, v);
    let (mantissa, exp) = sci.split_once('e').expect("scientific format");
    let exp: i32 = exp.parse().expect("exponent");
    if exp < -5 || exp >= digits as i32 {
        let m = trim_zeros(mantissa);
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{m}e{sign}{:02}", exp.abs())
    } else {
        let decimals = (digits as i32 - 1 - exp).max(0) as usize;
        trim_zeros(&format!("{:.*}", decimals, v)).to_string()
    }
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

/// Double-word accumulator (`hi + lo`), the compensated sum used for every
/// long window in the crate.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Compensated<S> {
    hi: S,
    lo: S,
}

impl<S: Scalar> Default for Compensated<S> {
    fn default() -> Self {
        Self::zero()
    }
}

impl<S: Scalar> Compensated<S> {
    pub fn zero() -> Self {
        Self {
            hi: S::zero(),
            lo: S::zero(),
        }
    }

    pub fn from_parts(hi: S, lo: S) -> Self {
        let (hi, lo) = S::two_sum(hi, lo);
        Self { hi, lo }
    }

    pub fn add(&mut self, x: S) {
        let (s, e) = S::two_sum(self.hi, x);
        let lo = self.lo + e;
        let (hi, lo) = S::two_sum(s, lo);
        self.hi = hi;
        self.lo = lo;
    }

    pub fn add_compensated(&mut self, other: Compensated<S>) {
        let (s, e) = S::two_sum(self.hi, other.hi);
        let lo = self.lo + other.lo + e;
        let (hi, lo) = S::two_sum(s, lo);
        self.hi = hi;
        self.lo = lo;
    }

    /// Adds `v * count` including the rounding error of the product.
    pub fn add_scaled(&mut self, v: S, count: f64) {
        let (p, e) = S::two_prod_real(v, count);
        self.add_compensated(Compensated::from_parts(p, e));
    }

    pub fn negated(self) -> Self {
        Self {
            hi: -self.hi,
            lo: -self.lo,
        }
    }

    pub fn value(&self) -> S {
        self.hi + self.lo
    }
}

/// Compensated sum of an iterator.
pub fn compensated_sum<S: Scalar, I: IntoIterator<Item = S>>(iter: I) -> S {
    let mut acc = Compensated::zero();
    for x in iter {
        acc.add(x);
    }
    acc.value()
}
