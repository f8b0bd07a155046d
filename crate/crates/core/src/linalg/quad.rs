//! Quad-double real arithmetic.
//!
//! A [`Quad`] is an unevaluated sum of four non-overlapping `f64` limbs,
//! giving roughly 212 bits of significand (unit roundoff near 1.2e-63).
//! The algorithms are the classic error-free-transformation kernels of
//! Hida, Li and Bailey. Exponent range is that of `f64`.
//!
//! Near an exceptional point of order `N` a backward error `δ` moves the
//! eigenvalues by about `δ^(1/N)`, so double precision alone cannot resolve
//! splittings much below `1e-4` for `N = 4`. This type exists so the
//! verification sweeps can push that floor down to `~1e-16`.

use std::cmp::Ordering;
use std::fmt;
use std::iter::Sum;
use std::ops::{Add, AddAssign, Div, DivAssign, Mul, MulAssign, Neg, Rem, Sub, SubAssign};

use num_traits::{Num, One, Zero};

#[inline]
fn quick_two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    (s, b - (s - a))
}

#[inline]
fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    (s, (a - (s - bb)) + (b - bb))
}

#[inline]
fn two_prod(a: f64, b: f64) -> (f64, f64) {
    let p = a * b;
    (p, a.mul_add(b, -p))
}

#[inline]
fn three_sum(a: f64, b: f64, c: f64) -> (f64, f64, f64) {
    let (t1, t2) = two_sum(a, b);
    let (a, t3) = two_sum(c, t1);
    let (b, c) = two_sum(t2, t3);
    (a, b, c)
}

#[inline]
fn three_sum2(a: f64, b: f64, c: f64) -> (f64, f64) {
    let (t1, t2) = two_sum(a, b);
    let (a, t3) = two_sum(c, t1);
    (a, t2 + t3)
}

fn renorm4(c0: f64, c1: f64, c2: f64, c3: f64) -> [f64; 4] {
    if !c0.is_finite() {
        return [c0, c1, c2, c3];
    }
    let (s0, c3) = quick_two_sum(c2, c3);
    let (s0, c2) = quick_two_sum(c1, s0);
    let (c0, c1) = quick_two_sum(c0, s0);

    let (mut s0, mut s1) = (c0, c1);
    let (mut s2, mut s3) = (0.0, 0.0);
    if s1 != 0.0 {
        (s1, s2) = quick_two_sum(s1, c2);
        if s2 != 0.0 {
            (s2, s3) = quick_two_sum(s2, c3);
        } else {
            (s1, s2) = quick_two_sum(s1, c3);
        }
    } else {
        (s0, s1) = quick_two_sum(s0, c2);
        if s1 != 0.0 {
            (s1, s2) = quick_two_sum(s1, c3);
        } else {
            (s0, s1) = quick_two_sum(s0, c3);
        }
    }
    [s0, s1, s2, s3]
}

fn renorm5(c0: f64, c1: f64, c2: f64, c3: f64, c4: f64) -> [f64; 4] {
    if !c0.is_finite() {
        return [c0, c1, c2, c3];
    }
    let (s0, c4) = quick_two_sum(c3, c4);
    let (s0, c3) = quick_two_sum(c2, s0);
    let (s0, c2) = quick_two_sum(c1, s0);
    let (c0, c1) = quick_two_sum(c0, s0);

    let (mut s0, mut s1) = (c0, c1);
    let (mut s2, mut s3) = (0.0, 0.0);
    if s1 != 0.0 {
        (s1, s2) = quick_two_sum(s1, c2);
        if s2 != 0.0 {
            (s2, s3) = quick_two_sum(s2, c3);
            if s3 != 0.0 {
                s3 += c4;
            } else {
                (s2, s3) = quick_two_sum(s2, c4);
            }
        } else {
            (s1, s2) = quick_two_sum(s1, c3);
            if s2 != 0.0 {
                (s2, s3) = quick_two_sum(s2, c4);
            } else {
                (s1, s2) = quick_two_sum(s1, c4);
            }
        }
    } else {
        (s0, s1) = quick_two_sum(s0, c2);
        if s1 != 0.0 {
            (s1, s2) = quick_two_sum(s1, c3);
            if s2 != 0.0 {
                (s2, s3) = quick_two_sum(s2, c4);
            } else {
                (s1, s2) = quick_two_sum(s1, c4);
            }
        } else {
            (s0, s1) = quick_two_sum(s0, c3);
            if s1 != 0.0 {
                (s1, s2) = quick_two_sum(s1, c4);
            } else {
                (s0, s1) = quick_two_sum(s0, c4);
            }
        }
    }
    [s0, s1, s2, s3]
}

/// Accumulates `c` into the double-length accumulator `(a, b)`; returns the
/// limb that fell out of the top, or zero if nothing did.
#[inline]
fn quick_three_accum(a: &mut f64, b: &mut f64, c: f64) -> f64 {
    let (s, nb) = two_sum(*b, c);
    let (s, na) = two_sum(*a, s);
    *a = na;
    *b = nb;
    let za = *a != 0.0;
    let zb = *b != 0.0;
    if za && zb {
        return s;
    }
    if !zb {
        *b = *a;
        *a = s;
    } else {
        *a = s;
    }
    0.0
}

/// Quad-double real number.
#[derive(Clone, Copy, Default)]
pub struct Quad([f64; 4]);

impl Quad {
    pub const ZERO: Quad = Quad([0.0; 4]);
    pub const ONE: Quad = Quad([1.0, 0.0, 0.0, 0.0]);
    /// 2^-209.
    pub const EPSILON: f64 = 1.215_432_671_457_254_2e-63;

    pub const fn from_f64(x: f64) -> Self {
        Quad([x, 0.0, 0.0, 0.0])
    }

    /// Builds a value from an arbitrary (possibly overlapping) sum of four limbs.
    pub fn from_limbs(limbs: [f64; 4]) -> Self {
        // Route through the accurate adder so unsorted input is fine.
        Quad::from_f64(limbs[0]) + Quad::from_f64(limbs[1]) + Quad::from_f64(limbs[2]) + Quad::from_f64(limbs[3])
    }

    pub fn limbs(self) -> [f64; 4] {
        self.0
    }

    pub fn hi(self) -> f64 {
        self.0[0]
    }

    pub fn to_f64(self) -> f64 {
        self.0[0] + self.0[1]
    }

    pub fn is_finite(self) -> bool {
        self.0.iter().all(|c| c.is_finite())
    }

    pub fn is_zero(self) -> bool {
        self.0[0] == 0.0
    }

    pub fn is_sign_negative(self) -> bool {
        self.0[0] < 0.0
    }

    pub fn abs(self) -> Self {
        if self.0[0] < 0.0 {
            -self
        } else {
            self
        }
    }

    fn add_f64(self, b: f64) -> Self {
        let a = self.0;
        let (c0, e) = two_sum(a[0], b);
        let (c1, e) = two_sum(a[1], e);
        let (c2, e) = two_sum(a[2], e);
        let (c3, e) = two_sum(a[3], e);
        Quad(renorm5(c0, c1, c2, c3, e))
    }

    fn mul_f64(self, b: f64) -> Self {
        let a = self.0;
        let (p0, q0) = two_prod(a[0], b);
        let (p1, q1) = two_prod(a[1], b);
        let (p2, q2) = two_prod(a[2], b);
        let p3 = a[3] * b;

        let s0 = p0;
        let (s1, s2) = two_sum(q0, p1);
        let (s2, q1, p2) = three_sum(s2, q1, p2);
        let (q1, q2) = three_sum2(q1, q2, p3);
        let s3 = q1;
        let s4 = q2 + p2;
        Quad(renorm5(s0, s1, s2, s3, s4))
    }

    /// Exact scaling by a power of two.
    pub fn mul_pow2(self, b: f64) -> Self {
        Quad([self.0[0] * b, self.0[1] * b, self.0[2] * b, self.0[3] * b])
    }

    fn square(self) -> Self {
        self * self
    }

    pub fn sqrt(self) -> Self {
        if self.is_zero() {
            return Quad::ZERO;
        }
        if self.is_sign_negative() || !self.is_finite() {
            return Quad::from_f64(f64::NAN);
        }
        // Bring the argument near 1 by an even power of two so the Newton
        // iterate cannot overflow or underflow.
        let e = (self.0[0].log2() / 2.0).floor() as i32;
        if e.abs() > 200 {
            let k = e.clamp(-511, 511);
            let down = 2f64.powi(-k);
            return self.mul_pow2(down).mul_pow2(down).sqrt().mul_pow2(2f64.powi(k));
        }
        // Newton on 1/sqrt(a); each step doubles the number of correct bits.
        let mut r = Quad::from_f64(1.0 / self.0[0].sqrt());
        let h = self.mul_pow2(0.5);
        for _ in 0..3 {
            let corr = (Quad::from_f64(0.5) - h * r.square()) * r;
            r += corr;
        }
        r * self
    }

    pub fn floor(self) -> Self {
        let a = self.0;
        let mut x = [a[0].floor(), 0.0, 0.0, 0.0];
        if x[0] == a[0] {
            x[1] = a[1].floor();
            if x[1] == a[1] {
                x[2] = a[2].floor();
                if x[2] == a[2] {
                    x[3] = a[3].floor();
                }
            }
            return Quad(renorm4(x[0], x[1], x[2], x[3]));
        }
        Quad(x)
    }

    pub fn trunc(self) -> Self {
        if self.is_sign_negative() {
            -((-self).floor())
        } else {
            self.floor()
        }
    }

    /// Parses a plain or scientific decimal literal (`-1.25e-3`).
    pub fn parse_decimal(s: &str) -> Option<Self> {
        let s = s.trim();
        let (mantissa, exp) = match s.find(['e', 'E']) {
            Some(i) => (&s[..i], s[i + 1..].parse::<i32>().ok()?),
            None => (s, 0),
        };
        let (negative, digits) = match mantissa.as_bytes().first()? {
            b'-' => (true, &mantissa[1..]),
            b'+' => (false, &mantissa[1..]),
            _ => (false, mantissa),
        };
        if digits.is_empty() {
            return None;
        }
        let mut value = Quad::ZERO;
        let mut frac_digits = 0i32;
        let mut seen_point = false;
        let mut seen_digit = false;
        for ch in digits.chars() {
            match ch {
                '0'..='9' => {
                    value = value.mul_f64(10.0).add_f64(f64::from(ch as u8 - b'0'));
                    if seen_point {
                        frac_digits += 1;
                    }
                    seen_digit = true;
                }
                '.' if !seen_point => seen_point = true,
                _ => return None,
            }
        }
        if !seen_digit {
            return None;
        }
        let scale = exp - frac_digits;
        let ten = Quad::from_f64(10.0);
        let power = ten.powi(scale.unsigned_abs());
        value = if scale >= 0 { value * power } else { value / power };
        Some(if negative { -value } else { value })
    }

    pub fn powi(self, mut n: u32) -> Self {
        let mut base = self;
        let mut acc = Quad::ONE;
        while n > 0 {
            if n & 1 == 1 {
                acc *= base;
            }
            base = base.square();
            n >>= 1;
        }
        acc
    }
}

impl From<f64> for Quad {
    fn from(x: f64) -> Self {
        Quad::from_f64(x)
    }
}

impl Neg for Quad {
    type Output = Quad;
    fn neg(self) -> Quad {
        Quad([-self.0[0], -self.0[1], -self.0[2], -self.0[3]])
    }
}

impl Add for Quad {
    type Output = Quad;

    fn add(self, other: Quad) -> Quad {
        let a = self.0;
        let b = other.0;
        let (mut i, mut j, mut k) = (0usize, 0usize, 0usize);
        let mut x = [0.0f64; 4];

        let mut u = if a[i].abs() > b[j].abs() {
            i += 1;
            a[0]
        } else {
            j += 1;
            b[0]
        };
        let mut v = if a[i].abs() > b[j].abs() {
            i += 1;
            a[i - 1]
        } else {
            j += 1;
            b[j - 1]
        };
        (u, v) = quick_two_sum(u, v);

        while k < 4 {
            if i >= 4 && j >= 4 {
                x[k] = u;
                if k < 3 {
                    k += 1;
                    x[k] = v;
                }
                break;
            }
            let t = if i >= 4 {
                j += 1;
                b[j - 1]
            } else if j >= 4 || a[i].abs() > b[j].abs() {
                i += 1;
                a[i - 1]
            } else {
                j += 1;
                b[j - 1]
            };
            let s = quick_three_accum(&mut u, &mut v, t);
            if s != 0.0 {
                x[k] = s;
                k += 1;
            }
        }
        for &rest in &a[i..] {
            x[3] += rest;
        }
        for &rest in &b[j..] {
            x[3] += rest;
        }
        Quad(renorm4(x[0], x[1], x[2], x[3]))
    }
}

impl Sub for Quad {
    type Output = Quad;
    fn sub(self, other: Quad) -> Quad {
        self + (-other)
    }
}

impl Mul for Quad {
    type Output = Quad;

    fn mul(self, other: Quad) -> Quad {
        let a = self.0;
        let b = other.0;
        let (p0, q0) = two_prod(a[0], b[0]);
        let (p1, q1) = two_prod(a[0], b[1]);
        let (p2, q2) = two_prod(a[1], b[0]);
        let (p3, q3) = two_prod(a[0], b[2]);
        let (p4, q4) = two_prod(a[1], b[1]);
        let (p5, q5) = two_prod(a[2], b[0]);

        let (p1, p2, q0) = three_sum(p1, p2, q0);

        // Six-three sum of p2, q1, q2, p3, p4, p5.
        let (p2, q1, q2) = three_sum(p2, q1, q2);
        let (p3, p4, p5) = three_sum(p3, p4, p5);
        let (s0, t0) = two_sum(p2, p3);
        let (s1, t1) = two_sum(q1, p4);
        let mut s2 = q2 + p5;
        let (s1, t0) = two_sum(s1, t0);
        s2 += t0 + t1;

        let s1 = s1 + (a[0] * b[3] + a[1] * b[2] + a[2] * b[1] + a[3] * b[0] + q0 + q3 + q4 + q5);
        Quad(renorm5(p0, p1, s0, s1, s2))
    }
}

impl Div for Quad {
    type Output = Quad;

    fn div(self, b: Quad) -> Quad {
        let b0 = b.0[0];
        let q0 = self.0[0] / b0;
        let mut r = self - b.mul_f64(q0);
        let q1 = r.0[0] / b0;
        r -= b.mul_f64(q1);
        let q2 = r.0[0] / b0;
        r -= b.mul_f64(q2);
        let q3 = r.0[0] / b0;
        r -= b.mul_f64(q3);
        let q4 = r.0[0] / b0;
        Quad(renorm5(q0, q1, q2, q3, q4))
    }
}

impl Rem for Quad {
    type Output = Quad;
    fn rem(self, b: Quad) -> Quad {
        self - b * (self / b).trunc()
    }
}

macro_rules! forward_assign {
    ($($trait:ident :: $method:ident => $op:tt),*) => {
        $(impl $trait for Quad {
            fn $method(&mut self, rhs: Quad) {
                *self = *self $op rhs;
            }
        })*
    };
}

forward_assign!(AddAssign::add_assign => +, SubAssign::sub_assign => -, MulAssign::mul_assign => *, DivAssign::div_assign => /);

impl Sum for Quad {
    fn sum<I: Iterator<Item = Quad>>(iter: I) -> Quad {
        iter.fold(Quad::ZERO, |acc, x| acc + x)
    }
}

impl PartialEq for Quad {
    fn eq(&self, other: &Quad) -> bool {
        self.partial_cmp(other) == Some(Ordering::Equal)
    }
}

impl PartialOrd for Quad {
    fn partial_cmp(&self, other: &Quad) -> Option<Ordering> {
        if !self.is_finite() || !other.is_finite() {
            return self.0[0].partial_cmp(&other.0[0]);
        }
        let d = *self - *other;
        d.0[0].partial_cmp(&0.0)
    }
}

impl Zero for Quad {
    fn zero() -> Self {
        Quad::ZERO
    }
    fn is_zero(&self) -> bool {
        self.0[0] == 0.0
    }
}

impl One for Quad {
    fn one() -> Self {
        Quad::ONE
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParseQuadError;

impl fmt::Display for ParseQuadError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("invalid decimal literal for quad-double")
    }
}

impl std::error::Error for ParseQuadError {}

impl Num for Quad {
    type FromStrRadixErr = ParseQuadError;

    fn from_str_radix(s: &str, radix: u32) -> Result<Self, ParseQuadError> {
        if radix != 10 {
            return Err(ParseQuadError);
        }
        Quad::parse_decimal(s).ok_or(ParseQuadError)
    }
}

impl fmt::Debug for Quad {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Quad({:e}, {:e}, {:e}, {:e})", self.0[0], self.0[1], self.0[2], self.0[3])
    }
}

impl fmt::Display for Quad {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(&self.to_f64(), f)
    }
}
