use std::fmt::{Debug, Display};
use std::ops::{AddAssign, DivAssign, MulAssign, Neg, SubAssign};

use num_complex::Complex;
use num_traits::Num;

use super::quad::Quad;

/// Real field the dense kernels are generic over: `f64` or [`Quad`].
pub trait Real:
    Copy
    + Send
    + Sync
    + 'static
    + Debug
    + Display
    + PartialOrd
    + Num
    + Neg<Output = Self>
    + AddAssign
    + SubAssign
    + MulAssign
    + DivAssign
{
    /// Unit roundoff.
    fn epsilon() -> Self;
    fn from_f64(x: f64) -> Self;
    fn to_f64(self) -> f64;
    fn sqrt(self) -> Self;
    fn abs(self) -> Self;
    fn is_finite(self) -> bool;

    fn max(self, other: Self) -> Self {
        if other > self {
            other
        } else {
            self
        }
    }

    fn min(self, other: Self) -> Self {
        if other < self {
            other
        } else {
            self
        }
    }

    /// `sqrt(a^2 + b^2)` without intermediate overflow.
    fn hypot(self, other: Self) -> Self {
        let a = self.abs();
        let b = other.abs();
        let (big, small) = if a >= b { (a, b) } else { (b, a) };
        if big.is_zero() {
            return big;
        }
        let r = small / big;
        big * (Self::one() + r * r).sqrt()
    }
}

impl Real for f64 {
    fn epsilon() -> Self {
        f64::EPSILON / 2.0
    }
    fn from_f64(x: f64) -> Self {
        x
    }
    fn to_f64(self) -> f64 {
        self
    }
    fn sqrt(self) -> Self {
        f64::sqrt(self)
    }
    fn abs(self) -> Self {
        f64::abs(self)
    }
    fn is_finite(self) -> bool {
        f64::is_finite(self)
    }
    fn hypot(self, other: Self) -> Self {
        f64::hypot(self, other)
    }
}

impl Real for Quad {
    fn epsilon() -> Self {
        Quad::from_f64(Quad::EPSILON)
    }
    fn from_f64(x: f64) -> Self {
        Quad::from_f64(x)
    }
    fn to_f64(self) -> f64 {
        Quad::to_f64(self)
    }
    fn sqrt(self) -> Self {
        Quad::sqrt(self)
    }
    fn abs(self) -> Self {
        Quad::abs(self)
    }
    fn is_finite(self) -> bool {
        Quad::is_finite(self)
    }
}

/// Modulus of a complex number.
pub fn cabs<T: Real>(z: Complex<T>) -> T {
    z.re.hypot(z.im)
}

/// `|re| + |im|`, the cheap norm used in deflation tests.
pub fn cabs1<T: Real>(z: Complex<T>) -> T {
    z.re.abs() + z.im.abs()
}

/// Principal square root.
pub fn csqrt<T: Real>(z: Complex<T>) -> Complex<T> {
    let two = T::from_f64(2.0);
    let r = cabs(z);
    if r.is_zero() {
        return Complex::new(T::zero(), T::zero());
    }
    if z.re >= T::zero() {
        let t = ((r + z.re) / two).sqrt();
        Complex::new(t, z.im / (two * t))
    } else {
        let t = ((r - z.re) / two).sqrt();
        let im = if z.im < T::zero() { -t } else { t };
        Complex::new(z.im.abs() / (two * t), im)
    }
}

/// `x / y` by Smith's method, which avoids forming `|y|^2`.
pub fn cdiv<T: Real>(x: Complex<T>, y: Complex<T>) -> Complex<T> {
    if y.re.abs() >= y.im.abs() {
        let r = y.im / y.re;
        let den = y.re + y.im * r;
        Complex::new((x.re + x.im * r) / den, (x.im - x.re * r) / den)
    } else {
        let r = y.re / y.im;
        let den = y.re * r + y.im;
        Complex::new((x.re * r + x.im) / den, (x.im * r - x.re) / den)
    }
}

pub fn cfinite<T: Real>(z: Complex<T>) -> bool {
    z.re.is_finite() && z.im.is_finite()
}

/// Widens (or narrows) a complex scalar through `f64`; exact for `f64` sources.
pub fn cconvert<S: Real, T: Real>(z: Complex<S>) -> Complex<T> {
    Complex::new(T::from_f64(z.re.to_f64()), T::from_f64(z.im.to_f64()))
}

pub fn cnarrow<T: Real>(z: Complex<T>) -> Complex<f64> {
    Complex::new(z.re.to_f64(), z.im.to_f64())
}
