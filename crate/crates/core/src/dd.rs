//! Double-double arithmetic: unevaluated sums `hi + lo` of two f64 values
//! carrying roughly 31 significant decimal digits.
//!
//! The interpolation systems solved in this crate have condition numbers that
//! grow like (N/2)^{4k}; at the orders the experiments need, plain f64 loses
//! the residual tolerances by several digits. `Dd` restores them while staying
//! a plain `Copy` value type that slots into the same generic code as `f64`.
//!
//! Representation invariant: `|lo| <= ulp(hi)/2` and the pair is the exact
//! unevaluated sum (after each renormalization). Non-finite values live in
//! `hi` with `lo = 0`.
//!
//! `sin`/`cos`/`exp`/`ln`/`sqrt`/`powf` carry full double-double accuracy;
//! they are the ones used in kernel assembly. The remaining transcendentals
//! (`tan`, `atan2`, hyperbolics, ...) fall back to f64 seeds and are accurate
//! to f64 only — none of them sits on a precision-critical path here.

use core::cmp::Ordering;
use core::fmt;
use core::iter::{Product, Sum};
use core::num::FpCategory;
use core::ops::{
    Add, AddAssign, Div, DivAssign, Mul, MulAssign, Neg, Rem, RemAssign, Sub, SubAssign,
};
use num_traits::{Float, FloatConst, FromPrimitive, Num, NumCast, One, ToPrimitive, Zero};

#[derive(Clone, Copy, PartialEq, Default)]
pub struct Dd {
    pub hi: f64,
    pub lo: f64,
}

#[inline(always)]
fn quick_two_sum(a: f64, b: f64) -> (f64, f64) {
    // requires |a| >= |b| or a == 0
    let s = a + b;
    (s, b - (s - a))
}

#[inline(always)]
fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    (s, (a - (s - bb)) + (b - bb))
}

#[inline(always)]
fn two_prod(a: f64, b: f64) -> (f64, f64) {
    let p = a * b;
    (p, a.mul_add(b, -p))
}

impl Dd {
    pub const ZERO: Dd = Dd { hi: 0.0, lo: 0.0 };
    pub const ONE: Dd = Dd { hi: 1.0, lo: 0.0 };
    /// 2^-104, a conservative unit roundoff for the format.
    pub const EPS: f64 = 4.930380657631324e-32;

    #[inline(always)]
    pub const fn from_f64(x: f64) -> Dd {
        Dd { hi: x, lo: 0.0 }
    }

    #[inline(always)]
    fn norm(hi: f64, lo: f64) -> Dd {
        let (s, e) = quick_two_sum(hi, lo);
        Dd { hi: s, lo: e }
    }

    #[inline(always)]
    pub fn to_f64(self) -> f64 {
        self.hi + self.lo
    }

    #[inline]
    pub fn add_f64(self, b: f64) -> Dd {
        let (s, e) = two_sum(self.hi, b);
        Dd::norm(s, e + self.lo)
    }

    #[inline]
    pub fn mul_f64(self, b: f64) -> Dd {
        let (p, e) = two_prod(self.hi, b);
        Dd::norm(p, e + self.lo * b)
    }

    #[inline]
    pub fn div_f64(self, b: f64) -> Dd {
        let q1 = self.hi / b;
        let (p, e) = two_prod(q1, b);
        let r = self - Dd { hi: p, lo: e };
        let q2 = (r.hi + r.lo) / b;
        Dd::norm(q1, q2)
    }

    #[inline]
    pub fn sqr(self) -> Dd {
        let (p, mut e) = two_prod(self.hi, self.hi);
        e += 2.0 * self.hi * self.lo;
        Dd::norm(p, e)
    }

    /// Both sine and cosine of `self`, full double-double accuracy for
    /// |self| <= ~1e15 (arguments here are eigenfunction phases, |x| < 1e4).
    pub fn sin_cos(self) -> (Dd, Dd) {
        if !self.hi.is_finite() {
            return (Dd::from_f64(f64::NAN), Dd::from_f64(f64::NAN));
        }
        if self.hi.abs() > 1e15 {
            // reduction quotient no longer exactly representable; f64 fallback
            let (s, c) = self.to_f64().sin_cos();
            return (Dd::from_f64(s), Dd::from_f64(c));
        }
        let q = (self.hi / FRAC_PI_2.hi).round();
        let r = self - FRAC_PI_2.mul_f64(q);
        let (s, c) = sin_cos_taylor(r);
        match (q as i64).rem_euclid(4) {
            0 => (s, c),
            1 => (c, -s),
            2 => (-s, -c),
            _ => (-c, s),
        }
    }
}

/// exp(x) = sum * 2^k with sum in [~0.7, ~1.4]: argument reduction by ln 2
/// plus a Taylor tail below 1e-36. The caller applies the binary scaling.
fn exp_reduced(x: Dd) -> (Dd, i32) {
    let k = (x.hi / LN_2.hi).round();
    let r = x - LN_2.mul_f64(k);
    let mut sum = Dd::ONE + r;
    let mut term = r;
    let mut n = 2.0f64;
    for _ in 0..26 {
        term = (term * r).div_f64(n);
        sum += term;
        n += 1.0;
        if term.hi.abs() < 1e-36 {
            break;
        }
    }
    (sum, (k as i32).clamp(-2100, 2100))
}

/// Taylor series on |r| <= pi/4 (+ a rounding sliver). Term 2n+1 of sin at
/// r = 0.8 is below 1e-35 for n >= 16, well under one dd ulp of the result.
fn sin_cos_taylor(r: Dd) -> (Dd, Dd) {
    let r2 = r.sqr();
    let mut s = r;
    let mut term = r;
    let mut n = 1.0f64;
    for _ in 0..16 {
        term = (term * r2).div_f64(-(2.0 * n) * (2.0 * n + 1.0));
        s += term;
        n += 1.0;
        if term.hi.abs() < 1e-35 {
            break;
        }
    }
    let mut c = Dd::ONE;
    let mut ct = Dd::ONE;
    let mut m = 1.0f64;
    for _ in 0..17 {
        ct = (ct * r2).div_f64(-(2.0 * m - 1.0) * (2.0 * m));
        c += ct;
        m += 1.0;
        if ct.hi.abs() < 1e-35 {
            break;
        }
    }
    (s, c)
}

impl fmt::Debug for Dd {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Dd({:e}, {:e})", self.hi, self.lo)
    }
}

impl fmt::Display for Dd {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        // the f64 rounding of the pair; full precision is visible via Debug
        fmt::Display::fmt(&Dd::to_f64(*self), f)
    }
}

impl fmt::LowerExp for Dd {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::LowerExp::fmt(&Dd::to_f64(*self), f)
    }
}

impl From<f64> for Dd {
    #[inline]
    fn from(x: f64) -> Dd {
        Dd::from_f64(x)
    }
}

impl Neg for Dd {
    type Output = Dd;
    #[inline]
    fn neg(self) -> Dd {
        Dd {
            hi: -self.hi,
            lo: -self.lo,
        }
    }
}

impl Add for Dd {
    type Output = Dd;
    #[inline]
    fn add(self, b: Dd) -> Dd {
        let (s1, s2) = two_sum(self.hi, b.hi);
        let (t1, t2) = two_sum(self.lo, b.lo);
        let (s1, s2) = quick_two_sum(s1, s2 + t1);
        Dd::norm(s1, s2 + t2)
    }
}

impl Sub for Dd {
    type Output = Dd;
    #[inline]
    fn sub(self, b: Dd) -> Dd {
        self + (-b)
    }
}

impl Mul for Dd {
    type Output = Dd;
    #[inline]
    fn mul(self, b: Dd) -> Dd {
        let (p, e) = two_prod(self.hi, b.hi);
        Dd::norm(p, e + (self.hi * b.lo + self.lo * b.hi))
    }
}

impl Div for Dd {
    type Output = Dd;
    #[inline]
    fn div(self, b: Dd) -> Dd {
        if b.hi == 0.0 || !b.hi.is_finite() || !self.hi.is_finite() {
            return Dd::from_f64(self.to_f64() / b.to_f64());
        }
        let q1 = self.hi / b.hi;
        let mut r = self - b.mul_f64(q1);
        let q2 = r.hi / b.hi;
        r = r - b.mul_f64(q2);
        let q3 = r.hi / b.hi;
        let (s1, s2) = quick_two_sum(q1, q2);
        Dd::norm(s1, s2 + q3)
    }
}

impl Rem for Dd {
    type Output = Dd;
    #[inline]
    fn rem(self, b: Dd) -> Dd {
        self - b * (self / b).trunc()
    }
}

macro_rules! assign_ops {
    ($($trait:ident $method:ident $op:tt;)*) => {$(
        impl $trait for Dd {
            #[inline]
            fn $method(&mut self, b: Dd) {
                *self = *self $op b;
            }
        }
    )*};
}
assign_ops! {
    AddAssign add_assign +;
    SubAssign sub_assign -;
    MulAssign mul_assign *;
    DivAssign div_assign /;
    RemAssign rem_assign %;
}

impl PartialOrd for Dd {
    #[inline]
    fn partial_cmp(&self, other: &Dd) -> Option<Ordering> {
        // normalized pairs order lexicographically
        match self.hi.partial_cmp(&other.hi) {
            Some(Ordering::Equal) => self.lo.partial_cmp(&other.lo),
            o => o,
        }
    }
}

impl Sum for Dd {
    fn sum<I: Iterator<Item = Dd>>(iter: I) -> Dd {
        iter.fold(Dd::ZERO, |a, b| a + b)
    }
}

impl<'a> Sum<&'a Dd> for Dd {
    fn sum<I: Iterator<Item = &'a Dd>>(iter: I) -> Dd {
        iter.fold(Dd::ZERO, |a, b| a + *b)
    }
}

impl Product for Dd {
    fn product<I: Iterator<Item = Dd>>(iter: I) -> Dd {
        iter.fold(Dd::ONE, |a, b| a * b)
    }
}

impl Zero for Dd {
    #[inline]
    fn zero() -> Dd {
        Dd::ZERO
    }
    #[inline]
    fn is_zero(&self) -> bool {
        self.hi == 0.0 && self.lo == 0.0
    }
}

impl One for Dd {
    #[inline]
    fn one() -> Dd {
        Dd::ONE
    }
}

impl Num for Dd {
    type FromStrRadixErr = <f64 as Num>::FromStrRadixErr;
    /// Parses through f64, so inputs round to 53 bits. Present to satisfy the
    /// trait; the crate never parses Dd values from text.
    fn from_str_radix(s: &str, radix: u32) -> Result<Dd, Self::FromStrRadixErr> {
        f64::from_str_radix(s, radix).map(Dd::from_f64)
    }
}

impl ToPrimitive for Dd {
    fn to_i64(&self) -> Option<i64> {
        let x = Dd::to_f64(*self);
        if x.is_finite() && x.abs() < 9.22e18 {
            Some(x as i64)
        } else {
            None
        }
    }
    fn to_u64(&self) -> Option<u64> {
        let x = Dd::to_f64(*self);
        if x.is_finite() && x >= 0.0 && x < 1.844e19 {
            Some(x as u64)
        } else {
            None
        }
    }
    fn to_f64(&self) -> Option<f64> {
        Some(Dd::to_f64(*self))
    }
}

impl FromPrimitive for Dd {
    fn from_i64(n: i64) -> Option<Dd> {
        let hi = n as f64;
        let lo = n.wrapping_sub(hi as i64) as f64;
        Some(Dd::norm(hi, lo))
    }
    fn from_u64(n: u64) -> Option<Dd> {
        let hi = n as f64;
        let lo = if hi as u64 >= n {
            -((hi as u64 - n) as f64)
        } else {
            (n - hi as u64) as f64
        };
        Some(Dd::norm(hi, lo))
    }
    fn from_f64(n: f64) -> Option<Dd> {
        Some(Dd::from_f64(n))
    }
}

impl NumCast for Dd {
    fn from<T: ToPrimitive>(n: T) -> Option<Dd> {
        n.to_f64().map(Dd::from_f64)
    }
}

impl Float for Dd {
    fn nan() -> Dd {
        Dd::from_f64(f64::NAN)
    }
    fn infinity() -> Dd {
        Dd::from_f64(f64::INFINITY)
    }
    fn neg_infinity() -> Dd {
        Dd::from_f64(f64::NEG_INFINITY)
    }
    fn neg_zero() -> Dd {
        Dd::from_f64(-0.0)
    }
    fn min_value() -> Dd {
        Dd::from_f64(f64::MIN)
    }
    fn min_positive_value() -> Dd {
        Dd::from_f64(f64::MIN_POSITIVE)
    }
    fn max_value() -> Dd {
        Dd::from_f64(f64::MAX)
    }
    fn epsilon() -> Dd {
        Dd::from_f64(Dd::EPS)
    }

    fn is_nan(self) -> bool {
        self.hi.is_nan()
    }
    fn is_infinite(self) -> bool {
        self.hi.is_infinite()
    }
    fn is_finite(self) -> bool {
        self.hi.is_finite()
    }
    fn is_normal(self) -> bool {
        self.hi.is_normal()
    }
    fn classify(self) -> FpCategory {
        self.hi.classify()
    }

    fn floor(self) -> Dd {
        let f = self.hi.floor();
        if f < self.hi {
            Dd::from_f64(f)
        } else {
            Dd::norm(f, self.lo.floor())
        }
    }
    fn ceil(self) -> Dd {
        let c = self.hi.ceil();
        if c > self.hi {
            Dd::from_f64(c)
        } else {
            Dd::norm(c, self.lo.ceil())
        }
    }
    fn round(self) -> Dd {
        // half-up on the exact value; differs from f64's half-away only on
        // negative exact halves, which no caller feeds it
        let f = self.floor();
        if (self - f).hi >= 0.5 {
            f.add_f64(1.0)
        } else {
            f
        }
    }
    fn trunc(self) -> Dd {
        if self.hi >= 0.0 {
            self.floor()
        } else {
            self.ceil()
        }
    }
    fn fract(self) -> Dd {
        self - self.trunc()
    }

    fn abs(self) -> Dd {
        if self.hi < 0.0 || (self.hi == 0.0 && self.lo < 0.0) {
            -self
        } else {
            self
        }
    }
    fn signum(self) -> Dd {
        Dd::from_f64(self.hi.signum())
    }
    fn is_sign_positive(self) -> bool {
        self.hi.is_sign_positive()
    }
    fn is_sign_negative(self) -> bool {
        self.hi.is_sign_negative()
    }

    fn mul_add(self, a: Dd, b: Dd) -> Dd {
        self * a + b
    }
    fn recip(self) -> Dd {
        Dd::ONE / self
    }

    fn powi(self, n: i32) -> Dd {
        if n == 0 {
            return Dd::ONE;
        }
        let mut base = if n < 0 { self.recip() } else { self };
        let mut e = (n as i64).unsigned_abs();
        let mut acc = Dd::ONE;
        while e > 0 {
            if e & 1 == 1 {
                acc = acc * base;
            }
            base = base.sqr();
            e >>= 1;
        }
        acc
    }

    fn powf(self, y: Dd) -> Dd {
        if y.is_zero() {
            return Dd::ONE; // 0^0 = 1, matching f64::powf
        }
        if self.is_zero() {
            return if y.hi > 0.0 { Dd::ZERO } else { Dd::infinity() };
        }
        if self.hi < 0.0 {
            return Dd::nan();
        }
        (self.ln() * y).exp()
    }

    fn sqrt(self) -> Dd {
        if self.is_zero() {
            return Dd::ZERO;
        }
        if self.hi < 0.0 {
            return Dd::nan();
        }
        // one Newton step from the f64 root reaches full dd accuracy
        let y = self.hi.sqrt();
        let yd = Dd::from_f64(y);
        let e = (self - yd.sqr()).div_f64(2.0 * y);
        yd + e
    }

    fn exp(self) -> Dd {
        if self.hi > 709.0 {
            return Dd::infinity();
        }
        if self.hi < -745.0 {
            return Dd::ZERO;
        }
        let (sum, k) = exp_reduced(self);
        // two half-steps keep the lo limb out of subnormal range a bit longer
        let p1 = 2.0f64.powi(k / 2);
        let p2 = 2.0f64.powi(k - k / 2);
        Dd {
            hi: sum.hi * p1,
            lo: sum.lo * p1,
        }
        .mul_f64(p2)
    }

    fn exp2(self) -> Dd {
        (self * LN_2).exp()
    }
    fn exp_m1(self) -> Dd {
        // f64 fallback precision is enough for the diagnostics that use it
        Dd::from_f64(self.to_f64().exp_m1())
    }

    fn ln(self) -> Dd {
        if self.is_zero() {
            return Dd::neg_infinity();
        }
        if self.hi < 0.0 {
            return Dd::nan();
        }
        if !self.hi.is_finite() {
            return self;
        }
        // Newton on exp: y -> y + x*exp(-y) - 1. The product x*exp(-y) is
        // formed before applying exp's binary scaling so that neither factor
        // is pushed subnormal when |ln x| is large.
        let mut y = Dd::from_f64(self.hi.ln());
        for _ in 0..2 {
            let (m, k) = exp_reduced(-y);
            let prod = (self * m)
                .mul_f64(2.0f64.powi(k / 2))
                .mul_f64(2.0f64.powi(k - k / 2));
            y = y + prod - Dd::ONE;
        }
        y
    }

    fn log(self, base: Dd) -> Dd {
        self.ln() / base.ln()
    }
    fn log2(self) -> Dd {
        self.ln() / LN_2
    }
    fn log10(self) -> Dd {
        self.ln() / LN_10
    }
    fn ln_1p(self) -> Dd {
        (Dd::ONE + self).ln()
    }

    fn max(self, other: Dd) -> Dd {
        if self.is_nan() {
            other
        } else if other.is_nan() || self >= other {
            self
        } else {
            other
        }
    }
    fn min(self, other: Dd) -> Dd {
        if self.is_nan() {
            other
        } else if other.is_nan() || self <= other {
            self
        } else {
            other
        }
    }
    fn abs_sub(self, other: Dd) -> Dd {
        if self <= other {
            Dd::ZERO
        } else {
            self - other
        }
    }

    fn cbrt(self) -> Dd {
        if self.is_zero() {
            return Dd::ZERO;
        }
        let y = Dd::from_f64(self.to_f64().cbrt());
        // one Newton step: y -> y - (y^3 - x)/(3 y^2)
        y - (y.powi(3) - self) / (y.sqr().mul_f64(3.0))
    }
    fn hypot(self, other: Dd) -> Dd {
        (self.sqr() + other.sqr()).sqrt()
    }

    fn sin(self) -> Dd {
        self.sin_cos().0
    }
    fn cos(self) -> Dd {
        self.sin_cos().1
    }
    fn sin_cos(self) -> (Dd, Dd) {
        Dd::sin_cos(self)
    }
    fn tan(self) -> Dd {
        let (s, c) = self.sin_cos();
        s / c
    }

    // f64-seeded fallbacks: accurate to ~1e-16, not used in kernel assembly
    // or solves (documented at module level)
    fn asin(self) -> Dd {
        Dd::from_f64(self.to_f64().asin())
    }
    fn acos(self) -> Dd {
        Dd::from_f64(self.to_f64().acos())
    }
    fn atan(self) -> Dd {
        Dd::from_f64(self.to_f64().atan())
    }
    fn atan2(self, other: Dd) -> Dd {
        Dd::from_f64(self.to_f64().atan2(other.to_f64()))
    }
    fn sinh(self) -> Dd {
        let e = self.exp();
        (e - e.recip()).div_f64(2.0)
    }
    fn cosh(self) -> Dd {
        let e = self.exp();
        (e + e.recip()).div_f64(2.0)
    }
    fn tanh(self) -> Dd {
        Dd::from_f64(self.to_f64().tanh())
    }
    fn asinh(self) -> Dd {
        Dd::from_f64(self.to_f64().asinh())
    }
    fn acosh(self) -> Dd {
        Dd::from_f64(self.to_f64().acosh())
    }
    fn atanh(self) -> Dd {
        Dd::from_f64(self.to_f64().atanh())
    }

    fn integer_decode(self) -> (u64, i16, i8) {
        self.hi.integer_decode()
    }

    fn to_degrees(self) -> Dd {
        self * Dd {
            hi: 57.29577951308232,
            lo: -1.9878495670576283e-15,
        }
    }
    fn to_radians(self) -> Dd {
        self * Dd {
            hi: 0.017453292519943295,
            lo: 2.9486522708701687e-19,
        }
    }
}

impl FloatConst for Dd {
    fn E() -> Dd {
        E
    }
    fn FRAC_1_PI() -> Dd {
        FRAC_1_PI
    }
    fn FRAC_1_SQRT_2() -> Dd {
        FRAC_1_SQRT_2
    }
    fn FRAC_2_PI() -> Dd {
        FRAC_2_PI
    }
    fn FRAC_2_SQRT_PI() -> Dd {
        FRAC_2_SQRT_PI
    }
    fn FRAC_PI_2() -> Dd {
        FRAC_PI_2
    }
    fn FRAC_PI_3() -> Dd {
        FRAC_PI_3
    }
    fn FRAC_PI_4() -> Dd {
        FRAC_PI_4
    }
    fn FRAC_PI_6() -> Dd {
        FRAC_PI_6
    }
    fn FRAC_PI_8() -> Dd {
        FRAC_PI_8
    }
    fn LN_10() -> Dd {
        LN_10
    }
    fn LN_2() -> Dd {
        LN_2
    }
    fn LOG10_E() -> Dd {
        LOG10_E
    }
    fn LOG2_E() -> Dd {
        LOG2_E
    }
    fn PI() -> Dd {
        PI
    }
    fn SQRT_2() -> Dd {
        SQRT_2
    }
    fn TAU() -> Dd {
        TAU
    }
    fn LOG10_2() -> Dd {
        LN_2 / LN_10
    }
    fn LOG2_10() -> Dd {
        LN_10 / LN_2
    }
}

// constants as exact (hi, lo) splits of the 106-bit roundings
pub const PI: Dd = Dd {
    hi: 3.141592653589793,
    lo: 1.2246467991473532e-16,
};
pub const TAU: Dd = Dd {
    hi: 6.283185307179586,
    lo: 2.4492935982947064e-16,
};
pub const FRAC_PI_2: Dd = Dd {
    hi: 1.5707963267948966,
    lo: 6.123233995736766e-17,
};
pub const FRAC_PI_3: Dd = Dd {
    hi: 1.0471975511965979,
    lo: -1.072081766451091e-16,
};
pub const FRAC_PI_4: Dd = Dd {
    hi: 0.7853981633974483,
    lo: 3.061616997868383e-17,
};
pub const FRAC_PI_6: Dd = Dd {
    hi: 0.5235987755982989,
    lo: -5.360408832255455e-17,
};
pub const FRAC_PI_8: Dd = Dd {
    hi: 0.39269908169872414,
    lo: 1.5308084989341915e-17,
};
pub const FRAC_1_PI: Dd = Dd {
    hi: 0.3183098861837907,
    lo: -1.9678676675182486e-17,
};
pub const FRAC_2_PI: Dd = Dd {
    hi: 0.6366197723675814,
    lo: -3.935735335036497e-17,
};
pub const FRAC_2_SQRT_PI: Dd = Dd {
    hi: 1.1283791670955126,
    lo: 1.533545961316588e-17,
};
pub const E: Dd = Dd {
    hi: 2.718281828459045,
    lo: 1.4456468917292502e-16,
};
pub const LN_2: Dd = Dd {
    hi: 0.6931471805599453,
    lo: 2.3190468138462996e-17,
};
pub const LN_10: Dd = Dd {
    hi: 2.302585092994046,
    lo: -2.1707562233822494e-16,
};
pub const LOG2_E: Dd = Dd {
    hi: 1.4426950408889634,
    lo: 2.0355273740931033e-17,
};
pub const LOG10_E: Dd = Dd {
    hi: 0.4342944819032518,
    lo: 1.098319650216765e-17,
};
pub const SQRT_2: Dd = Dd {
    hi: 1.4142135623730951,
    lo: -9.667293313452913e-17,
};
pub const FRAC_1_SQRT_2: Dd = Dd {
    hi: 0.7071067811865476,
    lo: -4.833646656726457e-17,
};

#[cfg(test)]
mod tests {
    use super::*;

    fn dabs(x: Dd) -> f64 {
        x.abs().to_f64()
    }

    #[test]
    fn exact_sums_and_products() {
        let a = Dd::from_f64(0.1) + Dd::from_f64(0.2);
        // (0.1 + 0.2) as exact f64 sum, not 0.3
        assert_eq!(a.hi, 0.1 + 0.2);
        assert_eq!(a.lo, {
            let (_, e) = two_sum(0.1, 0.2);
            e
        });
        let (p, e) = two_prod(1.0 + 2f64.powi(-30), 1.0 + 2f64.powi(-30));
        assert_eq!(p + e, p); // normalized
        assert_eq!(e, 2f64.powi(-60)); // exact residual
    }

    #[test]
    fn field_identities() {
        let xs = [0.1, -7.25, 1e8, 3.0e-12, 0.9999999999999999];
        for &x in &xs {
            for &y in &xs {
                let a = Dd::from_f64(x);
                let b = Dd::from_f64(y);
                let s = ((a + b) - a) - b;
                assert!(dabs(s) <= 1e-31 * (x.abs() + y.abs()), "{x} {y}: {s:?}");
                let q = (a * b) / b - a;
                assert!(dabs(q) <= 1e-30 * x.abs().max(1e-300), "{x} {y}: {q:?}");
            }
        }
    }

    #[test]
    fn sqrt_accuracy() {
        let r = SQRT_2.sqr() - Dd::from_f64(2.0);
        assert!(dabs(r) < 1e-31);
        let s = Dd::from_f64(2.0).sqrt() - SQRT_2;
        assert!(dabs(s) < 1e-31);
        for x in [1e-8, 0.5, 3.0, 1e12] {
            let y = Dd::from_f64(x).sqrt();
            assert!(dabs(y.sqr() - Dd::from_f64(x)) < 1e-31 * x);
        }
    }

    // reference values computed with 60-digit arithmetic, stored as exact
    // (hi, lo) splits
    const SIN_COS_VECTORS: [(f64, Dd, Dd); 8] = [
        (
            1.0,
            Dd {
                hi: 0.8414709848078965,
                lo: 1.776845092935536e-18,
            },
            Dd {
                hi: 0.5403023058681398,
                lo: -4.760954612604417e-17,
            },
        ),
        (
            0.5,
            Dd {
                hi: 0.479425538604203,
                lo: -5.103969860556013e-18,
            },
            Dd {
                hi: 0.8775825618903728,
                lo: -4.2623149864279997e-17,
            },
        ),
        (
            -2.25,
            Dd {
                hi: -0.7780731968879212,
                lo: -3.792033215036389e-17,
            },
            Dd {
                hi: -0.6281736227227391,
                lo: 4.4459337825557024e-17,
            },
        ),
        (
            100.125,
            Dd {
                hi: -0.3949054323786691,
                lo: -2.141091823933292e-17,
            },
            Dd {
                hi: 0.9187217747924648,
                lo: 3.8722300885299295e-17,
            },
        ),
        (
            3.75,
            Dd {
                hi: -0.5715613187423437,
                lo: -4.5516701368100625e-17,
            },
            Dd {
                hi: -0.8205593573395608,
                lo: 3.503285808538655e-17,
            },
        ),
        (
            0.0009765625,
            Dd {
                hi: 0.0009765623447795783,
                lo: -7.228182545327179e-21,
            },
            Dd {
                hi: 0.9999995231628797,
                lo: 3.700622948511186e-17,
            },
        ),
        (
            6.283185307179586,
            Dd {
                hi: -2.4492935982947064e-16,
                lo: 5.9895396194366814e-33,
            },
            Dd {
                hi: 1.0,
                lo: -2.999519565323715e-32,
            },
        ),
        (
            355.0,
            Dd {
                hi: -3.014435335948845e-05,
                lo: 1.3012643991046347e-21,
            },
            Dd {
                hi: -0.999999999545659,
                lo: 1.0574612846643521e-17,
            },
        ),
    ];

    #[test]
    fn sin_cos_against_frozen_references() {
        for &(x, s_ref, c_ref) in &SIN_COS_VECTORS {
            let (s, c) = Dd::from_f64(x).sin_cos();
            // absolute tolerance: reduction error grows with the quadrant
            // count, ~1.5e-32 per pi/2 multiple
            let tol = 1e-31 * (1.0 + x.abs());
            assert!(dabs(s - s_ref) < tol, "sin({x}): {:?} vs {:?}", s, s_ref);
            assert!(dabs(c - c_ref) < tol, "cos({x}): {:?} vs {:?}", c, c_ref);
            let pyth = s.sqr() + c.sqr() - Dd::ONE;
            assert!(dabs(pyth) < 1e-31, "sin^2+cos^2 at {x}");
        }
    }

    const EXP_VECTORS: [(f64, Dd); 5] = [
        (
            1.0,
            Dd {
                hi: 2.718281828459045,
                lo: 1.4456468917292502e-16,
            },
        ),
        (
            0.5,
            Dd {
                hi: 1.6487212707001282,
                lo: -4.731568479435833e-17,
            },
        ),
        (
            -3.25,
            Dd {
                hi: 0.03877420783172201,
                lo: 1.1433418851841824e-18,
            },
        ),
        (
            10.0625,
            Dd {
                hi: 23447.050788115514,
                lo: 6.739878512411689e-13,
            },
        ),
        (
            0.001953125,
            Dd {
                hi: 1.0019550335910028,
                lo: 1.4880094000024225e-17,
            },
        ),
    ];

    const LN_VECTORS: [(f64, Dd); 4] = [
        (
            2.0,
            Dd {
                hi: 0.6931471805599453,
                lo: 2.3190468138462996e-17,
            },
        ),
        (
            0.0625,
            Dd {
                hi: -2.772588722239781,
                lo: -9.276187255385198e-17,
            },
        ),
        (
            3.75,
            Dd {
                hi: 1.3217558399823195,
                lo: -4.4293091716082275e-17,
            },
        ),
        (
            1e300,
            Dd {
                hi: 690.7755278982137,
                lo: 2.3747660028800243e-14,
            },
        ),
    ];

    #[test]
    fn exp_ln_against_frozen_references() {
        for &(x, v) in &EXP_VECTORS {
            let y = Dd::from_f64(x).exp();
            assert!(
                dabs(y - v) < 1e-31 * v.hi.abs(),
                "exp({x}): {:?} vs {:?}",
                y,
                v
            );
        }
        for &(x, v) in &LN_VECTORS {
            let y = Dd::from_f64(x).ln();
            assert!(
                dabs(y - v) < 1e-31 * v.hi.abs().max(1.0),
                "ln({x}): {:?} vs {:?}",
                y,
                v
            );
        }
        // round trips
        for x in [0.001, 1.5, 200.0] {
            let d = Dd::from_f64(x);
            assert!(dabs(d.ln().exp() - d) < 1e-30 * x);
        }
    }

    const POW_VECTORS: [(f64, f64, Dd); 4] = [
        (
            2.0,
            0.5,
            Dd {
                hi: 1.4142135623730951,
                lo: -9.667293313452913e-17,
            },
        ),
        (
            3.75,
            -2.25,
            Dd {
                hi: 0.05110102925697198,
                lo: 7.18542323178311e-19,
            },
        ),
        (16.0, 0.25, Dd { hi: 2.0, lo: 0.0 }),
        (9.0, 1.5, Dd { hi: 27.0, lo: 0.0 }),
    ];

    #[test]
    fn powf_and_powi() {
        for &(x, y, v) in &POW_VECTORS {
            let p = Dd::from_f64(x).powf(Dd::from_f64(y));
            assert!(
                dabs(p - v) < 2e-31 * v.hi.abs(),
                "powf({x},{y}): {:?} vs {:?}",
                p,
                v
            );
        }
        assert_eq!(Dd::from_f64(0.0).powf(Dd::ZERO), Dd::ONE);
        let p = Dd::from_f64(3.0).powi(7);
        assert_eq!(p.hi, 2187.0);
        assert_eq!(p.lo, 0.0);
        let q = Dd::from_f64(10.0).powi(-3);
        assert!(dabs(q - Dd::ONE.div_f64(1000.0)) < 1e-34);
    }

    #[test]
    fn rounding_and_parts() {
        assert_eq!(Dd::from_f64(2.75).floor(), Dd::from_f64(2.0));
        assert_eq!(Dd::from_f64(-2.25).floor(), Dd::from_f64(-3.0));
        assert_eq!(Dd::from_f64(-2.25).trunc(), Dd::from_f64(-2.0));
        assert_eq!(Dd::from_f64(2.5).round(), Dd::from_f64(3.0));
        // an integer hi with negative lo must floor below hi
        let x = Dd {
            hi: 3.0,
            lo: -1e-20,
        };
        assert_eq!(x.floor(), Dd::from_f64(2.0));
        assert_eq!(x.ceil(), Dd::from_f64(3.0));
        let f = Dd::from_f64(5.0) % Dd::from_f64(3.0);
        assert_eq!(f, Dd::from_f64(2.0));
    }

    #[test]
    fn ordering_and_conversions() {
        assert!(Dd { hi: 1.0, lo: 1e-20 } > Dd { hi: 1.0, lo: 0.0 });
        assert!(Dd::from_f64(-1.0) < Dd::ZERO);
        assert_eq!(
            Dd::from_i64(1_000_000_007).unwrap().to_f64(),
            1_000_000_007.0
        );
        // i64 beyond 2^53 survives the two-limb split exactly
        let big = 9_007_199_254_740_993i64; // 2^53 + 1
        let d = Dd::from_i64(big).unwrap();
        assert_eq!(d.hi as i64 + d.lo as i64, big);
        assert_eq!(<Dd as NumCast>::from(2.5f64).unwrap(), Dd::from_f64(2.5));
    }

    #[test]
    fn constants_are_normalized_and_consistent() {
        for c in [PI, TAU, E, LN_2, LN_10, SQRT_2, FRAC_PI_2, FRAC_1_PI] {
            assert_eq!(c, Dd::norm(c.hi, c.lo), "constant not normalized");
        }
        assert!(dabs(PI + PI - TAU) == 0.0);
        assert!(dabs(FRAC_PI_2.mul_f64(2.0) - PI) == 0.0);
        assert!(dabs(Dd::ONE / PI - FRAC_1_PI) < 1e-32);
        assert!(dabs(LN_2 * LOG2_E - Dd::ONE) < 1e-31);
        assert!(dabs(E.ln() - Dd::ONE) < 1e-31);
    }
}
