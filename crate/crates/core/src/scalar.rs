//! The scalar abstraction: every numerical routine in this crate is generic
//! over [`Scalar`], instantiated in practice at `f64` (fast) and [`Dd`]
//! (double-double, for the ill-conditioned interpolation systems).

use crate::dd::Dd;
use core::fmt::{Debug, Display, LowerExp};
use core::iter::Sum;
use core::ops::{AddAssign, DivAssign, MulAssign, SubAssign};
use num_traits::{Float, FloatConst, FromPrimitive, ToPrimitive};

pub trait Scalar:
    Float
    + FloatConst
    + FromPrimitive
    + ToPrimitive
    + AddAssign
    + SubAssign
    + MulAssign
    + DivAssign
    + Sum<Self>
    + Display
    + Debug
    + LowerExp
    + Send
    + Sync
    + 'static
{
    /// Short name used in diagnostics and reports.
    const NAME: &'static str;

    /// Exact promotion of an f64 value (every f64 is representable).
    fn of(x: f64) -> Self;

    /// Rounding demotion to f64.
    fn as_f64(self) -> f64;
}

impl Scalar for f64 {
    const NAME: &'static str = "f64";

    #[inline(always)]
    fn of(x: f64) -> f64 {
        x
    }

    #[inline(always)]
    fn as_f64(self) -> f64 {
        self
    }
}

impl Scalar for Dd {
    const NAME: &'static str = "dd";

    #[inline(always)]
    fn of(x: f64) -> Dd {
        Dd::from_f64(x)
    }

    #[inline(always)]
    fn as_f64(self) -> f64 {
        self.to_f64()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn generic_quadrature<T: Scalar>() -> f64 {
        // midpoint rule for the integral of sin on [0, pi] = 2
        let n = 4096;
        let h = T::PI() / T::of(n as f64);
        let mut acc = T::zero();
        for i in 0..n {
            let x = h * (T::of(i as f64) + T::of(0.5));
            acc += x.sin();
        }
        (acc * h).as_f64()
    }

    #[test]
    fn both_scalars_run_the_same_generic_code() {
        let a = generic_quadrature::<f64>();
        let b = generic_quadrature::<Dd>();
        assert!((a - 2.0).abs() < 1e-6);
        assert!((b - 2.0).abs() < 1e-6);
        // midpoint rule error is identical far above either scalar's roundoff
        assert!((a - b).abs() < 1e-12);
    }

    #[test]
    fn promotion_round_trip() {
        for x in [0.0, -1.5, 1e300, 37.25] {
            assert_eq!(f64::of(x).as_f64(), x);
            assert_eq!(Dd::of(x).as_f64(), x);
        }
        assert_eq!(<Dd as Scalar>::NAME, "dd");
        assert_eq!(<f64 as Scalar>::NAME, "f64");
    }
}
