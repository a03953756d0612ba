//! Floating-point abstraction shared by the analytic parts of the crate.
//!
//! Warp profiles, closed-form curvature and the Grassmannian scan are written
//! once against [`Scalar`] and instantiated for `f32` and `f64`. The finite
//! difference oracle and the certifier are `f64` only: their step sizes and
//! tolerances are tuned to double precision.

use std::fmt::{Debug, Display};

use num_traits::{Float, FloatConst, FromPrimitive};

/// Real scalar: f32 or f64.
pub trait Scalar:
    Float + FloatConst + FromPrimitive + Debug + Display + Default + Send + Sync + 'static
{
    /// Converts an `f64` literal. Every literal used in this crate is
    /// representable in both supported types, so this never fails.
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("f64 literal representable in scalar type")
    }

    #[inline]
    fn to_f64_lossy(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Scalar for f32 {}
impl Scalar for f64 {}

/// `ln cosh x`, valid for all finite x without overflow.
pub fn ln_cosh<T: Scalar>(x: T) -> T {
    let a = x.abs();
    a + (-(a + a)).exp().ln_1p() - T::LN_2()
}

/// `ln sinh x` for x > 0, valid for all finite x without overflow.
pub fn ln_sinh<T: Scalar>(x: T) -> T {
    // 1 - e^{-2x} via expm1 keeps relative accuracy for small x.
    x - T::LN_2() + (-(-(x + x)).exp_m1()).ln()
}

/// `coth x` for x != 0.
#[inline]
pub fn coth<T: Scalar>(x: T) -> T {
    x.tanh().recip()
}

/// `sech² x`, returns 0 once cosh overflows.
#[inline]
pub fn sech2<T: Scalar>(x: T) -> T {
    let c = x.cosh();
    (c * c).recip()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn log_hyperbolics_match_direct_evaluation() {
        for &x in &[0.01_f64, 0.05, 0.5, 1.0, 5.0, 19.0, 30.0] {
            assert!((ln_cosh(x) - x.cosh().ln()).abs() < 1e-14 * x.max(1.0));
            assert!((ln_sinh(x) - x.sinh().ln()).abs() < 1e-13 * x.max(1.0));
        }
    }

    #[test]
    fn log_hyperbolics_do_not_overflow() {
        let x = 2000.0_f64;
        assert!((ln_cosh(x) - (x - std::f64::consts::LN_2)).abs() < 1e-12);
        assert!((ln_sinh(x) - (x - std::f64::consts::LN_2)).abs() < 1e-12);
        assert_eq!(sech2(x), 0.0);
        let y = 200.0_f32;
        assert!(ln_cosh(y).is_finite());
    }
}
