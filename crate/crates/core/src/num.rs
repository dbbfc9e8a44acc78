//! Scalar abstraction: the whole analytic layer is generic over [`Real`],
//! instantiated with `f64` (default) or `f32`.

use std::fmt::{Debug, Display};
use std::iter::Sum;
use std::ops::{AddAssign, MulAssign, SubAssign};

use num_traits::{Float, FromPrimitive};

/// Floating-point scalar used by the analytic layer.
pub trait Real:
    Float
    + FromPrimitive
    + AddAssign
    + SubAssign
    + MulAssign
    + Sum
    + Debug
    + Display
    + Send
    + Sync
    + 'static
{
    /// Shorthand for lossy conversion of an `f64` constant.
    fn c(x: f64) -> Self {
        Self::from_f64(x).expect("finite f64 constant")
    }

    fn half() -> Self {
        Self::c(0.5)
    }

    fn two() -> Self {
        Self::c(2.0)
    }
}

impl Real for f32 {}
impl Real for f64 {}

/// Standard normal density.
pub fn norm_pdf<R: Real>(x: R) -> R {
    let inv_sqrt_2pi = R::c(0.398_942_280_401_432_7);
    inv_sqrt_2pi * (-x * x * R::half()).exp()
}

/// Standard normal cumulative distribution function.
///
/// Hart's double-precision rational approximation (abs error below 1e-15
/// in f64), evaluated in the scalar type `R`.
pub fn norm_cdf<R: Real>(x: R) -> R {
    let z = x.abs();
    let cum = if z > R::c(37.0) {
        R::zero()
    } else {
        let e = (-z * z * R::half()).exp();
        if z < R::c(7.071_067_811_865_475) {
            let n = (((((R::c(3.52624965998911e-02) * z + R::c(0.700383064443688)) * z
                + R::c(6.37396220353165))
                * z
                + R::c(33.912866078383))
                * z
                + R::c(112.079291497871))
                * z
                + R::c(221.213596169931))
                * z
                + R::c(220.206867912376);
            let d = ((((((R::c(8.83883476483184e-02) * z + R::c(1.75566716318264)) * z
                + R::c(16.064177579207))
                * z
                + R::c(86.7807322029461))
                * z
                + R::c(296.564248779674))
                * z
                + R::c(637.333633378831))
                * z
                + R::c(793.826512519948))
                * z
                + R::c(440.413735824752);
            e * n / d
        } else {
            let f = z + R::one() / (z + R::two() / (z + R::c(3.0) / (z + R::c(4.0) / (z + R::c(0.65)))));
            e / (R::c(2.506_628_274_631_000_5) * f)
        }
    };
    if x > R::zero() {
        R::one() - cum
    } else {
        cum
    }
}
