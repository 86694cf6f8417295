//! Real scalar abstraction shared by every numerical routine in the crate.
//!
//! All dense kernels operate on `Complex<T>` entries where `T: Real` is `f32`
//! or `f64`. Tolerances are expressed through [`Real::unit_roundoff`] so the
//! same code path scales to single precision.

use std::fmt::{Debug, Display, LowerExp};
use std::iter::Sum;

use num_complex::Complex;
use num_traits::{Float, FloatConst, FromPrimitive, NumAssign, ToPrimitive};

/// Floating point type usable as the real part of matrix entries.
pub trait Real:
    Float
    + FloatConst
    + FromPrimitive
    + ToPrimitive
    + NumAssign
    + Sum
    + Debug
    + Display
    + LowerExp
    + Default
    + Send
    + Sync
    + 'static
{
    /// Unit roundoff `u`, half the machine epsilon.
    fn unit_roundoff() -> Self {
        Self::epsilon() / Self::from_f64(2.0).unwrap()
    }

    /// Lossy conversion from `f64`; constants in the algorithms are written as `f64`.
    fn of(x: f64) -> Self {
        Self::from_f64(x).unwrap()
    }

    fn to_f64_lossy(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Real for f32 {}
impl Real for f64 {}

/// Complex scalar over `T`.
pub type C<T> = Complex<T>;

#[inline]
pub fn cplx<T: Real>(re: T, im: T) -> Complex<T> {
    Complex::new(re, im)
}

#[inline]
pub fn real<T: Real>(re: T) -> Complex<T> {
    Complex::new(re, T::zero())
}

/// `|z|` computed without intermediate overflow.
#[inline]
pub fn abs<T: Real>(z: Complex<T>) -> T {
    z.re.hypot(z.im)
}

/// `|re| + |im|`, the cheap magnitude used in deflation tests.
#[inline]
pub fn abs1<T: Real>(z: Complex<T>) -> T {
    z.re.abs() + z.im.abs()
}

#[inline]
pub fn is_finite<T: Real>(z: Complex<T>) -> bool {
    z.re.is_finite() && z.im.is_finite()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn roundoff_matches_ieee() {
        assert_eq!(f64::unit_roundoff(), 2f64.powi(-53));
        assert_eq!(f32::unit_roundoff(), 2f32.powi(-24));
    }

    #[test]
    fn abs_avoids_overflow() {
        let z = cplx(1e300_f64, 1e300);
        assert!(abs(z).is_finite());
    }
}
