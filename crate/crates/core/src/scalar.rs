//! Scalar abstraction shared by every numeric module.
//!
//! All matrix code is written against [`Real`], so the same routines run in
//! `f32` or `f64`. The crate root exposes `f64` aliases for everyday use.

use nalgebra::{DMatrix, DVector, RealField};
use num_complex::Complex;

/// Real floating-point scalar usable as the base field of the operator algebra.
pub trait Real: RealField + Copy + Send + Sync + 'static {
    /// Converts an `f64` literal (a tolerance, a physical constant) into `Self`.
    #[inline]
    fn lit(x: f64) -> Self {
        nalgebra::convert(x)
    }

    /// Lossy conversion back to `f64` for reporting.
    #[inline]
    fn as_f64(self) -> f64 {
        nalgebra::try_convert(self).unwrap_or(f64::NAN)
    }

    #[inline]
    fn of_usize(n: usize) -> Self {
        Self::lit(n as f64)
    }
}

impl Real for f32 {}
impl Real for f64 {}

pub type C<T> = Complex<T>;
pub type CMatrix<T> = DMatrix<Complex<T>>;
pub type CVector<T> = DVector<Complex<T>>;

#[inline]
pub fn cplx<T: Real>(re: T) -> C<T> {
    Complex::new(re, T::zero())
}
