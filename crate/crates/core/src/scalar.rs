//! Scalar plumbing shared by every module.
//!
//! All numerics are generic over a real field `T` (in practice `f32` or
//! `f64`); matrices and vectors carry `Complex<T>` entries.

use nalgebra::{Complex, ComplexField, DMatrix, DVector, RealField};
use num_traits::{FloatConst, FromPrimitive, ToPrimitive};

/// Real scalar the library is generic over.
pub trait Real: RealField + FloatConst + FromPrimitive + ToPrimitive + Copy + Send + Sync {}

impl<T: RealField + FloatConst + FromPrimitive + ToPrimitive + Copy + Send + Sync> Real for T {}

pub type CMat<T> = DMatrix<Complex<T>>;
pub type CVec<T> = DVector<Complex<T>>;

/// Converts an `f64` literal into `T`.
#[inline]
pub fn lit<T: Real>(x: f64) -> T {
    T::from_f64(x).expect("every real type holds an f64 literal")
}

#[inline]
pub fn to_f64<T: Real>(x: T) -> f64 {
    ToPrimitive::to_f64(&x).unwrap_or(f64::NAN)
}

#[inline]
pub fn cplx<T: Real>(re: T, im: T) -> Complex<T> {
    Complex::new(re, im)
}

#[inline]
pub fn creal<T: Real>(re: T) -> Complex<T> {
    Complex::new(re, T::zero())
}

#[inline]
pub fn imag_unit<T: Real>() -> Complex<T> {
    Complex::new(T::zero(), T::one())
}

#[inline]
pub fn cabs<T: Real>(z: Complex<T>) -> T {
    z.modulus()
}

pub fn czero<T: Real>() -> Complex<T> {
    Complex::new(T::zero(), T::zero())
}

/// `(re, im)` pair in `f64`, used for cache keys and reports.
pub fn complex_to_f64<T: Real>(z: Complex<T>) -> (f64, f64) {
    (to_f64(z.re), to_f64(z.im))
}

pub fn complex_from_f64<T: Real>(re: f64, im: f64) -> Complex<T> {
    Complex::new(lit(re), lit(im))
}

pub fn identity<T: Real>(n: usize) -> CMat<T> {
    CMat::identity(n, n)
}

pub fn zeros<T: Real>(r: usize, c: usize) -> CMat<T> {
    CMat::zeros(r, c)
}

/// Largest absolute entry, the norm used for most residual reports.
pub fn max_abs<T: Real>(m: &CMat<T>) -> T {
    m.iter().fold(T::zero(), |acc, z| acc.max(z.modulus()))
}

pub fn pi<T: Real>() -> T {
    <T as FloatConst>::PI()
}
