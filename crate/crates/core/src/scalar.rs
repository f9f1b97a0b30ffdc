//! Scalar abstraction shared by every numerical module.

use nalgebra::{DMatrix, DVector, RealField};
use num_complex::Complex;
use num_traits::{FromPrimitive, ToPrimitive};

/// Real floating-point scalar the toolkit is generic over (`f32`, `f64`).
pub trait Real: RealField + Copy + FromPrimitive + ToPrimitive + Default {}

impl<T> Real for T where T: RealField + Copy + FromPrimitive + ToPrimitive + Default {}

pub type CVector<T> = DVector<Complex<T>>;
pub type CMatrix<T> = DMatrix<Complex<T>>;

/// Converts an `f64` literal into `T`.
#[inline]
pub fn lit<T: Real>(x: f64) -> T {
    nalgebra::convert(x)
}

#[inline]
pub fn to_f64<T: Real>(x: T) -> f64 {
    x.to_f64().unwrap_or(f64::NAN)
}

/// `exp(j·phase)`.
#[inline]
pub fn cis<T: Real>(phase: T) -> Complex<T> {
    Complex::new(phase.cos(), phase.sin())
}

#[inline]
pub fn cplx<T: Real>(re: T, im: T) -> Complex<T> {
    Complex::new(re, im)
}

#[inline]
pub fn abs2<T: Real>(z: Complex<T>) -> T {
    z.re * z.re + z.im * z.im
}

#[inline]
pub fn modulus<T: Real>(z: Complex<T>) -> T {
    z.re.hypot(z.im)
}

/// Electrical angle `sin(θ)` for an angle in degrees.
pub fn deg_to_u<T: Real>(deg: T) -> T {
    (deg * T::pi() / lit(180.0)).sin()
}

pub fn power_from_db<T: Real>(db: T) -> T {
    lit::<T>(10.0).powf(db / lit(10.0))
}

pub fn amplitude_from_db<T: Real>(db: T) -> T {
    lit::<T>(10.0).powf(db / lit(20.0))
}

/// `10·log10(p)`, floored at -3000 dB for `p` below 1e-300.
pub fn db_from_power<T: Real>(p: T) -> T {
    if p < lit(1e-300) {
        lit(-3000.0)
    } else {
        lit::<T>(10.0) * p.log10()
    }
}

/// `‖x‖²` of a complex vector.
pub fn norm_sqr<T: Real>(v: &CVector<T>) -> T {
    v.iter().fold(T::zero(), |acc, z| acc + abs2(*z))
}

/// `x^H y`.
pub fn inner<T: Real>(x: &CVector<T>, y: &CVector<T>) -> Complex<T> {
    x.iter()
        .zip(y.iter())
        .fold(Complex::new(T::zero(), T::zero()), |acc, (a, b)| acc + a.conj() * b)
}

/// Real part of `x^H A x` for Hermitian `A`.
pub fn quad_form<T: Real>(a: &CMatrix<T>, x: &CVector<T>) -> T {
    inner(x, &(a * x)).re
}

/// Real part of `tr(A B)`.
pub fn trace_product<T: Real>(a: &CMatrix<T>, b: &CMatrix<T>) -> T {
    let n = a.nrows();
    let mut acc = T::zero();
    for i in 0..n {
        for k in 0..n {
            let p = a[(i, k)] * b[(k, i)];
            acc += p.re;
        }
    }
    acc
}

/// `(A + A^H)/2`.
pub fn hermitian_part<T: Real>(a: &CMatrix<T>) -> CMatrix<T> {
    (a + a.adjoint()).scale(lit(0.5))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn db_round_trip_and_floor() {
        assert!((db_from_power(100.0f64) - 20.0).abs() < 1e-12);
        assert!((power_from_db(50.0f64) - 1e5).abs() < 1e-6);
        assert_eq!(db_from_power(0.0f64), -3000.0);
        assert!((amplitude_from_db(-24.4370f64) - 0.06).abs() < 1e-5);
    }

    #[test]
    fn trace_product_matches_dense() {
        let a = CMatrix::<f64>::from_fn(3, 3, |i, j| cplx((i + 2 * j) as f64, i as f64 - j as f64));
        let a = hermitian_part(&a);
        let b = CMatrix::<f64>::from_fn(3, 3, |i, j| cplx((i * j) as f64, (i + j) as f64 * 0.5));
        let b = hermitian_part(&b);
        assert!((trace_product(&a, &b) - (&a * &b).trace().re).abs() < 1e-12);
    }
}
