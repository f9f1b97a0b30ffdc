//! Uniform linear array geometry and steering vectors.
//!
//! Sign conventions matter: the spatial steering vector uses a *negative* exponent,
//! `a(u)_m = exp(-j·2π·m·(d/λ)·u)`, and the temporal (slow-time) steering vector a
//! *positive* one, `d(ψ)_n = exp(+j·2π·n·ψ)`. Flipping either one silently breaks
//! the clutter covariance. Angles are electrical angles `u = sin θ` with θ measured
//! from broadside; the `_deg` helpers accept θ in degrees.

use std::ops::Deref;

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::scalar::{cis, deg_to_u, inner, lit, CVector, Real};

/// `M`-element uniform linear array with spacing `d/λ` wavelengths.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ArrayGeometry<T> {
    elements: usize,
    spacing: T,
}

impl<T: Real> ArrayGeometry<T> {
    pub fn new(elements: usize, spacing: T) -> Result<Self> {
        if elements < 2 {
            return Err(Error::Domain(format!(
                "array needs at least 2 elements, got {elements}"
            )));
        }
        if !(spacing > T::zero()) {
            return Err(Error::Domain("element spacing must be positive".into()));
        }
        Ok(Self { elements, spacing })
    }

    /// Half-wavelength spaced array.
    pub fn half_wavelength(elements: usize) -> Result<Self> {
        Self::new(elements, lit(0.5))
    }

    pub fn elements(&self) -> usize {
        self.elements
    }

    /// Spacing in wavelengths.
    pub fn spacing(&self) -> T {
        self.spacing
    }
}

/// Unit-modulus spatial steering vector with leading entry 1.
#[derive(Debug, Clone, PartialEq)]
pub struct SpatialSteeringVector<T: Real>(CVector<T>);

/// Unit-modulus slow-time steering vector with leading entry 1.
#[derive(Debug, Clone, PartialEq)]
pub struct TemporalSteeringVector<T: Real>(CVector<T>);

macro_rules! steering_newtype {
    ($t:ident) => {
        impl<T: Real> $t<T> {
            pub fn into_inner(self) -> CVector<T> {
                self.0
            }
        }

        impl<T: Real> Deref for $t<T> {
            type Target = CVector<T>;
            fn deref(&self) -> &CVector<T> {
                &self.0
            }
        }
    };
}

steering_newtype!(SpatialSteeringVector);
steering_newtype!(TemporalSteeringVector);

/// `a(u)`, entry `m = exp(-j·2π·m·(d/λ)·u)`.
pub fn spatial_steering<T: Real>(geometry: &ArrayGeometry<T>, u: T) -> Result<SpatialSteeringVector<T>> {
    if u.abs() > T::one() {
        return Err(Error::Domain(format!(
            "electrical angle must satisfy |u| <= 1, got {}",
            crate::scalar::to_f64(u)
        )));
    }
    let step = -T::two_pi() * geometry.spacing * u;
    Ok(SpatialSteeringVector(CVector::from_fn(geometry.elements, |m, _| {
        cis(step * lit(m as f64))
    })))
}

/// `a(sin θ)` for θ in degrees.
pub fn spatial_steering_deg<T: Real>(
    geometry: &ArrayGeometry<T>,
    theta_deg: T,
) -> Result<SpatialSteeringVector<T>> {
    spatial_steering(geometry, deg_to_u(theta_deg).clamp(-T::one(), T::one()))
}

/// `d(ψ)`, entry `n = exp(+j·2π·n·ψ)`.
pub fn temporal_steering<T: Real>(pulses: usize, psi: T) -> Result<TemporalSteeringVector<T>> {
    if pulses < 1 {
        return Err(Error::Domain("temporal steering needs at least one pulse".into()));
    }
    Ok(TemporalSteeringVector(doppler_vector(pulses, psi)))
}

/// Raw `d(ψ)` without validation, used on hot paths.
pub(crate) fn doppler_vector<T: Real>(pulses: usize, psi: T) -> CVector<T> {
    // Reduce ψ to [0, 1) first so large n·ψ keeps full phase precision.
    let frac = psi - psi.floor();
    let step = T::two_pi() * frac;
    CVector::from_fn(pulses, |n, _| cis(step * lit(n as f64)))
}

/// Complex beampattern `h^H a(u)`.
pub fn beampattern_gain<T: Real>(h: &CVector<T>, geometry: &ArrayGeometry<T>, u: T) -> Result<Complex<T>> {
    if h.len() != geometry.elements {
        return Err(Error::dim("beampattern_gain", geometry.elements, h.len()));
    }
    let a = spatial_steering(geometry, u)?;
    Ok(inner(h, &a))
}
