//! Slow-time clutter covariance for range-ambiguous, Doppler-spread clutter seen
//! through a pulse-to-pulse modulated transmit beampattern.
//!
//! Every patch `i` of ring `r` contributes `σ_r² · J_r Γ_i J_rᵀ`, where
//! `Γ_i = diag(b_i) Φ diag(b_i)^H`, `b_i = H^H a(u_i)` is the per-pulse complex
//! beampattern toward the patch and `Φ` is the expected `d(ψ) d(ψ)^H` for a Doppler
//! uniformly spread over `[ψ̄ - ε/2, ψ̄ + ε/2]`.

use std::io::Write;
use std::ops::Deref;
use std::path::Path;

use nalgebra::DMatrix;
use num_complex::Complex;
use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::scalar::{cis, cplx, lit, modulus, to_f64, CMatrix, CVector, Real};
use crate::steering::{doppler_vector, spatial_steering, ArrayGeometry};

/// One azimuth patch of a range ring.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClutterPatch<T> {
    /// Electrical angle `sin θ`.
    pub u: T,
    /// Mean normalized Doppler.
    pub psi_bar: T,
    /// Full length of the uniform Doppler spread.
    pub eps: T,
}

/// Patches at one ambiguous range offset, all with the same power.
#[derive(Debug, Clone, PartialEq)]
pub struct ClutterRing<T> {
    /// Range offset; 0 is the cell under test.
    pub index: usize,
    /// Per-patch clutter power `σ_0·K_r` (linear).
    pub sigma2: T,
    /// Propagation constant `K_r` the power was derived from.
    pub propagation: T,
    pub patches: Vec<ClutterPatch<T>>,
}

impl<T: Real> ClutterRing<T> {
    /// Ring with power `sigma0 · propagation`.
    pub fn new(index: usize, sigma0: T, propagation: T, patches: Vec<ClutterPatch<T>>) -> Result<Self> {
        let ring = Self {
            index,
            sigma2: sigma0 * propagation,
            propagation,
            patches,
        };
        ring.validate()?;
        Ok(ring)
    }

    fn validate(&self) -> Result<()> {
        if !(self.sigma2 >= T::zero()) {
            return Err(Error::Domain(format!("ring {}: clutter power must be nonnegative", self.index)));
        }
        for p in &self.patches {
            if !(p.eps >= T::zero()) {
                return Err(Error::Domain(format!("ring {}: Doppler spread must be nonnegative", self.index)));
            }
            if p.u.abs() > T::one() {
                return Err(Error::Domain(format!("ring {}: patch angle |u| > 1", self.index)));
            }
        }
        Ok(())
    }
}

/// Electrical angles of `count` patches spread uniformly in sine space over
/// `[lo_deg, hi_deg]`.
pub fn patch_angles<T: Real>(count: usize, lo_deg: T, hi_deg: T) -> Vec<T> {
    let lo = crate::scalar::deg_to_u(lo_deg);
    let hi = crate::scalar::deg_to_u(hi_deg);
    match count {
        0 => Vec::new(),
        1 => vec![(lo + hi) * lit(0.5)],
        _ => (0..count)
            .map(|i| lo + (hi - lo) * lit(i as f64 / (count - 1) as f64))
            .collect(),
    }
}

/// The full clutter scene for one CPI of `pulses` pulses.
#[derive(Debug, Clone, PartialEq)]
pub struct ClutterScenario<T> {
    pub rings: Vec<ClutterRing<T>>,
    pub pulses: usize,
}

impl<T: Real> ClutterScenario<T> {
    pub fn new(rings: Vec<ClutterRing<T>>, pulses: usize) -> Result<Self> {
        let s = Self { rings, pulses };
        s.validate()?;
        Ok(s)
    }

    /// Rings `0..propagation.len()` sharing one patch layout.
    pub fn homogeneous(
        pulses: usize,
        sigma0: T,
        propagation: &[T],
        angles: &[T],
        psi_bar: T,
        eps: T,
    ) -> Result<Self> {
        let patches: Vec<_> = angles
            .iter()
            .map(|&u| ClutterPatch { u, psi_bar, eps })
            .collect();
        let rings = propagation
            .iter()
            .enumerate()
            .map(|(r, &k)| ClutterRing::new(r, sigma0, k, patches.clone()))
            .collect::<Result<Vec<_>>>()?;
        Self::new(rings, pulses)
    }

    pub fn validate(&self) -> Result<()> {
        if self.pulses < 1 {
            return Err(Error::Domain("scenario needs at least one pulse".into()));
        }
        if self.rings.len() > self.pulses {
            return Err(Error::Domain(format!(
                "{} range rings exceed {} pulses",
                self.rings.len(),
                self.pulses
            )));
        }
        let mut seen = vec![false; self.pulses];
        for ring in &self.rings {
            ring.validate()?;
            if ring.index >= self.pulses {
                return Err(Error::Domain(format!(
                    "ring index {} must be below the pulse count {}",
                    ring.index, self.pulses
                )));
            }
            if std::mem::replace(&mut seen[ring.index], true) {
                return Err(Error::Domain(format!("duplicate ring index {}", ring.index)));
            }
        }
        Ok(())
    }

    /// Scales every ring power by `factor`.
    pub fn scaled(&self, factor: T) -> Self {
        let mut out = self.clone();
        for r in &mut out.rings {
            r.sigma2 *= factor;
        }
        out
    }

    /// Total clutter power per pulse summed over all patches.
    pub fn total_power(&self) -> T {
        self.rings
            .iter()
            .map(|r| r.sigma2 * lit(r.patches.len() as f64))
            .fold(T::zero(), |a, b| a + b)
    }
}

/// Hermitian clutter(+noise) covariance.
#[derive(Debug, Clone, PartialEq)]
pub struct CovarianceMatrix<T: Real>(CMatrix<T>);

impl<T: Real> CovarianceMatrix<T> {
    /// Wraps a matrix after checking it is square.
    pub fn new(m: CMatrix<T>) -> Result<Self> {
        if !m.is_square() {
            return Err(Error::dim("covariance", m.nrows(), m.ncols()));
        }
        Ok(Self(m))
    }

    pub fn zeros(n: usize) -> Self {
        Self(CMatrix::zeros(n, n))
    }

    pub fn into_inner(self) -> CMatrix<T> {
        self.0
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn trace(&self) -> T {
        self.0.diagonal().iter().map(|z| z.re).fold(T::zero(), |a, b| a + b)
    }

    /// `‖R - R^H‖_F / ‖R‖_F`.
    pub fn hermitian_defect(&self) -> T {
        let n = self.0.norm();
        if n == T::zero() {
            return T::zero();
        }
        (&self.0 - self.0.adjoint()).norm() / n
    }

    /// Smallest eigenvalue of the Hermitian part.
    pub fn min_eigenvalue(&self) -> T {
        let h = crate::scalar::hermitian_part(&self.0);
        let ev = h.symmetric_eigenvalues();
        ev.iter().copied().fold(ev.get(0).copied().unwrap_or_else(T::zero), T::min)
    }

    /// `R + σ²I`.
    pub fn with_noise(&self, sigma2: T) -> CMatrix<T> {
        let mut m = self.0.clone();
        for i in 0..m.nrows() {
            m[(i, i)] += cplx(sigma2, T::zero());
        }
        m
    }

    /// Writes rows of `re,im` pairs.
    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut out = String::new();
        for i in 0..self.0.nrows() {
            let row: Vec<String> = (0..self.0.ncols())
                .map(|j| {
                    let z = self.0[(i, j)];
                    format!("{},{}", to_f64(z.re), to_f64(z.im))
                })
                .collect();
            out.push_str(&row.join(","));
            out.push('\n');
        }
        std::fs::File::create(path)
            .and_then(|mut f| f.write_all(out.as_bytes()))
            .map_err(|e| Error::io(path, e))
    }
}

impl<T: Real> Deref for CovarianceMatrix<T> {
    type Target = CMatrix<T>;
    fn deref(&self) -> &CMatrix<T> {
        &self.0
    }
}

/// `J_r`: ones where `row - col = r`.
pub fn shift_matrix<T: Real>(r: usize, n: usize) -> Result<DMatrix<T>> {
    if r >= n {
        return Err(Error::Domain(format!("shift {r} must be below dimension {n}")));
    }
    Ok(DMatrix::from_fn(n, n, |i, j| if i == j + r { T::one() } else { T::zero() }))
}

/// `Φ(l1 - l2)` for lags `-(n-1)..=n-1`, stored at offset `lag + n - 1`.
fn phi_lags<T: Real>(psi_bar: T, eps: T, n: usize) -> Vec<Complex<T>> {
    let pi = T::pi();
    (0..2 * n - 1)
        .map(|k| {
            let lag = lit::<T>(k as f64) - lit(n as f64 - 1.0);
            if k == n - 1 {
                return cplx(T::one(), T::zero());
            }
            let x = pi * eps * lag;
            let sinc = if x == T::zero() { T::one() } else { x.sin() / x };
            // Reduce the mean Doppler first so large lags keep their phase precision.
            let frac = psi_bar - psi_bar.floor();
            cis(T::two_pi() * frac * lag) * sinc
        })
        .collect()
}

/// Expected `d(ψ)d(ψ)^H` for `ψ ~ U[ψ̄ - ε/2, ψ̄ + ε/2]`; ε = 0 is the point mass.
pub fn phi_matrix<T: Real>(psi_bar: T, eps: T, n: usize) -> Result<CMatrix<T>> {
    if !(eps >= T::zero()) {
        return Err(Error::Domain("Doppler spread must be nonnegative".into()));
    }
    if n < 1 {
        return Err(Error::Domain("dimension must be at least 1".into()));
    }
    let lags = phi_lags(psi_bar, eps, n);
    Ok(CMatrix::from_fn(n, n, |i, j| lags[i + n - 1 - j]))
}

/// `diag(b) Φ diag(b)^H`.
pub fn gamma_matrix<T: Real>(b: &CVector<T>, psi_bar: T, eps: T) -> Result<CMatrix<T>> {
    let n = b.len();
    let phi = phi_matrix(psi_bar, eps, n)?;
    Ok(CMatrix::from_fn(n, n, |i, j| b[i] * phi[(i, j)] * b[j].conj()))
}

/// Per-pulse complex beampatterns `b(u) = H^H a(u)` toward every patch angle.
fn patch_beampatterns<T: Real>(
    weights: &CMatrix<T>,
    geometry: &ArrayGeometry<T>,
    u: T,
) -> Result<CVector<T>> {
    let a = spatial_steering(geometry, u)?;
    Ok(weights.ad_mul(&a))
}

fn check_weights<T: Real>(scenario: &ClutterScenario<T>, weights: &CMatrix<T>, geometry: &ArrayGeometry<T>) -> Result<()> {
    scenario.validate()?;
    if weights.nrows() != geometry.elements() {
        return Err(Error::dim("weight matrix rows", geometry.elements(), weights.nrows()));
    }
    if weights.ncols() != scenario.pulses {
        return Err(Error::dim("weight matrix columns", scenario.pulses, weights.ncols()));
    }
    Ok(())
}

/// Analytic clutter covariance. `weights` is `M×N` with one transmit vector per pulse.
///
/// Patch terms are computed in parallel and summed in patch order, so the result is
/// bit-identical across thread counts. Shifts are applied as index offsets.
pub fn clutter_covariance<T: Real>(
    scenario: &ClutterScenario<T>,
    weights: &CMatrix<T>,
    geometry: &ArrayGeometry<T>,
) -> Result<CovarianceMatrix<T>> {
    check_weights(scenario, weights, geometry)?;
    let n = scenario.pulses;
    let mut total = CMatrix::zeros(n, n);
    for ring in &scenario.rings {
        if ring.sigma2 == T::zero() || ring.patches.is_empty() {
            continue;
        }
        let terms = ring
            .patches
            .par_iter()
            .map(|p| {
                let b = patch_beampatterns(weights, geometry, p.u)?;
                let lags = phi_lags(p.psi_bar, p.eps, n);
                Ok(CMatrix::from_fn(n, n, |i, j| b[i] * lags[i + n - 1 - j] * b[j].conj()))
            })
            .collect::<Result<Vec<CMatrix<T>>>>()?;
        let mut ring_sum = CMatrix::zeros(n, n);
        for t in &terms {
            ring_sum += t;
        }
        let r = ring.index;
        for i in 0..n - r {
            for j in 0..n - r {
                total[(i + r, j + r)] += ring_sum[(i, j)] * ring.sigma2;
            }
        }
    }
    // Symmetrize away rounding so the Hermitian property is exact.
    let total = (&total + total.adjoint()).scale(lit(0.5));
    CovarianceMatrix::new(total)
}

/// One clutter snapshot: circular-Gaussian patch amplitudes with variance `σ_r²` and
/// Dopplers drawn uniformly from each patch's spread.
pub fn sample_clutter<T: Real>(
    scenario: &ClutterScenario<T>,
    weights: &CMatrix<T>,
    geometry: &ArrayGeometry<T>,
    rng: &mut impl Rng,
) -> Result<CVector<T>> {
    check_weights(scenario, weights, geometry)?;
    let beams = scenario
        .rings
        .iter()
        .map(|ring| {
            ring.patches
                .iter()
                .map(|p| patch_beampatterns(weights, geometry, p.u))
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(sample_with_beams(scenario, &beams, rng))
}

/// Precomputed beampatterns for repeated sampling, indexed `[ring][patch]`.
pub fn clutter_beampatterns<T: Real>(
    scenario: &ClutterScenario<T>,
    weights: &CMatrix<T>,
    geometry: &ArrayGeometry<T>,
) -> Result<Vec<Vec<CVector<T>>>> {
    check_weights(scenario, weights, geometry)?;
    scenario
        .rings
        .iter()
        .map(|ring| {
            ring.patches
                .iter()
                .map(|p| patch_beampatterns(weights, geometry, p.u))
                .collect()
        })
        .collect()
}

/// Same draw as [`sample_clutter`] with beampatterns from [`clutter_beampatterns`].
pub fn sample_with_beams<T: Real>(
    scenario: &ClutterScenario<T>,
    beams: &[Vec<CVector<T>>],
    rng: &mut impl Rng,
) -> CVector<T> {
    let n = scenario.pulses;
    let mut c = CVector::zeros(n);
    for (ring, ring_beams) in scenario.rings.iter().zip(beams) {
        let std = (to_f64(ring.sigma2) * 0.5).sqrt();
        for (p, b) in ring.patches.iter().zip(ring_beams) {
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = rng.sample(StandardNormal);
            let offset: f64 = rng.random::<f64>() - 0.5;
            if std == 0.0 {
                continue;
            }
            let alpha = cplx(lit::<T>(re * std), lit::<T>(im * std));
            let psi = p.psi_bar + p.eps * lit(offset);
            let d = doppler_vector(n, psi);
            let r = ring.index;
            for l in 0..n - r {
                c[l + r] += alpha * b[l] * d[l];
            }
        }
    }
    c
}

/// Largest entry modulus, handy for scale-aware tolerances.
pub fn max_entry<T: Real>(m: &CMatrix<T>) -> T {
    m.iter().map(|z| modulus(*z)).fold(T::zero(), T::max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> Complex<f64> {
        cplx(re, im)
    }

    #[test]
    fn shift_examples() {
        let j0 = shift_matrix::<f64>(0, 3).unwrap();
        assert_eq!(j0, DMatrix::identity(3, 3));
        let j1 = shift_matrix::<f64>(1, 3).unwrap();
        assert_eq!(j1.sum(), 2.0);
        assert_eq!(j1[(1, 0)], 1.0);
        assert_eq!(j1[(2, 1)], 1.0);
        let j2 = shift_matrix::<f64>(2, 3).unwrap();
        assert_eq!(j2.sum(), 1.0);
        assert_eq!(j2[(2, 0)], 1.0);
        assert!(shift_matrix::<f64>(3, 3).is_err());
    }

    #[test]
    fn phi_examples() {
        let p = phi_matrix(0.0, 0.0, 3).unwrap();
        assert!(p.iter().all(|z| (z - c(1.0, 0.0)).norm() < 1e-15));
        let p = phi_matrix(0.37, 1.0, 2).unwrap();
        assert!((p - CMatrix::identity(2, 2)).norm() < 1e-15);
        let p = phi_matrix(0.25, 0.0, 2).unwrap();
        assert!((p[(0, 1)] - c(0.0, -1.0)).norm() < 1e-15);
        assert!((p[(1, 0)] - c(0.0, 1.0)).norm() < 1e-15);
        assert!(phi_matrix(0.0, -0.1, 2).is_err());
    }

    #[test]
    fn phi_is_psd_unit_diagonal() {
        let p = phi_matrix(0.13, 0.05, 12).unwrap();
        let ev = p.clone().symmetric_eigenvalues();
        assert!(ev.min() > -1e-12);
        for i in 0..12 {
            assert_relative_eq!(p[(i, i)].re, 1.0);
        }
        assert!(p.iter().all(|z| z.norm() <= 1.0 + 1e-15));
    }

    #[test]
    fn gamma_examples() {
        let phi = phi_matrix(0.1, 0.02, 4).unwrap();
        let ones = CVector::from_element(4, c(1.0, 0.0));
        assert!((gamma_matrix(&ones, 0.1, 0.02).unwrap() - &phi).norm() < 1e-15);
        let mut e1 = CVector::zeros(4);
        e1[0] = c(1.0, 0.0);
        let g = gamma_matrix(&e1, 0.1, 0.02).unwrap();
        assert_relative_eq!(g[(0, 0)].re, 1.0);
        assert_relative_eq!(g.norm(), 1.0);
        let b = CVector::from_fn(5, |i, _| c(i as f64 * 0.3 - 0.5, 1.0 / (i as f64 + 1.0)));
        let v = b.component_mul(&doppler_vector(5, 0.27));
        let g = gamma_matrix(&b, 0.27, 0.0).unwrap();
        assert!((g - &v * v.adjoint()).norm() < 1e-12);
    }

    #[test]
    fn single_patch_broadside() {
        let geom = ArrayGeometry::half_wavelength(2).unwrap();
        let patch = ClutterPatch { u: 0.0, psi_bar: 0.0, eps: 0.0 };
        let ring = ClutterRing::new(0, 4.0, 1.0, vec![patch]).unwrap();
        let sc = ClutterScenario::new(vec![ring], 3).unwrap();
        // Columns (1, 0) give b = 1 on every pulse at broadside.
        let mut h = CMatrix::zeros(2, 3);
        h.row_mut(0).fill(c(1.0, 0.0));
        let r = clutter_covariance(&sc, &h, &geom).unwrap();
        assert!(r.iter().all(|z| (z - c(4.0, 0.0)).norm() < 1e-14));
    }

    #[test]
    fn shift_as_offset_matches_explicit_products() {
        let geom = ArrayGeometry::half_wavelength(3).unwrap();
        let angles = patch_angles(4, -60.0, 60.0);
        let sc = ClutterScenario::homogeneous(5, 2.0, &[1.0, 0.5, 0.25], &angles, 0.1, 0.03).unwrap();
        let h = CMatrix::from_fn(3, 5, |i, j| cis((i * j) as f64 * 0.7 + 0.1 * i as f64));
        let r = clutter_covariance(&sc, &h, &geom).unwrap();
        let mut expected = CMatrix::<f64>::zeros(5, 5);
        for ring in &sc.rings {
            let j = shift_matrix::<f64>(ring.index, 5).unwrap().map(|x| c(x, 0.0));
            for p in &ring.patches {
                let b = h.ad_mul(&spatial_steering(&geom, p.u).unwrap());
                let g = gamma_matrix(&b, p.psi_bar, p.eps).unwrap();
                expected += (&j * g * j.transpose()).scale(ring.sigma2);
            }
        }
        assert!((r.into_inner() - expected).norm() < 1e-12);
    }

    #[test]
    fn zero_power_sample_is_zero() {
        let geom = ArrayGeometry::half_wavelength(4).unwrap();
        let angles = patch_angles(6, -60.0, 60.0);
        let sc = ClutterScenario::homogeneous(6, 0.0, &[1.0, 1.0], &angles, 0.0, 0.01).unwrap();
        let h = CMatrix::from_element(4, 6, c(1.0, 0.0));
        let x = sample_clutter(&sc, &h, &geom, &mut ChaCha8Rng::seed_from_u64(1)).unwrap();
        assert_eq!(x.norm(), 0.0);
    }

    #[test]
    fn sampling_is_reproducible() {
        let geom = ArrayGeometry::half_wavelength(4).unwrap();
        let angles = patch_angles(6, -60.0, 60.0);
        let sc = ClutterScenario::homogeneous(6, 1.0, &[1.0, 1.0], &angles, 0.0, 0.01).unwrap();
        let h = CMatrix::from_element(4, 6, c(1.0, 0.0));
        let a = sample_clutter(&sc, &h, &geom, &mut ChaCha8Rng::seed_from_u64(5)).unwrap();
        let b = sample_clutter(&sc, &h, &geom, &mut ChaCha8Rng::seed_from_u64(5)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn scenario_validation() {
        let angles = patch_angles(2, -60.0, 60.0);
        assert!(ClutterScenario::homogeneous(2, 1.0, &[1.0, 1.0, 1.0], &angles, 0.0, 0.0).is_err());
        assert!(ClutterScenario::homogeneous(4, -1.0, &[1.0], &angles, 0.0, 0.0).is_err());
        let ring = ClutterRing::new(1, 1.0, 1.0, vec![]).unwrap();
        assert!(ClutterScenario::new(vec![ring.clone(), ring], 4).is_err());
    }

    #[test]
    fn patch_angles_span_sine_space() {
        let u = patch_angles(100, -60.0f64, 60.0);
        assert_eq!(u.len(), 100);
        assert_relative_eq!(u[0], -(60.0f64.to_radians().sin()), epsilon = 1e-15);
        assert_relative_eq!(u[99], 60.0f64.to_radians().sin(), epsilon = 1e-15);
        let step = u[1] - u[0];
        assert!(u.windows(2).all(|w| (w[1] - w[0] - step).abs() < 1e-14));
    }
}
