//! Output SINR of a Doppler filter, Doppler sweeps and the bits-to-pulses map.

use std::path::Path;

use num_complex::Complex;
use rand::Rng;
use rayon::prelude::*;

use crate::admm::Codebook;
use crate::clutter::CovarianceMatrix;
use crate::error::{Error, Result};
use crate::scalar::{abs2, db_from_power, inner, quad_form, to_f64, CMatrix, CVector, Real};
use crate::steering::{doppler_vector, spatial_steering};

/// `s ⊙ d(ψ)`: the slow-time target signature at Doppler ψ.
pub fn target_signature<T: Real>(s: &CVector<T>, psi: T) -> CVector<T> {
    s.component_mul(&doppler_vector(s.len(), psi))
}

/// Everything the SINR of a filter depends on besides the filter and Doppler.
#[derive(Debug, Clone)]
pub struct SinrModel<T: Real> {
    /// Composite spatial signature `s = H^H a(u_t)`.
    pub signature: CVector<T>,
    /// Interference-plus-noise covariance `R_c + σ_n² I`.
    pub interference: CMatrix<T>,
    /// Target power `|α_t|²`.
    pub alpha_t2: T,
}

impl<T: Real> SinrModel<T> {
    pub fn new(signature: CVector<T>, clutter: &CovarianceMatrix<T>, sigma_n2: T, alpha_t2: T) -> Result<Self> {
        if clutter.dim() != signature.len() {
            return Err(Error::dim("clutter covariance", signature.len(), clutter.dim()));
        }
        if !(sigma_n2 >= T::zero()) || !(alpha_t2 >= T::zero()) {
            return Err(Error::Domain("noise and target powers must be nonnegative".into()));
        }
        Ok(Self {
            interference: clutter.with_noise(sigma_n2),
            signature,
            alpha_t2,
        })
    }

    pub fn pulses(&self) -> usize {
        self.signature.len()
    }

    fn check(&self, w: &CVector<T>) -> Result<()> {
        if w.len() != self.pulses() {
            return Err(Error::dim("filter", self.pulses(), w.len()));
        }
        if w.iter().all(|z| *z == Complex::new(T::zero(), T::zero())) {
            return Err(Error::Domain("filter weight vector is zero".into()));
        }
        Ok(())
    }

    /// Linear SINR at Doppler ψ.
    pub fn sinr_linear(&self, w: &CVector<T>, psi: T) -> Result<T> {
        self.check(w)?;
        let v = target_signature(&self.signature, psi);
        let num = self.alpha_t2 * abs2(inner(w, &v));
        let den = quad_form(&self.interference, w);
        if !(den > T::zero()) {
            return Err(Error::Singular("filter output interference power is not positive".into()));
        }
        Ok(num / den)
    }

    pub fn sinr_db(&self, w: &CVector<T>, psi: T) -> Result<T> {
        self.sinr_linear(w, psi).map(db_from_power)
    }

    /// Pointwise SINR over a strictly increasing Doppler grid, evaluated in parallel.
    pub fn curve(&self, w: &CVector<T>, psi_grid: &[T], filter_id: &str) -> Result<SinrCurve<T>> {
        check_grid(psi_grid)?;
        self.check(w)?;
        let sinr_db = psi_grid
            .par_iter()
            .map(|&psi| self.sinr_db(w, psi))
            .collect::<Result<Vec<_>>>()?;
        Ok(SinrCurve {
            psi: psi_grid.to_vec(),
            sinr_db,
            filter_id: filter_id.to_string(),
        })
    }

    /// `min` of [`Self::curve`], in dB.
    pub fn worst_case_db(&self, w: &CVector<T>, psi_grid: &[T]) -> Result<T> {
        Ok(self.curve(w, psi_grid, "")?.min())
    }
}

fn check_grid<T: Real>(grid: &[T]) -> Result<()> {
    if grid.is_empty() {
        return Err(Error::Domain("Doppler grid is empty".into()));
    }
    if grid.iter().any(|x| !x.is_finite()) {
        return Err(Error::Domain("Doppler grid has non-finite entries".into()));
    }
    if grid.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::Domain("Doppler grid must be strictly increasing".into()));
    }
    Ok(())
}

/// SINR in dB of filter `w` at Doppler ψ.
pub fn sinr<T: Real>(
    w: &CVector<T>,
    psi: T,
    s: &CVector<T>,
    clutter: &CovarianceMatrix<T>,
    sigma_n2: T,
    alpha_t2: T,
) -> Result<T> {
    SinrModel::new(s.clone(), clutter, sigma_n2, alpha_t2)?.sinr_db(w, psi)
}

pub fn sinr_curve<T: Real>(
    w: &CVector<T>,
    psi_grid: &[T],
    s: &CVector<T>,
    clutter: &CovarianceMatrix<T>,
    sigma_n2: T,
    alpha_t2: T,
    filter_id: &str,
) -> Result<SinrCurve<T>> {
    SinrModel::new(s.clone(), clutter, sigma_n2, alpha_t2)?.curve(w, psi_grid, filter_id)
}

pub fn worst_case_sinr<T: Real>(
    w: &CVector<T>,
    psi_grid: &[T],
    s: &CVector<T>,
    clutter: &CovarianceMatrix<T>,
    sigma_n2: T,
    alpha_t2: T,
) -> Result<T> {
    SinrModel::new(s.clone(), clutter, sigma_n2, alpha_t2)?.worst_case_db(w, psi_grid)
}

/// SINR in dB sampled over a Doppler grid.
#[derive(Debug, Clone, PartialEq)]
pub struct SinrCurve<T> {
    pub psi: Vec<T>,
    pub sinr_db: Vec<T>,
    pub filter_id: String,
}

impl<T: Real> SinrCurve<T> {
    pub fn min(&self) -> T {
        self.sinr_db.iter().copied().fold(self.sinr_db[0], T::min)
    }

    pub fn max(&self) -> T {
        self.sinr_db.iter().copied().fold(self.sinr_db[0], T::max)
    }

    /// Spread `max - min` in dB.
    pub fn peak_to_trough(&self) -> T {
        self.max() - self.min()
    }

    /// CSV rows `psi,sinr_db,filter_id` without header.
    pub fn csv_rows(&self) -> String {
        let mut out = String::new();
        for (p, v) in self.psi.iter().zip(&self.sinr_db) {
            out.push_str(&format!("{},{},{}\n", to_f64(*p), to_f64(*v), self.filter_id));
        }
        out
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let body = format!("psi,sinr_db,filter_id\n{}", self.csv_rows());
        std::fs::write(path, body).map_err(|e| Error::io(path, e))
    }
}

/// Per-pulse transmit weights and the symbol each pulse carries.
#[derive(Debug, Clone, PartialEq)]
pub struct PulseTrain<T: Real> {
    /// `M×N`, column `n` is the codebook vector sent on pulse `n`.
    pub weights: CMatrix<T>,
    /// Zero-based codebook index per pulse; index `k` selects the vector reported as `h{k+1}`.
    pub symbols: Vec<usize>,
}

impl<T: Real> PulseTrain<T> {
    /// Builds the train for explicit symbol indices.
    pub fn from_symbols(codebook: &Codebook<T>, symbols: Vec<usize>) -> Result<Self> {
        let m = codebook.geometry.elements();
        if symbols.is_empty() {
            return Err(Error::Domain("pulse train needs at least one pulse".into()));
        }
        if let Some(&bad) = symbols.iter().find(|&&k| k >= codebook.len()) {
            return Err(Error::Domain(format!("symbol {bad} outside codebook of size {}", codebook.len())));
        }
        let mut weights = CMatrix::zeros(m, symbols.len());
        for (n, &k) in symbols.iter().enumerate() {
            weights.set_column(n, &codebook.vectors[k]);
        }
        Ok(Self { weights, symbols })
    }

    /// All pulses use the first codebook vector: no spatial modulation.
    pub fn unmodulated(codebook: &Codebook<T>, pulses: usize) -> Result<Self> {
        Self::from_symbols(codebook, vec![0; pulses])
    }

    pub fn pulses(&self) -> usize {
        self.symbols.len()
    }

    /// Composite signature `s = H^H a(u)`.
    pub fn signature(&self, codebook: &Codebook<T>, u: T) -> Result<CVector<T>> {
        let a = spatial_steering(&codebook.geometry, u)?;
        Ok(self.weights.ad_mul(&a))
    }
}

/// Maps a bit string onto pulses, `log2 K` bits per pulse in big-endian order, and
/// returns the train with its signature toward electrical angle `u_t`.
pub fn encode_pulse_train<T: Real>(
    bits: &[bool],
    codebook: &Codebook<T>,
    pulses: usize,
    u_t: T,
) -> Result<(PulseTrain<T>, CVector<T>)> {
    let k = codebook.len();
    if k == 0 || !k.is_power_of_two() {
        return Err(Error::Domain(format!("codebook size {k} is not a power of two")));
    }
    let width = codebook.bits_per_symbol();
    if bits.len() != pulses * width {
        return Err(Error::dim("bit string", pulses * width, bits.len()));
    }
    let symbols = (0..pulses)
        .map(|n| {
            bits[n * width..(n + 1) * width]
                .iter()
                .fold(0usize, |acc, &b| (acc << 1) | usize::from(b))
        })
        .collect();
    let train = PulseTrain::from_symbols(codebook, symbols)?;
    let s = train.signature(codebook, u_t)?;
    Ok((train, s))
}

/// Uniform random bits.
pub fn random_bits(count: usize, rng: &mut impl Rng) -> Vec<bool> {
    (0..count).map(|_| rng.random::<bool>()).collect()
}
