//! Robust Doppler receive filter: Wiener baseline, SDP relaxation of the worst-case
//! SINR problem with a similarity constraint, and rank-one synthesis of the weights.
//!
//! The pipeline is
//!
//! 1. [`wiener_filter`] gives the reference `w₀`, renormalized to unit norm;
//! 2. [`build_sdp`] states the Charnes-Cooper form of the relaxed problem as a real
//!    conic program over one `2N×2N` PSD block;
//! 3. [`recover_candidate`] maps the solver output back to `W = Y/ζ`;
//! 4. [`synthesize_weight`] extracts a vector `w` whose quadratic forms match
//!    `tr(W·G_i)` for the four matrices that pin the SINR at three Doppler points.

mod design;
mod embed;
mod rank_one;
mod sdp;
mod synthesis;
mod wiener;

pub use design::{design_robust_filter, design_robust_filter_with};
pub use embed::{embed_hermitian, extract_hermitian};
pub use rank_one::{rank_one_decomposition, RankOneError};
pub use sdp::{build_sdp, p2_objective, recover_candidate, solve_sdp, SdpLayout, SdpProgram, SdpSolution};
pub use synthesis::{auxiliary_dopplers, numerical_rank, synthesize_weight, Synthesis};
pub use wiener::{wiener_filter, wiener_weights};

use crate::clutter::CovarianceMatrix;
use crate::error::{Error, Result};
use crate::eval::{target_signature, SinrModel};
use crate::scalar::{lit, to_f64, CMatrix, CVector, Real};

/// One robust filter design instance.
#[derive(Debug, Clone)]
pub struct FilterDesignProblem<T: Real> {
    /// Composite spatial signature `s = H^H a(u_t)`.
    pub signature: CVector<T>,
    pub clutter: CovarianceMatrix<T>,
    pub sigma_n2: T,
    /// Target power `|α_t|²`.
    pub alpha_t2: T,
    /// Design Doppler points discretizing the interval of interest.
    pub psi_grid: Vec<T>,
    /// Nominal target Doppler used by the Wiener reference.
    pub psi_target: T,
    /// Similarity budget `‖w - w₀‖² ≤ ξ`, `0 ≤ ξ < 2`.
    pub xi: T,
}

impl<T: Real> FilterDesignProblem<T> {
    pub fn validate(&self) -> Result<()> {
        let n = self.signature.len();
        if n < 1 {
            return Err(Error::Domain("signature is empty".into()));
        }
        if self.clutter.dim() != n {
            return Err(Error::dim("clutter covariance", n, self.clutter.dim()));
        }
        if self.psi_grid.is_empty() {
            return Err(Error::Domain("Doppler grid must contain at least one point".into()));
        }
        if self.psi_grid.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::Domain("Doppler grid must be strictly increasing".into()));
        }
        if !(self.xi >= T::zero() && self.xi < lit(2.0)) {
            return Err(Error::Domain(format!("xi must be in [0,2), got {}", to_f64(self.xi))));
        }
        if !(self.sigma_n2 >= T::zero()) || !(self.alpha_t2 > T::zero()) {
            return Err(Error::Domain("noise power must be nonnegative and target power positive".into()));
        }
        let lo = self.psi_grid[0];
        let hi = self.psi_grid[self.psi_grid.len() - 1];
        let tol = lit::<T>(1e-12);
        if self.psi_target < lo - tol || self.psi_target > hi + tol {
            return Err(Error::Domain("nominal target Doppler must lie in the design interval".into()));
        }
        Ok(())
    }

    pub fn pulses(&self) -> usize {
        self.signature.len()
    }

    /// `ε = ((2 - ξ)/2)²`, the bound on `|w₀^H w|²` equivalent to the similarity budget.
    pub fn epsilon(&self) -> T {
        let h = (lit::<T>(2.0) - self.xi) * lit(0.5);
        h * h
    }

    /// `G₁ = R_c + σ_n² I`.
    pub fn interference(&self) -> CMatrix<T> {
        self.clutter.with_noise(self.sigma_n2)
    }

    /// Rank-one numerator matrix `v v^H` with `v = s ⊙ d(ψ)`, so that
    /// `w^H G w = |w^H (s ⊙ d(ψ))|²`.
    pub fn numerator_matrix(&self, psi: T) -> CMatrix<T> {
        let v = target_signature(&self.signature, psi);
        &v * v.adjoint()
    }

    pub fn sinr_model(&self) -> Result<SinrModel<T>> {
        SinrModel::new(self.signature.clone(), &self.clutter, self.sigma_n2, self.alpha_t2)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FilterKind {
    Wiener,
    Robust,
}

impl FilterKind {
    pub fn as_str(self) -> &'static str {
        match self {
            FilterKind::Wiener => "wiener",
            FilterKind::Robust => "robust",
        }
    }
}

/// How the robust weight vector was obtained from `W`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SynthesisPath {
    /// The Wiener reference itself.
    Reference,
    /// `ξ = 0` pins `w = w₀`.
    Similarity,
    /// `W` had numerical rank one.
    Principal,
    /// Rank-one decomposition matching the four trace identities.
    Decomposition,
    /// Decomposition matching `G₁`, `G₂`, `I` and `W₀`, used when the Doppler-matched
    /// decomposition breaks the similarity budget.
    SimilarityDecomposition,
    /// Gaussian randomization shaped by `W` with feasibility projection.
    Randomized,
}

impl SynthesisPath {
    pub fn as_str(self) -> &'static str {
        match self {
            SynthesisPath::Reference => "reference",
            SynthesisPath::Similarity => "similarity",
            SynthesisPath::Principal => "principal",
            SynthesisPath::Decomposition => "decomposition",
            SynthesisPath::SimilarityDecomposition => "similarity-decomposition",
            SynthesisPath::Randomized => "randomized",
        }
    }
}

/// Design record attached to a [`DopplerFilter`].
#[derive(Debug, Clone, PartialEq)]
pub struct FilterMetadata<T> {
    pub path: SynthesisPath,
    /// Grid Doppler with the smallest numerator at `W`.
    pub psi_star: Option<T>,
    /// Dopplers used for the two auxiliary trace identities.
    pub psi_auxiliary: Option<[T; 2]>,
    /// True when the grid had fewer than three points and auxiliaries were perturbed copies.
    pub auxiliary_perturbed: bool,
    pub rank: Option<usize>,
    /// Optimal value of the relaxation (linear SINR), an upper bound on the worst case.
    pub relaxation_bound: Option<T>,
    /// Largest `|w^H G_i w - tr(W G_i)| / (1 + |tr(W G_i)|)` over the matched matrices.
    pub identity_error: Option<T>,
    /// Realized `‖w - w₀‖²` after phase alignment.
    pub similarity: Option<T>,
    pub solver_iterations: Option<usize>,
    pub solver_status: Option<String>,
}

impl<T> Default for FilterMetadata<T> {
    fn default() -> Self {
        Self {
            path: SynthesisPath::Reference,
            psi_star: None,
            psi_auxiliary: None,
            auxiliary_perturbed: false,
            rank: None,
            relaxation_bound: None,
            identity_error: None,
            similarity: None,
            solver_iterations: None,
            solver_status: None,
        }
    }
}

/// A designed receive filter with its worst-case SINR over the design grid.
#[derive(Debug, Clone, PartialEq)]
pub struct DopplerFilter<T: Real> {
    pub w: CVector<T>,
    pub kind: FilterKind,
    /// Minimum over the design grid, dB.
    pub worst_case_sinr_db: T,
    pub metadata: FilterMetadata<T>,
}

/// Tunables of the synthesis stage.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RobustOptions<T> {
    /// Eigenvalues below `rank_tolerance·λ_max` count as zero.
    pub rank_tolerance: T,
    /// Relative tolerance on the trace identities.
    pub identity_tolerance: T,
    /// `ζ` at or below this is treated as degenerate.
    pub zeta_tolerance: T,
    /// Extra decompositions with randomly mixed bases before giving up.
    pub decomposition_retries: usize,
    /// Gaussian draws for the randomized fallback.
    pub rounding_draws: usize,
    pub seed: u64,
}

impl<T: Real> Default for RobustOptions<T> {
    fn default() -> Self {
        Self {
            rank_tolerance: lit(1e-6),
            identity_tolerance: lit(1e-6),
            zeta_tolerance: lit(1e-12),
            decomposition_retries: 8,
            rounding_draws: 1000,
            seed: 0,
        }
    }
}

/// Rotates `w` so that `w₀^H w` is real and nonnegative, which minimises `‖w - w₀‖`.
pub fn align_phase<T: Real>(w: &CVector<T>, w0: &CVector<T>) -> CVector<T> {
    let c = crate::scalar::inner(w0, w);
    let r = crate::scalar::modulus(c);
    if r > T::zero() {
        w * (c.conj() / r)
    } else {
        w.clone()
    }
}

/// `‖w - w₀‖²`.
pub fn similarity_distance<T: Real>(w: &CVector<T>, w0: &CVector<T>) -> T {
    (w - w0).norm_squared()
}
