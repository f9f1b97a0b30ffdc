use crate::error::{Error, Result};
use crate::eval::target_signature;
use crate::scalar::{CMatrix, CVector, Real};

use super::{DopplerFilter, FilterDesignProblem, FilterKind, FilterMetadata, SynthesisPath};

/// Unit-norm `(R_c + σ_n² I)⁻¹ (s ⊙ d(ψ_t))`, the SINR-optimal filter at `ψ_t`.
pub fn wiener_weights<T: Real>(interference: &CMatrix<T>, s: &CVector<T>, psi_t: T) -> Result<CVector<T>> {
    if interference.nrows() != s.len() || !interference.is_square() {
        return Err(Error::dim("interference covariance", s.len(), interference.nrows()));
    }
    let v = target_signature(s, psi_t);
    let chol = interference
        .clone()
        .cholesky()
        .ok_or_else(|| Error::Singular("interference-plus-noise covariance is not positive definite".into()))?;
    let w = chol.solve(&v);
    let n = w.norm();
    if !(n > T::zero()) {
        return Err(Error::Degenerate("Wiener filter vanished".into()));
    }
    Ok(w.unscale(n))
}

/// Wiener reference filter with its worst-case SINR over the problem's grid.
pub fn wiener_filter<T: Real>(problem: &FilterDesignProblem<T>) -> Result<DopplerFilter<T>> {
    problem.validate()?;
    let w = wiener_weights(&problem.interference(), &problem.signature, problem.psi_target)?;
    let worst = problem.sinr_model()?.worst_case_db(&w, &problem.psi_grid)?;
    Ok(DopplerFilter {
        w,
        kind: FilterKind::Wiener,
        worst_case_sinr_db: worst,
        metadata: FilterMetadata {
            path: SynthesisPath::Reference,
            ..FilterMetadata::default()
        },
    })
}
