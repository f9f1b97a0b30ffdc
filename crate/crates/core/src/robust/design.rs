use radcom_conic::{ConicSolver, InteriorPoint};

use crate::error::Result;
use crate::scalar::Real;

use super::sdp::{build_sdp, recover_candidate, solve_sdp};
use super::synthesis::synthesize_weight;
use super::wiener::wiener_weights;
use super::{DopplerFilter, FilterDesignProblem, FilterKind, FilterMetadata, RobustOptions, SynthesisPath};

/// Robust filter with the bundled interior-point solver and default options.
pub fn design_robust_filter<T: Real>(problem: &FilterDesignProblem<T>) -> Result<DopplerFilter<T>> {
    design_robust_filter_with(problem, &InteriorPoint::default(), &RobustOptions::default())
}

/// Robust filter maximizing the worst-case SINR over the design grid subject to
/// `‖w - w₀‖² ≤ ξ`, where `w₀` is the unit-norm Wiener filter at the nominal Doppler.
pub fn design_robust_filter_with<T: Real>(
    problem: &FilterDesignProblem<T>,
    solver: &dyn ConicSolver<T>,
    options: &RobustOptions<T>,
) -> Result<DopplerFilter<T>> {
    problem.validate()?;
    let model = problem.sinr_model()?;
    let w0 = wiener_weights(&problem.interference(), &problem.signature, problem.psi_target)?;

    if problem.xi == T::zero() {
        let worst = model.worst_case_db(&w0, &problem.psi_grid)?;
        return Ok(DopplerFilter {
            w: w0,
            kind: FilterKind::Robust,
            worst_case_sinr_db: worst,
            metadata: FilterMetadata {
                path: SynthesisPath::Similarity,
                similarity: Some(T::zero()),
                ..FilterMetadata::default()
            },
        });
    }

    let sdp = build_sdp(problem, &w0)?;
    let solution = solve_sdp(&sdp, solver)?;
    let big_w = recover_candidate(&solution, options.zeta_tolerance)?;
    let synth = synthesize_weight(&big_w, problem, &w0, options)?;
    let worst = model.worst_case_db(&synth.w, &problem.psi_grid)?;
    Ok(DopplerFilter {
        w: synth.w,
        kind: FilterKind::Robust,
        worst_case_sinr_db: worst,
        metadata: FilterMetadata {
            path: synth.path,
            psi_star: Some(synth.psi_star),
            psi_auxiliary: Some(synth.psi_auxiliary),
            auxiliary_perturbed: synth.auxiliary_perturbed,
            rank: Some(synth.rank),
            relaxation_bound: Some(solution.objective),
            identity_error: synth.identity_error,
            similarity: Some(synth.similarity),
            solver_iterations: Some(solution.iterations),
            solver_status: Some(format!("{:?}", solution.status)),
        },
    })
}
