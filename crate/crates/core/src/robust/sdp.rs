use radcom_conic::{ConicProgram, ConicSolver, SolveStatus};

use crate::error::{Error, Result};
use crate::scalar::{lit, trace_product, CMatrix, CVector, Real};

use super::embed::{embed_hermitian, extract_hermitian};
use super::FilterDesignProblem;

/// Positions of the scalar variables in the linear part of the program.
///
/// The linear cone holds `[t, ζ, s_1..s_Q, s_w]`; the `s` entries are surplus
/// variables turning the Doppler and similarity inequalities into equalities.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SdpLayout {
    pub pulses: usize,
    pub grid_points: usize,
}

impl SdpLayout {
    pub const T: usize = 0;
    pub const ZETA: usize = 1;

    pub fn surplus(&self, q: usize) -> usize {
        2 + q
    }

    pub fn similarity_surplus(&self) -> usize {
        2 + self.grid_points
    }

    pub fn linear_len(&self) -> usize {
        3 + self.grid_points
    }

    /// Rows: Q Doppler rows, then trace, normalization and similarity.
    pub fn trace_row(&self) -> usize {
        self.grid_points
    }

    pub fn normalization_row(&self) -> usize {
        self.grid_points + 1
    }

    pub fn similarity_row(&self) -> usize {
        self.grid_points + 2
    }
}

/// Solver-neutral program plus its layout.
///
/// The program is stated in whitened variables: with `G₁ = L L^H`, the solver works
/// on `Ŷ = L^H Y L`, for which the normalization row reads `tr(Ŷ) = 1` and the
/// signal rows use whitened signatures `L⁻¹ v`. `ζ` and `t` are also rescaled so that
/// a solution near the reference filter has entries of order one.
#[derive(Debug, Clone)]
pub struct SdpProgram<T: Real> {
    pub program: ConicProgram<T>,
    pub layout: SdpLayout,
    /// `L⁻¹`.
    pub whitening: CMatrix<T>,
    /// The solver sees `c·ζ` with `c = w₀^H G₁ w₀`.
    pub zeta_scale: T,
    /// The solver sees `t / s` with `s` the reference filter's worst-case SINR.
    pub objective_scale: T,
}

/// States the Charnes-Cooper relaxation
///
/// ```text
///   maximize t  s.t.  tr(Y) = ζ,  |α|²·tr(G_q Y) ≥ t ∀q,  tr(G₁ Y) = 1,
///                     tr(Y W₀) ≥ ε ζ,  Y ⪰ 0,  ζ ≥ 0
/// ```
///
/// as `minimize -t` over `X = embed(Ŷ)` and the nonnegative scalars of [`SdpLayout`].
/// `w0` must be the unit-norm reference filter. [`solve_sdp`] undoes the change of
/// variables described on [`SdpProgram`].
pub fn build_sdp<T: Real>(problem: &FilterDesignProblem<T>, w0: &CVector<T>) -> Result<SdpProgram<T>> {
    problem.validate()?;
    let n = problem.pulses();
    if w0.len() != n {
        return Err(Error::dim("reference filter", n, w0.len()));
    }
    let layout = SdpLayout {
        pulses: n,
        grid_points: problem.psi_grid.len(),
    };
    let half = lit::<T>(0.5);
    let interference = problem.interference();
    let chol = interference
        .clone()
        .cholesky()
        .ok_or_else(|| Error::Singular("interference-plus-noise covariance is not positive definite".into()))?;
    let l = chol.l();
    let whitening = l
        .solve_lower_triangular(&CMatrix::identity(n, n))
        .ok_or_else(|| Error::Singular("interference factor is singular".into()))?;
    let whiten = |v: &CVector<T>| l.solve_lower_triangular(v).unwrap_or_else(|| v.clone());

    let zeta_scale = crate::scalar::quad_form(&interference, w0);
    if !(zeta_scale > T::zero()) {
        return Err(Error::Singular("reference filter sees no interference power".into()));
    }
    let objective_scale = reference_level(problem, &interference, w0);
    let numerator_weight = problem.alpha_t2 / objective_scale * half;
    let mut prog = ConicProgram::new(2 * n, layout.linear_len());
    prog.c_lin[SdpLayout::T] = -T::one();

    for (q, &psi) in problem.psi_grid.iter().enumerate() {
        let v = whiten(&crate::eval::target_signature(&problem.signature, psi));
        let row = prog.push_row(T::zero());
        row.a_psd = embed_hermitian(&(&v * v.adjoint())) * numerator_weight;
        row.a_lin[SdpLayout::T] = -T::one();
        row.a_lin[layout.surplus(q)] = -T::one();
    }

    let inverse = &whitening * whitening.adjoint();
    let row = prog.push_row(T::zero());
    row.a_psd = embed_hermitian(&crate::scalar::hermitian_part(&inverse)) * (half * zeta_scale);
    row.a_lin[SdpLayout::ZETA] = -T::one();

    let row = prog.push_row(T::one());
    row.a_psd = embed_hermitian(&CMatrix::identity(n, n)) * half;

    let u0 = whiten(w0);
    let row = prog.push_row(T::zero());
    row.a_psd = embed_hermitian(&(&u0 * u0.adjoint())) * (half * zeta_scale);
    row.a_lin[SdpLayout::ZETA] = -problem.epsilon();
    row.a_lin[layout.similarity_surplus()] = -T::one();

    Ok(SdpProgram {
        program: prog,
        layout,
        whitening,
        zeta_scale,
        objective_scale,
    })
}

/// Worst-case linear SINR of `w0` over the grid, or one if it vanishes.
fn reference_level<T: Real>(problem: &FilterDesignProblem<T>, interference: &CMatrix<T>, w0: &CVector<T>) -> T {
    let den = crate::scalar::quad_form(interference, w0);
    let worst = problem
        .psi_grid
        .iter()
        .map(|&psi| problem.alpha_t2 * crate::scalar::quad_form(&problem.numerator_matrix(psi), w0) / den)
        .fold(T::max_value().unwrap_or(T::one()), T::min);
    if worst > T::zero() && worst.is_finite() {
        worst
    } else {
        T::one()
    }
}

/// Relaxation optimum mapped back to complex form.
#[derive(Debug, Clone)]
pub struct SdpSolution<T: Real> {
    pub y: CMatrix<T>,
    pub t: T,
    pub zeta: T,
    /// `ν`, the optimal worst-case linear SINR of the relaxation.
    pub objective: T,
    pub dual_objective: T,
    pub status: SolveStatus,
    pub iterations: usize,
    pub primal_infeasibility: T,
    pub dual_infeasibility: T,
    pub relative_gap: T,
}

/// Solves the program and reports failure statuses as errors.
pub fn solve_sdp<T: Real>(sdp: &SdpProgram<T>, solver: &dyn ConicSolver<T>) -> Result<SdpSolution<T>> {
    let sol = solver.solve(&sdp.program)?;
    match sol.status {
        SolveStatus::Optimal => {}
        SolveStatus::PrimalInfeasible => {
            return Err(Error::Infeasible(
                "no filter meets the similarity budget together with the normalization".into(),
            ))
        }
        SolveStatus::DualInfeasible => {
            return Err(Error::Degenerate("relaxation reported unbounded".into()));
        }
        other => {
            // Accept a near-optimal iterate; callers can inspect the residuals.
            let loose = lit::<T>(1e-5);
            if !(sol.relative_gap < loose && sol.primal_infeasibility < loose && sol.dual_infeasibility < loose) {
                return Err(Error::Degenerate(format!(
                    "conic solver stopped with {other:?} (gap {}, pinf {}, dinf {})",
                    crate::scalar::to_f64(sol.relative_gap),
                    crate::scalar::to_f64(sol.primal_infeasibility),
                    crate::scalar::to_f64(sol.dual_infeasibility)
                )));
            }
        }
    }
    let t = sol.x_lin[SdpLayout::T] * sdp.objective_scale;
    let y_hat = extract_hermitian(&sol.x_psd);
    let y = sdp.whitening.adjoint() * y_hat * &sdp.whitening;
    Ok(SdpSolution {
        y: crate::scalar::hermitian_part(&y),
        t,
        zeta: sol.x_lin[SdpLayout::ZETA] / sdp.zeta_scale,
        objective: t,
        dual_objective: -sol.dual_objective * sdp.objective_scale,
        status: sol.status,
        iterations: sol.iterations,
        primal_infeasibility: sol.primal_infeasibility,
        dual_infeasibility: sol.dual_infeasibility,
        relative_gap: sol.relative_gap,
    })
}

/// `W = Y/ζ`, symmetrized. Its trace is left as solved so callers can check it.
pub fn recover_candidate<T: Real>(solution: &SdpSolution<T>, zeta_tolerance: T) -> Result<CMatrix<T>> {
    if !(solution.zeta > zeta_tolerance) {
        return Err(Error::Degenerate(format!(
            "normalization variable collapsed (ζ = {})",
            crate::scalar::to_f64(solution.zeta)
        )));
    }
    let w = solution.y.unscale(solution.zeta);
    Ok(crate::scalar::hermitian_part(&w))
}

/// Objective of the trace-constrained fractional problem at `W`:
/// `min_q |α|²·tr(G_q W) / tr(G₁ W)`.
pub fn p2_objective<T: Real>(problem: &FilterDesignProblem<T>, w: &CMatrix<T>) -> T {
    let den = trace_product(&problem.interference(), w);
    problem
        .psi_grid
        .iter()
        .map(|&psi| problem.alpha_t2 * trace_product(&problem.numerator_matrix(psi), w) / den)
        .fold(T::max_value().unwrap_or(T::one()), T::min)
}
