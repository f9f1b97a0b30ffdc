//! Constant-modulus beamforming codebook design by ADMM.
//!
//! Each codebook entry `h_k` minimises the peak sidelobe level over a grid of
//! sidelobe angles subject to `h^H a(θ_t) = 1`, `h^H a(θ_c) = Δ_k` and `|h(m)| = 1`.
//! The splitting introduces a PSL bound `ρ`, per-angle auxiliaries `ς_i = h^H a(θ_i)`
//! and a unit-modulus copy `z` of `h`; the iteration alternates three exact
//! subproblem solves, dual ascent on even iterations and an increasing penalty
//! schedule for the equality and modulus constraints.

use num_complex::Complex;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::scalar::{abs2, cis, cplx, db_from_power, inner, lit, modulus, CMatrix, CVector, Real};
use crate::steering::{spatial_steering_deg, ArrayGeometry};

/// One codebook design instance; the mainlobe level is fixed to 1.
#[derive(Debug, Clone, PartialEq)]
pub struct BeamDesignProblem<T: Real> {
    pub geometry: ArrayGeometry<T>,
    pub theta_target_deg: T,
    pub theta_comm_deg: T,
    pub sidelobe_grid_deg: Vec<T>,
    /// Target complex sidelobe level toward the communication receiver.
    pub delta: Complex<T>,
    /// Mainlobe amplitude `g` of the unit-modulus vector; the equalities read
    /// `h^H a(θ_t) = g` and `h^H a(θ_c) = g·Δ`, and all levels are reported relative to `g`.
    pub mainlobe_gain: T,
}

impl<T: Real> BeamDesignProblem<T> {
    pub fn validate(&self) -> Result<()> {
        if self.sidelobe_grid_deg.is_empty() {
            return Err(Error::Domain("sidelobe grid must contain at least one angle".into()));
        }
        let tol = lit::<T>(1e-9);
        let within = |x: T| x >= lit::<T>(-90.0) - tol && x <= lit::<T>(90.0) + tol;
        if !within(self.theta_target_deg) || !within(self.theta_comm_deg) {
            return Err(Error::Domain("angles must lie in [-90°, 90°]".into()));
        }
        if let Some(bad) = self.sidelobe_grid_deg.iter().find(|&&x| !within(x)) {
            return Err(Error::Domain(format!(
                "sidelobe angle {} outside [-90°, 90°]",
                crate::scalar::to_f64(*bad)
            )));
        }
        if self
            .sidelobe_grid_deg
            .iter()
            .any(|&x| (x - self.theta_target_deg).abs() <= tol)
        {
            return Err(Error::Domain("target direction lies on the sidelobe grid".into()));
        }
        let m = lit::<T>(self.geometry.elements() as f64);
        if !(self.mainlobe_gain > T::zero() && self.mainlobe_gain <= m) {
            return Err(Error::Domain(
                "mainlobe gain must lie in (0, M] for a unit-modulus vector".into(),
            ));
        }
        let lo = self.sidelobe_grid_deg.iter().copied().fold(self.sidelobe_grid_deg[0], T::min);
        let hi = self.sidelobe_grid_deg.iter().copied().fold(self.sidelobe_grid_deg[0], T::max);
        if self.theta_comm_deg < lo - tol || self.theta_comm_deg > hi + tol {
            return Err(Error::Domain(
                "communication direction must lie inside the sidelobe region".into(),
            ));
        }
        Ok(())
    }
}

/// ADMM parameters. Penalties are the starting values of the schedule.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdmmConfig<T> {
    pub rho1: T,
    pub rho2: T,
    pub rho3: T,
    pub beta: T,
    pub gamma1: T,
    pub gamma2: T,
    pub eta: T,
    pub max_iters: usize,
    pub seed: u64,
    /// Keep a per-iteration record of subproblem residuals.
    pub record_trace: bool,
}

impl<T: Real> Default for AdmmConfig<T> {
    fn default() -> Self {
        Self {
            rho1: lit(200.0),
            rho2: lit(20.0),
            rho3: lit(20.0),
            beta: lit(0.1),
            gamma1: lit(1e-3),
            gamma2: lit(1e-3),
            eta: lit(1e-2),
            max_iters: 20_000,
            seed: 0,
            record_trace: false,
        }
    }
}

impl<T: Real> AdmmConfig<T> {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("rho1", self.rho1),
            ("rho2", self.rho2),
            ("rho3", self.rho3),
            ("gamma1", self.gamma1),
            ("gamma2", self.gamma2),
            ("eta", self.eta),
        ];
        for (name, v) in positive {
            if !(v > T::zero()) {
                return Err(Error::Domain(format!("{name} must be positive")));
            }
        }
        if !(self.beta >= T::zero()) {
            return Err(Error::Domain("beta must be nonnegative".into()));
        }
        if self.max_iters < 1 {
            return Err(Error::Domain("max_iters must be at least 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Penalties<T> {
    pub rho1: T,
    pub rho2: T,
    pub rho3: T,
}

/// Primal, auxiliary and dual iterates.
#[derive(Debug, Clone, PartialEq)]
pub struct AdmmState<T: Real> {
    pub h: CVector<T>,
    pub z: CVector<T>,
    pub sigma: CVector<T>,
    pub rho: T,
    pub lambda: CVector<T>,
    /// Multipliers of the target (index 0) and communication (index 1) equalities.
    pub mu: [Complex<T>; 2],
    pub nu: CVector<T>,
    pub iteration: usize,
    pub penalties: Penalties<T>,
}

impl<T: Real> AdmmState<T> {
    /// Random start: unit-circle `h`, `z = h`, small circular-Gaussian duals.
    pub fn random(ctx: &BeamDesignContext<T>, config: &AdmmConfig<T>, rng: &mut impl Rng) -> Self {
        let m = ctx.elements();
        let i = ctx.sidelobes.len();
        let h = CVector::from_fn(m, |_, _| cis(lit::<T>(rng.random_range(0.0..std::f64::consts::TAU))));
        let mut small = || {
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = rng.sample(StandardNormal);
            let s = 1e-2 * std::f64::consts::FRAC_1_SQRT_2;
            cplx(lit::<T>(re * s), lit::<T>(im * s))
        };
        let lambda = CVector::from_fn(i, |_, _| small());
        let mu = [small(), small()];
        let nu = CVector::from_fn(m, |_, _| small());
        Self {
            z: h.clone(),
            h,
            sigma: CVector::zeros(i),
            rho: T::zero(),
            lambda,
            mu,
            nu,
            iteration: 0,
            penalties: Penalties {
                rho1: config.rho1,
                rho2: config.rho2,
                rho3: config.rho3,
            },
        }
    }
}

/// Steering data precomputed from a [`BeamDesignProblem`].
#[derive(Debug, Clone)]
pub struct BeamDesignContext<T: Real> {
    pub sidelobes: Vec<CVector<T>>,
    /// `a(θ_t)` and `a(θ_c)`.
    pub anchors: [CVector<T>; 2],
    /// Absolute equality targets `g` and `g·Δ_k`.
    pub levels: [Complex<T>; 2],
    gain: T,
    sidelobe_outer: CMatrix<T>,
    anchor_outer: CMatrix<T>,
}

impl<T: Real> BeamDesignContext<T> {
    pub fn new(problem: &BeamDesignProblem<T>) -> Result<Self> {
        problem.validate()?;
        let g = &problem.geometry;
        let sidelobes = problem
            .sidelobe_grid_deg
            .iter()
            .map(|&th| spatial_steering_deg(g, th).map(|a| a.into_inner()))
            .collect::<Result<Vec<_>>>()?;
        let anchors = [
            spatial_steering_deg(g, problem.theta_target_deg)?.into_inner(),
            spatial_steering_deg(g, problem.theta_comm_deg)?.into_inner(),
        ];
        let m = g.elements();
        let mut sidelobe_outer = CMatrix::zeros(m, m);
        for a in &sidelobes {
            sidelobe_outer += a * a.adjoint();
        }
        let mut anchor_outer = CMatrix::zeros(m, m);
        for a in &anchors {
            anchor_outer += a * a.adjoint();
        }
        Ok(Self {
            sidelobes,
            anchors,
            levels: [cplx(problem.mainlobe_gain, T::zero()), problem.delta * problem.mainlobe_gain],
            gain: problem.mainlobe_gain,
            sidelobe_outer,
            anchor_outer,
        })
    }

    pub fn elements(&self) -> usize {
        self.anchors[0].len()
    }

    /// `h^H a(θ_i)` over the sidelobe grid.
    pub fn sidelobe_gains(&self, h: &CVector<T>) -> CVector<T> {
        CVector::from_iterator(self.sidelobes.len(), self.sidelobes.iter().map(|a| inner(h, a)))
    }

    pub fn mainlobe_gain(&self) -> T {
        self.gain
    }

    /// `h^H a(θ_l) - Δ_l` for l = target, communication, in absolute units.
    pub fn equality_residuals(&self, h: &CVector<T>) -> [Complex<T>; 2] {
        [
            inner(h, &self.anchors[0]) - self.levels[0],
            inner(h, &self.anchors[1]) - self.levels[1],
        ]
    }

    /// Peak sidelobe level `max_i 20·log10|h^H a(θ_i) / g|` in dB.
    pub fn psl_db(&self, h: &CVector<T>) -> T {
        let peak = self
            .sidelobes
            .iter()
            .map(|a| abs2(inner(h, a)))
            .fold(T::zero(), T::max);
        db_from_power(peak / (self.gain * self.gain))
    }

    /// `20·log10|h^H a(θ_c) / g|` in dB.
    pub fn comm_level_db(&self, h: &CVector<T>) -> T {
        db_from_power(abs2(inner(h, &self.anchors[1])) / (self.gain * self.gain))
    }
}

/// `min ρ² + w·Σ|ς_i|² + Re Σ c_i^* ς_i` subject to `|ς_i| ≤ ρ`.
#[derive(Debug, Clone)]
pub struct SigmaRhoSubproblem<T: Real> {
    pub weight: T,
    pub c: CVector<T>,
}

impl<T: Real> SigmaRhoSubproblem<T> {
    pub fn objective(&self, rho: T, sigma: &CVector<T>) -> T {
        let mut f = rho * rho;
        for (s, c) in sigma.iter().zip(self.c.iter()) {
            f += self.weight * abs2(*s) + (c.conj() * s).re;
        }
        f
    }

    /// Exact minimiser.
    ///
    /// For fixed ρ each ς_i is `-c_i/(2w)` pulled radially onto the disc of radius ρ,
    /// leaving a convex, C¹, piecewise-quadratic function of ρ whose derivative
    /// `2ρ + Σ_{r_i>ρ} (2wρ - |c_i|)`, with `r_i = |c_i|/(2w)`, is solved piece by piece.
    pub fn solve(&self) -> (T, CVector<T>) {
        let two = lit::<T>(2.0);
        let mut mags: Vec<T> = self.c.iter().map(|c| modulus(*c)).collect();
        mags.sort_by(|a, b| b.partial_cmp(a).unwrap_or(std::cmp::Ordering::Equal));
        let radius = |m: T| m / (two * self.weight);
        let mut rho = T::zero();
        let mut sum = T::zero();
        for k in 0..mags.len() {
            sum += mags[k];
            let cand = sum / (two + two * self.weight * lit(k as f64 + 1.0));
            let upper = radius(mags[k]);
            let lower = if k + 1 < mags.len() { radius(mags[k + 1]) } else { T::zero() };
            if cand <= upper && cand >= lower {
                rho = cand;
                break;
            }
        }
        let sigma = self.clip(rho);
        (rho, sigma)
    }

    /// Per-entry minimiser for a fixed ρ.
    pub fn clip(&self, rho: T) -> CVector<T> {
        let two = lit::<T>(2.0);
        self.c.map(|c| {
            let free = -c / (two * self.weight);
            let r = modulus(free);
            if r <= rho {
                free
            } else {
                free * (rho / r)
            }
        })
    }
}

/// Builds the (ρ, ς) subproblem at the current iterate.
///
/// From the augmented Lagrangian the ς-terms are `(ϱ₁/2)|ς_i|² + Re[c_i^* ς_i]` with
/// `c_i = λ_i - ϱ₁·h^H a(θ_i)`, so the unconstrained optimum tracks `h^H a(θ_i)`.
pub fn sigma_rho_subproblem<T: Real>(state: &AdmmState<T>, ctx: &BeamDesignContext<T>) -> SigmaRhoSubproblem<T> {
    let rho1 = state.penalties.rho1;
    let gains = ctx.sidelobe_gains(&state.h);
    SigmaRhoSubproblem {
        weight: rho1 * lit(0.5),
        c: CVector::from_fn(gains.len(), |i, _| state.lambda[i] - gains[i] * rho1),
    }
}

pub fn solve_sigma_rho_subproblem<T: Real>(
    state: &AdmmState<T>,
    ctx: &BeamDesignContext<T>,
) -> (T, CVector<T>) {
    sigma_rho_subproblem(state, ctx).solve()
}

/// `D` and `e` of the quadratic `h^H D h + Re[e^H h]`.
pub fn h_system<T: Real>(state: &AdmmState<T>, ctx: &BeamDesignContext<T>) -> (CMatrix<T>, CVector<T>) {
    let p = state.penalties;
    let half = lit::<T>(0.5);
    let m = ctx.elements();
    let mut d = ctx.sidelobe_outer.scale(p.rho1 * half) + ctx.anchor_outer.scale(p.rho2 * half);
    for k in 0..m {
        d[(k, k)] += cplx(p.rho3 * half, T::zero());
    }
    let mut e = &state.nu - state.z.scale(p.rho3);
    for (i, a) in ctx.sidelobes.iter().enumerate() {
        let coef = -state.lambda[i].conj() - state.sigma[i].conj() * p.rho1;
        e += a * coef;
    }
    for l in 0..2 {
        let coef = state.mu[l].conj() - ctx.levels[l].conj() * p.rho2;
        e += &ctx.anchors[l] * coef;
    }
    (d, e)
}

/// Minimiser `h = -D⁻¹e/2` and the relative residual `‖Dh + e/2‖/‖e‖`.
pub fn solve_h_subproblem<T: Real>(state: &AdmmState<T>, ctx: &BeamDesignContext<T>) -> Result<(CVector<T>, T)> {
    let (d, e) = h_system(state, ctx);
    let rhs = e.scale(lit(-0.5));
    let chol = d
        .clone()
        .cholesky()
        .ok_or_else(|| Error::Singular("h-subproblem matrix is not positive definite".into()))?;
    let h = chol.solve(&rhs);
    let residual = (&d * &h - &rhs).norm();
    let scale = e.norm();
    let rel = if scale > T::zero() { residual / scale } else { residual };
    Ok((h, rel))
}

/// Unit-modulus minimiser of `Re[y^H z]` with `y = -ν - ϱ₃h`: `z(m) = -y(m)/|y(m)|`.
/// Entries with `y(m) = 0` keep their previous value.
pub fn solve_z_subproblem<T: Real>(state: &AdmmState<T>) -> CVector<T> {
    let rho3 = state.penalties.rho3;
    CVector::from_fn(state.h.len(), |m, _| {
        let y = -state.nu[m] - state.h[m] * rho3;
        let r = modulus(y);
        if r > T::zero() {
            -y / r
        } else {
            state.z[m]
        }
    })
}

/// Dual ascent step on λ, μ, ν.
pub fn update_duals<T: Real>(state: &mut AdmmState<T>, ctx: &BeamDesignContext<T>, config: &AdmmConfig<T>) {
    let p = state.penalties;
    let beta = config.beta;
    let gains = ctx.sidelobe_gains(&state.h);
    for i in 0..state.lambda.len() {
        state.lambda[i] += (state.sigma[i] - gains[i]) * (beta * p.rho1);
    }
    let res = ctx.equality_residuals(&state.h);
    for l in 0..2 {
        state.mu[l] += res[l] * (beta * p.rho2);
    }
    for m in 0..state.nu.len() {
        let r = state.h[m] - state.z[m];
        state.nu[m] += r * (beta * p.rho3);
    }
}

/// Penalty schedule. `previous` holds `(h^ℓ, z^ℓ)`; `state` holds the new iterate.
pub fn update_penalties<T: Real>(
    state: &mut AdmmState<T>,
    ctx: &BeamDesignContext<T>,
    config: &AdmmConfig<T>,
    previous: (&CVector<T>, &CVector<T>),
) {
    let ell = lit::<T>(state.iteration as f64 + 1.0);
    let res = ctx.equality_residuals(&state.h);
    if res.iter().any(|r| modulus(*r) > config.gamma1) {
        state.penalties.rho2 = T::max(lit(20.0), T::min(lit::<T>(1.4) * ell, lit(6e3)));
    }
    let (h_prev, z_prev) = previous;
    let contracts = (0..state.h.len()).any(|m| {
        let gap = modulus(h_prev[m] - z_prev[m]);
        gap > config.gamma2
            && modulus(state.h[m] - h_prev[m]) + modulus(state.z[m] - z_prev[m]) < gap
    });
    if contracts {
        state.penalties.rho3 = T::max(lit(20.0), T::min(lit::<T>(3.0) * ell, lit(1e6)));
    }
}

/// Per-iteration record kept when [`AdmmConfig::record_trace`] is set.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IterationRecord<T> {
    pub iteration: usize,
    pub h_residual: T,
    pub sigma_rho_objective: T,
    pub max_change: T,
    pub rho: T,
}

/// Quality measures of a designed weight vector.
#[derive(Debug, Clone, PartialEq)]
pub struct BeamDiagnostics<T> {
    /// PSL of the projected (exactly constant-modulus) vector, dB.
    pub psl_db: T,
    pub psl_db_pre_projection: T,
    /// `|h^H a(θ_t)/g - 1|` after projection.
    pub mainlobe_residual: T,
    pub mainlobe_residual_pre_projection: T,
    /// `20·log10|h^H a(θ_c)/g|` after projection.
    pub comm_level_db: T,
    /// `|h^H a(θ_c)/g - Δ|` after projection.
    pub comm_residual: T,
    pub comm_residual_pre_projection: T,
    /// `max_m ||h(m)| - 1|` before the final projection.
    pub modulus_error_pre_projection: T,
    pub iterations: usize,
    pub converged: bool,
    /// Largest relative h-subproblem residual seen during the run.
    pub max_h_residual: T,
    pub final_penalties: Penalties<T>,
}

/// Output of [`design_weight_vector`].
#[derive(Debug, Clone)]
pub struct BeamDesign<T: Real> {
    pub h: CVector<T>,
    /// Iterate before the final unit-modulus projection.
    pub h_raw: CVector<T>,
    pub diagnostics: BeamDiagnostics<T>,
    pub trace: Vec<IterationRecord<T>>,
}

fn max_abs_diff<T: Real>(a: &CVector<T>, b: &CVector<T>) -> T {
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| modulus(*x - *y))
        .fold(T::zero(), T::max)
}

/// Runs the ADMM iteration for one Δ level.
pub fn design_weight_vector<T: Real>(problem: &BeamDesignProblem<T>, config: &AdmmConfig<T>) -> Result<BeamDesign<T>> {
    config.validate()?;
    let ctx = BeamDesignContext::new(problem)?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut state = AdmmState::random(&ctx, config, &mut rng);
    let mut trace = Vec::new();
    let mut max_h_residual = T::zero();
    let mut converged = false;

    while state.iteration < config.max_iters {
        let prev = state.clone();

        let sub = sigma_rho_subproblem(&state, &ctx);
        let (rho, sigma) = sub.solve();
        state.rho = rho;
        state.sigma = sigma;

        let (h, h_res) = solve_h_subproblem(&state, &ctx)?;
        state.h = h;
        max_h_residual = T::max(max_h_residual, h_res);

        state.z = solve_z_subproblem(&state);

        let even = state.iteration % 2 == 0;
        if even {
            update_duals(&mut state, &ctx, config);
        }
        update_penalties(&mut state, &ctx, config, (&prev.h, &prev.z));

        let change = [
            max_abs_diff(&state.h, &prev.h),
            max_abs_diff(&state.z, &prev.z),
            max_abs_diff(&state.sigma, &prev.sigma),
            (state.rho - prev.rho).abs(),
            max_abs_diff(&state.lambda, &prev.lambda),
            modulus(state.mu[0] - prev.mu[0]).max(modulus(state.mu[1] - prev.mu[1])),
            max_abs_diff(&state.nu, &prev.nu),
        ]
        .into_iter()
        .fold(T::zero(), T::max);

        if config.record_trace {
            trace.push(IterationRecord {
                iteration: state.iteration,
                h_residual: h_res,
                sigma_rho_objective: sub.objective(state.rho, &state.sigma),
                max_change: change,
                rho: state.rho,
            });
        }
        state.iteration += 1;
        // Duals move only on even iterations, so judge convergence right after they do.
        if even && state.iteration > 2 && change < config.eta {
            converged = true;
            break;
        }
    }

    let h_raw = state.h.clone();
    let h = h_raw.map(|x| {
        let r = modulus(x);
        if r > T::zero() {
            x / r
        } else {
            cplx(T::one(), T::zero())
        }
    });
    let res_pre = ctx.equality_residuals(&h_raw);
    let res_post = ctx.equality_residuals(&h);
    let modulus_error = h_raw
        .iter()
        .map(|x| (modulus(*x) - T::one()).abs())
        .fold(T::zero(), T::max);
    let diagnostics = BeamDiagnostics {
        psl_db: ctx.psl_db(&h),
        psl_db_pre_projection: ctx.psl_db(&h_raw),
        mainlobe_residual: modulus(res_post[0]) / ctx.gain,
        mainlobe_residual_pre_projection: modulus(res_pre[0]) / ctx.gain,
        comm_level_db: ctx.comm_level_db(&h),
        comm_residual: modulus(res_post[1]) / ctx.gain,
        comm_residual_pre_projection: modulus(res_pre[1]) / ctx.gain,
        modulus_error_pre_projection: modulus_error,
        iterations: state.iteration,
        converged,
        max_h_residual,
        final_penalties: state.penalties,
    };
    Ok(BeamDesign {
        h,
        h_raw,
        diagnostics,
        trace,
    })
}

/// The K constant-modulus vectors of a spatial-modulation dictionary.
#[derive(Debug, Clone, PartialEq)]
pub struct Codebook<T: Real> {
    pub geometry: ArrayGeometry<T>,
    pub vectors: Vec<CVector<T>>,
    pub deltas: Vec<Complex<T>>,
    pub diagnostics: Vec<BeamDiagnostics<T>>,
}

impl<T: Real> Codebook<T> {
    /// Checks K = 2^L, matching lengths and element counts.
    pub fn new(
        geometry: ArrayGeometry<T>,
        vectors: Vec<CVector<T>>,
        deltas: Vec<Complex<T>>,
        diagnostics: Vec<BeamDiagnostics<T>>,
    ) -> Result<Self> {
        let k = vectors.len();
        if k == 0 || !k.is_power_of_two() {
            return Err(Error::Domain(format!("codebook size must be a power of two, got {k}")));
        }
        if deltas.len() != k {
            return Err(Error::dim("codebook levels", k, deltas.len()));
        }
        if !diagnostics.is_empty() && diagnostics.len() != k {
            return Err(Error::dim("codebook diagnostics", k, diagnostics.len()));
        }
        if let Some(v) = vectors.iter().find(|v| v.len() != geometry.elements()) {
            return Err(Error::dim("codebook vector", geometry.elements(), v.len()));
        }
        Ok(Self {
            geometry,
            vectors,
            deltas,
            diagnostics,
        })
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    /// Bits carried per pulse, `log2 K`.
    pub fn bits_per_symbol(&self) -> usize {
        self.vectors.len().trailing_zeros() as usize
    }

    /// True when every vector was flagged converged.
    pub fn all_converged(&self) -> bool {
        self.diagnostics.iter().all(|d| d.converged)
    }

    /// Indices `(j, k)` of entries that share a Δ level; their vectors come from
    /// independent random starts and may differ.
    pub fn duplicate_levels(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for j in 0..self.deltas.len() {
            for k in j + 1..self.deltas.len() {
                if self.deltas[j] == self.deltas[k] {
                    out.push((j, k));
                }
            }
        }
        out
    }
}

/// Seed for entry `k` of a codebook designed with base seed `seed`.
pub fn entry_seed(seed: u64, k: usize) -> u64 {
    seed.wrapping_add((k as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15))
}

/// Designs one vector per problem (in dictionary order), concurrently.
pub fn design_codebook<T: Real>(problems: &[BeamDesignProblem<T>], config: &AdmmConfig<T>) -> Result<Codebook<T>> {
    design_codebook_detailed(problems, config).map(|(codebook, _)| codebook)
}

/// [`design_codebook`] that also returns the full per-vector designs.
pub fn design_codebook_detailed<T: Real>(
    problems: &[BeamDesignProblem<T>],
    config: &AdmmConfig<T>,
) -> Result<(Codebook<T>, Vec<BeamDesign<T>>)> {
    let first = problems
        .first()
        .ok_or_else(|| Error::Domain("codebook needs at least one level".into()))?;
    for p in problems {
        if p.geometry != first.geometry
            || p.theta_target_deg != first.theta_target_deg
            || p.theta_comm_deg != first.theta_comm_deg
            || p.sidelobe_grid_deg != first.sidelobe_grid_deg
        {
            return Err(Error::Domain(
                "codebook problems must share geometry, directions and sidelobe grid".into(),
            ));
        }
    }
    let designs = problems
        .par_iter()
        .enumerate()
        .map(|(k, p)| {
            let cfg = AdmmConfig {
                seed: entry_seed(config.seed, k),
                ..*config
            };
            design_weight_vector(p, &cfg)
        })
        .collect::<Result<Vec<_>>>()?;
    let codebook = Codebook::new(
        first.geometry.clone(),
        designs.iter().map(|d| d.h.clone()).collect(),
        problems.iter().map(|p| p.delta).collect(),
        designs.iter().map(|d| d.diagnostics.clone()).collect(),
    )?;
    Ok((codebook, designs))
}
