use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::scalar::{cplx, lit, quad_form, trace_product, CMatrix, CVector, Real};

use super::rank_one::{identity_error, rank_one_decomposition, sorted_eigen};
use super::{align_phase, similarity_distance, FilterDesignProblem, RobustOptions, SynthesisPath};

/// Offset used for auxiliary Dopplers when the grid has fewer than three points.
const AUX_OFFSET: f64 = 1e-3;

/// Slack on the similarity budget for rounding in the synthesized vector.
const SIMILARITY_SLACK: f64 = 1e-6;

/// Budget excess below which a candidate is pulled back instead of discarded.
const REPAIRABLE_EXCESS: f64 = 1e-3;

/// Synthesized unit-norm filter with a record of how it was found.
#[derive(Debug, Clone, PartialEq)]
pub struct Synthesis<T: Real> {
    pub w: CVector<T>,
    pub path: SynthesisPath,
    pub rank: usize,
    pub psi_star: T,
    pub psi_auxiliary: [T; 2],
    pub auxiliary_perturbed: bool,
    pub identity_error: Option<T>,
    pub similarity: T,
}

/// Number of eigenvalues above `tolerance·λ_max`.
pub fn numerical_rank<T: Real>(w: &CMatrix<T>, tolerance: T) -> usize {
    let (values, _) = sorted_eigen(w);
    let top = values.first().copied().unwrap_or_else(T::zero);
    if !(top > T::zero()) {
        return 0;
    }
    values.iter().filter(|&&v| v > tolerance * top).count()
}

/// The two grid points closest in index to `q_star`, ties going to the lower index.
///
/// With fewer than three grid points the missing ones are `ψ* ± 10⁻³`, and the flag
/// is set.
pub fn auxiliary_dopplers<T: Real>(grid: &[T], q_star: usize) -> ([T; 2], bool) {
    let mut others: Vec<usize> = (0..grid.len()).filter(|&k| k != q_star).collect();
    others.sort_by_key(|&k| (k.abs_diff(q_star), k));
    let psi = grid[q_star];
    let offset = lit::<T>(AUX_OFFSET);
    match others.as_slice() {
        [a, b, ..] => ([grid[*a], grid[*b]], false),
        [a] => {
            let extra = if grid[*a] > psi { psi - offset } else { psi + offset };
            ([grid[*a], extra], true)
        }
        [] => ([psi - offset, psi + offset], true),
    }
}

fn unit<T: Real>(w: CVector<T>) -> Option<CVector<T>> {
    let n = w.norm();
    (n > T::zero() && n.is_finite()).then(|| w.unscale(n))
}

/// Worst-case linear SINR over precomputed numerator matrices.
fn worst_linear<T: Real>(w: &CVector<T>, interference: &CMatrix<T>, numerators: &[CMatrix<T>]) -> T {
    let den = quad_form(interference, w);
    numerators
        .iter()
        .map(|g| quad_form(g, w) / den)
        .fold(T::max_value().unwrap_or(T::one()), T::min)
}

/// Extracts a unit-norm `w` from the relaxation solution `W`.
///
/// The primary route matches `tr(W G_i)` for the interference covariance and the
/// numerators at `ψ*` (the grid point where `W` is weakest) and its two neighbours.
/// The result is rescaled to unit norm and phase-aligned with `w₀`. If it breaks the
/// similarity budget, randomly mixed retries follow, then a decomposition matching
/// `G₁, G₂, I, w₀w₀^H` (which satisfies the budget by construction), and finally
/// Gaussian randomization pulled toward `w₀` until feasible.
pub fn synthesize_weight<T: Real>(
    big_w: &CMatrix<T>,
    problem: &FilterDesignProblem<T>,
    w0: &CVector<T>,
    options: &RobustOptions<T>,
) -> Result<Synthesis<T>> {
    let n = problem.pulses();
    if big_w.nrows() != n || !big_w.is_square() {
        return Err(Error::dim("relaxation matrix", n, big_w.nrows()));
    }
    let interference = problem.interference();
    let numerators: Vec<CMatrix<T>> = problem.psi_grid.iter().map(|&p| problem.numerator_matrix(p)).collect();
    let q_star = (0..numerators.len())
        .min_by(|&a, &b| {
            trace_product(&numerators[a], big_w)
                .partial_cmp(&trace_product(&numerators[b], big_w))
                .unwrap_or(std::cmp::Ordering::Equal)
        })
        .unwrap_or(0);
    let psi_star = problem.psi_grid[q_star];
    let (psi_auxiliary, auxiliary_perturbed) = auxiliary_dopplers(&problem.psi_grid, q_star);
    let rank = numerical_rank(big_w, options.rank_tolerance);
    if rank == 0 {
        return Err(Error::Degenerate("relaxation matrix is zero".into()));
    }
    let budget = problem.xi + lit(SIMILARITY_SLACK);

    let finish = |w: CVector<T>, path: SynthesisPath, err: Option<T>| -> Option<Synthesis<T>> {
        let w = align_phase(&unit(w)?, w0);
        // Rounding in an active similarity constraint is repaired by a short pull.
        if similarity_distance(&w, w0) > budget + lit(REPAIRABLE_EXCESS) {
            return None;
        }
        let w = pull_to_budget(w, w0, budget)?;
        let similarity = similarity_distance(&w, w0);
        (similarity <= budget).then_some(Synthesis {
            w,
            path,
            rank,
            psi_star,
            psi_auxiliary,
            auxiliary_perturbed,
            identity_error: err,
            similarity,
        })
    };

    let g2 = numerators[q_star].clone();
    let g3 = problem.numerator_matrix(psi_auxiliary[0]);
    let g4 = problem.numerator_matrix(psi_auxiliary[1]);
    let doppler_set = [&interference, &g2, &g3, &g4];

    if rank == 1 {
        let (values, vectors) = sorted_eigen(big_w);
        let w = vectors.column(0) * cplx(values[0].sqrt(), T::zero());
        let err = identity_error(&w, big_w, &doppler_set);
        if let Some(s) = finish(w, SynthesisPath::Principal, Some(err)) {
            return Ok(s);
        }
    }

    let mut rng = ChaCha8Rng::seed_from_u64(options.seed);
    for attempt in 0..=options.decomposition_retries {
        let mixing: Option<&mut dyn rand::RngCore> = if attempt == 0 { None } else { Some(&mut rng) };
        if let Ok(w) = rank_one_decomposition(
            big_w,
            doppler_set,
            options.rank_tolerance,
            options.identity_tolerance,
            mixing,
        ) {
            let err = identity_error(&w, big_w, &doppler_set);
            if let Some(s) = finish(w, SynthesisPath::Decomposition, Some(err)) {
                return Ok(s);
            }
        }
    }

    let identity = CMatrix::identity(n, n);
    let w0w0 = w0 * w0.adjoint();
    let similarity_set = [&interference, &g2, &identity, &w0w0];
    for attempt in 0..=options.decomposition_retries {
        let mixing: Option<&mut dyn rand::RngCore> = if attempt == 0 { None } else { Some(&mut rng) };
        if let Ok(w) = rank_one_decomposition(
            big_w,
            similarity_set,
            options.rank_tolerance,
            options.identity_tolerance,
            mixing,
        ) {
            let err = identity_error(&w, big_w, &similarity_set);
            if let Some(s) = finish(w, SynthesisPath::SimilarityDecomposition, Some(err)) {
                return Ok(s);
            }
        }
    }

    randomized(big_w, w0, &interference, &numerators, budget, options, &mut rng).and_then(|w| {
        finish(w, SynthesisPath::Randomized, None)
            .ok_or_else(|| Error::Degenerate("randomized synthesis left the similarity budget".into()))
    })
}

/// Moves a unit vector along the chord toward `w₀` (renormalizing) until it meets the
/// budget, stopping at the first point that does.
fn pull_to_budget<T: Real>(w: CVector<T>, w0: &CVector<T>, budget: T) -> Option<CVector<T>> {
    let w = align_phase(&w, w0);
    if similarity_distance(&w, w0) <= budget {
        return Some(w);
    }
    let pull = |tau: T| {
        unit(&w * cplx(T::one() - tau, T::zero()) + w0 * cplx(tau, T::zero())).map(|v| align_phase(&v, w0))
    };
    let (mut lo, mut hi) = (T::zero(), T::one());
    for _ in 0..60 {
        let mid = (lo + hi) * lit(0.5);
        match pull(mid) {
            Some(v) if similarity_distance(&v, w0) <= budget => hi = mid,
            _ => lo = mid,
        }
    }
    pull(hi)
}

/// Gaussian draws `w ~ CN(0, W)`, each pulled toward `w₀` along the chord until it
/// meets the budget; keeps the best worst-case SINR.
fn randomized<T: Real>(
    big_w: &CMatrix<T>,
    w0: &CVector<T>,
    interference: &CMatrix<T>,
    numerators: &[CMatrix<T>],
    budget: T,
    options: &RobustOptions<T>,
    rng: &mut ChaCha8Rng,
) -> Result<CVector<T>> {
    let n = big_w.nrows();
    let (values, vectors) = sorted_eigen(big_w);
    let factor = CMatrix::from_fn(n, n, |i, k| vectors[(i, k)] * values[k].max(T::zero()).sqrt());
    let mut best: Option<(T, CVector<T>)> = None;
    for _ in 0..options.rounding_draws.max(1) {
        let z = CVector::from_fn(n, |_, _| {
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = rng.sample(StandardNormal);
            cplx(lit::<T>(re * std::f64::consts::FRAC_1_SQRT_2), lit::<T>(im * std::f64::consts::FRAC_1_SQRT_2))
        });
        let Some(w) = unit(&factor * z).map(|v| align_phase(&v, w0)) else {
            continue;
        };
        let Some(w) = pull_to_budget(w, w0, budget) else {
            continue;
        };
        let score = worst_linear(&w, interference, numerators);
        if best.as_ref().is_none_or(|(s, _)| score > *s) {
            best = Some((score, w));
        }
    }
    best.map(|(_, w)| w)
        .ok_or_else(|| Error::Degenerate("randomized synthesis produced no candidate".into()))
}
