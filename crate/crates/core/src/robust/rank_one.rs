//! Constructive rank-one decomposition: given `W ⪰ 0` and Hermitian `G₁ ≻ 0`,
//! `G₂, G₃, G₄`, find `w` with `w^H G_i w = tr(W G_i)` for all four.
//!
//! Writing `W = V V^H` and `w = V x`, the three matrices
//! `B_k = V^H (G_k - (t_k/t₁) G₁) V` have zero trace, and any `x` with
//! `x^H B_k x = 0` for k = 2, 3, 4 rescales to a solution. Such an `x` is built by
//!
//! 1. pair-mixing an orthonormal basis until every basis vector has zero `B₂` form;
//! 2. pair-mixing again, with the mixing phase chosen to keep the `B₂` forms at zero,
//!    until the `B₃` forms vanish as well;
//! 3. walking along a one-parameter family of vectors on which the `B₂` and `B₃` forms
//!    vanish identically and whose `B₄` form changes sign, and bisecting for its root.
//!
//! Step 3 needs three basis vectors. For rank-2 `W` the third direction comes from a
//! vector outside the range of `W`, so the result lies in `range(W) + span(g)`.

use num_complex::Complex;
use rand::Rng;
use rand_distr::StandardNormal;
use thiserror::Error;

use crate::scalar::{cplx, inner, lit, modulus, quad_form, to_f64, trace_product, CMatrix, CVector, Real};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum RankOneError {
    #[error("matrix is zero")]
    Zero,
    #[error("rank-2 decomposition needs at least 3 dimensions")]
    TooSmall,
    #[error("normalizing form is not positive on the range of W")]
    NotPositive,
    #[error("construction degenerated: {0}")]
    Degenerate(&'static str),
    #[error("trace identities violated by {0:e}")]
    Mismatch(f64),
}

type R<T> = std::result::Result<T, RankOneError>;

/// Eigenvalues (descending) and matching eigenvectors of a Hermitian matrix.
pub(crate) fn sorted_eigen<T: Real>(w: &CMatrix<T>) -> (Vec<T>, CMatrix<T>) {
    let eig = crate::scalar::hermitian_part(w).symmetric_eigen();
    let mut idx: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    idx.sort_by(|&a, &b| {
        eig.eigenvalues[b]
            .partial_cmp(&eig.eigenvalues[a])
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    let values = idx.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = CMatrix::from_fn(w.nrows(), idx.len(), |r, c| eig.eigenvectors[(r, idx[c])]);
    (values, vectors)
}

fn random_unitary<T: Real>(r: usize, rng: &mut impl Rng) -> CMatrix<T> {
    let g = CMatrix::from_fn(r, r, |_, _| {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        cplx(lit::<T>(re), lit::<T>(im))
    });
    g.qr().q()
}

/// Mixes basis vectors pairwise until `p^H target p = 0` for every one of them,
/// keeping `p^H keep p = 0` when a second form is given.
fn purify<T: Real>(target: &CMatrix<T>, keep: Option<&CMatrix<T>>, basis: &mut [CVector<T>]) -> R<()> {
    let scale = target.norm();
    let tol = lit::<T>(1e-13) * scale;
    let j_unit = cplx(T::zero(), T::one());
    for _ in 0..=basis.len() {
        let diag: Vec<T> = basis.iter().map(|p| quad_form(target, p)).collect();
        let (mut hi, mut lo) = (0, 0);
        for k in 0..diag.len() {
            if diag[k] > diag[hi] {
                hi = k;
            }
            if diag[k] < diag[lo] {
                lo = k;
            }
        }
        if diag[hi] <= tol && diag[lo] >= -tol {
            return Ok(());
        }
        if !(diag[hi] > T::zero() && diag[lo] < T::zero()) {
            return Err(RankOneError::Degenerate("diagonal lost its zero sum"));
        }
        let (a, b) = (diag[hi], diag[lo]);
        let c_target = inner(&basis[hi], &(target * &basis[lo]));
        let (phase, tau) = match keep {
            None => {
                let phase = unit_rotating_off(c_target, j_unit);
                (phase, (a / -b).sqrt())
            }
            Some(k) => {
                let c_keep = inner(&basis[hi], &(k * &basis[lo]));
                let phase = unit_rotating_off(c_keep, j_unit);
                let kappa = (phase * c_target).re;
                let disc = (kappa * kappa - a * b).sqrt();
                (phase, (-kappa - disc) / b)
            }
        };
        let gamma = phase * tau;
        let norm = (T::one() + tau * tau).sqrt();
        let y = (&basis[hi] + &basis[lo] * gamma).unscale(norm);
        let partner = (&basis[hi] * (-gamma.conj()) + &basis[lo]).unscale(norm);
        basis[hi] = y;
        basis[lo] = partner;
    }
    Err(RankOneError::Degenerate("purification did not terminate"))
}

/// Unit `e` with `Re(e·c) = 0`.
fn unit_rotating_off<T: Real>(c: Complex<T>, j_unit: Complex<T>) -> Complex<T> {
    let r = modulus(c);
    if r > T::zero() {
        j_unit * c.conj() / r
    } else {
        cplx(T::one(), T::zero())
    }
}

/// `ω` with `(ω p + g)^H C_k (ω p + g) = 0` for k = 2, 3, given `p^H C_k p = 0`.
fn complete_direction<T: Real>(p: &CVector<T>, g: &CVector<T>, c2: &CMatrix<T>, c3: &CMatrix<T>) -> Option<CVector<T>> {
    let b2 = inner(p, &(c2 * g));
    let b3 = inner(p, &(c3 * g));
    let g2 = quad_form(c2, g);
    let g3 = quad_form(c3, g);
    let det = b2.re * b3.im - b2.im * b3.re;
    let scale = (modulus(b2) * modulus(b3)).max(lit(1e-300));
    if det.abs() <= lit::<T>(1e-10) * scale {
        return None;
    }
    let half = lit::<T>(-0.5);
    let (r2, r3) = (g2 * half, g3 * half);
    let a = (b3.im * r2 - b2.im * r3) / det;
    let b = (-b3.re * r2 + b2.re * r3) / det;
    Some(p * cplx(a, b) + g)
}

/// Point on the path at angle θ; its `C₂` and `C₃` forms vanish identically.
fn path_point<T: Real>(
    theta: T,
    anchor: &CVector<T>,
    p: &CVector<T>,
    q: &CVector<T>,
    c2: &CMatrix<T>,
    c3: &CMatrix<T>,
) -> CVector<T> {
    let u = p * cplx(theta.cos(), T::zero()) + q * cplx(theta.sin(), T::zero());
    let g2 = inner(anchor, &(c2 * &u));
    let g3 = inner(anchor, &(c3 * &u));
    let d2 = quad_form(c2, &u);
    let d3 = quad_form(c3, &u);
    let det = g2.re * g3.im - g2.im * g3.re;
    let half = lit::<T>(-0.5);
    let a = g3.im * d2 * half - g2.im * d3 * half;
    let b = -g3.re * d2 * half + g2.re * d3 * half;
    anchor * cplx(a, b) + u * cplx(det, T::zero())
}

/// Finds `x` with vanishing forms for `c[0..3]` among (or combining) `basis`, whose
/// vectors already have zero `c[0]` and `c[1]` forms.
fn zero_third_form<T: Real>(c: &[CMatrix<T>; 3], basis: &[CVector<T>]) -> R<CVector<T>> {
    let [c2, c3, c4] = c;
    let d: Vec<T> = basis.iter().map(|p| quad_form(c4, p)).collect();
    let scale = c4.norm();
    let tiny = lit::<T>(1e-14) * scale;
    if let Some(k) = (0..d.len()).find(|&k| d[k].abs() <= tiny * basis[k].norm_squared()) {
        return Ok(basis[k].clone());
    }
    let pos = (0..d.len()).filter(|&k| d[k] > T::zero()).max_by(|&a, &b| d[a].partial_cmp(&d[b]).unwrap());
    let neg = (0..d.len()).filter(|&k| d[k] < T::zero()).min_by(|&a, &b| d[a].partial_cmp(&d[b]).unwrap());
    let (pos, neg) = match (pos, neg) {
        (Some(p), Some(n)) => (p, n),
        _ => return Err(RankOneError::Degenerate("fourth form has one sign on the basis")),
    };
    let third = (0..d.len())
        .filter(|&k| k != pos && k != neg)
        .max_by(|&a, &b| d[a].abs().partial_cmp(&d[b].abs()).unwrap())
        .ok_or(RankOneError::Degenerate("fewer than three directions"))?;
    let (anchor, p, q) = if d[third] > T::zero() {
        (&basis[pos], &basis[neg], &basis[third])
    } else {
        (&basis[neg], &basis[pos], &basis[third])
    };
    let f = |theta: T| {
        let x = path_point(theta, anchor, p, q, c2, c3);
        let n = x.norm_squared();
        (quad_form(c4, &x) / n, x, n)
    };
    let (mut lo, mut hi) = (T::zero(), T::frac_pi_2());
    let (f_lo, _, n_lo) = f(lo);
    let (f_hi, _, n_hi) = f(hi);
    if !(n_lo > T::zero() && n_hi > T::zero()) || !(f_lo * f_hi < T::zero()) {
        return Err(RankOneError::Degenerate("path endpoints do not bracket a root"));
    }
    let lo_sign = f_lo > T::zero();
    for _ in 0..200 {
        let mid = (lo + hi) * lit(0.5);
        let (fm, x, n) = f(mid);
        if !(n > T::zero()) {
            return Err(RankOneError::Degenerate("path passed through zero"));
        }
        if fm.abs() <= tiny || hi - lo <= T::default_epsilon() {
            return Ok(x);
        }
        if (fm > T::zero()) == lo_sign {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(f((lo + hi) * lit(0.5)).1)
}

/// Largest relative trace-identity error `|w^H G w - tr(W G)| / (1 + |tr(W G)|)`.
pub fn identity_error<T: Real>(w: &CVector<T>, big_w: &CMatrix<T>, g: &[&CMatrix<T>]) -> T {
    g.iter()
        .map(|gi| {
            let t = trace_product(gi, big_w);
            (quad_form(gi, w) - t).abs() / (T::one() + t.abs())
        })
        .fold(T::zero(), T::max)
}

/// Decomposes `W` against `g = [G₁, G₂, G₃, G₄]` (with `G₁ ≻ 0`).
///
/// `mixing` applies a random unitary to the factor of `W` first, which changes the
/// construction path but not the identities; retries use it.
pub fn rank_one_decomposition<T: Real>(
    big_w: &CMatrix<T>,
    g: [&CMatrix<T>; 4],
    rank_tolerance: T,
    identity_tolerance: T,
    mixing: Option<&mut dyn rand::RngCore>,
) -> R<CVector<T>> {
    let n = big_w.nrows();
    let (values, vectors) = sorted_eigen(big_w);
    let top = values.first().copied().unwrap_or_else(T::zero);
    if !(top > T::zero()) {
        return Err(RankOneError::Zero);
    }
    let rank = values.iter().filter(|&&v| v > rank_tolerance * top).count();
    let mut factor = CMatrix::from_fn(n, rank, |i, k| vectors[(i, k)] * values[k].sqrt());
    if rank == 1 {
        return Ok(factor.column(0).into_owned());
    }
    if let Some(rng) = mixing {
        let mut rng = rng;
        factor = &factor * random_unitary::<T>(rank, &mut rng);
    }
    let w_fact = &factor * factor.adjoint();
    let t: Vec<T> = g.iter().map(|gi| trace_product(gi, &w_fact)).collect();
    if !(t[0] > T::zero()) {
        return Err(RankOneError::NotPositive);
    }

    // Coordinates: the columns of `frame`; rank-2 input gets one extra direction.
    let frame = if rank == 2 {
        if n < 3 {
            return Err(RankOneError::TooSmall);
        }
        let g_perp = vectors.column(n - 1).into_owned();
        let mut f = CMatrix::zeros(n, 3);
        f.set_column(0, &factor.column(0));
        f.set_column(1, &factor.column(1));
        f.set_column(2, &g_perp);
        f
    } else {
        factor.clone()
    };
    let d = frame.ncols();
    let mut c: Vec<CMatrix<T>> = (1..4)
        .map(|k| {
            let b = g[k] - g[0].scale(t[k] / t[0]);
            crate::scalar::hermitian_part(&(frame.adjoint() * b * &frame))
        })
        .collect();
    // Remove rounding from the trace over the range of W, which is zero exactly.
    for ck in &mut c {
        let tr = (0..rank).map(|i| ck[(i, i)].re).fold(T::zero(), |a, b| a + b) / lit(rank as f64);
        for i in 0..rank {
            ck[(i, i)] -= cplx(tr, T::zero());
        }
    }
    let c: [CMatrix<T>; 3] = [c[0].clone(), c[1].clone(), c[2].clone()];

    let mut basis: Vec<CVector<T>> = (0..rank)
        .map(|k| {
            let mut e = CVector::zeros(d);
            e[k] = cplx(T::one(), T::zero());
            e
        })
        .collect();
    purify(&c[0], None, &mut basis)?;
    purify(&c[1], Some(&c[0]), &mut basis)?;

    if rank == 2 {
        let mut e = CVector::zeros(3);
        e[2] = cplx(T::one(), T::zero());
        let third = complete_direction(&basis[0], &e, &c[0], &c[1])
            .or_else(|| complete_direction(&basis[1], &e, &c[0], &c[1]))
            .ok_or(RankOneError::Degenerate("no completing direction outside the range"))?;
        basis.push(third);
    }
    let x = zero_third_form(&c, &basis)?;

    let mut w = &frame * x;
    let form = quad_form(g[0], &w);
    if !(form > T::zero()) {
        return Err(RankOneError::NotPositive);
    }
    w *= cplx((t[0] / form).sqrt(), T::zero());
    let err = identity_error(&w, &w_fact, &g);
    if !(err <= identity_tolerance) {
        return Err(RankOneError::Mismatch(to_f64(err)));
    }
    Ok(w)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn random_psd(n: usize, rank: usize, rng: &mut ChaCha8Rng) -> CMatrix<f64> {
        let f = CMatrix::from_fn(n, rank, |_, _| {
            cplx(rng.sample::<f64, _>(StandardNormal), rng.sample::<f64, _>(StandardNormal))
        });
        let w = &f * f.adjoint();
        let tr = w.trace().re;
        w.unscale(tr)
    }

    fn random_herm(n: usize, rng: &mut ChaCha8Rng) -> CMatrix<f64> {
        let a = CMatrix::from_fn(n, n, |_, _| {
            cplx(rng.sample::<f64, _>(StandardNormal), rng.sample::<f64, _>(StandardNormal))
        });
        crate::scalar::hermitian_part(&a)
    }

    fn check(n: usize, rank: usize, seed: u64) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let w = random_psd(n, rank, &mut rng);
        let g1 = random_psd(n, n, &mut rng) + CMatrix::identity(n, n).scale(0.1);
        let g: Vec<CMatrix<f64>> = (0..3).map(|_| random_herm(n, &mut rng)).collect();
        let gs = [&g1, &g[0], &g[1], &g[2]];
        let x = rank_one_decomposition(&w, gs, 1e-9, 1e-9, None)
            .or_else(|_| rank_one_decomposition(&w, gs, 1e-9, 1e-9, Some(&mut rng)))
            .unwrap();
        assert!(identity_error(&x, &w, &gs) < 1e-9);
    }

    #[test]
    fn full_rank_instances() {
        for seed in 0..20 {
            check(5, 5, seed);
        }
    }

    #[test]
    fn rank_three_instances() {
        for seed in 0..20 {
            check(6, 3, 100 + seed);
        }
    }

    #[test]
    fn rank_two_instances() {
        for seed in 0..20 {
            check(4, 2, 200 + seed);
        }
    }

    #[test]
    fn rank_one_returns_the_factor() {
        let v: CVector<f64> = CVector::from_vec(vec![cplx(1.0, 0.5), cplx(-0.3, 0.2), cplx(0.0, 1.0)]);
        let w = &v * v.adjoint();
        let id = CMatrix::identity(3, 3);
        let x = rank_one_decomposition(&w, [&id, &id, &id, &id], 1e-9, 1e-9, None).unwrap();
        let phase: f64 = inner(&x, &v).norm();
        assert!((phase - v.norm_squared()).abs() < 1e-12);
    }

    #[test]
    fn rank_two_in_two_dimensions_is_rejected() {
        let id = CMatrix::<f64>::identity(2, 2);
        let w = id.unscale(2.0);
        let mut g2 = CMatrix::zeros(2, 2);
        g2[(0, 0)] = cplx(1.0, 0.0);
        assert_eq!(
            rank_one_decomposition(&w, [&id, &g2, &g2, &g2], 1e-9, 1e-9, None),
            Err(RankOneError::TooSmall)
        );
    }
}
