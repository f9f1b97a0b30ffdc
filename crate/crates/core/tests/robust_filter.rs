use approx::assert_relative_eq;
use num_complex::Complex;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use radcom_conic::InteriorPoint;
use radcom_core::robust::{
    build_sdp, design_robust_filter, design_robust_filter_with, recover_candidate, similarity_distance, solve_sdp,
    synthesize_weight, wiener_filter, wiener_weights, SynthesisPath,
};
use radcom_core::scalar::{CMatrix, CVector};
use radcom_core::{CovarianceMatrix, FilterDesignProblem, RobustOptions};

type C = Complex<f64>;

fn crandn(rng: &mut impl Rng) -> C {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    C::new(re, im)
}

fn random_vector(n: usize, rng: &mut impl Rng) -> CVector<f64> {
    CVector::from_fn(n, |_, _| crandn(rng))
}

fn problem(n: usize, grid: Vec<f64>, xi: f64, seed: u64) -> FilterDesignProblem {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let a = CMatrix::from_fn(n, 2, |_, _| crandn(&mut rng));
    FilterDesignProblem {
        signature: random_vector(n, &mut rng),
        clutter: CovarianceMatrix::new((&a * a.adjoint()).scale(10.0)).unwrap(),
        sigma_n2: 1.0,
        alpha_t2: 2.0,
        psi_target: grid[grid.len() / 2],
        psi_grid: grid,
        xi,
    }
}

fn doppler_signature(s: &CVector<f64>, psi: f64) -> CVector<f64> {
    CVector::from_fn(s.len(), |n, _| s[n] * C::from_polar(1.0, std::f64::consts::TAU * psi * n as f64))
}

fn align(w: &CVector<f64>, reference: &CVector<f64>) -> CVector<f64> {
    let c = reference.dotc(w);
    w * (c.conj() / c.norm())
}

#[test]
fn wiener_in_white_noise_is_the_matched_filter() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let s = random_vector(6, &mut rng);
    let w = wiener_weights(&CMatrix::identity(6, 6), &s, 0.3).unwrap();
    let v = doppler_signature(&s, 0.3);
    let expected = &v / C::new(v.norm(), 0.0);
    assert_relative_eq!(w.norm(), 1.0, epsilon = 1e-12);
    assert!((align(&w, &expected) - &expected).norm() < 1e-12);
}

#[test]
fn wiener_keeps_an_eigenvector_direction() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let s = random_vector(5, &mut rng);
    let v = doppler_signature(&s, 0.1);
    let u = &v / C::new(v.norm(), 0.0);
    // R = I + 4·u u^H has u as an eigenvector.
    let r = CMatrix::identity(5, 5) + (&u * u.adjoint()).scale(4.0);
    let w = wiener_weights(&r, &s, 0.1).unwrap();
    assert!((align(&w, &u) - &u).norm() < 1e-12);
}

#[test]
fn wiener_beats_random_filters_at_the_nominal_doppler() {
    let p = problem(4, vec![0.2, 0.25, 0.3], 1.0, 3);
    let model = p.sinr_model().unwrap();
    let w0 = wiener_weights(&p.interference(), &p.signature, p.psi_target).unwrap();
    let best = model.sinr_linear(&w0, p.psi_target).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for _ in 0..100_000 {
        let w = random_vector(4, &mut rng);
        assert!(model.sinr_linear(&w, p.psi_target).unwrap() <= best * (1.0 + 1e-12));
    }
}

#[test]
fn program_has_one_block_and_q_plus_three_rows() {
    let grid: Vec<f64> = (0..5).map(|k| 0.384 + 0.008 * k as f64).collect();
    let p = problem(40, grid, 0.75, 5);
    let w0 = wiener_weights(&p.interference(), &p.signature, p.psi_target).unwrap();
    let sdp = build_sdp(&p, &w0).unwrap();
    assert_eq!(sdp.program.psd_order, 80);
    assert_eq!(sdp.program.num_rows(), 5 + 3);
    assert_eq!(sdp.program.nonneg, sdp.layout.linear_len());
}

#[test]
fn unit_normalization_leaves_the_candidate_unchanged() {
    let p = problem(4, vec![0.2, 0.25, 0.3], 0.8, 6);
    let w0 = wiener_weights(&p.interference(), &p.signature, p.psi_target).unwrap();
    let mut sol = solve_sdp(&build_sdp(&p, &w0).unwrap(), &InteriorPoint::default()).unwrap();
    sol.zeta = 1.0;
    let w = recover_candidate(&sol, 1e-12).unwrap();
    assert!((&w - &sol.y).norm() < 1e-12);
    sol.zeta = 0.0;
    assert!(recover_candidate(&sol, 1e-12).is_err());
}

#[test]
fn target_power_scales_the_bound_only() {
    let p = problem(4, vec![0.2, 0.25, 0.3], 0.8, 7);
    let louder = FilterDesignProblem {
        alpha_t2: p.alpha_t2 * 10.0,
        ..p.clone()
    };
    let solver = InteriorPoint::default();
    let solve = |p: &FilterDesignProblem| {
        let w0 = wiener_weights(&p.interference(), &p.signature, p.psi_target).unwrap();
        let sol = solve_sdp(&build_sdp(p, &w0).unwrap(), &solver).unwrap();
        (recover_candidate(&sol, 1e-12).unwrap(), sol.objective)
    };
    let (w1, nu1) = solve(&p);
    let (w2, nu2) = solve(&louder);
    assert_relative_eq!(nu2, 10.0 * nu1, max_relative = 1e-6);
    assert!((&w1 - &w2).norm() < 1e-5 * w1.norm());
}

#[test]
fn rank_one_candidate_returns_its_factor() {
    let p = problem(5, vec![0.2, 0.25, 0.3], 1.5, 8);
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let w0 = wiener_weights(&p.interference(), &p.signature, p.psi_target).unwrap();
    let mut w_bar = &w0 + random_vector(5, &mut rng).scale(0.1);
    w_bar /= C::new(w_bar.norm(), 0.0);
    let big_w = &w_bar * w_bar.adjoint();
    let out = synthesize_weight(&big_w, &p, &w0, &RobustOptions::default()).unwrap();
    assert_eq!(out.path, SynthesisPath::Principal);
    assert!((align(&out.w, &w_bar) - &w_bar).norm() < 1e-9);
}

#[test]
fn rank_two_candidate_matches_all_four_traces() {
    let p = problem(4, vec![0.2, 0.25, 0.3], 1.9, 10);
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let w0 = wiener_weights(&p.interference(), &p.signature, p.psi_target).unwrap();
    let a = &w0 + random_vector(4, &mut rng).scale(0.2);
    let b = &w0 + random_vector(4, &mut rng).scale(0.2);
    let mut big_w = &a * a.adjoint() + &b * b.adjoint();
    big_w /= C::new(big_w.trace().re, 0.0);
    let out = synthesize_weight(&big_w, &p, &w0, &RobustOptions::default()).unwrap();
    assert_eq!(out.rank, 2);
    assert_eq!(out.path, SynthesisPath::Decomposition);

    // The synthesized vector is rescaled to unit norm, so compare the ratios it pins.
    let w = &out.w;
    let quad = |g: &CMatrix<f64>| w.dotc(&(g * w)).re;
    let tr = |g: &CMatrix<f64>| (g * &big_w).trace().re;
    let g1 = p.interference();
    let mut g = vec![p.numerator_matrix(out.psi_star)];
    g.extend(out.psi_auxiliary.iter().map(|&psi| p.numerator_matrix(psi)));
    for gi in &g {
        assert_relative_eq!(quad(gi) / quad(&g1), tr(gi) / tr(&g1), max_relative = 1e-6);
    }
}

#[test]
fn single_point_with_loose_budget_matches_wiener() {
    let p = problem(6, vec![0.25], 1.999, 12);
    let wiener = wiener_filter(&p).unwrap();
    let robust = design_robust_filter(&p).unwrap();
    assert!((robust.worst_case_sinr_db - wiener.worst_case_sinr_db).abs() <= 0.1);
}

#[test]
fn zero_budget_returns_the_reference() {
    let p = problem(6, vec![0.2, 0.25, 0.3], 0.0, 13);
    let robust = design_robust_filter(&p).unwrap();
    let w0 = wiener_weights(&p.interference(), &p.signature, p.psi_target).unwrap();
    assert_eq!(robust.metadata.path, SynthesisPath::Similarity);
    assert!(similarity_distance(&robust.w, &w0) < 1e-24);
}

#[test]
fn robust_filter_respects_the_budget_and_the_bound() {
    for seed in 20..26 {
        let p = problem(8, vec![0.2, 0.22, 0.24, 0.26, 0.28], 0.6, seed);
        let f = design_robust_filter_with(&p, &InteriorPoint::default(), &RobustOptions::default()).unwrap();
        let w0 = wiener_weights(&p.interference(), &p.signature, p.psi_target).unwrap();
        assert!(similarity_distance(&f.w, &w0) <= p.xi + 1e-6);
        let bound = radcom_core::scalar::db_from_power(f.metadata.relaxation_bound.unwrap());
        assert!(f.worst_case_sinr_db <= bound + 1e-6);
        let wiener = wiener_filter(&p).unwrap();
        assert!(f.worst_case_sinr_db >= wiener.worst_case_sinr_db - 1e-6);
    }
}

#[test]
fn invalid_budgets_are_rejected() {
    let p = problem(4, vec![0.2, 0.25, 0.3], 2.5, 14);
    assert!(design_robust_filter(&p).is_err());
    let p = problem(4, vec![0.3, 0.2], 1.0, 15);
    assert!(design_robust_filter(&p).is_err());
}
