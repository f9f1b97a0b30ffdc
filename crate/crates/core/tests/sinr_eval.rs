use num_complex::Complex;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use radcom_core::admm::Codebook;
use radcom_core::eval::{encode_pulse_train, random_bits, sinr, sinr_curve, worst_case_sinr};
use radcom_core::scalar::{CMatrix, CVector};
use radcom_core::steering::{spatial_steering, ArrayGeometry};
use radcom_core::CovarianceMatrix;

type C = Complex<f64>;

fn crandn(rng: &mut impl Rng) -> C {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    C::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

fn setup(n: usize, seed: u64) -> (CVector<f64>, CVector<f64>, CovarianceMatrix) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let w = CVector::from_fn(n, |_, _| crandn(&mut rng));
    let s = CVector::from_fn(n, |_, _| crandn(&mut rng));
    let a = CMatrix::from_fn(n, 2, |_, _| crandn(&mut rng));
    (w, s, CovarianceMatrix::new(&a * a.adjoint()).unwrap())
}

#[test]
fn integer_doppler_shift_leaves_the_curve_unchanged() {
    let (w, s, rc) = setup(7, 1);
    let grid: Vec<f64> = (0..40).map(|k| 0.3 + 0.005 * k as f64).collect();
    let shifted: Vec<f64> = grid.iter().map(|p| p + 3.0).collect();
    let a = sinr_curve(&w, &grid, &s, &rc, 1.0, 1.0, "a").unwrap();
    let b = sinr_curve(&w, &shifted, &s, &rc, 1.0, 1.0, "b").unwrap();
    for (x, y) in a.sinr_db.iter().zip(&b.sinr_db) {
        assert!((x - y).abs() < 1e-9);
    }
}

#[test]
fn worst_case_over_a_subset_is_no_lower() {
    let (w, s, rc) = setup(6, 2);
    let grid: Vec<f64> = (0..60).map(|k| 0.1 + 0.01 * k as f64).collect();
    let subset: Vec<f64> = grid.iter().copied().step_by(7).collect();
    let full = worst_case_sinr(&w, &grid, &s, &rc, 0.5, 2.0).unwrap();
    let part = worst_case_sinr(&w, &subset, &s, &rc, 0.5, 2.0).unwrap();
    assert!(part >= full);
}

#[test]
fn flat_curve_has_that_worst_case() {
    // A single-pulse filter sees no Doppler dependence.
    let (w, s, rc) = setup(1, 3);
    let grid = [0.1, 0.2, 0.3, 0.4];
    let worst = worst_case_sinr(&w, &grid, &s, &rc, 1.0, 1.0).unwrap();
    let single = sinr(&w, 0.25, &s, &rc, 1.0, 1.0).unwrap();
    assert!((worst - single).abs() < 1e-12);
}

#[test]
fn received_mean_is_the_scaled_signature() {
    // x = α s ⊙ d(ψ) + n with unit white noise: the sample mean tends to the signal.
    let geometry = ArrayGeometry::half_wavelength(5).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let vectors = (0..2)
        .map(|_| CVector::from_fn(5, |_, _| C::from_polar(1.0, rng.random_range(0.0..6.28))))
        .collect();
    let codebook = Codebook::new(geometry.clone(), vectors, vec![C::new(0.1, 0.0), C::new(0.05, 0.0)], vec![]).unwrap();
    let pulses = 8;
    let bits = random_bits(pulses, &mut rng);
    let (train, s) = encode_pulse_train(&bits, &codebook, pulses, 0.0).unwrap();

    // Independent construction of s: one beampattern gain per pulse.
    let a = spatial_steering(&geometry, 0.0).unwrap().into_inner();
    for (n, &k) in train.symbols.iter().enumerate() {
        assert!((s[n] - codebook.vectors[k].dotc(&a)).norm() < 1e-12);
    }

    let alpha = C::new(0.8, -0.6);
    let psi = 0.37;
    let signal = CVector::from_fn(pulses, |n, _| alpha * s[n] * C::from_polar(1.0, std::f64::consts::TAU * psi * n as f64));
    let draws = 50_000;
    let mut mean = CVector::<f64>::zeros(pulses);
    for _ in 0..draws {
        mean += &signal + CVector::from_fn(pulses, |_, _| crandn(&mut rng));
    }
    mean /= C::new(draws as f64, 0.0);
    let tolerance = 4.0 * (pulses as f64 / draws as f64).sqrt();
    assert!((&mean - &signal).norm() < tolerance);
}

#[test]
fn mismatched_lengths_are_errors() {
    let (w, s, rc) = setup(4, 5);
    let short = w.rows(0, 3).into_owned();
    assert!(sinr(&short, 0.1, &s, &rc, 1.0, 1.0).is_err());
    assert!(sinr_curve(&w, &[0.2, 0.1], &s, &rc, 1.0, 1.0, "x").is_err());
    assert!(sinr_curve(&w, &[], &s, &rc, 1.0, 1.0, "x").is_err());
}
