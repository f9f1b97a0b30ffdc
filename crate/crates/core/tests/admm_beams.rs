use num_complex::Complex;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use radcom_core::admm::{design_codebook, design_weight_vector, solve_z_subproblem, AdmmState, BeamDesignContext};
use radcom_core::harness::ScenarioConfig;
use radcom_core::scalar::{db_from_power, deg_to_u, CVector};
use radcom_core::steering::beampattern_gain;
use radcom_core::{AdmmConfig, BeamDesignProblem};

type C = Complex<f64>;

fn reference_problems() -> (Vec<BeamDesignProblem>, AdmmConfig) {
    let config = ScenarioConfig::default();
    (config.beam_problems().unwrap(), config.admm_config())
}

#[test]
fn communication_levels_hit_their_targets() {
    let (problems, admm) = reference_problems();
    let codebook = design_codebook(&problems, &admm).unwrap();
    assert_eq!(codebook.len(), 2);
    assert_eq!(codebook.bits_per_symbol(), 1);
    let expected = [-24.4370, -27.9588];
    for (k, h) in codebook.vectors.iter().enumerate() {
        let g = &problems[k];
        let main = beampattern_gain(h, &g.geometry, deg_to_u(g.theta_target_deg)).unwrap();
        let comm = beampattern_gain(h, &g.geometry, deg_to_u(g.theta_comm_deg)).unwrap();
        let level = db_from_power((comm / main).norm_sqr());
        assert!((level - expected[k]).abs() < 0.05, "h{}: {level}", k + 1);
        assert!(codebook.diagnostics[k].converged);
    }
}

#[test]
fn single_level_gives_a_single_vector() {
    let (mut problems, admm) = reference_problems();
    problems.truncate(1);
    let codebook = design_codebook(&problems, &admm).unwrap();
    assert_eq!(codebook.len(), 1);
    assert_eq!(codebook.bits_per_symbol(), 0);
}

#[test]
fn repeated_levels_are_flagged() {
    let (mut problems, admm) = reference_problems();
    problems[1] = problems[0].clone();
    let codebook = design_codebook(&problems, &admm).unwrap();
    assert_eq!(codebook.duplicate_levels(), vec![(0, 1)]);
}

#[test]
fn same_seed_same_vector() {
    let (problems, admm) = reference_problems();
    let a = design_weight_vector(&problems[0], &admm).unwrap();
    let b = design_weight_vector(&problems[0], &admm).unwrap();
    assert_eq!(a.h, b.h);
    let other = design_weight_vector(&problems[0], &AdmmConfig { seed: 99, ..admm }).unwrap();
    assert_ne!(a.h, other.h);
}

#[test]
fn unit_circle_update_minimises_the_linear_term() {
    let (problems, admm) = reference_problems();
    let ctx = BeamDesignContext::new(&problems[0]).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut state = AdmmState::random(&ctx, &admm, &mut rng);
    let rho3 = state.penalties.rho3;
    let z = solve_z_subproblem(&state);
    for m in 0..z.len() {
        let y = -state.nu[m] - state.h[m] * rho3;
        let value = (y.conj() * z[m]).re;
        for k in 0..720 {
            let probe = C::from_polar(1.0, k as f64 * std::f64::consts::TAU / 720.0);
            assert!(value <= (y.conj() * probe).re + 1e-12);
        }
    }

    state.h = CVector::zeros(state.h.len());
    state.nu = CVector::from_element(state.h.len(), -C::new(3.0, -4.0));
    let z = solve_z_subproblem(&state);
    assert!((z[0] - C::new(-3.0, 4.0) / 5.0).norm() < 1e-15);
}

#[test]
fn invalid_problems_are_rejected() {
    let (problems, admm) = reference_problems();
    let mut p = problems[0].clone();
    p.sidelobe_grid_deg.push(0.0);
    assert!(design_weight_vector(&p, &admm).is_err());
    let mut p = problems[0].clone();
    p.mainlobe_gain = 16.0;
    assert!(design_weight_vector(&p, &admm).is_err());
    assert!(design_weight_vector(&problems[0], &AdmmConfig { eta: 0.0, ..admm }).is_err());
}
