use nalgebra::{DMatrix, DVector};
use radcom_conic::{ConicProgram, ConicSolver, InteriorPoint, IpmSettings, SolveStatus};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_symmetric(n: usize, rng: &mut ChaCha8Rng) -> DMatrix<f64> {
    let a = DMatrix::from_fn(n, n, |_, _| rng.random_range(-1.0..1.0));
    (&a + a.transpose()) * 0.5
}

#[test]
fn trace_one_minimum_is_smallest_eigenvalue() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for n in [2usize, 5, 12] {
        let cmat = random_symmetric(n, &mut rng);
        let mut p = ConicProgram::new(n, 0);
        p.c_psd = cmat.clone();
        p.push_row(1.0).a_psd = DMatrix::identity(n, n);
        let sol = InteriorPoint::default().solve(&p).unwrap();
        assert_eq!(sol.status, SolveStatus::Optimal);
        let lmin = cmat.symmetric_eigenvalues().min();
        assert!((sol.primal_objective - lmin).abs() < 1e-7, "n={n}");
        assert!((sol.dual_objective - lmin).abs() < 1e-7);
    }
}

#[test]
fn mixed_cone_maximum_eigenvalue() {
    // max t  s.t. tr X = 1, <A, X> - t - s = 0, t, s >= 0  gives λ_max(A) when positive.
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let n = 6;
    let a = random_symmetric(n, &mut rng) + DMatrix::identity(n, n) * 2.0;
    let mut p = ConicProgram::new(n, 2);
    p.c_lin[0] = -1.0;
    p.push_row(1.0).a_psd = DMatrix::identity(n, n);
    let row = p.push_row(0.0);
    row.a_psd = a.clone();
    row.a_lin = DVector::from_vec(vec![-1.0, -1.0]);
    let sol = InteriorPoint::default().solve(&p).unwrap();
    assert!(sol.status.is_optimal());
    let lmax = a.symmetric_eigenvalues().max();
    assert!((-sol.primal_objective - lmax).abs() < 1e-7);
}

#[test]
fn linear_program() {
    let mut p = ConicProgram::<f64>::new(0, 3);
    p.c_lin = DVector::from_vec(vec![1.0, 2.0, 0.5]);
    p.push_row(1.0).a_lin = DVector::from_vec(vec![1.0, 1.0, 0.0]);
    p.push_row(2.0).a_lin = DVector::from_vec(vec![0.0, 1.0, 1.0]);
    // x2 = t, x1 = 1 - t, x3 = 2 - t; cost 1 - t + 2t + 1 - 0.5t = 2 + 0.5t → t = 0.
    let sol = InteriorPoint::default().solve(&p).unwrap();
    assert!(sol.status.is_optimal());
    assert!((sol.primal_objective - 2.0).abs() < 1e-7);
    assert!(sol.x_lin[1].abs() < 1e-6);
}

#[test]
fn detects_primal_infeasibility() {
    let mut p = ConicProgram::<f64>::new(0, 2);
    p.c_lin = DVector::from_vec(vec![1.0, 1.0]);
    p.push_row(-1.0).a_lin = DVector::from_vec(vec![1.0, 1.0]);
    let sol = InteriorPoint::default().solve(&p).unwrap();
    assert_eq!(sol.status, SolveStatus::PrimalInfeasible);
}

#[test]
fn detects_unbounded_objective() {
    let mut p = ConicProgram::<f64>::new(0, 2);
    p.c_lin = DVector::from_vec(vec![-1.0, 0.0]);
    p.push_row(0.0).a_lin = DVector::from_vec(vec![1.0, -1.0]);
    let sol = InteriorPoint::default().solve(&p).unwrap();
    assert_eq!(sol.status, SolveStatus::DualInfeasible);
}

#[test]
fn single_precision_backend() {
    let n = 4;
    let cmat = DMatrix::<f32>::from_diagonal(&DVector::from_vec(vec![3.0f32, -1.0, 2.0, 0.5]));
    let mut p = ConicProgram::new(n, 0);
    p.c_psd = cmat;
    p.push_row(1.0).a_psd = DMatrix::identity(n, n);
    let solver = InteriorPoint::new(IpmSettings {
        tolerance: 1e-4f32,
        ..IpmSettings::default()
    });
    let sol = solver.solve(&p).unwrap();
    assert!(sol.status.is_optimal());
    assert!((sol.primal_objective + 1.0f32).abs() < 1e-3);
}

#[test]
fn rejects_mismatched_rows() {
    let mut p = ConicProgram::<f64>::new(3, 1);
    p.push_row(1.0).a_psd = DMatrix::identity(2, 2);
    assert!(InteriorPoint::default().solve(&p).is_err());
}
