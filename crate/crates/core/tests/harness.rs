use std::fs;

use radcom_core::error::Error;
use radcom_core::harness::{
    design_beams, load_codebook, load_config, read_manifest, run_experiment, save_codebook, ScenarioConfig, Which,
};

#[test]
fn empty_file_loads_the_reference_scenario() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("scenario.toml");
    fs::write(&path, "").unwrap();
    let config = load_config(&path).unwrap();
    assert_eq!(config, ScenarioConfig::default());
    assert_eq!(config.array.elements, 15);
    assert_eq!(config.pulses, 40);
    assert_eq!(config.doppler.interval, [0.384, 0.416]);
    assert_eq!(config.doppler.grid_points, 5);
    assert_eq!(config.filter.xi, 0.75);
    assert_eq!(config.sidelobe_grid_deg().len(), 36);
}

#[test]
fn invalid_values_name_their_field() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("scenario.toml");

    fs::write(&path, "[filter]\nxi = 2.5\n").unwrap();
    match load_config(&path) {
        Err(Error::Config { path, message }) => {
            assert_eq!(path, "filter.xi");
            assert!(message.contains("xi must be in [0,2)"));
        }
        other => panic!("expected a config error, got {other:?}"),
    }

    fs::write(&path, "pulses = 4\n[clutter]\nrings = 5\npropagation = [1.0]\n").unwrap();
    assert!(matches!(load_config(&path), Err(Error::Config { .. })));

    fs::write(&path, "[filter]\nxii = 0.5\n").unwrap();
    assert!(matches!(load_config(&path), Err(Error::Parse { .. })));
}

#[test]
fn saved_codebook_reloads_identically() {
    let dir = tempfile::tempdir().unwrap();
    let (codebook, _) = design_beams(&ScenarioConfig::default()).unwrap();
    let path = dir.path().join("codebook.toml");
    save_codebook(&codebook, &path).unwrap();
    let back = load_codebook(&path).unwrap();
    assert_eq!(back.vectors, codebook.vectors);
    assert_eq!(back.deltas, codebook.deltas);
}

#[test]
fn modulus_figure_reports_unit_moduli() {
    let dir = tempfile::tempdir().unwrap();
    let config = ScenarioConfig::default();
    let report = run_experiment(&config, Which::One(radcom_core::harness::Figure::Fig3), dir.path()).unwrap();
    assert!(report.all_ok());
    let text = fs::read_to_string(dir.path().join("fig3/modulus.csv")).unwrap();
    let mut rows = 0;
    for line in text.lines().skip(1) {
        let cols: Vec<&str> = line.split(',').collect();
        let post: f64 = cols[2].parse().unwrap();
        let pre: f64 = cols[3].parse().unwrap();
        assert!((post - 1.0).abs() <= config.admm.gamma2);
        assert!((pre - 1.0).abs() <= 1e-3);
        rows += 1;
    }
    assert_eq!(rows, 2 * 15);
    assert!(dir.path().join("fig3/plot.py").exists());
}

#[test]
fn similarity_sweep_bound_grows_with_the_budget() {
    let dir = tempfile::tempdir().unwrap();
    let config = ScenarioConfig::default();
    let report = run_experiment(&config, Which::One(radcom_core::harness::Figure::Fig6), dir.path()).unwrap();
    assert!(report.all_ok());
    let manifest = read_manifest(&dir.path().join("fig6/manifest.toml")).unwrap();
    assert_eq!(manifest.status, "ok");
    assert_eq!(manifest.config, config);
    for modulation in ["modulated", "unmodulated"] {
        let mut jobs: Vec<_> = manifest.jobs.iter().filter(|j| j.modulation == modulation).collect();
        assert_eq!(jobs.len(), 3);
        jobs.sort_by(|a, b| a.xi.partial_cmp(&b.xi).unwrap());
        let bounds: Vec<f64> = jobs.iter().map(|j| j.relaxation_bound_db.unwrap()).collect();
        assert!(bounds.windows(2).all(|w| w[1] >= w[0] - 1e-6), "{bounds:?}");
        for j in &jobs {
            assert!(j.robust_worst_db.unwrap() >= j.wiener_worst_db.unwrap() - 1e-6);
        }
    }
    for file in &manifest.files {
        assert!(dir.path().join("fig6").join(file).exists(), "{file}");
    }
}

#[test]
fn figure_names_parse() {
    assert!("all".parse::<Which>().is_ok());
    assert!("fig4".parse::<Which>().is_ok());
    assert!("fig7".parse::<Which>().is_err());
}
