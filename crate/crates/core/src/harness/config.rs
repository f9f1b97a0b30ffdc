//! Scenario configuration: one TOML file with a section per stage. Every field has a
//! default, so an empty file describes the reference scenario. Unknown keys are errors.

use std::path::Path;

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::admm::{AdmmConfig, BeamDesignProblem};
use crate::error::{Error, Result};
use crate::robust::RobustOptions;
use crate::steering::ArrayGeometry;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScenarioConfig {
    /// Base seed for beam initialization, message bits and randomized synthesis.
    pub seed: u64,
    /// Pulses per CPI.
    pub pulses: usize,
    pub array: ArrayConfig,
    pub beams: BeamConfig,
    pub admm: AdmmSection,
    pub clutter: ClutterConfig,
    pub noise: NoiseConfig,
    pub doppler: DopplerConfig,
    pub filter: FilterConfig,
    pub experiment: ExperimentConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ArrayConfig {
    pub elements: usize,
    /// Element spacing in wavelengths.
    pub spacing: f64,
}

/// One communication sidelobe level, `magnitude·exp(j·phase)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LevelConfig {
    pub magnitude: f64,
    #[serde(default)]
    pub phase_deg: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BeamConfig {
    pub target_deg: f64,
    pub comm_deg: f64,
    /// Sidelobe regions `[lo, hi]` in degrees, each sampled at `points_per_region`
    /// evenly spaced angles including both ends.
    pub sidelobe_regions: Vec<[f64; 2]>,
    pub points_per_region: usize,
    /// Communication levels, relative to the mainlobe; the codebook has one vector per
    /// level, so the count must be a power of two.
    pub levels: Vec<LevelConfig>,
    /// Mainlobe response `h^H a(θ_t)` each vector is pinned to.
    pub mainlobe_gain: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AdmmSection {
    pub rho1: f64,
    pub rho2: f64,
    pub rho3: f64,
    pub beta: f64,
    pub gamma1: f64,
    pub gamma2: f64,
    pub eta: f64,
    pub max_iters: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ClutterConfig {
    /// Clutter reflectivity `σ₀` in dB.
    pub sigma0_db: f64,
    /// Number of range rings, the cell under test included.
    pub rings: usize,
    /// Propagation constant per ring; a single value applies to every ring.
    pub propagation: Vec<f64>,
    /// Patches per ring.
    pub patches: usize,
    pub angle_lo_deg: f64,
    pub angle_hi_deg: f64,
    /// Mean normalized Doppler of every patch.
    pub mean_doppler: f64,
    /// Full length of each patch's uniform Doppler interval.
    pub doppler_spread: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NoiseConfig {
    pub sigma_n2_db: f64,
    /// Target power is `snr·σ_n²` unless `target_power` is given.
    pub snr_db: f64,
    pub target_power: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DopplerConfig {
    /// Interval of interest `[lo, hi]` in normalized Doppler.
    pub interval: [f64; 2],
    /// Design grid points spanning the interval, ends included.
    pub grid_points: usize,
    /// Nominal target Doppler.
    pub target: f64,
    /// Points of the plotted SINR curves over the interval.
    pub curve_points: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FilterConfig {
    /// Similarity budget `‖w - w₀‖² ≤ xi`.
    pub xi: f64,
    pub rank_tolerance: f64,
    pub identity_tolerance: f64,
    pub decomposition_retries: usize,
    pub rounding_draws: usize,
}

/// Sweeps for the figure experiments.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub pulse_counts: Vec<usize>,
    pub intervals: Vec<[f64; 2]>,
    pub xis: Vec<f64>,
    /// Angular step of the exported beampatterns, degrees.
    pub beampattern_step_deg: f64,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            pulses: 40,
            array: ArrayConfig::default(),
            beams: BeamConfig::default(),
            admm: AdmmSection::default(),
            clutter: ClutterConfig::default(),
            noise: NoiseConfig::default(),
            doppler: DopplerConfig::default(),
            filter: FilterConfig::default(),
            experiment: ExperimentConfig::default(),
        }
    }
}

impl Default for ArrayConfig {
    fn default() -> Self {
        Self {
            elements: 15,
            spacing: 0.5,
        }
    }
}

impl Default for BeamConfig {
    fn default() -> Self {
        Self {
            target_deg: 0.0,
            comm_deg: -50.0,
            sidelobe_regions: vec![[-90.0, -5.0], [5.0, 90.0]],
            points_per_region: 18,
            levels: vec![
                LevelConfig {
                    magnitude: 0.06,
                    phase_deg: 0.0,
                },
                LevelConfig {
                    magnitude: 0.04,
                    phase_deg: 0.0,
                },
            ],
            mainlobe_gain: 12.0,
        }
    }
}

impl Default for AdmmSection {
    fn default() -> Self {
        let d = AdmmConfig::<f64>::default();
        Self {
            rho1: d.rho1,
            rho2: d.rho2,
            rho3: d.rho3,
            beta: d.beta,
            gamma1: d.gamma1,
            gamma2: d.gamma2,
            eta: d.eta,
            max_iters: d.max_iters,
        }
    }
}

impl Default for ClutterConfig {
    fn default() -> Self {
        Self {
            sigma0_db: 50.0,
            rings: 2,
            propagation: vec![1.0],
            patches: 100,
            angle_lo_deg: -60.0,
            angle_hi_deg: 60.0,
            mean_doppler: 0.0,
            doppler_spread: 0.008,
        }
    }
}

impl Default for NoiseConfig {
    fn default() -> Self {
        Self {
            sigma_n2_db: 0.0,
            snr_db: 10.0,
            target_power: None,
        }
    }
}

impl Default for DopplerConfig {
    fn default() -> Self {
        Self {
            interval: [0.384, 0.416],
            grid_points: 5,
            target: 0.4,
            curve_points: 321,
        }
    }
}

impl Default for FilterConfig {
    fn default() -> Self {
        let d = RobustOptions::<f64>::default();
        Self {
            xi: 0.75,
            rank_tolerance: d.rank_tolerance,
            identity_tolerance: d.identity_tolerance,
            decomposition_retries: d.decomposition_retries,
            rounding_draws: d.rounding_draws,
        }
    }
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            pulse_counts: vec![40, 50, 60],
            intervals: vec![[0.36, 0.44], [0.376, 0.424], [0.384, 0.416]],
            xis: vec![0.5, 0.75, 1.0],
            beampattern_step_deg: 0.1,
        }
    }
}

fn positive(path: &str, x: f64) -> Result<()> {
    if x > 0.0 && x.is_finite() {
        Ok(())
    } else {
        Err(Error::config(path, format!("must be positive and finite, got {x}")))
    }
}

fn finite(path: &str, x: f64) -> Result<()> {
    if x.is_finite() {
        Ok(())
    } else {
        Err(Error::config(path, "must be finite"))
    }
}

fn check_interval(path: &str, iv: [f64; 2]) -> Result<()> {
    finite(path, iv[0])?;
    finite(path, iv[1])?;
    if iv[0] < iv[1] {
        Ok(())
    } else {
        Err(Error::config(path, format!("interval must be increasing, got [{}, {}]", iv[0], iv[1])))
    }
}

fn check_xi(path: &str, xi: f64) -> Result<()> {
    if (0.0..2.0).contains(&xi) {
        Ok(())
    } else {
        Err(Error::config(path, format!("xi must be in [0,2), got {xi}")))
    }
}

impl ScenarioConfig {
    /// Parses TOML text and validates it.
    pub fn from_toml_str(text: &str, file: &Path) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| Error::Parse {
            file: file.to_path_buf(),
            message: e.to_string(),
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    /// Checks every invariant, naming the offending field.
    pub fn validate(&self) -> Result<()> {
        if self.pulses < 1 {
            return Err(Error::config("pulses", "need at least one pulse"));
        }
        if self.array.elements < 1 {
            return Err(Error::config("array.elements", "need at least one element"));
        }
        positive("array.spacing", self.array.spacing)?;

        let b = &self.beams;
        for (name, v) in [("beams.target_deg", b.target_deg), ("beams.comm_deg", b.comm_deg)] {
            if !(-90.0..=90.0).contains(&v) {
                return Err(Error::config(name, format!("angle must be in [-90, 90], got {v}")));
            }
        }
        if b.sidelobe_regions.is_empty() {
            return Err(Error::config("beams.sidelobe_regions", "need at least one region"));
        }
        for (i, r) in b.sidelobe_regions.iter().enumerate() {
            let path = format!("beams.sidelobe_regions[{i}]");
            check_interval(&path, *r)?;
            if r[0] < -90.0 || r[1] > 90.0 {
                return Err(Error::config(path, "angles must lie in [-90, 90]"));
            }
        }
        if b.points_per_region < 1 {
            return Err(Error::config("beams.points_per_region", "need at least one point"));
        }
        if b.levels.is_empty() || !b.levels.len().is_power_of_two() {
            return Err(Error::config(
                "beams.levels",
                format!("codebook size must be a power of two, got {}", b.levels.len()),
            ));
        }
        for (i, l) in b.levels.iter().enumerate() {
            if !(l.magnitude >= 0.0 && l.magnitude.is_finite()) || !l.phase_deg.is_finite() {
                return Err(Error::config(format!("beams.levels[{i}]"), "level must be finite and nonnegative"));
            }
        }
        positive("beams.mainlobe_gain", b.mainlobe_gain)?;
        if b.mainlobe_gain > self.array.elements as f64 {
            return Err(Error::config(
                "beams.mainlobe_gain",
                "a constant-modulus vector cannot exceed the element count",
            ));
        }

        let a = &self.admm;
        for (name, v) in [
            ("admm.rho1", a.rho1),
            ("admm.rho2", a.rho2),
            ("admm.rho3", a.rho3),
            ("admm.beta", a.beta),
            ("admm.gamma1", a.gamma1),
            ("admm.gamma2", a.gamma2),
            ("admm.eta", a.eta),
        ] {
            positive(name, v)?;
        }
        if a.max_iters < 1 {
            return Err(Error::config("admm.max_iters", "need at least one iteration"));
        }

        let c = &self.clutter;
        finite("clutter.sigma0_db", c.sigma0_db)?;
        if c.rings < 1 {
            return Err(Error::config("clutter.rings", "need at least the cell-under-test ring"));
        }
        let most_pulses = self.experiment.pulse_counts.iter().copied().chain([self.pulses]).min().unwrap_or(self.pulses);
        if c.rings > most_pulses {
            return Err(Error::config(
                "clutter.rings",
                format!("{} range rings exceed {} pulses", c.rings, most_pulses),
            ));
        }
        if c.propagation.len() != 1 && c.propagation.len() != c.rings {
            return Err(Error::config(
                "clutter.propagation",
                format!("give one value or one per ring ({}), got {}", c.rings, c.propagation.len()),
            ));
        }
        if c.propagation.iter().any(|&k| !(k >= 0.0 && k.is_finite())) {
            return Err(Error::config("clutter.propagation", "values must be finite and nonnegative"));
        }
        if !(-90.0..=90.0).contains(&c.angle_lo_deg) || !(-90.0..=90.0).contains(&c.angle_hi_deg) {
            return Err(Error::config("clutter.angle_lo_deg", "patch angles must lie in [-90, 90]"));
        }
        if c.angle_lo_deg > c.angle_hi_deg {
            return Err(Error::config("clutter.angle_hi_deg", "must not be below angle_lo_deg"));
        }
        finite("clutter.mean_doppler", c.mean_doppler)?;
        if !(c.doppler_spread >= 0.0 && c.doppler_spread.is_finite()) {
            return Err(Error::config("clutter.doppler_spread", "must be finite and nonnegative"));
        }

        finite("noise.sigma_n2_db", self.noise.sigma_n2_db)?;
        finite("noise.snr_db", self.noise.snr_db)?;
        if let Some(p) = self.noise.target_power {
            positive("noise.target_power", p)?;
        }

        let d = &self.doppler;
        check_interval("doppler.interval", d.interval)?;
        if d.grid_points < 1 {
            return Err(Error::config("doppler.grid_points", "need at least one point"));
        }
        if !(d.target >= d.interval[0] && d.target <= d.interval[1]) {
            return Err(Error::config("doppler.target", "must lie in doppler.interval"));
        }
        if d.curve_points < 2 {
            return Err(Error::config("doppler.curve_points", "need at least two points"));
        }

        let f = &self.filter;
        check_xi("filter.xi", f.xi)?;
        positive("filter.rank_tolerance", f.rank_tolerance)?;
        positive("filter.identity_tolerance", f.identity_tolerance)?;

        let e = &self.experiment;
        if let Some(i) = e.pulse_counts.iter().position(|&n| n < 1) {
            return Err(Error::config(format!("experiment.pulse_counts[{i}]"), "need at least one pulse"));
        }
        for (i, iv) in e.intervals.iter().enumerate() {
            let path = format!("experiment.intervals[{i}]");
            check_interval(&path, *iv)?;
            if !(d.target >= iv[0] && d.target <= iv[1]) {
                return Err(Error::config(path, "must contain doppler.target"));
            }
        }
        for (i, &xi) in e.xis.iter().enumerate() {
            check_xi(&format!("experiment.xis[{i}]"), xi)?;
        }
        positive("experiment.beampattern_step_deg", e.beampattern_step_deg)?;
        Ok(())
    }

    pub fn geometry(&self) -> Result<ArrayGeometry<f64>> {
        ArrayGeometry::new(self.array.elements, self.array.spacing)
    }

    /// Sidelobe sample angles, regions in order.
    pub fn sidelobe_grid_deg(&self) -> Vec<f64> {
        self.beams
            .sidelobe_regions
            .iter()
            .flat_map(|r| linspace(r[0], r[1], self.beams.points_per_region))
            .collect()
    }

    /// One design problem per communication level.
    pub fn beam_problems(&self) -> Result<Vec<BeamDesignProblem<f64>>> {
        let geometry = self.geometry()?;
        let grid = self.sidelobe_grid_deg();
        Ok(self
            .beams
            .levels
            .iter()
            .map(|l| BeamDesignProblem {
                geometry: geometry.clone(),
                theta_target_deg: self.beams.target_deg,
                theta_comm_deg: self.beams.comm_deg,
                sidelobe_grid_deg: grid.clone(),
                delta: Complex::from_polar(l.magnitude, l.phase_deg.to_radians()),
                mainlobe_gain: self.beams.mainlobe_gain,
            })
            .collect())
    }

    pub fn admm_config(&self) -> AdmmConfig<f64> {
        let a = &self.admm;
        AdmmConfig {
            rho1: a.rho1,
            rho2: a.rho2,
            rho3: a.rho3,
            beta: a.beta,
            gamma1: a.gamma1,
            gamma2: a.gamma2,
            eta: a.eta,
            max_iters: a.max_iters,
            seed: self.seed,
            record_trace: false,
        }
    }

    pub fn robust_options(&self) -> RobustOptions<f64> {
        let f = &self.filter;
        RobustOptions {
            rank_tolerance: f.rank_tolerance,
            identity_tolerance: f.identity_tolerance,
            decomposition_retries: f.decomposition_retries,
            rounding_draws: f.rounding_draws,
            seed: self.seed,
            ..RobustOptions::default()
        }
    }

    /// Propagation constant of every ring, expanded from a single value if needed.
    pub fn propagation(&self) -> Vec<f64> {
        match self.clutter.propagation.as_slice() {
            [k] => vec![*k; self.clutter.rings],
            ks => ks.to_vec(),
        }
    }

    pub fn sigma_n2(&self) -> f64 {
        crate::scalar::power_from_db(self.noise.sigma_n2_db)
    }

    /// `|α_t|²`: the explicit override, else `snr·σ_n²`.
    pub fn target_power(&self) -> f64 {
        self.noise
            .target_power
            .unwrap_or_else(|| crate::scalar::power_from_db(self.noise.snr_db) * self.sigma_n2())
    }
}

/// `count` evenly spaced values from `lo` to `hi` inclusive.
pub fn linspace(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    match count {
        0 => Vec::new(),
        1 => vec![lo],
        _ => (0..count)
            .map(|i| lo + (hi - lo) * (i as f64) / ((count - 1) as f64))
            .collect(),
    }
}

/// Reads and validates a config file; an empty file gives the defaults.
pub fn load_config(path: &Path) -> Result<ScenarioConfig> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    ScenarioConfig::from_toml_str(&text, path)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(text: &str) -> Result<ScenarioConfig> {
        ScenarioConfig::from_toml_str(text, Path::new("test.toml"))
    }

    #[test]
    fn empty_is_default() {
        assert_eq!(parse("").unwrap(), ScenarioConfig::default());
    }

    #[test]
    fn default_grid_has_36_points() {
        let g = ScenarioConfig::default().sidelobe_grid_deg();
        assert_eq!(g.len(), 36);
        assert_eq!((g[0], g[17], g[18], g[35]), (-90.0, -5.0, 5.0, 90.0));
    }

    #[test]
    fn unknown_key_is_rejected() {
        assert!(matches!(parse("[filter]\nxii = 1.0\n"), Err(Error::Parse { .. })));
    }

    #[test]
    fn xi_out_of_range() {
        let err = parse("[filter]\nxi = 2.5\n").unwrap_err().to_string();
        assert!(err.contains("xi must be in [0,2)") && err.contains("filter.xi"), "{err}");
    }

    #[test]
    fn too_many_rings() {
        let err = parse("pulses = 3\n[experiment]\npulse_counts = [3]\n[clutter]\nrings = 4\n")
            .unwrap_err()
            .to_string();
        assert!(err.contains("clutter.rings"), "{err}");
    }

    #[test]
    fn round_trip() {
        let mut c = ScenarioConfig::default();
        c.noise.target_power = Some(2.5);
        c.seed = 17;
        assert_eq!(parse(&c.to_toml_string()).unwrap(), c);
    }
}
