//! Builders that turn a [`ScenarioConfig`] into the objects each stage consumes.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::admm::{design_codebook_detailed, BeamDesign, Codebook};
use crate::clutter::{clutter_covariance, patch_angles, ClutterScenario, CovarianceMatrix};
use crate::error::{Error, Result};
use crate::eval::{encode_pulse_train, random_bits, PulseTrain};
use crate::robust::FilterDesignProblem;
use crate::scalar::{deg_to_u, power_from_db, CVector};

use super::config::{linspace, ScenarioConfig};

/// Whether pulses carry message bits or all use the first codebook vector.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Modulation {
    Modulated,
    Unmodulated,
}

impl Modulation {
    pub const BOTH: [Modulation; 2] = [Modulation::Modulated, Modulation::Unmodulated];

    pub fn as_str(self) -> &'static str {
        match self {
            Modulation::Modulated => "modulated",
            Modulation::Unmodulated => "unmodulated",
        }
    }
}

/// The beam codebook with the full design record of each vector.
pub fn design_beams(config: &ScenarioConfig) -> Result<(Codebook<f64>, Vec<BeamDesign<f64>>)> {
    design_codebook_detailed(&config.beam_problems()?, &config.admm_config())
}

/// Message bits for an `pulses`-pulse CPI. Each pulse count draws from its own stream
/// of the base seed, so sweeps over N do not share prefixes by accident.
pub fn message_bits(config: &ScenarioConfig, codebook: &Codebook<f64>, pulses: usize) -> Vec<bool> {
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    rng.set_stream(pulses as u64);
    random_bits(pulses * codebook.bits_per_symbol(), &mut rng)
}

/// Pulse train and its composite signature toward the target.
pub fn pulse_train(
    config: &ScenarioConfig,
    codebook: &Codebook<f64>,
    pulses: usize,
    modulation: Modulation,
) -> Result<(PulseTrain<f64>, CVector<f64>)> {
    let u_t = deg_to_u(config.beams.target_deg);
    match modulation {
        Modulation::Modulated => encode_pulse_train(&message_bits(config, codebook, pulses), codebook, pulses, u_t),
        Modulation::Unmodulated => {
            let train = PulseTrain::unmodulated(codebook, pulses)?;
            let s = train.signature(codebook, u_t)?;
            Ok((train, s))
        }
    }
}

pub fn clutter_scenario(config: &ScenarioConfig, pulses: usize) -> Result<ClutterScenario<f64>> {
    let c = &config.clutter;
    if c.rings > pulses {
        return Err(Error::config(
            "clutter.rings",
            format!("{} range rings exceed {} pulses", c.rings, pulses),
        ));
    }
    ClutterScenario::homogeneous(
        pulses,
        power_from_db(c.sigma0_db),
        &config.propagation(),
        &patch_angles(c.patches, c.angle_lo_deg, c.angle_hi_deg),
        c.mean_doppler,
        c.doppler_spread,
    )
}

/// Clutter covariance seen through a given pulse train.
pub fn clutter_for(
    config: &ScenarioConfig,
    codebook: &Codebook<f64>,
    train: &PulseTrain<f64>,
) -> Result<CovarianceMatrix<f64>> {
    clutter_covariance(&clutter_scenario(config, train.pulses())?, &train.weights, &codebook.geometry)
}

/// Design problem over `interval` with the configured grid size and target Doppler.
pub fn filter_problem(
    config: &ScenarioConfig,
    signature: CVector<f64>,
    clutter: CovarianceMatrix<f64>,
    interval: [f64; 2],
    xi: f64,
) -> FilterDesignProblem<f64> {
    FilterDesignProblem {
        signature,
        clutter,
        sigma_n2: config.sigma_n2(),
        alpha_t2: config.target_power(),
        psi_grid: linspace(interval[0], interval[1], config.doppler.grid_points),
        psi_target: config.doppler.target,
        xi,
    }
}

/// Problem for the configured pulse count, interval and budget, with its train.
pub fn default_filter_problem(
    config: &ScenarioConfig,
    codebook: &Codebook<f64>,
    modulation: Modulation,
) -> Result<(PulseTrain<f64>, FilterDesignProblem<f64>)> {
    let (train, s) = pulse_train(config, codebook, config.pulses, modulation)?;
    let clutter = clutter_for(config, codebook, &train)?;
    let problem = filter_problem(config, s, clutter, config.doppler.interval, config.filter.xi);
    Ok((train, problem))
}
