//! Configuration, persistence and the figure experiments.

mod codebook_io;
mod config;
mod experiment;
mod scenario;

pub use codebook_io::{codebook_from_toml, codebook_to_toml, load_codebook, save_codebook};
pub use config::{
    linspace, load_config, AdmmSection, ArrayConfig, BeamConfig, ClutterConfig, DopplerConfig, ExperimentConfig,
    FilterConfig, LevelConfig, NoiseConfig, ScenarioConfig,
};
pub use experiment::{
    read_manifest, run_experiment, BeamRecord, ExperimentReport, Figure, FigureReport, JobRecord, Manifest, Which,
};
pub use scenario::{
    clutter_for, clutter_scenario, default_filter_problem, design_beams, filter_problem, message_bits, pulse_train,
    Modulation,
};
