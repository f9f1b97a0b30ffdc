//! Constant-modulus spatial-modulation beam design, modulated clutter modelling and
//! robust Doppler filter design for joint radar-communication systems.
//!
//! Everything numerical is generic over the real scalar (`f32` or `f64`); the aliases
//! at the crate root fix it to `f64`, which is what the experiments use.

pub mod admm;
pub mod clutter;
pub mod error;
pub mod eval;
pub mod harness;
pub mod robust;
pub mod scalar;
pub mod steering;

pub use error::{Error, Result};
pub use scalar::{CMatrix, CVector, Real};

pub type ArrayGeometry = steering::ArrayGeometry<f64>;
pub type BeamDesignProblem = admm::BeamDesignProblem<f64>;
pub type AdmmConfig = admm::AdmmConfig<f64>;
pub type BeamDesign = admm::BeamDesign<f64>;
pub type Codebook = admm::Codebook<f64>;
pub type ClutterScenario = clutter::ClutterScenario<f64>;
pub type CovarianceMatrix = clutter::CovarianceMatrix<f64>;
pub type FilterDesignProblem = robust::FilterDesignProblem<f64>;
pub type DopplerFilter = robust::DopplerFilter<f64>;
pub type RobustOptions = robust::RobustOptions<f64>;
pub type SinrModel = eval::SinrModel<f64>;
pub type SinrCurve = eval::SinrCurve<f64>;
pub type PulseTrain = eval::PulseTrain<f64>;
