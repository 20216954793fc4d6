//! Monte-Carlo generation of write-in/readout photon numbers and camera frames.

mod format;
mod gated;
mod render;
pub(crate) mod shot;
mod stack;

pub use format::{read_stack, write_stack, StackReader, StackWriter, MAGIC};
pub use gated::{simulate_gated_counts, GateConfig, GatedModel, GatedTrace};
pub use render::{render_frame, FramePlan};
pub use shot::{sample_readout, sample_write, Readout, ShotRecord, Thermal, WriteIn};
pub use stack::{
    simulate_stack, FrameStack, GroundTruth, ModeSet, Simulation, SimulationConfig, StackHeader,
};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum DetectorMode {
    /// Camera response proportional to intensity, with intensity-proportional
    /// read noise.
    #[default]
    Linear,
    /// Single-photon counting with finite quantum efficiency.
    Counting,
}

impl DetectorMode {
    pub fn as_str(&self) -> &'static str {
        match self {
            DetectorMode::Linear => "linear",
            DetectorMode::Counting => "counting",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "linear" => Ok(DetectorMode::Linear),
            "counting" => Ok(DetectorMode::Counting),
            other => Err(Error::Format(format!("unknown detector mode {other:?}"))),
        }
    }
}

/// Filter transmissions, counting efficiency and camera read-noise law.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DetectionModel {
    pub t_ws: f64,
    pub t_ra: f64,
    pub t_rs: f64,
    pub qe: f64,
    /// Read-noise standard deviation per unit intensity.
    pub read_noise_kappa: f64,
    pub mode: DetectorMode,
}

impl Default for DetectionModel {
    fn default() -> Self {
        DetectionModel {
            t_ws: 0.12,
            t_ra: 0.76,
            t_rs: 0.76,
            qe: 0.20,
            read_noise_kappa: 0.0,
            mode: DetectorMode::Linear,
        }
    }
}

impl DetectionModel {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("t_ws", self.t_ws), ("t_ra", self.t_ra), ("t_rs", self.t_rs), ("qe", self.qe)] {
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::domain(format!("{name}={v} must lie in [0, 1]")));
            }
        }
        if !(self.read_noise_kappa >= 0.0 && self.read_noise_kappa.is_finite()) {
            return Err(Error::domain("read-noise kappa must be finite and >= 0"));
        }
        Ok(())
    }
}

/// Write-in and readout efficiencies.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EfficiencyModel {
    pub eta_w: f64,
    pub eta_r: f64,
}

impl Default for EfficiencyModel {
    fn default() -> Self {
        EfficiencyModel { eta_w: 1.0, eta_r: 1.0 }
    }
}

impl EfficiencyModel {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("eta_w", self.eta_w), ("eta_r", self.eta_r)] {
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::domain(format!("{name}={v} must lie in [0, 1]")));
            }
        }
        Ok(())
    }
}
