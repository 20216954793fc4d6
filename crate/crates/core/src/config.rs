//! Run configuration file.
//!
//! TOML with one table per block and units spelled out in the key names.
//! Every key is optional and unknown keys are rejected.
//!
//! ```toml
//! [model]
//! scale = 0.07
//! delta_r = 0.3
//! horizon = 10.0
//!
//! [geometry]
//! wavelength_nm = 795.0
//! theta_mrad = 2.0
//!
//! [write]
//! mean_nb = 5.0
//! modes_per_cm = [[45.8, 0.0]]
//!
//! [detection]
//! kappa = 0.1
//! mode = "linear"
//!
//! [run]
//! shots = 100000
//! seed = 7
//! ```

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::analysis::{AnalysisOptions, Window, BOOTSTRAP_RESAMPLES};
use crate::error::{Error, Result};
use crate::geometry::{BeamGeometry, SensorMap, SpinWaveMode};
use crate::model::{
    couplings_from_detuning, integrated_components, CouplingPair, DetuningSpec, ReadoutComponents,
    SpinWavePopulation,
};
use crate::sim::{
    DetectionModel, DetectorMode, EfficiencyModel, GateConfig, GatedModel, ModeSet, SimulationConfig,
};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ModelBlock {
    pub scale: f64,
    pub delta_r: f64,
    /// Explicit couplings; both must be given and then replace `delta_r`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub chi: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub xi: Option<f64>,
    pub horizon: f64,
    pub gamma_b: f64,
    pub eta_r: f64,
    pub evolve_steps: usize,
    /// Injected time-integrated components; all four or none.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub g_ra_bar: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub s_ra_bar: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub g_rs_bar: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub s_rs_bar: Option<f64>,
}

impl Default for ModelBlock {
    fn default() -> Self {
        ModelBlock {
            scale: 0.07,
            delta_r: 0.3,
            chi: None,
            xi: None,
            horizon: 10.0,
            gamma_b: 0.0,
            eta_r: 1.0,
            evolve_steps: 200,
            g_ra_bar: None,
            s_ra_bar: None,
            g_rs_bar: None,
            s_rs_bar: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GeometryBlock {
    pub wavelength_nm: f64,
    pub theta_mrad: f64,
    pub tilt: [f64; 2],
    pub pixels_x: usize,
    pub pixels_y: usize,
    pub pitch_mrad: f64,
    pub region_radius_mrad: f64,
}

impl Default for GeometryBlock {
    fn default() -> Self {
        GeometryBlock {
            wavelength_nm: 795.0,
            theta_mrad: 2.0,
            tilt: [0.0, -1.0],
            pixels_x: 128,
            pixels_y: 128,
            pitch_mrad: 0.03,
            region_radius_mrad: 0.75,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct WriteBlock {
    pub mean_nb: f64,
    pub eta_w: f64,
    /// Spin-wave wave vectors `[kx, ky]` in 1/cm; the first is the analysed one.
    pub modes_per_cm: Vec<[f64; 2]>,
    /// Add the `-K_b` partner of every listed mode.
    pub conjugates: bool,
    /// Spacing of background mode pairs in pixels; 0 disables them.
    pub background_spacing_px: u32,
}

impl Default for WriteBlock {
    fn default() -> Self {
        WriteBlock {
            mean_nb: 5.0,
            eta_w: 1.0,
            modes_per_cm: vec![[45.8, 0.0]],
            conjugates: true,
            background_spacing_px: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DetectionBlock {
    pub t_ws: f64,
    pub t_ra: f64,
    pub t_rs: f64,
    pub qe: f64,
    pub kappa: f64,
    pub mode: DetectorMode,
    pub spot_sigma_px: f64,
}

impl Default for DetectionBlock {
    fn default() -> Self {
        let d = DetectionModel::default();
        DetectionBlock {
            t_ws: d.t_ws,
            t_ra: d.t_ra,
            t_rs: d.t_rs,
            qe: d.qe,
            kappa: d.read_noise_kappa,
            mode: d.mode,
            spot_sigma_px: 0.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunBlock {
    pub shots: u64,
    pub seed: u64,
    pub out_dir: PathBuf,
    pub stack_file: String,
}

impl Default for RunBlock {
    fn default() -> Self {
        RunBlock {
            shots: 1000,
            seed: 0,
            out_dir: PathBuf::from("out"),
            stack_file: "stack.fwm".into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepBlock {
    pub grid: Vec<f64>,
}

impl Default for SweepBlock {
    fn default() -> Self {
        SweepBlock { grid: (1..20).map(|k| k as f64 * 0.05).collect() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FitSide {
    First,
    Last,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FitBlock {
    pub side: FitSide,
    pub points: usize,
    /// `t,counts` CSV to fit instead of a generated trace.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub trace: Option<PathBuf>,
}

impl Default for FitBlock {
    fn default() -> Self {
        FitBlock { side: FitSide::First, points: 10, trace: None }
    }
}

impl FitBlock {
    pub fn window(&self) -> Window {
        match self.side {
            FitSide::First => Window::First(self.points),
            FitSide::Last => Window::Last(self.points),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AnalysisBlock {
    pub resamples: usize,
    pub full_map: bool,
}

impl Default for AnalysisBlock {
    fn default() -> Self {
        AnalysisBlock { resamples: BOOTSTRAP_RESAMPLES, full_map: true }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub model: ModelBlock,
    pub geometry: GeometryBlock,
    pub write: WriteBlock,
    pub detection: DetectionBlock,
    pub run: RunBlock,
    pub gates: GateConfig,
    pub sweep: SweepBlock,
    pub fit: FitBlock,
    pub analysis: AnalysisBlock,
}

impl RunConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::config(e.to_string()))
    }

    pub fn to_toml_string(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::config(e.to_string()))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::config(format!("cannot read {}: {e}", path.display())))?;
        toml::from_str(&text).map_err(|e| Error::config(format!("{}: {e}", path.display())))
    }

    pub fn couplings(&self) -> Result<CouplingPair> {
        let m = &self.model;
        match (m.chi, m.xi) {
            (Some(chi), Some(xi)) => CouplingPair::new(chi, xi),
            (None, None) => couplings_from_detuning(DetuningSpec { delta_r: m.delta_r, scale: m.scale }),
            _ => Err(Error::config("model.chi and model.xi must be given together")),
        }
    }

    /// Injected components if present, otherwise the model integrals over
    /// `[0, horizon]`.
    pub fn components(&self) -> Result<ReadoutComponents> {
        let m = &self.model;
        match (m.g_ra_bar, m.s_ra_bar, m.g_rs_bar, m.s_rs_bar) {
            (Some(g_ra), Some(s_ra), Some(g_rs), Some(s_rs)) => {
                let c = ReadoutComponents { g_ra, s_ra, g_rs, s_rs };
                c.validate()?;
                Ok(c)
            }
            (None, None, None, None) => integrated_components(self.couplings()?, m.horizon),
            _ => Err(Error::config(
                "model.g_ra_bar, s_ra_bar, g_rs_bar and s_rs_bar must be given together",
            )),
        }
    }

    pub fn beam_geometry(&self) -> Result<BeamGeometry> {
        let g = &self.geometry;
        let geom = BeamGeometry {
            wavelength: g.wavelength_nm * 1e-9,
            theta: g.theta_mrad * 1e-3,
            tilt: g.tilt,
        };
        geom.validate()?;
        Ok(geom)
    }

    pub fn sensor(&self) -> Result<SensorMap> {
        let g = &self.geometry;
        SensorMap::new(
            &self.beam_geometry()?,
            g.pixels_x,
            g.pixels_y,
            g.pitch_mrad * 1e-3,
            g.region_radius_mrad * 1e-3,
        )
    }

    pub fn reference_mode(&self) -> Result<SpinWaveMode> {
        let k = self
            .write
            .modes_per_cm
            .first()
            .ok_or_else(|| Error::config("write.modes_per_cm is empty"))?;
        Ok(SpinWaveMode::from_per_cm(k[0], k[1]))
    }

    pub fn modes(&self) -> Result<Vec<SpinWaveMode>> {
        let listed = self.write.modes_per_cm.iter().map(|k| SpinWaveMode::from_per_cm(k[0], k[1]));
        let mut set = ModeSet::new(listed);
        if self.write.conjugates {
            set = set.with_conjugates();
        }
        set = set.fill_grid(&self.beam_geometry()?, &self.sensor()?, self.write.background_spacing_px)?;
        Ok(set.into_modes())
    }

    pub fn detection_model(&self) -> DetectionModel {
        let d = &self.detection;
        DetectionModel {
            t_ws: d.t_ws,
            t_ra: d.t_ra,
            t_rs: d.t_rs,
            qe: d.qe,
            read_noise_kappa: d.kappa,
            mode: d.mode,
        }
    }

    pub fn efficiency(&self) -> EfficiencyModel {
        EfficiencyModel { eta_w: self.write.eta_w, eta_r: self.model.eta_r }
    }

    pub fn simulation(&self) -> Result<SimulationConfig> {
        let cfg = SimulationConfig {
            geometry: self.beam_geometry()?,
            sensor: self.sensor()?,
            modes: self.modes()?,
            mean_nb: self.write.mean_nb,
            efficiency: self.efficiency(),
            components: self.components()?,
            detection: self.detection_model(),
            spot_sigma_px: self.detection.spot_sigma_px,
            shots: self.run.shots,
            seed: self.run.seed,
        };
        cfg.efficiency.validate()?;
        cfg.detection.validate()?;
        Ok(cfg)
    }

    /// Gated counting of the configured couplings; the stored population is
    /// `mean_nb * eta_w` and the read pulse lasts `horizon`.
    pub fn gated_model(&self) -> Result<GatedModel> {
        Ok(GatedModel {
            couplings: self.couplings()?,
            population: SpinWavePopulation::new(self.write.mean_nb * self.write.eta_w)?,
            eta_r: self.model.eta_r,
            gamma_b: self.model.gamma_b,
            qe: self.detection.qe,
            pulse_duration: self.model.horizon,
        })
    }

    pub fn analysis_options(&self) -> AnalysisOptions {
        AnalysisOptions {
            full_map: self.analysis.full_map,
            resamples: self.analysis.resamples,
            seed: self.run.seed,
        }
    }

    /// Checks every block against its module's invariants.
    pub fn validate(&self) -> Result<()> {
        self.simulation()?;
        self.gates.validate()?;
        if self.model.evolve_steps == 0 {
            return Err(Error::config("model.evolve_steps must be at least 1"));
        }
        if self.run.stack_file.is_empty() {
            return Err(Error::config("run.stack_file is empty"));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_are_valid() {
        let c = RunConfig::default();
        c.validate().unwrap();
        let sim = c.simulation().unwrap();
        assert_eq!(sim.geometry, BeamGeometry::default());
        assert_eq!(sim.sensor, SensorMap::default());
        assert_eq!(sim.detection, DetectionModel::default());
        assert_eq!(sim.modes.len(), 2);
    }

    #[test]
    fn round_trip() {
        let mut c = RunConfig::default();
        c.model.chi = Some(0.3);
        c.model.xi = Some(0.4);
        c.detection.mode = DetectorMode::Counting;
        c.fit.trace = Some("trace.csv".into());
        c.write.modes_per_cm.push([10.0, -20.5]);
        c.sweep.grid = vec![0.1, 1.0 / 3.0];
        let text = c.to_toml_string().unwrap();
        assert_eq!(RunConfig::from_toml_str(&text).unwrap(), c);
        let d = RunConfig::default();
        assert_eq!(RunConfig::from_toml_str(&d.to_toml_string().unwrap()).unwrap(), d);
    }

    #[test]
    fn partial_files_use_defaults() {
        let c = RunConfig::from_toml_str("[model]\ndelta_r = 0.6\n[run]\nseed = 9\n").unwrap();
        assert_eq!(c.model.delta_r, 0.6);
        assert_eq!(c.run.seed, 9);
        assert_eq!(c.geometry, GeometryBlock::default());
    }

    #[test]
    fn unknown_keys_rejected() {
        for text in ["[model]\ndelta = 0.6\n", "[nonsense]\n", "[gates]\nwidth = 1.0\n"] {
            assert!(matches!(RunConfig::from_toml_str(text), Err(Error::Config(_))), "{text}");
        }
    }

    #[test]
    fn invalid_values_are_domain_errors() {
        let c = RunConfig::from_toml_str("[model]\ndelta_r = 1.2\n").unwrap();
        assert!(matches!(c.validate(), Err(Error::Domain(_))));
        let c = RunConfig::from_toml_str("[model]\nchi = 1.0\n").unwrap();
        assert!(matches!(c.couplings(), Err(Error::Config(_))));
    }
}
