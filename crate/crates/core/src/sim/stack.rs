use std::collections::HashSet;
use std::f64::consts::PI;

use rayon::prelude::*;

use super::render::{render_frame, FramePlan};
use super::shot::{sample_readout, sample_write, ShotRecord};
use super::{DetectionModel, DetectorMode, EfficiencyModel};
use crate::error::{Error, Result};
use crate::geometry::{BeamGeometry, Pixel, SensorMap, SpinWaveMode};
use crate::model::ReadoutComponents;
use crate::rng::{Purpose, StreamFactory};

/// Shots generated concurrently before being handed to the sink in order.
const CHUNK: u64 = 64;

/// Builder for the list of simulated spin-wave modes.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ModeSet {
    modes: Vec<SpinWaveMode>,
}

impl ModeSet {
    pub fn new(modes: impl IntoIterator<Item = SpinWaveMode>) -> Self {
        ModeSet { modes: modes.into_iter().collect() }
    }

    /// Adds `-k_b` for every mode whose conjugate is missing.
    pub fn with_conjugates(mut self) -> Self {
        let mut extra = Vec::new();
        for m in &self.modes {
            let c = m.conjugate();
            if !self.modes.contains(&c) && !extra.contains(&c) {
                extra.push(c);
            }
        }
        self.modes.extend(extra);
        self
    }

    /// Adds background conjugate pairs of modes on a square pixel grid of the
    /// given spacing covering the readout region. Pairs whose spots would land
    /// on a pixel already used by another mode are skipped.
    pub fn fill_grid(mut self, geometry: &BeamGeometry, sensor: &SensorMap, spacing_px: u32) -> Result<Self> {
        if spacing_px == 0 {
            return Ok(self);
        }
        let mut occupied = HashSet::new();
        for m in &self.modes {
            let s = sensor.spots(*m, geometry)?;
            occupied.extend([s.ws, s.ra, s.rs]);
        }
        let step = spacing_px as i64;
        let r = sensor.region_radius_px();
        let reach = (r / step as f64).floor() as i64;
        let to_k = sensor.pitch * 2.0 * PI / geometry.wavelength;
        for j in 0..=reach {
            for i in -reach..=reach {
                // one representative of each {d, -d} pair
                if j == 0 && i <= 0 {
                    continue;
                }
                let (dx, dy) = (i * step, j * step);
                if ((dx * dx + dy * dy) as f64) > r * r {
                    continue;
                }
                let m = SpinWaveMode::new(dx as f64 * to_k, dy as f64 * to_k);
                let (a, b) = (sensor.spots(m, geometry)?, sensor.spots(m.conjugate(), geometry)?);
                let pixels = [a.ws, a.ra, a.rs, b.ws];
                if pixels.iter().any(|p| occupied.contains(p)) {
                    continue;
                }
                occupied.extend(pixels);
                self.modes.push(m);
                self.modes.push(m.conjugate());
            }
        }
        Ok(self)
    }

    pub fn modes(&self) -> &[SpinWaveMode] {
        &self.modes
    }

    pub fn into_modes(self) -> Vec<SpinWaveMode> {
        self.modes
    }
}

/// Everything needed to generate a reproducible frame stack.
#[derive(Debug, Clone, PartialEq)]
pub struct SimulationConfig {
    pub geometry: BeamGeometry,
    pub sensor: SensorMap,
    pub modes: Vec<SpinWaveMode>,
    /// Mean write-Stokes photon number per mode.
    pub mean_nb: f64,
    pub efficiency: EfficiencyModel,
    /// Time-integrated readout components injected into every mode.
    pub components: ReadoutComponents,
    pub detection: DetectionModel,
    pub spot_sigma_px: f64,
    pub shots: u64,
    pub seed: u64,
}

impl Default for SimulationConfig {
    fn default() -> Self {
        SimulationConfig {
            geometry: BeamGeometry::default(),
            sensor: SensorMap::default(),
            modes: ModeSet::new([SpinWaveMode::from_per_cm(45.8, 0.0)]).with_conjugates().into_modes(),
            mean_nb: 5.0,
            efficiency: EfficiencyModel::default(),
            components: ReadoutComponents { g_ra: 1.0, s_ra: 0.5, g_rs: 1.0, s_rs: 1.5 },
            detection: DetectionModel::default(),
            spot_sigma_px: 0.0,
            shots: 1000,
            seed: 0,
        }
    }
}

/// Parameters that generated a stack; stored in the file header so analysis
/// results can be checked against them.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GroundTruth {
    pub components: ReadoutComponents,
    pub efficiency: EfficiencyModel,
    pub mean_nb: f64,
}

impl GroundTruth {
    /// `eta_w eta_r G_RA`.
    pub fn effective_gain_ra(&self) -> f64 {
        self.efficiency.eta_w * self.efficiency.eta_r * self.components.g_ra
    }

    /// `eta_w eta_r G_RS`.
    pub fn effective_gain_rs(&self) -> f64 {
        self.efficiency.eta_w * self.efficiency.eta_r * self.components.g_rs
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StackHeader {
    pub shots: u64,
    pub sensor: SensorMap,
    pub geometry: BeamGeometry,
    pub detection: DetectionModel,
    pub truth: GroundTruth,
    pub spot_sigma_px: f64,
    pub seed: u64,
}

/// Frames of a run held in memory, row-major, one after another.
#[derive(Debug, Clone, PartialEq)]
pub struct FrameStack {
    pub header: StackHeader,
    pub frames: Vec<f32>,
}

impl FrameStack {
    pub fn shots(&self) -> usize {
        self.header.shots as usize
    }

    pub fn frame(&self, i: usize) -> &[f32] {
        let n = self.header.sensor.len();
        &self.frames[i * n..(i + 1) * n]
    }

    pub fn iter_frames(&self) -> impl Iterator<Item = &[f32]> {
        self.frames.chunks_exact(self.header.sensor.len().max(1)).take(self.shots())
    }

    /// Intensity of one pixel across all shots.
    pub fn pixel_series(&self, p: Pixel) -> Vec<f64> {
        let idx = self.header.sensor.index(p);
        self.iter_frames().map(|f| f[idx] as f64).collect()
    }
}

/// A validated simulation with its precomputed frame layout.
#[derive(Debug, Clone)]
pub struct Simulation {
    config: SimulationConfig,
    plan: FramePlan,
    streams: StreamFactory,
}

impl Simulation {
    pub fn new(config: SimulationConfig) -> Result<Self> {
        config.efficiency.validate()?;
        config.detection.validate()?;
        config.components.validate()?;
        if !(config.mean_nb >= 0.0 && config.mean_nb.is_finite()) {
            return Err(Error::domain("mean_nb must be finite and >= 0"));
        }
        let plan = FramePlan::new(&config.modes, &config.geometry, &config.sensor, config.spot_sigma_px)?;
        let streams = StreamFactory::new(config.seed);
        Ok(Simulation { config, plan, streams })
    }

    pub fn config(&self) -> &SimulationConfig {
        &self.config
    }

    pub fn plan(&self) -> &FramePlan {
        &self.plan
    }

    pub fn header(&self) -> StackHeader {
        let c = &self.config;
        StackHeader {
            shots: c.shots,
            sensor: c.sensor,
            geometry: c.geometry,
            detection: c.detection,
            truth: GroundTruth {
                components: c.components,
                efficiency: c.efficiency,
                mean_nb: c.mean_nb,
            },
            spot_sigma_px: c.spot_sigma_px,
            seed: c.seed,
        }
    }

    /// Photon numbers of shot `index`.
    pub fn shot(&self, index: u64) -> Result<ShotRecord> {
        let c = &self.config;
        let write = sample_write(
            c.modes.len(),
            c.mean_nb,
            c.efficiency.eta_w,
            &mut self.streams.stream(index, Purpose::Write),
        )?;
        let readout = sample_readout(
            &write.n_b,
            &c.components,
            c.efficiency.eta_r,
            c.detection.mode == DetectorMode::Counting,
            &mut self.streams.stream(index, Purpose::Readout),
        )?;
        Ok(ShotRecord { write, readout })
    }

    pub fn frame(&self, index: u64, shot: &ShotRecord) -> Result<Vec<f32>> {
        let purpose = match self.config.detection.mode {
            DetectorMode::Linear => Purpose::Noise,
            DetectorMode::Counting => Purpose::Detection,
        };
        render_frame(shot, &self.plan, &self.config.detection, &mut self.streams.stream(index, purpose))
    }

    /// Generates every shot, in parallel on the current rayon pool, and feeds
    /// them to `sink` in shot order.
    pub fn run<F>(&self, mut sink: F) -> Result<()>
    where
        F: FnMut(u64, &ShotRecord, &[f32]) -> Result<()>,
    {
        let total = self.config.shots;
        let mut start = 0;
        while start < total {
            let end = (start + CHUNK).min(total);
            let batch = (start..end)
                .into_par_iter()
                .map(|i| {
                    let shot = self.shot(i)?;
                    let frame = self.frame(i, &shot)?;
                    Ok((shot, frame))
                })
                .collect::<Result<Vec<_>>>()?;
            for (offset, (shot, frame)) in batch.iter().enumerate() {
                sink(start + offset as u64, shot, frame)?;
            }
            start = end;
        }
        Ok(())
    }

    /// Materialises the whole run in memory.
    pub fn stack(&self) -> Result<FrameStack> {
        let mut frames = Vec::with_capacity(self.config.shots as usize * self.config.sensor.len());
        self.run(|_, _, f| {
            frames.extend_from_slice(f);
            Ok(())
        })?;
        Ok(FrameStack {
            header: self.header(),
            frames,
        })
    }
}

pub fn simulate_stack(config: SimulationConfig) -> Result<FrameStack> {
    Simulation::new(config)?.stack()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small() -> SimulationConfig {
        SimulationConfig {
            shots: 300,
            seed: 11,
            detection: DetectionModel { read_noise_kappa: 0.1, ..Default::default() },
            ..Default::default()
        }
    }

    #[test]
    fn zero_shots_gives_empty_stack() {
        let s = simulate_stack(SimulationConfig { shots: 0, ..small() }).unwrap();
        assert_eq!(s.shots(), 0);
        assert!(s.frames.is_empty());
        assert_eq!(s.header.sensor, SensorMap::default());
    }

    #[test]
    fn thread_count_does_not_change_output() {
        let one = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
        let four = rayon::ThreadPoolBuilder::new().num_threads(4).build().unwrap();
        let a = one.install(|| simulate_stack(small())).unwrap();
        let b = four.install(|| simulate_stack(small())).unwrap();
        assert!(a.frames.iter().zip(&b.frames).all(|(x, y)| x.to_bits() == y.to_bits()));
        assert_eq!(a.frames.len(), b.frames.len());
    }

    #[test]
    fn seed_changes_output() {
        let a = simulate_stack(small()).unwrap();
        let b = simulate_stack(SimulationConfig { seed: 12, ..small() }).unwrap();
        assert_ne!(a.frames, b.frames);
    }

    #[test]
    fn frame_total_matches_transmitted_photons() {
        let cfg = SimulationConfig {
            detection: DetectionModel { read_noise_kappa: 0.0, qe: 1.0, ..Default::default() },
            ..small()
        };
        let det = cfg.detection;
        let sim = Simulation::new(cfg).unwrap();
        sim.run(|_, shot, frame| {
            let w = &shot.write;
            let r = &shot.readout;
            let expected: f64 = (0..shot.modes())
                .map(|m| det.t_ws * w.n_ws[m] as f64 + det.t_ra * r.n_ra[m] + det.t_rs * r.n_rs[m])
                .sum();
            let total: f64 = frame.iter().map(|&v| v as f64).sum();
            assert!((total - expected).abs() <= 1e-6 * expected.max(1.0));
            Ok(())
        })
        .unwrap();
    }

    #[test]
    fn grid_fill_avoids_reference_spots() {
        let g = BeamGeometry::default();
        let s = SensorMap::default();
        let base = ModeSet::new([SpinWaveMode::from_per_cm(45.8, 0.0)]).with_conjugates();
        let filled = base.fill_grid(&g, &s, 4).unwrap();
        assert!(filled.modes().len() > 50);
        let mut ws = HashSet::new();
        let mut read = std::collections::HashMap::new();
        for m in filled.modes() {
            let sp = s.spots(*m, &g).unwrap();
            assert!(ws.insert(sp.ws), "write pixel {:?} used twice", sp.ws);
            assert!(s.write_region().contains(sp.ws) && s.read_region().contains(sp.ra));
            *read.entry(sp.ra).or_insert(0) += 1;
            *read.entry(sp.rs).or_insert(0) += 1;
            assert!(filled.modes().contains(&m.conjugate()));
        }
        // each readout pixel is shared by exactly one conjugate pair
        assert!(read.values().all(|&n| n == 2));
    }
}
