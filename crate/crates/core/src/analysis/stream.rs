use std::path::Path;

use super::correlation::{coefficient, CorrelationMap, RegionSpec};
use super::gains::{estimate_gains, read_noise_variance, GainEstimate, BOOTSTRAP_RESAMPLES};
use super::peaks::{check_separation, peak_correlations, window, Peaks};
use crate::error::{Error, Result};
use crate::geometry::{Pixel, SpinWaveMode, Spots};
use crate::sim::{FrameStack, StackHeader, StackReader};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AnalysisOptions {
    /// Correlate every region pixel with the write-Stokes pixel; otherwise
    /// only the peak search windows.
    pub full_map: bool,
    pub resamples: usize,
    /// Seed of the bootstrap streams.
    pub seed: u64,
}

impl Default for AnalysisOptions {
    fn default() -> Self {
        AnalysisOptions { full_map: true, resamples: BOOTSTRAP_RESAMPLES, seed: 0 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AnalysisReport {
    pub shots: u64,
    pub predicted: Spots,
    pub map: CorrelationMap,
    pub peaks: Peaks,
    pub gains: GainEstimate,
}

/// Single-pass analysis of a stack for one reference mode.
///
/// Keeps running co-moments of the write-Stokes pixel with every target pixel
/// and the full intensity series of the pixels in the peak search windows, so
/// memory does not grow with the frame size times the number of shots.
pub struct StackAnalyzer {
    header: StackHeader,
    regions: RegionSpec,
    spots: Spots,
    options: AnalysisOptions,
    ws_index: usize,
    targets: Vec<Pixel>,
    target_index: Vec<usize>,
    n: u64,
    mean_ws: f64,
    m2_ws: f64,
    mean: Vec<f64>,
    m2: Vec<f64>,
    co: Vec<f64>,
    kept: Vec<Pixel>,
    kept_index: Vec<usize>,
    series: Vec<Vec<f32>>,
    ws_series: Vec<f32>,
}

impl StackAnalyzer {
    pub fn new(header: &StackHeader, mode: SpinWaveMode, options: AnalysisOptions) -> Result<Self> {
        let sensor = header.sensor;
        let regions = RegionSpec::from_sensor(&sensor);
        regions.validate(&sensor)?;
        let spots = sensor.spots(mode, &header.geometry)?;
        check_separation(spots.ra, spots.rs)?;
        for p in [spots.ra, spots.rs] {
            if !regions.read_region.contains(p) {
                return Err(Error::OutOfBounds(format!(
                    "predicted spot ({}, {}) is outside the readout region",
                    p.x, p.y
                )));
            }
        }
        if !regions.write_region.contains(spots.ws) {
            return Err(Error::OutOfBounds("write-Stokes spot is outside the write region".into()));
        }
        let kept: Vec<Pixel> = window(spots.ra)
            .chain(window(spots.rs))
            .filter(|p| regions.read_region.contains(*p))
            .collect();
        let targets = if options.full_map { regions.pixels() } else { kept.clone() };
        let m = targets.len();
        Ok(StackAnalyzer {
            header: *header,
            regions,
            spots,
            options,
            ws_index: sensor.index(spots.ws),
            target_index: targets.iter().map(|p| sensor.index(*p)).collect(),
            targets,
            n: 0,
            mean_ws: 0.0,
            m2_ws: 0.0,
            mean: vec![0.0; m],
            m2: vec![0.0; m],
            co: vec![0.0; m],
            kept_index: kept.iter().map(|p| sensor.index(*p)).collect(),
            series: vec![Vec::new(); kept.len()],
            kept,
            ws_series: Vec::new(),
        })
    }

    pub fn predicted(&self) -> Spots {
        self.spots
    }

    pub fn push(&mut self, frame: &[f32]) -> Result<()> {
        if frame.len() != self.header.sensor.len() {
            return Err(Error::Format(format!(
                "frame has {} pixels, expected {}",
                frame.len(),
                self.header.sensor.len()
            )));
        }
        self.n += 1;
        let inv = 1.0 / self.n as f64;
        let x = frame[self.ws_index] as f64;
        let dx = x - self.mean_ws;
        self.mean_ws += dx * inv;
        self.m2_ws += dx * (x - self.mean_ws);
        for (k, &i) in self.target_index.iter().enumerate() {
            let y = frame[i] as f64;
            let dy = y - self.mean[k];
            self.mean[k] += dy * inv;
            let dy_new = y - self.mean[k];
            self.m2[k] += dy * dy_new;
            self.co[k] += dx * dy_new;
        }
        self.ws_series.push(frame[self.ws_index]);
        for (s, &i) in self.series.iter_mut().zip(&self.kept_index) {
            s.push(frame[i]);
        }
        Ok(())
    }

    pub fn finish(self) -> Result<AnalysisReport> {
        if self.n < 2 {
            return Err(Error::Degenerate(format!(
                "analysis needs at least 2 shots, got {}",
                self.n
            )));
        }
        let detection = self.header.detection;
        let var_f = read_noise_variance(&self.ws_series, &detection);
        let var_ws = self.m2_ws / (self.n - 1) as f64;
        if !(var_ws > var_f) {
            return Err(Error::NonInformative(format!(
                "write-Stokes variance {var_ws:.6e} does not exceed the read-noise variance {var_f:.6e}"
            )));
        }
        let mut map = CorrelationMap::undefined(self.spots.ws, &self.header.sensor);
        for (k, &p) in self.targets.iter().enumerate() {
            map.set(p, coefficient(self.co[k], self.m2_ws, self.m2[k]));
        }
        map.set(self.spots.ws, 1.0);
        let peaks = peak_correlations(&map, &self.regions, self.spots.ra, self.spots.rs)?;
        let series_of = |p: Pixel| {
            let k = self.kept.iter().position(|q| *q == p).expect("peak lies in a search window");
            &self.series[k]
        };
        let gains = estimate_gains(
            &self.ws_series,
            series_of(peaks.pixels.ra),
            series_of(peaks.pixels.rs),
            &detection,
            var_f,
            self.options.resamples,
            self.options.seed,
        )?;
        Ok(AnalysisReport {
            shots: self.n,
            predicted: self.spots,
            map,
            peaks,
            gains,
        })
    }

    pub fn analyze_stack(stack: &FrameStack, mode: SpinWaveMode, options: AnalysisOptions) -> Result<AnalysisReport> {
        let mut a = StackAnalyzer::new(&stack.header, mode, options)?;
        for f in stack.iter_frames() {
            a.push(f)?;
        }
        a.finish()
    }

    pub fn analyze_file(path: impl AsRef<Path>, mode: SpinWaveMode, options: AnalysisOptions) -> Result<AnalysisReport> {
        let mut reader = StackReader::open(path)?;
        let mut a = StackAnalyzer::new(reader.header(), mode, options)?;
        let mut buf = Vec::new();
        while reader.next_frame(&mut buf)? {
            a.push(&buf)?;
        }
        a.finish()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analysis::correlation_map;
    use crate::sim::{simulate_stack, write_stack, DetectionModel, SimulationConfig};

    fn cfg() -> SimulationConfig {
        SimulationConfig {
            shots: 3000,
            seed: 8,
            detection: DetectionModel { read_noise_kappa: 0.1, ..Default::default() },
            ..Default::default()
        }
    }

    #[test]
    fn streaming_map_matches_two_pass_map() {
        let c = cfg();
        let stack = simulate_stack(c.clone()).unwrap();
        let report = StackAnalyzer::analyze_stack(&stack, c.modes[0], AnalysisOptions::default()).unwrap();
        let direct = correlation_map(&stack, report.predicted.ws, &RegionSpec::from_sensor(&c.sensor)).unwrap();
        for (a, b) in report.map.values.iter().zip(&direct.values) {
            assert!(a.is_nan() == b.is_nan());
            if !a.is_nan() {
                assert!((a - b).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn file_and_memory_agree() {
        let c = cfg();
        let stack = simulate_stack(c.clone()).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("a.fwm");
        write_stack(&path, &stack).unwrap();
        let opts = AnalysisOptions { full_map: false, resamples: 20, seed: 1 };
        let a = StackAnalyzer::analyze_stack(&stack, c.modes[0], opts).unwrap();
        let b = StackAnalyzer::analyze_file(&path, c.modes[0], opts).unwrap();
        assert_eq!((a.peaks, a.gains), (b.peaks, b.gains));
        assert!(a.map.values.iter().zip(&b.map.values).all(|(x, y)| x.to_bits() == y.to_bits()));
        let truth = stack.header.truth;
        assert!((a.gains.g_eff_ra - truth.effective_gain_ra()).abs() < 4.0 * a.gains.stderr_ra, "{:?}", a.gains);
    }

    #[test]
    fn empty_memory_hits_the_variance_floor() {
        let c = SimulationConfig { mean_nb: 0.0, shots: 50, ..cfg() };
        let stack = simulate_stack(c.clone()).unwrap();
        let r = StackAnalyzer::analyze_stack(&stack, c.modes[0], AnalysisOptions::default());
        assert!(matches!(r, Err(Error::NonInformative(_))));
        let c = SimulationConfig { shots: 1, ..cfg() };
        let stack = simulate_stack(c.clone()).unwrap();
        let r = StackAnalyzer::analyze_stack(&stack, c.modes[0], AnalysisOptions::default());
        assert!(matches!(r, Err(Error::Degenerate(_))));
    }
}
