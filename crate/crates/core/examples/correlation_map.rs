// Correlation map of a stack with many independent background modes; the
// reference mode's read spots stand out against the background.

use fwm_readout::analysis::{AnalysisOptions, Peaks, StackAnalyzer};
use fwm_readout::geometry::SpinWaveMode;
use fwm_readout::sim::{ModeSet, Simulation, SimulationConfig};

pub fn run_example() -> fwm_readout::Result<Peaks> {
    let base = SimulationConfig::default();
    let mode = SpinWaveMode::from_per_cm(45.8, 0.0);
    let modes = ModeSet::new([mode])
        .with_conjugates()
        .fill_grid(&base.geometry, &base.sensor, 8)?
        .into_modes();
    println!("{} modes", modes.len());
    let sim = Simulation::new(SimulationConfig { modes, shots: 3000, seed: 5, ..base })?;
    let mut analyzer = StackAnalyzer::new(&sim.header(), mode, AnalysisOptions { resamples: 50, ..Default::default() })?;
    sim.run(|_, _, frame| analyzer.push(frame))?;
    let report = analyzer.finish()?;

    let background = report
        .map
        .defined()
        .filter(|(p, _)| {
            let peaks = report.peaks.pixels;
            *p != peaks.ws && p.chebyshev(peaks.ra) > 2 && p.chebyshev(peaks.rs) > 2
        })
        .map(|(_, c)| c.abs())
        .fold(0.0, f64::max);
    let p = report.peaks.pixels;
    println!("C(ws, ra) = {:.3} at ({}, {})", report.peaks.c_ws_ra, p.ra.x, p.ra.y);
    println!("C(ws, rs) = {:.3} at ({}, {})", report.peaks.c_ws_rs, p.rs.x, p.rs.y);
    println!("largest background |C| = {background:.3}");
    Ok(report.peaks)
}

#[allow(dead_code)]
fn main() -> fwm_readout::Result<()> {
    run_example().map(|_| ())
}
