// Effective gains recovered from synthetic stacks with read noise and
// conjugate-mode crosstalk, against the injected values.

use fwm_readout::analysis::{AnalysisOptions, GainEstimate, StackAnalyzer};
use fwm_readout::geometry::SpinWaveMode;
use fwm_readout::model::ReadoutComponents;
use fwm_readout::sim::{DetectionModel, EfficiencyModel, ModeSet, Simulation, SimulationConfig};

pub fn run_example() -> fwm_readout::Result<Vec<(f64, GainEstimate)>> {
    let mode = SpinWaveMode::from_per_cm(45.8, 0.0);
    let efficiency = EfficiencyModel { eta_w: 0.5, eta_r: 0.8 };
    let mut out = Vec::new();
    for g in [0.22, 0.93, 1.22] {
        let bare = g / (efficiency.eta_w * efficiency.eta_r);
        let sim = Simulation::new(SimulationConfig {
            modes: ModeSet::new([mode]).with_conjugates().into_modes(),
            efficiency,
            components: ReadoutComponents { g_ra: bare, s_ra: 0.5, g_rs: bare, s_rs: 1.5 },
            detection: DetectionModel { read_noise_kappa: 0.1, ..Default::default() },
            shots: 10_000,
            seed: 17,
            ..Default::default()
        })?;
        let options = AnalysisOptions { full_map: false, resamples: 100, seed: 1 };
        let mut analyzer = StackAnalyzer::new(&sim.header(), mode, options)?;
        sim.run(|_, _, frame| analyzer.push(frame))?;
        let e = analyzer.finish()?.gains;
        println!(
            "injected {g:.2}: ra {:.3} +- {:.3}  rs {:.3} +- {:.3}",
            e.g_eff_ra, e.stderr_ra, e.g_eff_rs, e.stderr_rs
        );
        out.push((g, e));
    }
    Ok(out)
}

#[allow(dead_code)]
fn main() -> fwm_readout::Result<()> {
    run_example().map(|_| ())
}
