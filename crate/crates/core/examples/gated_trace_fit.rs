// Gated readout trace and the exponential rate fitted to its first gates.

use fwm_readout::analysis::{fit_exponential, ExpFit, Window};
use fwm_readout::model::{couplings_from_detuning, DetuningSpec, SpinWavePopulation};
use fwm_readout::sim::{simulate_gated_counts, GateConfig, GatedModel};

pub fn run_example() -> fwm_readout::Result<Vec<(f64, ExpFit)>> {
    let mut out = Vec::new();
    for delta_r in [0.2, 0.5, 0.8] {
        let couplings = couplings_from_detuning(DetuningSpec { delta_r, scale: 0.07 })?;
        let model = GatedModel {
            couplings,
            population: SpinWavePopulation::new(1e4)?,
            eta_r: 0.8,
            gamma_b: 0.0,
            qe: 0.6,
            pulse_duration: 10.0,
        };
        let trace = simulate_gated_counts(&model, &GateConfig::default())?;
        let fit = fit_exponential(&trace, Window::First(10))?;
        println!(
            "delta_r = {delta_r}: rate {:+.4} (model {:+.4}), rms residual {:.2e}",
            fit.rate,
            couplings.net_rate(),
            fit.rms_residual
        );
        out.push((delta_r, fit));
    }
    Ok(out)
}

#[allow(dead_code)]
fn main() -> fwm_readout::Result<()> {
    run_example().map(|_| ())
}
