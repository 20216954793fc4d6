use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{components_over, exp_window_integral, CouplingPair, SpinWavePopulation};

/// A train of equally spaced detection gates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GateConfig {
    pub gate_start: f64,
    pub gate_width: f64,
    pub n_gates: usize,
    /// Delay between the starts of consecutive gates.
    pub spacing: f64,
}

impl Default for GateConfig {
    fn default() -> Self {
        GateConfig {
            gate_start: 0.0,
            gate_width: 0.0625,
            n_gates: 40,
            spacing: 0.25,
        }
    }
}

impl GateConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.gate_width > 0.0) || !(self.spacing >= 0.0) || !(self.gate_start >= 0.0) {
            return Err(Error::domain("gates need start >= 0, width > 0 and spacing >= 0"));
        }
        if self.n_gates == 0 {
            return Err(Error::domain("at least one gate is required"));
        }
        Ok(())
    }

    pub fn start(&self, j: usize) -> f64 {
        self.gate_start + j as f64 * self.spacing
    }

    pub fn last_end(&self) -> f64 {
        self.start(self.n_gates - 1) + self.gate_width
    }
}

/// Readout conditions for a gated, photon-counting measurement of the summed
/// anti-Stokes and Stokes light.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GatedModel {
    pub couplings: CouplingPair,
    pub population: SpinWavePopulation,
    pub eta_r: f64,
    /// Optional spin-wave decay rate applied to the stimulated part.
    pub gamma_b: f64,
    pub qe: f64,
    pub pulse_duration: f64,
}

/// Mean counts per gate; `times` holds gate start times.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct GatedTrace {
    pub times: Vec<f64>,
    pub counts: Vec<f64>,
}

/// `qe * ∫_gate [(g_ra + g_rs) n_b eta_r e^{-gamma_b t} + s_ra + s_rs] dt`
/// for every gate, from the closed-form antiderivatives.
pub fn simulate_gated_counts(model: &GatedModel, gates: &GateConfig) -> Result<GatedTrace> {
    gates.validate()?;
    let GatedModel { couplings, population, eta_r, gamma_b, qe, pulse_duration } = *model;
    if !(0.0..=1.0).contains(&eta_r) || !(0.0..=1.0).contains(&qe) {
        return Err(Error::domain("eta_r and qe must lie in [0, 1]"));
    }
    if !(gamma_b >= 0.0) {
        return Err(Error::domain("decay rate gamma_b must be >= 0"));
    }
    if gates.last_end() > pulse_duration * (1.0 + 1e-12) {
        return Err(Error::domain(format!(
            "gates extend to t={} beyond the read pulse of duration {pulse_duration}",
            gates.last_end()
        )));
    }
    let gain_rate = couplings.chi_sq() + couplings.xi_sq();
    let net = couplings.net_rate() - gamma_b;
    let mut trace = GatedTrace::default();
    for j in 0..gates.n_gates {
        let a = gates.start(j);
        let stimulated = gain_rate * population.n_b * eta_r * exp_window_integral(net, a, gates.gate_width);
        let spont = components_over(couplings, a, a + gates.gate_width)?;
        let count = qe * (stimulated + spont.s_ra + spont.s_rs);
        if !count.is_finite() {
            return Err(Error::domain("gated counts overflow"));
        }
        trace.times.push(a);
        trace.counts.push(count);
    }
    Ok(trace)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::readout_rates;

    fn model(x: f64, y: f64, n_b: f64) -> GatedModel {
        GatedModel {
            couplings: CouplingPair::from_squares(x, y).unwrap(),
            population: SpinWavePopulation::new(n_b).unwrap(),
            eta_r: 1.0,
            gamma_b: 0.0,
            qe: 0.2,
            pulse_duration: 40.0,
        }
    }

    fn gates() -> GateConfig {
        GateConfig { gate_start: 0.0, gate_width: 0.25, n_gates: 40, spacing: 1.0 }
    }

    #[test]
    fn pure_anti_stokes_decays_exponentially() {
        let t = simulate_gated_counts(&model(0.2, 0.0, 10.0), &gates()).unwrap();
        for w in t.counts.windows(2) {
            assert!(w[1] < w[0]);
            assert!(((w[1] / w[0]).ln() + 0.2).abs() < 1e-12);
        }
    }

    #[test]
    fn stokes_dominated_counts_grow() {
        let m = model(0.1, 0.3, 10.0);
        let t = simulate_gated_counts(&m, &gates()).unwrap();
        let n = t.counts.len();
        let late = (t.counts[n - 1] / t.counts[n - 2]).ln();
        assert!((late - 0.2).abs() < 1e-3, "late log-ratio {late}");
    }

    #[test]
    fn degenerate_counts_grow_linearly() {
        let m = GatedModel { pulse_duration: 40.0, ..model(0.5, 0.5, 1.0) };
        let t = simulate_gated_counts(&m, &gates()).unwrap();
        let d: Vec<f64> = t.counts.windows(2).map(|w| w[1] - w[0]).collect();
        for w in d.windows(2) {
            assert!((w[1] - w[0]).abs() < 1e-12 * w[0].abs().max(1.0));
        }
        // independent check: Simpson quadrature of the instantaneous rates
        let c = m.couplings;
        let f = |s: f64| {
            let r = readout_rates(c, s).unwrap();
            (r.g_ra + r.g_rs) * 1.0 + r.s_ra + r.s_rs
        };
        for (j, &count) in t.counts.iter().enumerate().step_by(7) {
            let a = t.times[j];
            let n = 200;
            let h = 0.25 / n as f64;
            let mut acc = f(a) + f(a + 0.25);
            for i in 1..n {
                acc += if i % 2 == 1 { 4.0 } else { 2.0 } * f(a + i as f64 * h);
            }
            let q = 0.2 * acc * h / 3.0;
            assert!((q - count).abs() < 1e-12 * count, "{q} vs {count}");
        }
    }

    #[test]
    fn decay_knob_suppresses_stimulated_part() {
        let plain = simulate_gated_counts(&model(0.2, 0.0, 10.0), &gates()).unwrap();
        let m = GatedModel { gamma_b: 0.05, ..model(0.2, 0.0, 10.0) };
        let decayed = simulate_gated_counts(&m, &gates()).unwrap();
        assert_eq!(plain.counts[0] > decayed.counts[0], true);
        let r = (decayed.counts[1] / decayed.counts[0]).ln();
        assert!((r + 0.25).abs() < 1e-12);
    }

    #[test]
    fn gate_outside_pulse_rejected() {
        let m = GatedModel { pulse_duration: 10.0, ..model(0.2, 0.0, 1.0) };
        assert!(matches!(simulate_gated_counts(&m, &gates()), Err(Error::Domain(_))));
    }
}
