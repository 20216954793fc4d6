use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::io::fmt_f64;
use crate::sim::GatedTrace;

/// Which gates of a trace to fit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "side", content = "points")]
pub enum Window {
    First(usize),
    Last(usize),
}

/// `counts ≈ amplitude · exp(rate · t)` over `window` (start and end times).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExpFit {
    pub rate: f64,
    pub amplitude: f64,
    pub window: (f64, f64),
    /// RMS residual of `ln(counts)`.
    pub rms_residual: f64,
}

/// Least-squares line through `(t, ln counts)` over the selected gates.
pub fn fit_exponential(trace: &GatedTrace, window: Window) -> Result<ExpFit> {
    let n = trace.times.len();
    if trace.counts.len() != n {
        return Err(Error::domain("trace times and counts differ in length"));
    }
    let k = match window {
        Window::First(k) | Window::Last(k) => k,
    };
    if k < 3 || k > n {
        return Err(Error::Degenerate(format!(
            "fit window needs 3..={n} points, got {k}"
        )));
    }
    let range = match window {
        Window::First(_) => 0..k,
        Window::Last(_) => n - k..n,
    };
    let t = &trace.times[range.clone()];
    let c = &trace.counts[range];
    if let Some(bad) = c.iter().find(|v| !(**v > 0.0 && v.is_finite())) {
        return Err(Error::domain(format!("counts must be positive to fit in log space, got {bad}")));
    }
    let y: Vec<f64> = c.iter().map(|v| v.ln()).collect();
    let kf = k as f64;
    let tm = t.iter().sum::<f64>() / kf;
    let ym = y.iter().sum::<f64>() / kf;
    let sxx: f64 = t.iter().map(|ti| (ti - tm).powi(2)).sum();
    if !(sxx > 0.0) {
        return Err(Error::Degenerate("fit window has no spread in time".into()));
    }
    let sxy: f64 = t.iter().zip(&y).map(|(ti, yi)| (ti - tm) * (yi - ym)).sum();
    let rate = sxy / sxx;
    let intercept = ym - rate * tm;
    let ss: f64 = t.iter().zip(&y).map(|(ti, yi)| (yi - intercept - rate * ti).powi(2)).sum();
    Ok(ExpFit {
        rate,
        amplitude: intercept.exp(),
        window: (t[0], t[k - 1]),
        rms_residual: (ss / kf).sqrt(),
    })
}

/// Writes a trace as `t,counts` CSV.
pub fn write_trace_csv<W: Write>(trace: &GatedTrace, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["t", "counts"])?;
    for (t, c) in trace.times.iter().zip(&trace.counts) {
        w.write_record([fmt_f64(*t), fmt_f64(*c)])?;
    }
    w.flush()?;
    Ok(())
}

/// Reads a `t,counts` CSV with a header row.
pub fn read_trace_csv<R: Read>(input: R) -> Result<GatedTrace> {
    let mut r = csv::Reader::from_reader(input);
    let mut trace = GatedTrace::default();
    for rec in r.records() {
        let rec = rec?;
        if rec.len() != 2 {
            return Err(Error::Format(format!("trace row has {} fields, expected 2", rec.len())));
        }
        let num = |s: &str| {
            s.trim().parse::<f64>().map_err(|_| Error::Format(format!("bad number {s:?} in trace")))
        };
        trace.times.push(num(&rec[0])?);
        trace.counts.push(num(&rec[1])?);
    }
    Ok(trace)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{CouplingPair, SpinWavePopulation};
    use crate::sim::{simulate_gated_counts, GateConfig, GatedModel};
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn trace(f: impl Fn(f64) -> f64, n: usize) -> GatedTrace {
        let times: Vec<f64> = (0..n).map(|i| i as f64 * 0.5).collect();
        GatedTrace { counts: times.iter().map(|&t| f(t)).collect(), times }
    }

    #[test]
    fn exact_exponential() {
        let fit = fit_exponential(&trace(|t| (-t).exp(), 10), Window::First(10)).unwrap();
        assert!((fit.rate + 1.0).abs() < 1e-9);
        assert_relative_eq!(fit.amplitude, 1.0, max_relative = 1e-9);
        assert_eq!(fit.window, (0.0, 4.5));
        assert!(fit.rms_residual < 1e-12);
    }

    #[test]
    fn flat_trace() {
        let fit = fit_exponential(&trace(|_| 3.5, 8), Window::Last(5)).unwrap();
        assert_eq!(fit.rate, 0.0);
        assert_relative_eq!(fit.amplitude, 3.5, max_relative = 1e-15);
    }

    #[test]
    fn simulated_decay_rate() {
        let model = GatedModel {
            couplings: CouplingPair::from_squares(0.2, 0.0).unwrap(),
            population: SpinWavePopulation::new(50.0).unwrap(),
            eta_r: 0.8,
            gamma_b: 0.0,
            qe: 0.2,
            pulse_duration: 40.0,
        };
        let gates = GateConfig { gate_start: 0.0, gate_width: 0.5, n_gates: 40, spacing: 1.0 };
        let t = simulate_gated_counts(&model, &gates).unwrap();
        let fit = fit_exponential(&t, Window::First(10)).unwrap();
        assert!((fit.rate + 0.2).abs() < 0.02 * 0.2, "{fit:?}");
    }

    #[test]
    fn invalid_windows() {
        let t = trace(|t| (-t).exp(), 10);
        assert!(matches!(fit_exponential(&t, Window::First(2)), Err(Error::Degenerate(_))));
        assert!(matches!(fit_exponential(&t, Window::Last(11)), Err(Error::Degenerate(_))));
        let z = trace(|t| 1.0 - t, 10);
        assert!(matches!(fit_exponential(&z, Window::Last(4)), Err(Error::Domain(_))));
        let same = GatedTrace { times: vec![1.0; 4], counts: vec![1.0, 2.0, 3.0, 4.0] };
        assert!(matches!(fit_exponential(&same, Window::First(4)), Err(Error::Degenerate(_))));
    }

    #[test]
    fn trace_csv_round_trip() {
        let t = trace(|t| (0.3 * t).exp(), 7);
        let mut buf = Vec::new();
        write_trace_csv(&t, &mut buf).unwrap();
        assert_eq!(read_trace_csv(buf.as_slice()).unwrap(), t);
        assert!(matches!(read_trace_csv("t,counts\n1,x\n".as_bytes()), Err(Error::Format(_))));
    }

    proptest! {
        #[test]
        fn exact_inputs_recover_rate(rate in -3.0f64..3.0, amp in 0.01f64..1e3, n in 3usize..30) {
            let fit = fit_exponential(&trace(|t| amp * (rate * t).exp(), n), Window::Last(n)).unwrap();
            prop_assert!((fit.rate - rate).abs() <= 1e-9 * rate.abs().max(1.0));
            prop_assert!(fit.rms_residual >= 0.0);
        }
    }
}
