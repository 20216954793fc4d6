//! Effective readout gains from write/read intensity covariances.
//!
//! With `I_WS = t_ws n_ws + f_WS` and `I_i = t_i (eta_r G_i n_b + ...)`,
//! `n_b ~ Binomial(n_ws, eta_w)`:
//!
//! ```text
//! eta_w eta_r G_i = (t_ws / t_i) C_WS,i sqrt(Var I_WS Var I_i) / (Var I_WS - Var f_WS)
//! ```
//!
//! Spontaneous noise and the conjugate mode's light on pixel `i` are
//! independent of `n_ws` and drop out of the covariance.

use rand::Rng;
use rayon::prelude::*;

use super::correlation::coefficient;
use super::peaks::Peaks;
use crate::error::{Error, Result};
use crate::rng::{Purpose, StreamFactory};
use crate::sim::{DetectionModel, DetectorMode, FrameStack};

pub const BOOTSTRAP_RESAMPLES: usize = 200;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GainEstimate {
    pub g_eff_ra: f64,
    pub g_eff_rs: f64,
    pub stderr_ra: f64,
    pub stderr_rs: f64,
    pub c_ws_ra: f64,
    pub c_ws_rs: f64,
    /// Read-noise variance subtracted at the write-Stokes pixel.
    pub var_f_ws: f64,
}

/// Variance of the detector noise at the write-Stokes pixel.
///
/// Linear mode: `f = kappa I z`, so `Var f = kappa^2/(1+kappa^2) <I^2>` in terms
/// of the measured intensity. Counting mode: binomial detection noise,
/// `Var f = <I> (1 - t_ws qe)`.
pub fn read_noise_variance(ws: &[f32], detection: &DetectionModel) -> f64 {
    if ws.is_empty() {
        return 0.0;
    }
    let n = ws.len() as f64;
    match detection.mode {
        DetectorMode::Linear => {
            let k2 = detection.read_noise_kappa * detection.read_noise_kappa;
            let mean_sq = ws.iter().map(|&v| v as f64 * v as f64).sum::<f64>() / n;
            k2 / (1.0 + k2) * mean_sq
        }
        DetectorMode::Counting => {
            let mean = ws.iter().map(|&v| v as f64).sum::<f64>() / n;
            mean * (1.0 - detection.t_ws * detection.qe)
        }
    }
}

#[derive(Debug, Clone, Copy)]
struct Moments {
    var_ws: f64,
    var_ra: f64,
    var_rs: f64,
    cov_ra: f64,
    cov_rs: f64,
}

fn moments(idx: impl Iterator<Item = usize> + Clone, ws: &[f32], ra: &[f32], rs: &[f32]) -> Moments {
    let n = idx.clone().count() as f64;
    let (mut a, mut b, mut c) = (0.0, 0.0, 0.0);
    for i in idx.clone() {
        a += ws[i] as f64;
        b += ra[i] as f64;
        c += rs[i] as f64;
    }
    let (ma, mb, mc) = (a / n, b / n, c / n);
    let mut m = Moments { var_ws: 0.0, var_ra: 0.0, var_rs: 0.0, cov_ra: 0.0, cov_rs: 0.0 };
    for i in idx {
        let (x, y, z) = (ws[i] as f64 - ma, ra[i] as f64 - mb, rs[i] as f64 - mc);
        m.var_ws += x * x;
        m.var_ra += y * y;
        m.var_rs += z * z;
        m.cov_ra += x * y;
        m.cov_rs += x * z;
    }
    let d = n - 1.0;
    m.var_ws /= d;
    m.var_ra /= d;
    m.var_rs /= d;
    m.cov_ra /= d;
    m.cov_rs /= d;
    m
}

struct Point {
    g_ra: f64,
    g_rs: f64,
    c_ra: f64,
    c_rs: f64,
}

fn point(m: Moments, detection: &DetectionModel, var_f: f64) -> Option<Point> {
    let signal = m.var_ws - var_f;
    if !(signal > 0.0) {
        return None;
    }
    let c_ra = coefficient(m.cov_ra, m.var_ws, m.var_ra);
    let c_rs = coefficient(m.cov_rs, m.var_ws, m.var_rs);
    // an all-constant readout pixel carries no covariance with the write pixel
    let gain = |c: f64, var_i: f64, t_i: f64| {
        if c.is_nan() {
            0.0
        } else {
            detection.t_ws / t_i * c * (m.var_ws * var_i).sqrt() / signal
        }
    };
    Some(Point {
        g_ra: gain(c_ra, m.var_ra, detection.t_ra),
        g_rs: gain(c_rs, m.var_rs, detection.t_rs),
        c_ra,
        c_rs,
    })
}

fn std_dev(v: &[f64]) -> f64 {
    let n = v.len() as f64;
    let mean = v.iter().sum::<f64>() / n;
    (v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
}

/// Gain estimate from the intensity series of the write-Stokes and the two
/// peak pixels, with bootstrap standard errors over shots. `var_f_ws` is held
/// fixed across resamples.
pub fn estimate_gains(
    ws: &[f32],
    ra: &[f32],
    rs: &[f32],
    detection: &DetectionModel,
    var_f_ws: f64,
    resamples: usize,
    seed: u64,
) -> Result<GainEstimate> {
    detection.validate()?;
    let n = ws.len();
    if ra.len() != n || rs.len() != n {
        return Err(Error::domain("pixel series have different lengths"));
    }
    if n < 2 {
        return Err(Error::Degenerate(format!("gain estimation needs at least 2 shots, got {n}")));
    }
    if detection.t_ra == 0.0 || detection.t_rs == 0.0 {
        return Err(Error::domain("readout transmissions must be nonzero"));
    }
    let m = moments(0..n, ws, ra, rs);
    let p = point(m, detection, var_f_ws).ok_or_else(|| {
        Error::NonInformative(format!(
            "write-Stokes variance {:.6e} does not exceed the read-noise variance {:.6e}",
            m.var_ws, var_f_ws
        ))
    })?;
    let streams = StreamFactory::new(seed);
    let boot: Vec<(f64, f64)> = (0..resamples as u64)
        .into_par_iter()
        .filter_map(|r| {
            let mut rng = streams.stream(r, Purpose::Bootstrap);
            let idx: Vec<usize> = (0..n).map(|_| rng.random_range(0..n)).collect();
            let m = moments(idx.iter().copied(), ws, ra, rs);
            point(m, detection, var_f_ws).map(|p| (p.g_ra, p.g_rs))
        })
        .collect();
    let (stderr_ra, stderr_rs) = if resamples == 0 {
        (0.0, 0.0)
    } else if boot.len() * 2 < resamples {
        return Err(Error::NonInformative(format!(
            "only {} of {resamples} bootstrap resamples had an informative write signal",
            boot.len()
        )));
    } else {
        let a: Vec<f64> = boot.iter().map(|b| b.0).collect();
        let b: Vec<f64> = boot.iter().map(|b| b.1).collect();
        (std_dev(&a), std_dev(&b))
    };
    Ok(GainEstimate {
        g_eff_ra: p.g_ra,
        g_eff_rs: p.g_rs,
        stderr_ra,
        stderr_rs,
        c_ws_ra: p.c_ra,
        c_ws_rs: p.c_rs,
        var_f_ws,
    })
}

/// [`estimate_gains`] on the peak pixels of an in-memory stack.
pub fn effective_gains(
    stack: &FrameStack,
    peaks: &Peaks,
    detection: &DetectionModel,
    read_noise_var: f64,
) -> Result<GainEstimate> {
    let series = |p| -> Vec<f32> { stack.pixel_series(p).into_iter().map(|v| v as f32).collect() };
    let px = peaks.pixels;
    estimate_gains(
        &series(px.ws),
        &series(px.ra),
        &series(px.rs),
        detection,
        read_noise_var,
        BOOTSTRAP_RESAMPLES,
        stack.header.seed,
    )
}
