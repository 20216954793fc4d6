use rand::Rng;
use rand_distr::StandardNormal;

use super::shot::{thin, ShotRecord};
use super::{DetectionModel, DetectorMode};
use crate::error::{Error, Result};
use crate::geometry::{BeamGeometry, SensorMap, SpinWaveMode, Spots};

/// Precomputed pixel layout of a mode set on a sensor.
#[derive(Debug, Clone)]
pub struct FramePlan {
    sensor: SensorMap,
    spots: Vec<Spots>,
    /// `(dx, dy, weight)` of the normalised Gaussian spot; a single unit
    /// entry when spreading is disabled.
    kernel: Vec<(i64, i64, f64)>,
    spot_sigma_px: f64,
}

impl FramePlan {
    pub fn new(
        modes: &[SpinWaveMode],
        geometry: &BeamGeometry,
        sensor: &SensorMap,
        spot_sigma_px: f64,
    ) -> Result<Self> {
        sensor.validate()?;
        if !(spot_sigma_px >= 0.0 && spot_sigma_px.is_finite()) {
            return Err(Error::domain("spot sigma must be finite and >= 0"));
        }
        let spots = modes
            .iter()
            .map(|&m| {
                let s = sensor.spots(m, geometry)?;
                if !s.resolved() {
                    return Err(Error::domain(format!(
                        "mode k_b=({:.1}, {:.1}) 1/m is not resolvable on the sensor",
                        m.k_b[0], m.k_b[1]
                    )));
                }
                Ok(s)
            })
            .collect::<Result<Vec<_>>>()?;
        let kernel = if spot_sigma_px == 0.0 {
            vec![(0, 0, 1.0)]
        } else {
            let reach = (3.0 * spot_sigma_px).ceil() as i64;
            let mut k = Vec::new();
            for dy in -reach..=reach {
                for dx in -reach..=reach {
                    let r2 = (dx * dx + dy * dy) as f64;
                    k.push((dx, dy, (-r2 / (2.0 * spot_sigma_px * spot_sigma_px)).exp()));
                }
            }
            let total: f64 = k.iter().map(|e| e.2).sum();
            k.iter_mut().for_each(|e| e.2 /= total);
            k
        };
        Ok(FramePlan {
            sensor: *sensor,
            spots,
            kernel,
            spot_sigma_px,
        })
    }

    pub fn sensor(&self) -> &SensorMap {
        &self.sensor
    }

    pub fn spots(&self) -> &[Spots] {
        &self.spots
    }

    fn deposit(&self, frame: &mut [f64], center: crate::geometry::Pixel, amount: f64) {
        for &(dx, dy, w) in &self.kernel {
            let p = center.offset(dx, dy);
            if self.sensor.contains(p) {
                frame[self.sensor.index(p)] += w * amount;
            }
        }
    }

    fn deposit_photons<R: Rng + ?Sized>(
        &self,
        frame: &mut [f64],
        center: crate::geometry::Pixel,
        photons: u64,
        rng: &mut R,
    ) {
        if self.spot_sigma_px == 0.0 {
            frame[self.sensor.index(center)] += photons as f64;
            return;
        }
        for _ in 0..photons {
            let dx: f64 = rng.sample(StandardNormal);
            let dy: f64 = rng.sample(StandardNormal);
            let p = center.offset(
                (dx * self.spot_sigma_px).round() as i64,
                (dy * self.spot_sigma_px).round() as i64,
            );
            if self.sensor.contains(p) {
                frame[self.sensor.index(p)] += 1.0;
            }
        }
    }
}

/// Renders one shot into a row-major frame.
///
/// Each mode deposits its write-Stokes photons at its WS pixel and its readout
/// photons at its RA and RS pixels. A mode and its conjugate share readout
/// pixels with swapped roles, so including both in the mode set produces the
/// crosstalk terms automatically.
///
/// Linear mode adds read noise `N(0, (kappa I)^2)` clipped so intensities stay
/// nonnegative. Counting mode thins each deposit by its transmission, then
/// every pixel by the quantum efficiency.
pub fn render_frame<R: Rng + ?Sized>(
    shot: &ShotRecord,
    plan: &FramePlan,
    detection: &DetectionModel,
    rng: &mut R,
) -> Result<Vec<f32>> {
    detection.validate()?;
    if shot.modes() != plan.spots.len() {
        return Err(Error::domain(format!(
            "shot has {} modes but the plan has {}",
            shot.modes(),
            plan.spots.len()
        )));
    }
    let mut acc = vec![0.0f64; plan.sensor.len()];
    let w = &shot.write;
    let r = &shot.readout;
    match detection.mode {
        DetectorMode::Linear => {
            for (m, s) in plan.spots.iter().enumerate() {
                plan.deposit(&mut acc, s.ws, detection.t_ws * w.n_ws[m] as f64);
                plan.deposit(&mut acc, s.ra, detection.t_ra * r.n_ra[m]);
                plan.deposit(&mut acc, s.rs, detection.t_rs * r.n_rs[m]);
            }
            let kappa = detection.read_noise_kappa;
            if kappa > 0.0 {
                for v in acc.iter_mut().filter(|v| **v > 0.0) {
                    let z: f64 = rng.sample(StandardNormal);
                    *v += (kappa * *v * z).max(-*v);
                }
            }
        }
        DetectorMode::Counting => {
            for (m, s) in plan.spots.iter().enumerate() {
                let arrivals = [
                    (s.ws, thin(w.n_ws[m], detection.t_ws, rng)),
                    (s.ra, thin(r.n_ra[m] as u64, detection.t_ra, rng)),
                    (s.rs, thin(r.n_rs[m] as u64, detection.t_rs, rng)),
                ];
                for (p, n) in arrivals {
                    plan.deposit_photons(&mut acc, p, n, rng);
                }
            }
            for v in acc.iter_mut().filter(|v| **v > 0.0) {
                *v = thin(*v as u64, detection.qe, rng) as f64;
            }
        }
    }
    Ok(acc.into_iter().map(|v| v as f32).collect())
}
