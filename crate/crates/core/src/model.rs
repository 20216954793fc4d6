//! Closed-form single-mode four-wave-mixing readout.
//!
//! A spin wave `b` is read out by a drive that couples it simultaneously to an
//! anti-Stokes field (beamsplitter-type coupling `chi`) and a Stokes field
//! (pair-creation coupling `xi`). With vacuum optical inputs the mean photon
//! flux in each field splits into a gain term proportional to the initial
//! spin-wave population and a spontaneous term that does not depend on it:
//!
//! ```text
//! anti-Stokes: g_ra(t) n_b + s_ra(t)
//! Stokes:      g_rs(t) n_b + s_rs(t)
//! ```
//!
//! with `eps = xi^2 - chi^2` setting exponential decay (`eps < 0`), growth
//! (`eps > 0`) or a flat gain (`eps = 0`). Time is dimensionless throughout.
//!
//! Every expression that divides by `eps` is written through
//! `phi(z) = (e^z - 1)/z` and `psi(z) = (e^z - 1 - z)/z^2`, which switch to a
//! second-order series below [`DEGENERACY_THRESHOLD`].

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// `|eps|·t` below which the series branch is used.
pub const DEGENERACY_THRESHOLD: f64 = 1e-6;

/// Ground-state hyperfine splitting of rubidium-87, GHz.
pub const RB87_HYPERFINE_GHZ: f64 = 6.834;

/// Anti-Stokes (`chi`) and Stokes (`xi`) coupling coefficients.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CouplingPair {
    pub chi: f64,
    pub xi: f64,
}

impl CouplingPair {
    pub fn new(chi: f64, xi: f64) -> Result<Self> {
        let pair = CouplingPair { chi, xi };
        pair.validate()?;
        Ok(pair)
    }

    /// Builds the pair from squared couplings.
    pub fn from_squares(chi_sq: f64, xi_sq: f64) -> Result<Self> {
        if !(chi_sq >= 0.0 && xi_sq >= 0.0) {
            return Err(Error::domain("squared couplings must be nonnegative"));
        }
        CouplingPair::new(chi_sq.sqrt(), xi_sq.sqrt())
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.chi.is_finite() && self.xi.is_finite()) {
            return Err(Error::domain("couplings must be finite"));
        }
        if self.chi < 0.0 || self.xi < 0.0 {
            return Err(Error::domain(format!(
                "couplings must be nonnegative (chi={}, xi={})",
                self.chi, self.xi
            )));
        }
        if self.chi == 0.0 && self.xi == 0.0 {
            return Err(Error::domain("chi and xi cannot both be zero"));
        }
        Ok(())
    }

    pub fn chi_sq(&self) -> f64 {
        self.chi * self.chi
    }

    pub fn xi_sq(&self) -> f64 {
        self.xi * self.xi
    }

    /// `xi^2 - chi^2`: the net exponential rate of the spin-wave population.
    pub fn net_rate(&self) -> f64 {
        self.xi_sq() - self.chi_sq()
    }
}

/// Read-laser detuning in units of the ground-state splitting, plus the overall
/// coupling scale.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DetuningSpec {
    pub delta_r: f64,
    pub scale: f64,
}

/// Parameters entering `Gamma d Omega_p^2 / Delta^2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhysicalCoupling {
    pub gamma: f64,
    pub depth: f64,
    pub rabi: f64,
    pub detuning: f64,
}

/// Maps a laboratory detuning in GHz onto the dimensionless `delta_r`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhysicalDetuning {
    pub offset_ghz: f64,
    pub hyperfine_ghz: f64,
}

impl Default for PhysicalDetuning {
    fn default() -> Self {
        PhysicalDetuning {
            offset_ghz: 0.0,
            hyperfine_ghz: RB87_HYPERFINE_GHZ,
        }
    }
}

impl PhysicalDetuning {
    pub fn to_delta_r(&self, detuning_ghz: f64) -> Result<f64> {
        if !(self.hyperfine_ghz > 0.0) {
            return Err(Error::domain("hyperfine splitting must be positive"));
        }
        let delta_r = (detuning_ghz - self.offset_ghz) / self.hyperfine_ghz;
        if !(delta_r > 0.0 && delta_r < 1.0) {
            return Err(Error::domain(format!(
                "detuning {detuning_ghz} GHz maps to delta_r={delta_r}, outside (0, 1)"
            )));
        }
        Ok(delta_r)
    }
}

/// Mean initial spin-wave excitation number.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpinWavePopulation {
    pub n_b: f64,
}

impl SpinWavePopulation {
    pub fn new(n_b: f64) -> Result<Self> {
        if !(n_b >= 0.0 && n_b.is_finite()) {
            return Err(Error::domain(format!("n_b must be finite and >= 0, got {n_b}")));
        }
        Ok(SpinWavePopulation { n_b })
    }
}

/// Gain and spontaneous-noise terms of both readout fields.
///
/// Holds instantaneous rates when produced by [`readout_rates`] and
/// dimensionless time integrals when produced by [`integrated_components`].
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct ReadoutComponents {
    pub g_ra: f64,
    pub s_ra: f64,
    pub g_rs: f64,
    pub s_rs: f64,
}

impl ReadoutComponents {
    /// Mean anti-Stokes photons (or photon rate) for the given population.
    pub fn anti_stokes(&self, n: SpinWavePopulation) -> f64 {
        self.g_ra * n.n_b + self.s_ra
    }

    /// Mean Stokes photons (or photon rate) for the given population.
    pub fn stokes(&self, n: SpinWavePopulation) -> f64 {
        self.g_rs * n.n_b + self.s_rs
    }

    pub fn validate(&self) -> Result<()> {
        let all = [self.g_ra, self.s_ra, self.g_rs, self.s_rs];
        if all.iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
            return Err(Error::domain(format!(
                "readout components must be finite and nonnegative: {self:?}"
            )));
        }
        Ok(())
    }
}

/// Which evaluation route to use for the `eps`-divided expressions.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Branch {
    /// Series below [`DEGENERACY_THRESHOLD`], closed form above.
    Auto,
    Generic,
    Series,
}

fn phi(z: f64, branch: Branch) -> f64 {
    let series = match branch {
        Branch::Auto => z.abs() < DEGENERACY_THRESHOLD,
        Branch::Generic => z == 0.0,
        Branch::Series => true,
    };
    if series {
        1.0 + z / 2.0 + z * z / 6.0
    } else {
        z.exp_m1() / z
    }
}

fn psi(z: f64, branch: Branch) -> f64 {
    let series = match branch {
        Branch::Auto => z.abs() < DEGENERACY_THRESHOLD,
        Branch::Generic => z == 0.0,
        Branch::Series => true,
    };
    if series {
        0.5 + z / 6.0 + z * z / 24.0
    } else {
        (z.exp_m1() - z) / (z * z)
    }
}

/// `chi = scale/delta_r`, `xi = scale/(1 - delta_r)`.
pub fn couplings_from_detuning(spec: DetuningSpec) -> Result<CouplingPair> {
    let DetuningSpec { delta_r, scale } = spec;
    if !(delta_r > 0.0 && delta_r < 1.0) {
        return Err(Error::domain(format!(
            "delta_r={delta_r} must lie strictly between the two resonances, in (0, 1)"
        )));
    }
    if !(scale > 0.0 && scale.is_finite()) {
        return Err(Error::domain(format!("coupling scale must be positive, got {scale}")));
    }
    CouplingPair::new(scale / delta_r, scale / (1.0 - delta_r))
}

/// `sqrt(Gamma d Omega_p^2 / Delta^2)`.
pub fn coupling_from_physical(p: PhysicalCoupling) -> Result<f64> {
    if !(p.gamma > 0.0) {
        return Err(Error::domain("linewidth must be positive"));
    }
    if !(p.depth > 0.0) {
        return Err(Error::domain("optical depth must be positive"));
    }
    if !(p.rabi >= 0.0) {
        return Err(Error::domain("pump Rabi frequency must be nonnegative"));
    }
    if p.detuning == 0.0 || !p.detuning.is_finite() {
        return Err(Error::domain("pump detuning must be finite and nonzero"));
    }
    Ok((p.gamma * p.depth).sqrt() * p.rabi / p.detuning.abs())
}

/// Instantaneous gain and noise rates at time `t`.
pub fn readout_rates(c: CouplingPair, t: f64) -> Result<ReadoutComponents> {
    readout_rates_with(c, t, Branch::Auto)
}

/// [`readout_rates`] with an explicit choice of evaluation branch.
pub fn readout_rates_with(c: CouplingPair, t: f64, branch: Branch) -> Result<ReadoutComponents> {
    c.validate()?;
    if !(t >= 0.0 && t.is_finite()) {
        return Err(Error::domain(format!("time must be finite and >= 0, got {t}")));
    }
    let (x, y) = (c.chi_sq(), c.xi_sq());
    let z = c.net_rate() * t;
    let growth = z.exp();
    let pump = t * phi(z, branch);
    let out = ReadoutComponents {
        g_ra: x * growth,
        s_ra: x * y * pump,
        g_rs: y * growth,
        s_rs: y * (1.0 + y * pump),
    };
    finite(out)
}

/// Time integrals of the four components over `[0, horizon]`.
pub fn integrated_components(c: CouplingPair, horizon: f64) -> Result<ReadoutComponents> {
    integrated_components_with(c, horizon, Branch::Auto)
}

/// [`integrated_components`] with an explicit choice of evaluation branch.
pub fn integrated_components_with(
    c: CouplingPair,
    horizon: f64,
    branch: Branch,
) -> Result<ReadoutComponents> {
    c.validate()?;
    if !(horizon > 0.0 && horizon.is_finite()) {
        return Err(Error::domain(format!("horizon must be finite and > 0, got {horizon}")));
    }
    let (x, y) = (c.chi_sq(), c.xi_sq());
    let z = c.net_rate() * horizon;
    let linear = horizon * phi(z, branch);
    let quadratic = horizon * horizon * psi(z, branch);
    finite(ReadoutComponents {
        g_ra: x * linear,
        s_ra: x * y * quadratic,
        g_rs: y * linear,
        s_rs: y * horizon + y * y * quadratic,
    })
}

/// Time integrals of the four components over `[start, end]`.
pub fn components_over(c: CouplingPair, start: f64, end: f64) -> Result<ReadoutComponents> {
    c.validate()?;
    if !(start >= 0.0 && end > start && end.is_finite()) {
        return Err(Error::domain(format!("invalid interval [{start}, {end}]")));
    }
    let (x, y) = (c.chi_sq(), c.xi_sq());
    let eps = c.net_rate();
    let width = end - start;
    let linear = (eps * start).exp() * width * phi(eps * width, Branch::Auto);
    let quad = |t: f64| t * t * psi(eps * t, Branch::Auto);
    let quadratic = quad(end) - quad(start);
    finite(ReadoutComponents {
        g_ra: x * linear,
        s_ra: x * y * quadratic,
        g_rs: y * linear,
        s_rs: y * width + y * y * quadratic,
    })
}

/// `∫ e^{rate t} dt` over `[start, start + width]`, stable as `rate -> 0`.
pub fn exp_window_integral(rate: f64, start: f64, width: f64) -> f64 {
    (rate * start).exp() * width * phi(rate * width, Branch::Auto)
}

fn finite(c: ReadoutComponents) -> Result<ReadoutComponents> {
    if [c.g_ra, c.s_ra, c.g_rs, c.s_rs].iter().all(|v| v.is_finite()) {
        Ok(c)
    } else {
        Err(Error::domain(
            "readout components overflow; reduce the coupling scale or the horizon",
        ))
    }
}

/// Finite stand-in for an infinite interaction time: the gains have decayed
/// below `1e-12` of their initial value. Only defined when anti-Stokes
/// coupling dominates.
pub fn long_horizon(c: CouplingPair) -> Result<f64> {
    c.validate()?;
    let eps = c.net_rate();
    if eps >= 0.0 {
        return Err(Error::domain(
            "no finite horizon saturates the gains when xi >= chi",
        ));
    }
    Ok(1e12_f64.ln() * 1.01 / -eps)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepRow {
    pub delta_r: f64,
    pub integrated: ReadoutComponents,
}

/// Integrated components across a grid of detunings.
pub fn detuning_sweep(scale: f64, horizon: f64, grid: &[f64]) -> Result<Vec<SweepRow>> {
    if grid.is_empty() {
        return Err(Error::domain("detuning grid is empty"));
    }
    grid.iter()
        .map(|&delta_r| {
            let c = couplings_from_detuning(DetuningSpec { delta_r, scale })?;
            Ok(SweepRow {
                delta_r,
                integrated: integrated_components(c, horizon)?,
            })
        })
        .collect()
}

/// Writes sweep rows as CSV with 17 significant digits.
pub fn write_sweep_csv<W: Write>(rows: &[SweepRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["delta_r", "g_ra_bar", "s_ra_bar", "g_rs_bar", "s_rs_bar"])?;
    for row in rows {
        let c = row.integrated;
        w.write_record(
            [row.delta_r, c.g_ra, c.s_ra, c.g_rs, c.s_rs]
                .iter()
                .map(|v| crate::io::fmt_f64(*v)),
        )?;
    }
    w.flush()?;
    Ok(())
}
