use rand::Rng;
use rand_distr::{Binomial, Distribution, Geometric};

use crate::error::{Error, Result};
use crate::model::ReadoutComponents;

/// Single-mode thermal (geometric) photon-number law with a given mean.
#[derive(Debug, Clone, Copy)]
pub struct Thermal {
    mean: f64,
    dist: Option<Geometric>,
}

impl Thermal {
    pub fn new(mean: f64) -> Result<Self> {
        if !(mean >= 0.0 && mean.is_finite()) {
            return Err(Error::domain(format!("thermal mean must be finite and >= 0, got {mean}")));
        }
        let dist = if mean == 0.0 {
            None
        } else {
            Some(Geometric::new(1.0 / (1.0 + mean)).map_err(|e| Error::domain(e.to_string()))?)
        };
        Ok(Thermal { mean, dist })
    }

    pub fn mean(&self) -> f64 {
        self.mean
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> u64 {
        match &self.dist {
            Some(d) => d.sample(rng),
            None => 0,
        }
    }
}

pub(crate) fn thin<R: Rng + ?Sized>(n: u64, p: f64, rng: &mut R) -> u64 {
    if n == 0 || p <= 0.0 {
        0
    } else if p >= 1.0 {
        n
    } else {
        Binomial::new(n, p).expect("probability in (0, 1)").sample(rng)
    }
}

/// Write-Stokes photons and stored spin-wave excitations, per mode.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct WriteIn {
    pub n_ws: Vec<u64>,
    pub n_b: Vec<u64>,
}

/// Thermal write-Stokes numbers, thinned by the write-in efficiency into
/// spin-wave excitations.
pub fn sample_write<R: Rng + ?Sized>(
    modes: usize,
    mean_nb: f64,
    eta_w: f64,
    rng: &mut R,
) -> Result<WriteIn> {
    if !(0.0..=1.0).contains(&eta_w) {
        return Err(Error::domain(format!("eta_w={eta_w} must lie in [0, 1]")));
    }
    let law = Thermal::new(mean_nb)?;
    let mut out = WriteIn {
        n_ws: Vec::with_capacity(modes),
        n_b: Vec::with_capacity(modes),
    };
    for _ in 0..modes {
        let n_ws = law.sample(rng);
        out.n_ws.push(n_ws);
        out.n_b.push(thin(n_ws, eta_w, rng));
    }
    Ok(out)
}

/// Readout photon numbers per mode plus the spontaneous parts drawn for them.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Readout {
    pub n_ra: Vec<f64>,
    pub n_rs: Vec<f64>,
    pub spont_ra: Vec<u64>,
    pub spont_rs: Vec<u64>,
}

/// `n_i = eta_r * G_i * n_b + S_i` with `S_i` thermal of mean `S_bar_i`,
/// drawn independently of `n_b`. With `integer_photons` the gain term is
/// rounded so that every photon number is integral.
pub fn sample_readout<R: Rng + ?Sized>(
    n_b: &[u64],
    components: &ReadoutComponents,
    eta_r: f64,
    integer_photons: bool,
    rng: &mut R,
) -> Result<Readout> {
    components.validate()?;
    if !(0.0..=1.0).contains(&eta_r) {
        return Err(Error::domain(format!("eta_r={eta_r} must lie in [0, 1]")));
    }
    let noise_ra = Thermal::new(components.s_ra)?;
    let noise_rs = Thermal::new(components.s_rs)?;
    let gain_ra = eta_r * components.g_ra;
    let gain_rs = eta_r * components.g_rs;
    let amplify = |g: f64, n: u64| {
        let v = g * n as f64;
        if integer_photons {
            v.round()
        } else {
            v
        }
    };
    let mut out = Readout {
        n_ra: Vec::with_capacity(n_b.len()),
        n_rs: Vec::with_capacity(n_b.len()),
        spont_ra: Vec::with_capacity(n_b.len()),
        spont_rs: Vec::with_capacity(n_b.len()),
    };
    for &nb in n_b {
        let s_ra = noise_ra.sample(rng);
        let s_rs = noise_rs.sample(rng);
        out.n_ra.push(amplify(gain_ra, nb) + s_ra as f64);
        out.n_rs.push(amplify(gain_rs, nb) + s_rs as f64);
        out.spont_ra.push(s_ra);
        out.spont_rs.push(s_rs);
    }
    Ok(out)
}

/// One experimental iteration: write-in and readout numbers for every mode.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ShotRecord {
    pub write: WriteIn,
    pub readout: Readout,
}

impl ShotRecord {
    pub fn modes(&self) -> usize {
        self.write.n_ws.len()
    }
}
