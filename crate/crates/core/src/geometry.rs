//! Phase matching and far-field pixel mapping.
//!
//! A spin wave with transverse wave vector `K_b` couples to write-Stokes light
//! at `k_W - K_b`, read anti-Stokes light at `k_R + K_b` and read Stokes light
//! at `k_R - K_b`. In the far field a transverse wave vector `q` appears at the
//! angle `q λ / 2π`, so each mode lights one pixel near the write axis and a
//! mirror-image pair of pixels around the read axis.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest off-axis angle (radians) accepted as paraxial.
pub const PARAXIAL_LIMIT: f64 = 0.1;

pub type Angle2 = [f64; 2];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Pixel {
    pub x: i64,
    pub y: i64,
}

impl Pixel {
    pub const fn new(x: i64, y: i64) -> Self {
        Pixel { x, y }
    }

    pub fn offset(self, dx: i64, dy: i64) -> Pixel {
        Pixel::new(self.x + dx, self.y + dy)
    }

    /// Largest coordinate difference.
    pub fn chebyshev(self, other: Pixel) -> i64 {
        (self.x - other.x).abs().max((self.y - other.y).abs())
    }
}

/// Write/read beam layout. Angles are measured in a transverse frame where
/// the read beam is the origin; the write beam sits at `theta * tilt`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BeamGeometry {
    /// Optical wavelength, metres.
    pub wavelength: f64,
    /// Angle between write and read beams, radians.
    pub theta: f64,
    /// Unit vector pointing from the read axis towards the write axis.
    pub tilt: Angle2,
}

impl Default for BeamGeometry {
    fn default() -> Self {
        BeamGeometry {
            wavelength: 795e-9,
            theta: 2e-3,
            tilt: [0.0, -1.0],
        }
    }
}

impl BeamGeometry {
    pub fn validate(&self) -> Result<()> {
        if !(self.wavelength > 0.0 && self.wavelength.is_finite()) {
            return Err(Error::domain("wavelength must be positive"));
        }
        if !(self.theta >= 0.0 && self.theta < PARAXIAL_LIMIT) {
            return Err(Error::domain(format!("beam tilt {} rad is not paraxial", self.theta)));
        }
        let norm = self.tilt[0].hypot(self.tilt[1]);
        if (norm - 1.0).abs() > 1e-9 {
            return Err(Error::domain("tilt direction must be a unit vector"));
        }
        Ok(())
    }

    pub fn wave_number(&self) -> f64 {
        2.0 * PI / self.wavelength
    }

    pub fn write_axis(&self) -> Angle2 {
        [self.theta * self.tilt[0], self.theta * self.tilt[1]]
    }

    pub fn read_axis(&self) -> Angle2 {
        [0.0, 0.0]
    }
}

/// Transverse spin-wave wave vector, 1/m.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpinWaveMode {
    pub k_b: [f64; 2],
}

impl SpinWaveMode {
    pub fn new(kx: f64, ky: f64) -> Self {
        SpinWaveMode { k_b: [kx, ky] }
    }

    pub fn from_per_cm(kx: f64, ky: f64) -> Self {
        SpinWaveMode::new(kx * 100.0, ky * 100.0)
    }

    pub fn conjugate(&self) -> Self {
        SpinWaveMode::new(-self.k_b[0], -self.k_b[1])
    }

    pub fn magnitude(&self) -> f64 {
        self.k_b[0].hypot(self.k_b[1])
    }
}

/// Far-field angles of the three fields coupled to one spin-wave mode.
/// `write_stokes` is relative to the write axis, the readout pair relative to
/// the read axis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScatteredAngles {
    pub write_stokes: Angle2,
    pub read_anti_stokes: Angle2,
    pub read_stokes: Angle2,
}

pub fn scattered_angles(mode: SpinWaveMode, geom: &BeamGeometry) -> Result<ScatteredAngles> {
    geom.validate()?;
    let scale = geom.wavelength / (2.0 * PI);
    let d = [mode.k_b[0] * scale, mode.k_b[1] * scale];
    if !(d[0].hypot(d[1]) < PARAXIAL_LIMIT) {
        return Err(Error::domain(format!(
            "|k_b|={} 1/m is outside the paraxial regime",
            mode.magnitude()
        )));
    }
    Ok(ScatteredAngles {
        write_stokes: [-d[0], -d[1]],
        read_anti_stokes: d,
        read_stokes: [-d[0], -d[1]],
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Axis {
    Write,
    Read,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CircularRegion {
    pub center: Pixel,
    pub radius_px: f64,
}

impl CircularRegion {
    pub fn contains(&self, p: Pixel) -> bool {
        let dx = (p.x - self.center.x) as f64;
        let dy = (p.y - self.center.y) as f64;
        dx * dx + dy * dy <= self.radius_px * self.radius_px
    }

    /// Pixels of the region in raster order.
    pub fn pixels(&self) -> impl Iterator<Item = Pixel> + '_ {
        let r = self.radius_px.floor() as i64;
        let c = self.center;
        (c.y - r..=c.y + r)
            .flat_map(move |y| (c.x - r..=c.x + r).map(move |x| Pixel::new(x, y)))
            .filter(move |p| self.contains(*p))
    }
}

/// Camera far-field mapping.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SensorMap {
    pub pixels_x: usize,
    pub pixels_y: usize,
    /// Angle subtended by one pixel, radians.
    pub pitch: f64,
    pub write_center: Pixel,
    pub read_center: Pixel,
    /// Angular radius of each scattering region, radians.
    pub region_radius: f64,
}

impl Default for SensorMap {
    fn default() -> Self {
        SensorMap::new(&BeamGeometry::default(), 128, 128, 3e-5, 7.5e-4)
            .expect("default sensor layout is valid")
    }
}

impl SensorMap {
    /// Places the read and write centres symmetrically about the sensor middle,
    /// separated by `theta/pitch` pixels along the tilt direction.
    pub fn new(
        geom: &BeamGeometry,
        pixels_x: usize,
        pixels_y: usize,
        pitch: f64,
        region_radius: f64,
    ) -> Result<Self> {
        geom.validate()?;
        if !(pitch > 0.0 && pitch.is_finite()) {
            return Err(Error::domain("pixel pitch must be positive"));
        }
        let axis = geom.write_axis();
        let sep = Pixel::new(round_half_up(axis[0] / pitch), round_half_up(axis[1] / pitch));
        let mid = Pixel::new(pixels_x as i64 / 2, pixels_y as i64 / 2);
        let read_center = Pixel::new(mid.x - sep.x / 2, mid.y - sep.y / 2);
        let write_center = read_center.offset(sep.x, sep.y);
        let map = SensorMap {
            pixels_x,
            pixels_y,
            pitch,
            write_center,
            read_center,
            region_radius,
        };
        map.validate()?;
        Ok(map)
    }

    pub fn validate(&self) -> Result<()> {
        if self.pixels_x == 0 || self.pixels_y == 0 {
            return Err(Error::domain("sensor must have at least one pixel"));
        }
        if self.pixels_x > u16::MAX as usize || self.pixels_y > u16::MAX as usize {
            return Err(Error::domain("sensor dimensions too large"));
        }
        if !(self.pitch > 0.0 && self.pitch.is_finite()) {
            return Err(Error::domain("pixel pitch must be positive"));
        }
        if !(self.region_radius > 0.0) {
            return Err(Error::domain("region radius must be positive"));
        }
        let r = self.region_radius_px();
        for region in [self.write_region(), self.read_region()] {
            let c = region.center;
            let inside = c.x as f64 - r >= 0.0
                && c.y as f64 - r >= 0.0
                && c.x as f64 + r <= (self.pixels_x - 1) as f64
                && c.y as f64 + r <= (self.pixels_y - 1) as f64;
            if !inside {
                return Err(Error::domain(format!(
                    "scattering region around ({}, {}) with radius {r:.1} px leaves the sensor",
                    c.x, c.y
                )));
            }
        }
        let dx = (self.write_center.x - self.read_center.x) as f64;
        let dy = (self.write_center.y - self.read_center.y) as f64;
        if dx.hypot(dy) <= 2.0 * r {
            return Err(Error::domain("write and read regions overlap"));
        }
        Ok(())
    }

    pub fn region_radius_px(&self) -> f64 {
        self.region_radius / self.pitch
    }

    pub fn write_region(&self) -> CircularRegion {
        CircularRegion {
            center: self.write_center,
            radius_px: self.region_radius_px(),
        }
    }

    pub fn read_region(&self) -> CircularRegion {
        CircularRegion {
            center: self.read_center,
            radius_px: self.region_radius_px(),
        }
    }

    pub fn center(&self, axis: Axis) -> Pixel {
        match axis {
            Axis::Write => self.write_center,
            Axis::Read => self.read_center,
        }
    }

    pub fn contains(&self, p: Pixel) -> bool {
        p.x >= 0 && p.y >= 0 && (p.x as usize) < self.pixels_x && (p.y as usize) < self.pixels_y
    }

    /// Row-major index of an on-sensor pixel.
    pub fn index(&self, p: Pixel) -> usize {
        debug_assert!(self.contains(p));
        p.y as usize * self.pixels_x + p.x as usize
    }

    pub fn pixel_at(&self, index: usize) -> Pixel {
        Pixel::new((index % self.pixels_x) as i64, (index / self.pixels_x) as i64)
    }

    pub fn len(&self) -> usize {
        self.pixels_x * self.pixels_y
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Pixel hit by light at `angle` relative to the given beam axis.
    pub fn to_pixel(&self, angle: Angle2, axis: Axis) -> Result<Pixel> {
        let c = self.center(axis);
        let p = Pixel::new(
            c.x + round_half_up(angle[0] / self.pitch),
            c.y + round_half_up(angle[1] / self.pitch),
        );
        if !angle[0].is_finite() || !angle[1].is_finite() || !self.contains(p) {
            return Err(Error::OutOfBounds(format!(
                "angle ({:e}, {:e}) rad falls off the sensor",
                angle[0], angle[1]
            )));
        }
        Ok(p)
    }

    /// Angle relative to the given beam axis at the centre of `p`.
    pub fn from_pixel(&self, p: Pixel, axis: Axis) -> Angle2 {
        let c = self.center(axis);
        [(p.x - c.x) as f64 * self.pitch, (p.y - c.y) as f64 * self.pitch]
    }

    /// Reflection through the read centre: where the opposite-wave-vector
    /// mode sends light of the other readout field.
    pub fn conjugate_pixel(&self, p: Pixel) -> Result<Pixel> {
        if !self.read_region().contains(p) {
            return Err(Error::domain(format!(
                "pixel ({}, {}) is outside the readout region",
                p.x, p.y
            )));
        }
        let c = self.read_center;
        Ok(Pixel::new(2 * c.x - p.x, 2 * c.y - p.y))
    }

    /// Pixels of the write-Stokes, read anti-Stokes and read Stokes spots.
    pub fn spots(&self, mode: SpinWaveMode, geom: &BeamGeometry) -> Result<Spots> {
        let a = scattered_angles(mode, geom)?;
        Ok(Spots {
            ws: self.to_pixel(a.write_stokes, Axis::Write)?,
            ra: self.to_pixel(a.read_anti_stokes, Axis::Read)?,
            rs: self.to_pixel(a.read_stokes, Axis::Read)?,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Spots {
    pub ws: Pixel,
    pub ra: Pixel,
    pub rs: Pixel,
}

impl Spots {
    /// All three spots on distinct pixels.
    pub fn resolved(&self) -> bool {
        self.ws != self.ra && self.ws != self.rs && self.ra != self.rs
    }
}

fn round_half_up(v: f64) -> i64 {
    (v + 0.5).floor() as i64
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    #[test]
    fn zero_mode_sits_on_axes() {
        let g = BeamGeometry::default();
        let a = scattered_angles(SpinWaveMode::new(0.0, 0.0), &g).unwrap();
        assert_eq!(a.write_stokes, [0.0, 0.0]);
        assert_eq!(a.read_anti_stokes, [0.0, 0.0]);
        assert_eq!(a.read_stokes, [0.0, 0.0]);
    }

    #[test]
    fn reference_mode_angle() {
        let g = BeamGeometry::default();
        let a = scattered_angles(SpinWaveMode::from_per_cm(45.8, 0.0), &g).unwrap();
        assert_relative_eq!(a.read_anti_stokes[0], 4580.0 * 795e-9 / (2.0 * PI), max_relative = 1e-14);
        assert_relative_eq!(a.read_anti_stokes[0], 0.5795e-3, epsilon = 1e-7);
        assert_eq!(a.read_stokes[0], -a.read_anti_stokes[0]);
    }

    #[test]
    fn conjugate_modes_swap_readout_angles() {
        let g = BeamGeometry::default();
        let m = SpinWaveMode::from_per_cm(30.0, -12.5);
        let a = scattered_angles(m, &g).unwrap();
        let b = scattered_angles(m.conjugate(), &g).unwrap();
        assert_eq!(a.read_anti_stokes, b.read_stokes);
        assert_eq!(a.read_stokes, b.read_anti_stokes);
    }

    #[test]
    fn non_paraxial_mode_rejected() {
        let g = BeamGeometry::default();
        let k = 2.0 * PI / g.wavelength * 0.2;
        assert!(scattered_angles(SpinWaveMode::new(k, 0.0), &g).is_err());
    }

    #[test]
    fn pixel_mapping_examples() {
        let s = SensorMap::default();
        assert_eq!(s.to_pixel([0.0, 0.0], Axis::Read).unwrap(), s.read_center);
        assert_eq!(s.to_pixel([s.pitch, 0.0], Axis::Read).unwrap(), s.read_center.offset(1, 0));
        assert!(matches!(s.to_pixel([1.0, 0.0], Axis::Read), Err(Error::OutOfBounds(_))));
        // half-up tie breaking
        assert_eq!(s.to_pixel([0.5 * s.pitch, -0.5 * s.pitch], Axis::Read).unwrap(), s.read_center.offset(1, 0));
    }

    #[test]
    fn default_layout_separation() {
        let g = BeamGeometry::default();
        let s = SensorMap::default();
        let sep = (s.read_center.y - s.write_center.y) as f64;
        assert!((sep - g.theta / s.pitch).abs() <= 0.5);
        assert_eq!(s.read_center.x, s.write_center.x);
    }

    #[test]
    fn conjugate_pixel_examples() {
        let s = SensorMap::default();
        let c = s.read_center;
        assert_eq!(s.conjugate_pixel(c).unwrap(), c);
        assert_eq!(s.conjugate_pixel(c.offset(3, 0)).unwrap(), c.offset(-3, 0));
        assert!(s.conjugate_pixel(s.write_center).is_err());
    }

    #[test]
    fn reference_spots_are_resolved() {
        let g = BeamGeometry::default();
        let s = SensorMap::default();
        let m = SpinWaveMode::from_per_cm(45.8, 0.0);
        let spots = s.spots(m, &g).unwrap();
        assert!(spots.resolved());
        assert_eq!(s.conjugate_pixel(spots.ra).unwrap(), spots.rs);
        assert_eq!(s.spots(m.conjugate(), &g).unwrap().rs, spots.ra);
    }

    #[test]
    fn overlapping_regions_rejected() {
        let g = BeamGeometry::default();
        assert!(SensorMap::new(&g, 128, 128, 3e-5, 1.2e-3).is_err());
        assert!(SensorMap::new(&g, 40, 40, 3e-5, 7.5e-4).is_err());
    }

    proptest! {
        #[test]
        fn pixel_round_trip_within_half_pitch(ax in -6e-4f64..6e-4, ay in -6e-4f64..6e-4) {
            let s = SensorMap::default();
            for axis in [Axis::Read, Axis::Write] {
                let p = s.to_pixel([ax, ay], axis).unwrap();
                let back = s.from_pixel(p, axis);
                prop_assert!((back[0] - ax).abs() <= 0.5 * s.pitch * (1.0 + 1e-12));
                prop_assert!((back[1] - ay).abs() <= 0.5 * s.pitch * (1.0 + 1e-12));
            }
        }

        #[test]
        fn conjugate_is_involution(dx in -25i64..=25, dy in -25i64..=25) {
            let s = SensorMap::default();
            let p = s.read_center.offset(dx, dy);
            prop_assume!(s.read_region().contains(p));
            let q = s.conjugate_pixel(p).unwrap();
            prop_assert_eq!(s.conjugate_pixel(q).unwrap(), p);
        }

        #[test]
        fn readout_angles_mirror(kx in -8000f64..8000.0, ky in -8000f64..8000.0) {
            let a = scattered_angles(SpinWaveMode::new(kx, ky), &BeamGeometry::default()).unwrap();
            prop_assert_eq!(a.read_anti_stokes[0] + a.read_stokes[0], 0.0);
            prop_assert_eq!(a.read_anti_stokes[1] + a.read_stokes[1], 0.0);
        }

        #[test]
        fn distinct_spots_when_offset_exceeds_pitch(k in 1.05f64..1.9, angle in 0f64..(2.0 * PI)) {
            let g = BeamGeometry::default();
            let s = SensorMap::default();
            let kmag = k * s.pitch * 2.0 * PI / g.wavelength;
            let m = SpinWaveMode::new(kmag * angle.cos(), kmag * angle.sin());
            prop_assert!(s.spots(m, &g).unwrap().resolved());
        }
    }
}
