use std::io::Write;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::geometry::{CircularRegion, Pixel, SensorMap};
use crate::io::fmt_f64;
use crate::sim::FrameStack;

/// Write and read regions the analysis is restricted to.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RegionSpec {
    pub write_region: CircularRegion,
    pub read_region: CircularRegion,
}

impl RegionSpec {
    pub fn from_sensor(sensor: &SensorMap) -> Self {
        RegionSpec {
            write_region: sensor.write_region(),
            read_region: sensor.read_region(),
        }
    }

    pub fn validate(&self, sensor: &SensorMap) -> Result<()> {
        for r in [self.write_region, self.read_region] {
            let c = r.center;
            let ok = c.x as f64 - r.radius_px >= 0.0
                && c.y as f64 - r.radius_px >= 0.0
                && c.x as f64 + r.radius_px <= (sensor.pixels_x - 1) as f64
                && c.y as f64 + r.radius_px <= (sensor.pixels_y - 1) as f64;
            if !(r.radius_px > 0.0) || !ok {
                return Err(Error::domain(format!(
                    "region at ({}, {}) with radius {} px is not inside the sensor",
                    c.x, c.y, r.radius_px
                )));
            }
        }
        let (a, b) = (self.write_region, self.read_region);
        let d = ((a.center.x - b.center.x) as f64).hypot((a.center.y - b.center.y) as f64);
        if d <= a.radius_px + b.radius_px {
            return Err(Error::domain("write and read regions overlap"));
        }
        Ok(())
    }

    pub fn contains(&self, p: Pixel) -> bool {
        self.write_region.contains(p) || self.read_region.contains(p)
    }

    /// Pixels of both regions, write region first.
    pub fn pixels(&self) -> Vec<Pixel> {
        self.write_region.pixels().chain(self.read_region.pixels()).collect()
    }
}

/// Correlation of every region pixel with a reference pixel. Pixels outside
/// the regions or with zero variance hold `NaN`.
#[derive(Debug, Clone, PartialEq)]
pub struct CorrelationMap {
    pub ref_pixel: Pixel,
    pub pixels_x: usize,
    pub pixels_y: usize,
    pub values: Vec<f64>,
}

impl CorrelationMap {
    pub(crate) fn undefined(ref_pixel: Pixel, sensor: &SensorMap) -> Self {
        CorrelationMap {
            ref_pixel,
            pixels_x: sensor.pixels_x,
            pixels_y: sensor.pixels_y,
            values: vec![f64::NAN; sensor.len()],
        }
    }

    pub fn get(&self, p: Pixel) -> Option<f64> {
        if p.x < 0 || p.y < 0 || p.x as usize >= self.pixels_x || p.y as usize >= self.pixels_y {
            return None;
        }
        let v = self.values[p.y as usize * self.pixels_x + p.x as usize];
        (!v.is_nan()).then_some(v)
    }

    pub(crate) fn set(&mut self, p: Pixel, v: f64) {
        self.values[p.y as usize * self.pixels_x + p.x as usize] = v;
    }

    /// Defined pixels and their values in raster order.
    pub fn defined(&self) -> impl Iterator<Item = (Pixel, f64)> + '_ {
        self.values.iter().enumerate().filter(|(_, v)| !v.is_nan()).map(|(i, &v)| {
            (Pixel::new((i % self.pixels_x) as i64, (i / self.pixels_x) as i64), v)
        })
    }

    /// One CSV row per sensor row, `nan` for undefined pixels.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(out);
        for row in self.values.chunks_exact(self.pixels_x) {
            w.write_record(row.iter().map(|&v| fmt_f64(v)))?;
        }
        w.flush()?;
        Ok(())
    }
}

pub(crate) fn coefficient(cov: f64, var_a: f64, var_b: f64) -> f64 {
    if var_a > 0.0 && var_b > 0.0 {
        (cov / (var_a * var_b).sqrt()).clamp(-1.0, 1.0)
    } else {
        f64::NAN
    }
}

fn check_stack(stack: &FrameStack) -> Result<()> {
    if stack.shots() < 2 {
        return Err(Error::Degenerate(format!(
            "correlations need at least 2 shots, stack has {}",
            stack.shots()
        )));
    }
    Ok(())
}

fn centred(stack: &FrameStack, p: Pixel) -> (Vec<f64>, f64) {
    let s = stack.pixel_series(p);
    let mean = s.iter().sum::<f64>() / s.len() as f64;
    let c: Vec<f64> = s.into_iter().map(|v| v - mean).collect();
    let ss = c.iter().map(|v| v * v).sum();
    (c, ss)
}

/// Sample correlation coefficient of two pixels; `None` if either has zero
/// variance. Symmetric in its arguments.
pub fn pair_correlation(stack: &FrameStack, a: Pixel, b: Pixel) -> Result<Option<f64>> {
    check_stack(stack)?;
    let sensor = &stack.header.sensor;
    if !sensor.contains(a) || !sensor.contains(b) {
        return Err(Error::OutOfBounds("pixel is off the sensor".into()));
    }
    let (ca, sa) = centred(stack, a);
    let (cb, sb) = centred(stack, b);
    let cov: f64 = ca.iter().zip(&cb).map(|(x, y)| x * y).sum();
    let c = coefficient(cov, sa, sb);
    Ok((!c.is_nan()).then_some(c))
}

/// Correlation map of an in-memory stack, computed in parallel over target
/// pixels.
pub fn correlation_map(stack: &FrameStack, ref_pixel: Pixel, regions: &RegionSpec) -> Result<CorrelationMap> {
    check_stack(stack)?;
    let sensor = &stack.header.sensor;
    regions.validate(sensor)?;
    if !regions.contains(ref_pixel) {
        return Err(Error::OutOfBounds(format!(
            "reference pixel ({}, {}) is outside both regions",
            ref_pixel.x, ref_pixel.y
        )));
    }
    let (cref, sref) = centred(stack, ref_pixel);
    if sref == 0.0 {
        return Err(Error::Degenerate(format!(
            "reference pixel ({}, {}) has zero variance",
            ref_pixel.x, ref_pixel.y
        )));
    }
    let targets = regions.pixels();
    let values: Vec<f64> = targets
        .par_iter()
        .map(|&p| {
            let (c, s) = centred(stack, p);
            let cov: f64 = cref.iter().zip(&c).map(|(x, y)| x * y).sum();
            coefficient(cov, sref, s)
        })
        .collect();
    let mut map = CorrelationMap::undefined(ref_pixel, sensor);
    for (p, v) in targets.into_iter().zip(values) {
        map.set(p, v);
    }
    map.set(ref_pixel, 1.0);
    Ok(map)
}
