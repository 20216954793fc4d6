use super::correlation::{CorrelationMap, RegionSpec};
use crate::error::{Error, Result};
use crate::geometry::Pixel;

/// Side of the square search window around each predicted readout spot.
pub const PEAK_WINDOW: i64 = 5;

/// Pixels whose intensities enter the gain estimators.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PeakPixels {
    pub ws: Pixel,
    pub ra: Pixel,
    pub rs: Pixel,
}

/// Correlation maxima near the predicted anti-Stokes and Stokes spots.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Peaks {
    pub pixels: PeakPixels,
    pub c_ws_ra: f64,
    pub c_ws_rs: f64,
}

/// Pixels of the search window around `center`, in raster order.
pub(crate) fn window(center: Pixel) -> impl Iterator<Item = Pixel> {
    let h = PEAK_WINDOW / 2;
    (-h..=h).flat_map(move |dy| (-h..=h).map(move |dx| center.offset(dx, dy)))
}

pub(crate) fn check_separation(ra: Pixel, rs: Pixel) -> Result<()> {
    if ra.chebyshev(rs) < PEAK_WINDOW {
        return Err(Error::Ambiguous(format!(
            "anti-Stokes spot ({}, {}) and Stokes spot ({}, {}) are too close to separate",
            ra.x, ra.y, rs.x, rs.y
        )));
    }
    Ok(())
}

fn window_max(map: &CorrelationMap, regions: &RegionSpec, center: Pixel) -> Result<(Pixel, f64)> {
    if !regions.read_region.contains(center) {
        return Err(Error::OutOfBounds(format!(
            "predicted spot ({}, {}) is outside the readout region",
            center.x, center.y
        )));
    }
    let mut best: Option<(Pixel, f64)> = None;
    for p in window(center).filter(|p| regions.read_region.contains(*p)) {
        if let Some(v) = map.get(p) {
            if best.is_none_or(|(_, b)| v > b) {
                best = Some((p, v));
            }
        }
    }
    best.ok_or_else(|| {
        Error::Degenerate(format!(
            "no defined correlation around ({}, {})",
            center.x, center.y
        ))
    })
}

/// Largest correlation inside a `PEAK_WINDOW`-wide square around each
/// predicted readout spot. The map's reference pixel is taken as the
/// write-Stokes pixel.
pub fn peak_correlations(
    map: &CorrelationMap,
    regions: &RegionSpec,
    predicted_ra: Pixel,
    predicted_rs: Pixel,
) -> Result<Peaks> {
    check_separation(predicted_ra, predicted_rs)?;
    if regions.read_region.pixels().all(|p| map.get(p).is_none()) {
        return Err(Error::Degenerate("correlation map is undefined over the readout region".into()));
    }
    let (ra, c_ws_ra) = window_max(map, regions, predicted_ra)?;
    let (rs, c_ws_rs) = window_max(map, regions, predicted_rs)?;
    Ok(Peaks {
        pixels: PeakPixels { ws: map.ref_pixel, ra, rs },
        c_ws_ra,
        c_ws_rs,
    })
}
