//! `FWMSTACK1` frame-stack files.
//!
//! ```text
//! FWMSTACK1\n
//! key=value\n        (one per line, fixed order, 17 significant digits)
//! ...
//! END\n
//! <shots * pixels_y * pixels_x samples, row-major, little-endian>
//! ```
//!
//! Samples are `f32` in linear mode and `u16` (saturating) in counting mode.

use std::collections::HashMap;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use super::stack::{FrameStack, GroundTruth, StackHeader};
use super::{DetectionModel, DetectorMode, EfficiencyModel};
use crate::error::{Error, Result};
use crate::geometry::{BeamGeometry, Pixel, SensorMap};
use crate::io::fmt_f64;
use crate::model::ReadoutComponents;

pub const MAGIC: &str = "FWMSTACK1";
const END: &str = "END";

fn header_lines(h: &StackHeader) -> Vec<(&'static str, String)> {
    let s = &h.sensor;
    let g = &h.geometry;
    let d = &h.detection;
    let t = &h.truth;
    let f = |v: f64| fmt_f64(v);
    vec![
        ("shots", h.shots.to_string()),
        ("pixels_x", s.pixels_x.to_string()),
        ("pixels_y", s.pixels_y.to_string()),
        ("mode", d.mode.as_str().to_string()),
        ("t_ws", f(d.t_ws)),
        ("t_ra", f(d.t_ra)),
        ("t_rs", f(d.t_rs)),
        ("qe", f(d.qe)),
        ("kappa", f(d.read_noise_kappa)),
        ("pitch_rad", f(s.pitch)),
        ("write_center_x", s.write_center.x.to_string()),
        ("write_center_y", s.write_center.y.to_string()),
        ("read_center_x", s.read_center.x.to_string()),
        ("read_center_y", s.read_center.y.to_string()),
        ("region_radius_rad", f(s.region_radius)),
        ("wavelength_m", f(g.wavelength)),
        ("theta_rad", f(g.theta)),
        ("tilt_x", f(g.tilt[0])),
        ("tilt_y", f(g.tilt[1])),
        ("spot_sigma_px", f(h.spot_sigma_px)),
        ("seed", h.seed.to_string()),
        ("mean_nb", f(t.mean_nb)),
        ("eta_w", f(t.efficiency.eta_w)),
        ("eta_r", f(t.efficiency.eta_r)),
        ("g_ra_bar", f(t.components.g_ra)),
        ("s_ra_bar", f(t.components.s_ra)),
        ("g_rs_bar", f(t.components.g_rs)),
        ("s_rs_bar", f(t.components.s_rs)),
    ]
}

/// Streams frames into a stack file.
pub struct StackWriter<W: Write> {
    out: W,
    header: StackHeader,
    written: u64,
}

impl StackWriter<BufWriter<File>> {
    pub fn create(path: impl AsRef<Path>, header: StackHeader) -> Result<Self> {
        StackWriter::new(BufWriter::new(File::create(path)?), header)
    }
}

impl<W: Write> StackWriter<W> {
    pub fn new(mut out: W, header: StackHeader) -> Result<Self> {
        writeln!(out, "{MAGIC}")?;
        for (k, v) in header_lines(&header) {
            writeln!(out, "{k}={v}")?;
        }
        writeln!(out, "{END}")?;
        Ok(StackWriter { out, header, written: 0 })
    }

    pub fn write_frame(&mut self, frame: &[f32]) -> Result<()> {
        if frame.len() != self.header.sensor.len() {
            return Err(Error::Format(format!(
                "frame has {} pixels, sensor has {}",
                frame.len(),
                self.header.sensor.len()
            )));
        }
        if self.written >= self.header.shots {
            return Err(Error::Format("more frames than declared shots".into()));
        }
        let mut buf = Vec::with_capacity(frame.len() * 4);
        match self.header.detection.mode {
            DetectorMode::Linear => frame.iter().for_each(|v| buf.extend_from_slice(&v.to_le_bytes())),
            DetectorMode::Counting => frame.iter().for_each(|&v| {
                let c = v.round().clamp(0.0, u16::MAX as f32) as u16;
                buf.extend_from_slice(&c.to_le_bytes())
            }),
        }
        self.out.write_all(&buf)?;
        self.written += 1;
        Ok(())
    }

    pub fn finish(mut self) -> Result<W> {
        if self.written != self.header.shots {
            return Err(Error::Format(format!(
                "wrote {} frames, header declares {}",
                self.written, self.header.shots
            )));
        }
        self.out.flush()?;
        Ok(self.out)
    }
}

/// Streams frames out of a stack file.
pub struct StackReader<R: BufRead> {
    input: R,
    header: StackHeader,
    read: u64,
    raw: Vec<u8>,
}

impl StackReader<BufReader<File>> {
    pub fn open(path: impl AsRef<Path>) -> Result<Self> {
        StackReader::new(BufReader::new(File::open(path)?))
    }
}

impl<R: BufRead> StackReader<R> {
    pub fn new(mut input: R) -> Result<Self> {
        let mut line = String::new();
        input.read_line(&mut line)?;
        if line.trim_end() != MAGIC {
            return Err(Error::Format(format!("missing {MAGIC} magic")));
        }
        let mut kv = HashMap::new();
        loop {
            line.clear();
            if input.read_line(&mut line)? == 0 {
                return Err(Error::Format("header not terminated".into()));
            }
            let l = line.trim_end();
            if l == END {
                break;
            }
            let (k, v) = l
                .split_once('=')
                .ok_or_else(|| Error::Format(format!("bad header line {l:?}")))?;
            kv.insert(k.to_string(), v.to_string());
        }
        let header = parse_header(&kv)?;
        let bytes = match header.detection.mode {
            DetectorMode::Linear => 4,
            DetectorMode::Counting => 2,
        };
        let raw = vec![0u8; header.sensor.len() * bytes];
        Ok(StackReader { input, header, read: 0, raw })
    }

    pub fn header(&self) -> &StackHeader {
        &self.header
    }

    /// Reads the next frame into `out`; returns `false` after the last one.
    pub fn next_frame(&mut self, out: &mut Vec<f32>) -> Result<bool> {
        if self.read == self.header.shots {
            return Ok(false);
        }
        self.input.read_exact(&mut self.raw).map_err(|e| match e.kind() {
            std::io::ErrorKind::UnexpectedEof => Error::Format("stack file truncated".into()),
            _ => Error::Io(e),
        })?;
        out.clear();
        match self.header.detection.mode {
            DetectorMode::Linear => out.extend(
                self.raw.chunks_exact(4).map(|c| f32::from_le_bytes([c[0], c[1], c[2], c[3]])),
            ),
            DetectorMode::Counting => out.extend(
                self.raw.chunks_exact(2).map(|c| u16::from_le_bytes([c[0], c[1]]) as f32),
            ),
        }
        self.read += 1;
        Ok(true)
    }
}

fn parse_header(kv: &HashMap<String, String>) -> Result<StackHeader> {
    fn get<'a>(kv: &'a HashMap<String, String>, k: &str) -> Result<&'a str> {
        kv.get(k).map(String::as_str).ok_or_else(|| Error::Format(format!("missing header key {k}")))
    }
    fn num<T: std::str::FromStr>(kv: &HashMap<String, String>, k: &str) -> Result<T> {
        get(kv, k)?.parse().map_err(|_| Error::Format(format!("bad value for header key {k}")))
    }
    let sensor = SensorMap {
        pixels_x: num(kv, "pixels_x")?,
        pixels_y: num(kv, "pixels_y")?,
        pitch: num(kv, "pitch_rad")?,
        write_center: Pixel::new(num(kv, "write_center_x")?, num(kv, "write_center_y")?),
        read_center: Pixel::new(num(kv, "read_center_x")?, num(kv, "read_center_y")?),
        region_radius: num(kv, "region_radius_rad")?,
    };
    sensor.validate().map_err(|e| Error::Format(e.to_string()))?;
    Ok(StackHeader {
        shots: num(kv, "shots")?,
        sensor,
        geometry: BeamGeometry {
            wavelength: num(kv, "wavelength_m")?,
            theta: num(kv, "theta_rad")?,
            tilt: [num(kv, "tilt_x")?, num(kv, "tilt_y")?],
        },
        detection: DetectionModel {
            t_ws: num(kv, "t_ws")?,
            t_ra: num(kv, "t_ra")?,
            t_rs: num(kv, "t_rs")?,
            qe: num(kv, "qe")?,
            read_noise_kappa: num(kv, "kappa")?,
            mode: DetectorMode::parse(get(kv, "mode")?)?,
        },
        truth: GroundTruth {
            components: ReadoutComponents {
                g_ra: num(kv, "g_ra_bar")?,
                s_ra: num(kv, "s_ra_bar")?,
                g_rs: num(kv, "g_rs_bar")?,
                s_rs: num(kv, "s_rs_bar")?,
            },
            efficiency: EfficiencyModel {
                eta_w: num(kv, "eta_w")?,
                eta_r: num(kv, "eta_r")?,
            },
            mean_nb: num(kv, "mean_nb")?,
        },
        spot_sigma_px: num(kv, "spot_sigma_px")?,
        seed: num(kv, "seed")?,
    })
}

pub fn write_stack(path: impl AsRef<Path>, stack: &FrameStack) -> Result<()> {
    let mut w = StackWriter::create(path, stack.header)?;
    for f in stack.iter_frames() {
        w.write_frame(f)?;
    }
    w.finish()?;
    Ok(())
}

pub fn read_stack(path: impl AsRef<Path>) -> Result<FrameStack> {
    let mut r = StackReader::open(path)?;
    let header = *r.header();
    let mut frames = Vec::with_capacity(header.shots as usize * header.sensor.len());
    let mut buf = Vec::new();
    while r.next_frame(&mut buf)? {
        frames.extend_from_slice(&buf);
    }
    Ok(FrameStack { header, frames })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sim::{simulate_stack, SimulationConfig};

    fn cfg(mode: DetectorMode) -> SimulationConfig {
        SimulationConfig {
            shots: 20,
            seed: 5,
            detection: DetectionModel { mode, read_noise_kappa: 0.05, ..Default::default() },
            ..Default::default()
        }
    }

    #[test]
    fn linear_stack_round_trips() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("s.fwm");
        let stack = simulate_stack(cfg(DetectorMode::Linear)).unwrap();
        write_stack(&path, &stack).unwrap();
        let back = read_stack(&path).unwrap();
        assert_eq!(back, stack);
        let bytes = std::fs::read(&path).unwrap();
        assert!(bytes.starts_with(b"FWMSTACK1\nshots=20\npixels_x=128\npixels_y=128\nmode=linear\n"));
    }

    #[test]
    fn counting_stack_round_trips() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("c.fwm");
        let stack = simulate_stack(cfg(DetectorMode::Counting)).unwrap();
        write_stack(&path, &stack).unwrap();
        let back = read_stack(&path).unwrap();
        assert_eq!(back, stack);
        let header_len = bytes_before_data(&std::fs::read(&path).unwrap());
        assert_eq!(std::fs::metadata(&path).unwrap().len() as usize - header_len, 20 * 128 * 128 * 2);
    }

    fn bytes_before_data(b: &[u8]) -> usize {
        let pat = b"\nEND\n";
        b.windows(pat.len()).position(|w| w == pat).unwrap() + pat.len()
    }

    #[test]
    fn truncated_file_is_a_format_error() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("t.fwm");
        let stack = simulate_stack(cfg(DetectorMode::Linear)).unwrap();
        write_stack(&path, &stack).unwrap();
        let bytes = std::fs::read(&path).unwrap();
        std::fs::write(&path, &bytes[..bytes.len() - 10]).unwrap();
        assert!(matches!(read_stack(&path), Err(Error::Format(_))));
        std::fs::write(&path, b"NOTASTACK\n").unwrap();
        assert!(matches!(read_stack(&path), Err(Error::Format(_))));
    }
}
