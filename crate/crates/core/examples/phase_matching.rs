// Where a spin-wave mode and its conjugate land on the sensor.

use fwm_readout::geometry::{BeamGeometry, SensorMap, SpinWaveMode, Spots};

pub fn run_example() -> fwm_readout::Result<Vec<Spots>> {
    let geometry = BeamGeometry::default();
    let sensor = SensorMap::default();
    let mode = SpinWaveMode::from_per_cm(45.8, 0.0);
    let mut out = Vec::new();
    for (name, m) in [("k", mode), ("-k", mode.conjugate())] {
        let s = sensor.spots(m, &geometry)?;
        println!(
            "{name:>3}: ws ({}, {})  ra ({}, {})  rs ({}, {})",
            s.ws.x, s.ws.y, s.ra.x, s.ra.y, s.rs.x, s.rs.y
        );
        out.push(s);
    }
    Ok(out)
}

#[allow(dead_code)]
fn main() -> fwm_readout::Result<()> {
    run_example().map(|_| ())
}
