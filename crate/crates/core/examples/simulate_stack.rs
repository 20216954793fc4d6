// Streams a simulated frame stack to disk and reads it back.

use fwm_readout::sim::{Simulation, SimulationConfig, StackReader, StackWriter};

pub fn run_example() -> fwm_readout::Result<u64> {
    let sim = Simulation::new(SimulationConfig { shots: 500, seed: 3, ..Default::default() })?;
    let dir = std::env::temp_dir().join(format!("fwm-example-{}", std::process::id()));
    std::fs::create_dir_all(&dir)?;
    let path = dir.join("stack.fwm");

    let mut writer = StackWriter::create(&path, sim.header())?;
    sim.run(|_, _, frame| writer.write_frame(frame))?;
    writer.finish()?;

    let mut reader = StackReader::open(&path)?;
    let ws = reader.header().sensor.index(sim.plan().spots()[0].ws);
    let (mut frames, mut total) = (0u64, 0.0f64);
    let mut buf = Vec::new();
    while reader.next_frame(&mut buf)? {
        frames += 1;
        total += buf[ws] as f64;
    }
    println!("{} frames in {}", frames, path.display());
    println!("mean write-Stokes intensity {:.3}", total / frames as f64);
    std::fs::remove_dir_all(&dir)?;
    Ok(frames)
}

#[allow(dead_code)]
fn main() -> fwm_readout::Result<()> {
    run_example().map(|_| ())
}
