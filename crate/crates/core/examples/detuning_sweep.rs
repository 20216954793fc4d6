// Time-integrated gains and noise across the detuning range.

use fwm_readout::model::{detuning_sweep, write_sweep_csv, SweepRow};

pub fn run_example() -> fwm_readout::Result<Vec<SweepRow>> {
    let grid: Vec<f64> = (1..10).map(|k| k as f64 / 10.0).collect();
    let rows = detuning_sweep(0.07, 10.0, &grid)?;
    write_sweep_csv(&rows, std::io::stdout().lock())?;
    Ok(rows)
}

#[allow(dead_code)]
fn main() -> fwm_readout::Result<()> {
    run_example().map(|_| ())
}
