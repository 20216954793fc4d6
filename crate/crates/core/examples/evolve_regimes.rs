// Instantaneous readout rates in the three detuning regimes: anti-Stokes
// dominated, degenerate and Stokes dominated.

use fwm_readout::model::{couplings_from_detuning, readout_rates, DetuningSpec};

pub fn run_example() -> fwm_readout::Result<Vec<(f64, f64)>> {
    let mut out = Vec::new();
    for delta_r in [0.3, 0.5, 0.8] {
        let c = couplings_from_detuning(DetuningSpec { delta_r, scale: 0.07 })?;
        println!("delta_r = {delta_r}  net rate = {:+.4}", c.net_rate());
        println!("{:>6} {:>10} {:>10} {:>10} {:>10}", "t", "g_ra", "s_ra", "g_rs", "s_rs");
        for t in [0.0, 2.5, 5.0, 7.5, 10.0] {
            let r = readout_rates(c, t)?;
            println!("{t:>6.1} {:>10.5} {:>10.5} {:>10.5} {:>10.5}", r.g_ra, r.s_ra, r.g_rs, r.s_rs);
        }
        out.push((delta_r, c.net_rate()));
    }
    Ok(out)
}

#[allow(dead_code)]
fn main() -> fwm_readout::Result<()> {
    run_example().map(|_| ())
}
