use fwm_readout::analysis::{estimate_gains, AnalysisOptions, GainEstimate, StackAnalyzer};
use fwm_readout::geometry::SpinWaveMode;
use fwm_readout::model::{
    couplings_from_detuning, integrated_components, readout_rates, DetuningSpec, ReadoutComponents,
};
use fwm_readout::sim::{DetectionModel, EfficiencyModel, ModeSet, Simulation, SimulationConfig};

const MODE_K: f64 = 45.8;

fn config(g: f64, conjugates: bool, kappa: f64, shots: u64, seed: u64) -> SimulationConfig {
    let mode = SpinWaveMode::from_per_cm(MODE_K, 0.0);
    let set = if conjugates { ModeSet::new([mode]).with_conjugates() } else { ModeSet::new([mode]) };
    let efficiency = EfficiencyModel { eta_w: 0.5, eta_r: 0.8 };
    let bare = g / (efficiency.eta_w * efficiency.eta_r);
    SimulationConfig {
        modes: set.into_modes(),
        efficiency,
        components: ReadoutComponents { g_ra: bare, s_ra: 0.5, g_rs: bare, s_rs: 1.5 },
        detection: DetectionModel { read_noise_kappa: kappa, ..Default::default() },
        shots,
        seed,
        ..Default::default()
    }
}

fn estimate(c: SimulationConfig, seed: u64) -> GainEstimate {
    let mode = c.modes[0];
    let sim = Simulation::new(c).unwrap();
    let mut a = StackAnalyzer::new(&sim.header(), mode, AnalysisOptions { full_map: false, resamples: 60, seed }).unwrap();
    sim.run(|_, _, f| a.push(f)).unwrap();
    a.finish().unwrap().gains
}

fn mean_estimate(g: f64, conjugates: bool, seeds: std::ops::Range<u64>) -> (f64, f64) {
    let n = seeds.end - seeds.start;
    let (mut ra, mut rs) = (0.0, 0.0);
    for seed in seeds {
        let e = estimate(config(g, conjugates, 0.1, 5000, seed), seed);
        ra += e.g_eff_ra;
        rs += e.g_eff_rs;
    }
    (ra / n as f64, rs / n as f64)
}

#[test]
fn estimates_are_consistent_across_gains() {
    for g in [0.05, 0.5, 1.5] {
        let mut covered = 0;
        let mut sum = 0.0;
        for seed in 0..10 {
            let e = estimate(config(g, true, 0.1, 5000, 100 + seed), seed);
            sum += e.g_eff_ra + e.g_eff_rs;
            covered += ((e.g_eff_ra - g).abs() <= 2.0 * e.stderr_ra) as u32;
            covered += ((e.g_eff_rs - g).abs() <= 2.0 * e.stderr_rs) as u32;
        }
        let mean = sum / 20.0;
        assert!((mean / g - 1.0).abs() < 0.05, "g={g}: mean {mean}");
        // 20 intervals at nominal 95%: 15 or fewer has probability below 2e-3.
        assert!(covered >= 16, "g={g}: {covered}/20 covered");
    }
}

#[test]
fn crosstalk_leaves_the_expectation_unchanged() {
    let g = 0.9;
    let with = mean_estimate(g, true, 200..210);
    let without = mean_estimate(g, false, 200..210);
    for (a, b) in [(with.0, without.0), (with.1, without.1)] {
        assert!((a / g - 1.0).abs() < 0.03 && (b / g - 1.0).abs() < 0.03, "{with:?} {without:?}");
    }
}

#[test]
fn skipping_the_read_noise_correction_biases_downward() {
    let c = config(0.9, true, 0.3, 20_000, 7);
    let detection = c.detection;
    let sim = Simulation::new(c).unwrap();
    let spots = sim.plan().spots()[0];
    let idx = |p| sim.config().sensor.index(p);
    let (mut ws, mut ra, mut rs) = (Vec::new(), Vec::new(), Vec::new());
    sim.run(|_, _, f| {
        ws.push(f[idx(spots.ws)]);
        ra.push(f[idx(spots.ra)]);
        rs.push(f[idx(spots.rs)]);
        Ok(())
    })
    .unwrap();
    let var_f = fwm_readout::analysis::read_noise_variance(&ws, &detection);
    let corrected = estimate_gains(&ws, &ra, &rs, &detection, var_f, 40, 0).unwrap();
    let naive = estimate_gains(&ws, &ra, &rs, &detection, 0.0, 40, 0).unwrap();
    assert!(naive.g_eff_ra < corrected.g_eff_ra && naive.g_eff_rs < corrected.g_eff_rs);
    assert!((corrected.g_eff_ra - 0.9).abs() < 4.0 * corrected.stderr_ra, "{corrected:?}");
    assert!((naive.g_eff_ra - 0.9) < -4.0 * naive.stderr_ra, "{naive:?}");
}

#[test]
fn growth_rate_orders_the_regimes() {
    let total = |delta_r: f64, t: f64| {
        let c = couplings_from_detuning(DetuningSpec { delta_r, scale: 0.07 }).unwrap();
        let r = readout_rates(c, t).unwrap();
        r.g_ra + r.g_rs
    };
    // below degeneracy the read pulse depletes the spin wave, above it amplifies
    assert!(total(0.3, 10.0) < total(0.3, 0.0));
    assert!(total(0.6, 10.0) > total(0.6, 0.0));
    let growth = |d: f64| total(d, 10.0) / total(d, 0.0);
    assert!(growth(0.8) > growth(0.6));
}

#[test]
fn integrated_gains_cross_at_degeneracy() {
    let diff = |delta_r: f64| {
        let c = couplings_from_detuning(DetuningSpec { delta_r, scale: 0.07 }).unwrap();
        let g = integrated_components(c, 10.0).unwrap();
        g.g_ra - g.g_rs
    };
    assert!(diff(0.45) > 0.0);
    assert!(diff(0.5).abs() < 1e-15);
    assert!(diff(0.55) < 0.0);
}
