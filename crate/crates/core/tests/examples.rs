#[allow(dead_code)]
mod evolve_regimes {
    include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/evolve_regimes.rs"));
}

#[allow(dead_code)]
mod detuning_sweep {
    include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/detuning_sweep.rs"));
}

#[allow(dead_code)]
mod phase_matching {
    include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/phase_matching.rs"));
}

#[allow(dead_code)]
mod simulate_stack {
    include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/simulate_stack.rs"));
}

#[allow(dead_code)]
mod correlation_map {
    include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/correlation_map.rs"));
}

#[allow(dead_code)]
mod gain_recovery {
    include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/gain_recovery.rs"));
}

#[allow(dead_code)]
mod gated_trace_fit {
    include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/gated_trace_fit.rs"));
}

#[allow(dead_code)]
mod config_pipeline {
    include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/config_pipeline.rs"));
}

#[test]
fn evolve_regimes_runs() {
    let rates = evolve_regimes::run_example().unwrap();
    assert!(rates[0].1 < 0.0 && rates[1].1 == 0.0 && rates[2].1 > 0.0);
}

#[test]
fn detuning_sweep_runs() {
    let rows = detuning_sweep::run_example().unwrap();
    assert_eq!(rows.len(), 9);
    let mid = rows[4].integrated;
    assert!((mid.g_ra - mid.g_rs).abs() < 1e-15);
}

#[test]
fn phase_matching_runs() {
    let spots = phase_matching::run_example().unwrap();
    assert_eq!(spots[0].ra, spots[1].rs);
    assert_eq!(spots[0].rs, spots[1].ra);
}

#[test]
fn simulate_stack_runs() {
    assert_eq!(simulate_stack::run_example().unwrap(), 500);
}

#[test]
fn correlation_map_runs() {
    let peaks = correlation_map::run_example().unwrap();
    assert!(peaks.c_ws_ra > 0.5 && peaks.c_ws_rs > 0.5);
}

#[test]
fn gain_recovery_runs() {
    for (g, e) in gain_recovery::run_example().unwrap() {
        assert!((e.g_eff_ra - g).abs() < 4.0 * e.stderr_ra, "{g} {e:?}");
        assert!((e.g_eff_rs - g).abs() < 4.0 * e.stderr_rs, "{g} {e:?}");
    }
}

#[test]
fn gated_trace_fit_runs() {
    let fits = gated_trace_fit::run_example().unwrap();
    assert!(fits[0].1.rate < 0.0 && fits[2].1.rate > 0.0);
}

#[test]
fn config_pipeline_runs() {
    let files = config_pipeline::run_example().unwrap();
    let names: Vec<_> = files.iter().map(|p| p.file_name().unwrap().to_str().unwrap().to_owned()).collect();
    for want in ["evolve.csv", "sweep.csv", "stack.fwm", "correlation_map.csv", "analysis.txt", "fit.txt"] {
        assert!(names.iter().any(|n| n == want), "{want} missing from {names:?}");
    }
}
