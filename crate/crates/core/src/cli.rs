//! Command-line pipelines. Each command is a pure function of the config,
//! the seed and its input files; outputs go to the `--out` directory.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};

use crate::analysis::{fit_exponential, read_trace_csv, write_trace_csv, StackAnalyzer};
use crate::config::RunConfig;
use crate::error::{Error, Result};
use crate::io::fmt_f64;
use crate::model::{detuning_sweep, readout_rates, write_sweep_csv, SpinWavePopulation};
use crate::sim::{simulate_gated_counts, Simulation, StackWriter};

#[derive(Debug, Parser)]
#[command(name = "fwm", version, about = "Four-wave-mixing readout model, simulator and analysis")]
pub struct Cli {
    /// Run configuration (TOML); defaults are used when omitted.
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,
    /// Overrides `run.seed`.
    #[arg(long, global = true, value_name = "N")]
    pub seed: Option<u64>,
    /// Worker threads; does not change any output.
    #[arg(long, global = true, value_name = "N")]
    pub threads: Option<usize>,
    /// Output directory; overrides `run.out_dir`.
    #[arg(long, global = true, value_name = "DIR")]
    pub out: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Instantaneous gains and noise rates over the read pulse.
    Evolve,
    /// Time-integrated components over the configured detuning grid.
    Sweep,
    /// Generate a frame stack file.
    Simulate,
    /// Correlation map and effective gains of a stack file.
    Analyze {
        /// Stack to analyse; defaults to `<out>/<run.stack_file>`.
        #[arg(long, value_name = "PATH")]
        stack: Option<PathBuf>,
    },
    /// Exponential fit to a gated trace.
    Fit {
        /// `t,counts` CSV; a trace is generated from the model when omitted.
        #[arg(long, value_name = "PATH")]
        trace: Option<PathBuf>,
    },
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    Ok(BufWriter::new(File::create(path)?))
}

fn write_summary(path: &Path, entries: &[(&str, String)]) -> Result<()> {
    let mut w = create(path)?;
    for (k, v) in entries {
        writeln!(w, "{k}={v}")?;
    }
    w.flush()?;
    Ok(())
}

/// `evolve.csv`: rates at `evolve_steps + 1` times across `[0, horizon]`,
/// with totals for a stored population of `mean_nb * eta_w`.
pub fn cmd_evolve(config: &RunConfig, out: &Path) -> Result<PathBuf> {
    let c = config.couplings()?;
    let horizon = config.model.horizon;
    if !(horizon > 0.0 && horizon.is_finite()) {
        return Err(Error::domain(format!("horizon must be finite and > 0, got {horizon}")));
    }
    let steps = config.model.evolve_steps.max(1);
    let n = SpinWavePopulation::new(config.write.mean_nb * config.write.eta_w)?;
    let path = out.join("evolve.csv");
    let mut w = csv::Writer::from_writer(create(&path)?);
    w.write_record(["t", "g_ra", "s_ra", "g_rs", "s_rs", "total_ra", "total_rs"])?;
    for i in 0..=steps {
        let t = horizon * i as f64 / steps as f64;
        let r = readout_rates(c, t)?;
        w.write_record(
            [t, r.g_ra, r.s_ra, r.g_rs, r.s_rs, r.anti_stokes(n), r.stokes(n)].map(fmt_f64),
        )?;
    }
    w.flush()?;
    Ok(path)
}

/// `sweep.csv`: integrated components across `sweep.grid`.
pub fn cmd_sweep(config: &RunConfig, out: &Path) -> Result<PathBuf> {
    let rows = detuning_sweep(config.model.scale, config.model.horizon, &config.sweep.grid)?;
    let path = out.join("sweep.csv");
    write_sweep_csv(&rows, create(&path)?)?;
    Ok(path)
}

/// Streams simulated frames into `<out>/<run.stack_file>`.
pub fn cmd_simulate(config: &RunConfig, out: &Path) -> Result<PathBuf> {
    let sim = Simulation::new(config.simulation()?)?;
    let path = out.join(&config.run.stack_file);
    let mut writer = StackWriter::create(&path, sim.header())?;
    sim.run(|_, _, frame| writer.write_frame(frame))?;
    writer.finish()?;
    Ok(path)
}

/// `correlation_map.csv` and `analysis.txt` for the first configured mode.
pub fn cmd_analyze(config: &RunConfig, stack: &Path, out: &Path) -> Result<Vec<PathBuf>> {
    if !stack.is_file() {
        return Err(Error::Io(std::io::Error::new(
            std::io::ErrorKind::NotFound,
            format!("stack file {} not found; run `fwm simulate` first or pass --stack", stack.display()),
        )));
    }
    let report = StackAnalyzer::analyze_file(stack, config.reference_mode()?, config.analysis_options())?;
    let map_path = out.join("correlation_map.csv");
    report.map.write_csv(create(&map_path)?)?;
    let truth = crate::sim::StackReader::open(stack)?.header().truth;
    let p = report.peaks.pixels;
    let g = report.gains;
    let summary = out.join("analysis.txt");
    write_summary(
        &summary,
        &[
            ("shots", report.shots.to_string()),
            ("ws_pixel", format!("{},{}", p.ws.x, p.ws.y)),
            ("ra_pixel", format!("{},{}", p.ra.x, p.ra.y)),
            ("rs_pixel", format!("{},{}", p.rs.x, p.rs.y)),
            ("c_ws_ra", fmt_f64(report.peaks.c_ws_ra)),
            ("c_ws_rs", fmt_f64(report.peaks.c_ws_rs)),
            ("g_eff_ra", fmt_f64(g.g_eff_ra)),
            ("stderr_ra", fmt_f64(g.stderr_ra)),
            ("g_eff_rs", fmt_f64(g.g_eff_rs)),
            ("stderr_rs", fmt_f64(g.stderr_rs)),
            ("var_f_ws", fmt_f64(g.var_f_ws)),
            ("truth_g_eff_ra", fmt_f64(truth.effective_gain_ra())),
            ("truth_g_eff_rs", fmt_f64(truth.effective_gain_rs())),
        ],
    )?;
    Ok(vec![map_path, summary])
}

/// `fit.txt`, plus `trace.csv` when the trace is generated from the model.
pub fn cmd_fit(config: &RunConfig, trace: Option<&Path>, out: &Path) -> Result<Vec<PathBuf>> {
    let mut written = Vec::new();
    let trace = match trace {
        Some(p) => read_trace_csv(File::open(p).map_err(|e| {
            Error::Io(std::io::Error::new(e.kind(), format!("cannot open trace {}: {e}", p.display())))
        })?)?,
        None => {
            let t = simulate_gated_counts(&config.gated_model()?, &config.gates)?;
            let path = out.join("trace.csv");
            write_trace_csv(&t, create(&path)?)?;
            written.push(path);
            t
        }
    };
    let fit = fit_exponential(&trace, config.fit.window())?;
    let path = out.join("fit.txt");
    write_summary(
        &path,
        &[
            ("rate", fmt_f64(fit.rate)),
            ("amplitude", fmt_f64(fit.amplitude)),
            ("window_start", fmt_f64(fit.window.0)),
            ("window_end", fmt_f64(fit.window.1)),
            ("rms_residual", fmt_f64(fit.rms_residual)),
        ],
    )?;
    written.push(path);
    Ok(written)
}

fn dispatch(cli: &Cli, config: &RunConfig, out: &Path) -> Result<Vec<PathBuf>> {
    match &cli.command {
        Command::Evolve => cmd_evolve(config, out).map(|p| vec![p]),
        Command::Sweep => cmd_sweep(config, out).map(|p| vec![p]),
        Command::Simulate => cmd_simulate(config, out).map(|p| vec![p]),
        Command::Analyze { stack } => {
            let stack = stack.clone().unwrap_or_else(|| out.join(&config.run.stack_file));
            cmd_analyze(config, &stack, out)
        }
        Command::Fit { trace } => {
            let trace = trace.as_deref().or(config.fit.trace.as_deref());
            cmd_fit(config, trace, out)
        }
    }
}

/// Loads the config, applies the flag overrides and runs the command.
/// Returns the files written.
pub fn run(cli: &Cli) -> Result<Vec<PathBuf>> {
    let mut config = match &cli.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    if let Some(seed) = cli.seed {
        config.run.seed = seed;
    }
    let out = cli.out.clone().unwrap_or_else(|| config.run.out_dir.clone());
    fs::create_dir_all(&out)?;
    match cli.threads {
        None => dispatch(cli, &config, &out),
        Some(0) => Err(Error::config("--threads must be at least 1")),
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| Error::config(e.to_string()))?
            .install(|| dispatch(cli, &config, &out)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cli(args: &[&str]) -> Cli {
        Cli::try_parse_from(std::iter::once("fwm").chain(args.iter().copied())).unwrap()
    }

    #[test]
    fn flags_parse_anywhere() {
        let c = cli(&["--seed", "3", "analyze", "--stack", "s.fwm", "--threads", "2"]);
        assert_eq!(c.seed, Some(3));
        assert_eq!(c.threads, Some(2));
        assert!(matches!(c.command, Command::Analyze { stack: Some(_) }));
    }

    #[test]
    fn evolve_at_degeneracy_is_flat() {
        let dir = tempfile::tempdir().unwrap();
        let mut config = RunConfig::default();
        config.model.delta_r = 0.5;
        let path = cmd_evolve(&config, dir.path()).unwrap();
        let mut r = csv::Reader::from_path(path).unwrap();
        let g: Vec<f64> = r.records().map(|rec| rec.unwrap()[1].parse().unwrap()).collect();
        assert_eq!(g.len(), 201);
        assert!(g.iter().all(|&v| v == g[0]));
    }

    #[test]
    fn zero_threads_is_a_config_error() {
        let dir = tempfile::tempdir().unwrap();
        let out = dir.path().to_str().unwrap();
        let r = run(&cli(&["--threads", "0", "--out", out, "sweep"]));
        assert!(matches!(r, Err(Error::Config(_))));
    }
}
