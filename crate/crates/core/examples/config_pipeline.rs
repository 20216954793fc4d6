// The config-driven pipeline behind the `fwm` binary, run from a TOML string.

use clap::Parser;
use fwm_readout::cli::{run, Cli};
use fwm_readout::config::RunConfig;

const CONFIG: &str = r#"
[write]
mean_nb = 5.0

[detection]
kappa = 0.1

[run]
shots = 400
seed = 9
"#;

pub fn run_example() -> fwm_readout::Result<Vec<std::path::PathBuf>> {
    let config = RunConfig::from_toml_str(CONFIG)?;
    let dir = std::env::temp_dir().join(format!("fwm-pipeline-{}", std::process::id()));
    std::fs::create_dir_all(&dir)?;
    let path = dir.join("run.toml");
    std::fs::write(&path, config.to_toml_string()?)?;

    let mut written = Vec::new();
    for command in ["evolve", "sweep", "simulate", "analyze", "fit"] {
        let cli = Cli::parse_from([
            "fwm",
            "--config",
            path.to_str().unwrap(),
            "--out",
            dir.to_str().unwrap(),
            command,
        ]);
        let files = run(&cli)?;
        for f in &files {
            println!("{command}: {}", f.display());
        }
        written.extend(files);
    }
    println!("{}", std::fs::read_to_string(dir.join("analysis.txt"))?);
    std::fs::remove_dir_all(&dir)?;
    Ok(written)
}

#[allow(dead_code)]
fn main() -> fwm_readout::Result<()> {
    run_example().map(|_| ())
}
