use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use itraj_cli::config::{ExperimentConfig, TOLERANCE_KEYS};
use itraj_cli::{presets, runner, verify, CliError};

#[derive(Parser)]
#[command(
    name = "itraj",
    version,
    about = "Interior transmission eigenvalue trajectories: runs experiments and verifies their structural properties"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Compute the trajectories of an experiment and write records.
    Run(Job),
    /// Check recorded trajectories against the structural properties,
    /// computing them first when absent.
    Verify(Job),
    /// List the built-in experiments.
    ListPresets,
}

#[derive(Args)]
struct Job {
    /// TOML experiment description (exclusive with --preset).
    #[arg(long, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Built-in experiment name (exclusive with --config).
    #[arg(long, value_name = "NAME")]
    preset: Option<String>,
    /// Output directory; wins over the config's own choice.
    #[arg(long, value_name = "DIR")]
    out: Option<PathBuf>,
    /// Worker threads; 0 picks the machine's parallelism.
    #[arg(long, default_value_t = 0)]
    threads: usize,
    /// Tolerance override, repeatable.
    #[arg(long = "tolerance", value_name = "KEY=VAL")]
    tolerances: Vec<String>,
}

impl Job {
    fn config(&self) -> Result<ExperimentConfig, CliError> {
        let mut config = match (&self.config, &self.preset) {
            (Some(path), None) => ExperimentConfig::from_path(path)?,
            (None, Some(name)) => presets::get(name).ok_or_else(|| {
                CliError::Config(format!(
                    "unknown preset {name}; available: {}",
                    presets::NAMES.join(", ")
                ))
            })?,
            _ => {
                return Err(CliError::config(
                    "pass exactly one of --config PATH or --preset NAME",
                ))
            }
        };
        for entry in &self.tolerances {
            let (key, value) = entry.split_once('=').ok_or_else(|| {
                CliError::Config(format!("tolerance override {entry} is not KEY=VAL"))
            })?;
            if !TOLERANCE_KEYS.iter().any(|(k, _)| *k == key) {
                return Err(CliError::Config(format!("unknown tolerance key {key}")));
            }
            let value: f64 = value
                .parse()
                .map_err(|_| CliError::Config(format!("tolerance {key} needs a number")))?;
            config.tolerances.insert(key.to_string(), value);
        }
        config.validate()?;
        Ok(config)
    }

    fn out_dir(&self, config: &ExperimentConfig) -> PathBuf {
        self.out
            .clone()
            .or_else(|| config.out_dir.as_ref().map(PathBuf::from))
            .unwrap_or_else(|| PathBuf::from("itraj-out"))
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}

fn dispatch(cli: Cli) -> Result<ExitCode, CliError> {
    match cli.command {
        Command::Run(job) => {
            let config = job.config()?;
            let dir = job.out_dir(&config);
            let summary = runner::run(&config, &dir, job.threads)?;
            for file in &summary.files {
                println!("wrote {}", file.display());
            }
            if let Some(sidecar) = &summary.sidecar {
                println!("wrote {}", sidecar.display());
            }
            for failure in &summary.failures {
                eprintln!("failed {failure}");
            }
            Ok(if summary.failures.is_empty() {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(2)
            })
        }
        Command::Verify(job) => {
            let config = job.config()?;
            let dir = job.out_dir(&config);
            let report = verify::verify(&config, &dir, job.threads)?;
            for p in &report.properties {
                println!(
                    "{} {} measured={:.3e} tolerance={:.3e} ({})",
                    if p.pass { "PASS" } else { "FAIL" },
                    p.name,
                    p.measured,
                    p.tolerance,
                    p.detail
                );
            }
            println!(
                "{} of {} properties passed; report at {}",
                report.properties.len() - report.failures,
                report.properties.len(),
                verify::report_path(&dir, &config).display()
            );
            Ok(ExitCode::SUCCESS)
        }
        Command::ListPresets => {
            for &name in presets::NAMES {
                println!("{name}  {}", presets::describe(name).unwrap_or(""));
            }
            Ok(ExitCode::SUCCESS)
        }
    }
}
