//! Command-line front end: configuration, experiment commands and the
//! verification driver.

pub mod commands;
pub mod config;
pub mod error;

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use crate::commands::fit::FitOptions;
use crate::config::{Config, Mode};
use crate::error::{exit, CliError};

#[derive(Debug, Parser)]
#[command(
    name = "cubli",
    version,
    about = "Simulate, tune and verify a reaction-wheel inverted pendulum"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct ConfigArgs {
    /// TOML config file
    #[arg(value_name = "CONFIG")]
    pub path: Option<PathBuf>,
    /// TOML config file (alternative to the positional argument)
    #[arg(long = "config", value_name = "PATH", conflicts_with = "path")]
    pub config: Option<PathBuf>,
    /// Override a config value, e.g. `--set physics.l=0.2`
    #[arg(long = "set", value_name = "KEY=VALUE")]
    pub set: Vec<String>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Print derived physical quantities
    Params {
        #[command(flatten)]
        config: ConfigArgs,
        /// Emit JSON instead of a table
        #[arg(long)]
        json: bool,
    },
    /// Run the closed-loop scenario, write a CSV trajectory and print a summary
    Simulate {
        #[command(flatten)]
        config: ConfigArgs,
        /// Controller mode (overrides controller.mode)
        #[arg(long, value_enum)]
        mode: Option<Mode>,
        /// Attitude sensor bias in degrees (overrides scenario.sensor_bias_deg)
        #[arg(long, allow_negative_numbers = true)]
        sensor_bias_deg: Option<f64>,
        /// Simulated duration in seconds (overrides scenario.t_end)
        #[arg(long)]
        t_end: Option<f64>,
        /// CSV destination, `-` for stdout (overrides output.csv)
        #[arg(long, short)]
        output: Option<String>,
    },
    /// Print controller gains, designed poles and closed-loop eigenvalues
    Gains {
        #[command(flatten)]
        config: ConfigArgs,
        /// Emit JSON instead of a table
        #[arg(long)]
        json: bool,
    },
    /// Run the property checks
    Verify {
        #[command(flatten)]
        config: ConfigArgs,
    },
    /// Fit the wheel friction model to steady-state data
    FitFriction {
        #[command(flatten)]
        config: ConfigArgs,
        /// CSV of `tau,omega_ss` rows
        #[arg(long)]
        input: Option<String>,
        /// Generate the data with a simulated spin-up sweep
        #[arg(long)]
        synthetic: bool,
        /// Relative standard deviation of torque noise
        #[arg(long, default_value_t = 0.0)]
        noise: f64,
        /// Noise seed
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

fn load(args: &ConfigArgs, extra: Vec<String>) -> Result<Config, CliError> {
    let path = args.path.as_deref().or(args.config.as_deref());
    let mut overrides = args.set.clone();
    overrides.extend(extra);
    Config::load(path, &overrides)
}

fn toml_string(s: &str) -> String {
    toml::Value::String(s.to_string()).to_string()
}

/// Runs one parsed command, writing its report to `out`.
pub fn execute(cli: Cli, out: &mut dyn Write, err: &mut dyn Write) -> Result<(), CliError> {
    match cli.command {
        Command::Params { config, json } => {
            commands::params::run(&load(&config, vec![])?, json, out)
        }
        Command::Gains { config, json } => commands::gains::run(&load(&config, vec![])?, json, out),
        Command::Verify { config } => commands::verify::run(&load(&config, vec![])?, out),
        Command::Simulate {
            config,
            mode,
            sensor_bias_deg,
            t_end,
            output,
        } => {
            let mut extra = Vec::new();
            if let Some(m) = mode {
                let name = clap::ValueEnum::to_possible_value(&m).expect("no skipped variants");
                extra.push(format!("controller.mode={}", toml_string(name.get_name())));
            }
            if let Some(b) = sensor_bias_deg {
                extra.push(format!("scenario.sensor_bias_deg={b:?}"));
            }
            if let Some(t) = t_end {
                extra.push(format!("scenario.t_end={t:?}"));
            }
            if let Some(o) = output {
                extra.push(format!("output.csv={}", toml_string(&o)));
            }
            let cfg = load(&config, extra)?;
            // keep stdout clean when it carries the CSV
            let report: &mut dyn Write = if cfg.output.csv == "-" { err } else { out };
            commands::simulate::run(&cfg, report).map(|_| ())
        }
        Command::FitFriction {
            config,
            input,
            synthetic,
            noise,
            seed,
        } => {
            let opts = FitOptions {
                input,
                synthetic,
                noise,
                seed,
            };
            commands::fit::run(&load(&config, vec![])?, &opts, out).map(|_| ())
        }
    }
}

/// Parses `args`, runs the command and returns the process exit code.
pub fn main_with<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                exit::VALIDATION
            } else {
                exit::OK
            };
        }
    };
    let stdout = std::io::stdout();
    let stderr = std::io::stderr();
    let mut out = stdout.lock();
    let mut err = stderr.lock();
    match execute(cli, &mut out, &mut err) {
        Ok(()) => exit::OK,
        Err(e) => {
            let _ = out.flush();
            let _ = writeln!(err, "error: {e}");
            e.exit_code()
        }
    }
}
