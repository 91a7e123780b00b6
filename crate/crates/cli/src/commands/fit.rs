//! Friction identification from steady-state `(tau, omega_ss)` pairs.

use std::io::Write;
use std::path::Path;

use cubli_core::plant::{friction_torque, FrictionParams};
use cubli_core::sim::{fit_friction, steady_state_sweep, FrictionFit, SteadyStatePoint};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::config::Config;
use crate::error::CliError;

/// Wheel speeds targeted by the synthetic sweep (rad/s).
pub const SWEEP_SPEEDS: [f64; 12] = [
    50.0, 100.0, 150.0, 200.0, 250.0, 300.0, 350.0, 400.0, 450.0, 500.0, 550.0, 600.0,
];

/// Speed at which the fitted curve is reported (rad/s).
pub const REPORT_SPEED: f64 = 300.0;

#[derive(Debug, Clone, Default)]
pub struct FitOptions {
    pub input: Option<String>,
    pub synthetic: bool,
    /// Relative standard deviation of multiplicative torque noise.
    pub noise: f64,
    pub seed: u64,
}

/// Parses `tau,omega_ss` rows. Blank lines and `#` comments are skipped,
/// and a non-numeric first row is taken as a header.
pub fn parse_csv(text: &str, source: &str) -> Result<Vec<SteadyStatePoint<f64>>, CliError> {
    let mut points = Vec::new();
    let mut seen_row = false;
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let err = |msg: String| CliError::Input {
            path: source.to_string(),
            line: idx + 1,
            msg,
        };
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        let first_row = !seen_row;
        seen_row = true;
        if fields.len() != 2 {
            return Err(err(format!(
                "expected 2 fields (tau, omega_ss), found {}",
                fields.len()
            )));
        }
        let parsed: Result<Vec<f64>, _> = fields.iter().map(|f| f.parse::<f64>()).collect();
        match parsed {
            Ok(v) if v.iter().all(|x| x.is_finite()) => points.push(SteadyStatePoint {
                tau: v[0],
                omega_ss: v[1],
            }),
            Ok(_) => return Err(err("values must be finite".into())),
            Err(_) if first_row => continue,
            Err(e) => return Err(err(format!("not a number: {e}"))),
        }
    }
    Ok(points)
}

/// Torque levels whose steady speeds are [`SWEEP_SPEEDS`] under `friction`.
pub fn sweep_levels(friction: &FrictionParams<f64>) -> Vec<f64> {
    SWEEP_SPEEDS
        .iter()
        .map(|w| friction_torque(*w, friction))
        .collect()
}

pub fn add_noise(
    points: &mut [SteadyStatePoint<f64>],
    noise: f64,
    seed: u64,
) -> Result<(), CliError> {
    if noise == 0.0 {
        return Ok(());
    }
    let dist = Normal::new(0.0, noise).map_err(|e| CliError::Parse(format!("noise: {e}")))?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for p in points {
        p.tau *= 1.0 + dist.sample(&mut rng);
    }
    Ok(())
}

pub fn run(
    config: &Config,
    opts: &FitOptions,
    out: &mut dyn Write,
) -> Result<FrictionFit<f64>, CliError> {
    if !(opts.noise >= 0.0 && opts.noise.is_finite()) {
        return Err(CliError::Parse(format!(
            "--noise must be nonnegative, got {}",
            opts.noise
        )));
    }
    let setup = config.setup()?;
    let (mut points, source) = match (&opts.input, opts.synthetic) {
        (Some(_), true) => {
            return Err(CliError::Parse(
                "use either --input or --synthetic, not both".into(),
            ))
        }
        (None, false) => {
            return Err(CliError::Parse(
                "provide --input <csv> or --synthetic".into(),
            ))
        }
        (Some(path), false) => {
            let text = std::fs::read_to_string(Path::new(path))
                .map_err(|e| CliError::Io(format!("cannot read {path}: {e}")))?;
            (parse_csv(&text, path)?, path.clone())
        }
        (None, true) => {
            let levels = sweep_levels(&setup.plant.friction);
            let pts = steady_state_sweep(&levels, &setup.plant)
                .map_err(|e| CliError::Simulation(e.to_string()))?;
            (pts, format!("synthetic sweep ({} levels)", levels.len()))
        }
    };
    add_noise(&mut points, opts.noise, opts.seed)?;
    let fit = fit_friction(&points).map_err(|e| CliError::Identification(e.to_string()))?;

    writeln!(out, "source: {source}, {} points", points.len())?;
    let p = &fit.params;
    super::write_table(
        out,
        &[
            ("tau_c", p.tau_c, "N m"),
            ("b_w", p.b_w, "N m s/rad"),
            ("c_d", p.c_d, "N m s^2/rad^2"),
            ("rms", fit.rms, "N m"),
            ("tau_f(300)", friction_torque(REPORT_SPEED, p), "N m"),
        ],
    )?;
    if opts.synthetic {
        let t = setup.plant.friction;
        let rel = |a: f64, b: f64| {
            if b == 0.0 {
                a.abs()
            } else {
                (a - b).abs() / b.abs()
            }
        };
        writeln!(
            out,
            "relative error vs configured friction: tau_c {:.3e}, b_w {:.3e}, c_d {:.3e}",
            rel(p.tau_c, t.tau_c),
            rel(p.b_w, t.b_w),
            rel(p.c_d, t.c_d)
        )?;
    }
    Ok(fit)
}
