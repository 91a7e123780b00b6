//! Closed-loop run with CSV trajectory and a text summary.

use std::fs::File;
use std::io::{BufWriter, Write};

use cubli_core::sim::{
    relative_settling_time, run_partial, settling_time, Scenario, TimeSeries, CSV_HEADER,
};

use crate::config::Config;
use crate::error::CliError;

/// Attitude settling band (deg).
pub const SETTLE_BAND_DEG: f64 = 0.5;

/// Wheel speeds below this count as stopped (rad/s).
pub const WHEEL_REST_SPEED: f64 = 0.1;

#[derive(Debug, Clone, PartialEq)]
pub struct Recovery {
    pub start: f64,
    pub peak_deg: f64,
    /// Time from the end of the pulse back into the band, if it got there.
    pub resettle: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Summary {
    pub attitude_settling: Option<f64>,
    pub attitude_settling_2pct: Option<f64>,
    pub wheel_settling_2pct: Option<f64>,
    pub recoveries: Vec<Recovery>,
    pub peak_torque: f64,
    pub peak_wheel_speed: f64,
    pub final_time: f64,
    pub final_attitude_deg: f64,
    pub final_measured_deg: f64,
    pub final_wheel_speed: f64,
    pub wheel_decaying: bool,
}

/// Settling figures are taken before the first disturbance; each
/// disturbance then gets its own recovery time.
pub fn summarize(ts: &TimeSeries<f64>, sc: &Scenario<f64>) -> Summary {
    let reference_deg = sc.controller.reference.angle().to_degrees();
    let first_poke = sc
        .disturbances
        .iter()
        .map(|d| d.start)
        .fold(f64::INFINITY, f64::min);
    let quiet: Vec<_> = ts.window(0.0, first_poke).collect();
    let t: Vec<f64> = quiet.iter().map(|r| r.t).collect();
    let theta: Vec<f64> = quiet.iter().map(|r| r.theta_c_deg).collect();
    let omega_w: Vec<f64> = quiet.iter().map(|r| r.omega_w).collect();

    let recoveries = sc
        .disturbances
        .iter()
        .filter_map(|d| {
            let before = ts.window(f64::NEG_INFINITY, d.start).last()?.theta_c_deg;
            let next = sc
                .disturbances
                .iter()
                .map(|o| o.start)
                .filter(|t| *t > d.start)
                .fold(f64::INFINITY, f64::min);
            let after: Vec<_> = ts.window(d.end(), next).collect();
            if after.is_empty() {
                return None;
            }
            let tt: Vec<f64> = after.iter().map(|r| r.t).collect();
            let x: Vec<f64> = after.iter().map(|r| r.theta_c_deg).collect();
            let peak_deg = ts
                .window(d.start, next)
                .fold(0.0f64, |m, r| m.max((r.theta_c_deg - before).abs()));
            Some(Recovery {
                start: d.start,
                peak_deg,
                resettle: settling_time(&tt, &x, before, SETTLE_BAND_DEG).map(|s| s - d.end()),
            })
        })
        .collect();

    let peak_wheel_speed = ts
        .records
        .iter()
        .fold(0.0f64, |m, r| m.max(r.omega_w.abs()));
    let last = ts.last().cloned().unwrap_or_default();
    let final_speed = last.omega_w.abs();
    Summary {
        attitude_settling: settling_time(&t, &theta, reference_deg, SETTLE_BAND_DEG),
        attitude_settling_2pct: relative_settling_time(&t, &theta, reference_deg, 0.02),
        wheel_settling_2pct: relative_settling_time(&t, &omega_w, 0.0, 0.02),
        recoveries,
        peak_torque: ts
            .records
            .iter()
            .fold(0.0f64, |m, r| m.max(r.tau_applied.abs())),
        peak_wheel_speed,
        final_time: last.t,
        final_attitude_deg: last.theta_c_deg,
        final_measured_deg: last.theta_meas_deg,
        final_wheel_speed: last.omega_w,
        wheel_decaying: final_speed <= WHEEL_REST_SPEED || final_speed < 0.5 * peak_wheel_speed,
    }
}

fn opt_s(v: Option<f64>) -> String {
    v.map_or_else(|| "not settled".into(), |v| format!("{v:.3} s"))
}

pub fn write_summary(out: &mut dyn Write, s: &Summary) -> std::io::Result<()> {
    writeln!(
        out,
        "attitude settling (|error| < {SETTLE_BAND_DEG} deg): {}",
        opt_s(s.attitude_settling)
    )?;
    writeln!(
        out,
        "attitude settling (2%): {}",
        opt_s(s.attitude_settling_2pct)
    )?;
    writeln!(
        out,
        "wheel speed settling (2%): {}",
        opt_s(s.wheel_settling_2pct)
    )?;
    for r in &s.recoveries {
        writeln!(
            out,
            "disturbance at {:.3} s: peak deviation {:.3} deg, back within {SETTLE_BAND_DEG} deg after {}",
            r.start,
            r.peak_deg,
            opt_s(r.resettle)
        )?;
    }
    writeln!(out, "peak motor torque: {:.4e} N m", s.peak_torque)?;
    writeln!(out, "peak wheel speed: {:.4e} rad/s", s.peak_wheel_speed)?;
    writeln!(
        out,
        "final attitude at {:.3} s: {:.4} deg (measured {:.4} deg), wheel speed {:.4e} rad/s",
        s.final_time, s.final_attitude_deg, s.final_measured_deg, s.final_wheel_speed
    )?;
    if !s.wheel_decaying {
        writeln!(out, "WARNING: wheel speed is not decaying")?;
    }
    Ok(())
}

/// CSV body, one row per record, shortest round-trip float formatting.
pub fn write_csv(out: &mut dyn Write, ts: &TimeSeries<f64>) -> std::io::Result<()> {
    writeln!(out, "{CSV_HEADER}")?;
    for r in &ts.records {
        let fields = r.csv_fields();
        let mut line = String::with_capacity(fields.len() * 24);
        for (i, v) in fields.iter().enumerate() {
            if i > 0 {
                line.push(',');
            }
            line.push_str(&v.to_string());
        }
        writeln!(out, "{line}")?;
    }
    Ok(())
}

/// Runs the configured scenario. The CSV goes to `config.output.csv`
/// (stdout for `-`) and the summary to `report`. A run that stops early
/// still writes what it logged before reporting the failure.
pub fn run(config: &Config, report: &mut dyn Write) -> Result<Summary, CliError> {
    let setup = config.setup()?;
    let sc = &setup.scenario;
    let (ts, failure) = run_partial(sc).map_err(|e| CliError::Simulation(e.to_string()))?;

    if config.output.csv == "-" {
        let stdout = std::io::stdout();
        let mut lock = stdout.lock();
        write_csv(&mut lock, &ts)?;
        lock.flush()?;
    } else {
        let file = File::create(&config.output.csv)
            .map_err(|e| CliError::Io(format!("cannot create {}: {e}", config.output.csv)))?;
        let mut w = BufWriter::new(file);
        write_csv(&mut w, &ts)?;
        w.flush()?;
    }

    let summary = summarize(&ts, sc);
    write_summary(report, &summary)?;
    match failure {
        Some(e) => Err(CliError::Simulation(e.to_string())),
        None => Ok(summary),
    }
}
