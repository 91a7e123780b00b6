//! Gain synthesis report with an eigenvalue cross-check.

use std::io::Write;

use cubli_core::analysis::{closed_loop_matrix, eigenvalues};
use cubli_core::control::{full_gains, Gains};
use num_complex::Complex64;

use crate::config::Config;
use crate::error::CliError;

/// Largest allowed distance between a designed pole and an eigenvalue,
/// relative to `max(1, |pole|)`.
pub const POLE_TOL: f64 = 1e-6;

#[derive(Debug, Clone)]
pub struct GainReport {
    pub gains: Gains<f64>,
    pub poles: Vec<Complex64>,
    pub eigenvalues: Vec<Complex64>,
    pub max_mismatch: f64,
}

/// Pairs each designed pole with its nearest unused eigenvalue and returns
/// the worst scaled distance.
pub fn pole_mismatch(poles: &[Complex64], eig: &[Complex64]) -> f64 {
    let mut used = vec![false; eig.len()];
    let mut worst = 0.0f64;
    for p in poles {
        let best = eig
            .iter()
            .enumerate()
            .filter(|(k, _)| !used[*k])
            .map(|(k, z)| (k, (z - p).norm()))
            .min_by(|a, b| a.1.total_cmp(&b.1));
        match best {
            Some((k, d)) => {
                used[k] = true;
                worst = worst.max(d / p.norm().max(1.0));
            }
            None => return f64::INFINITY,
        }
    }
    worst
}

pub fn report(config: &Config) -> Result<GainReport, CliError> {
    let setup = config.setup()?;
    let dp = setup.plant.derived;
    let gains = full_gains(&setup.spec, &dp);
    let poles: Vec<Complex64> = setup
        .spec
        .poles()
        .iter()
        .map(|&(re, im)| Complex64::new(re, im))
        .collect();
    let eig =
        eigenvalues(&closed_loop_matrix(&gains, &dp)).map_err(|e| CliError::Io(e.to_string()))?;
    let max_mismatch = pole_mismatch(&poles, &eig);
    Ok(GainReport {
        gains,
        poles,
        eigenvalues: eig,
        max_mismatch,
    })
}

fn fmt_c(z: &Complex64) -> String {
    if z.im == 0.0 {
        format!("{:.6}", z.re)
    } else {
        format!(
            "{:.6} {} {:.6}i",
            z.re,
            if z.im < 0.0 { '-' } else { '+' },
            z.im.abs()
        )
    }
}

pub fn run(config: &Config, json: bool, out: &mut dyn Write) -> Result<(), CliError> {
    let r = report(config)?;
    let pass = r.max_mismatch < POLE_TOL;
    if json {
        let pair = |z: &Complex64| serde_json::json!([z.re, z.im]);
        let v = serde_json::json!({
            "k_p": r.gains.k_p,
            "k_d": r.gains.k_d,
            "k_pw": r.gains.k_pw,
            "k_dw": r.gains.k_dw,
            "poles": r.poles.iter().map(pair).collect::<Vec<_>>(),
            "eigenvalues": r.eigenvalues.iter().map(pair).collect::<Vec<_>>(),
            "max_mismatch": r.max_mismatch,
            "pass": pass,
        });
        writeln!(
            out,
            "{}",
            serde_json::to_string_pretty(&v).map_err(|e| CliError::Io(e.to_string()))?
        )?;
    } else {
        let g = &r.gains;
        super::write_table(
            out,
            &[
                ("k_p", g.k_p, "s^-2"),
                ("k_d", g.k_d, "s^-1"),
                ("k_pw", g.k_pw, "s^-2"),
                ("k_dw", g.k_dw, "s^-1"),
            ],
        )?;
        writeln!(out, "designed poles:")?;
        for p in &r.poles {
            writeln!(out, "  {}", fmt_c(p))?;
        }
        writeln!(out, "closed-loop eigenvalues:")?;
        for z in &r.eigenvalues {
            writeln!(out, "  {}", fmt_c(z))?;
        }
        writeln!(
            out,
            "max eigenvalue mismatch: {:.3e} (< {POLE_TOL:e}) {}",
            r.max_mismatch,
            if pass { "PASS" } else { "FAIL" }
        )?;
    }
    if pass {
        Ok(())
    } else {
        Err(CliError::Verification(1))
    }
}
