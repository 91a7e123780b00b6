//! Property checks run by `cubli verify`.
//!
//! Each check is a plain function over core types so it can be called with
//! a deliberately wrong oracle.

use std::f64::consts::PI;
use std::fmt;
use std::io::Write;

use cubli_core::analysis::{
    char_poly, closed_loop_matrix, controllability_rank, eigenvalues, fd_jacobian, poly_roots,
    Polynomial,
};
use cubli_core::control::{
    feedback_linearize, full_gains, regulator_attitude, regulator_full, regulator_small_angle,
    DesignSpec, Gains,
};
use cubli_core::plant::{AngleState, Fidelity, FrictionParams, Plant, State};
use cubli_core::rotor::UnitComplex;
use cubli_core::sim::{rk4_step, rk4_step_angle};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::config::Config;
use crate::error::CliError;

pub const JACOBIAN_TOL: f64 = 1e-6;
pub const ROOT_RESIDUAL_TOL: f64 = 1e-8;
pub const RANK_TOL: f64 = 1e-9;
pub const COEFF_TOL: f64 = 1e-9;
pub const POLE_TOL: f64 = 1e-6;
pub const CANCEL_TOL: f64 = 1e-12;
pub const TRAJECTORY_TOL: f64 = 1e-8;
pub const ENERGY_TOL: f64 = 1e-6;
pub const NORM_TOL: f64 = 1e-9;
pub const SMALL_ANGLE_TOL: f64 = 1e-3;

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: &'static str,
    pub metric: String,
    pub pass: bool,
}

impl fmt::Display for Check {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}: {} {}",
            self.name,
            self.metric,
            if self.pass { "PASS" } else { "FAIL" }
        )
    }
}

fn below(name: &'static str, value: f64, tol: f64) -> Check {
    Check {
        name,
        metric: format!("{value:.3e} < {tol:e}"),
        pass: value < tol,
    }
}

fn viscous(plant: &Plant<f64>) -> Plant<f64> {
    Plant {
        friction: plant.friction.viscous_only(),
        ..*plant
    }
}

fn approx(plant: &Plant<f64>) -> Plant<f64> {
    Plant {
        fidelity: Fidelity::PaperApprox,
        ..viscous(plant)
    }
}

/// Analytic linearization of `model` against central differences of
/// `oracle`'s dynamics at the upright pose, with viscous friction only.
pub fn check_linearization(model: &Plant<f64>, oracle: &Plant<f64>) -> Check {
    let (a, b) = viscous(model).linearize();
    let oracle = viscous(oracle);
    let x0 = State::at_rest(UnitComplex::upright()).to_vector();
    let fd_a = fd_jacobian(
        |x| {
            oracle
                .rate_vector(&[x[0], x[1], x[2], x[3], x[4]], 0.0)
                .to_vec()
        },
        &x0,
        1e-6,
    );
    let fd_b = fd_jacobian(|t| oracle.rate_vector(&x0, t[0]).to_vec(), &[0.0], 1e-6);
    match (fd_a, fd_b) {
        (Ok(fa), Ok(fb)) => below(
            "linearization",
            a.max_abs_diff(&fa).max(b.max_abs_diff(&fb)),
            JACOBIAN_TOL,
        ),
        (Err(e), _) | (_, Err(e)) => Check {
            name: "linearization",
            metric: e.to_string(),
            pass: false,
        },
    }
}

/// Roots of the open-loop characteristic polynomial against
/// `s^2 (s + omega1)(s^2 - omega0^2)`.
pub fn check_open_loop_poly(plant: &Plant<f64>) -> Check {
    let p = approx(plant);
    let (a, _) = p.linearize();
    let w0 = p.omega0();
    let w1 = p.derived.omega1(&p.friction);
    let want = Polynomial::from_real_roots(&[0.0, 0.0, -w1, w0, -w0]);
    let worst = char_poly(&a).and_then(|cp| poly_roots(&cp)).map(|roots| {
        roots
            .iter()
            .map(|r| want.eval_complex(*r).norm() / want.magnitude_at(*r).max(1.0))
            .fold(0.0, f64::max)
    });
    match worst {
        Ok(w) => below("open_loop_poly", w, ROOT_RESIDUAL_TOL),
        Err(e) => Check {
            name: "open_loop_poly",
            metric: e.to_string(),
            pass: false,
        },
    }
}

pub fn check_controllability(plant: &Plant<f64>) -> Check {
    let (a, b) = plant.linearize();
    match controllability_rank(&a, &b, RANK_TOL) {
        Ok(r) => Check {
            name: "controllability_rank",
            metric: format!("{r}/{}", a.rows()),
            pass: r == 4,
        },
        Err(e) => Check {
            name: "controllability_rank",
            metric: e.to_string(),
            pass: false,
        },
    }
}

/// Closed-loop characteristic polynomial and eigenvalues against the
/// design polynomial and poles.
pub fn check_pole_placement(spec: &DesignSpec<f64>, plant: &Plant<f64>) -> Check {
    let dp = &plant.derived;
    let a = closed_loop_matrix(&full_gains(spec, dp), dp);
    let design = spec.design_polynomial();
    let coeff = char_poly(&a).map(|p| {
        p.coeffs()
            .iter()
            .zip(design)
            .map(|(g, w)| (g - w).abs() / w.abs().max(1.0))
            .fold(0.0, f64::max)
    });
    let poles: Vec<Complex64> = spec
        .poles()
        .iter()
        .map(|&(re, im)| Complex64::new(re, im))
        .collect();
    let mismatch = eigenvalues(&a).map(|e| super::gains::pole_mismatch(&poles, &e));
    match (coeff, mismatch) {
        (Ok(c), Ok(m)) => Check {
            name: "pole_placement",
            metric: format!("coefficients {c:.3e} < {COEFF_TOL:e}, poles {m:.3e} < {POLE_TOL:e}"),
            pass: c < COEFF_TOL && m < POLE_TOL,
        },
        (Err(e), _) | (_, Err(e)) => Check {
            name: "pole_placement",
            metric: e.to_string(),
            pass: false,
        },
    }
}

/// Feedback linearization makes the approximate body dynamics read
/// `omega_c_dot = u` on random states.
pub fn check_cancellation(
    plant: &Plant<f64>,
    spec: &DesignSpec<f64>,
    samples: usize,
    seed: u64,
) -> Check {
    let p = Plant {
        fidelity: Fidelity::PaperApprox,
        ..*plant
    };
    let gains = full_gains(spec, &p.derived);
    let q_r = UnitComplex::upright();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = 0.0f64;
    for _ in 0..samples {
        let s = State {
            q: q_r.compose(UnitComplex::from_angle(rng.random_range(-1.3..1.3))),
            theta_w: rng.random_range(-50.0..50.0),
            omega_c: rng.random_range(-5.0..5.0),
            omega_w: rng.random_range(-500.0..500.0),
        };
        let Ok(u) = regulator_full(&s, q_r, &gains, 1e-3) else {
            continue;
        };
        let tau = feedback_linearize(u, s.q, s.omega_w, &p.derived, &p.friction, p.gravity);
        let got = p.dynamics_rate(&s, tau).omega_c_dot;
        worst = worst.max((got - u).abs() / u.abs().max(1.0));
    }
    Check {
        name: "feedback_cancellation",
        metric: format!("{worst:.3e} <= {CANCEL_TOL:e}"),
        pass: worst <= CANCEL_TOL,
    }
}

/// Complex-form and angle-form trajectories over 1 s at dt = 1e-4.
pub fn check_oracle_equivalence(plant: &Plant<f64>, samples: usize, seed: u64) -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let dt = 1e-4;
    let mut worst = 0.0f64;
    for _ in 0..samples {
        let theta = rng.random_range(-PI..PI);
        let sign = if rng.random_bool(0.5) { 1.0 } else { -1.0 };
        let mut s = State {
            q: UnitComplex::from_angle(theta),
            theta_w: rng.random_range(-10.0..10.0),
            omega_c: rng.random_range(-2.0..2.0),
            omega_w: sign * rng.random_range(100.0..400.0),
        };
        let mut a = AngleState {
            theta_c: theta,
            ..AngleState::from_state(&s)
        };
        let tau = rng.random_range(-5e-3..5e-3);
        for _ in 0..10_000 {
            s = match rk4_step(plant, &s, tau, 0.0, dt) {
                Ok(n) => n,
                Err(_) => return below("oracle_equivalence", f64::INFINITY, TRAJECTORY_TOL),
            };
            a = rk4_step_angle(plant, &a, tau, 0.0, dt);
            for d in [
                s.q.q0() - a.theta_c.cos(),
                s.q.q1() - a.theta_c.sin(),
                s.theta_w - a.theta_w,
                s.omega_c - a.omega_c,
                s.omega_w - a.omega_w,
            ] {
                worst = worst.max(d.abs());
            }
        }
    }
    below("oracle_equivalence", worst, TRAJECTORY_TOL)
}

/// Unforced, frictionless exact dynamics over 10 s at dt = 1e-4; returns
/// the energy and unit-norm checks.
pub fn check_energy(plant: &Plant<f64>) -> [Check; 2] {
    let p = Plant {
        friction: FrictionParams::frictionless(),
        fidelity: Fidelity::Exact,
        ..*plant
    };
    let mut s = State {
        q: UnitComplex::from_angle(std::f64::consts::FRAC_PI_4 + 0.5),
        theta_w: 0.0,
        omega_c: 0.0,
        omega_w: 20.0,
    };
    let e0 = p.energies(&s).total;
    let mut drift = 0.0f64;
    let mut norm = 0.0f64;
    for _ in 0..100_000 {
        s = match rk4_step(&p, &s, 0.0, 0.0, 1e-4) {
            Ok(n) => n,
            Err(_) => {
                return [
                    below("energy_drift", f64::INFINITY, ENERGY_TOL),
                    below("norm_drift", f64::INFINITY, NORM_TOL),
                ]
            }
        };
        drift = drift.max(((p.energies(&s).total - e0) / e0).abs());
        norm = norm.max(s.q.norm_defect());
    }
    [
        below("energy_drift", drift, ENERGY_TOL),
        Check {
            name: "norm_drift",
            metric: format!("{norm:.3e} <= {NORM_TOL:e}"),
            pass: norm <= NORM_TOL,
        },
    ]
}

/// Nonlinear attitude law against its small-angle form for errors under
/// 2 deg and rates under 0.1 rad/s.
pub fn check_small_angle(spec: &DesignSpec<f64>) -> Check {
    let q_r = UnitComplex::upright();
    let gains = Gains {
        k_p: spec.omega_n * spec.omega_n,
        k_d: 2.0 * spec.zeta * spec.omega_n,
        ..Gains::default()
    };
    let mut worst = 0.0f64;
    for i in -20..=20 {
        for j in -20..=20 {
            if i == 0 && j == 0 {
                continue;
            }
            let theta_e = (0.0999 * i as f64).to_radians();
            let omega_c = 0.004995 * j as f64;
            let s = State {
                q: q_r.compose(UnitComplex::from_angle(-theta_e)),
                theta_w: 0.0,
                omega_c,
                omega_w: 0.0,
            };
            let Ok(nonlinear) = regulator_attitude(s.q, omega_c, q_r, &gains, 1e-3) else {
                return below("small_angle", f64::INFINITY, SMALL_ANGLE_TOL);
            };
            let linear = regulator_small_angle(&s, q_r, &gains);
            let scale = (gains.k_p * s.q.error_to(q_r).q1()).abs() + (gains.k_d * omega_c).abs();
            worst = worst.max((nonlinear - linear).abs() / scale);
        }
    }
    below("small_angle", worst, SMALL_ANGLE_TOL)
}

/// Every check for the configured plant and design.
pub fn all_checks(config: &Config) -> Result<Vec<Check>, CliError> {
    let setup = config.setup()?;
    let plant = setup.plant;
    let spec = setup.spec;
    let checks = std::thread::scope(|scope| {
        let handles = vec![
            scope.spawn(move || vec![check_linearization(&plant, &plant)]),
            scope.spawn(move || vec![check_open_loop_poly(&plant)]),
            scope.spawn(move || vec![check_controllability(&plant)]),
            scope.spawn(move || vec![check_pole_placement(&spec, &plant)]),
            scope.spawn(move || vec![check_cancellation(&plant, &spec, 1000, 5)]),
            scope.spawn(move || vec![check_oracle_equivalence(&plant, 20, 6)]),
            scope.spawn(move || check_energy(&plant).to_vec()),
            scope.spawn(move || vec![check_small_angle(&spec)]),
        ];
        handles
            .into_iter()
            .flat_map(|h| h.join().expect("check panicked"))
            .collect::<Vec<_>>()
    });
    Ok(checks)
}

pub fn run(config: &Config, out: &mut dyn Write) -> Result<(), CliError> {
    let checks = all_checks(config)?;
    for c in &checks {
        writeln!(out, "{c}")?;
    }
    let failed = checks.iter().filter(|c| !c.pass).count();
    writeln!(
        out,
        "{} of {} checks passed",
        checks.len() - failed,
        checks.len()
    )?;
    if failed == 0 {
        Ok(())
    } else {
        Err(CliError::Verification(failed))
    }
}
