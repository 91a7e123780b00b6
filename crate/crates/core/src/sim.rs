//! Fixed-step closed-loop simulation and the wheel friction identification
//! experiment.

use thiserror::Error;

use crate::analysis::{least_squares, AnalysisError};
use crate::control::{ControlError, Controller, ControllerConfig, DesignSpec};
use crate::plant::{friction_torque, AngleState, FrictionParams, Plant, State};
use crate::rotor::{RotorError, UnitComplex};
use crate::scalar::Scalar;

/// Default closed-loop step (s); the controller runs once per step.
pub const DEFAULT_DT: f64 = 1e-3;

/// Wheel acceleration below which a spin-up counts as settled (rad/s^2).
pub const STEADY_STATE_THRESHOLD: f64 = 1e-6;

/// Simulated time allowed for one spin-up to settle (s).
pub const STEADY_STATE_BUDGET: f64 = 200.0;

/// Integration step of the wheel spin-up (s).
pub const SWEEP_DT: f64 = 1e-2;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SimError {
    #[error("invalid scenario: {0}")]
    InvalidScenario(String),
    #[error(transparent)]
    Control(#[from] ControlError),
    #[error("controller singularity at t = {t:.6} s: {source}")]
    Singular { t: f64, source: RotorError },
    #[error("state diverged at t = {t:.6} s")]
    Diverged { t: f64 },
    #[error("identification failed: {0}")]
    Identification(String),
}

/// Classical fourth-order Runge-Kutta step over a fixed-size state.
pub fn rk4<T: Scalar, const N: usize>(
    x: &[T; N],
    dt: T,
    mut f: impl FnMut(&[T; N]) -> [T; N],
) -> [T; N] {
    let half = dt * T::lit(0.5);
    let axpy = |h: T, k: &[T; N]| -> [T; N] { std::array::from_fn(|i| x[i] + h * k[i]) };
    let k1 = f(x);
    let k2 = f(&axpy(half, &k1));
    let k3 = f(&axpy(half, &k2));
    let k4 = f(&axpy(dt, &k3));
    let sixth = dt / T::lit(6.0);
    let two = T::lit(2.0);
    std::array::from_fn(|i| x[i] + sixth * (k1[i] + two * k2[i] + two * k3[i] + k4[i]))
}

/// One step of the plant with torques held over the step; `q` is
/// re-projected onto the unit circle afterwards.
pub fn rk4_step<T: Scalar>(
    plant: &Plant<T>,
    s: &State<T>,
    tau: T,
    tau_ext: T,
    dt: T,
) -> Result<State<T>, SimError> {
    let x = rk4(&s.to_vector(), dt, |x| {
        plant
            .rate(&State::from_vector(*x), tau, tau_ext)
            .to_vector()
    });
    let next = State::from_vector(x);
    if !next.is_finite() {
        return Err(SimError::Diverged { t: f64::NAN });
    }
    let q = next
        .q
        .renormalize()
        .map_err(|_| SimError::Diverged { t: f64::NAN })?;
    Ok(State { q, ..next })
}

/// The same integrator over the angle-coordinate equations.
pub fn rk4_step_angle<T: Scalar>(
    plant: &Plant<T>,
    s: &AngleState<T>,
    tau: T,
    tau_ext: T,
    dt: T,
) -> AngleState<T> {
    let x = [s.theta_c, s.theta_w, s.omega_c, s.omega_w];
    let y = rk4(&x, dt, |x| {
        let r = plant.angle_rate(
            &AngleState {
                theta_c: x[0],
                theta_w: x[1],
                omega_c: x[2],
                omega_w: x[3],
            },
            tau,
            tau_ext,
        );
        [r.theta_c, r.theta_w, r.omega_c, r.omega_w]
    });
    AngleState {
        theta_c: y[0],
        theta_w: y[1],
        omega_c: y[2],
        omega_w: y[3],
    }
}

/// A rectangular external torque pulse on the body.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Disturbance<T> {
    pub start: T,
    pub duration: T,
    /// N m about the pivot.
    pub torque: T,
}

impl<T: Scalar> Disturbance<T> {
    pub fn end(&self) -> T {
        self.start + self.duration
    }

    pub fn active_at(&self, t: T) -> bool {
        t >= self.start && t < self.end()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scenario<T> {
    pub initial: State<T>,
    pub plant: Plant<T>,
    pub controller: ControllerConfig<T>,
    pub spec: DesignSpec<T>,
    /// Friction the controller compensates, possibly different from the
    /// plant's.
    pub controller_friction: FrictionParams<T>,
    pub dt: T,
    pub t_end: T,
    pub disturbances: Vec<Disturbance<T>>,
    /// Attitude sensor offset (rad): the controller sees `q ∘ (cos b, sin b)`.
    pub sensor_bias: T,
}

impl<T: Scalar> Scenario<T> {
    /// Reference cube, regulated to the upright pose from `theta_c0` at rest.
    pub fn reference(theta_c0: T, spec: DesignSpec<T>) -> Self {
        let plant = Plant::reference();
        Self {
            initial: State::at_rest(UnitComplex::from_angle(theta_c0)),
            controller_friction: plant.friction,
            plant,
            controller: ControllerConfig::default(),
            spec,
            dt: T::lit(DEFAULT_DT),
            t_end: T::lit(10.0),
            disturbances: Vec::new(),
            sensor_bias: T::zero(),
        }
    }

    pub fn validate(&self) -> Result<(), SimError> {
        let bad = |m: String| Err(SimError::InvalidScenario(m));
        if !(self.dt > T::zero() && self.dt.is_finite()) {
            return bad(format!("dt must be positive, got {}", self.dt));
        }
        if !(self.t_end >= self.dt && self.t_end.is_finite()) {
            return bad(format!("t_end must be at least dt, got {}", self.t_end));
        }
        for (i, d) in self.disturbances.iter().enumerate() {
            if !(d.duration > T::zero()) {
                return bad(format!("disturbance {i} needs a positive duration"));
            }
            if !d.start.is_finite() || !d.torque.is_finite() {
                return bad(format!("disturbance {i} is not finite"));
            }
        }
        if !self.initial.is_finite() || self.initial.q.norm_defect() > T::lit(1e-9) {
            return bad("initial state must be finite with a unit attitude".into());
        }
        if !self.sensor_bias.is_finite() {
            return bad("sensor bias must be finite".into());
        }
        Ok(())
    }

    fn steps(&self) -> usize {
        (self.t_end / self.dt).round().to_usize().unwrap_or(0)
    }

    fn external_torque(&self, t: T) -> T {
        self.disturbances
            .iter()
            .filter(|d| d.active_at(t))
            .fold(T::zero(), |acc, d| acc + d.torque)
    }
}

/// One logged sample.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Record<T> {
    pub t: T,
    pub q0: T,
    pub q1: T,
    pub theta_c_deg: T,
    /// Attitude as seen by the biased sensor.
    pub theta_meas_deg: T,
    pub theta_w: T,
    pub omega_c: T,
    pub omega_w: T,
    pub u: T,
    pub tau_cmd: T,
    pub tau_applied: T,
    pub tau_f: T,
    pub energy: T,
}

pub const CSV_HEADER: &str =
    "t,q0,q1,theta_c_deg,theta_w,omega_c,omega_w,u,tau_cmd,tau_applied,tau_f,energy";

impl<T: Scalar> Record<T> {
    pub fn csv_fields(&self) -> [T; 12] {
        [
            self.t,
            self.q0,
            self.q1,
            self.theta_c_deg,
            self.theta_w,
            self.omega_c,
            self.omega_w,
            self.u,
            self.tau_cmd,
            self.tau_applied,
            self.tau_f,
            self.energy,
        ]
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct TimeSeries<T> {
    pub dt: T,
    pub records: Vec<Record<T>>,
}

impl<T: Scalar> TimeSeries<T> {
    pub fn last(&self) -> Option<&Record<T>> {
        self.records.last()
    }

    pub fn column(&self, f: impl Fn(&Record<T>) -> T) -> Vec<T> {
        self.records.iter().map(f).collect()
    }

    pub fn times(&self) -> Vec<T> {
        self.column(|r| r.t)
    }

    /// Records with `from <= t < to`.
    pub fn window(&self, from: T, to: T) -> impl Iterator<Item = &Record<T>> {
        self.records.iter().filter(move |r| r.t >= from && r.t < to)
    }
}

/// Closed-loop run: measure through the sensor bias, regulate, cancel
/// gravity and friction, saturate, add disturbances, integrate, log.
pub fn run<T: Scalar>(scenario: &Scenario<T>) -> Result<TimeSeries<T>, SimError> {
    let (series, failure) = run_partial(scenario)?;
    match failure {
        Some(e) => Err(e),
        None => Ok(series),
    }
}

/// Like [`run`], but a singularity or divergence mid-run still returns the
/// records logged up to that point alongside the error.
pub fn run_partial<T: Scalar>(
    scenario: &Scenario<T>,
) -> Result<(TimeSeries<T>, Option<SimError>), SimError> {
    scenario.validate()?;
    let controller = Controller::design(
        scenario.controller,
        &scenario.spec,
        scenario.plant.derived,
        scenario.controller_friction,
    )?;
    let bias = UnitComplex::from_angle(scenario.sensor_bias);
    let plant = &scenario.plant;
    let dt = scenario.dt;
    let steps = scenario.steps();
    let to_deg = T::lit(180.0) / T::PI();
    let t_of = |t: T| t.to_f64().unwrap_or(f64::NAN);

    let mut records = Vec::with_capacity(steps + 1);
    let mut s = scenario.initial;
    for k in 0..=steps {
        let t = T::from_usize(k).unwrap() * dt;
        let measured = State {
            q: s.q.compose(bias),
            ..s
        };
        let cmd = match controller.command(&measured) {
            Ok(c) => c,
            Err(source) => {
                return Ok((
                    TimeSeries { dt, records },
                    Some(SimError::Singular { t: t_of(t), source }),
                ))
            }
        };
        records.push(Record {
            t,
            q0: s.q.q0(),
            q1: s.q.q1(),
            theta_c_deg: s.theta_c() * to_deg,
            theta_meas_deg: measured.theta_c() * to_deg,
            theta_w: s.theta_w,
            omega_c: s.omega_c,
            omega_w: s.omega_w,
            u: cmd.u,
            tau_cmd: cmd.tau_cmd,
            tau_applied: cmd.tau,
            tau_f: plant.friction_torque(s.omega_w),
            energy: plant.energies(&s).total,
        });
        if k == steps {
            break;
        }
        s = match rk4_step(plant, &s, cmd.tau, scenario.external_torque(t), dt) {
            Ok(next) => next,
            Err(SimError::Diverged { .. }) => {
                return Ok((
                    TimeSeries { dt, records },
                    Some(SimError::Diverged { t: t_of(t + dt) }),
                ));
            }
            Err(other) => return Ok((TimeSeries { dt, records }, Some(other))),
        };
    }
    Ok((TimeSeries { dt, records }, None))
}

/// Time after which `|x - target|` stays within `band`; `None` if the last
/// sample is still outside.
pub fn settling_time<T: Scalar>(times: &[T], values: &[T], target: T, band: T) -> Option<T> {
    let last_out = values.iter().rposition(|v| (*v - target).abs() > band);
    match last_out {
        None => times.first().copied(),
        Some(i) if i + 1 < times.len() => Some(times[i + 1]),
        Some(_) => None,
    }
}

/// Settling time to within `fraction` of the peak excursion from `target`.
pub fn relative_settling_time<T: Scalar>(
    times: &[T],
    values: &[T],
    target: T,
    fraction: T,
) -> Option<T> {
    let peak = values
        .iter()
        .fold(T::zero(), |m, v| m.max((*v - target).abs()));
    settling_time(times, values, target, fraction * peak)
}

/// Steady wheel speed reached under a constant motor torque.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SteadyStatePoint<T> {
    pub tau: T,
    pub omega_ss: T,
}

/// Spins the wheel up from rest under each torque level, with the
/// structure held fixed, and records the speed where the wheel stops
/// accelerating.
pub fn steady_state_sweep<T: Scalar>(
    levels: &[T],
    plant: &Plant<T>,
) -> Result<Vec<SteadyStatePoint<T>>, SimError> {
    levels.iter().map(|&tau| spin_up(tau, plant)).collect()
}

fn spin_up<T: Scalar>(tau: T, plant: &Plant<T>) -> Result<SteadyStatePoint<T>, SimError> {
    let fp = plant.friction;
    if !(tau.abs() > fp.tau_c) {
        return Err(SimError::Identification(format!(
            "torque {tau} does not exceed Coulomb friction {}",
            fp.tau_c
        )));
    }
    let i_wg = plant.derived.i_wg;
    let accel = |w: T| (tau - friction_torque(w, &fp)) / i_wg;
    let dt = T::lit(SWEEP_DT);
    let threshold = T::lit(STEADY_STATE_THRESHOLD);
    let max_steps = (T::lit(STEADY_STATE_BUDGET) / dt).to_usize().unwrap_or(0);

    let mut w = T::zero();
    let mut settled = false;
    for _ in 0..max_steps {
        w = rk4(&[w], dt, |x| [accel(x[0])])[0];
        if !w.is_finite() {
            return Err(SimError::Identification(format!(
                "spin-up under {tau} diverged"
            )));
        }
        if accel(w).abs() < threshold {
            settled = true;
            break;
        }
    }
    if !settled {
        return Err(SimError::Identification(format!(
            "no steady state under {tau} within {STEADY_STATE_BUDGET} s"
        )));
    }
    // the tail decays exponentially; finish it with Newton on the wheel rate
    for _ in 0..20 {
        let h = T::lit(1e-4) * w.abs().max(T::one());
        let slope = (accel(w + h) - accel(w - h)) / (h + h);
        if slope == T::zero() {
            break;
        }
        let step = accel(w) / slope;
        w -= step;
        if step.abs() <= T::epsilon() * w.abs() {
            break;
        }
    }
    Ok(SteadyStatePoint { tau, omega_ss: w })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FrictionFit<T> {
    pub params: FrictionParams<T>,
    /// Root-mean-square torque residual (N m).
    pub rms: T,
}

/// Least-squares fit of `|tau| = tau_c + b_w |w| + c_d w^2`. Negative
/// coefficients are clipped to zero.
pub fn fit_friction<T: Scalar>(points: &[SteadyStatePoint<T>]) -> Result<FrictionFit<T>, SimError> {
    let mut speeds: Vec<T> = points
        .iter()
        .map(|p| p.omega_ss.abs())
        .filter(|w| *w > T::zero())
        .collect();
    speeds.sort_by(|a, b| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal));
    speeds.dedup();
    if speeds.len() < 3 {
        return Err(SimError::Identification(format!(
            "regressors are rank deficient: need at least 3 distinct nonzero speeds, got {}",
            speeds.len()
        )));
    }
    if points
        .iter()
        .any(|p| !p.tau.is_finite() || !p.omega_ss.is_finite())
    {
        return Err(SimError::Identification("non-finite data point".into()));
    }
    let rows: Vec<[T; 3]> = points
        .iter()
        .map(|p| {
            let w = p.omega_ss.abs();
            [T::one(), w, w * w]
        })
        .collect();
    let rhs: Vec<T> = points.iter().map(|p| p.tau.abs()).collect();
    let coef = least_squares(&rows, &rhs).map_err(|e| match e {
        AnalysisError::RankDeficient { .. } => {
            SimError::Identification(format!("regressors are rank deficient: {e}"))
        }
        other => SimError::Identification(other.to_string()),
    })?;
    let params = FrictionParams {
        tau_c: coef[0].max(T::zero()),
        b_w: coef[1].max(T::zero()),
        c_d: coef[2].max(T::zero()),
    };
    let n = T::from_usize(points.len()).unwrap();
    let rms = (points
        .iter()
        .map(|p| {
            let r = p.tau.abs() - friction_torque(p.omega_ss.abs(), &params);
            r * r
        })
        .sum::<T>()
        / n)
        .sqrt();
    Ok(FrictionFit { params, rms })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::control::{ControlMode, DesignSpec};
    use crate::plant::{Fidelity, GravityModel};
    use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_4, PI};

    fn spec() -> DesignSpec<f64> {
        let w0 = Plant::<f64>::reference()
            .derived
            .omega0(GravityModel::PaperLiteral);
        DesignSpec::new(FRAC_1_SQRT_2, 1.5 * w0, 0.1).unwrap()
    }

    #[test]
    fn equilibrium_step_is_identity() {
        let p = Plant::<f64>::reference();
        let s = State::at_rest(UnitComplex::upright());
        let n = rk4_step(&p, &s, 0.0, 0.0, 1e-3).unwrap();
        for (a, b) in n.to_vector().iter().zip(s.to_vector()) {
            assert!((a - b).abs() <= 1e-15);
        }
    }

    #[test]
    fn small_oscillation_period_about_hanging_pose() {
        // hanging pose: theta_c + pi/4 = -pi/2, gravity acts as a restoring spring
        let p = Plant::<f64>::reference().with_friction(FrictionParams::frictionless());
        let hang = -PI / 2.0 - FRAC_PI_4;
        let amp = 1e-3;
        let mut s = State::at_rest(UnitComplex::from_angle(hang + amp));
        // locked-wheel-free body: with tau = 0 the wheel spins freely, so the
        // body oscillates with the reduced inertia i_co_bar
        let w = (p.derived.gravity_moment / p.derived.i_co_bar).sqrt();
        let period = 2.0 * PI / w;
        let dt = 1e-4;
        let mut t = 0.0;
        let mut prev = s.theta_c() - hang;
        let mut crossings = Vec::new();
        while t < 3.2 * period {
            s = rk4_step(&p, &s, 0.0, 0.0, dt).unwrap();
            t += dt;
            let x = s.theta_c() - hang;
            if prev > 0.0 && x <= 0.0 {
                crossings.push(t - dt * x / (x - prev));
            }
            prev = x;
        }
        assert!(crossings.len() >= 3);
        let measured = crossings[2] - crossings[1];
        assert!(
            ((measured - period) / period).abs() < 1e-3,
            "{measured} vs {period}"
        );
    }

    #[test]
    fn fourth_order_convergence() {
        let p = Plant::<f64>::reference().with_friction(FrictionParams::frictionless());
        let s0 = State {
            q: UnitComplex::from_angle(0.5),
            theta_w: 0.0,
            omega_c: 1.0,
            omega_w: 5.0,
        };
        let t_end = 0.5;
        let integrate = |dt: f64| {
            let mut s = s0;
            for _ in 0..(t_end / dt).round() as usize {
                s = rk4_step(&p, &s, 0.01, 0.0, dt).unwrap();
            }
            s
        };
        let base = 1e-2;
        let reference = integrate(base / 64.0);
        let err = |s: State<f64>| {
            s.to_vector()
                .iter()
                .zip(reference.to_vector())
                .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()))
        };
        let e1 = err(integrate(base));
        let e2 = err(integrate(base / 2.0));
        let ratio = e1 / e2;
        assert!((12.0..20.0).contains(&ratio), "error ratio {ratio}");
    }

    #[test]
    fn equilibrium_scenario_is_constant() {
        let mut sc = Scenario::reference(FRAC_PI_4, spec());
        sc.initial = State::at_rest(UnitComplex::upright());
        sc.t_end = 1.0;
        let ts = run(&sc).unwrap();
        assert_eq!(ts.records.len(), 1001);
        for r in &ts.records {
            assert!(r.u.abs() < 1e-12 && r.omega_c.abs() < 1e-12 && r.omega_w.abs() < 1e-12);
            assert!((r.theta_c_deg - 45.0).abs() < 1e-10);
        }
    }

    #[test]
    fn log_has_fixed_stride() {
        let mut sc = Scenario::reference(0.7, spec());
        sc.t_end = 0.05;
        let ts = run(&sc).unwrap();
        for (k, r) in ts.records.iter().enumerate() {
            assert_eq!(r.t, k as f64 * sc.dt);
            assert!((r.q0 * r.q0 + r.q1 * r.q1 - 1.0).abs() <= 1e-9);
        }
    }

    #[test]
    fn recovers_from_five_degree_offset() {
        let mut sc = Scenario::reference(40f64.to_radians(), spec());
        sc.t_end = 1.0;
        let ts = run(&sc).unwrap();
        let last = ts.last().unwrap();
        assert!((last.theta_c_deg - 45.0).abs() < 0.5);
    }

    #[test]
    fn invalid_scenarios() {
        let mut sc = Scenario::reference(0.7, spec());
        sc.t_end = 0.0;
        assert!(matches!(run(&sc), Err(SimError::InvalidScenario(_))));
        let mut sc = Scenario::reference(0.7, spec());
        sc.dt = -1.0;
        assert!(run(&sc).is_err());
        let mut sc = Scenario::reference(0.7, spec());
        sc.disturbances.push(Disturbance {
            start: 1.0,
            duration: 0.0,
            torque: 0.1,
        });
        assert!(run(&sc).is_err());
    }

    #[test]
    fn singularity_is_reported_with_time() {
        let mut sc = Scenario::reference(FRAC_PI_4 - PI / 2.0, spec());
        sc.t_end = 0.1;
        match run(&sc) {
            Err(SimError::Singular { t, .. }) => assert_eq!(t, 0.0),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn attitude_only_mode_runs() {
        let mut sc = Scenario::reference(42f64.to_radians(), spec());
        sc.controller.mode = ControlMode::AttitudeOnly;
        sc.plant = sc.plant.with_fidelity(Fidelity::PaperApprox);
        sc.t_end = 2.0;
        let ts = run(&sc).unwrap();
        assert!((ts.last().unwrap().theta_c_deg - 45.0).abs() < 1e-3);
    }

    #[test]
    fn settling_helpers() {
        let t = [0.0, 1.0, 2.0, 3.0, 4.0];
        let x = [10.0, 5.0, 0.5, 0.1, 0.0];
        assert_eq!(settling_time(&t, &x, 0.0, 1.0), Some(2.0));
        assert_eq!(settling_time(&t, &x, 0.0, 20.0), Some(0.0));
        assert_eq!(relative_settling_time(&t, &x, 0.0, 0.02), Some(3.0));
        assert_eq!(
            settling_time(&t, &[0.0, 0.0, 0.0, 0.0, 3.0], 0.0, 1.0),
            None
        );
    }

    #[test]
    fn spin_up_reaches_friction_fixed_point() {
        let p = Plant::<f64>::reference();
        let tau = friction_torque(100.0, &p.friction);
        let pts = steady_state_sweep(&[tau], &p).unwrap();
        assert!((pts[0].omega_ss - 100.0).abs() < 1e-3 * 100.0);
    }

    #[test]
    fn spin_up_below_coulomb_fails() {
        let p = Plant::<f64>::reference();
        assert!(matches!(
            steady_state_sweep(&[2.0e-3], &p),
            Err(SimError::Identification(_))
        ));
        assert!(steady_state_sweep(&[p.friction.tau_c], &p).is_err());
    }

    #[test]
    fn sweep_is_monotone() {
        let p = Plant::<f64>::reference();
        let levels: Vec<f64> = (0..20).map(|i| 3e-3 + i as f64 * 6e-4).collect();
        let pts = steady_state_sweep(&levels, &p).unwrap();
        assert!(pts.windows(2).all(|w| w[1].omega_ss > w[0].omega_ss));
    }

    #[test]
    fn fit_recovers_exact_curve() {
        let fp = FrictionParams::<f64>::reference();
        let pts: Vec<_> = [50.0, 120.0, 200.0, 333.0, 480.0, 600.0]
            .iter()
            .map(|&w| SteadyStatePoint {
                tau: friction_torque(w, &fp),
                omega_ss: w,
            })
            .collect();
        let fit = fit_friction(&pts).unwrap();
        assert!(((fit.params.tau_c - fp.tau_c) / fp.tau_c).abs() < 1e-9);
        assert!(((fit.params.b_w - fp.b_w) / fp.b_w).abs() < 1e-9);
        assert!(((fit.params.c_d - fp.c_d) / fp.c_d).abs() < 1e-9);
        assert!(fit.rms < 1e-15);
    }

    #[test]
    fn fit_needs_three_speeds() {
        let fp = FrictionParams::<f64>::reference();
        let pts: Vec<_> = [100.0, 200.0, -200.0]
            .iter()
            .map(|&w| SteadyStatePoint {
                tau: friction_torque(w, &fp),
                omega_ss: w,
            })
            .collect();
        assert!(matches!(
            fit_friction(&pts[..2]),
            Err(SimError::Identification(_))
        ));
        assert!(fit_friction(&pts).is_err());
    }
}
