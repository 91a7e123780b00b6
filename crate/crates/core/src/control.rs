//! Nonlinear attitude control.
//!
//! The motor torque is split in two layers. [`feedback_linearize`] cancels
//! gravity and wheel friction so that the body obeys `omega_c_dot = u`. A
//! regulator then picks `u` so that the imaginary part of the attitude
//! error, `q_e1`, obeys `q_e1'' + k_d q_e1' + k_p q_e1 = 0`, which gives
//! `u = (k_p - omega_c^2) sigma_e - k_d omega_c` with `sigma_e = tan(theta_e)`.
//! The attitude-and-wheel variant adds wheel angle and rate feedback so the
//! wheel also comes to rest.

use thiserror::Error;

use crate::plant::{
    friction_torque, gravity_torque, DerivedParams, FrictionParams, GravityModel, State,
};
use crate::rotor::{
    error_tangent, orientation_error, RotorError, UnitComplex, DEFAULT_SINGULARITY_EPS,
};
use crate::scalar::Scalar;

/// Actuator limit used when none is configured (N m).
pub const DEFAULT_TAU_MAX: f64 = 0.5;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ControlError {
    #[error(transparent)]
    Rotor(#[from] RotorError),
    #[error("invalid design: {0}")]
    InvalidSpec(String),
    #[error("torque limit must be positive, got {0}")]
    InvalidTorqueLimit(f64),
}

/// Closed-loop targets: a complex pole pair `(zeta, omega_n)` and, for the
/// wheel loop, a double real pole at `-alpha zeta omega_n`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DesignSpec<T> {
    pub zeta: T,
    pub omega_n: T,
    pub alpha: T,
}

impl<T: Scalar> DesignSpec<T> {
    pub fn new(zeta: T, omega_n: T, alpha: T) -> Result<Self, ControlError> {
        let spec = Self {
            zeta,
            omega_n,
            alpha,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<(), ControlError> {
        let f = |v: T| v.to_f64().unwrap_or(f64::NAN);
        if !(self.zeta > T::zero() && self.zeta <= T::one()) {
            return Err(ControlError::InvalidSpec(format!(
                "zeta must lie in (0, 1], got {}",
                f(self.zeta)
            )));
        }
        if !(self.omega_n > T::zero() && self.omega_n.is_finite()) {
            return Err(ControlError::InvalidSpec(format!(
                "omega_n must be positive, got {}",
                f(self.omega_n)
            )));
        }
        if !(self.alpha >= T::zero() && self.alpha.is_finite()) {
            return Err(ControlError::InvalidSpec(format!(
                "alpha must be nonnegative, got {}",
                f(self.alpha)
            )));
        }
        Ok(())
    }

    /// The four target poles as `(re, im)` pairs: the complex pair first,
    /// then the double wheel pole.
    pub fn poles(&self) -> [(T, T); 4] {
        let s = self.zeta * self.omega_n;
        let wd = self.omega_n * (T::one() - self.zeta * self.zeta).max(T::zero()).sqrt();
        let a = -self.alpha * s;
        [(-s, wd), (-s, -wd), (a, T::zero()), (a, T::zero())]
    }

    /// Coefficients of `(s^2 + 2 zeta w s + w^2)(s + alpha zeta w)^2`,
    /// highest degree first.
    pub fn design_polynomial(&self) -> [T; 5] {
        let (z, w, a) = (self.zeta, self.omega_n, self.alpha);
        let two = T::lit(2.0);
        let four = T::lit(4.0);
        let w2 = w * w;
        [
            T::one(),
            two * z * w * (T::one() + a),
            w2 * (T::one() + a * z * z * (four + a)),
            two * a * z * w2 * w * (T::one() + a * z * z),
            a * a * z * z * w2 * w2,
        ]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Gains<T> {
    /// Attitude stiffness (s^-2).
    pub k_p: T,
    /// Attitude damping (s^-1).
    pub k_d: T,
    /// Wheel angle feedback.
    pub k_pw: T,
    /// Wheel rate feedback.
    pub k_dw: T,
}

/// `k_p = omega_n^2`, `k_d = 2 zeta omega_n`.
pub fn attitude_gains<T: Scalar>(zeta: T, omega_n: T) -> (T, T) {
    (omega_n * omega_n, T::lit(2.0) * zeta * omega_n)
}

/// Gains placing the attitude-and-wheel closed loop on
/// [`DesignSpec::design_polynomial`]. Reduces to [`attitude_gains`] at
/// `alpha = 0`.
pub fn full_gains<T: Scalar>(spec: &DesignSpec<T>, dp: &DerivedParams<T>) -> Gains<T> {
    let [_, c3, c2, c1, c0] = spec.design_polynomial();
    let k_pw = c0 / dp.delta;
    let k_dw = c1 / dp.delta;
    Gains {
        k_p: c2 + dp.gamma * k_pw,
        k_d: c3 + dp.gamma * k_dw,
        k_pw,
        k_dw,
    }
}

/// `u = (k_p - omega_c^2) sigma_e - k_d omega_c`.
pub fn regulator_attitude<T: Scalar>(
    q: UnitComplex<T>,
    omega_c: T,
    q_r: UnitComplex<T>,
    gains: &Gains<T>,
    eps: T,
) -> Result<T, RotorError> {
    let sigma = error_tangent(orientation_error(q, q_r), eps)?;
    Ok((gains.k_p - omega_c * omega_c) * sigma - gains.k_d * omega_c)
}

/// [`regulator_attitude`] minus `k_pw theta_w + k_dw omega_w`.
pub fn regulator_full<T: Scalar>(
    s: &State<T>,
    q_r: UnitComplex<T>,
    gains: &Gains<T>,
    eps: T,
) -> Result<T, RotorError> {
    let u = regulator_attitude(s.q, s.omega_c, q_r, gains, eps)?;
    Ok(u - gains.k_pw * s.theta_w - gains.k_dw * s.omega_w)
}

/// The law linearized at the reference: `k_p q_e1 - k_d omega_c`, plus the
/// wheel terms. Has no singularity.
pub fn regulator_small_angle<T: Scalar>(s: &State<T>, q_r: UnitComplex<T>, gains: &Gains<T>) -> T {
    let q_e = orientation_error(s.q, q_r);
    gains.k_p * q_e.q1() - gains.k_d * s.omega_c - gains.k_pw * s.theta_w - gains.k_dw * s.omega_w
}

/// Motor torque making the approximate body dynamics read `omega_c_dot = u`.
pub fn feedback_linearize<T: Scalar>(
    u: T,
    q: UnitComplex<T>,
    omega_w: T,
    dp: &DerivedParams<T>,
    fp: &FrictionParams<T>,
    model: GravityModel,
) -> T {
    -gravity_torque(q.as_complex(), dp, model) + friction_torque(omega_w, fp) - dp.i_co_bar * u
}

pub fn saturate<T: Scalar>(tau: T, tau_max: T) -> T {
    tau.max(-tau_max).min(tau_max)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum ControlMode {
    /// Attitude feedback only; gains from [`attitude_gains`].
    AttitudeOnly,
    /// Attitude plus wheel feedback; gains from [`full_gains`].
    #[default]
    AttitudeAndWheel,
    /// [`regulator_small_angle`] with gains from [`full_gains`].
    SmallAngle,
}

/// What the controller believes about the plant, and how it acts.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ControllerConfig<T> {
    pub mode: ControlMode,
    pub tau_max: T,
    pub gravity: GravityModel,
    pub reference: UnitComplex<T>,
    pub eps: T,
}

impl<T: Scalar> Default for ControllerConfig<T> {
    fn default() -> Self {
        Self {
            mode: ControlMode::default(),
            tau_max: T::lit(DEFAULT_TAU_MAX),
            gravity: GravityModel::Consistent,
            reference: UnitComplex::upright(),
            eps: T::lit(DEFAULT_SINGULARITY_EPS),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Command<T> {
    /// Commanded body acceleration (rad/s^2).
    pub u: T,
    /// Torque before saturation (N m).
    pub tau_cmd: T,
    /// Torque after saturation (N m).
    pub tau: T,
}

/// Regulator plus feedback linearization plus saturation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Controller<T> {
    pub config: ControllerConfig<T>,
    pub gains: Gains<T>,
    pub derived: DerivedParams<T>,
    pub friction: FrictionParams<T>,
}

impl<T: Scalar> Controller<T> {
    /// Synthesizes gains for `config.mode` from `spec`.
    pub fn design(
        config: ControllerConfig<T>,
        spec: &DesignSpec<T>,
        derived: DerivedParams<T>,
        friction: FrictionParams<T>,
    ) -> Result<Self, ControlError> {
        spec.validate()?;
        if !(config.tau_max > T::zero()) {
            return Err(ControlError::InvalidTorqueLimit(
                config.tau_max.to_f64().unwrap_or(f64::NAN),
            ));
        }
        let gains = match config.mode {
            ControlMode::AttitudeOnly => {
                let (k_p, k_d) = attitude_gains(spec.zeta, spec.omega_n);
                Gains {
                    k_p,
                    k_d,
                    ..Gains::default()
                }
            }
            ControlMode::AttitudeAndWheel | ControlMode::SmallAngle => full_gains(spec, &derived),
        };
        Ok(Self {
            config,
            gains,
            derived,
            friction,
        })
    }

    pub fn acceleration(&self, measured: &State<T>) -> Result<T, RotorError> {
        let c = &self.config;
        match c.mode {
            ControlMode::AttitudeOnly => regulator_attitude(
                measured.q,
                measured.omega_c,
                c.reference,
                &self.gains,
                c.eps,
            ),
            ControlMode::AttitudeAndWheel => {
                regulator_full(measured, c.reference, &self.gains, c.eps)
            }
            ControlMode::SmallAngle => {
                Ok(regulator_small_angle(measured, c.reference, &self.gains))
            }
        }
    }

    pub fn command(&self, measured: &State<T>) -> Result<Command<T>, RotorError> {
        let u = self.acceleration(measured)?;
        let tau_cmd = feedback_linearize(
            u,
            measured.q,
            measured.omega_w,
            &self.derived,
            &self.friction,
            self.config.gravity,
        );
        Ok(Command {
            u,
            tau_cmd,
            tau: saturate(tau_cmd, self.config.tau_max),
        })
    }
}
