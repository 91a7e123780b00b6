//! Physical model of the Cubli balancing on one edge.
//!
//! State ordering everywhere is `(q0, q1, theta_w, omega_c, omega_w)`, where
//! `q` is the body attitude, `theta_w`/`omega_w` the wheel angle and rate
//! relative to the body and `omega_c` the body rate about the pivot edge.
//! The motor torque `tau` acts on the wheel and reacts on the body.

use thiserror::Error;

use crate::analysis::Matrix;
use crate::rotor::{Complex, UnitComplex};
use crate::scalar::{sign, Scalar};

/// Standard gravity used when none is configured.
pub const STANDARD_GRAVITY: f64 = 9.81;

/// Below this inertia ratio the wheel-decoupled approximation is refused.
pub const MIN_APPROX_INERTIA_RATIO: f64 = 10.0;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PlantError {
    #[error("parameter `{name}` must be {requirement}, got {value}")]
    InvalidParameter {
        name: &'static str,
        requirement: &'static str,
        value: f64,
    },
    #[error("inertia ratio {gamma} is too small for the approximate dynamics (need > {min})")]
    ApproximationInvalid { gamma: f64, min: f64 },
}

fn check_positive<T: Scalar>(name: &'static str, v: T) -> Result<(), PlantError> {
    if v > T::zero() && v.is_finite() {
        Ok(())
    } else {
        Err(PlantError::InvalidParameter {
            name,
            requirement: "strictly positive and finite",
            value: v.to_f64().unwrap_or(f64::NAN),
        })
    }
}

fn check_nonnegative<T: Scalar>(name: &'static str, v: T) -> Result<(), PlantError> {
    if v >= T::zero() && v.is_finite() {
        Ok(())
    } else {
        Err(PlantError::InvalidParameter {
            name,
            requirement: "nonnegative and finite",
            value: v.to_f64().unwrap_or(f64::NAN),
        })
    }
}

/// Geometric and inertial constants of the cube and its wheel.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CubliParams<T> {
    /// Side length (m).
    pub l: T,
    /// Structure mass (kg).
    pub m_s: T,
    /// Wheel mass (kg).
    pub m_w: T,
    /// Structure inertia about its center of mass (kg m^2).
    pub i_sg: T,
    /// Wheel inertia about its center of mass (kg m^2).
    pub i_wg: T,
    /// Gravity (m/s^2).
    pub g: T,
}

impl<T: Scalar> CubliParams<T> {
    /// The reference prototype.
    pub fn reference() -> Self {
        Self {
            l: T::lit(0.15),
            m_s: T::lit(0.70),
            m_w: T::lit(0.15),
            i_sg: T::lit(3.75e-3),
            i_wg: T::lit(1.25e-4),
            g: T::lit(STANDARD_GRAVITY),
        }
    }

    pub fn validate(&self) -> Result<(), PlantError> {
        check_positive("l", self.l)?;
        check_positive("m_s", self.m_s)?;
        check_positive("m_w", self.m_w)?;
        check_positive("i_sg", self.i_sg)?;
        check_positive("i_wg", self.i_wg)?;
        check_positive("g", self.g)
    }

    pub fn derive(&self) -> Result<DerivedParams<T>, PlantError> {
        self.validate()?;
        let d = self.l * T::FRAC_1_SQRT_2();
        let m_c = self.m_s + self.m_w;
        let i_so = self.i_sg + self.m_s * d * d;
        let i_wo = self.i_wg + self.m_w * d * d;
        let i_co = i_so + i_wo;
        let i_co_bar = i_co - self.i_wg;
        let gravity_moment = m_c * self.g * d;
        Ok(DerivedParams {
            d,
            m_c,
            g: self.g,
            i_so,
            i_wo,
            i_co,
            i_co_bar,
            i_wg: self.i_wg,
            gravity_moment,
            gamma: i_co_bar / self.i_wg,
            delta: gravity_moment / self.i_wg,
        })
    }
}

/// Quantities derived from [`CubliParams`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DerivedParams<T> {
    /// Pivot to center-of-mass distance (m).
    pub d: T,
    /// Total mass (kg).
    pub m_c: T,
    pub g: T,
    /// Structure inertia about the pivot.
    pub i_so: T,
    /// Wheel inertia about the pivot.
    pub i_wo: T,
    /// Total inertia about the pivot.
    pub i_co: T,
    /// Total inertia about the pivot without the wheel's own spin inertia.
    pub i_co_bar: T,
    pub i_wg: T,
    /// `m_c g d` (N m).
    pub gravity_moment: T,
    /// `i_co_bar / i_wg`.
    pub gamma: T,
    /// `m_c g d / i_wg` (s^-2).
    pub delta: T,
}

impl<T: Scalar> DerivedParams<T> {
    /// Open-loop unstable pole of the body about the upright pose.
    pub fn omega0(&self, model: GravityModel) -> T {
        let stiffness = match model {
            GravityModel::PaperLiteral => self.gravity_moment * T::FRAC_1_SQRT_2(),
            GravityModel::Consistent => self.gravity_moment,
        };
        (stiffness / self.i_co_bar).sqrt()
    }

    /// Wheel viscous pole `b_w / i_wg`.
    pub fn omega1(&self, friction: &FrictionParams<T>) -> T {
        friction.b_w / self.i_wg
    }
}

/// Wheel bearing and drag friction coefficients.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FrictionParams<T> {
    /// Coulomb torque (N m).
    pub tau_c: T,
    /// Viscous coefficient (N m s/rad).
    pub b_w: T,
    /// Aerodynamic drag coefficient (N m s^2/rad^2).
    pub c_d: T,
}

impl<T: Scalar> FrictionParams<T> {
    pub fn reference() -> Self {
        Self {
            tau_c: T::lit(2.46e-3),
            b_w: T::lit(1.06e-5),
            c_d: T::lit(1.70e-8),
        }
    }

    pub fn frictionless() -> Self {
        Self {
            tau_c: T::zero(),
            b_w: T::zero(),
            c_d: T::zero(),
        }
    }

    /// Keeps only the viscous term, the part that survives linearization.
    pub fn viscous_only(&self) -> Self {
        Self {
            tau_c: T::zero(),
            b_w: self.b_w,
            c_d: T::zero(),
        }
    }

    pub fn validate(&self) -> Result<(), PlantError> {
        check_nonnegative("tau_c", self.tau_c)?;
        check_nonnegative("b_w", self.b_w)?;
        check_nonnegative("c_d", self.c_d)
    }
}

/// `sign(w) [tau_c + b_w |w| + c_d w^2]`, zero at rest.
pub fn friction_torque<T: Scalar>(omega_w: T, fp: &FrictionParams<T>) -> T {
    let a = omega_w.abs();
    sign(omega_w) * (fp.tau_c + fp.b_w * a + fp.c_d * a * a)
}

/// How gravity is projected onto the attitude.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum GravityModel {
    /// `tau_g = m_c g d q0`. Nonzero at the upright pose.
    PaperLiteral,
    /// `tau_g = m_c g d (q0 - q1) / sqrt(2)`, i.e. `m_c g d cos(theta_c + pi/4)`,
    /// the gradient of the potential energy. Zero at the upright pose.
    #[default]
    Consistent,
}

impl GravityModel {
    pub const ALL: [GravityModel; 2] = [GravityModel::PaperLiteral, GravityModel::Consistent];

    /// Row vector `Gamma` with `tau_g = m_c g d Gamma q`.
    pub fn projection<T: Scalar>(self) -> [T; 2] {
        match self {
            GravityModel::PaperLiteral => [T::one(), T::zero()],
            GravityModel::Consistent => [T::FRAC_1_SQRT_2(), -T::FRAC_1_SQRT_2()],
        }
    }
}

/// Gravity torque about the pivot. `q` need not be exactly unit.
pub fn gravity_torque<T: Scalar>(q: Complex<T>, dp: &DerivedParams<T>, model: GravityModel) -> T {
    let [g0, g1] = model.projection::<T>();
    dp.gravity_moment * (g0 * q.q0 + g1 * q.q1)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum Fidelity {
    /// Full inverse of the mass matrix: the wheel-relative acceleration
    /// carries `-omega_c_dot`.
    #[default]
    Exact,
    /// Drops the body coupling in the wheel equation (valid for
    /// `i_co_bar >> i_wg`).
    PaperApprox,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct State<T> {
    pub q: UnitComplex<T>,
    pub theta_w: T,
    pub omega_c: T,
    pub omega_w: T,
}

impl<T: Scalar> State<T> {
    pub fn at_rest(q: UnitComplex<T>) -> Self {
        Self {
            q,
            theta_w: T::zero(),
            omega_c: T::zero(),
            omega_w: T::zero(),
        }
    }

    /// Body angle `theta_c = atan2(q1, q0)`.
    pub fn theta_c(&self) -> T {
        self.q.angle()
    }

    pub fn to_vector(&self) -> [T; 5] {
        [
            self.q.q0(),
            self.q.q1(),
            self.theta_w,
            self.omega_c,
            self.omega_w,
        ]
    }

    /// Inverse of [`State::to_vector`]; `q` is taken as-is.
    pub fn from_vector(x: [T; 5]) -> Self {
        Self {
            q: UnitComplex::new_unchecked(Complex::new(x[0], x[1])),
            theta_w: x[2],
            omega_c: x[3],
            omega_w: x[4],
        }
    }

    /// `self + h * rate`, without renormalizing `q`.
    pub fn advanced(&self, rate: &StateRate<T>, h: T) -> Self {
        let q = self.q.as_complex();
        Self {
            q: UnitComplex::new_unchecked(Complex::new(
                q.q0 + h * rate.q_dot.q0,
                q.q1 + h * rate.q_dot.q1,
            )),
            theta_w: self.theta_w + h * rate.theta_w_dot,
            omega_c: self.omega_c + h * rate.omega_c_dot,
            omega_w: self.omega_w + h * rate.omega_w_dot,
        }
    }

    pub fn is_finite(&self) -> bool {
        self.q.as_complex().is_finite()
            && self.theta_w.is_finite()
            && self.omega_c.is_finite()
            && self.omega_w.is_finite()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct StateRate<T> {
    pub q_dot: Complex<T>,
    pub theta_w_dot: T,
    pub omega_c_dot: T,
    pub omega_w_dot: T,
}

impl<T: Scalar> StateRate<T> {
    pub fn to_vector(&self) -> [T; 5] {
        [
            self.q_dot.q0,
            self.q_dot.q1,
            self.theta_w_dot,
            self.omega_c_dot,
            self.omega_w_dot,
        ]
    }

    /// Weighted sum `sum_i w_i r_i`, used by the Runge-Kutta combination.
    pub fn combine(terms: &[(T, &StateRate<T>)]) -> Self {
        let mut out = StateRate::default();
        for (w, r) in terms {
            out.q_dot.q0 += *w * r.q_dot.q0;
            out.q_dot.q1 += *w * r.q_dot.q1;
            out.theta_w_dot += *w * r.theta_w_dot;
            out.omega_c_dot += *w * r.omega_c_dot;
            out.omega_w_dot += *w * r.omega_w_dot;
        }
        out
    }
}

/// Equations of motion for a fixed parameter set and modelling choices.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Plant<T> {
    pub derived: DerivedParams<T>,
    pub friction: FrictionParams<T>,
    pub gravity: GravityModel,
    pub fidelity: Fidelity,
}

impl<T: Scalar> Plant<T> {
    pub fn new(
        derived: DerivedParams<T>,
        friction: FrictionParams<T>,
        gravity: GravityModel,
        fidelity: Fidelity,
    ) -> Result<Self, PlantError> {
        friction.validate()?;
        if fidelity == Fidelity::PaperApprox && !(derived.gamma > T::lit(MIN_APPROX_INERTIA_RATIO))
        {
            return Err(PlantError::ApproximationInvalid {
                gamma: derived.gamma.to_f64().unwrap_or(f64::NAN),
                min: MIN_APPROX_INERTIA_RATIO,
            });
        }
        Ok(Self {
            derived,
            friction,
            gravity,
            fidelity,
        })
    }

    /// Reference parameters, consistent gravity, exact dynamics.
    pub fn reference() -> Self {
        let derived = CubliParams::reference()
            .derive()
            .expect("reference parameters are valid");
        Self {
            derived,
            friction: FrictionParams::reference(),
            gravity: GravityModel::Consistent,
            fidelity: Fidelity::Exact,
        }
    }

    pub fn with_friction(mut self, friction: FrictionParams<T>) -> Self {
        self.friction = friction;
        self
    }

    pub fn with_gravity(mut self, gravity: GravityModel) -> Self {
        self.gravity = gravity;
        self
    }

    pub fn with_fidelity(mut self, fidelity: Fidelity) -> Self {
        self.fidelity = fidelity;
        self
    }

    pub fn gravity_torque(&self, q: Complex<T>) -> T {
        gravity_torque(q, &self.derived, self.gravity)
    }

    pub fn friction_torque(&self, omega_w: T) -> T {
        friction_torque(omega_w, &self.friction)
    }

    pub fn omega0(&self) -> T {
        self.derived.omega0(self.gravity)
    }

    /// State rate under motor torque `tau`.
    pub fn dynamics_rate(&self, s: &State<T>, tau: T) -> StateRate<T> {
        self.rate(s, tau, T::zero())
    }

    /// State rate under motor torque `tau` and an external torque
    /// `tau_ext` applied to the body about the pivot.
    pub fn rate(&self, s: &State<T>, tau: T, tau_ext: T) -> StateRate<T> {
        let dp = &self.derived;
        let tau_g = self.gravity_torque(s.q.as_complex());
        let tau_f = self.friction_torque(s.omega_w);
        let omega_c_dot = (-tau_g + tau_f - tau + tau_ext) / dp.i_co_bar;
        let wheel = (-tau_f + tau) / dp.i_wg;
        let omega_w_dot = match self.fidelity {
            Fidelity::PaperApprox => wheel,
            Fidelity::Exact => wheel - omega_c_dot,
        };
        StateRate {
            q_dot: s.q.kinematics_rate(s.omega_c),
            theta_w_dot: s.omega_w,
            omega_c_dot,
            omega_w_dot,
        }
    }

    /// [`Plant::dynamics_rate`] over a raw state vector.
    pub fn rate_vector(&self, x: &[T; 5], tau: T) -> [T; 5] {
        self.dynamics_rate(&State::from_vector(*x), tau).to_vector()
    }

    /// Angle-coordinate twin of [`Plant::rate`], written directly in
    /// `theta_c` with trigonometric gravity.
    pub fn angle_rate(&self, s: &AngleState<T>, tau: T, tau_ext: T) -> AngleState<T> {
        let dp = &self.derived;
        let tau_g = match self.gravity {
            GravityModel::PaperLiteral => dp.gravity_moment * s.theta_c.cos(),
            GravityModel::Consistent => dp.gravity_moment * (s.theta_c + T::FRAC_PI_4()).cos(),
        };
        let tau_f = self.friction_torque(s.omega_w);
        let omega_c_dot = (-tau_g + tau_f - tau + tau_ext) / dp.i_co_bar;
        let wheel = (-tau_f + tau) / dp.i_wg;
        let omega_w_dot = match self.fidelity {
            Fidelity::PaperApprox => wheel,
            Fidelity::Exact => wheel - omega_c_dot,
        };
        AngleState {
            theta_c: s.omega_c,
            theta_w: s.omega_w,
            omega_c: omega_c_dot,
            omega_w: omega_w_dot,
        }
    }

    pub fn energies(&self, s: &State<T>) -> Energies<T> {
        energies(s, &self.derived)
    }

    /// Jacobians `(A, B)` at the upright pose at rest, for this plant's
    /// gravity model and fidelity. Friction keeps only its viscous part.
    pub fn linearize(&self) -> (Matrix<T>, Matrix<T>) {
        let dp = &self.derived;
        let b_w = self.friction.b_w;
        let [g0, g1] = UnitComplex::<T>::upright().tangent_row();
        let [p0, p1] = self.gravity.projection::<T>();
        let k = dp.gravity_moment / dp.i_co_bar;

        let mut a = Matrix::zeros(5, 5);
        a[(0, 3)] = g0;
        a[(1, 3)] = g1;
        a[(2, 4)] = T::one();
        a[(3, 0)] = -k * p0;
        a[(3, 1)] = -k * p1;
        a[(3, 4)] = b_w / dp.i_co_bar;
        a[(4, 4)] = -b_w / dp.i_wg;

        let mut b = Matrix::zeros(5, 1);
        b[(3, 0)] = -dp.i_co_bar.recip();
        b[(4, 0)] = dp.i_wg.recip();

        if self.fidelity == Fidelity::Exact {
            for j in 0..5 {
                let body = a[(3, j)];
                a[(4, j)] -= body;
            }
            let body = b[(3, 0)];
            b[(4, 0)] -= body;
        }
        (a, b)
    }
}

/// Open-loop linearization of the approximate dynamics at the upright pose.
pub fn linearize<T: Scalar>(
    dp: &DerivedParams<T>,
    fp: &FrictionParams<T>,
    model: GravityModel,
) -> (Matrix<T>, Matrix<T>) {
    Plant {
        derived: *dp,
        friction: *fp,
        gravity: model,
        fidelity: Fidelity::PaperApprox,
    }
    .linearize()
}

/// Angle-coordinate state `(theta_c, theta_w, omega_c, omega_w)`. Also used
/// for its rate.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct AngleState<T> {
    pub theta_c: T,
    pub theta_w: T,
    pub omega_c: T,
    pub omega_w: T,
}

impl<T: Scalar> AngleState<T> {
    pub fn from_state(s: &State<T>) -> Self {
        Self {
            theta_c: s.theta_c(),
            theta_w: s.theta_w,
            omega_c: s.omega_c,
            omega_w: s.omega_w,
        }
    }

    pub fn to_state(&self) -> State<T> {
        State {
            q: UnitComplex::from_angle(self.theta_c),
            theta_w: self.theta_w,
            omega_c: self.omega_c,
            omega_w: self.omega_w,
        }
    }

    pub fn advanced(&self, rate: &Self, h: T) -> Self {
        Self {
            theta_c: self.theta_c + h * rate.theta_c,
            theta_w: self.theta_w + h * rate.theta_w,
            omega_c: self.omega_c + h * rate.omega_c,
            omega_w: self.omega_w + h * rate.omega_w,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Energies<T> {
    pub kinetic: T,
    pub potential: T,
    pub total: T,
}

/// Kinetic, potential and total energy, with the potential measured from
/// the pivot height.
pub fn energies<T: Scalar>(s: &State<T>, dp: &DerivedParams<T>) -> Energies<T> {
    let half = T::lit(0.5);
    let spin = s.omega_c + s.omega_w;
    let kinetic = half * dp.i_co_bar * s.omega_c * s.omega_c + half * dp.i_wg * spin * spin;
    let potential = dp.gravity_moment * (s.theta_c() + T::FRAC_PI_4()).sin();
    Energies {
        kinetic,
        potential,
        total: kinetic + potential,
    }
}
