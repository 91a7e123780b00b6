//! Planar rotations as unit complex numbers.
//!
//! An attitude `theta` is stored redundantly as `q = (cos theta, sin theta)`.
//! Composition is the complex product, the inverse is the conjugate, and the
//! time derivative of `q` is always tangent to the unit circle:
//! `q_dot = G(q)^T * omega` with `G(q) = [-q1, q0]`.

use std::ops::{Mul, Neg};

use thiserror::Error;

use crate::scalar::Scalar;

/// Singularity guard on `q_e0` used when none is given.
pub const DEFAULT_SINGULARITY_EPS: f64 = 1e-3;

/// Smallest norm accepted by [`Complex::normalize`].
pub const MIN_NORMALIZABLE: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Error)]
pub enum RotorError {
    #[error("cannot normalize a complex number with norm {norm:e}")]
    Degenerate { norm: f64 },
    /// The orientation error is at or beyond +/-90 degrees, where
    /// `q_e1 / q_e0` blows up.
    #[error("orientation error is singular: |q_e0| = {q_e0:e} <= {eps:e}")]
    Singular { q_e0: f64, eps: f64 },
}

/// A complex number `q0 + q1 i` viewed as a 2-vector.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Complex<T> {
    pub q0: T,
    pub q1: T,
}

impl<T: Scalar> Complex<T> {
    pub const fn new(q0: T, q1: T) -> Self {
        Self { q0, q1 }
    }

    pub fn one() -> Self {
        Self::new(T::one(), T::zero())
    }

    /// `q ∘ r = (q0 r0 - q1 r1, q0 r1 + q1 r0)`.
    #[inline]
    pub fn product(self, r: Self) -> Self {
        Self::new(
            self.q0 * r.q0 - self.q1 * r.q1,
            self.q0 * r.q1 + self.q1 * r.q0,
        )
    }

    /// The left-multiplication matrix `R(q) = [q  G(q)^T]`, so that
    /// `q ∘ r = R(q) r`.
    pub fn product_matrix(self) -> [[T; 2]; 2] {
        [[self.q0, -self.q1], [self.q1, self.q0]]
    }

    #[inline]
    pub fn conjugate(self) -> Self {
        Self::new(self.q0, -self.q1)
    }

    #[inline]
    pub fn norm_squared(self) -> T {
        self.q0 * self.q0 + self.q1 * self.q1
    }

    #[inline]
    pub fn norm(self) -> T {
        self.q0.hypot(self.q1)
    }

    #[inline]
    pub fn dot(self, r: Self) -> T {
        self.q0 * r.q0 + self.q1 * r.q1
    }

    pub fn scale(self, k: T) -> Self {
        Self::new(self.q0 * k, self.q1 * k)
    }

    pub fn is_finite(self) -> bool {
        self.q0.is_finite() && self.q1.is_finite()
    }

    pub fn normalize(self) -> Result<UnitComplex<T>, RotorError> {
        let n = self.norm();
        if !(n > T::lit(MIN_NORMALIZABLE)) {
            return Err(RotorError::Degenerate {
                norm: n.to_f64().unwrap_or(f64::NAN),
            });
        }
        Ok(UnitComplex(self.scale(n.recip())))
    }
}

impl<T: Scalar> Mul for Complex<T> {
    type Output = Self;

    fn mul(self, rhs: Self) -> Self {
        self.product(rhs)
    }
}

impl<T: Scalar> Neg for Complex<T> {
    type Output = Self;

    fn neg(self) -> Self {
        Self::new(-self.q0, -self.q1)
    }
}

/// A complex number constrained to the unit circle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UnitComplex<T>(Complex<T>);

impl<T: Scalar> Default for UnitComplex<T> {
    fn default() -> Self {
        Self::identity()
    }
}

impl<T: Scalar> UnitComplex<T> {
    pub fn identity() -> Self {
        Self(Complex::one())
    }

    /// `(cos theta, sin theta)`.
    pub fn from_angle(theta: T) -> Self {
        let (s, c) = theta.sin_cos();
        Self(Complex::new(c, s))
    }

    /// The upright pose balanced on the edge, `theta = pi / 4`.
    pub fn upright() -> Self {
        let h = T::FRAC_1_SQRT_2();
        Self(Complex::new(h, h))
    }

    /// Wraps `q` without checking its norm. The caller is responsible for
    /// the unit constraint; used for finite-difference perturbations.
    pub const fn new_unchecked(q: Complex<T>) -> Self {
        Self(q)
    }

    #[inline]
    pub fn q0(self) -> T {
        self.0.q0
    }

    #[inline]
    pub fn q1(self) -> T {
        self.0.q1
    }

    #[inline]
    pub fn as_complex(self) -> Complex<T> {
        self.0
    }

    /// `atan2(q1, q0)`, in `(-pi, pi]`.
    pub fn angle(self) -> T {
        let a = self.0.q1.atan2(self.0.q0);
        // atan2(-0, -1) yields -pi
        if a <= -T::PI() {
            T::PI()
        } else {
            a
        }
    }

    pub fn conjugate(self) -> Self {
        Self(self.0.conjugate())
    }

    pub fn inverse(self) -> Self {
        self.conjugate()
    }

    pub fn compose(self, r: Self) -> Self {
        Self(self.0.product(r.0))
    }

    /// Re-projects onto the unit circle after numerical drift.
    pub fn renormalize(self) -> Result<Self, RotorError> {
        self.0.normalize()
    }

    /// `G(q) = [-q1, q0]`.
    #[inline]
    pub fn tangent_row(self) -> [T; 2] {
        [-self.0.q1, self.0.q0]
    }

    /// `q_dot = G(q)^T omega`.
    #[inline]
    pub fn kinematics_rate(self, omega: T) -> Complex<T> {
        let [g0, g1] = self.tangent_row();
        Complex::new(g0 * omega, g1 * omega)
    }

    /// Recovers `omega = G(q) q_dot` from a tangent rate.
    pub fn angular_rate(self, q_dot: Complex<T>) -> T {
        let [g0, g1] = self.tangent_row();
        g0 * q_dot.q0 + g1 * q_dot.q1
    }

    /// The rotation `q_e = conj(q) ∘ q_r` taking `self` onto `reference`.
    pub fn error_to(self, reference: Self) -> Self {
        orientation_error(self, reference)
    }

    pub fn norm_defect(self) -> T {
        (self.0.norm_squared() - T::one()).abs()
    }
}

impl<T: Scalar> Mul for UnitComplex<T> {
    type Output = Self;

    fn mul(self, rhs: Self) -> Self {
        self.compose(rhs)
    }
}

impl<T: Scalar> From<UnitComplex<T>> for Complex<T> {
    fn from(q: UnitComplex<T>) -> Self {
        q.0
    }
}

#[inline]
pub fn product<T: Scalar>(q: Complex<T>, r: Complex<T>) -> Complex<T> {
    q.product(r)
}

/// `q_e = conj(q) ∘ q_r`, so that `q ∘ q_e = q_r`.
pub fn orientation_error<T: Scalar>(q: UnitComplex<T>, q_r: UnitComplex<T>) -> UnitComplex<T> {
    q.conjugate().compose(q_r)
}

/// `sigma_e = q_e1 / q_e0 = tan(theta_e)`, refusing `|q_e0| <= eps`.
pub fn error_tangent<T: Scalar>(q_e: UnitComplex<T>, eps: T) -> Result<T, RotorError> {
    if !(q_e.q0().abs() > eps) {
        return Err(RotorError::Singular {
            q_e0: q_e.q0().to_f64().unwrap_or(f64::NAN),
            eps: eps.to_f64().unwrap_or(f64::NAN),
        });
    }
    Ok(q_e.q1() / q_e.q0())
}
