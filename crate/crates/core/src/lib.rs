//! Simulation, control and verification toolkit for a reaction-wheel
//! inverted pendulum balancing on one edge (the 1D Cubli).
//!
//! Attitude is carried as a unit complex number rather than an angle. The
//! numerical core is generic over [`Scalar`] (`f32` or `f64`); the aliases
//! below fix it to `f64`, which is what the verification tolerances assume.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod control;
pub mod plant;
pub mod rotor;
pub mod scalar;
pub mod sim;

pub use scalar::Scalar;

pub type Complex64 = rotor::Complex<f64>;
pub type UnitComplex64 = rotor::UnitComplex<f64>;
pub type UnitComplex32 = rotor::UnitComplex<f32>;
pub type CubliParams64 = plant::CubliParams<f64>;
pub type DerivedParams64 = plant::DerivedParams<f64>;
pub type FrictionParams64 = plant::FrictionParams<f64>;
pub type State64 = plant::State<f64>;
pub type Plant64 = plant::Plant<f64>;
pub type Plant32 = plant::Plant<f32>;
pub type DesignSpec64 = control::DesignSpec<f64>;
pub type Gains64 = control::Gains<f64>;
pub type Controller64 = control::Controller<f64>;
pub type Matrix64 = analysis::Matrix<f64>;
pub type Polynomial64 = analysis::Polynomial<f64>;
pub type Scenario64 = sim::Scenario<f64>;
pub type TimeSeries64 = sim::TimeSeries<f64>;
