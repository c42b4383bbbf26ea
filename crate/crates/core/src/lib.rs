//! Single-mode squeezing in a three-waveguide coupler with second-harmonic
//! generation, computed three independent ways:
//!
//! * [`positivep`]: stochastic positive-P trajectories averaged over a
//!   reproducible parallel ensemble,
//! * [`perturbative`]: the coupled coefficient equations of the
//!   Heisenberg-picture mode solutions and their closed-form variances,
//! * [`fockoracle`]: exact Schrödinger evolution in a truncated six-mode
//!   Fock space, used as ground truth at small photon numbers.
//!
//! All engines are generic over the scalar type ([`Real`], implemented for
//! `f32` and `f64`). The aliases below fix the scalar to `f64`.

pub mod cli;
pub mod error;
pub mod fockoracle;
pub mod model;
pub mod perturbative;
pub mod positivep;
pub mod quadrature;
pub mod rk4;
pub mod scalar;

pub use error::{Error, Result};
pub use model::{preset_scenario, scale_dimensionless, Direction, SCENARIO_NAMES};
pub use quadrature::{QuadratureSeries, SHOT_NOISE};
pub use scalar::Real;

pub type CouplerParams64 = model::CouplerParams<f64>;
pub type InitialConditions64 = model::InitialConditions<f64>;
pub type TimeGrid64 = model::TimeGrid<f64>;
pub type Scenario64 = model::Scenario<f64>;
pub type PhaseSpaceState64 = positivep::PhaseSpaceState<f64>;
pub type MomentAccumulator64 = positivep::MomentAccumulator<f64>;
pub type CoeffState64 = perturbative::CoeffState<f64>;
pub type FockState64 = fockoracle::FockState<f64>;
pub type QuadratureSeries64 = quadrature::QuadratureSeries<f64>;

pub type CouplerParams32 = model::CouplerParams<f32>;
pub type PhaseSpaceState32 = positivep::PhaseSpaceState<f32>;
pub type CoeffState32 = perturbative::CoeffState<f32>;
