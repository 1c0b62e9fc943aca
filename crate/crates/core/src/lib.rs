//! Free-boundary N-star Euler–Poisson laboratory in rescaled Lagrangian
//! coordinates.
//!
//! The numerical core is generic over [`Scalar`] (`f32`, `f64`); the exact
//! polynomial algebra in [`domain::poly`] and [`domain::diffop`] only needs a
//! [`Ring`] and is exercised with rationals in the tests. The `f64` aliases
//! below are what the command line tool uses.

pub mod config;
pub mod diagnostics;
pub mod domain;
pub mod dynamics;
pub mod error;
pub mod gravity;
pub mod identities;
pub mod kinematics;
pub mod linalg;
pub mod pointmass;
pub mod profiles;
pub mod scalar;
pub mod separation;
pub mod simulation;

pub use error::{Error, Result};
pub use scalar::{Ring, Scalar};

pub type Grid = domain::ReferenceGrid<f64>;
pub type Field = domain::FieldRep<f64>;
pub type State = kinematics::FlowState<f64>;
pub type Frame = kinematics::StarFrame<f64>;
pub type Profile = profiles::DensityProfile<f64>;
pub type Dynamics = dynamics::Model<f64>;
pub type Energy = diagnostics::EnergyReport<f64>;

pub use config::{RunConfig, RunSetup};
pub use simulation::{simulate, RunStatus, SimulationOutput};
