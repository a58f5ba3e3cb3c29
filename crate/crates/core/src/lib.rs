//! Spectral Galerkin machinery for the 3D incompressible Navier-Stokes
//! equations on the periodic box, driven by additive trace-class noise.
//!
//! The crate is organised around a divergence-free Fourier representation
//! of vector fields ([`SpectralField`]) on the box `[0,2pi)^3`, with the
//! Stokes eigenstructure `lambda_k = |k|^2` available in closed form.
//! On top of that sit:
//!
//! * [`noise`] — covariance construction and Brownian path sampling with
//!   values in `D(A^delta)`,
//! * [`stokes`] — the exact per-mode Ornstein-Uhlenbeck integration of the
//!   linear Stokes system and its stationary law,
//! * [`solver`] — the nonlinear Galerkin solver built from a per-step
//!   contraction fixed point,
//! * [`certificates`] — numerical certification of the energy identities
//!   and the local energy inequality,
//! * [`stationary`] — path-space shifts, the metric, Krylov-Bogoliubov
//!   time averages and dissipation-rate estimation,
//! * [`analysis`] — standalone verifiers for the supporting inequalities
//!   (fractional Sobolev norms, Gronwall, local Sobolev, Poincare).
//!
//! All spatial integrals use the normalised measure `dx / (2pi)^3`, so the
//! `H` norm is the plain Parseval sum of squared coefficients and the box
//! volume never appears in the bookkeeping.
//!
//! Core numerics are generic over the scalar type via [`Scalar`]; the
//! concrete `f64` aliases at the crate root are what the binary uses.

pub mod analysis;
pub mod basis;
pub mod bump;
pub mod certificates;
pub mod error;
pub mod field;
pub mod noise;
pub mod scalar;
pub mod snapshot;
pub mod solver;
pub mod stationary;
pub mod stats;
pub mod stokes;

pub use basis::{Basis, BasisSpec};
pub use error::{Error, Result};
pub use scalar::Scalar;

/// Concrete `f64` aliases; the CLI and the acceptance suite work with these.
pub type Field = field::SpectralField<f64>;
pub type Grid = field::GridField<f64>;
pub type ScalarField = field::ScalarSpectralField<f64>;
pub type Path = noise::BrownianPath<f64>;
pub type Covariance = noise::CovarianceSpec<f64>;
pub type Forcing = stokes::ForcingSpec<f64>;
pub type StokesTraj = stokes::StokesTrajectory<f64>;
pub type Traj = solver::Trajectory<f64>;
