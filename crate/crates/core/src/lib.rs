//! Numerical laboratory for a two-species chemo-repellent reaction-diffusion
//! model.
//!
//! A bacterial colony `v` produces a chemical `c` that repels an invading
//! species `u`. The crate covers four views of the same system:
//!
//! * [`solver`]: explicit finite-difference integration of the full
//!   non-dimensional PDE system on the unit square,
//! * [`analytic`]: closed-form stationary solutions on the unit-area disk,
//!   the equilibrium front radius, the circular-front ODE and linear
//!   stability rates,
//! * [`front`]: contour extraction and the numeric-vs-analytic comparison,
//! * [`scenario`]: the three reference experiments (single colony, slowly
//!   diffusing colony, two colonies).
//!
//! The non-dimensional system is
//!
//! ```text
//! u_t = Du Δu + λ u (1-u)(u-u*) + χ0 ∇·(u ∇c)
//! v_t = Dv Δv + β v (1-v)(v-v*)
//! c_t = ½ Δc + δ v - c
//! ```
//!
//! with no-flux boundary conditions for all three species.

pub mod analytic;
pub mod field;
pub mod front;
pub mod params;
pub mod scenario;
pub mod solver;
pub mod specfun;

pub use analytic::{AnalyticReport, AnalyticSteadyState, FrontEquilibrium, PolynomialCoefficients};
pub use field::{Axis, Field, StateSnapshot};
pub use front::{ComparisonReport, FrontContour, RadiusEstimate};
pub use params::{DimensionalParameters, Parameters, RunConfig, Scenario};
pub use solver::{RunManifest, StepperState};
pub use specfun::BesselMode;

/// Radius of the disk with unit area, `1/√π`.
pub const DISK_RADIUS: f64 = 0.564_189_583_547_756_3;
