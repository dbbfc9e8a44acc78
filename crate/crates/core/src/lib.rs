//! Overnight-rate term-structure analytics for a Gaussian short-rate model
//! with roll-over discontinuities and scheduled jumps.
//!
//! The rate follows a Hull-White-type dynamic with deterministic drift,
//! mean reversion `beta`, diffusion `sigma` and independent Gaussian jumps
//! at known dates. Benchmark rates accrue against the measure
//! `eta(du) = du + sum_j delta_{t_j}`, whose atoms sit at roll-over dates.

pub mod drift;
pub mod error;
pub mod hedge;
pub mod model;
pub mod kernels;
pub mod mc;
pub mod num;
pub mod pricing;
pub mod quad;
pub mod riccati;
pub mod schedule;
pub mod stats;

pub use drift::{Drift, PiecewiseConstant};
pub use error::{Error, Result};
pub use num::Real;
pub use schedule::Schedule;

/// Double-precision aliases for the generic analytic layer; simulation,
/// hedging and the Riccati engine are `f64`-only.
pub type ModelF64 = model::GaussHwModel<f64>;
pub type MultiModelF64 = model::MultiFactorModel<f64>;
pub type ParamsF64 = model::HullWhiteParams<f64>;
pub type ScheduleF64 = Schedule<f64>;
pub type DriftF64 = Drift<f64>;
pub type CapletF64 = pricing::CapletSpec<f64>;
pub type FixingsF64 = pricing::Fixings<f64>;
pub type DiscountCurveF64 = pricing::DiscountCurve<f64>;
