//! Simulation and sizing toolkit for a ducted tilt-rotor quadrotor.
//!
//! The crate is layered bottom-up:
//!
//! * [`linsys`] – polynomial and transfer-function algebra, state-space
//!   realization, root finding and a fixed-step RK4 integrator.
//! * [`vehicle`] – motor, altitude and roll plants plus the per-motor thrust
//!   allocator with failure handling.
//! * [`synthesis`] – PID transfer functions, the closed-loop quartic,
//!   pole placement and stability verdicts (roots and Routh–Hurwitz).
//! * [`scenario`] – nonlinear closed-loop simulations with saturation and
//!   failure injection, and step-response metrics.
//! * [`perf`] – disk loading, momentum-theory hover power, drag polar,
//!   calibration, top speed, rate of climb, endurance and range.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod linsys;
pub mod perf;
pub mod presets;
pub mod scenario;
pub mod synthesis;
pub mod vehicle;

pub use error::{Error, Result};
pub use linsys::{
    integrate_fixed_step, saturate, Polynomial, RationalTransfer, StateSpaceModel, TimeSeries,
    Trajectory,
};
pub use num_complex::Complex64;
