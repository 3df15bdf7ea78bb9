//! Polynomial and transfer-function algebra, realization and integration.

pub mod integrate;
pub mod poly;
pub mod state_space;
pub mod transfer;

pub use integrate::{integrate_fixed_step, saturate, Channel, TimeSeries, Trajectory, DEFAULT_DT};
pub use poly::{poly_mul, poly_roots, Polynomial};
pub use state_space::{tf_to_ss, StateSpaceModel};
pub use transfer::{tf_feedback_unity, tf_series, RationalTransfer};
