//! Dwell: observation-time allocation for electronically steered radars.
//!
//! An ESA radar repoints its beam instantaneously, so a surveillance budget
//! of `T` milliseconds can be split freely across space directions. This
//! crate answers the question "how long should each target (or direction,
//! or sensor) be observed?" for three settings:
//!
//! - [`detection`] — the single-sensor/single-target physics: SNR,
//!   Swerling-1 detection probability, optimal splitting into elementary
//!   looks, and the exponential law `P_d = 1 − exp(−t/τ)`.
//! - [`waterfill`] — the budget split across known targets that maximizes
//!   `Σ ε_i·(1 − exp(−t_i/τ_i))` subject to `Σ t_i = T`, by the
//!   Lagrange-multiplier water-filling solution.
//! - [`probmap`] — the same allocation when target positions are known
//!   only as Gaussian priors: grid the space, integrate priors into cell
//!   occupancy masses, fit each direction's union detection probability to
//!   `exp(−ω·t^(−n))`, and reduce to a per-direction time constant.
//! - [`fleet`] — several radars against several targets: per-sensor
//!   allocations, OR-fused pseudo-sensors, exhaustive assignment, and an
//!   event-driven observation timeline over `[0, T]`.
//!
//! All solvers are pure functions over plain data; nothing here spawns
//! threads or holds global state.

// Input validation uses `!(x > 0.0)` on purpose: the negation rejects NaN,
// which `x <= 0.0` would wave through.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod detection;
mod error;
pub mod fleet;
pub mod probmap;
pub mod waterfill;

pub use detection::{Geometry, Point, RadarModel};
pub use error::{Error, Result};
pub use fleet::{FleetScenario, PlanTimeline, PseudoSensor};
pub use probmap::{GaussianPrior, SurveillanceGrid};
pub use waterfill::{Allocation, AllocationProblem};
