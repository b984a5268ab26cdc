//! Calibration experiment design for serial manipulators.
//!
//! Positions-only geometric models, least-squares identification, plan
//! quality metrics, closed forms for the planar two-link arm, a multi-start
//! plan optimizer and Monte Carlo validation of identification campaigns.

pub mod analytic;
pub mod error;
pub mod identification;
pub mod kinematics;
pub mod metrics;
pub mod models;
pub mod montecarlo;
pub mod optimizer;
pub mod plan;

pub use error::{Error, NullDirection, Result};
pub use plan::{Plan, PlanEntry, TestPose};
