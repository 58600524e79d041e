//! Replicator dynamics for a cyclic rock-paper-scissors game whose payoff
//! matrix is itself steered by a second replicator dynamic on environment
//! weights.
//!
//! The population `x` follows `x_i' = x_i (P^w x)_i` with `P^w` a convex
//! combination of matrices that each favor one strategy; the weights follow
//! `w_i' = w_i (<w, x> - x_i)`, boosting the matrices of rare strategies.
//! `D(x) + mu D(w)` with `D(v) = -sum ln v_i` is a constant of motion, and
//! the field is divergence free in log-ratio coordinates, so orbits stay in
//! the interior and keep coming back near where they started.
//!
//! ```
//! use rpsflow_core::{integrate, random_interior_state, IntegratorConfig, ModelParams};
//!
//! let params = ModelParams::new(3, 0.1).unwrap();
//! let start = random_interior_state(42, 3).unwrap();
//! let cfg = IntegratorConfig { t_end: 10.0, ..Default::default() };
//! let traj = integrate(&start, &params, &cfg).unwrap();
//! let c = traj.conserved();
//! assert!(((c[c.len() - 1] - c[0]) / c[0]).abs() < 1e-9);
//! ```

pub mod analysis;
pub mod error;
pub mod field;
pub mod game;
pub mod integrate;
pub mod params;
pub mod sampling;
pub mod simplex;

pub use analysis::{
    drift_stats, ensemble_spread, ensemble_spread_with, recurrence_scan, Approach, DriftStats,
    RecurrenceConfig, RecurrenceReport, VolumeSeries,
};
pub use error::{Error, Result};
pub use field::{
    conserved_quantity, log_barrier, renormalized_field, simplex_field, transformed_field, FnField,
    Renormalized, Reversed, SimplexSystem, Space, StaticReplicator, TransformedSystem, VectorField,
};
pub use game::{favor_matrix, fitness, payoff_matrix, rps_base_matrix, PayoffMatrix};
pub use integrate::{
    divergence, integrate, jacobian_trace_along, solve, step_rk4, IntegratorConfig, Method,
    Projection, Trajectory, TrajectoryMeta,
};
pub use params::ModelParams;
pub use sampling::{random_interior_state, InteriorSampler};
pub use simplex::{
    inverse_transform, transform, try_transform, SimplexPoint, SystemState, TransformedState,
};
