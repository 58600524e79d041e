//! Fixtures shared by the benchmarks.

use rpsflow_core::{random_interior_state, IntegratorConfig, ModelParams, SystemState};

/// The reference problem: three strategies, `mu = 0.1`, seeded start.
pub fn flagship(n: usize) -> (SystemState, ModelParams) {
    (
        random_interior_state(42, n).expect("n >= 3"),
        ModelParams::new(n, 0.1).expect("valid parameters"),
    )
}

pub fn short_run(t_end: f64) -> IntegratorConfig {
    IntegratorConfig {
        t_end,
        ..Default::default()
    }
}
