//! Finite-difference divergence and its time integral along an orbit.
//!
//! For a flow `u' = g(u)` the log of the volume of a small blob transported
//! along the orbit changes at rate `div g`, so `∫ div g dt` is the accumulated
//! log-volume change. It vanishes for the log-ratio field of the coupled game.

use crate::error::{Error, Result};
use crate::field::{TransformedSystem, VectorField};
use crate::params::ModelParams;
use crate::simplex::log_ratio_into;

use super::Trajectory;

/// Central-difference step used for divergence estimates.
pub const DIVERGENCE_STEP: f64 = 1e-6;

/// `sum_i ∂g_i/∂u_i` by central differences with absolute step `h` per coordinate.
pub fn divergence<F: VectorField + ?Sized>(field: &F, u: &[f64], h: f64) -> f64 {
    let d = field.dim();
    let mut probe = u.to_vec();
    let mut plus = vec![0.0; d];
    let mut minus = vec![0.0; d];
    let mut total = 0.0;
    for i in 0..d {
        probe[i] = u[i] + h;
        field.eval(&probe, &mut plus);
        probe[i] = u[i] - h;
        field.eval(&probe, &mut minus);
        probe[i] = u[i];
        total += (plus[i] - minus[i]) / (2.0 * h);
    }
    total
}

/// Trapezoidal `∫ div g dt` over samples `(times[k], points[k])`.
pub fn accumulate_divergence<'a, F, I>(field: &F, times: &[f64], points: I) -> f64
where
    F: VectorField + ?Sized,
    I: IntoIterator<Item = &'a [f64]>,
{
    let mut total = 0.0;
    let mut prev: Option<(f64, f64)> = None;
    for (&t, u) in times.iter().zip(points) {
        let div = divergence(field, u, DIVERGENCE_STEP);
        if let Some((t0, d0)) = prev {
            total += 0.5 * (t - t0) * (d0 + div);
        }
        prev = Some((t, div));
    }
    total
}

/// Accumulated log-volume change of the log-ratio field along `traj`.
pub fn jacobian_trace_along(traj: &Trajectory, params: &ModelParams) -> Result<f64> {
    params.check_dim(traj.n())?;
    if traj.is_empty() {
        return Err(Error::EmptyTrajectory);
    }
    let field = TransformedSystem::new(params.clone())?;
    let n = traj.n();
    let mut charted = vec![0.0; 2 * (n - 1)];
    let mut total = 0.0;
    let mut prev: Option<(f64, f64)> = None;
    for (&t, u) in traj.times().iter().zip(traj.samples()) {
        let (x, w) = u.split_at(n);
        let (y, z) = charted.split_at_mut(n - 1);
        log_ratio_into(x, y);
        log_ratio_into(w, z);
        let div = divergence(&field, &charted, DIVERGENCE_STEP);
        if let Some((t0, d0)) = prev {
            total += 0.5 * (t - t0) * (d0 + div);
        }
        prev = Some((t, div));
    }
    Ok(total)
}
