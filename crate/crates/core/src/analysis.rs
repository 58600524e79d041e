//! Empirical checks over recorded orbits: returns to the starting point,
//! drift of the log-barrier invariant, and phase-space volume of small clouds.

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{conserved_from_coords, TransformedSystem, VectorField};
use crate::integrate::{solve, IntegratorConfig, Projection, Trajectory};
use crate::params::ModelParams;
use crate::simplex::{euclidean, SystemState};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RecurrenceConfig {
    /// Return radius, Euclidean on concatenated simplex coordinates `(x, w)`.
    pub epsilon: f64,
    /// Samples at or before this time are ignored.
    pub t_min: f64,
    pub max_returns: usize,
}

impl Default for RecurrenceConfig {
    fn default() -> Self {
        RecurrenceConfig {
            epsilon: 0.05,
            t_min: 1.0,
            max_returns: 1000,
        }
    }
}

impl RecurrenceConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.epsilon.is_finite() && self.epsilon > 0.0) {
            return Err(Error::param(
                "epsilon",
                format!("must be finite and > 0, got {}", self.epsilon),
            ));
        }
        if !(self.t_min.is_finite() && self.t_min > 0.0) {
            return Err(Error::param(
                "t_min",
                format!("must be finite and > 0, got {}", self.t_min),
            ));
        }
        Ok(())
    }
}

/// A sample time and its distance to the reference state.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Approach {
    pub time: f64,
    pub distance: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DriftStats {
    pub max_rel_drift: f64,
    pub rms_rel_drift: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RecurrenceReport {
    pub reference: SystemState,
    /// One entry per maximal run of sub-epsilon samples, at its closest sample.
    pub returns: Vec<Approach>,
    /// Closest sample after `t_min`; `None` only when no sample lies past `t_min`.
    pub global_min: Option<Approach>,
    /// Set when more than `max_returns` events were found.
    pub truncated: bool,
    pub drift: DriftStats,
}

/// Finds the returns of `traj` to its first sample.
pub fn recurrence_scan(traj: &Trajectory, cfg: &RecurrenceConfig) -> Result<RecurrenceReport> {
    cfg.validate()?;
    if traj.is_empty() {
        return Err(Error::EmptyTrajectory);
    }
    let reference = traj.sample(0);
    let mut returns = Vec::new();
    let mut truncated = false;
    let mut global_min: Option<Approach> = None;
    let mut open: Option<Approach> = None;

    let mut close = |event: Approach, returns: &mut Vec<Approach>| {
        if returns.len() < cfg.max_returns {
            returns.push(event);
        } else {
            truncated = true;
        }
    };

    for (&time, u) in traj.times().iter().zip(traj.samples()) {
        if time <= cfg.t_min {
            continue;
        }
        let here = Approach {
            time,
            distance: euclidean(u, reference),
        };
        if global_min.is_none_or(|m| here.distance < m.distance) {
            global_min = Some(here);
        }
        if here.distance < cfg.epsilon {
            open = match open {
                Some(best) if best.distance <= here.distance => Some(best),
                _ => Some(here),
            };
        } else if let Some(best) = open.take() {
            close(best, &mut returns);
        }
    }
    if let Some(best) = open {
        close(best, &mut returns);
    }

    Ok(RecurrenceReport {
        reference: traj.state(0),
        returns,
        global_min,
        truncated,
        drift: drift_stats(traj, &traj.meta().params)?,
    })
}

/// Max and RMS of `|C(t) - C(0)| / |C(0)|` over the samples of `traj`,
/// with `C` recomputed from the stored states using `params.mu`.
pub fn drift_stats(traj: &Trajectory, params: &ModelParams) -> Result<DriftStats> {
    params.check_dim(traj.n())?;
    if traj.is_empty() {
        return Err(Error::EmptyTrajectory);
    }
    let n = traj.n();
    let c_of = |u: &[f64]| {
        let (x, w) = u.split_at(n);
        conserved_from_coords(x, w, params.mu)
    };
    let c0 = c_of(traj.sample(0))?;
    if !(c0.is_finite() && c0 != 0.0) {
        return Err(Error::ZeroReference(c0));
    }
    let mut max = 0.0_f64;
    let mut sq = 0.0;
    for u in traj.samples() {
        let rel = ((c_of(u)? - c0) / c0).abs();
        max = max.max(rel);
        sq += rel * rel;
    }
    Ok(DriftStats {
        max_rel_drift: max,
        rms_rel_drift: (sq / traj.len() as f64).sqrt(),
    })
}

/// Log-determinant of the cloud covariance at each sample time.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VolumeSeries {
    pub times: Vec<f64>,
    pub log_det: Vec<f64>,
}

impl VolumeSeries {
    /// Largest `|log_det(t) - log_det(0)|`.
    pub fn max_drift(&self) -> f64 {
        let v0 = self.log_det.first().copied().unwrap_or(0.0);
        self.log_det
            .iter()
            .map(|v| (v - v0).abs())
            .fold(0.0, f64::max)
    }
}

/// Largest pairwise distance, in log-ratio coordinates, allowed in an ensemble.
pub const MAX_ENSEMBLE_DIAMETER: f64 = 1e-3;

/// Transports a small cloud of initial states with the log-ratio field and
/// tracks the log-volume of its covariance ellipsoid.
pub fn ensemble_spread(
    states0: &[SystemState],
    params: &ModelParams,
    cfg: &IntegratorConfig,
) -> Result<VolumeSeries> {
    params.validate()?;
    for s in states0 {
        params.check_dim(s.n())?;
    }
    let points: Vec<Vec<f64>> = states0
        .iter()
        .map(|s| s.to_transformed().to_concat())
        .collect();
    for (i, a) in points.iter().enumerate() {
        for b in &points[i + 1..] {
            let d = euclidean(a, b);
            if d > MAX_ENSEMBLE_DIAMETER {
                return Err(Error::DegenerateEnsemble(format!(
                    "members are {d:e} apart in log-ratio coordinates, limit {MAX_ENSEMBLE_DIAMETER:e}"
                )));
            }
        }
    }
    ensemble_spread_with(&TransformedSystem::new(params.clone())?, &points, cfg)
}

/// [`ensemble_spread`] for an arbitrary field; `points` are in the field's coordinates.
pub fn ensemble_spread_with<F: VectorField + Sync + ?Sized>(
    field: &F,
    points: &[Vec<f64>],
    cfg: &IntegratorConfig,
) -> Result<VolumeSeries> {
    let d = field.dim();
    if points.len() < d + 1 {
        return Err(Error::DegenerateEnsemble(format!(
            "need at least {} members for dimension {d}, got {}",
            d + 1,
            points.len()
        )));
    }
    let paths: Vec<Vec<f64>> = points
        .par_iter()
        .map(|p| {
            let mut path = Vec::new();
            solve(field, p, cfg, Projection::None, |_, u, _| {
                path.extend_from_slice(u);
                Ok(())
            })?;
            Ok(path)
        })
        .collect::<Result<_>>()?;

    let times = cfg.sample_times();
    let m = points.len() as f64;
    let mut log_det = Vec::with_capacity(times.len());
    for k in 0..times.len() {
        let cloud: Vec<&[f64]> = paths.iter().map(|p| &p[k * d..(k + 1) * d]).collect();
        let mut mean = vec![0.0; d];
        for u in &cloud {
            for (a, b) in mean.iter_mut().zip(*u) {
                *a += b / m;
            }
        }
        let cov = DMatrix::from_fn(d, d, |i, j| {
            cloud
                .iter()
                .map(|u| (u[i] - mean[i]) * (u[j] - mean[j]))
                .sum::<f64>()
                / (m - 1.0)
        });
        let chol = cov.cholesky().ok_or_else(|| {
            Error::DegenerateEnsemble(format!("singular covariance at t = {}", times[k]))
        })?;
        let ld = 2.0 * chol.l().diagonal().iter().map(|v| v.ln()).sum::<f64>();
        if !ld.is_finite() {
            return Err(Error::DegenerateEnsemble(format!(
                "singular covariance at t = {}",
                times[k]
            )));
        }
        log_det.push(ld);
    }
    Ok(VolumeSeries { times, log_det })
}
