//! Numerical integration of the coupled game and trajectory recording.

mod liouville;
mod rk;

pub use liouville::{accumulate_divergence, divergence, jacobian_trace_along, DIVERGENCE_STEP};
pub use rk::rk4_step;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{
    conserved_from_coords, Renormalized, SimplexSystem, Space, TransformedSystem, VectorField,
};
use crate::params::ModelParams;
use crate::simplex::{SimplexPoint, SystemState};

use rk::DormandPrince;

/// Adaptive steps below this size abort the run.
pub const MIN_STEP: f64 = 1e-14;

const SAFETY: f64 = 0.9;
const MIN_FACTOR: f64 = 0.2;
const MAX_FACTOR: f64 = 5.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Method {
    #[serde(rename = "fixed-rk4")]
    FixedRk4,
    #[serde(rename = "adaptive-rk45")]
    AdaptiveRk45,
}

impl std::fmt::Display for Method {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Method::FixedRk4 => "fixed-rk4",
            Method::AdaptiveRk45 => "adaptive-rk45",
        })
    }
}

impl std::str::FromStr for Method {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "fixed-rk4" => Ok(Method::FixedRk4),
            "adaptive-rk45" => Ok(Method::AdaptiveRk45),
            other => Err(format!(
                "unknown method `{other}`, expected fixed-rk4 or adaptive-rk45"
            )),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct IntegratorConfig {
    pub method: Method,
    pub space: Space,
    pub t_end: f64,
    /// Fixed step for RK4, initial step for the adaptive pair.
    pub dt: f64,
    pub rtol: f64,
    pub atol: f64,
    pub max_step: f64,
    pub sample_interval: f64,
    /// Smallest simplex coordinate tolerated before the run is aborted.
    pub boundary_floor: f64,
    pub renormalize_field: bool,
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        IntegratorConfig {
            method: Method::AdaptiveRk45,
            space: Space::Transformed,
            t_end: 100.0,
            dt: 1e-2,
            rtol: 1e-10,
            atol: 1e-10,
            max_step: 1.0,
            sample_interval: 0.01,
            boundary_floor: 1e-12,
            renormalize_field: false,
        }
    }
}

impl IntegratorConfig {
    pub fn validate(&self) -> Result<()> {
        let positive = |field: &'static str, v: f64| {
            if v.is_finite() && v > 0.0 {
                Ok(())
            } else {
                Err(Error::param(
                    field,
                    format!("must be finite and > 0, got {v}"),
                ))
            }
        };
        positive("t_end", self.t_end)?;
        positive("dt", self.dt)?;
        positive("max_step", self.max_step)?;
        positive("sample_interval", self.sample_interval)?;
        if self.dt > self.max_step {
            return Err(Error::param(
                "dt",
                format!(
                    "must not exceed max_step ({}), got {}",
                    self.max_step, self.dt
                ),
            ));
        }
        for (field, v) in [("rtol", self.rtol), ("atol", self.atol)] {
            if !(v > 0.0 && v < 1.0) {
                return Err(Error::param(field, format!("must lie in (0, 1), got {v}")));
            }
        }
        if !(self.boundary_floor.is_finite() && self.boundary_floor >= 0.0) {
            return Err(Error::param(
                "boundary_floor",
                format!("must be finite and >= 0, got {}", self.boundary_floor),
            ));
        }
        Ok(())
    }

    /// Sample times `0, s, 2s, ..., t_end`; the last gap may be shorter.
    pub fn sample_times(&self) -> Vec<f64> {
        let count = (self.t_end / self.sample_interval - 1e-9).ceil().max(1.0) as usize;
        let mut times: Vec<f64> = (0..count)
            .map(|k| k as f64 * self.sample_interval)
            .collect();
        times.push(self.t_end);
        times
    }
}

/// Everything needed to reproduce a trajectory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryMeta {
    pub params: ModelParams,
    pub config: IntegratorConfig,
    pub initial: SystemState,
}

/// Sampled orbit, always stored in simplex coordinates.
///
/// Sample `k` occupies `coords[2nk..2n(k+1)]` as `[x_1..x_n, w_1..w_n]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    n: usize,
    times: Vec<f64>,
    coords: Vec<f64>,
    conserved: Vec<f64>,
    steps: Vec<f64>,
    meta: TrajectoryMeta,
}

impl Trajectory {
    fn with_capacity(meta: TrajectoryMeta, samples: usize) -> Self {
        let n = meta.params.n;
        Trajectory {
            n,
            times: Vec::with_capacity(samples),
            coords: Vec::with_capacity(samples * 2 * n),
            conserved: Vec::with_capacity(samples),
            steps: Vec::with_capacity(samples),
            meta,
        }
    }

    /// Reassembles a trajectory from parallel columns, e.g. after parsing a file.
    pub fn from_parts(
        meta: TrajectoryMeta,
        times: Vec<f64>,
        coords: Vec<f64>,
        conserved: Vec<f64>,
        steps: Vec<f64>,
    ) -> Result<Self> {
        let n = meta.params.n;
        let len = times.len();
        if coords.len() != 2 * n * len {
            return Err(Error::DimensionMismatch {
                expected: 2 * n * len,
                found: coords.len(),
            });
        }
        for column in [&conserved, &steps] {
            if column.len() != len {
                return Err(Error::DimensionMismatch {
                    expected: len,
                    found: column.len(),
                });
            }
        }
        if times.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::param("times", "must be strictly increasing"));
        }
        if let Some(index) = coords.iter().position(|&c| !(c.is_finite() && c > 0.0)) {
            return Err(Error::NonPositiveCoordinate {
                index: index % (2 * n),
                value: coords[index],
            });
        }
        Ok(Trajectory {
            n,
            times,
            coords,
            conserved,
            steps,
            meta,
        })
    }

    fn push(&mut self, t: f64, u: &[f64], c: f64, h: f64) {
        self.times.push(t);
        self.coords.extend_from_slice(u);
        self.conserved.push(c);
        self.steps.push(h);
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn conserved(&self) -> &[f64] {
        &self.conserved
    }

    pub fn steps(&self) -> &[f64] {
        &self.steps
    }

    pub fn meta(&self) -> &TrajectoryMeta {
        &self.meta
    }

    /// Flat `[x, w]` coordinates of sample `k`.
    pub fn sample(&self, k: usize) -> &[f64] {
        let w = 2 * self.n;
        &self.coords[k * w..(k + 1) * w]
    }

    pub fn samples(&self) -> impl ExactSizeIterator<Item = &[f64]> + '_ {
        self.coords.chunks_exact(2 * self.n)
    }

    pub fn state(&self, k: usize) -> SystemState {
        let (x, w) = self.sample(k).split_at(self.n);
        SystemState::new(
            SimplexPoint::from_normalized_unchecked(x.to_vec()),
            SimplexPoint::from_normalized_unchecked(w.to_vec()),
        )
        .expect("trajectory samples share one dimension")
    }

    pub fn last_state(&self) -> Option<SystemState> {
        (!self.is_empty()).then(|| self.state(self.len() - 1))
    }
}

/// How the state is corrected after every accepted step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Projection {
    None,
    /// Divide each of the two `n`-blocks by its sum, then check the first
    /// `guarded` coordinates against the floor.
    SimplexPair {
        n: usize,
        floor: f64,
        guarded: usize,
    },
}

impl Projection {
    fn apply(self, t: f64, u: &mut [f64]) -> Result<()> {
        if let Projection::SimplexPair { n, floor, guarded } = self {
            for block in u.chunks_exact_mut(n) {
                let sum: f64 = block.iter().sum();
                for c in block.iter_mut() {
                    *c /= sum;
                }
            }
            check_floor(t, &u[..guarded], floor)?;
        }
        Ok(())
    }
}

fn check_floor(t: f64, u: &[f64], floor: f64) -> Result<()> {
    match u.iter().position(|&c| c.is_nan() || c < floor) {
        Some(index) => Err(Error::BoundaryApproach {
            t,
            index,
            value: u[index],
        }),
        None => Ok(()),
    }
}

/// Integrates `field` from `u0` over `[0, cfg.t_end]`, calling `on_sample(t, u, h)`
/// at every sample time with the state and the last step size taken. Steps are
/// shortened so that every sample time is hit exactly. Returns the final state.
pub fn solve<F, S>(
    field: &F,
    u0: &[f64],
    cfg: &IntegratorConfig,
    projection: Projection,
    mut on_sample: S,
) -> Result<Vec<f64>>
where
    F: VectorField + ?Sized,
    S: FnMut(f64, &[f64], f64) -> Result<()>,
{
    cfg.validate()?;
    if u0.len() != field.dim() {
        return Err(Error::DimensionMismatch {
            expected: field.dim(),
            found: u0.len(),
        });
    }
    let times = cfg.sample_times();
    let mut u = u0.to_vec();
    let mut next = vec![0.0; u.len()];
    let mut t = 0.0;
    let mut last_h = 0.0;
    on_sample(t, &u, last_h)?;

    match cfg.method {
        Method::FixedRk4 => {
            for &target in &times[1..] {
                let span = target - t;
                let count = (span / cfg.dt - 1e-9).ceil().max(1.0);
                let h = span / count;
                for k in 0..count as usize {
                    rk4_step(field, &u, h, &mut next);
                    std::mem::swap(&mut u, &mut next);
                    t = if k + 1 == count as usize {
                        target
                    } else {
                        t + h
                    };
                    check_finite_state(t, &u)?;
                    projection.apply(t, &mut u)?;
                }
                last_h = h;
                on_sample(t, &u, last_h)?;
            }
        }
        Method::AdaptiveRk45 => {
            let mut stepper = DormandPrince::new(u.len());
            let mut h = cfg.dt.min(cfg.max_step);
            for &target in &times[1..] {
                while t < target {
                    let remaining = target - t;
                    let lands = h >= remaining || remaining - h < 1e-3 * h;
                    let h_try = if lands { remaining } else { h };
                    let err = stepper.try_step(field, &u, h_try, cfg.rtol, cfg.atol, &mut next);
                    if !err.is_finite() {
                        h = h_try * MIN_FACTOR;
                    } else if err <= 1.0 {
                        stepper.accept();
                        std::mem::swap(&mut u, &mut next);
                        t = if lands { target } else { t + h_try };
                        last_h = h_try;
                        check_finite_state(t, &u)?;
                        projection.apply(t, &mut u)?;
                        let factor = if err == 0.0 {
                            MAX_FACTOR
                        } else {
                            (SAFETY * err.powf(-0.2)).clamp(MIN_FACTOR, MAX_FACTOR)
                        };
                        // A step shortened to land on a sample says little about
                        // the natural step size, so keep the earlier proposal.
                        let proposal = if lands && h_try < h {
                            h
                        } else {
                            h_try * factor
                        };
                        h = proposal.min(cfg.max_step);
                        continue;
                    } else {
                        let factor = (SAFETY * err.powf(-0.2)).clamp(MIN_FACTOR, 1.0);
                        h = h_try * factor;
                    }
                    if h < MIN_STEP {
                        return Err(Error::StepUnderflow { t, h });
                    }
                }
                on_sample(t, &u, last_h)?;
            }
        }
    }
    Ok(u)
}

fn check_finite_state(t: f64, u: &[f64]) -> Result<()> {
    if u.iter().all(|c| c.is_finite()) {
        Ok(())
    } else {
        Err(Error::NonFiniteState { t })
    }
}

/// One RK4 step of the coupled game in the chosen chart, returned in simplex
/// coordinates. Simplex-space steps are renormalized onto the simplex.
pub fn step_rk4(
    state: &SystemState,
    params: &ModelParams,
    space: Space,
    h: f64,
    boundary_floor: f64,
) -> Result<SystemState> {
    params.validate()?;
    params.check_dim(state.n())?;
    if !(h.is_finite() && h > 0.0) {
        return Err(Error::param(
            "h",
            format!("must be finite and > 0, got {h}"),
        ));
    }
    let n = params.n;
    let u = space.encode(state);
    let mut next = vec![0.0; u.len()];
    match space {
        Space::Simplex => rk4_step(&SimplexSystem::new(params.clone())?, &u, h, &mut next),
        Space::Transformed => rk4_step(&TransformedSystem::new(params.clone())?, &u, h, &mut next),
    }
    check_finite_state(h, &next)?;
    let mut out = vec![0.0; 2 * n];
    space.decode_into(&next, &mut out);
    Projection::SimplexPair {
        n,
        floor: boundary_floor,
        guarded: guarded_len(params),
    }
    .apply(h, &mut out)?;
    SystemState::from_concat(&out)
}

/// Number of leading `[x, w]` coordinates held off the boundary by the
/// log-barrier invariant. With a single `mu = 0` the invariant is `D(x)` alone
/// and the weights may legitimately decay towards the boundary.
fn guarded_len(params: &ModelParams) -> usize {
    if params.is_exploration() || params.mu > 0.0 {
        2 * params.n
    } else {
        params.n
    }
}

/// Integrates the coupled game from `state0` and records the orbit.
pub fn integrate(
    state0: &SystemState,
    params: &ModelParams,
    cfg: &IntegratorConfig,
) -> Result<Trajectory> {
    params.validate()?;
    params.check_dim(state0.n())?;
    cfg.validate()?;
    let meta = TrajectoryMeta {
        params: params.clone(),
        config: cfg.clone(),
        initial: state0.clone(),
    };
    match (cfg.space, cfg.renormalize_field) {
        (Space::Simplex, false) => record(SimplexSystem::new(params.clone())?, meta),
        (Space::Simplex, true) => record(Renormalized(SimplexSystem::new(params.clone())?), meta),
        (Space::Transformed, false) => record(TransformedSystem::new(params.clone())?, meta),
        (Space::Transformed, true) => {
            record(Renormalized(TransformedSystem::new(params.clone())?), meta)
        }
    }
}

fn record<F: VectorField>(field: F, meta: TrajectoryMeta) -> Result<Trajectory> {
    let cfg = meta.config.clone();
    let n = meta.params.n;
    let mu = meta.params.mu;
    let space = cfg.space;
    let u0 = space.encode(&meta.initial);
    let guarded = guarded_len(&meta.params);
    let projection = match space {
        Space::Simplex => Projection::SimplexPair {
            n,
            floor: cfg.boundary_floor,
            guarded,
        },
        Space::Transformed => Projection::None,
    };
    let mut traj = Trajectory::with_capacity(meta, cfg.sample_times().len());
    let mut simplex = vec![0.0; 2 * n];
    let initial = traj.meta.initial.to_concat();
    solve(&field, &u0, &cfg, projection, |t, u, h| {
        // The chart round trip is not bit exact; keep the caller's start point.
        if t == 0.0 {
            simplex.copy_from_slice(&initial);
        } else {
            space.decode_into(u, &mut simplex);
        }
        check_floor(t, &simplex[..guarded], cfg.boundary_floor)?;
        let (x, w) = simplex.split_at(n);
        let c = conserved_from_coords(x, w, mu)?;
        traj.push(t, &simplex, c, h);
        Ok(())
    })?;
    Ok(traj)
}
