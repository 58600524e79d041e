use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use rpsflow_core::integrate::DIVERGENCE_STEP;
use rpsflow_core::{
    divergence, drift_stats, integrate, inverse_transform, recurrence_scan, transform, DriftStats,
    IntegratorConfig, InteriorSampler, RecurrenceReport, SimplexPoint, Space, SystemState,
    TransformedSystem,
};
use serde::Serialize;
use serde_json::{json, Value};

use crate::config::RunConfig;
use crate::error::{CliError, Result};
use crate::output::{metadata, write_trajectory};

/// Relative drift of `C` above which a run is not considered conservative.
pub const CONSERVATION_TOL: f64 = 1e-8;
pub const DIVERGENCE_TOL: f64 = 1e-6;
pub const ROUND_TRIP_TOL: f64 = 1e-12;
pub const EQUILIBRIUM_TOL: f64 = 1e-10;
pub const TWO_SPACE_TOL: f64 = 1e-6;
/// Horizon of the simplex-vs-log-ratio comparison.
pub const TWO_SPACE_T_END: f64 = 10.0;

const DIVERGENCE_SAMPLES: usize = 100;
const ROUND_TRIP_SAMPLES: usize = 1000;

/// Opens `path` for writing, or standard output.
fn sink(path: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(
            File::create(p).map_err(|e| CliError::io("create", p, e))?,
        )),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn write_json(path: Option<&Path>, value: &Value) -> Result<()> {
    let target = path.unwrap_or(Path::new("<stdout>"));
    let mut out = sink(path)?;
    serde_json::to_writer_pretty(&mut out, value)
        .map_err(|e| CliError::io("write", target, e.into()))?;
    writeln!(out)
        .and_then(|_| out.flush())
        .map_err(|e| CliError::io("write", target, e))
}

pub fn simulate(cfg: &RunConfig) -> Result<()> {
    let start = cfg.initial_state()?;
    let traj = integrate(&start, &cfg.model, &cfg.integrator)?;
    let meta = metadata("simulate", cfg, &start);
    let path = cfg.output.path.as_deref();
    let mut out = sink(path)?;
    write_trajectory(&mut out, cfg.output.format, &meta, &traj)
        .and_then(|_| out.flush())
        .map_err(|e| CliError::io("write", path.unwrap_or(Path::new("<stdout>")), e))?;
    if path.is_some() {
        let drift = drift_stats(&traj, &cfg.model)?;
        eprintln!(
            "{} samples to t = {}, max relative C drift {:e}",
            traj.len(),
            cfg.integrator.t_end,
            drift.max_rel_drift
        );
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
    /// Measured and reported, but not held to a tolerance.
    Diagnostic,
}

#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub name: &'static str,
    pub status: Status,
    pub value: f64,
    pub tolerance: f64,
    pub detail: String,
}

impl Check {
    fn new(name: &'static str, value: f64, tolerance: f64, detail: String) -> Self {
        let status = if value < tolerance {
            Status::Pass
        } else {
            Status::Fail
        };
        Check {
            name,
            status,
            value,
            tolerance,
            detail,
        }
    }
}

fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(p, q)| (p - q).abs())
        .fold(0.0, f64::max)
}

fn seed_of(cfg: &RunConfig) -> u64 {
    match cfg.init {
        crate::config::InitSpec::Random { seed } => seed,
        crate::config::InitSpec::Explicit { .. } => crate::config::DEFAULT_SEED,
    }
}

/// Runs the invariant checks for the configured model.
pub fn verify_checks(cfg: &RunConfig) -> Result<Vec<Check>> {
    let params = &cfg.model;
    let n = params.n;
    let seed = seed_of(cfg);
    let start = cfg.initial_state()?;
    let mut checks = Vec::new();

    let traj = integrate(&start, params, &cfg.integrator)?;
    let drift = drift_stats(&traj, params)?;
    let mut conservation = Check::new(
        "conservation",
        drift.max_rel_drift,
        CONSERVATION_TOL,
        format!(
            "max relative drift of D(x) + mu D(w) over t in [0, {}]",
            cfg.integrator.t_end
        ),
    );
    if params.is_exploration() {
        conservation.status = Status::Diagnostic;
        conservation.detail += "; per-matrix mu, so no conserved quantity is claimed";
    }
    checks.push(conservation);

    let field = TransformedSystem::new(params.clone())?;
    let mut sampler = InteriorSampler::new(seed);
    let mut worst_div = 0.0_f64;
    for _ in 0..DIVERGENCE_SAMPLES {
        let u = sampler.next_state(n)?.to_transformed().to_concat();
        worst_div = worst_div.max(divergence(&field, &u, DIVERGENCE_STEP).abs());
    }
    checks.push(Check::new(
        "divergence",
        worst_div,
        DIVERGENCE_TOL,
        format!("max |div| of the log-ratio field at {DIVERGENCE_SAMPLES} random states"),
    ));

    let mut sampler = InteriorSampler::new(seed);
    let mut worst_rt = 0.0_f64;
    for k in 0..ROUND_TRIP_SAMPLES {
        let mut p = sampler.next_point(n)?;
        if k % 10 == 0 {
            // Include near-boundary points with one coordinate at 1e-6.
            let c = p.coords();
            let rest: f64 = c[1..].iter().sum();
            let mut coords = vec![1e-6];
            coords.extend(c[1..].iter().map(|v| v / rest * (1.0 - 1e-6)));
            coords.rotate_left(k % n);
            p = SimplexPoint::new(coords)?;
        }
        let back = inverse_transform(&transform(&p))?;
        for (a, b) in back.coords().iter().zip(p.coords()) {
            worst_rt = worst_rt.max(((a - b) / b).abs());
        }
    }
    checks.push(Check::new(
        "round_trip",
        worst_rt,
        ROUND_TRIP_TOL,
        format!("max relative error of the inverse chart over {ROUND_TRIP_SAMPLES} points"),
    ));

    let eq = SystemState::uniform(n)?;
    let eq_traj = integrate(&eq, params, &cfg.integrator)?;
    let reference = eq.to_concat();
    let worst_eq = eq_traj
        .samples()
        .map(|u| max_abs_diff(u, &reference))
        .fold(0.0, f64::max);
    let mut equilibrium = Check::new(
        "equilibrium",
        worst_eq,
        EQUILIBRIUM_TOL,
        format!(
            "max deviation of the uniform state over t in [0, {}]",
            cfg.integrator.t_end
        ),
    );
    if params.is_exploration() {
        // Unequal mu_i move the interior rest point away from uniform.
        equilibrium.status = Status::Diagnostic;
    }
    checks.push(equilibrium);

    let end_in = |space: Space| -> Result<SystemState> {
        let ic = IntegratorConfig {
            space,
            t_end: TWO_SPACE_T_END,
            sample_interval: TWO_SPACE_T_END,
            ..cfg.integrator.clone()
        };
        Ok(integrate(&start, params, &ic)?
            .last_state()
            .expect("trajectories hold at least the initial sample"))
    };
    let gap = end_in(Space::Simplex)?.distance(&end_in(Space::Transformed)?);
    checks.push(Check::new(
        "two_space",
        gap,
        TWO_SPACE_TOL,
        format!("distance between simplex and log-ratio endpoints at t = {TWO_SPACE_T_END}"),
    ));
    Ok(checks)
}

pub fn verify(cfg: &RunConfig) -> Result<()> {
    let start = cfg.initial_state()?;
    let checks = verify_checks(cfg)?;
    let failed: Vec<&str> = checks
        .iter()
        .filter(|c| c.status == Status::Fail)
        .map(|c| c.name)
        .collect();
    let report = json!({
        "meta": metadata("verify", cfg, &start),
        "passed": failed.is_empty(),
        "checks": checks,
    });
    write_json(cfg.output.path.as_deref(), &report)?;
    for c in &checks {
        eprintln!(
            "{:<12} {:<10} {:.3e} (tolerance {:e})",
            c.name,
            format!("{:?}", c.status).to_lowercase(),
            c.value,
            c.tolerance
        );
    }
    if failed.is_empty() {
        Ok(())
    } else {
        Err(CliError::Verification(failed.join(", ")))
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct RunSummary {
    pub samples: usize,
    pub drift: DriftStats,
    pub conserved: Option<bool>,
    pub recurrence: RecurrenceReport,
}

fn summarize(cfg: &RunConfig, traj: &rpsflow_core::Trajectory) -> Result<RunSummary> {
    let drift = drift_stats(traj, &cfg.model)?;
    let recurrence = recurrence_scan(traj, &cfg.recurrence_or_default())?;
    Ok(RunSummary {
        samples: traj.len(),
        drift,
        conserved: (!cfg.model.is_exploration()).then_some(drift.max_rel_drift < CONSERVATION_TOL),
        recurrence,
    })
}

pub fn recur(cfg: &RunConfig) -> Result<()> {
    let start = cfg.initial_state()?;
    let traj = integrate(&start, &cfg.model, &cfg.integrator)?;
    let summary = summarize(cfg, &traj)?;
    let mut resolved = cfg.clone();
    resolved.recurrence = Some(cfg.recurrence_or_default());
    let report = json!({
        "meta": metadata("recur", &resolved, &start),
        "report": summary,
    });
    write_json(cfg.output.path.as_deref(), &report)?;
    let r = &summary.recurrence;
    eprintln!(
        "{} returns within {} after t = {}; closest approach {}",
        r.returns.len(),
        resolved.recurrence.as_ref().map_or(0.0, |c| c.epsilon),
        resolved.recurrence.as_ref().map_or(0.0, |c| c.t_min),
        r.global_min.map_or("none".to_string(), |a| format!(
            "{:.3e} at t = {}",
            a.distance, a.time
        ))
    );
    Ok(())
}

/// File stem for one sweep entry, e.g. `mu_0.1`.
pub fn sweep_stem(mu: f64) -> String {
    format!("mu_{mu:?}")
}

/// Integrates once per `mu` in the sweep list, in parallel, writing
/// `<out>/mu_<mu>.<csv|jsonl>` and `<out>/mu_<mu>.report.json` for each.
pub fn sweep(cfg: &RunConfig) -> Result<()> {
    let mus = cfg.sweep.as_ref().map(|s| s.mu.clone()).ok_or_else(|| {
        CliError::Validation("sweep.mu: no values given (use --mu-grid or a [sweep] table)".into())
    })?;
    let dir: PathBuf = cfg.output.path.clone().ok_or_else(|| {
        CliError::Validation("output.path: sweep needs an output directory (--out)".into())
    })?;
    std::fs::create_dir_all(&dir).map_err(|e| CliError::io("create directory", &dir, e))?;
    let start = cfg.initial_state()?;

    let results: Vec<(f64, RunSummary)> = mus
        .par_iter()
        .map(|&mu| {
            let mut run = cfg.clone();
            run.model = cfg.model_with_mu(mu)?;
            run.sweep = None;
            run.recurrence = Some(cfg.recurrence_or_default());
            let traj = integrate(&start, &run.model, &run.integrator)?;
            let summary = summarize(&run, &traj)?;
            let stem = sweep_stem(mu);
            let traj_path = dir.join(format!("{stem}.{}", run.output.format.extension()));
            run.output.path = Some(traj_path.clone());
            let meta = metadata("sweep", &run, &start);
            let mut out = sink(Some(&traj_path))?;
            write_trajectory(&mut out, run.output.format, &meta, &traj)
                .and_then(|_| out.flush())
                .map_err(|e| CliError::io("write", &traj_path, e))?;
            write_json(
                Some(&dir.join(format!("{stem}.report.json"))),
                &json!({ "meta": meta, "report": summary }),
            )?;
            Ok((mu, summary))
        })
        .collect::<Result<_>>()?;

    for (mu, s) in &results {
        eprintln!(
            "mu = {mu}: {} samples, max relative C drift {:e}, {} returns",
            s.samples,
            s.drift.max_rel_drift,
            s.recurrence.returns.len()
        );
    }
    Ok(())
}
