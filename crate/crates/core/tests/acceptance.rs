//! Acceptance gate. Every criterion prints one `[PASS]`/`[FAIL]` line and
//! fails the test when it does not hold. The lines go straight to the stdout
//! handle, so they appear even without `--nocapture`; add
//! `--test-threads=1` to keep them in order.

use std::io::Write;
use std::time::{Duration, Instant};

use rpsflow_core::field::StaticReplicator;
use rpsflow_core::integrate::DIVERGENCE_STEP;
use rpsflow_core::{
    divergence, drift_stats, integrate, inverse_transform, jacobian_trace_along, log_barrier,
    random_interior_state, recurrence_scan, rps_base_matrix, solve, transform, IntegratorConfig,
    InteriorSampler, Method, ModelParams, Projection, RecurrenceConfig, SimplexPoint, Space,
    SystemState, TransformedSystem,
};

const SEED: u64 = 42;

fn verdict(name: &str, pass: bool, detail: String) {
    let line = format!(
        "[{}] {name}: {detail}\n",
        if pass { "PASS" } else { "FAIL" }
    );
    let _ = std::io::stdout().lock().write_all(line.as_bytes());
    assert!(pass, "{name}: {detail}");
}

fn flagship() -> (SystemState, ModelParams) {
    (
        random_interior_state(SEED, 3).unwrap(),
        ModelParams::new(3, 0.1).unwrap(),
    )
}

#[test]
fn conservation_of_log_barrier() {
    const TOL: f64 = 1e-8;
    const BUDGET: Duration = Duration::from_secs(60);
    let cfg = IntegratorConfig {
        space: Space::Transformed,
        method: Method::AdaptiveRk45,
        t_end: 1000.0,
        rtol: 1e-10,
        atol: 1e-10,
        // Coarse sampling so the step-size controller, not the sample grid,
        // decides the steps.
        sample_interval: 1.0,
        ..Default::default()
    };
    let mut worst = (0.0_f64, 0, 0.0);
    let mut slowest = Duration::ZERO;
    for n in 3..=6 {
        for mu in [0.0, 0.1, 1.0] {
            let params = ModelParams::new(n, mu).unwrap();
            let start = random_interior_state(SEED, n).unwrap();
            let clock = Instant::now();
            let traj = integrate(&start, &params, &cfg).unwrap();
            slowest = slowest.max(clock.elapsed());
            let drift = drift_stats(&traj, &params).unwrap().max_rel_drift;
            if drift >= worst.0 {
                worst = (drift, n, mu);
            }
        }
    }
    verdict(
        "conservation",
        worst.0 < TOL && slowest < BUDGET,
        format!(
            "max relative C drift {:.3e} (n={}, mu={}) < {TOL:e}; slowest run {:.2?} < {BUDGET:?}",
            worst.0, worst.1, worst.2, slowest
        ),
    );
}

#[test]
fn divergence_free_transformed_field() {
    const TOL: f64 = 1e-6;
    let mut worst = 0.0_f64;
    let mut count = 0;
    for n in [3, 5, 8] {
        for mu in [0.0, 0.1, 1.0] {
            let field = TransformedSystem::new(ModelParams::new(n, mu).unwrap()).unwrap();
            let mut sampler = InteriorSampler::new(SEED);
            for _ in 0..100 {
                let u = sampler.next_state(n).unwrap().to_transformed().to_concat();
                worst = worst.max(divergence(&field, &u, DIVERGENCE_STEP).abs());
                count += 1;
            }
        }
    }
    verdict(
        "divergence-free",
        worst < TOL,
        format!("max |div g| over {count} states = {worst:.3e} < {TOL:e}"),
    );
}

#[test]
fn liouville_along_flagship_orbit() {
    const TOL: f64 = 1e-3;
    let (start, params) = flagship();
    let cfg = IntegratorConfig {
        t_end: 100.0,
        ..Default::default()
    };
    let clock = Instant::now();
    let traj = integrate(&start, &params, &cfg).unwrap();
    let trace = jacobian_trace_along(&traj, &params).unwrap();
    verdict(
        "liouville",
        trace.abs() < TOL && clock.elapsed() < Duration::from_secs(60),
        format!(
            "accumulated log-volume change {trace:.3e} over t=100 ({} samples, {:.2?})",
            traj.len(),
            clock.elapsed()
        ),
    );
}

#[test]
fn poincare_recurrence() {
    let (start, params) = flagship();
    let scan = RecurrenceConfig {
        epsilon: 0.05,
        t_min: 1.0,
        max_returns: 10_000,
    };
    let run = |t_end: f64| {
        let cfg = IntegratorConfig {
            t_end,
            sample_interval: 0.01,
            ..Default::default()
        };
        recurrence_scan(&integrate(&start, &params, &cfg).unwrap(), &scan).unwrap()
    };
    let short = run(5000.0);
    let long = run(20000.0);
    let min_short = short.global_min.unwrap();
    let min_long = long.global_min.unwrap();
    verdict(
        "recurrence",
        !short.returns.is_empty() && min_long.distance <= min_short.distance,
        format!(
            "{} return events within eps=0.05 by t=5000 (first at t={:.2}); global min {:.3e} (t={:.2}) -> {:.3e} (t={:.2}) when extended to t=20000",
            short.returns.len(),
            short.returns.first().map_or(f64::NAN, |a| a.time),
            min_short.distance,
            min_short.time,
            min_long.distance,
            min_long.time
        ),
    );
}

#[test]
fn equilibrium_fixity() {
    const TOL: f64 = 1e-10;
    let mut worst = 0.0_f64;
    let mut runs = 0;
    for n in [3, 4, 5, 6, 8] {
        for mu in [0.0, 0.1, 1.0] {
            for space in [Space::Transformed, Space::Simplex] {
                let params = ModelParams::new(n, mu).unwrap();
                let eq = SystemState::uniform(n).unwrap();
                let cfg = IntegratorConfig {
                    t_end: 100.0,
                    space,
                    sample_interval: 0.1,
                    ..Default::default()
                };
                let traj = integrate(&eq, &params, &cfg).unwrap();
                let reference = eq.to_concat();
                for u in traj.samples() {
                    let d = u
                        .iter()
                        .zip(&reference)
                        .map(|(a, b)| (a - b).abs())
                        .fold(0.0, f64::max);
                    worst = worst.max(d);
                }
                runs += 1;
            }
        }
    }
    verdict(
        "equilibrium",
        worst < TOL,
        format!("{runs} runs to t=100, max deviation from uniform {worst:.3e} < {TOL:e}"),
    );
}

#[test]
fn mu_zero_reduces_to_static_replicator() {
    const TOL: f64 = 1e-8;
    let params = ModelParams::new(3, 0.0).unwrap();
    let start = random_interior_state(SEED, 3).unwrap();
    let cfg = IntegratorConfig {
        t_end: 10.0,
        space: Space::Simplex,
        ..Default::default()
    };
    let coupled = integrate(&start, &params, &cfg).unwrap();
    let x_coupled = coupled.last_state().unwrap().x().coords().to_vec();

    let standalone = StaticReplicator::new(rps_base_matrix(&params).unwrap());
    let x_static = solve(
        &standalone,
        start.x().coords(),
        &cfg,
        Projection::SimplexPair {
            n: 3,
            floor: cfg.boundary_floor,
            guarded: 3,
        },
        |_, _, _| Ok(()),
    )
    .unwrap();
    let gap = x_coupled
        .iter()
        .zip(&x_static)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);

    let d0 = log_barrier(start.x().coords()).unwrap();
    let dx_drift = coupled
        .samples()
        .map(|u| ((log_barrier(&u[..3]).unwrap() - d0) / d0).abs())
        .fold(0.0, f64::max);
    verdict(
        "mu=0 reduction",
        gap < TOL && dx_drift < TOL,
        format!("|x_coupled - x_static| at t=10 = {gap:.3e} < {TOL:e}; D(x) relative drift {dx_drift:.3e} < {TOL:e}"),
    );
}

#[test]
fn two_space_consistency() {
    const TOL: f64 = 1e-6;
    let (start, params) = flagship();
    let end = |space| {
        let cfg = IntegratorConfig {
            t_end: 10.0,
            space,
            rtol: 1e-10,
            atol: 1e-10,
            // Sample only the endpoint so the controller picks the steps.
            sample_interval: 10.0,
            ..Default::default()
        };
        integrate(&start, &params, &cfg)
            .unwrap()
            .last_state()
            .unwrap()
    };
    let gap = end(Space::Simplex).distance(&end(Space::Transformed));
    verdict(
        "two-space consistency",
        gap < TOL,
        format!("simplex vs transformed endpoint distance at t=10 = {gap:.3e} < {TOL:e}"),
    );
}

#[test]
fn transform_round_trip() {
    const TOL: f64 = 1e-12;
    let mut sampler = InteriorSampler::new(SEED);
    let mut worst = 0.0_f64;
    let mut smallest = f64::INFINITY;
    for k in 0..1000 {
        let n = 3 + k % 6;
        let mut p = sampler.next_point(n).unwrap();
        if k % 10 == 0 {
            // Push one coordinate down to 1e-6 and spread the rest proportionally.
            let c = p.coords();
            let rest: f64 = c[1..].iter().sum();
            let mut coords = vec![1e-6];
            coords.extend(c[1..].iter().map(|v| v / rest * (1.0 - 1e-6)));
            coords.rotate_left(k % n);
            p = SimplexPoint::new(coords).unwrap();
        }
        smallest = smallest.min(p.min_coord());
        let back = inverse_transform(&transform(&p)).unwrap();
        for (a, b) in back.coords().iter().zip(p.coords()) {
            worst = worst.max(((a - b) / b).abs());
        }
    }
    verdict(
        "transform round-trip",
        worst < TOL && smallest <= 1e-6 * (1.0 + 1e-12),
        format!(
            "1000 points (min coordinate {smallest:.1e}), max relative error {worst:.3e} < {TOL:e}"
        ),
    );
}

#[test]
fn rk4_convergence_order() {
    let (start, params) = flagship();
    let base = IntegratorConfig {
        t_end: 10.0,
        sample_interval: 10.0,
        ..Default::default()
    };
    let reference = integrate(
        &start,
        &params,
        &IntegratorConfig {
            rtol: 1e-13,
            atol: 1e-13,
            ..base.clone()
        },
    )
    .unwrap()
    .last_state()
    .unwrap();
    let steps = [0.2, 0.1, 0.05, 0.025];
    let points: Vec<(f64, f64)> = steps
        .iter()
        .map(|&h| {
            let cfg = IntegratorConfig {
                method: Method::FixedRk4,
                dt: h,
                ..base.clone()
            };
            let end = integrate(&start, &params, &cfg)
                .unwrap()
                .last_state()
                .unwrap();
            (h.ln(), end.distance(&reference).ln())
        })
        .collect();
    // Least-squares slope of log error against log step.
    let m = points.len() as f64;
    let (sx, sy) = points
        .iter()
        .fold((0.0, 0.0), |(a, b), (x, y)| (a + x, b + y));
    let (mx, my) = (sx / m, sy / m);
    let num: f64 = points.iter().map(|(x, y)| (x - mx) * (y - my)).sum();
    let den: f64 = points.iter().map(|(x, _)| (x - mx) * (x - mx)).sum();
    let order = num / den;
    verdict(
        "rk4 convergence order",
        (3.7..=4.3).contains(&order),
        format!(
            "measured order {order:.3} in [3.7, 4.3] over h = {steps:?}; errors {:?}",
            points
                .iter()
                .map(|(_, e)| format!("{:.2e}", e.exp()))
                .collect::<Vec<_>>()
        ),
    );
}

#[test]
fn exploration_mode_runs_interior() {
    let params = ModelParams::new(3, 0.1)
        .unwrap()
        .with_mu_per_matrix(vec![0.05, 0.1, 0.15])
        .unwrap();
    let start = random_interior_state(SEED, 3).unwrap();
    let cfg = IntegratorConfig {
        t_end: 1000.0,
        ..Default::default()
    };
    let result = integrate(&start, &params, &cfg);
    let detail = match &result {
        Ok(traj) => {
            let min_coord = traj
                .samples()
                .flat_map(|u| u.iter().copied())
                .fold(f64::INFINITY, f64::min);
            let report = recurrence_scan(
                traj,
                &RecurrenceConfig {
                    epsilon: 0.1,
                    t_min: 1.0,
                    max_returns: 10_000,
                },
            )
            .unwrap();
            format!(
                "completed t=1000, min coordinate {min_coord:.3e}; {} returns within eps=0.1, global min {:.3e}; C drift (reference mu=0.1, diagnostic) {:.3e}",
                report.returns.len(),
                report.global_min.map_or(f64::NAN, |a| a.distance),
                report.drift.max_rel_drift
            )
        }
        Err(e) => format!("integration failed: {e}"),
    };
    verdict("exploration mode", result.is_ok(), detail);
}
