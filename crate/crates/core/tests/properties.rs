use proptest::prelude::*;

use rpsflow_core::{
    favor_matrix, fitness, inverse_transform, payoff_matrix, renormalized_field, simplex_field,
    transform, transformed_field, ModelParams, SimplexPoint, SystemState,
};

fn point(n: usize) -> impl Strategy<Value = SimplexPoint> {
    prop::collection::vec(1e-3..1.0f64, n).prop_map(|v| SimplexPoint::from_weights(&v).unwrap())
}

fn state_with_n() -> impl Strategy<Value = (usize, SystemState)> {
    (3usize..9).prop_flat_map(|n| {
        (point(n), point(n)).prop_map(move |(x, w)| (n, SystemState::new(x, w).unwrap()))
    })
}

fn setup() -> impl Strategy<Value = (ModelParams, SystemState)> {
    (state_with_n(), 0.0..2.0f64, 0.1..3.0f64).prop_map(|((n, s), mu, a)| {
        let p = ModelParams::new(n, mu).unwrap().with_amplitude(a).unwrap();
        (p, s)
    })
}

proptest! {
    #[test]
    fn mixed_matrix_is_antisymmetric((params, state) in setup()) {
        let m = payoff_matrix(state.w(), &params).unwrap();
        prop_assert!(m.is_antisymmetric(), "defect {}", m.antisymmetry_defect());
    }

    #[test]
    fn fitness_has_zero_population_mean((params, state) in setup()) {
        let s = fitness(&state, &params).unwrap();
        let mean: f64 = s.iter().zip(state.x().coords()).map(|(a, b)| a * b).sum();
        prop_assert!(mean.abs() < 1e-13, "mean fitness {mean}");
    }

    #[test]
    fn simplex_field_is_tangent((params, state) in setup()) {
        let (dx, dw) = simplex_field(&state, &params).unwrap();
        prop_assert!(dx.iter().sum::<f64>().abs() < 1e-13);
        prop_assert!(dw.iter().sum::<f64>().abs() < 1e-13);
    }

    #[test]
    fn closed_form_fitness_matches_matrix_product((params, state) in setup()) {
        let s = fitness(&state, &params).unwrap();
        // Build P^w from the individual favor matrices rather than payoff_matrix.
        let n = params.n;
        let mut px = vec![0.0; n];
        for (k, wk) in state.w().coords().iter().enumerate() {
            let r = favor_matrix(k, &params).unwrap().apply(state.x().coords());
            for (a, b) in px.iter_mut().zip(r) {
                *a += wk * b;
            }
        }
        for i in 0..n {
            prop_assert!((s[i] - px[i]).abs() < 1e-13, "i={i}: {} vs {}", s[i], px[i]);
        }
    }

    #[test]
    fn log_ratio_field_is_chain_rule_image((params, state) in setup()) {
        let n = params.n;
        let (dx, dw) = simplex_field(&state, &params).unwrap();
        let (dy, dz) = transformed_field(&state.to_transformed(), &params).unwrap();
        let (x, w) = (state.x().coords(), state.w().coords());
        for i in 0..n - 1 {
            let ey = dx[i] / x[i] - dx[n - 1] / x[n - 1];
            let ez = dw[i] / w[i] - dw[n - 1] / w[n - 1];
            prop_assert!((dy[i] - ey).abs() < 1e-12, "dy[{i}] {} vs {ey}", dy[i]);
            prop_assert!((dz[i] - ez).abs() < 1e-12, "dz[{i}] {} vs {ez}", dz[i]);
        }
    }

    #[test]
    fn log_ratio_field_matches_exponential_form(
        (n, state) in state_with_n(),
        mu in 0.0..2.0f64,
    ) {
        let params = ModelParams::new(n, mu).unwrap();
        let ts = state.to_transformed();
        let (dy, dz) = transformed_field(&ts, &params).unwrap();
        let (y, z) = (ts.y(), ts.z());
        let ey = |k: usize| if k < n - 1 { y[k].exp() } else { 1.0 };
        let sy: f64 = 1.0 + y.iter().map(|v| v.exp()).sum::<f64>();
        let sz: f64 = 1.0 + z.iter().map(|v| v.exp()).sum::<f64>();
        for i in 0..n - 1 {
            let prev = (i + n - 1) % n;
            let want_y = (ey(0) + ey(prev) - ey(n - 2) - ey(i + 1)) / sy
                + mu * (z[i].exp() - 1.0) / sz;
            let want_z = (1.0 - y[i].exp()) / sy;
            prop_assert!((dy[i] - want_y).abs() < 1e-12, "dy[{i}] {} vs {want_y}", dy[i]);
            prop_assert!((dz[i] - want_z).abs() < 1e-12, "dz[{i}] {} vs {want_z}", dz[i]);
        }
    }

    #[test]
    fn chart_round_trip(p in (3usize..12).prop_flat_map(point)) {
        let back = inverse_transform(&transform(&p)).unwrap();
        for (a, b) in back.coords().iter().zip(p.coords()) {
            prop_assert!(((a - b) / b).abs() < 1e-12);
        }
    }

    #[test]
    fn renormalized_field_keeps_direction((params, state) in setup()) {
        let (dx, dw) = simplex_field(&state, &params).unwrap();
        let (rx, rw) = renormalized_field(&state, &params).unwrap();
        let f: Vec<f64> = dx.into_iter().chain(dw).collect();
        let r: Vec<f64> = rx.into_iter().chain(rw).collect();
        let nf = f.iter().map(|v| v * v).sum::<f64>().sqrt();
        let nr = r.iter().map(|v| v * v).sum::<f64>().sqrt();
        prop_assert!(nr < 1.0);
        prop_assert!((nr - nf / (nf + 1.0)).abs() < 1e-14);
        if nf > 1e-12 {
            let cos = f.iter().zip(&r).map(|(a, b)| a * b).sum::<f64>() / (nf * nr);
            prop_assert!((cos - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn amplitude_rescales_time_without_feedback(
        (n, state) in state_with_n(),
        a in 0.1..5.0f64,
    ) {
        let unit = ModelParams::new(n, 0.0).unwrap();
        let scaled = unit.clone().with_amplitude(a).unwrap();
        let (dx1, dw1) = simplex_field(&state, &unit).unwrap();
        let (dxa, dwa) = simplex_field(&state, &scaled).unwrap();
        for i in 0..n {
            prop_assert!((dxa[i] - a * dx1[i]).abs() < 1e-13);
            prop_assert_eq!(dwa[i], dw1[i]);
        }
    }
}
