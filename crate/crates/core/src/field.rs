//! Vector fields of the coupled game in both coordinate systems.
//!
//! Simplex coordinates use the flat layout `[x_1..x_n, w_1..w_n]` and evolve as
//!
//! ```text
//! x_i' = x_i s_i              s = P^w x
//! w_i' = w_i (<w, x> - x_i)
//! ```
//!
//! Log-ratio coordinates use `[y_1..y_{n-1}, z_1..z_{n-1}]` with `y = Π(x)`,
//! `z = Π(w)`, and evolve as `y_i' = s_i - s_n`, `z_i' = x_n - x_i`. The
//! log-ratio field is evaluated by mapping back to the simplex, so the game
//! algebra lives only in [`crate::game`].

use crate::error::{Error, Result};
use crate::game::fitness_into;
use crate::params::ModelParams;
use crate::simplex::{softmax_into, SystemState, TransformedState};

/// An autonomous ODE right-hand side on a flat state vector.
pub trait VectorField {
    fn dim(&self) -> usize;

    /// Writes `f(u)` into `du`; both slices have length [`VectorField::dim`].
    fn eval(&self, u: &[f64], du: &mut [f64]);
}

impl<F: VectorField + ?Sized> VectorField for &F {
    fn dim(&self) -> usize {
        (**self).dim()
    }

    fn eval(&self, u: &[f64], du: &mut [f64]) {
        (**self).eval(u, du)
    }
}

/// Which chart a flat state vector lives in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Space {
    Simplex,
    Transformed,
}

impl Space {
    pub fn dim(self, n: usize) -> usize {
        match self {
            Space::Simplex => 2 * n,
            Space::Transformed => 2 * (n - 1),
        }
    }

    pub fn encode(self, state: &SystemState) -> Vec<f64> {
        match self {
            Space::Simplex => state.to_concat(),
            Space::Transformed => state.to_transformed().to_concat(),
        }
    }

    /// Maps a flat vector of this space back to simplex coordinates `[x, w]`.
    pub fn decode_into(self, u: &[f64], out: &mut [f64]) {
        match self {
            Space::Simplex => out.copy_from_slice(u),
            Space::Transformed => {
                let m = u.len() / 2;
                softmax_into(&u[..m], &mut out[..=m]);
                softmax_into(&u[m..], &mut out[m + 1..]);
            }
        }
    }
}

impl std::fmt::Display for Space {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Space::Simplex => "simplex",
            Space::Transformed => "transformed",
        })
    }
}

impl std::str::FromStr for Space {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "simplex" => Ok(Space::Simplex),
            "transformed" => Ok(Space::Transformed),
            other => Err(format!(
                "unknown space `{other}`, expected simplex or transformed"
            )),
        }
    }
}

/// The coupled field in simplex coordinates.
#[derive(Debug, Clone)]
pub struct SimplexSystem {
    params: ModelParams,
}

impl SimplexSystem {
    pub fn new(params: ModelParams) -> Result<Self> {
        params.validate()?;
        Ok(SimplexSystem { params })
    }

    pub fn params(&self) -> &ModelParams {
        &self.params
    }
}

impl VectorField for SimplexSystem {
    fn dim(&self) -> usize {
        2 * self.params.n
    }

    fn eval(&self, u: &[f64], du: &mut [f64]) {
        let n = self.params.n;
        let (x, w) = u.split_at(n);
        let (dx, dw) = du.split_at_mut(n);
        fitness_into(x, w, &self.params, dx);
        for (d, xi) in dx.iter_mut().zip(x) {
            *d *= xi;
        }
        let wx: f64 = w.iter().zip(x).map(|(a, b)| a * b).sum();
        for i in 0..n {
            dw[i] = w[i] * (wx - x[i]);
        }
    }
}

/// The coupled field in log-ratio coordinates.
#[derive(Debug, Clone)]
pub struct TransformedSystem {
    params: ModelParams,
}

impl TransformedSystem {
    pub fn new(params: ModelParams) -> Result<Self> {
        params.validate()?;
        Ok(TransformedSystem { params })
    }

    pub fn params(&self) -> &ModelParams {
        &self.params
    }
}

impl VectorField for TransformedSystem {
    fn dim(&self) -> usize {
        2 * (self.params.n - 1)
    }

    fn eval(&self, u: &[f64], du: &mut [f64]) {
        let n = self.params.n;
        let m = n - 1;
        let mut scratch = vec![0.0; 3 * n];
        let (x, rest) = scratch.split_at_mut(n);
        let (w, s) = rest.split_at_mut(n);
        softmax_into(&u[..m], x);
        softmax_into(&u[m..], w);
        fitness_into(x, w, &self.params, s);
        let (dy, dz) = du.split_at_mut(m);
        for i in 0..m {
            dy[i] = s[i] - s[m];
            dz[i] = x[m] - x[i];
        }
    }
}

/// `f / (|f| + 1)`: same orbits as `f`, globally bounded speed.
#[derive(Debug, Clone)]
pub struct Renormalized<F>(pub F);

impl<F: VectorField> VectorField for Renormalized<F> {
    fn dim(&self) -> usize {
        self.0.dim()
    }

    fn eval(&self, u: &[f64], du: &mut [f64]) {
        self.0.eval(u, du);
        let scale = 1.0 / (norm(du) + 1.0);
        for d in du.iter_mut() {
            *d *= scale;
        }
    }
}

/// `-f`, for integrating backwards in time.
#[derive(Debug, Clone)]
pub struct Reversed<F>(pub F);

impl<F: VectorField> VectorField for Reversed<F> {
    fn dim(&self) -> usize {
        self.0.dim()
    }

    fn eval(&self, u: &[f64], du: &mut [f64]) {
        self.0.eval(u, du);
        for d in du.iter_mut() {
            *d = -*d;
        }
    }
}

/// Replicator dynamics `x_i' = x_i ((A x)_i - x^T A x)` for a fixed matrix.
#[derive(Debug, Clone)]
pub struct StaticReplicator {
    matrix: crate::game::PayoffMatrix,
}

impl StaticReplicator {
    pub fn new(matrix: crate::game::PayoffMatrix) -> Self {
        StaticReplicator { matrix }
    }
}

impl VectorField for StaticReplicator {
    fn dim(&self) -> usize {
        self.matrix.n()
    }

    fn eval(&self, u: &[f64], du: &mut [f64]) {
        let r = self.matrix.apply(u);
        let mean: f64 = r.iter().zip(u).map(|(a, b)| a * b).sum();
        for i in 0..u.len() {
            du[i] = u[i] * (r[i] - mean);
        }
    }
}

/// Wraps a closure as a field of fixed dimension.
pub struct FnField<G> {
    dim: usize,
    f: G,
}

impl<G: Fn(&[f64], &mut [f64])> FnField<G> {
    pub fn new(dim: usize, f: G) -> Self {
        FnField { dim, f }
    }
}

impl<G: Fn(&[f64], &mut [f64])> VectorField for FnField<G> {
    fn dim(&self) -> usize {
        self.dim
    }

    fn eval(&self, u: &[f64], du: &mut [f64]) {
        (self.f)(u, du)
    }
}

pub(crate) fn norm(v: &[f64]) -> f64 {
    v.iter().map(|a| a * a).sum::<f64>().sqrt()
}

/// Simplex-coordinate field at `state`, split into `(dx, dw)`.
pub fn simplex_field(state: &SystemState, params: &ModelParams) -> Result<(Vec<f64>, Vec<f64>)> {
    params.check_dim(state.n())?;
    let sys = SimplexSystem::new(params.clone())?;
    let mut du = vec![0.0; sys.dim()];
    sys.eval(&state.to_concat(), &mut du);
    let dw = du.split_off(params.n);
    Ok((du, dw))
}

/// Log-ratio field at `ts`, split into `(dy, dz)`.
pub fn transformed_field(
    ts: &TransformedState,
    params: &ModelParams,
) -> Result<(Vec<f64>, Vec<f64>)> {
    params.check_dim(ts.n())?;
    let sys = TransformedSystem::new(params.clone())?;
    let mut du = vec![0.0; sys.dim()];
    sys.eval(&ts.to_concat(), &mut du);
    let dz = du.split_off(params.n - 1);
    Ok((du, dz))
}

/// [`simplex_field`] divided by `|(dx, dw)| + 1`.
pub fn renormalized_field(
    state: &SystemState,
    params: &ModelParams,
) -> Result<(Vec<f64>, Vec<f64>)> {
    let (mut dx, mut dw) = simplex_field(state, params)?;
    let scale = 1.0 / ((norm(&dx).powi(2) + norm(&dw).powi(2)).sqrt() + 1.0);
    dx.iter_mut().chain(dw.iter_mut()).for_each(|d| *d *= scale);
    Ok((dx, dw))
}

/// Log-barrier `D(v) = sum_i ln(1 / v_i)`; infinite on the boundary.
pub fn log_barrier(v: &[f64]) -> Result<f64> {
    let mut total = 0.0;
    for (index, &c) in v.iter().enumerate() {
        if !c.is_finite() {
            return Err(Error::NonFinite { index });
        }
        if c <= 0.0 {
            return Err(Error::BarrierDivergence { index });
        }
        total -= c.ln();
    }
    Ok(total)
}

/// `C = D(x) + mu D(w)`, constant along orbits when every matrix shares `mu`.
///
/// In exploration mode `params.mu` is used as the reference strength and the
/// value is a diagnostic only.
pub fn conserved_quantity(state: &SystemState, params: &ModelParams) -> Result<f64> {
    params.check_dim(state.n())?;
    conserved_from_coords(state.x().coords(), state.w().coords(), params.mu)
}

pub(crate) fn conserved_from_coords(x: &[f64], w: &[f64], mu: f64) -> Result<f64> {
    let dx = log_barrier(x)?;
    if mu == 0.0 {
        return Ok(dx);
    }
    let dw = log_barrier(w).map_err(|e| match e {
        Error::BarrierDivergence { index } => Error::BarrierDivergence {
            index: index + x.len(),
        },
        other => other,
    })?;
    Ok(dx + mu * dw)
}
