//! Cyclic rock-paper-scissors payoffs and the environment-weighted mixture.
//!
//! Strategy `i` beats its predecessor `i-1` and loses to its successor `i+1`
//! (indices mod n). Favoring matrix `i` adds `mu` along row `i` and `-mu` down
//! column `i`, so the mixture `sum_i w_i P_i` has entries
//! `P[i][j] + mu_i w_i - mu_j w_j` off the diagonal.

use crate::error::{Error, Result};
use crate::params::ModelParams;
use crate::simplex::{SimplexPoint, SystemState};

/// Antisymmetry tolerance checked by [`PayoffMatrix::is_antisymmetric`].
pub const ANTISYMMETRY_TOLERANCE: f64 = 1e-14;

/// Dense row-major `n x n` payoff matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct PayoffMatrix {
    n: usize,
    entries: Vec<f64>,
}

impl PayoffMatrix {
    pub fn zeros(n: usize) -> Self {
        PayoffMatrix {
            n,
            entries: vec![0.0; n * n],
        }
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        let mut entries = Vec::with_capacity(n * n);
        for row in rows {
            if row.len() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    found: row.len(),
                });
            }
            entries.extend_from_slice(row);
        }
        Ok(PayoffMatrix { n, entries })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.entries[i * self.n + j]
    }

    #[inline]
    fn set(&mut self, i: usize, j: usize, value: f64) {
        self.entries[i * self.n + j] = value;
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.entries[i * self.n..(i + 1) * self.n]
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        self.entries.chunks(self.n).map(<[f64]>::to_vec).collect()
    }

    /// Largest `|A[i][j] + A[j][i]|`.
    pub fn antisymmetry_defect(&self) -> f64 {
        let mut worst = 0.0_f64;
        for i in 0..self.n {
            for j in i..self.n {
                worst = worst.max((self.get(i, j) + self.get(j, i)).abs());
            }
        }
        worst
    }

    pub fn is_antisymmetric(&self) -> bool {
        self.antisymmetry_defect() <= ANTISYMMETRY_TOLERANCE
    }

    /// Matrix-vector product.
    pub fn apply(&self, v: &[f64]) -> Vec<f64> {
        assert_eq!(v.len(), self.n, "vector length must match matrix order");
        self.entries
            .chunks(self.n)
            .map(|row| row.iter().zip(v).map(|(a, b)| a * b).sum())
            .collect()
    }

    fn add_scaled(&mut self, other: &PayoffMatrix, scale: f64) {
        for (a, b) in self.entries.iter_mut().zip(&other.entries) {
            *a += scale * b;
        }
    }
}

#[inline]
pub(crate) fn pred(i: usize, n: usize) -> usize {
    (i + n - 1) % n
}

#[inline]
pub(crate) fn succ(i: usize, n: usize) -> usize {
    (i + 1) % n
}

/// Generalized RPS matrix: `+a` at `(i, i-1)`, `-a` at `(i, i+1)`.
pub fn rps_base_matrix(params: &ModelParams) -> Result<PayoffMatrix> {
    params.validate()?;
    let n = params.n;
    let a = params.amplitude;
    let mut p = PayoffMatrix::zeros(n);
    for i in 0..n {
        p.set(i, pred(i, n), a);
        p.set(i, succ(i, n), -a);
    }
    Ok(p)
}

/// Perturbation `Δ_i`: `mu` along row `i`, `-mu` down column `i`, zero diagonal.
fn favor_delta(i: usize, n: usize, mu: f64) -> PayoffMatrix {
    let mut d = PayoffMatrix::zeros(n);
    for j in (0..n).filter(|&j| j != i) {
        d.set(i, j, mu);
        d.set(j, i, -mu);
    }
    d
}

/// Matrix `P_i` that favors strategy `i`, using `i`'s own feedback strength.
pub fn favor_matrix(i: usize, params: &ModelParams) -> Result<PayoffMatrix> {
    let mut p = rps_base_matrix(params)?;
    if i >= params.n {
        return Err(Error::IndexOutOfRange {
            index: i,
            n: params.n,
        });
    }
    p.add_scaled(&favor_delta(i, params.n, params.mu_of(i)), 1.0);
    Ok(p)
}

/// `P^w = P + sum_i w_i Δ_i`, which equals `sum_i w_i P_i` because `sum w = 1`.
pub fn payoff_matrix(w: &SimplexPoint, params: &ModelParams) -> Result<PayoffMatrix> {
    let mut p = rps_base_matrix(params)?;
    params.check_dim(w.dim())?;
    for (i, &wi) in w.coords().iter().enumerate() {
        p.add_scaled(&favor_delta(i, params.n, params.mu_of(i)), wi);
    }
    Ok(p)
}

/// Fitness vector `s = P^w x`.
pub fn fitness(state: &SystemState, params: &ModelParams) -> Result<Vec<f64>> {
    params.validate()?;
    params.check_dim(state.n())?;
    let mut s = vec![0.0; params.n];
    fitness_into(state.x().coords(), state.w().coords(), params, &mut s);
    Ok(s)
}

/// Closed form of `P^w x` on the simplex:
/// `s_i = a (x_{i-1} - x_{i+1}) + mu_i w_i - sum_j mu_j w_j x_j`.
pub(crate) fn fitness_into(x: &[f64], w: &[f64], params: &ModelParams, s: &mut [f64]) {
    let n = x.len();
    let a = params.amplitude;
    let feedback_mean: f64 = (0..n).map(|j| params.mu_of(j) * w[j] * x[j]).sum();
    for i in 0..n {
        s[i] = a * (x[pred(i, n)] - x[succ(i, n)]) + (params.mu_of(i) * w[i] - feedback_mean);
    }
}
