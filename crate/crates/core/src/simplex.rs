//! Points of the open simplex and the log-ratio chart that flattens it.
//!
//! [`transform`] sends an interior point `p` to `(log(p_1/p_n), ..., log(p_{n-1}/p_n))`
//! and [`inverse_transform`] is the matching normalized exponential with an implicit
//! last logit of zero. Boundary points have no image: they sit at infinite distance
//! in log-ratio coordinates.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Smallest supported number of strategies.
pub const MIN_STRATEGIES: usize = 3;

/// Sums within this distance of 1 are accepted untouched.
pub const SUM_TOLERANCE: f64 = 1e-12;

/// Sums within this distance of 1 are divided through by the sum.
pub const RENORMALIZE_TOLERANCE: f64 = 1e-9;

/// A strictly positive probability vector with at least three entries.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct SimplexPoint(Vec<f64>);

impl SimplexPoint {
    /// Validates `coords`, renormalizing sums that are off by at most
    /// [`RENORMALIZE_TOLERANCE`].
    pub fn new(coords: Vec<f64>) -> Result<Self> {
        if coords.len() < MIN_STRATEGIES {
            return Err(Error::param(
                "n",
                format!(
                    "need at least {MIN_STRATEGIES} coordinates, got {}",
                    coords.len()
                ),
            ));
        }
        for (index, &value) in coords.iter().enumerate() {
            if !value.is_finite() {
                return Err(Error::NonFinite { index });
            }
            if value <= 0.0 {
                return Err(Error::NonPositiveCoordinate { index, value });
            }
        }
        let sum: f64 = coords.iter().sum();
        let off = (sum - 1.0).abs();
        if off <= SUM_TOLERANCE {
            Ok(SimplexPoint(coords))
        } else if off <= RENORMALIZE_TOLERANCE {
            Ok(SimplexPoint(coords.into_iter().map(|c| c / sum).collect()))
        } else {
            Err(Error::NotNormalized { sum })
        }
    }

    /// The barycenter `(1/n, ..., 1/n)`.
    pub fn uniform(n: usize) -> Result<Self> {
        if n < MIN_STRATEGIES {
            return Err(Error::param(
                "n",
                format!("need at least {MIN_STRATEGIES} strategies, got {n}"),
            ));
        }
        Ok(SimplexPoint(vec![1.0 / n as f64; n]))
    }

    /// Divides positive weights by their sum.
    pub fn from_weights(weights: &[f64]) -> Result<Self> {
        for (index, &value) in weights.iter().enumerate() {
            if !value.is_finite() {
                return Err(Error::NonFinite { index });
            }
            if value <= 0.0 {
                return Err(Error::NonPositiveCoordinate { index, value });
            }
        }
        let sum: f64 = weights.iter().sum();
        Self::new(weights.iter().map(|w| w / sum).collect())
    }

    /// Caller guarantees positivity and unit sum up to roundoff.
    pub(crate) fn from_normalized_unchecked(coords: Vec<f64>) -> Self {
        debug_assert!(coords.iter().all(|&c| c > 0.0));
        SimplexPoint(coords)
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn coords(&self) -> &[f64] {
        &self.0
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }

    pub fn min_coord(&self) -> f64 {
        self.0.iter().copied().fold(f64::INFINITY, f64::min)
    }
}

impl TryFrom<Vec<f64>> for SimplexPoint {
    type Error = Error;

    fn try_from(coords: Vec<f64>) -> Result<Self> {
        SimplexPoint::new(coords)
    }
}

impl From<SimplexPoint> for Vec<f64> {
    fn from(p: SimplexPoint) -> Self {
        p.0
    }
}

impl std::ops::Index<usize> for SimplexPoint {
    type Output = f64;

    fn index(&self, i: usize) -> &f64 {
        &self.0[i]
    }
}

/// Phase-space point `(x, w)`: population shares and environment weights.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SystemState {
    x: SimplexPoint,
    w: SimplexPoint,
}

impl SystemState {
    pub fn new(x: SimplexPoint, w: SimplexPoint) -> Result<Self> {
        if x.dim() != w.dim() {
            return Err(Error::DimensionMismatch {
                expected: x.dim(),
                found: w.dim(),
            });
        }
        Ok(SystemState { x, w })
    }

    pub fn uniform(n: usize) -> Result<Self> {
        let p = SimplexPoint::uniform(n)?;
        Ok(SystemState { x: p.clone(), w: p })
    }

    /// Builds a state from the concatenated layout `[x_1..x_n, w_1..w_n]`.
    pub fn from_concat(u: &[f64]) -> Result<Self> {
        if !u.len().is_multiple_of(2) {
            return Err(Error::DimensionMismatch {
                expected: u.len() + 1,
                found: u.len(),
            });
        }
        let n = u.len() / 2;
        SystemState::new(
            SimplexPoint::new(u[..n].to_vec())?,
            SimplexPoint::new(u[n..].to_vec())?,
        )
    }

    pub fn n(&self) -> usize {
        self.x.dim()
    }

    pub fn x(&self) -> &SimplexPoint {
        &self.x
    }

    pub fn w(&self) -> &SimplexPoint {
        &self.w
    }

    /// `[x_1..x_n, w_1..w_n]`
    pub fn to_concat(&self) -> Vec<f64> {
        let mut u = Vec::with_capacity(2 * self.n());
        u.extend_from_slice(self.x.coords());
        u.extend_from_slice(self.w.coords());
        u
    }

    /// Euclidean distance on the concatenated coordinates.
    pub fn distance(&self, other: &SystemState) -> f64 {
        euclidean(&self.to_concat(), &other.to_concat())
    }

    pub fn to_transformed(&self) -> TransformedState {
        TransformedState {
            y: transform(&self.x),
            z: transform(&self.w),
        }
    }
}

/// Log-ratio coordinates `(y, z) = (Π(x), Π(w))`, each of length `n - 1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransformedState {
    y: Vec<f64>,
    z: Vec<f64>,
}

impl TransformedState {
    pub fn new(y: Vec<f64>, z: Vec<f64>) -> Result<Self> {
        if y.len() != z.len() {
            return Err(Error::DimensionMismatch {
                expected: y.len(),
                found: z.len(),
            });
        }
        if y.len() + 1 < MIN_STRATEGIES {
            return Err(Error::param(
                "n",
                format!(
                    "need at least {} log-ratios, got {}",
                    MIN_STRATEGIES - 1,
                    y.len()
                ),
            ));
        }
        check_finite(&y)?;
        check_finite(&z).map_err(|e| match e {
            Error::NonFinite { index } => Error::NonFinite {
                index: index + y.len(),
            },
            other => other,
        })?;
        Ok(TransformedState { y, z })
    }

    /// `[y_1..y_{n-1}, z_1..z_{n-1}]`
    pub fn from_concat(u: &[f64]) -> Result<Self> {
        let m = u.len() / 2;
        if !u.len().is_multiple_of(2) {
            return Err(Error::DimensionMismatch {
                expected: 2 * m + 2,
                found: u.len(),
            });
        }
        TransformedState::new(u[..m].to_vec(), u[m..].to_vec())
    }

    /// Number of strategies, one more than the chart dimension.
    pub fn n(&self) -> usize {
        self.y.len() + 1
    }

    pub fn y(&self) -> &[f64] {
        &self.y
    }

    pub fn z(&self) -> &[f64] {
        &self.z
    }

    pub fn to_concat(&self) -> Vec<f64> {
        let mut u = Vec::with_capacity(2 * self.y.len());
        u.extend_from_slice(&self.y);
        u.extend_from_slice(&self.z);
        u
    }

    pub fn to_system(&self) -> SystemState {
        SystemState {
            x: softmax_point(&self.y),
            w: softmax_point(&self.z),
        }
    }
}

/// Log-ratio chart: component `i` is `ln(p_i / p_n)`.
pub fn transform(p: &SimplexPoint) -> Vec<f64> {
    let mut out = vec![0.0; p.dim() - 1];
    log_ratio_into(p.coords(), &mut out);
    out
}

/// [`transform`] for raw coordinates that may touch the boundary.
pub fn try_transform(coords: &[f64]) -> Result<Vec<f64>> {
    if coords.len() < MIN_STRATEGIES {
        return Err(Error::param(
            "n",
            format!(
                "need at least {MIN_STRATEGIES} coordinates, got {}",
                coords.len()
            ),
        ));
    }
    check_finite(coords)?;
    if let Some(index) = coords.iter().position(|&c| c <= 0.0) {
        return Err(Error::BarrierDivergence { index });
    }
    let mut out = vec![0.0; coords.len() - 1];
    log_ratio_into(coords, &mut out);
    Ok(out)
}

/// Normalized exponential with an implicit trailing zero logit.
pub fn inverse_transform(v: &[f64]) -> Result<SimplexPoint> {
    if v.len() + 1 < MIN_STRATEGIES {
        return Err(Error::param(
            "n",
            format!(
                "need at least {} log-ratios, got {}",
                MIN_STRATEGIES - 1,
                v.len()
            ),
        ));
    }
    check_finite(v)?;
    Ok(softmax_point(v))
}

fn softmax_point(v: &[f64]) -> SimplexPoint {
    let mut out = vec![0.0; v.len() + 1];
    softmax_into(v, &mut out);
    SimplexPoint::from_normalized_unchecked(out)
}

pub(crate) fn log_ratio_into(p: &[f64], out: &mut [f64]) {
    let last = p[p.len() - 1].ln();
    for (o, &c) in out.iter_mut().zip(p) {
        *o = c.ln() - last;
    }
}

/// Writes the `len + 1` simplex coordinates for log-ratios `v` into `out`.
/// The largest logit (the implicit zero included) is shifted to zero before
/// exponentiating.
pub(crate) fn softmax_into(v: &[f64], out: &mut [f64]) {
    debug_assert_eq!(out.len(), v.len() + 1);
    let shift = v.iter().copied().fold(0.0_f64, f64::max);
    let mut total = 0.0;
    for (o, &vi) in out.iter_mut().zip(v) {
        *o = (vi - shift).exp();
        total += *o;
    }
    let last = (-shift).exp();
    out[v.len()] = last;
    total += last;
    for o in out.iter_mut() {
        *o /= total;
    }
}

pub(crate) fn check_finite(v: &[f64]) -> Result<()> {
    match v.iter().position(|c| !c.is_finite()) {
        Some(index) => Err(Error::NonFinite { index }),
        None => Ok(()),
    }
}

pub(crate) fn euclidean(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(p, q)| (p - q) * (p - q))
        .sum::<f64>()
        .sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn rejects_small_dimension_and_boundary() {
        assert!(matches!(
            SimplexPoint::new(vec![0.5, 0.5]),
            Err(Error::InvalidParam { field: "n", .. })
        ));
        assert_eq!(
            SimplexPoint::new(vec![0.5, 0.5, 0.0]),
            Err(Error::NonPositiveCoordinate {
                index: 2,
                value: 0.0
            })
        );
        assert_eq!(
            SimplexPoint::new(vec![0.5, f64::NAN, 0.5]),
            Err(Error::NonFinite { index: 1 })
        );
    }

    #[test]
    fn renormalizes_only_near_unit_sum() {
        let exact = SimplexPoint::new(vec![0.2, 0.3, 0.5]).unwrap();
        assert_eq!(exact.coords(), &[0.2, 0.3, 0.5]);

        let near = SimplexPoint::new(vec![0.2, 0.3, 0.5 + 5e-10]).unwrap();
        let sum: f64 = near.coords().iter().sum();
        assert!((sum - 1.0).abs() <= SUM_TOLERANCE);

        assert!(matches!(
            SimplexPoint::new(vec![0.2, 0.3, 0.6]),
            Err(Error::NotNormalized { .. })
        ));
    }

    #[test]
    fn transform_examples() {
        let u = SimplexPoint::uniform(4).unwrap();
        assert_eq!(transform(&u), vec![0.0; 3]);

        let p = SimplexPoint::new(vec![0.5, 0.25, 0.25]).unwrap();
        let v = transform(&p);
        assert_relative_eq!(v[0], 2f64.ln(), epsilon = 1e-15);
        assert_relative_eq!(v[1], 0.0, epsilon = 1e-15);

        let back = inverse_transform(&[2f64.ln(), 0.0]).unwrap();
        for (a, b) in back.coords().iter().zip([0.5, 0.25, 0.25]) {
            assert_relative_eq!(*a, b, max_relative = 1e-15);
        }

        assert_eq!(
            inverse_transform(&[0.0, 0.0]).unwrap(),
            SimplexPoint::new(vec![1.0 / 3.0; 3]).unwrap()
        );
    }

    #[test]
    fn boundary_and_non_finite_inputs_are_rejected() {
        assert_eq!(
            try_transform(&[0.5, 0.5, 0.0]),
            Err(Error::BarrierDivergence { index: 2 })
        );
        assert_eq!(
            inverse_transform(&[1.0, f64::INFINITY]),
            Err(Error::NonFinite { index: 1 })
        );
        assert!(TransformedState::new(vec![0.0, 1.0], vec![f64::NAN, 0.0]).is_err());
    }

    #[test]
    fn large_logits_do_not_overflow() {
        // 50-digit mpmath evaluation of the unshifted formula:
        // p = (e^700, 1, 1) / (e^700 + 2).
        let p = inverse_transform(&[700.0, 0.0]).unwrap();
        assert!(p.coords().iter().all(|c| c.is_finite() && *c > 0.0));
        assert!(p[0] <= 1.0);
        let tail = 9.859_676_543_759_77e-305;
        assert_relative_eq!(p[1], tail, max_relative = 1e-13);
        assert_relative_eq!(p[2], tail, max_relative = 1e-13);

        let q = inverse_transform(&[-700.0, -700.0]).unwrap();
        assert!(q[2] <= 1.0 && q[0] > 0.0);
        assert_relative_eq!(q[0], tail, max_relative = 1e-13);
    }

    #[test]
    fn concat_layouts() {
        let s = SystemState::new(
            SimplexPoint::new(vec![0.5, 0.3, 0.2]).unwrap(),
            SimplexPoint::uniform(3).unwrap(),
        )
        .unwrap();
        let u = s.to_concat();
        assert_eq!(u.len(), 6);
        assert_eq!(SystemState::from_concat(&u).unwrap(), s);
        assert!(SystemState::new(
            SimplexPoint::uniform(3).unwrap(),
            SimplexPoint::uniform(4).unwrap()
        )
        .is_err());
    }
}
