use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::simplex::MIN_STRATEGIES;

/// Parameters of the coupled game.
///
/// `mu` is the feedback strength shared by every favoring matrix. When
/// `mu_per_matrix` is set the game runs in exploration mode: matrix `i` uses
/// `mu_per_matrix[i]`, and `mu` only serves as the reference strength for the
/// log-barrier diagnostic.
///
/// Missing fields deserialize to the defaults `n = 3`, `mu = 0.1`,
/// `amplitude = 1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ModelParams {
    pub n: usize,
    pub mu: f64,
    pub amplitude: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mu_per_matrix: Option<Vec<f64>>,
}

impl Default for ModelParams {
    fn default() -> Self {
        ModelParams {
            n: 3,
            mu: 0.1,
            amplitude: 1.0,
            mu_per_matrix: None,
        }
    }
}

impl ModelParams {
    pub fn new(n: usize, mu: f64) -> Result<Self> {
        let params = ModelParams {
            n,
            mu,
            amplitude: 1.0,
            mu_per_matrix: None,
        };
        params.validate()?;
        Ok(params)
    }

    pub fn with_amplitude(mut self, amplitude: f64) -> Result<Self> {
        self.amplitude = amplitude;
        self.validate()?;
        Ok(self)
    }

    /// Switches to exploration mode with one feedback strength per favoring matrix.
    pub fn with_mu_per_matrix(mut self, mus: Vec<f64>) -> Result<Self> {
        self.mu_per_matrix = Some(mus);
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n < MIN_STRATEGIES {
            return Err(Error::param(
                "n",
                format!("must be at least {MIN_STRATEGIES}, got {}", self.n),
            ));
        }
        if !(self.mu.is_finite() && self.mu >= 0.0) {
            return Err(Error::param(
                "mu",
                format!("must be finite and >= 0, got {}", self.mu),
            ));
        }
        if !(self.amplitude.is_finite() && self.amplitude > 0.0) {
            return Err(Error::param(
                "amplitude",
                format!("must be finite and > 0, got {}", self.amplitude),
            ));
        }
        if let Some(mus) = &self.mu_per_matrix {
            if mus.len() != self.n {
                return Err(Error::param(
                    "mu_per_matrix",
                    format!("expected {} entries, got {}", self.n, mus.len()),
                ));
            }
            if let Some((i, m)) = mus
                .iter()
                .enumerate()
                .find(|(_, m)| !(m.is_finite() && **m >= 0.0))
            {
                return Err(Error::param(
                    "mu_per_matrix",
                    format!("entry {i} must be finite and >= 0, got {m}"),
                ));
            }
        }
        Ok(())
    }

    pub fn is_exploration(&self) -> bool {
        self.mu_per_matrix.is_some()
    }

    /// Feedback strength of favoring matrix `i`.
    #[inline]
    pub fn mu_of(&self, i: usize) -> f64 {
        match &self.mu_per_matrix {
            Some(mus) => mus[i],
            None => self.mu,
        }
    }

    pub(crate) fn check_dim(&self, found: usize) -> Result<()> {
        if found != self.n {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                found,
            });
        }
        Ok(())
    }
}
