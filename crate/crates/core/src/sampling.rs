//! Seeded random interior states.
//!
//! The generator is ChaCha8 (`rand_chacha` 0.9) seeded through
//! `SeedableRng::seed_from_u64`. Each simplex point draws `n` standard
//! exponentials (`rand_distr::Exp1`, ziggurat) and divides them by their sum,
//! which is the flat Dirichlet distribution. Points with a coordinate below
//! [`MIN_COORD`] are discarded and redrawn. A state draws `x` first, then `w`.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp1};

use crate::error::Result;
use crate::simplex::{SimplexPoint, SystemState};

/// Smallest coordinate a sampled point may have.
pub const MIN_COORD: f64 = 1e-6;

/// Name and version of the generator, for run metadata.
pub const GENERATOR: &str = "chacha8 (rand_chacha 0.9, seed_from_u64), Exp1 draws normalized";

/// A stream of uniformly distributed interior points.
#[derive(Debug, Clone)]
pub struct InteriorSampler {
    rng: ChaCha8Rng,
}

impl InteriorSampler {
    pub fn new(seed: u64) -> Self {
        InteriorSampler {
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    pub fn next_point(&mut self, n: usize) -> Result<SimplexPoint> {
        // Rejects n < 3 before drawing.
        SimplexPoint::uniform(n)?;
        loop {
            let draws: Vec<f64> = (0..n).map(|_| Exp1.sample(&mut self.rng)).collect();
            let sum: f64 = draws.iter().sum();
            if !(sum > 0.0 && sum.is_finite()) {
                continue;
            }
            let coords: Vec<f64> = draws.iter().map(|d| d / sum).collect();
            if coords.iter().all(|&c| c >= MIN_COORD) {
                return SimplexPoint::new(coords);
            }
        }
    }

    pub fn next_state(&mut self, n: usize) -> Result<SystemState> {
        let x = self.next_point(n)?;
        let w = self.next_point(n)?;
        SystemState::new(x, w)
    }
}

/// The first state drawn from [`InteriorSampler::new(seed)`](InteriorSampler::new).
pub fn random_interior_state(seed: u64, n: usize) -> Result<SystemState> {
    InteriorSampler::new(seed).next_state(n)
}
