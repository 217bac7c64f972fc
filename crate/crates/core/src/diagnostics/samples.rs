use serde::{Deserialize, Serialize};

use crate::gibbs::ChainOutput;
use crate::stats;
use crate::{Error, Result, Vec3};

/// Increments `X(t + ℓ) − X(t)` at one lag `ℓ`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IncrementSample {
    pub lag: f64,
    pub vectors: Vec<Vec3>,
    pub source: String,
}

impl IncrementSample {
    pub fn new(lag: f64, vectors: Vec<Vec3>, source: impl Into<String>) -> Self {
        Self { lag, vectors, source: source.into() }
    }

    /// Pools the recorded increments at `lag` from several chains (chain order).
    pub fn from_chains(chains: &[ChainOutput], lag: f64, source: impl Into<String>) -> Result<Self> {
        let mut vectors = Vec::new();
        for c in chains {
            let rec = c
                .increments
                .iter()
                .find(|l| (l.lag - lag).abs() <= 1e-12 * lag.max(1.0))
                .ok_or_else(|| Error::InsufficientSamples(format!("chain {} recorded no increments at lag {lag}", c.chain_id)))?;
            vectors.extend_from_slice(&rec.vectors);
        }
        Ok(Self::new(lag, vectors, source))
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    pub fn scaled(&self, factor: f64, lag: f64) -> Self {
        let vectors = self.vectors.iter().map(|v| [factor * v[0], factor * v[1], factor * v[2]]).collect();
        Self { lag, vectors, source: self.source.clone() }
    }

    pub fn squared_norms(&self) -> Vec<f64> {
        self.vectors.iter().map(|v| v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MsdPoint {
    pub lag: f64,
    pub mean: f64,
    pub stderr: f64,
    pub n: usize,
}

/// Mean squared increment per lag with its i.i.d. standard error.
pub fn msd_curve(samples: &[IncrementSample]) -> Result<Vec<MsdPoint>> {
    samples
        .iter()
        .map(|s| {
            if s.len() < 30 {
                return Err(Error::InsufficientSamples(format!("{} increments at lag {}", s.len(), s.lag)));
            }
            let e = stats::mean_stderr(&s.squared_norms());
            Ok(MsdPoint { lag: s.lag, mean: e.value, stderr: e.stderr, n: s.len() })
        })
        .collect()
}
