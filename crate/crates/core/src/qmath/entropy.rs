//! Classical entropies in bits.

use super::{ENTROPY_FLOOR, PROB_TOL};
use crate::{Error, Result};

/// Slack tolerated outside `[0, 1]` before a probability is rejected.
const CLAMP_SLACK: f64 = 1e-12;

/// A finite probability distribution.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbabilityVector(Vec<f64>);

impl ProbabilityVector {
    pub fn new(p: Vec<f64>) -> Result<Self> {
        if p.is_empty() {
            return Err(Error::domain("empty probability vector"));
        }
        if let Some(bad) = p.iter().find(|x| !(x.is_finite() && **x >= 0.0)) {
            return Err(Error::domain(format!("negative or non-finite probability {bad}")));
        }
        let total: f64 = p.iter().sum();
        if (total - 1.0).abs() > PROB_TOL {
            return Err(Error::domain(format!("probabilities sum to {total}, not 1")));
        }
        Ok(ProbabilityVector(p))
    }

    pub fn uniform(n: usize) -> Self {
        ProbabilityVector(vec![1.0 / n as f64; n])
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// `-p log2 p`, with the `0 log 0 = 0` convention applied below the floor.
#[inline]
fn plogp(p: f64) -> f64 {
    if p <= ENTROPY_FLOOR {
        0.0
    } else {
        -p * p.log2()
    }
}

/// `h(p) = -p log2 p - (1-p) log2(1-p)`.
pub fn binary_entropy(p: f64) -> Result<f64> {
    if !(-CLAMP_SLACK..=1.0 + CLAMP_SLACK).contains(&p) {
        return Err(Error::domain(format!("binary entropy argument {p} outside [0, 1]")));
    }
    let p = p.clamp(0.0, 1.0);
    Ok(plogp(p) + plogp(1.0 - p))
}

pub fn shannon_entropy(p: &ProbabilityVector) -> f64 {
    p.as_slice().iter().map(|&x| plogp(x)).sum()
}

/// Shannon entropy of raw values that are known to be a distribution
/// (eigenvalue spectra after clamping). No validation.
pub(crate) fn shannon_unchecked(p: &[f64]) -> f64 {
    p.iter().map(|&x| plogp(x)).sum()
}
