//! Position-bias models: how much of the searchers' attention each display
//! position receives.

use std::ops::Index;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum AttentionModel {
    /// `p (1-p)^(j-1)` for the first `cutoff` positions, zero below.
    Geometric { p: f64, cutoff: usize },
    /// The top position receives everything.
    Singular,
}

impl AttentionModel {
    pub fn geometric(p: f64, cutoff: usize) -> Result<Self> {
        let model = Self::Geometric { p, cutoff };
        model.validate()?;
        Ok(model)
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            Self::Geometric { p, cutoff } => {
                if !(p > 0.0 && p <= 1.0) {
                    return Err(Error::InvalidAttentionModel(format!(
                        "geometric p must lie in (0, 1], got {p}"
                    )));
                }
                if cutoff == 0 {
                    return Err(Error::InvalidAttentionModel(
                        "geometric cutoff must be at least 1".into(),
                    ));
                }
                Ok(())
            }
            Self::Singular => Ok(()),
        }
    }

    /// Number of leading positions that can receive attention.
    pub fn cutoff(&self) -> usize {
        match *self {
            Self::Geometric { cutoff, .. } => cutoff,
            Self::Singular => 1,
        }
    }

    /// Attention weights for a ranking of `n` positions, rescaled to sum to one.
    ///
    /// When `n` is below the cutoff the series is truncated at `n` before
    /// rescaling.
    pub fn position_weights(&self, n: usize) -> Result<PositionWeights> {
        self.validate()?;
        if n == 0 {
            return Err(Error::InvalidParameter(
                "position weights need at least one position".into(),
            ));
        }
        let raw = match *self {
            Self::Singular => {
                let mut w = vec![0.0; n];
                w[0] = 1.0;
                w
            }
            Self::Geometric { p, cutoff } => {
                let mut w = vec![0.0; n];
                let mut mass = p;
                for slot in w.iter_mut().take(cutoff) {
                    *slot = mass;
                    mass *= 1.0 - p;
                }
                w
            }
        };
        PositionWeights::from_raw(raw)
    }
}

/// Non-negative, non-increasing per-position attention summing to one.
#[derive(Debug, Clone, PartialEq)]
pub struct PositionWeights(Vec<f64>);

impl PositionWeights {
    /// Rescales `raw` to unit sum. An empty vector is allowed and stays empty.
    pub fn from_raw(raw: Vec<f64>) -> Result<Self> {
        if raw.iter().any(|w| !w.is_finite() || *w < 0.0) {
            return Err(Error::InvalidParameter(
                "attention weights must be finite and non-negative".into(),
            ));
        }
        if raw.windows(2).any(|w| w[1] > w[0]) {
            return Err(Error::InvalidParameter(
                "attention weights must be non-increasing".into(),
            ));
        }
        if raw.is_empty() {
            return Ok(Self(raw));
        }
        let total: f64 = raw.iter().sum();
        if total <= 0.0 {
            return Err(Error::InvalidParameter(
                "attention weights must have positive mass".into(),
            ));
        }
        Ok(Self(raw.into_iter().map(|w| w / total).collect()))
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

    /// Weights for the first `len` positions of this vector, rescaled.
    pub fn truncated(&self, len: usize) -> Result<Self> {
        Self::from_raw(self.0[..len.min(self.0.len())].to_vec())
    }
}

impl Index<usize> for PositionWeights {
    type Output = f64;

    fn index(&self, pos: usize) -> &f64 {
        &self.0[pos]
    }
}
