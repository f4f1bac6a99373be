//! Unfairness of cumulative attention and NDCG-based ranking quality.

use crate::error::{Error, Result};
use crate::ledger::Ledger;

/// L1 distance between cumulative attention and cumulative relevance over
/// every subject the ledger has seen.
pub fn unfairness(ledger: &Ledger) -> f64 {
    ledger
        .iter()
        .map(|(_, e)| (e.cum_attention - e.cum_relevance).abs())
        .sum()
}

/// Exponential gain `2^r - 1`.
pub fn gain(relevance: f64) -> f64 {
    relevance.exp2() - 1.0
}

/// Logarithmic discount of the zero-based display position `pos`.
pub fn discount(pos: usize) -> f64 {
    ((pos + 2) as f64).log2()
}

/// `sum_{i<=min(k,n)} (2^{r_i} - 1) / log2(i + 1)`.
pub fn dcg_at_k(relevances: &[f64], k: usize) -> f64 {
    relevances
        .iter()
        .take(k)
        .enumerate()
        .map(|(pos, &r)| gain(r) / discount(pos))
        .sum()
}

/// DCG@k of `reordered` relative to DCG@k of the relevance-sorted `original`.
///
/// Both lists must hold the same multiset of scores. When the original has no
/// gain in its top `k` the quality is defined as one.
pub fn ndcg_quality(original: &[f64], reordered: &[f64], k: usize) -> Result<f64> {
    if !same_multiset(original, reordered) {
        return Err(Error::MultisetMismatch);
    }
    let ideal = dcg_at_k(original, k);
    if ideal <= 0.0 {
        return Ok(1.0);
    }
    Ok(dcg_at_k(reordered, k) / ideal)
}

fn same_multiset(a: &[f64], b: &[f64]) -> bool {
    if a.len() != b.len() {
        return false;
    }
    let mut a = a.to_vec();
    let mut b = b.to_vec();
    a.sort_by(f64::total_cmp);
    b.sort_by(f64::total_cmp);
    a.iter().zip(&b).all(|(x, y)| x.to_bits() == y.to_bits())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QualityParams {
    pub k: usize,
    pub theta: f64,
}

impl QualityParams {
    pub fn new(k: usize, theta: f64) -> Result<Self> {
        if k == 0 {
            return Err(Error::InvalidParameter("quality rank k must be >= 1".into()));
        }
        if !(0.0..=1.0).contains(&theta) {
            return Err(Error::InvalidParameter(format!(
                "theta must lie in [0, 1], got {theta}"
            )));
        }
        Ok(Self { k, theta })
    }
}
