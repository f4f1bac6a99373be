//! Synthetic relevance profiles and CSV ingestion.
//!
//! Every loader produces [`RankingRequest`]s whose relevance is a distribution
//! over the ranked subjects.

use std::path::Path;

use crate::error::{Error, Result};
use crate::ledger::SubjectId;
use crate::reranker::RankingRequest;

pub const DEFAULT_EXPONENTIAL_DECAY: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SyntheticShape {
    /// Every subject scores 1.
    Uniform,
    /// Subject `i` scores `n - i + 1`.
    Linear,
    /// Subject `i` scores `decay^(i-1)`.
    Exponential { decay: f64 },
}

/// Subjects `u1..un` with raw scores given by `shape`, normalized to sum 1.
pub fn generate(shape: SyntheticShape, n: usize) -> Result<RankingRequest> {
    if n == 0 {
        return Err(Error::InvalidParameter("synthetic datasets need n >= 1".into()));
    }
    if let SyntheticShape::Exponential { decay } = shape {
        if !(decay > 0.0 && decay < 1.0) {
            return Err(Error::InvalidParameter(format!(
                "exponential decay must lie in (0, 1), got {decay}"
            )));
        }
    }
    let total_raw: f64 = (1..=n).map(|i| raw_score(shape, n, i)).sum();
    let entries = (1..=n)
        .map(|i| Ok((SubjectId::new(format!("u{i}"))?, raw_score(shape, n, i) / total_raw)))
        .collect::<Result<Vec<_>>>()?;
    // Scores are already non-increasing in i; ties (uniform) keep u1..un order.
    RankingRequest::new("synthetic", entries)
}

fn raw_score(shape: SyntheticShape, n: usize, i: usize) -> f64 {
    match shape {
        SyntheticShape::Uniform => 1.0,
        SyntheticShape::Linear => (n - i + 1) as f64,
        SyntheticShape::Exponential { decay } => decay.powi(i as i32 - 1),
    }
}

fn parse_error(path: &Path, message: impl Into<String>) -> Error {
    Error::Parse {
        path: path.to_path_buf(),
        message: message.into(),
    }
}

fn column_index(headers: &csv::StringRecord, name: &str) -> Result<usize> {
    headers
        .iter()
        .position(|h| h.trim() == name)
        .ok_or_else(|| Error::MissingColumn(name.to_string()))
}

fn parse_rating(raw: &str) -> Option<f64> {
    let value: f64 = raw.trim().trim_end_matches('%').trim().parse().ok()?;
    (value.is_finite() && value >= 0.0).then_some(value)
}

/// Reads a listings file and returns one request per rating column.
///
/// Rows whose rating in a column is missing or unparseable are left out of
/// that column's request. Ratings are divided by the column maximum and then
/// normalized to sum 1.
pub fn load_listings(
    path: impl AsRef<Path>,
    id_column: &str,
    rating_columns: &[String],
) -> Result<Vec<RankingRequest>> {
    let path = path.as_ref();
    let mut reader = csv::ReaderBuilder::new().flexible(true).from_path(path)?;
    let headers = reader.headers()?.clone();
    let id_idx = column_index(&headers, id_column)?;
    let rating_idx = rating_columns
        .iter()
        .map(|c| column_index(&headers, c))
        .collect::<Result<Vec<_>>>()?;

    let mut columns: Vec<Vec<(SubjectId, f64)>> = vec![Vec::new(); rating_columns.len()];
    for (line, record) in reader.records().enumerate() {
        let record = record?;
        let raw_id = record.get(id_idx).unwrap_or("").trim();
        if raw_id.is_empty() {
            return Err(parse_error(path, format!("row {}: empty subject id", line + 2)));
        }
        let id = SubjectId::new(raw_id)?;
        for (col, &idx) in rating_idx.iter().enumerate() {
            if let Some(value) = record.get(idx).and_then(parse_rating) {
                columns[col].push((id.clone(), value));
            }
        }
    }

    rating_columns
        .iter()
        .zip(columns)
        .map(|(name, scores)| {
            let max = scores.iter().map(|(_, s)| *s).fold(0.0, f64::max);
            if max <= 0.0 {
                return Err(Error::EmptyDataset(name.clone()));
            }
            let rescaled = scores.into_iter().map(|(id, s)| (id, s / max)).collect();
            RankingRequest::from_scores(name.clone(), rescaled)
        })
        .collect()
}

/// Reads a `query_id,subject_id,score` log. Each run of consecutive rows with
/// the same query id becomes one request, in file order.
pub fn load_querylog(path: impl AsRef<Path>) -> Result<Vec<RankingRequest>> {
    let path = path.as_ref();
    let mut reader = csv::Reader::from_path(path)?;
    let headers = reader.headers()?.clone();
    let query_idx = column_index(&headers, "query_id")?;
    let subject_idx = column_index(&headers, "subject_id")?;
    let score_idx = column_index(&headers, "score")?;

    let mut requests = Vec::new();
    let mut current: Option<(String, Vec<(SubjectId, f64)>)> = None;
    for (line, record) in reader.records().enumerate() {
        let record = record?;
        let row = line + 2;
        let field = |idx: usize| record.get(idx).unwrap_or("").trim();
        let query = field(query_idx);
        let subject = SubjectId::new(field(subject_idx))
            .map_err(|_| parse_error(path, format!("row {row}: empty subject id")))?;
        let score = parse_rating(field(score_idx)).ok_or_else(|| {
            parse_error(path, format!("row {row}: invalid score `{}`", field(score_idx)))
        })?;

        match &mut current {
            Some((q, scores)) if q == query => {
                if scores.iter().any(|(s, _)| *s == subject) {
                    return Err(Error::DuplicateSubject(format!("{subject} in query {q}")));
                }
                scores.push((subject, score));
            }
            _ => {
                if let Some((q, scores)) = current.take() {
                    requests.push(finish_query(path, q, scores)?);
                }
                current = Some((query.to_string(), vec![(subject, score)]));
            }
        }
    }
    if let Some((q, scores)) = current {
        requests.push(finish_query(path, q, scores)?);
    }
    Ok(requests)
}

fn finish_query(path: &Path, query: String, scores: Vec<(SubjectId, f64)>) -> Result<RankingRequest> {
    RankingRequest::from_scores(query.clone(), scores)
        .map_err(|e| parse_error(path, format!("query {query}: {e}")))
}
