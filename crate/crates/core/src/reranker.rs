//! Ranking policies and the per-ranking step of an amortizing stream.

use std::cmp::Ordering;
use std::collections::HashMap;
use std::time::{Duration, Instant};

use crate::attention::{AttentionModel, PositionWeights};
use crate::error::{Error, Result};
use crate::ledger::{Ledger, SubjectId};
use crate::metrics::{dcg_at_k, discount, gain, ndcg_quality, unfairness};
use crate::solver::{self, AssignmentProblem, DEFAULT_FEASIBILITY_TOL};

const SUM_TOLERANCE: f64 = 1e-9;

/// One query's subjects with sum-normalized relevance, best first.
#[derive(Debug, Clone, PartialEq)]
pub struct RankingRequest {
    query_id: String,
    entries: Vec<(SubjectId, f64)>,
    position: HashMap<SubjectId, usize>,
}

impl RankingRequest {
    /// Validates an already normalized, relevance-sorted list.
    pub fn new(query_id: impl Into<String>, entries: Vec<(SubjectId, f64)>) -> Result<Self> {
        let query_id = query_id.into();
        let mut position = HashMap::with_capacity(entries.len());
        for (pos, (id, r)) in entries.iter().enumerate() {
            if !r.is_finite() || !(0.0..=1.0).contains(r) {
                return Err(Error::InvalidRequest(format!(
                    "relevance of `{id}` must lie in [0, 1], got {r}"
                )));
            }
            if position.insert(id.clone(), pos).is_some() {
                return Err(Error::DuplicateSubject(id.to_string()));
            }
        }
        if entries.windows(2).any(|w| w[1].1 > w[0].1) {
            return Err(Error::InvalidRequest(
                "entries must be sorted by non-increasing relevance".into(),
            ));
        }
        if !entries.is_empty() {
            let total: f64 = entries.iter().map(|(_, r)| r).sum();
            if (total - 1.0).abs() > SUM_TOLERANCE {
                return Err(Error::InvalidRequest(format!(
                    "relevance must sum to 1, got {total}"
                )));
            }
        }
        Ok(Self { query_id, entries, position })
    }

    /// Normalizes non-negative raw scores to a distribution and sorts them by
    /// decreasing relevance, breaking ties by subject id.
    pub fn from_scores(query_id: impl Into<String>, scores: Vec<(SubjectId, f64)>) -> Result<Self> {
        if let Some((id, s)) = scores.iter().find(|(_, s)| !s.is_finite() || *s < 0.0) {
            return Err(Error::InvalidRequest(format!(
                "score of `{id}` must be finite and non-negative, got {s}"
            )));
        }
        let total: f64 = scores.iter().map(|(_, s)| s).sum();
        if !scores.is_empty() && total <= 0.0 {
            return Err(Error::InvalidRequest("scores sum to zero".into()));
        }
        let mut entries: Vec<_> = scores.into_iter().map(|(id, s)| (id, s / total)).collect();
        entries.sort_by(|a, b| b.1.total_cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
        Self::new(query_id, entries)
    }

    pub fn query_id(&self) -> &str {
        &self.query_id
    }

    pub fn entries(&self) -> &[(SubjectId, f64)] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn ids(&self) -> impl Iterator<Item = &SubjectId> {
        self.entries.iter().map(|(id, _)| id)
    }

    pub fn relevances(&self) -> Vec<f64> {
        self.entries.iter().map(|(_, r)| *r).collect()
    }

    pub fn relevance_of(&self, id: &SubjectId) -> Option<f64> {
        self.position.get(id).map(|&pos| self.entries[pos].1)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IlpParams {
    /// Quality floor on NDCG@k, in `[0, 1]`.
    pub theta: f64,
    /// Candidate set size `t`.
    pub candidates: usize,
    /// Rank `k` at which quality is constrained.
    pub quality_rank: usize,
    /// Slack on the quality constraint, in NDCG units.
    pub feasibility_tol: f64,
}

impl IlpParams {
    pub fn new(theta: f64, candidates: usize, quality_rank: usize) -> Result<Self> {
        let params = Self {
            theta,
            candidates,
            quality_rank,
            feasibility_tol: DEFAULT_FEASIBILITY_TOL,
        };
        params.validate()?;
        Ok(params)
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.theta) {
            return Err(Error::InvalidParameter(format!(
                "theta must lie in [0, 1], got {}",
                self.theta
            )));
        }
        if self.quality_rank == 0 {
            return Err(Error::InvalidParameter("quality rank must be >= 1".into()));
        }
        if self.candidates < self.quality_rank {
            return Err(Error::InvalidParameter(format!(
                "candidate set size {} is smaller than quality rank {}",
                self.candidates, self.quality_rank
            )));
        }
        if !self.feasibility_tol.is_finite() || self.feasibility_tol < 0.0 {
            return Err(Error::InvalidParameter("feasibility tolerance must be >= 0".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RerankPolicy {
    /// Keep the relevance order.
    Relevance,
    /// Sort by ascending deficit `A - R - r`, no quality constraint.
    Objective,
    /// Exact per-ranking optimization over a prefiltered candidate set.
    Ilp(IlpParams),
}

impl RerankPolicy {
    pub fn validate(&self) -> Result<()> {
        match self {
            Self::Ilp(p) => p.validate(),
            _ => Ok(()),
        }
    }
}

pub fn rerank_relevance(request: &RankingRequest) -> Vec<SubjectId> {
    request.ids().cloned().collect()
}

/// Order of `(deficit asc, relevance desc, id asc)`.
fn by_deficit(a: &(f64, f64, &SubjectId), b: &(f64, f64, &SubjectId)) -> Ordering {
    a.0.total_cmp(&b.0)
        .then_with(|| b.1.total_cmp(&a.1))
        .then_with(|| a.2.cmp(b.2))
}

fn deficits<'a>(request: &'a RankingRequest, ledger: &Ledger) -> Result<Vec<(f64, f64, &'a SubjectId)>> {
    request
        .entries()
        .iter()
        .map(|(id, r)| Ok((ledger.deficit(id, *r)?, *r, id)))
        .collect()
}

pub fn rerank_objective(request: &RankingRequest, ledger: &Ledger) -> Result<Vec<SubjectId>> {
    let mut keyed = deficits(request, ledger)?;
    keyed.sort_by(by_deficit);
    Ok(keyed.into_iter().map(|(_, _, id)| id.clone()).collect())
}

/// Positions in `request` of the candidates to rerank, ascending: the top `k`
/// by relevance plus the lowest-deficit subjects among the rest, `min(t, n)`
/// in total.
pub fn prefilter_candidates(
    request: &RankingRequest,
    ledger: &Ledger,
    t: usize,
    k: usize,
) -> Result<Vec<usize>> {
    if t < k {
        return Err(Error::InvalidParameter(format!(
            "candidate set size {t} is smaller than quality rank {k}"
        )));
    }
    let n = request.len();
    if n <= t {
        return Ok((0..n).collect());
    }
    let keyed = deficits(request, ledger)?;
    let top = k.min(n);
    let mut rest: Vec<usize> = (top..n).collect();
    rest.sort_by(|&a, &b| by_deficit(&keyed[a], &keyed[b]));
    let mut chosen: Vec<usize> = (0..top).chain(rest.into_iter().take(t - top)).collect();
    chosen.sort_unstable();
    Ok(chosen)
}

#[derive(Debug, Clone, PartialEq)]
pub struct IlpOutcome {
    pub order: Vec<SubjectId>,
    pub feasible: bool,
    /// Solver objective over the candidates; infinite when infeasible.
    pub objective: f64,
    pub nodes: usize,
}

/// Builds the side-constrained assignment of `candidates` (positions into
/// `request`) onto the top `candidates.len()` display positions.
pub fn build_problem(
    request: &RankingRequest,
    ledger: &Ledger,
    weights: &PositionWeights,
    candidates: &[usize],
    params: &IlpParams,
) -> Result<AssignmentProblem> {
    let m = candidates.len();
    if weights.len() < m {
        return Err(Error::LengthMismatch {
            what: "position weights",
            got: weights.len(),
            expected: m,
        });
    }
    let k = params.quality_rank;
    let mut cost = Vec::with_capacity(m * m);
    let mut side = Vec::with_capacity(m * m);
    for &c in candidates {
        let (id, r) = &request.entries()[c];
        let entry = ledger.get(id).ok_or_else(|| Error::UnknownSubject(id.to_string()))?;
        let g = gain(*r);
        for j in 0..m {
            cost.push((entry.cum_attention + weights[j] - (entry.cum_relevance + r)).abs());
            side.push(if j < k { g / discount(j) } else { 0.0 });
        }
    }
    let ideal = dcg_at_k(&request.relevances(), k);
    // Tolerance is stated on the NDCG scale; the constraint is on raw DCG.
    AssignmentProblem::from_flat(m, cost, side, params.theta * ideal)?
        .with_feasibility_tol(params.feasibility_tol * ideal)
}

pub fn rerank_ilp(
    request: &RankingRequest,
    ledger: &Ledger,
    weights: &PositionWeights,
    params: &IlpParams,
) -> Result<IlpOutcome> {
    params.validate()?;
    if request.is_empty() {
        return Ok(IlpOutcome {
            order: Vec::new(),
            feasible: true,
            objective: 0.0,
            nodes: 0,
        });
    }
    let candidates = prefilter_candidates(request, ledger, params.candidates, params.quality_rank)?;
    let problem = build_problem(request, ledger, weights, &candidates, params)?;
    let solved = solver::solve_exact(&problem);

    let entries = request.entries();
    let mut top: Vec<SubjectId> = candidates.iter().map(|&c| entries[c].0.clone()).collect();
    if solved.feasible {
        let mut placed = vec![None; top.len()];
        for (i, &pos) in solved.assignment.iter().enumerate() {
            placed[pos] = Some(top[i].clone());
        }
        top = placed.into_iter().map(|s| s.expect("assignment is a bijection")).collect();
    }
    let mut is_candidate = vec![false; entries.len()];
    for &c in &candidates {
        is_candidate[c] = true;
    }
    let rest = entries
        .iter()
        .zip(&is_candidate)
        .filter(|(_, &cand)| !cand)
        .map(|((id, _), _)| id.clone());
    let order = top.into_iter().chain(rest).collect();
    Ok(IlpOutcome {
        order,
        feasible: solved.feasible,
        objective: solved.objective,
        nodes: solved.nodes,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct IterationRecord {
    /// One-based index of the ranking in the stream.
    pub iteration: u64,
    /// Unfairness after this ranking was applied.
    pub unfairness: f64,
    pub ndcg_quality: f64,
    pub solver_feasible: bool,
    /// Time spent producing the display order.
    pub solve_time: Duration,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StepOutcome {
    pub order: Vec<SubjectId>,
    pub record: IterationRecord,
}

/// A ranking stream: one ledger updated sequentially by one policy.
#[derive(Debug, Clone)]
pub struct Stream {
    ledger: Ledger,
    policy: RerankPolicy,
    model: AttentionModel,
    quality_rank: usize,
}

impl Stream {
    /// Quality is recorded at the ILP's constrained rank, or at the attention
    /// cutoff for the baselines.
    pub fn new(policy: RerankPolicy, model: AttentionModel) -> Result<Self> {
        policy.validate()?;
        model.validate()?;
        let quality_rank = match policy {
            RerankPolicy::Ilp(p) => p.quality_rank,
            _ => model.cutoff(),
        };
        Ok(Self {
            ledger: Ledger::new(),
            policy,
            model,
            quality_rank,
        })
    }

    pub fn with_quality_rank(mut self, k: usize) -> Result<Self> {
        if k == 0 {
            return Err(Error::InvalidParameter("quality rank must be >= 1".into()));
        }
        self.quality_rank = k;
        Ok(self)
    }

    pub fn with_ledger(mut self, ledger: Ledger) -> Self {
        self.ledger = ledger;
        self
    }

    pub fn ledger(&self) -> &Ledger {
        &self.ledger
    }

    pub fn policy(&self) -> &RerankPolicy {
        &self.policy
    }

    pub fn quality_rank(&self) -> usize {
        self.quality_rank
    }

    pub fn step(&mut self, request: &RankingRequest) -> Result<StepOutcome> {
        self.ledger.ensure_subjects(request.ids());
        let weights = if request.is_empty() {
            PositionWeights::from_raw(Vec::new())?
        } else {
            self.model.position_weights(request.len())?
        };

        let started = Instant::now();
        let (order, feasible) = match &self.policy {
            RerankPolicy::Relevance => (rerank_relevance(request), true),
            RerankPolicy::Objective => (rerank_objective(request, &self.ledger)?, true),
            RerankPolicy::Ilp(params) => {
                let out = rerank_ilp(request, &self.ledger, &weights, params)?;
                (out.order, out.feasible)
            }
        };
        let solve_time = started.elapsed();

        self.ledger
            .apply_ranking(&order, &weights, |id| request.relevance_of(id))?;
        let emitted: Vec<f64> = order
            .iter()
            .map(|id| request.relevance_of(id).expect("order is a permutation of the request"))
            .collect();
        let record = IterationRecord {
            iteration: self.ledger.iterations_processed(),
            unfairness: unfairness(&self.ledger),
            ndcg_quality: ndcg_quality(&request.relevances(), &emitted, self.quality_rank)?,
            solver_feasible: feasible,
            solve_time,
        };
        Ok(StepOutcome { order, record })
    }
}
