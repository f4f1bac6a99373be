//! Amortized equity of attention for streams of rankings.
//!
//! Each incoming ranking is reordered so that, summed over the stream, the
//! attention a subject receives tracks the relevance it earns. Attention per
//! display position comes from a position-bias model; the reordering of each
//! ranking is an exactly solved assignment problem whose side constraint keeps
//! NDCG above a floor.
//!
//! The modules, bottom-up:
//!
//! * [`ledger`]: cumulative attention and relevance per subject;
//! * [`attention`]: geometric and singular position-bias models;
//! * [`metrics`]: unfairness, DCG and NDCG-quality;
//! * [`solver`]: exact side-constrained assignment plus a brute-force oracle;
//! * [`reranker`]: the Relevance, Objective and ILP policies and the per-ranking step;
//! * [`data`]: synthetic relevance profiles and CSV ingestion.

pub mod attention;
pub mod data;
pub mod error;
pub mod ledger;
pub mod metrics;
pub mod reranker;
pub mod solver;

pub use attention::{AttentionModel, PositionWeights};
pub use error::{Error, Result};
pub use ledger::{Ledger, LedgerEntry, SubjectId};
pub use reranker::{IlpParams, IterationRecord, RankingRequest, RerankPolicy, Stream};
pub use solver::{AssignmentProblem, SolveResult};
