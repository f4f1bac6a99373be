//! Runs configured experiments and writes their metric curves.

use std::fs;
use std::path::Path;
use std::time::{Duration, Instant};

use amortize::data::{self, SyntheticShape};
use amortize::{IterationRecord, Ledger, RankingRequest, Stream, SubjectId};
use anyhow::{bail, Context, Result};
use serde::Serialize;

use crate::config::{DatasetKind, ExperimentConfig, Mode, ShapeKind};

pub const ITERATIONS_FILE: &str = "iterations.csv";
pub const LEDGER_FILE: &str = "ledger.csv";
pub const SUMMARY_FILE: &str = "summary.json";

pub fn load_requests(config: &ExperimentConfig) -> Result<Vec<RankingRequest>> {
    let requests = match config.dataset {
        DatasetKind::Synthetic => {
            let shape = match config.shape.context("synthetic datasets need `shape`")? {
                ShapeKind::Uniform => SyntheticShape::Uniform,
                ShapeKind::Linear => SyntheticShape::Linear,
                ShapeKind::Exponential => SyntheticShape::Exponential { decay: config.decay },
            };
            vec![data::generate(shape, config.n)?]
        }
        DatasetKind::Listings => {
            let path = config.path.as_ref().context("listings datasets need `path`")?;
            data::load_listings(path, &config.id_column, &config.rating_columns)
                .with_context(|| format!("loading listings {}", path.display()))?
        }
        DatasetKind::Querylog => {
            let path = config.path.as_ref().context("querylog datasets need `path`")?;
            data::load_querylog(path).with_context(|| format!("loading query log {}", path.display()))?
        }
    };
    if requests.is_empty() {
        bail!("dataset produced no rankings");
    }
    Ok(requests)
}

/// The sequence of requests the configured mode processes.
pub fn schedule<'a>(
    config: &ExperimentConfig,
    requests: &'a [RankingRequest],
) -> Box<dyn Iterator<Item = &'a RankingRequest> + 'a> {
    match config.mode {
        Mode::SingleQuery => Box::new(std::iter::repeat_n(&requests[0], config.iterations.unwrap_or(0))),
        Mode::MultiQuery => {
            let repeats = config.sequence_repeats.unwrap_or(0);
            Box::new((0..repeats).flat_map(move |_| requests.iter()))
        }
        Mode::Stream => Box::new(requests.iter()),
    }
}

#[derive(Debug, Clone)]
pub struct ExperimentRun {
    pub label: String,
    pub records: Vec<IterationRecord>,
    pub ledger: Ledger,
    pub runtime: Duration,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Summary {
    pub label: String,
    pub iterations: usize,
    pub final_unfairness: f64,
    pub mean_unfairness: f64,
    pub min_quality: f64,
    pub max_quality: f64,
    pub infeasible_iterations: usize,
    pub total_runtime_ms: f64,
}

impl ExperimentRun {
    pub fn summary(&self) -> Summary {
        let n = self.records.len();
        let qualities = self.records.iter().map(|r| r.ndcg_quality);
        Summary {
            label: self.label.clone(),
            iterations: n,
            final_unfairness: self.records.last().map_or(0.0, |r| r.unfairness),
            mean_unfairness: self.records.iter().map(|r| r.unfairness).sum::<f64>() / n.max(1) as f64,
            min_quality: qualities.clone().fold(f64::INFINITY, f64::min),
            max_quality: qualities.fold(f64::NEG_INFINITY, f64::max),
            infeasible_iterations: self.records.iter().filter(|r| !r.solver_feasible).count(),
            total_runtime_ms: self.runtime.as_secs_f64() * 1e3,
        }
    }

    pub fn unfairness(&self) -> Vec<f64> {
        self.records.iter().map(|r| r.unfairness).collect()
    }

    /// `iteration,unfairness,ndcg_quality,feasible,solve_ms`
    pub fn write_iterations<W: std::io::Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(["iteration", "unfairness", "ndcg_quality", "feasible", "solve_ms"])?;
        for r in &self.records {
            w.write_record([
                r.iteration.to_string(),
                r.unfairness.to_string(),
                r.ndcg_quality.to_string(),
                r.solver_feasible.to_string(),
                format!("{:.3}", r.solve_time.as_secs_f64() * 1e3),
            ])?;
        }
        w.flush()?;
        Ok(())
    }

    /// Writes the metric curve, ledger snapshot and summary into `dir`.
    pub fn write_outputs(&self, dir: &Path) -> Result<()> {
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
        let open = |name: &str| {
            let path = dir.join(name);
            fs::File::create(&path).with_context(|| format!("creating {}", path.display()))
        };
        self.write_iterations(open(ITERATIONS_FILE)?)?;
        self.ledger.write_csv(open(LEDGER_FILE)?)?;
        serde_json::to_writer_pretty(open(SUMMARY_FILE)?, &self.summary())?;
        Ok(())
    }
}

pub fn run(config: &ExperimentConfig) -> Result<ExperimentRun> {
    run_observed(config, |_, _| {})
}

/// Runs the experiment, handing every emitted display order to `observe`
/// together with the request it answered.
pub fn run_observed<F>(config: &ExperimentConfig, mut observe: F) -> Result<ExperimentRun>
where
    F: FnMut(&RankingRequest, &[SubjectId]),
{
    config.validate()?;
    let requests = load_requests(config)?;
    let mut stream = Stream::new(config.rerank_policy()?, config.attention_model()?)?
        .with_quality_rank(config.effective_quality_rank()?)?;

    let started = Instant::now();
    let mut records = Vec::new();
    for request in schedule(config, &requests) {
        let out = stream
            .step(request)
            .with_context(|| format!("iteration {}", records.len() + 1))?;
        observe(request, &out.order);
        records.push(out.record);
    }
    Ok(ExperimentRun {
        label: config.label(),
        records,
        ledger: stream.ledger().clone(),
        runtime: started.elapsed(),
    })
}

/// Unfairness curves of several runs, aligned by iteration.
#[derive(Debug, Clone, PartialEq)]
pub struct CurveTable {
    pub labels: Vec<String>,
    pub columns: Vec<Vec<f64>>,
}

impl CurveTable {
    pub fn rows(&self) -> usize {
        self.columns.iter().map(Vec::len).max().unwrap_or(0)
    }

    /// Wide CSV: `iteration,<label>...`; a shorter run leaves its cells empty.
    pub fn write_csv<W: std::io::Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        let header = std::iter::once("iteration".to_string()).chain(self.labels.iter().cloned());
        w.write_record(header)?;
        for i in 0..self.rows() {
            let cells = self
                .columns
                .iter()
                .map(|c| c.get(i).map(f64::to_string).unwrap_or_default());
            w.write_record(std::iter::once((i + 1).to_string()).chain(cells))?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Runs every config (in parallel, each with its own ledger) and merges their
/// unfairness curves.
pub fn compare(configs: &[ExperimentConfig]) -> Result<(CurveTable, Vec<ExperimentRun>)> {
    let Some(first) = configs.first() else {
        bail!("compare needs at least one config");
    };
    let key = first.comparison_key();
    for c in &configs[1..] {
        if c.comparison_key() != key {
            bail!(
                "configs must share dataset and attention model:\n  {key}\n  {}",
                c.comparison_key()
            );
        }
    }
    let mut labels: Vec<String> = Vec::new();
    for c in configs {
        let label = c.label();
        if labels.contains(&label) {
            bail!("duplicate column label `{label}`; set `label` to disambiguate");
        }
        labels.push(label);
    }

    let runs = std::thread::scope(|scope| {
        let handles: Vec<_> = configs.iter().map(|c| scope.spawn(move || run(c))).collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("experiment thread panicked"))
            .collect::<Result<Vec<_>>>()
    })?;
    let table = CurveTable {
        labels,
        columns: runs.iter().map(ExperimentRun::unfairness).collect(),
    };
    Ok((table, runs))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn config(extra: &str) -> ExperimentConfig {
        let text = format!(
            "dataset = \"synthetic\"\nshape = \"uniform\"\nn = 4\nmode = \"single_query\"\n\
             iterations = 8\nattention = \"singular\"\n{extra}"
        );
        ExperimentConfig::from_toml_str(&text).unwrap()
    }

    #[test]
    fn single_query_repeats_first_request() {
        let run = run(&config("policy = \"objective\"")).unwrap();
        assert_eq!(run.records.len(), 8);
        let u = run.unfairness();
        assert!(u[3].abs() < 1e-12 && u[7].abs() < 1e-12, "{u:?}");
        assert_eq!(run.ledger.iterations_processed(), 8);
    }

    #[test]
    fn summary_reports_extremes() {
        let run = run(&config("policy = \"relevance\"")).unwrap();
        let s = run.summary();
        assert_eq!(s.iterations, 8);
        assert_eq!(s.min_quality, 1.0);
        assert_eq!(s.max_quality, 1.0);
        assert!((s.final_unfairness - 8.0 * 1.5).abs() < 1e-9);
        assert_eq!(s.infeasible_iterations, 0);
    }

    #[test]
    fn compare_rejects_mismatched_datasets() {
        let a = config("policy = \"relevance\"");
        let mut b = config("policy = \"objective\"");
        b.n = 5;
        assert!(compare(&[a.clone(), b]).is_err());
        assert!(compare(&[a.clone(), a]).is_err(), "duplicate labels");
        assert!(compare(&[]).is_err());
    }

    #[test]
    fn compare_single_config_matches_run() {
        let a = config("policy = \"objective\"");
        let (table, _) = compare(std::slice::from_ref(&a)).unwrap();
        assert_eq!(table.labels, vec!["objective"]);
        assert_eq!(table.columns[0], run(&a).unwrap().unfairness());
    }

    #[test]
    fn curve_table_pads_short_columns() {
        let t = CurveTable {
            labels: vec!["a".into(), "b".into()],
            columns: vec![vec![1.0, 2.0], vec![0.5]],
        };
        let mut buf = Vec::new();
        t.write_csv(&mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "iteration,a,b\n1,1,0.5\n2,2,\n");
    }
}
