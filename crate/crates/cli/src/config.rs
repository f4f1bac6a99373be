//! Flat TOML experiment configuration.
//!
//! ```toml
//! dataset = "synthetic"     # synthetic | listings | querylog
//! shape = "linear"          # uniform | linear | exponential
//! n = 100
//! mode = "single_query"     # single_query | multi_query | stream
//! iterations = 20000
//! policy = "ilp"            # relevance | objective | ilp
//! theta = 0.8
//! attention = "geometric"   # singular | geometric
//! output = "out/linear-ilp-0.8"
//! ```
//!
//! Unknown keys are rejected. Any key can be overridden from the command line
//! with `--set key=value`.

use std::path::{Path, PathBuf};

use amortize::data::DEFAULT_EXPONENTIAL_DECAY;
use amortize::solver::DEFAULT_FEASIBILITY_TOL;
use amortize::{AttentionModel, IlpParams, RerankPolicy};
use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DatasetKind {
    Synthetic,
    Listings,
    Querylog,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ShapeKind {
    Uniform,
    Linear,
    Exponential,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    /// Repeat the first request `iterations` times.
    SingleQuery,
    /// Cycle through every request `sequence_repeats` times.
    MultiQuery,
    /// Process each request once, in file order.
    Stream,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PolicyKind {
    Relevance,
    Objective,
    Ilp,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AttentionKind {
    Singular,
    Geometric,
}

fn default_n() -> usize {
    100
}
fn default_decay() -> f64 {
    DEFAULT_EXPONENTIAL_DECAY
}
fn default_id_column() -> String {
    "id".into()
}
fn default_candidates() -> usize {
    100
}
fn default_p() -> f64 {
    0.5
}
fn default_cutoff() -> usize {
    5
}
fn default_tol() -> f64 {
    DEFAULT_FEASIBILITY_TOL
}
fn default_output() -> PathBuf {
    PathBuf::from("out")
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub dataset: DatasetKind,
    #[serde(default)]
    pub shape: Option<ShapeKind>,
    #[serde(default = "default_n")]
    pub n: usize,
    #[serde(default = "default_decay")]
    pub decay: f64,
    #[serde(default)]
    pub path: Option<PathBuf>,
    #[serde(default = "default_id_column")]
    pub id_column: String,
    #[serde(default)]
    pub rating_columns: Vec<String>,

    pub mode: Mode,
    #[serde(default)]
    pub iterations: Option<usize>,
    #[serde(default)]
    pub sequence_repeats: Option<usize>,

    pub policy: PolicyKind,
    #[serde(default)]
    pub theta: Option<f64>,
    #[serde(default = "default_candidates")]
    pub candidates: usize,
    /// Defaults to the attention cutoff: 1 for singular, `cutoff` for geometric.
    #[serde(default)]
    pub quality_rank: Option<usize>,
    #[serde(default = "default_tol")]
    pub feasibility_tol: f64,

    pub attention: AttentionKind,
    #[serde(default = "default_p")]
    pub p: f64,
    #[serde(default = "default_cutoff")]
    pub cutoff: usize,

    #[serde(default = "default_output")]
    pub output: PathBuf,
    #[serde(default)]
    pub label: Option<String>,
}

impl ExperimentConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let table: toml::Table = text.parse().context("config is not valid TOML")?;
        Self::from_table(table)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::load_with_overrides(path, &[])
    }

    /// Reads `path` and applies `key=value` overrides before validating.
    pub fn load_with_overrides(path: &Path, overrides: &[String]) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading config {}", path.display()))?;
        let mut table: toml::Table = text
            .parse()
            .with_context(|| format!("{} is not valid TOML", path.display()))?;
        for o in overrides {
            apply_override(&mut table, o)?;
        }
        Self::from_table(table).with_context(|| format!("invalid config {}", path.display()))
    }

    fn from_table(table: toml::Table) -> Result<Self> {
        if let Some((key, _)) = table.iter().find(|(_, v)| v.is_table()) {
            bail!("config must be flat, but `{key}` is a table");
        }
        let config: Self = toml::Value::Table(table).try_into()?;
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<()> {
        match self.dataset {
            DatasetKind::Synthetic => {
                if self.shape.is_none() {
                    bail!("synthetic datasets need `shape`");
                }
                if self.n == 0 {
                    bail!("`n` must be at least 1");
                }
            }
            DatasetKind::Listings => {
                if self.path.is_none() {
                    bail!("listings datasets need `path`");
                }
                if self.rating_columns.is_empty() {
                    bail!("listings datasets need at least one entry in `rating_columns`");
                }
            }
            DatasetKind::Querylog => {
                if self.path.is_none() {
                    bail!("querylog datasets need `path`");
                }
            }
        }
        match self.mode {
            Mode::SingleQuery => match self.iterations {
                Some(i) if i >= 1 => {}
                _ => bail!("single_query mode needs `iterations` >= 1"),
            },
            Mode::MultiQuery => match self.sequence_repeats {
                Some(r) if r >= 1 => {}
                _ => bail!("multi_query mode needs `sequence_repeats` >= 1"),
            },
            Mode::Stream => {}
        }
        self.attention_model()?;
        self.rerank_policy()?;
        if let Some(k) = self.quality_rank {
            if k == 0 {
                bail!("`quality_rank` must be at least 1");
            }
        }
        Ok(())
    }

    pub fn attention_model(&self) -> Result<AttentionModel> {
        Ok(match self.attention {
            AttentionKind::Singular => AttentionModel::Singular,
            AttentionKind::Geometric => AttentionModel::geometric(self.p, self.cutoff)?,
        })
    }

    pub fn effective_quality_rank(&self) -> Result<usize> {
        Ok(self.quality_rank.unwrap_or(self.attention_model()?.cutoff()))
    }

    pub fn rerank_policy(&self) -> Result<RerankPolicy> {
        Ok(match self.policy {
            PolicyKind::Relevance => RerankPolicy::Relevance,
            PolicyKind::Objective => RerankPolicy::Objective,
            PolicyKind::Ilp => {
                let theta = self.theta.context("the ilp policy needs `theta`")?;
                let mut params =
                    IlpParams::new(theta, self.candidates, self.effective_quality_rank()?)?;
                params.feasibility_tol = self.feasibility_tol;
                params.validate()?;
                RerankPolicy::Ilp(params)
            }
        })
    }

    /// Column name used in comparison tables.
    pub fn label(&self) -> String {
        if let Some(label) = &self.label {
            return label.clone();
        }
        match self.policy {
            PolicyKind::Relevance => "relevance".into(),
            PolicyKind::Objective => "objective".into(),
            PolicyKind::Ilp => format!("ilp_theta_{}", self.theta.unwrap_or_default()),
        }
    }

    /// Dataset and attention settings that must agree across a comparison.
    pub fn comparison_key(&self) -> String {
        let dataset = match self.dataset {
            DatasetKind::Synthetic => format!(
                "synthetic {:?} n={} decay={}",
                self.shape, self.n, self.decay
            ),
            DatasetKind::Listings => format!(
                "listings {:?} id={} columns={:?}",
                self.path, self.id_column, self.rating_columns
            ),
            DatasetKind::Querylog => format!("querylog {:?}", self.path),
        };
        let attention = match self.attention {
            AttentionKind::Singular => "singular".to_string(),
            AttentionKind::Geometric => format!("geometric p={} cutoff={}", self.p, self.cutoff),
        };
        format!("{dataset}; {attention}")
    }
}

/// Applies one `key=value` override. Values are read as TOML (`0.5`, `true`,
/// `["a", "b"]`) and fall back to a plain string.
pub fn apply_override(table: &mut toml::Table, assignment: &str) -> Result<()> {
    let (key, raw) = assignment
        .split_once('=')
        .with_context(|| format!("override `{assignment}` is not of the form key=value"))?;
    let key = key.trim();
    if key.is_empty() {
        bail!("override `{assignment}` has an empty key");
    }
    let raw = raw.trim();
    let value = format!("v = {raw}")
        .parse::<toml::Table>()
        .ok()
        .and_then(|mut t| t.remove("v"))
        .unwrap_or_else(|| toml::Value::String(raw.to_string()));
    table.insert(key.to_string(), value);
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    const BASE: &str = r#"
        dataset = "synthetic"
        shape = "uniform"
        n = 10
        mode = "single_query"
        iterations = 5
        policy = "ilp"
        theta = 0.5
        attention = "geometric"
    "#;

    #[test]
    fn defaults_follow_reported_parameters() {
        let c = ExperimentConfig::from_toml_str(BASE).unwrap();
        assert_eq!(c.candidates, 100);
        assert_eq!(c.p, 0.5);
        assert_eq!(c.cutoff, 5);
        assert_eq!(c.feasibility_tol, 1e-7);
        assert_eq!(c.effective_quality_rank().unwrap(), 5);
        assert_eq!(c.label(), "ilp_theta_0.5");

        let singular = BASE.replace("\"geometric\"", "\"singular\"");
        let c = ExperimentConfig::from_toml_str(&singular).unwrap();
        assert_eq!(c.effective_quality_rank().unwrap(), 1);
    }

    #[test]
    fn unknown_keys_rejected() {
        let text = format!("{BASE}\nbogus = 1\n");
        let err = ExperimentConfig::from_toml_str(&text).unwrap_err();
        assert!(format!("{err:#}").contains("bogus"), "{err:#}");
    }

    #[test]
    fn nested_tables_rejected() {
        let text = format!("{BASE}\n[extra]\nx = 1\n");
        assert!(ExperimentConfig::from_toml_str(&text).is_err());
    }

    #[test]
    fn missing_requirements_rejected() {
        for (from, to) in [
            ("theta = 0.5", ""),
            ("iterations = 5", ""),
            ("shape = \"uniform\"", ""),
            ("theta = 0.5", "theta = 2.0"),
            ("n = 10", "n = 0"),
        ] {
            let text = BASE.replace(from, to);
            assert!(ExperimentConfig::from_toml_str(&text).is_err(), "{from} -> {to}");
        }
        let small_t = format!("{BASE}\ncandidates = 2\n");
        assert!(ExperimentConfig::from_toml_str(&small_t).is_err());
    }

    #[test]
    fn overrides_parse_values() {
        let mut table: toml::Table = BASE.parse().unwrap();
        apply_override(&mut table, "theta=0.9").unwrap();
        apply_override(&mut table, "policy=objective").unwrap();
        apply_override(&mut table, "rating_columns=[\"a\", \"b\"]").unwrap();
        assert_eq!(table["theta"].as_float(), Some(0.9));
        assert_eq!(table["policy"].as_str(), Some("objective"));
        assert_eq!(table["rating_columns"].as_array().unwrap().len(), 2);
        assert!(apply_override(&mut table, "novalue").is_err());
        assert!(apply_override(&mut table, "=3").is_err());
    }
}
