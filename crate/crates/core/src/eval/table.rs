use std::fmt;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::distance::EditCounts;
use super::normalize::{Language, NormalizationConfig};
use super::records::{read_records, score_record, EmbeddingStore, RecordScore};
use crate::error::{Error, Result};

/// How the AVG row combines test sets.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AverageMode {
    /// All records of all sets pooled: summed distances over summed
    /// reference units, and the mean similarity over all pairs.
    #[default]
    Pooled,
    /// Plain mean of the per-set values.
    Unweighted,
}

/// Scored records of one test set.
#[derive(Debug, Clone, PartialEq)]
pub struct SetScores {
    pub name: String,
    pub language: Language,
    pub records: Vec<RecordScore>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SetResult {
    pub name: String,
    pub language: Language,
    pub metric: String,
    pub utterances: usize,
    pub ref_units: usize,
    pub counts: EditCounts,
    /// Corpus-level error rate as a fraction.
    pub error_rate: f64,
    pub similarity: Option<f64>,
    pub similarity_pairs: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AverageRow {
    pub mode: AverageMode,
    pub error_rate: Option<f64>,
    pub similarity: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultsTable {
    pub sets: Vec<SetResult>,
    pub average: AverageRow,
    /// Warnings for sets left out of the table.
    pub warnings: Vec<String>,
}

// Summation in sorted order makes the result independent of record order.
fn sorted_sum(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    v.into_iter().sum()
}

pub fn aggregate_table(sets: &[SetScores], mode: AverageMode) -> ResultsTable {
    let mut results = Vec::new();
    let mut warnings = Vec::new();
    let mut pooled_sims = Vec::new();
    for set in sets {
        if set.records.is_empty() {
            warnings.push(format!("{}: no records, omitted", set.name));
            continue;
        }
        let mut counts = EditCounts::default();
        let mut units = 0;
        let mut sims = Vec::new();
        for r in &set.records {
            counts += r.counts;
            units += r.ref_units;
            sims.extend(r.similarity);
        }
        pooled_sims.extend(sims.iter().copied());
        let pairs = sims.len();
        results.push(SetResult {
            name: set.name.clone(),
            language: set.language,
            metric: set.language.metric().to_string(),
            utterances: set.records.len(),
            ref_units: units,
            counts,
            error_rate: counts.distance as f64 / units as f64,
            similarity: (pairs > 0).then(|| sorted_sum(sims) / pairs as f64),
            similarity_pairs: pairs,
        });
    }

    let average = if results.is_empty() {
        AverageRow { mode, error_rate: None, similarity: None }
    } else {
        match mode {
            AverageMode::Pooled => {
                let dist: usize = results.iter().map(|s| s.counts.distance).sum();
                let units: usize = results.iter().map(|s| s.ref_units).sum();
                let n = pooled_sims.len();
                AverageRow {
                    mode,
                    error_rate: Some(dist as f64 / units as f64),
                    similarity: (n > 0).then(|| sorted_sum(pooled_sims) / n as f64),
                }
            }
            AverageMode::Unweighted => {
                let rates: Vec<f64> = results.iter().map(|s| s.error_rate).collect();
                let sims: Vec<f64> = results.iter().filter_map(|s| s.similarity).collect();
                let n = sims.len();
                AverageRow {
                    mode,
                    error_rate: Some(sorted_sum(rates) / results.len() as f64),
                    similarity: (n > 0).then(|| sorted_sum(sims) / n as f64),
                }
            }
        }
    };
    ResultsTable { sets: results, average, warnings }
}

fn pct(v: Option<f64>) -> String {
    v.map_or_else(|| "-".into(), |r| format!("{:.1}", 100.0 * r))
}

fn ss(v: Option<f64>) -> String {
    v.map_or_else(|| "-".into(), |s| format!("{s:.3}"))
}

impl fmt::Display for ResultsTable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let width = self
            .sets
            .iter()
            .map(|s| s.name.chars().count())
            .chain([13])
            .max()
            .unwrap_or(13);
        writeln!(f, "{:<width$}  {:>6}  {:>6}  {:>8}  {:>8}  {:>6}", "test set", "metric", "utts", "units", "rate(%)", "SS")?;
        for s in &self.sets {
            writeln!(
                f,
                "{:<width$}  {:>6}  {:>6}  {:>8}  {:>8}  {:>6}",
                s.name,
                s.metric,
                s.utterances,
                s.ref_units,
                pct(Some(s.error_rate)),
                ss(s.similarity)
            )?;
        }
        let label = match self.average.mode {
            AverageMode::Pooled => "AVG (pooled)",
            AverageMode::Unweighted => "AVG (mean)",
        };
        writeln!(
            f,
            "{label:<width$}  {:>6}  {:>6}  {:>8}  {:>8}  {:>6}",
            "",
            self.sets.iter().map(|s| s.utterances).sum::<usize>(),
            self.sets.iter().map(|s| s.ref_units).sum::<usize>(),
            pct(self.average.error_rate),
            ss(self.average.similarity)
        )?;
        for w in &self.warnings {
            writeln!(f, "warning: {w}")?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SetConfig {
    pub name: String,
    pub language: Language,
    /// JSON-lines file, relative to the config file.
    pub records: PathBuf,
}

/// `eval table` configuration (TOML).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TableConfig {
    #[serde(default)]
    pub average: AverageMode,
    /// Normalization rules, relative to the config file; defaults apply
    /// when absent.
    #[serde(default)]
    pub normalization: Option<PathBuf>,
    #[serde(rename = "set")]
    pub sets: Vec<SetConfig>,
}

impl TableConfig {
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        toml::from_str(&std::fs::read_to_string(path)?).map_err(|e| Error::Config(e.to_string()))
    }
}

/// Loads, scores and aggregates every set named in the config at `path`.
pub fn run_table(path: impl AsRef<Path>) -> Result<ResultsTable> {
    let path = path.as_ref();
    let cfg = TableConfig::load(path)?;
    let dir = path.parent().unwrap_or(Path::new("."));
    let norm = match &cfg.normalization {
        Some(p) => NormalizationConfig::load(dir.join(p))?,
        None => NormalizationConfig::default(),
    };
    let mut sets = Vec::new();
    for s in &cfg.sets {
        let file = dir.join(&s.records);
        let records = read_records(&file)?;
        let mut store = EmbeddingStore::new(file.parent().unwrap_or(dir));
        let mut scored = Vec::with_capacity(records.len());
        for r in &records {
            if r.language != s.language {
                return Err(Error::Config(format!(
                    "record {} is {:?} but set {} is {:?}",
                    r.utterance_id, r.language, s.name, s.language
                )));
            }
            scored.push(score_record(r, &norm, &mut store)?);
        }
        sets.push(SetScores {
            name: s.name.clone(),
            language: s.language,
            records: scored,
        });
    }
    Ok(aggregate_table(&sets, cfg.average))
}
