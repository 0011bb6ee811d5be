use std::collections::HashMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::distance::{edit_distance, EditCounts};
use super::normalize::{Language, NormalizationConfig};
use super::similarity::speaker_similarity;
use crate::error::{Error, Result};
use crate::signal::{load_matrix, Matrix};

/// An embedding given inline or as `path[#row]` into a matrix file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum EmbeddingRef {
    Inline(Vec<f64>),
    File(String),
}

/// One synthesized utterance with its ASR transcript and optional speaker
/// embeddings of the prompt and the output.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalRecord {
    pub utterance_id: String,
    pub language: Language,
    pub reference_text: String,
    pub hypothesis_text: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub prompt_embedding: Option<EmbeddingRef>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub generated_embedding: Option<EmbeddingRef>,
}

/// Reads JSON-lines records; blank lines are skipped.
pub fn read_records(path: impl AsRef<Path>) -> Result<Vec<EvalRecord>> {
    parse_records(&std::fs::read_to_string(path)?)
}

pub fn parse_records(text: &str) -> Result<Vec<EvalRecord>> {
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| {
            serde_json::from_str(l).map_err(|e| Error::Parse(format!("record line {}: {e}", i + 1)))
        })
        .collect()
}

pub fn write_records(path: impl AsRef<Path>, records: &[EvalRecord]) -> Result<()> {
    let mut out = String::new();
    for r in records {
        out.push_str(&serde_json::to_string(r)?);
        out.push('\n');
    }
    std::fs::write(path, out)?;
    Ok(())
}

/// Resolves embedding references relative to a base directory, caching
/// matrix files.
#[derive(Debug, Default)]
pub struct EmbeddingStore {
    base: PathBuf,
    cache: HashMap<PathBuf, Matrix>,
}

impl EmbeddingStore {
    pub fn new(base: impl Into<PathBuf>) -> Self {
        Self {
            base: base.into(),
            cache: HashMap::new(),
        }
    }

    pub fn resolve(&mut self, r: &EmbeddingRef) -> Result<Vec<f64>> {
        let spec = match r {
            EmbeddingRef::Inline(v) => return Ok(v.clone()),
            EmbeddingRef::File(s) => s,
        };
        let (file, row) = match spec.rsplit_once('#') {
            Some((f, r)) => (
                f,
                r.parse::<usize>()
                    .map_err(|_| Error::Parse(format!("bad row in embedding reference `{spec}`")))?,
            ),
            None => (spec.as_str(), 0),
        };
        let path = self.base.join(file);
        if !self.cache.contains_key(&path) {
            let (m, _) = load_matrix(&path)?;
            self.cache.insert(path.clone(), m);
        }
        let m = &self.cache[&path];
        if row >= m.rows() {
            return Err(Error::OutOfRange {
                position: 0,
                id: row as u64,
                limit: m.rows() as u64,
            });
        }
        Ok(m.row(row).to_vec())
    }
}

/// Error rate of `hypothesis` against `reference`: edit distance over
/// reference units.
pub fn error_rate(
    reference: &str,
    hypothesis: &str,
    lang: Language,
    norm: &NormalizationConfig,
) -> Result<f64> {
    let r = norm.units(reference, lang);
    if r.is_empty() {
        return Err(Error::Empty("reference after normalization"));
    }
    let h = norm.units(hypothesis, lang);
    Ok(edit_distance(&r, &h).distance as f64 / r.len() as f64)
}

/// Scores of one record.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RecordScore {
    pub utterance_id: String,
    pub ref_units: usize,
    pub counts: EditCounts,
    pub similarity: Option<f64>,
}

pub fn score_record(
    rec: &EvalRecord,
    norm: &NormalizationConfig,
    store: &mut EmbeddingStore,
) -> Result<RecordScore> {
    let r = norm.units(&rec.reference_text, rec.language);
    if r.is_empty() {
        return Err(Error::Parse(format!(
            "record {}: reference is empty after normalization",
            rec.utterance_id
        )));
    }
    let h = norm.units(&rec.hypothesis_text, rec.language);
    let similarity = match (&rec.prompt_embedding, &rec.generated_embedding) {
        (Some(p), Some(g)) => Some(speaker_similarity(&store.resolve(p)?, &store.resolve(g)?)?),
        (None, None) => None,
        _ => {
            return Err(Error::Parse(format!(
                "record {}: embeddings must come in pairs",
                rec.utterance_id
            )))
        }
    };
    Ok(RecordScore {
        utterance_id: rec.utterance_id.clone(),
        ref_units: r.len(),
        counts: edit_distance(&r, &h),
        similarity,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::signal::save_matrix;

    #[test]
    fn zh_single_substitution() {
        let n = NormalizationConfig::default();
        let r = error_rate("晕眩是", "晕炫是", Language::Zh, &n).unwrap();
        assert_eq!(r, 1.0 / 3.0);
        assert_eq!(error_rate("hello world", "hello world", Language::En, &n).unwrap(), 0.0);
        assert!(error_rate("，。", "x", Language::Zh, &n).is_err());
    }

    #[test]
    fn jsonl_and_embedding_refs() {
        let dir = tempfile::tempdir().unwrap();
        let m = Matrix::from_rows(&[vec![1.0, 0.0], vec![0.0, 2.0]]).unwrap();
        save_matrix(dir.path().join("e.idxmt"), &m, 0).unwrap();
        let text = r#"{"utterance_id":"u1","language":"en","reference_text":"a b","hypothesis_text":"a c","prompt_embedding":"e.idxmt#0","generated_embedding":[2.0,0.0]}
{"utterance_id":"u2","language":"zh","reference_text":"你好","hypothesis_text":"你好","prompt_embedding":"e.idxmt","generated_embedding":"e.idxmt#1"}
"#;
        let recs = parse_records(text).unwrap();
        let mut store = EmbeddingStore::new(dir.path());
        let n = NormalizationConfig::default();
        let s0 = score_record(&recs[0], &n, &mut store).unwrap();
        assert_eq!((s0.ref_units, s0.counts.distance, s0.similarity), (2, 1, Some(1.0)));
        let s1 = score_record(&recs[1], &n, &mut store).unwrap();
        assert_eq!(s1.similarity, Some(0.0));

        let p = dir.path().join("r.jsonl");
        write_records(&p, &recs).unwrap();
        assert_eq!(read_records(&p).unwrap(), recs);

        let bad = EmbeddingRef::File("e.idxmt#7".into());
        assert!(store.resolve(&bad).is_err());
        assert!(parse_records("{not json}\n").is_err());
    }
}
