use std::collections::BTreeMap;
use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Fractions of the codebook at which `topk_mass` is reported.
pub const REPORT_FRACTIONS: [f64; 5] = [0.1, 0.25, 0.5, 0.75, 1.0];

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UtilizationReport {
    histogram: Vec<u64>,
    total_tokens: u64,
}

impl UtilizationReport {
    /// Exact per-code counts of `ids`.
    pub fn from_ids<I: IntoIterator<Item = u64>>(ids: I, code_count: usize) -> Result<Self> {
        if code_count == 0 {
            return Err(Error::Config("code_count must be positive".into()));
        }
        let mut histogram = vec![0u64; code_count];
        let mut total_tokens = 0u64;
        for (position, id) in ids.into_iter().enumerate() {
            let slot = histogram.get_mut(id as usize).filter(|_| id < code_count as u64).ok_or(
                Error::OutOfRange {
                    position,
                    id,
                    limit: code_count as u64,
                },
            )?;
            *slot += 1;
            total_tokens += 1;
        }
        Ok(Self {
            histogram,
            total_tokens,
        })
    }

    pub fn from_histogram(histogram: Vec<u64>) -> Result<Self> {
        if histogram.is_empty() {
            return Err(Error::Config("code_count must be positive".into()));
        }
        let total_tokens = histogram.iter().sum();
        Ok(Self {
            histogram,
            total_tokens,
        })
    }

    pub fn total_tokens(&self) -> u64 {
        self.total_tokens
    }

    pub fn code_count(&self) -> usize {
        self.histogram.len()
    }

    pub fn histogram(&self) -> &[u64] {
        &self.histogram
    }

    pub fn codes_seen(&self) -> usize {
        self.histogram.iter().filter(|c| **c > 0).count()
    }

    pub fn utilization(&self) -> f64 {
        self.codes_seen() as f64 / self.code_count() as f64
    }

    /// Share of all tokens covered by the `⌈p·code_count⌉` most frequent
    /// codes. Zero when the stream is empty.
    pub fn topk_mass(&self, p: f64) -> f64 {
        if self.total_tokens == 0 {
            return 0.0;
        }
        let p = p.clamp(0.0, 1.0);
        let k = ((p * self.code_count() as f64).ceil() as usize).min(self.code_count());
        let mut sorted = self.histogram.clone();
        sorted.sort_unstable_by(|a, b| b.cmp(a));
        let covered: u64 = sorted[..k].iter().sum();
        covered as f64 / self.total_tokens as f64
    }

    pub fn summary(&self, histogram_path: Option<&str>) -> ReportSummary {
        ReportSummary {
            total_tokens: self.total_tokens,
            code_count: self.code_count() as u64,
            codes_seen: self.codes_seen() as u64,
            utilization: self.utilization(),
            topk_mass: REPORT_FRACTIONS
                .iter()
                .map(|p| (format!("{p:?}"), self.topk_mass(*p)))
                .collect(),
            histogram: histogram_path.map(str::to_string),
        }
    }

    /// Histogram as consecutive little-endian u64 counts.
    pub fn write_histogram<W: Write>(&self, mut w: W) -> Result<()> {
        for c in &self.histogram {
            w.write_all(&c.to_le_bytes())?;
        }
        Ok(())
    }

    pub fn read_histogram<R: Read>(mut r: R) -> Result<Self> {
        let mut buf = Vec::new();
        r.read_to_end(&mut buf)?;
        if buf.len() % 8 != 0 {
            return Err(Error::Parse("histogram length is not a multiple of 8".into()));
        }
        let hist = buf
            .chunks_exact(8)
            .map(|b| u64::from_le_bytes(b.try_into().expect("8 bytes")))
            .collect();
        Self::from_histogram(hist)
    }

    /// Writes `<stem>.json` and `<stem>.hist`.
    pub fn save(&self, stem: impl AsRef<Path>) -> Result<()> {
        let stem = stem.as_ref();
        let hist_path = stem.with_extension("hist");
        self.write_histogram(std::fs::File::create(&hist_path)?)?;
        let name = hist_path
            .file_name()
            .map(|n| n.to_string_lossy().into_owned())
            .unwrap_or_default();
        let json = serde_json::to_string_pretty(&self.summary(Some(&name)))?;
        std::fs::write(stem.with_extension("json"), json + "\n")?;
        Ok(())
    }
}

/// JSON view of a report; the histogram itself lives in a sidecar file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportSummary {
    pub total_tokens: u64,
    pub code_count: u64,
    pub codes_seen: u64,
    pub utilization: f64,
    pub topk_mass: BTreeMap<String, f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub histogram: Option<String>,
}
