use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// One sentence of the polyphone test set.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PolyphoneCase {
    pub sentence_id: String,
    pub text: String,
    pub target_char: char,
    pub intended_reading: String,
    /// Read correctly from characters alone (A1 pass).
    pub baseline_correct: bool,
    /// Read correctly once the pinyin is mixed in (A2 pass). Only
    /// meaningful for A1 failures.
    pub corrected_with_pinyin: bool,
}

impl PolyphoneCase {
    pub fn validate(&self) -> Result<()> {
        if self.baseline_correct && self.corrected_with_pinyin {
            return Err(Error::Config(format!(
                "case {}: A2 is only evaluated on A1 failures",
                self.sentence_id
            )));
        }
        Ok(())
    }
}

fn parse_flag(s: &str, line: usize, col: &str) -> Result<bool> {
    match s.trim().to_ascii_lowercase().as_str() {
        "1" | "true" | "pass" | "yes" => Ok(true),
        "0" | "false" | "fail" | "no" | "-" | "" => Ok(false),
        other => Err(Error::Parse(format!("line {line}: bad {col} flag `{other}`"))),
    }
}

/// Parses `sentence_id, text, target_char, intended_pinyin, a1, a2` TSV.
/// Blank lines and `#` comments are skipped.
pub fn parse_polyphone_tsv(text: &str) -> Result<Vec<PolyphoneCase>> {
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let n = i + 1;
        if line.trim().is_empty() || line.starts_with('#') {
            continue;
        }
        let cols: Vec<&str> = line.split('\t').collect();
        if cols.len() != 6 {
            return Err(Error::Parse(format!("line {n}: expected 6 columns, got {}", cols.len())));
        }
        let mut chars = cols[2].chars();
        let target_char = match (chars.next(), chars.next()) {
            (Some(c), None) => c,
            _ => return Err(Error::Parse(format!("line {n}: target must be one character"))),
        };
        let case = PolyphoneCase {
            sentence_id: cols[0].to_string(),
            text: cols[1].to_string(),
            target_char,
            intended_reading: cols[3].to_string(),
            baseline_correct: parse_flag(cols[4], n, "a1")?,
            corrected_with_pinyin: parse_flag(cols[5], n, "a2")?,
        };
        case.validate()
            .map_err(|e| Error::Parse(format!("line {n}: {e}")))?;
        out.push(case);
    }
    Ok(out)
}

pub fn load_polyphone_tsv(path: impl AsRef<Path>) -> Result<Vec<PolyphoneCase>> {
    parse_polyphone_tsv(&std::fs::read_to_string(path)?)
}

/// Error and correction counts. Percentages are derived on demand.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct PolyphoneReport {
    pub total: usize,
    pub a1_errors: usize,
    pub a2_corrected: usize,
}

fn ratio(num: usize, den: usize) -> Option<f64> {
    (den > 0).then(|| num as f64 / den as f64)
}

impl PolyphoneReport {
    pub fn residual(&self) -> usize {
        self.a1_errors - self.a2_corrected
    }

    pub fn a1_pct(&self) -> Option<f64> {
        ratio(self.a1_errors, self.total).map(|r| 100.0 * r)
    }

    /// Share of A1 failures fixed by pinyin; `None` without failures.
    pub fn a2_pct(&self) -> Option<f64> {
        ratio(self.a2_corrected, self.a1_errors).map(|r| 100.0 * r)
    }

    pub fn residual_pct(&self) -> Option<f64> {
        ratio(self.residual(), self.total).map(|r| 100.0 * r)
    }

    pub fn to_json(&self) -> serde_json::Value {
        let pct = |p: Option<f64>| p.map_or(serde_json::Value::Null, |v| serde_json::json!(v));
        serde_json::json!({
            "total": self.total,
            "a1_errors": self.a1_errors,
            "a1_pct": pct(self.a1_pct()),
            "a2_corrected": self.a2_corrected,
            "a2_pct": pct(self.a2_pct()),
            "residual": self.residual(),
            "residual_pct": pct(self.residual_pct()),
        })
    }
}

/// Renders a percentage to one decimal, or `N/A`.
pub fn render_pct(p: Option<f64>) -> String {
    p.map_or_else(|| "N/A".to_string(), |v| format!("{v:.1}%"))
}

impl fmt::Display for PolyphoneReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let total_pct = ratio(self.total, self.total).map(|r| 100.0 * r);
        writeln!(f, "{:<10}{:>10}{:>12}", "", "Sentences", "Percentage")?;
        let rows = [
            ("Total", self.total, total_pct),
            ("A1", self.a1_errors, self.a1_pct()),
            ("A2", self.a2_corrected, self.a2_pct()),
            ("Residual", self.residual(), self.residual_pct()),
        ];
        for (name, n, p) in rows {
            writeln!(f, "{name:<10}{n:>10}{:>12}", render_pct(p))?;
        }
        Ok(())
    }
}

pub fn polyphone_report(cases: &[PolyphoneCase]) -> Result<PolyphoneReport> {
    let mut r = PolyphoneReport {
        total: cases.len(),
        ..Default::default()
    };
    for c in cases {
        c.validate()?;
        if !c.baseline_correct {
            r.a1_errors += 1;
            if c.corrected_with_pinyin {
                r.a2_corrected += 1;
            }
        }
    }
    Ok(r)
}
