use std::collections::BTreeMap;
use std::path::Path;

use super::normalize::{is_han, is_pinyin};
use crate::error::{Error, Result};

/// Character → pinyin readings. Characters with more than one reading are
/// polyphones and are never replaced by automatic mixing.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct PinyinLexicon {
    entries: BTreeMap<char, Vec<String>>,
}

impl PinyinLexicon {
    /// Parses `char<TAB>reading1,reading2,...`; `#` lines and blank lines are
    /// skipped.
    pub fn parse(src: &str) -> Result<Self> {
        let mut entries = BTreeMap::new();
        for (i, line) in src.lines().enumerate() {
            let line_no = i + 1;
            let err = |message: String| Error::Lexicon {
                line: line_no,
                message,
            };
            let line = line.trim_end_matches('\r');
            if line.trim().is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, readings) = line
                .split_once('\t')
                .ok_or_else(|| err("expected `char<TAB>readings`".into()))?;
            let mut chars = key.chars();
            let c = match (chars.next(), chars.next()) {
                (Some(c), None) if is_han(c) => c,
                _ => return Err(err(format!("key {key:?} is not a single Chinese character"))),
            };
            let mut list: Vec<String> = Vec::new();
            for r in readings.split(',').map(str::trim) {
                if !r.is_ascii() {
                    return Err(err(format!("tone marks are not accepted: {r:?}")));
                }
                if !is_pinyin(r) {
                    return Err(err(format!("malformed pinyin {r:?}")));
                }
                if list.iter().any(|x| x == r) {
                    return Err(err(format!("duplicate reading {r}")));
                }
                list.push(r.to_string());
            }
            if entries.insert(c, list).is_some() {
                return Err(err(format!("duplicate entry for {c}")));
            }
        }
        Ok(Self { entries })
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    pub fn readings(&self, c: char) -> Option<&[String]> {
        self.entries.get(&c).map(Vec::as_slice)
    }

    pub fn is_polyphone(&self, c: char) -> bool {
        self.entries.get(&c).is_some_and(|r| r.len() > 1)
    }

    /// The single reading of a non-polyphonic character.
    pub fn sole_reading(&self, c: char) -> Option<&str> {
        match self.entries.get(&c).map(Vec::as_slice) {
            Some([only]) => Some(only),
            _ => None,
        }
    }

    pub fn chars(&self) -> impl Iterator<Item = char> + '_ {
        self.entries.keys().copied()
    }

    /// Distinct pinyin syllables across all entries, sorted.
    pub fn syllables(&self) -> Vec<String> {
        let mut all: Vec<String> = self.entries.values().flatten().cloned().collect();
        all.sort();
        all.dedup();
        all
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}
