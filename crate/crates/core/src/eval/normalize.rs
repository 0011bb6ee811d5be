use std::path::Path;

use serde::{Deserialize, Serialize};
use unicode_normalization::UnicodeNormalization;

use crate::error::{Error, Result};

pub const NORMALIZATION_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Language {
    Zh,
    En,
}

impl Language {
    /// Column label used in results tables.
    pub fn metric(self) -> &'static str {
        match self {
            Language::Zh => "CER",
            Language::En => "WER",
        }
    }
}

impl std::str::FromStr for Language {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "zh" => Ok(Language::Zh),
            "en" => Ok(Language::En),
            _ => Err(Error::Parse(format!("unknown language `{s}` (expected zh or en)"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ZhRules {
    /// NFKC, which folds full-width forms to ASCII.
    pub fold_width: bool,
    pub strip_punctuation: bool,
    pub lowercase: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnRules {
    pub fold_width: bool,
    pub strip_punctuation: bool,
    pub lowercase: bool,
    /// Keep apostrophes between letters ("don't").
    pub keep_inner_apostrophes: bool,
}

/// Text normalization applied before scoring, frozen per version.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NormalizationConfig {
    pub version: u32,
    pub zh: ZhRules,
    pub en: EnRules,
}

impl Default for NormalizationConfig {
    fn default() -> Self {
        Self {
            version: NORMALIZATION_VERSION,
            zh: ZhRules {
                fold_width: true,
                strip_punctuation: true,
                lowercase: true,
            },
            en: EnRules {
                fold_width: true,
                strip_punctuation: true,
                lowercase: true,
                keep_inner_apostrophes: true,
            },
        }
    }
}

impl NormalizationConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        if cfg.version != NORMALIZATION_VERSION {
            return Err(Error::Config(format!(
                "normalization version {} is not supported (expected {NORMALIZATION_VERSION})",
                cfg.version
            )));
        }
        Ok(cfg)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_toml(&std::fs::read_to_string(path)?)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("normalization config serializes")
    }

    /// Scoring units: characters for zh, words for en.
    pub fn units(&self, text: &str, lang: Language) -> Vec<String> {
        match lang {
            Language::Zh => {
                let r = &self.zh;
                prepare(text, r.fold_width, r.lowercase)
                    .chars()
                    .filter(|c| !c.is_whitespace() && !(r.strip_punctuation && is_punctuation(*c)))
                    .map(String::from)
                    .collect()
            }
            Language::En => {
                let r = &self.en;
                let t = prepare(text, r.fold_width, r.lowercase);
                let chars: Vec<char> = t.chars().collect();
                let cleaned: String = chars
                    .iter()
                    .enumerate()
                    .map(|(i, &c)| {
                        if !r.strip_punctuation || !is_punctuation(c) {
                            return c;
                        }
                        let inner = r.keep_inner_apostrophes
                            && c == '\''
                            && i > 0
                            && chars[i - 1].is_alphanumeric()
                            && chars.get(i + 1).is_some_and(|n| n.is_alphanumeric());
                        if inner {
                            c
                        } else {
                            ' '
                        }
                    })
                    .collect();
                cleaned.split_whitespace().map(String::from).collect()
            }
        }
    }
}

fn prepare(text: &str, fold: bool, lower: bool) -> String {
    let t: String = if fold { text.nfkc().collect() } else { text.to_string() };
    if lower {
        t.to_lowercase()
    } else {
        t
    }
}

/// ASCII punctuation and symbols, general and CJK punctuation blocks,
/// full-width punctuation and a few common symbols.
pub fn is_punctuation(c: char) -> bool {
    c.is_ascii_punctuation()
        || matches!(c as u32,
            0x00A1..=0x00BF
            | 0x2000..=0x206F
            | 0x3000..=0x303F
            | 0xFE30..=0xFE4F
            | 0xFE50..=0xFE6F
            | 0xFF01..=0xFF0F
            | 0xFF1A..=0xFF20
            | 0xFF3B..=0xFF40
            | 0xFF5B..=0xFF65)
        || c == '…'
        || c == '·'
}
