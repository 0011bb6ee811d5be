use std::fmt;

use unicode_normalization::UnicodeNormalization;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum UnitKind {
    /// One Chinese character.
    Han,
    /// Uppercase letters plus a tone digit, e.g. `XUAN4`.
    Pinyin,
    /// Uppercased run of ASCII letters and digits.
    Word,
    /// A single code point that is neither Han nor ASCII alphanumeric.
    Punct,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Unit {
    pub kind: UnitKind,
    pub text: String,
    /// True when the unit hugs the previous non-Han unit with no whitespace
    /// in the source (`SUPERMARKET!`). Attached units carry no word marker.
    pub attached: bool,
    /// For pinyin produced by mixing: the character it replaced.
    pub replaced: Option<char>,
}

impl Unit {
    pub fn new(kind: UnitKind, text: impl Into<String>) -> Self {
        Self {
            kind,
            text: text.into(),
            attached: false,
            replaced: None,
        }
    }

    pub fn attached(mut self) -> Self {
        self.attached = true;
        self
    }
}

/// Normalized text as a flat list of front-end units.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash)]
pub struct MixedText {
    pub units: Vec<Unit>,
}

impl MixedText {
    pub fn new(units: Vec<Unit>) -> Self {
        Self { units }
    }

    pub fn is_empty(&self) -> bool {
        self.units.is_empty()
    }

    pub fn len(&self) -> usize {
        self.units.len()
    }

    /// Units joined by single spaces, the canonical text rendering.
    pub fn render(&self) -> String {
        let mut out = String::new();
        for (i, u) in self.units.iter().enumerate() {
            if i > 0 {
                out.push(' ');
            }
            out.push_str(&u.text);
        }
        out
    }

    /// Puts every mixed-in character back, undoing `pinyin_mix`.
    pub fn unmix(&self) -> MixedText {
        let units = self
            .units
            .iter()
            .map(|u| match u.replaced {
                Some(c) => Unit {
                    kind: UnitKind::Han,
                    text: c.to_string(),
                    attached: u.attached,
                    replaced: None,
                },
                None => u.clone(),
            })
            .collect();
        MixedText { units }
    }

    pub fn replaced_count(&self) -> usize {
        self.units.iter().filter(|u| u.replaced.is_some()).count()
    }
}

impl fmt::Display for MixedText {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.render())
    }
}

pub fn is_han(c: char) -> bool {
    matches!(c as u32,
        0x3400..=0x4DBF
        | 0x4E00..=0x9FFF
        | 0xF900..=0xFAFF
        | 0x20000..=0x2FA1F)
}

/// `[A-Z]+[1-5]`, the lexicon's pinyin spelling.
pub fn is_pinyin(s: &str) -> bool {
    let b = s.as_bytes();
    b.len() >= 2
        && matches!(b[b.len() - 1], b'1'..=b'5')
        && b[..b.len() - 1].iter().all(u8::is_ascii_uppercase)
}

// Raw-input pinyin override: a single-case letter run of plausible syllable
// length with a vowel (or one of the nasal interjections) followed by a tone
// digit. `mp3` or `Covid19` stay words.
fn as_pinyin_override(run: &str) -> Option<String> {
    let b = run.as_bytes();
    let (letters, tone) = b.split_at(b.len() - 1);
    if letters.is_empty() || letters.len() > 6 || !matches!(tone[0], b'1'..=b'5') {
        return None;
    }
    let upper = letters.iter().all(u8::is_ascii_uppercase);
    let lower = letters.iter().all(u8::is_ascii_lowercase);
    let upper_letters = letters.to_ascii_uppercase();
    let voiced = upper_letters.iter().any(|c| b"AEIOUV".contains(c))
        || matches!(upper_letters.as_slice(), b"M" | b"N" | b"NG" | b"HM" | b"HNG");
    ((upper || lower) && voiced).then(|| run.to_ascii_uppercase())
}

/// Splits raw text into front-end units.
///
/// NFC first, then: each Chinese character is its own unit, runs of ASCII
/// alphanumerics become one uppercased word (or a pinyin syllable when they
/// spell one), whitespace only separates, and any other code point becomes a
/// punctuation unit verbatim.
pub fn normalize(raw: &str) -> MixedText {
    let nfc: String = raw.nfc().collect();
    let mut units: Vec<Unit> = Vec::new();
    let mut run = String::new();
    let mut gap = true;

    fn flush(run: &mut String, units: &mut Vec<Unit>) {
        if run.is_empty() {
            return;
        }
        let unit = match as_pinyin_override(run) {
            Some(p) => Unit::new(UnitKind::Pinyin, p),
            None => Unit::new(UnitKind::Word, run.to_ascii_uppercase()),
        };
        units.push(unit);
        run.clear();
    }

    for c in nfc.chars() {
        if c.is_ascii_alphanumeric() {
            run.push(c);
            continue;
        }
        let had_run = !run.is_empty();
        flush(&mut run, &mut units);
        if had_run {
            gap = false;
        }
        if c.is_whitespace() {
            gap = true;
        } else if is_han(c) {
            units.push(Unit::new(UnitKind::Han, c.to_string()));
            gap = false;
        } else {
            let mut unit = Unit::new(UnitKind::Punct, c.to_string());
            let follows_non_han = units.last().is_some_and(|u| u.kind != UnitKind::Han);
            if !gap && follows_non_han {
                unit.attached = true;
            }
            units.push(unit);
            gap = false;
        }
    }
    flush(&mut run, &mut units);
    MixedText { units }
}
