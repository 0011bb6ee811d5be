use std::collections::HashMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::normalize::{is_han, MixedText, UnitKind};
use crate::error::{Error, Result};

/// Word-boundary marker prefixed to every unit that follows whitespace.
pub const MARKER: char = '\u{2581}';
pub const MARKER_STR: &str = "\u{2581}";

/// Rendered in place of `<unk>` ids on decode.
pub const UNK_GLYPH: char = '\u{FFFD}';

pub const VOCAB_FILE_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Specials {
    pub pad: u32,
    pub unk: u32,
    pub bt: u32,
    pub et: u32,
    pub ba: u32,
    pub ea: u32,
}

impl Specials {
    pub const NAMES: [&'static str; 6] = ["<pad>", "<unk>", "[BT]", "[ET]", "[BA]", "[EA]"];

    /// Specials occupying ids 0..6 in `NAMES` order.
    pub const LEADING: Specials = Specials {
        pad: 0,
        unk: 1,
        bt: 2,
        et: 3,
        ba: 4,
        ea: 5,
    };

    pub fn ids(&self) -> [u32; 6] {
        [self.pad, self.unk, self.bt, self.et, self.ba, self.ea]
    }

    pub fn contains(&self, id: u32) -> bool {
        self.ids().contains(&id)
    }
}

#[derive(Serialize, Deserialize)]
struct VocabFile {
    version: u32,
    specials: Specials,
    tokens: Vec<String>,
    merges: Vec<(String, String)>,
}

/// Token table plus ordered BPE merges.
#[derive(Debug, Clone, PartialEq)]
pub struct Vocabulary {
    tokens: Vec<String>,
    index: HashMap<String, u32>,
    merges: Vec<(String, String)>,
    ranks: HashMap<(String, String), usize>,
    specials: Specials,
}

impl Vocabulary {
    pub fn new(tokens: Vec<String>, merges: Vec<(String, String)>, specials: Specials) -> Result<Self> {
        let mut index = HashMap::with_capacity(tokens.len());
        for (i, t) in tokens.iter().enumerate() {
            if index.insert(t.clone(), i as u32).is_some() {
                return Err(Error::Config(format!("duplicate token {t:?}")));
            }
        }
        for (slot, id) in Specials::NAMES.iter().zip(specials.ids()) {
            match tokens.get(id as usize) {
                Some(t) if t == slot => {}
                _ => return Err(Error::Config(format!("special {slot} is not at id {id}"))),
            }
        }
        let mut ranks = HashMap::with_capacity(merges.len());
        for (rank, (a, b)) in merges.iter().enumerate() {
            let merged = format!("{a}{b}");
            for part in [a, b, &merged] {
                if !index.contains_key(part.as_str()) {
                    return Err(Error::Config(format!("merge {rank} uses unknown token {part:?}")));
                }
            }
            if Specials::NAMES.contains(&merged.as_str()) {
                return Err(Error::Config(format!("merge {rank} produces special {merged}")));
            }
            ranks.entry((a.clone(), b.clone())).or_insert(rank);
        }
        Ok(Self {
            tokens,
            index,
            merges,
            ranks,
            specials,
        })
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn specials(&self) -> Specials {
        self.specials
    }

    pub fn merges(&self) -> &[(String, String)] {
        &self.merges
    }

    pub fn tokens(&self) -> &[String] {
        &self.tokens
    }

    pub fn id(&self, token: &str) -> Option<u32> {
        self.index.get(token).copied()
    }

    pub fn token(&self, id: u32) -> Option<&str> {
        self.tokens.get(id as usize).map(String::as_str)
    }

    pub(crate) fn rank(&self, a: &str, b: &str) -> Option<usize> {
        // Allocation per lookup; fine at front-end text lengths.
        self.ranks.get(&(a.to_string(), b.to_string())).copied()
    }

    pub fn to_json(&self) -> String {
        let file = VocabFile {
            version: VOCAB_FILE_VERSION,
            specials: self.specials,
            tokens: self.tokens.clone(),
            merges: self.merges.clone(),
        };
        serde_json::to_string_pretty(&file).expect("vocabulary serializes") + "\n"
    }

    pub fn from_json(src: &str) -> Result<Self> {
        let file: VocabFile = serde_json::from_str(src)?;
        if file.version != VOCAB_FILE_VERSION {
            return Err(Error::Config(format!("unsupported vocabulary version {}", file.version)));
        }
        Self::new(file.tokens, file.merges, file.specials)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_json())?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    /// Token ids for `text`. Han characters and pinyin syllables map to one
    /// id each (`<unk>` when absent); other units go through the merges.
    pub fn encode(&self, text: &MixedText) -> Vec<u32> {
        let mut ids = Vec::new();
        for unit in &text.units {
            match unit.kind {
                UnitKind::Han | UnitKind::Pinyin => {
                    let key = format!("{MARKER}{}", unit.text);
                    ids.push(self.id(&key).unwrap_or(self.specials.unk));
                }
                UnitKind::Word | UnitKind::Punct => {
                    for sym in self.apply_merges(&unit.text, !unit.attached) {
                        ids.push(self.id(&sym).unwrap_or(self.specials.unk));
                    }
                }
            }
        }
        ids
    }

    /// Token strings for `text`, mostly for display.
    pub fn encode_to_strings(&self, text: &MixedText) -> Vec<String> {
        self.encode(text)
            .into_iter()
            .map(|id| self.tokens[id as usize].clone())
            .collect()
    }

    /// Greedy BPE: repeatedly merge the lowest-ranked adjacent pair.
    pub(crate) fn apply_merges(&self, word: &str, marked: bool) -> Vec<String> {
        let mut syms: Vec<String> = Vec::with_capacity(word.len() + 1);
        if marked {
            syms.push(MARKER_STR.to_string());
        }
        syms.extend(word.chars().map(String::from));
        loop {
            let best = syms
                .windows(2)
                .filter_map(|w| self.rank(&w[0], &w[1]))
                .min();
            let Some(rank) = best else { break };
            let (a, b) = &self.merges[rank];
            let mut out = Vec::with_capacity(syms.len());
            let mut i = 0;
            while i < syms.len() {
                if i + 1 < syms.len() && syms[i] == *a && syms[i + 1] == *b {
                    out.push(format!("{a}{b}"));
                    i += 2;
                } else {
                    out.push(std::mem::take(&mut syms[i]));
                    i += 1;
                }
            }
            syms = out;
        }
        syms
    }

    /// Inverse of `encode`, rendered with single spaces between units.
    ///
    /// A token starts a new unit when it carries the marker or is a lone
    /// punctuation symbol; anything else continues the current unit.
    pub fn decode(&self, ids: &[u32]) -> Result<String> {
        let mut units: Vec<String> = Vec::new();
        let mut open_marker = false;
        for (position, &id) in ids.iter().enumerate() {
            let token = self.token(id).ok_or(Error::OutOfRange {
                position,
                id: u64::from(id),
                limit: self.len() as u64,
            })?;
            if id == self.specials.unk {
                if open_marker {
                    units.last_mut().expect("marker opened a unit").push(UNK_GLYPH);
                } else {
                    units.push(UNK_GLYPH.to_string());
                }
                open_marker = false;
                continue;
            }
            if self.specials.contains(id) {
                units.push(token.to_string());
                open_marker = false;
                continue;
            }
            if let Some(rest) = token.strip_prefix(MARKER) {
                units.push(rest.to_string());
                open_marker = rest.is_empty();
            } else if open_marker {
                units.last_mut().expect("marker opened a unit").push_str(token);
                open_marker = false;
            } else if is_lone_punct(token) || units.is_empty() {
                units.push(token.to_string());
                open_marker = false;
            } else {
                units.last_mut().expect("non-empty").push_str(token);
                open_marker = false;
            }
        }
        Ok(units.join(" "))
    }
}

fn is_lone_punct(token: &str) -> bool {
    let mut it = token.chars();
    match (it.next(), it.next()) {
        (Some(c), None) => !c.is_ascii_alphanumeric() && !is_han(c),
        _ => false,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tokenizer::normalize::normalize;

    fn specials_then(rest: &[&str]) -> Vec<String> {
        Specials::NAMES
            .iter()
            .chain(rest)
            .map(|s| s.to_string())
            .collect()
    }

    fn pair(a: &str, b: &str) -> (String, String) {
        (a.to_string(), b.to_string())
    }

    #[test]
    fn rejects_inconsistent_tables() {
        let dup = specials_then(&["A", "A"]);
        assert!(Vocabulary::new(dup, vec![], Specials::LEADING).is_err());
        let tokens = specials_then(&["A", "B"]);
        assert!(Vocabulary::new(tokens.clone(), vec![pair("A", "B")], Specials::LEADING).is_err());
        let mut swapped = tokens;
        swapped.swap(2, 3);
        assert!(Vocabulary::new(swapped, vec![], Specials::LEADING).is_err());
    }

    #[test]
    fn merges_cannot_produce_specials() {
        let tokens = specials_then(&["[", "BT]", "B", "T", "]", "T]"]);
        let merges = vec![pair("T", "]"), pair("B", "T]"), pair("[", "BT]")];
        assert!(Vocabulary::new(tokens, merges, Specials::LEADING).is_err());
    }

    #[test]
    fn unknown_han_maps_to_unk_and_decodes_to_glyph() {
        let v = Vocabulary::new(specials_then(&["▁是"]), vec![], Specials::LEADING).unwrap();
        let ids = v.encode(&normalize("是龘"));
        assert_eq!(ids, vec![6, 1]);
        assert_eq!(v.decode(&ids).unwrap(), "是 \u{FFFD}");
    }

    #[test]
    fn unknown_punct_after_bare_marker_renders_as_one_unit() {
        let v = Vocabulary::new(specials_then(&["▁", "A"]), vec![], Specials::LEADING).unwrap();
        let ids = v.encode(&normalize("☃"));
        assert_eq!(ids, vec![6, 1]);
        assert_eq!(v.decode(&ids).unwrap(), "\u{FFFD}");
    }

    #[test]
    fn decode_out_of_range_names_position() {
        let v = Vocabulary::new(specials_then(&[]), vec![], Specials::LEADING).unwrap();
        assert_eq!(v.decode(&[]).unwrap(), "");
        match v.decode(&[0, 1, 99]) {
            Err(Error::OutOfRange { position: 2, id: 99, .. }) => {}
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn json_round_trip_is_bit_exact() {
        let tokens = specials_then(&["▁", "A", "B", "▁A", "▁AA"]);
        let v = Vocabulary::new(tokens, vec![pair("▁", "A"), pair("▁A", "A")], Specials::LEADING).unwrap();
        let json = v.to_json();
        let back = Vocabulary::from_json(&json).unwrap();
        assert_eq!(back, v);
        assert_eq!(back.to_json(), json);
    }
}
