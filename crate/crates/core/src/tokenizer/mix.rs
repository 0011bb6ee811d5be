use super::lexicon::PinyinLexicon;
use super::normalize::{MixedText, Unit, UnitKind};
use crate::error::{Error, Result};
use crate::rng;

/// What a single mixing call did, alongside its output.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MixOutcome {
    pub text: MixedText,
    /// Result of the per-text Bernoulli(sample_rate) draw.
    pub sample_selected: bool,
    /// Han units that are in the lexicon with exactly one reading.
    pub eligible: usize,
    pub replaced: usize,
}

/// Counter slot of the per-text draw; per-unit draws use `1 + unit_index`.
const SAMPLE_SLOT: u64 = 0;

/// Replaces randomly chosen non-polyphonic characters with their pinyin.
///
/// One Bernoulli(`sample_rate`) draw decides whether the text takes part at
/// all; then every Chinese character is selected with probability
/// `char_rate`, and a selected character is swapped for its sole reading.
/// Polyphones and characters missing from the lexicon are never replaced.
/// Each draw is addressed by `(seed, unit position)`, so the result depends
/// on nothing but the inputs.
pub fn pinyin_mix(
    text: &MixedText,
    lexicon: &PinyinLexicon,
    sample_rate: f64,
    char_rate: f64,
    seed: u64,
) -> Result<MixOutcome> {
    for (name, p) in [("sample_rate", sample_rate), ("char_rate", char_rate)] {
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::Config(format!("{name} must lie in [0, 1], got {p}")));
        }
    }
    let stream = rng::stream_id(rng::TOKENIZER_MIX);
    let sample_selected = rng::uniform_at(seed, stream, SAMPLE_SLOT) < sample_rate;

    let mut eligible = 0;
    let mut replaced = 0;
    let mut units = Vec::with_capacity(text.units.len());
    for (i, unit) in text.units.iter().enumerate() {
        let reading = match unit.kind {
            UnitKind::Han => single_char(&unit.text).and_then(|c| lexicon.sole_reading(c).map(|r| (c, r))),
            _ => None,
        };
        let Some((c, reading)) = reading else {
            units.push(unit.clone());
            continue;
        };
        eligible += 1;
        let picked = sample_selected && rng::uniform_at(seed, stream, 1 + i as u64) < char_rate;
        if picked {
            replaced += 1;
            units.push(Unit {
                kind: UnitKind::Pinyin,
                text: reading.to_string(),
                attached: unit.attached,
                replaced: Some(c),
            });
        } else {
            units.push(unit.clone());
        }
    }
    Ok(MixOutcome {
        text: MixedText { units },
        sample_selected,
        eligible,
        replaced,
    })
}

fn single_char(s: &str) -> Option<char> {
    let mut it = s.chars();
    match (it.next(), it.next()) {
        (Some(c), None) => Some(c),
        _ => None,
    }
}

/// Whether a raw per-unit draw would select position `index` under `seed`.
/// Exposed for tooling that searches for seeds with a given selection.
pub fn unit_selected(seed: u64, index: usize, sample_rate: f64, char_rate: f64) -> bool {
    let stream = rng::stream_id(rng::TOKENIZER_MIX);
    rng::uniform_at(seed, stream, SAMPLE_SLOT) < sample_rate
        && rng::uniform_at(seed, stream, 1 + index as u64) < char_rate
}
