//! Bilingual text front-end: normalization into units, character/pinyin
//! mixing, and BPE.

mod bpe;
mod lexicon;
mod mix;
mod normalize;
mod vocab;

pub use bpe::{bpe_train, required_atoms, TrainOutcome, DEFAULT_BUDGET};
pub use lexicon::PinyinLexicon;
pub use mix::{pinyin_mix, unit_selected, MixOutcome};
pub use normalize::{is_han, is_pinyin, normalize, MixedText, Unit, UnitKind};
pub use vocab::{Specials, Vocabulary, MARKER, MARKER_STR, UNK_GLYPH, VOCAB_FILE_VERSION};
