use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};

use super::lexicon::PinyinLexicon;
use super::normalize::{is_han, is_pinyin, MixedText, UnitKind};
use super::vocab::{Specials, Vocabulary, MARKER, MARKER_STR};
use crate::error::{Error, Result};

pub const DEFAULT_BUDGET: usize = 12_000;

#[derive(Debug, Clone)]
pub struct TrainOutcome {
    pub vocab: Vocabulary,
    pub merges_learned: usize,
    /// True when pair statistics ran dry before the budget was filled.
    pub exhausted: bool,
}

/// Every lexicon character and syllable plus the special names.
pub fn required_atoms(lexicon: &PinyinLexicon) -> BTreeSet<String> {
    let mut atoms: BTreeSet<String> = lexicon.chars().map(String::from).collect();
    atoms.extend(lexicon.syllables());
    atoms.extend(Specials::NAMES.iter().map(|s| s.to_string()));
    atoms
}

// Han characters and pinyin syllables are always whole units with a marker,
// so their atom token is the marked form.
fn atom_token(atom: &str) -> String {
    let mut chars = atom.chars();
    let single_han = matches!((chars.next(), chars.next()), (Some(c), None) if is_han(c));
    if single_han || is_pinyin(atom) {
        format!("{MARKER}{atom}")
    } else {
        atom.to_string()
    }
}

/// Learns a vocabulary of at most `budget` tokens from `corpus`.
///
/// Layout: specials at ids 0..6, then required atoms (sorted), then Han and
/// pinyin units seen in the corpus, then the symbol alphabet of the
/// remaining words (sorted), then one token per learned merge. The most
/// frequent adjacent pair is merged first; ties go to the lexicographically
/// smallest `(left, right)`.
pub fn bpe_train(
    corpus: &[MixedText],
    budget: usize,
    required: &BTreeSet<String>,
) -> Result<TrainOutcome> {
    if corpus.is_empty() {
        return Err(Error::Empty("training corpus"));
    }
    let mut tokens: Vec<String> = Specials::NAMES.iter().map(|s| s.to_string()).collect();
    let mut seen: HashSet<String> = tokens.iter().cloned().collect();
    let mut push = |t: String, tokens: &mut Vec<String>| {
        if seen.insert(t.clone()) {
            tokens.push(t);
        }
    };

    let atoms: Vec<String> = required
        .iter()
        .filter(|a| !Specials::NAMES.contains(&a.as_str()))
        .map(|a| atom_token(a))
        .collect();
    let floor = Specials::NAMES.len() + atoms.len();
    if budget < floor {
        return Err(Error::Config(format!(
            "budget {budget} is below {} specials + {} required atoms",
            Specials::NAMES.len(),
            atoms.len()
        )));
    }
    for a in atoms {
        push(a, &mut tokens);
    }

    // Word frequencies; Han and pinyin units never enter merge statistics.
    let mut words: BTreeMap<(bool, String), u64> = BTreeMap::new();
    let mut corpus_atoms: BTreeSet<String> = BTreeSet::new();
    for text in corpus {
        for unit in &text.units {
            match unit.kind {
                UnitKind::Han | UnitKind::Pinyin => {
                    corpus_atoms.insert(format!("{MARKER}{}", unit.text));
                }
                UnitKind::Word | UnitKind::Punct => {
                    *words.entry((!unit.attached, unit.text.clone())).or_default() += 1;
                }
            }
        }
    }
    for a in corpus_atoms {
        push(a, &mut tokens);
    }
    let mut alphabet: BTreeSet<String> = BTreeSet::new();
    for (marked, w) in words.keys() {
        if *marked {
            alphabet.insert(MARKER_STR.to_string());
        }
        alphabet.extend(w.chars().map(String::from));
    }
    for s in alphabet {
        push(s, &mut tokens);
    }
    if tokens.len() > budget {
        return Err(Error::Config(format!(
            "base inventory of {} tokens exceeds budget {budget}",
            tokens.len()
        )));
    }

    let mut seqs: Vec<(Vec<String>, u64)> = words
        .into_iter()
        .map(|((marked, w), n)| {
            let mut syms = Vec::with_capacity(w.len() + 1);
            if marked {
                syms.push(MARKER_STR.to_string());
            }
            syms.extend(w.chars().map(String::from));
            (syms, n)
        })
        .collect();

    let mut merges: Vec<(String, String)> = Vec::new();
    let mut exhausted = false;
    while tokens.len() < budget {
        let mut counts: HashMap<(&str, &str), u64> = HashMap::new();
        for (syms, n) in &seqs {
            for w in syms.windows(2) {
                *counts.entry((w[0].as_str(), w[1].as_str())).or_default() += n;
            }
        }
        let best = counts
            .into_iter()
            .max_by(|(pa, ca), (pb, cb)| ca.cmp(cb).then_with(|| pb.cmp(pa)))
            .map(|((a, b), _)| (a.to_string(), b.to_string()));
        let Some((a, b)) = best else {
            exhausted = true;
            break;
        };
        let merged = format!("{a}{b}");
        for (syms, _) in &mut seqs {
            let mut i = 0;
            while i + 1 < syms.len() {
                if syms[i] == a && syms[i + 1] == b {
                    syms[i] = merged.clone();
                    syms.remove(i + 1);
                }
                i += 1;
            }
        }
        push(merged, &mut tokens);
        merges.push((a, b));
    }
    let merges_learned = merges.len();
    let vocab = Vocabulary::new(tokens, merges, Specials::LEADING)?;
    Ok(TrainOutcome {
        vocab,
        merges_learned,
        exhausted,
    })
}
