//! Trains a small BPE vocabulary over the fixture lexicon and a toy corpus,
//! then encodes and decodes a sentence with it.
//!
//! ```text
//! cargo run --example bpe_train [BUDGET]
//! ```

use std::path::PathBuf;

use ttskit::tokenizer::{bpe_train, normalize, pinyin_mix, required_atoms, PinyinLexicon};

const CORPUS: &[&str] = &[
    "晕眩是一种感觉，I want to go to the supermarket!",
    "我们去银行办事，然后去超市。",
    "The supermarket is open on Sunday.",
    "Speech synthesis turns text into audio.",
    "他说 HAO3 的时候声音很轻。",
    "Market prices went up again.",
];

fn main() -> anyhow::Result<()> {
    let lexicon = PinyinLexicon::load(PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures/lexicon.tsv"))?;
    let required = required_atoms(&lexicon);
    let budget = match std::env::args().nth(1) {
        Some(b) => b.parse()?,
        None => 6 + required.len() + 120,
    };

    // Training text mixes pinyin in the same way the model sees it.
    let corpus: Vec<_> = CORPUS
        .iter()
        .enumerate()
        .map(|(i, line)| pinyin_mix(&normalize(line), &lexicon, 0.5, 0.2, i as u64).map(|m| m.text))
        .collect::<Result<_, _>>()?;
    let outcome = bpe_train(&corpus, budget, &required)?;
    let vocab = &outcome.vocab;
    println!(
        "{} tokens ({} required atoms, {} merges{})",
        vocab.len(),
        required.len(),
        outcome.merges_learned,
        if outcome.exhausted { ", pairs exhausted" } else { "" }
    );
    for (a, b) in vocab.merges().iter().take(10) {
        println!("  merge {a} + {b}");
    }

    let sentence = normalize("Supermarket music 晕眩");
    let ids = vocab.encode(&sentence);
    println!("{:?}", vocab.encode_to_strings(&sentence));
    println!("{ids:?} -> {}", vocab.decode(&ids)?);

    let path = std::env::temp_dir().join("ttskit-example-vocab.json");
    vocab.save(&path)?;
    println!("saved {}", path.display());
    Ok(())
}
