//! Walks the bilingual example sentence through normalization, pinyin
//! mixing and BPE encoding.
//!
//! The BPE vocabulary here is built by hand so the last row is readable; a
//! trained one is shown in `bpe_train`.

use std::path::PathBuf;

use ttskit::tokenizer::{normalize, pinyin_mix, PinyinLexicon, Specials, Vocabulary, MARKER};

const INPUT: &str = "晕眩是一种感觉，I want to go to the supermarket!";
// Draws 眩 and 感 and no other eligible character.
const SEED: u64 = 26;

fn hand_vocab() -> ttskit::Result<Vocabulary> {
    let m = |s: &str| format!("{MARKER}{s}");
    let mut tokens: Vec<String> = Specials::NAMES.iter().map(|s| s.to_string()).collect();
    for atom in ["晕", "眩", "是", "一", "种", "感", "觉", "XUAN4", "GAN3"] {
        tokens.push(m(atom));
    }
    tokens.push(MARKER.to_string());
    tokens.extend(('A'..='Z').map(String::from));
    tokens.extend(["，", "!"].map(String::from));

    let chains: [&[&str]; 7] = [
        &["I"],
        &["W", "A", "N", "T"],
        &["T", "O"],
        &["G", "O"],
        &["T", "H", "E"],
        &["S", "U", "P", "E", "R"],
        &["，"],
    ];
    let mut merges = vec![("A".to_string(), "R".to_string()), ("K".to_string(), "E".to_string())];
    tokens.extend(["AR", "KE"].map(String::from));
    for chain in chains {
        let mut left = MARKER.to_string();
        for sym in chain {
            let merged = format!("{left}{sym}");
            if !tokens.contains(&merged) {
                tokens.push(merged.clone());
                merges.push((left.clone(), sym.to_string()));
            }
            left = merged;
        }
    }
    Vocabulary::new(tokens, merges, Specials::LEADING)
}

fn main() -> anyhow::Result<()> {
    let lexicon = PinyinLexicon::load(PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures/lexicon.tsv"))?;
    let text = normalize(INPUT);
    let mixed = pinyin_mix(&text, &lexicon, 0.5, 0.2, SEED)?;
    let vocab = hand_vocab()?;
    let tokens = vocab.encode_to_strings(&mixed.text);

    println!("Input:      {INPUT}");
    println!("Mix Pinyin: {}", mixed.text.render());
    println!("BPE Tokens: {}", tokens.join(", ").replace(MARKER, "_"));
    println!("ids:        {:?}", vocab.encode(&mixed.text));
    println!("decoded:    {}", vocab.decode(&vocab.encode(&mixed.text))?);
    println!(
        "seed {SEED}: {} of {} eligible characters replaced",
        mixed.replaced, mixed.eligible
    );
    Ok(())
}
