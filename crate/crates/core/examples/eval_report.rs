//! Error rates, speaker similarity, the polyphone report and the results
//! table, all on the shipped fixtures.

use std::path::PathBuf;

use ttskit::eval::{
    edit_distance, error_rate, load_polyphone_tsv, polyphone_report, run_table, speaker_similarity, Language,
    NormalizationConfig,
};

fn main() -> anyhow::Result<()> {
    let fixtures = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures");
    let norm = NormalizationConfig::default();

    let (r, h) = ("The cat sat on the mat.", "the cat sat on mat");
    let counts = edit_distance(&norm.units(r, Language::En), &norm.units(h, Language::En));
    println!("WER {:.3} ({counts:?})", error_rate(r, h, Language::En, &norm)?);
    println!("CER {:.3}", error_rate("晕眩是一种感觉。", "晕炫是一种感觉", Language::Zh, &norm)?);
    println!("SS {:.4}", speaker_similarity(&[0.2, 0.9, -0.1], &[0.25, 0.8, 0.05])?);

    let cases = load_polyphone_tsv(fixtures.join("table2_polyphone.tsv"))?;
    print!("\n{}", polyphone_report(&cases)?);

    println!();
    print!("{}", run_table(fixtures.join("table3/table.toml"))?);
    Ok(())
}
