//! Finite scalar quantization with the codec levels: midpoint and
//! saturated codes, and the mixed-radix index in both directions.

use ttskit::quantizer::{FsqConfig, FSQ_SCHEME};

fn main() -> anyhow::Result<()> {
    let cfg = FsqConfig::codec_default();
    println!("levels {:?}, {} codes", cfg.levels(), cfg.code_count());
    println!("{FSQ_SCHEME}");

    for z in [[0.0; 5], [10.0; 5], [-10.0; 5], [0.3, -0.8, 1.7, -0.05, 0.6]] {
        let q = cfg.quantize(&z)?;
        println!("z {z:>5.2?} -> codes {:?} index {:>5} values {:.3?}", q.codes, q.index, q.values);
    }

    for index in [0, 1, 5, 30, 15_359] {
        let codes = cfg.codes_of(index)?;
        assert_eq!(cfg.index_of(&codes)?, index);
        println!("index {index:>5} <-> codes {codes:?}");
    }
    Ok(())
}
