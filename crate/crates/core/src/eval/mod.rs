//! Objective evaluation: error rates, speaker similarity, polyphone
//! accounting and results tables.

mod distance;
mod normalize;
mod polyphone;
mod records;
mod similarity;
mod table;

pub use distance::{edit_distance, EditCounts};
pub use normalize::{is_punctuation, EnRules, Language, NormalizationConfig, ZhRules, NORMALIZATION_VERSION};
pub use polyphone::{
    load_polyphone_tsv, parse_polyphone_tsv, polyphone_report, render_pct, PolyphoneCase,
    PolyphoneReport,
};
pub use records::{
    error_rate, parse_records, read_records, score_record, write_records, EmbeddingRef,
    EmbeddingStore, EvalRecord, RecordScore,
};
pub use similarity::speaker_similarity;
pub use table::{
    aggregate_table, run_table, AverageMode, AverageRow, ResultsTable, SetConfig, SetResult,
    SetScores, TableConfig,
};
