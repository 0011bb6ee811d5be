//! Sequence layouts for the conditional language model: training
//! sequences, inference prefixes, EOS-driven streaming and reference
//! aggregation.

mod frame;
mod ids;
mod reference;
mod stream;

pub use frame::{
    build_inference_prefix, build_training_sequence, latent_sidecar, parse_sequence,
    ConditioningLatents, Delimiter, FrameKind, FramedSequence, PromptSplit, Role, Segment,
    SeqFormat, SequenceParts, SEQUENCE_FILE_VERSION, SPEAKER_PLACEHOLDER,
};
pub use ids::{IdLayout, SpecialIds};
pub use reference::{
    aggregate_references, subsample, MeanPoolEncoder, ReferenceAudio, ReferenceEncoder,
    DEFAULT_LATENT_SLOTS, DEFAULT_SUBSAMPLE,
};
pub use stream::{default_max_len, stream_until_eos, StreamOutcome};
