//! Builds the three LM sequence layouts, parses one back, streams audio ids
//! from a scripted generator and pools reference audio into speaker latents.

use ttskit::sequence::{
    aggregate_references, build_inference_prefix, build_training_sequence, default_max_len, parse_sequence,
    stream_until_eos, FrameKind, IdLayout, MeanPoolEncoder, ReferenceAudio, SeqFormat, SequenceParts, SpecialIds,
    DEFAULT_SUBSAMPLE,
};
use ttskit::signal::Matrix;

fn main() -> anyhow::Result<()> {
    let specials = SpecialIds::default();
    let layout = IdLayout::new(12_000, 8_192)?;
    let audio = |codes: &[u32]| codes.iter().map(|c| layout.audio_id(*c)).collect::<Result<Vec<_>, _>>();

    let refs: Vec<ReferenceAudio> = (0..2)
        .map(|r| {
            let rows: Vec<Vec<f64>> = (0..90).map(|t| vec![(t + r) as f64 / 90.0, r as f64, 1.0]).collect();
            Matrix::from_rows(&rows).map(|frames| ReferenceAudio { id: format!("ref{r}"), frames })
        })
        .collect::<Result<_, _>>()?;
    let speaker = aggregate_references(&refs, &MeanPoolEncoder::default(), DEFAULT_SUBSAMPLE)?;
    println!("speaker latents: {} slots x {}", speaker.slots(), speaker.latents().cols());

    let text = vec![101, 102, 103];
    for format in SeqFormat::ALL {
        let mut parts = SequenceParts { text: text.clone(), audio: Some(audio(&[7, 8, 9, 10])?), ..Default::default() };
        match format {
            SeqFormat::Seq1 => {
                parts.prompt_text = Some(vec![50, 51]);
                parts.prompt_audio = Some(audio(&[1, 2])?);
            }
            SeqFormat::Seq2 => {}
            SeqFormat::Seq3 => parts.speaker = Some(speaker.clone()),
        }
        let train = build_training_sequence(format, &parts, &specials)?;
        let prefix = build_inference_prefix(format, &SequenceParts { audio: None, ..parts }, &specials)?;
        println!("{}\n  training: {}\n  prefix:   {}", format.name(), train.layout(), prefix.layout());
        let ids = train.flattened();
        let slots = ids.iter().take_while(|id| **id == u32::MAX).count();
        println!("  ids: {slots} speaker slots + {:?}", &ids[slots..]);

        let parsed = parse_sequence(format, FrameKind::Training, train.flattened(), train.speaker().cloned(), train.prompt_split(), &specials)?;
        assert_eq!(parsed, train);
    }

    let mut script = audio(&[3, 1, 4, 1, 5])?.into_iter().chain([specials.ea]);
    let out = stream_until_eos(|_| script.next().unwrap_or(specials.ea), &specials, &layout, default_max_len(text.len()))?;
    let codes: Vec<u32> = out.ids.iter().filter_map(|id| layout.audio_code(*id)).collect();
    println!("generated codes {codes:?} (truncated: {})", out.truncated);
    Ok(())
}
