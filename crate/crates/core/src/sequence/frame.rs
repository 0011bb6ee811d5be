use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::ids::SpecialIds;
use crate::error::{Error, Result};
use crate::signal::{load_matrix, save_matrix, Matrix};

/// Id-stream marker for one speaker latent row.
pub const SPEAKER_PLACEHOLDER: u32 = u32::MAX;
pub const SEQUENCE_FILE_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SeqFormat {
    #[serde(rename = "SEQ1")]
    Seq1,
    #[serde(rename = "SEQ2")]
    Seq2,
    #[serde(rename = "SEQ3")]
    Seq3,
}

impl SeqFormat {
    pub const ALL: [SeqFormat; 3] = [SeqFormat::Seq1, SeqFormat::Seq2, SeqFormat::Seq3];

    pub fn name(self) -> &'static str {
        match self {
            SeqFormat::Seq1 => "SEQ1",
            SeqFormat::Seq2 => "SEQ2",
            SeqFormat::Seq3 => "SEQ3",
        }
    }
}

impl fmt::Display for SeqFormat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SeqFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "seq1" => Ok(SeqFormat::Seq1),
            "seq2" => Ok(SeqFormat::Seq2),
            "seq3" => Ok(SeqFormat::Seq3),
            _ => Err(Error::Parse(format!("unknown sequence format `{s}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FrameKind {
    /// Full sequence ending in `[EA]`.
    Training,
    /// Generation prefix ending before the target audio.
    Prefix,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Role {
    Prompt,
    Target,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Delimiter {
    #[serde(rename = "[BT]")]
    Bt,
    #[serde(rename = "[ET]")]
    Et,
    #[serde(rename = "[BA]")]
    Ba,
    #[serde(rename = "[EA]")]
    Ea,
}

impl Delimiter {
    pub fn id(self, specials: &SpecialIds) -> u32 {
        match self {
            Delimiter::Bt => specials.bt,
            Delimiter::Et => specials.et,
            Delimiter::Ba => specials.ba,
            Delimiter::Ea => specials.ea,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Delimiter::Bt => "[BT]",
            Delimiter::Et => "[ET]",
            Delimiter::Ba => "[BA]",
            Delimiter::Ea => "[EA]",
        }
    }
}

/// Speaker conditioning: `M × H` latent slots plus the references they
/// came from.
#[derive(Debug, Clone, PartialEq)]
pub struct ConditioningLatents {
    latents: Matrix,
    source_refs: Vec<String>,
}

impl ConditioningLatents {
    pub fn new(latents: Matrix, source_refs: Vec<String>) -> Result<Self> {
        if latents.rows() == 0 || latents.cols() == 0 {
            return Err(Error::Empty("conditioning latents"));
        }
        if !latents.is_finite() {
            return Err(Error::NonFinite("conditioning latents".into()));
        }
        if source_refs.is_empty() {
            return Err(Error::Empty("conditioning latent source references"));
        }
        Ok(Self {
            latents,
            source_refs,
        })
    }

    pub fn latents(&self) -> &Matrix {
        &self.latents
    }

    pub fn source_refs(&self) -> &[String] {
        &self.source_refs
    }

    pub fn slots(&self) -> usize {
        self.latents.rows()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Segment {
    SpeakerInfo(ConditioningLatents),
    Special(Delimiter),
    Text { role: Role, ids: Vec<u32> },
    Audio { role: Role, ids: Vec<u32> },
}

/// Inputs to the builders. Empty prompt vectors count as absent.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct SequenceParts {
    pub speaker: Option<ConditioningLatents>,
    pub prompt_text: Option<Vec<u32>>,
    pub text: Vec<u32>,
    pub prompt_audio: Option<Vec<u32>>,
    /// Target audio; required for training sequences, rejected for prefixes.
    pub audio: Option<Vec<u32>>,
}

/// Prompt block lengths, needed to split the shared text and audio spans
/// when parsing a flat stream.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct PromptSplit {
    pub text: usize,
    pub audio: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum SlotKind {
    Speaker,
    Delim(Delimiter),
    Text(Role),
    Audio(Role),
}

fn grammar(format: SeqFormat, kind: FrameKind) -> Vec<SlotKind> {
    use Delimiter::*;
    use SlotKind::*;
    let mut g = Vec::new();
    if format == SeqFormat::Seq3 {
        g.push(Speaker);
    }
    g.push(Delim(Bt));
    if format == SeqFormat::Seq1 {
        g.push(Text(Role::Prompt));
    }
    g.extend([Text(Role::Target), Delim(Et), Delim(Ba)]);
    if format == SeqFormat::Seq1 {
        g.push(Audio(Role::Prompt));
    }
    if kind == FrameKind::Training {
        g.extend([Audio(Role::Target), Delim(Ea)]);
    }
    g
}

fn slot_name(kind: SlotKind) -> &'static str {
    match kind {
        SlotKind::Speaker => "speaker_info",
        SlotKind::Delim(d) => d.name(),
        SlotKind::Text(Role::Prompt) => "prompt_text",
        SlotKind::Text(Role::Target) => "text",
        SlotKind::Audio(Role::Prompt) => "prompt_audio",
        SlotKind::Audio(Role::Target) => "audio",
    }
}

fn format_err(slot: &'static str, message: impl Into<String>) -> Error {
    Error::Format {
        slot,
        message: message.into(),
    }
}

fn non_empty(v: &Option<Vec<u32>>) -> Option<&Vec<u32>> {
    v.as_ref().filter(|ids| !ids.is_empty())
}

fn check_block(slot: &'static str, ids: &[u32], specials: &SpecialIds) -> Result<()> {
    for (i, &id) in ids.iter().enumerate() {
        if let Some(name) = specials.name(id) {
            return Err(format_err(slot, format!("id {id} at offset {i} is the delimiter {name}")));
        }
        if id == SPEAKER_PLACEHOLDER {
            return Err(format_err(slot, format!("id {id} at offset {i} is the speaker placeholder")));
        }
    }
    Ok(())
}

/// A built sequence: its slot structure and the flattened id stream.
#[derive(Debug, Clone, PartialEq)]
pub struct FramedSequence {
    format: SeqFormat,
    kind: FrameKind,
    specials: SpecialIds,
    slots: Vec<Segment>,
    flattened: Vec<u32>,
}

impl FramedSequence {
    pub fn format(&self) -> SeqFormat {
        self.format
    }

    pub fn kind(&self) -> FrameKind {
        self.kind
    }

    pub fn specials(&self) -> SpecialIds {
        self.specials
    }

    pub fn slots(&self) -> &[Segment] {
        &self.slots
    }

    /// Id stream; each speaker latent row appears as [`SPEAKER_PLACEHOLDER`].
    pub fn flattened(&self) -> &[u32] {
        &self.flattened
    }

    /// Slot names joined by `", "`, e.g. `[BT], text, [ET], [BA], audio, [EA]`.
    pub fn layout(&self) -> String {
        self.slots
            .iter()
            .map(|s| match s {
                Segment::SpeakerInfo(_) => slot_name(SlotKind::Speaker),
                Segment::Special(d) => slot_name(SlotKind::Delim(*d)),
                Segment::Text { role, .. } => slot_name(SlotKind::Text(*role)),
                Segment::Audio { role, .. } => slot_name(SlotKind::Audio(*role)),
            })
            .collect::<Vec<_>>()
            .join(", ")
    }

    pub fn speaker(&self) -> Option<&ConditioningLatents> {
        self.slots.iter().find_map(|s| match s {
            Segment::SpeakerInfo(c) => Some(c),
            _ => None,
        })
    }

    fn block(&self, text: bool, role: Role) -> Option<&Vec<u32>> {
        self.slots.iter().find_map(|s| match s {
            Segment::Text { role: r, ids } if text && *r == role => Some(ids),
            Segment::Audio { role: r, ids } if !text && *r == role => Some(ids),
            _ => None,
        })
    }

    pub fn text(&self) -> &[u32] {
        self.block(true, Role::Target).map_or(&[], Vec::as_slice)
    }

    pub fn audio(&self) -> Option<&[u32]> {
        self.block(false, Role::Target).map(Vec::as_slice)
    }

    pub fn prompt_split(&self) -> PromptSplit {
        PromptSplit {
            text: self.block(true, Role::Prompt).map_or(0, Vec::len),
            audio: self.block(false, Role::Prompt).map_or(0, Vec::len),
        }
    }

    pub fn parts(&self) -> SequenceParts {
        SequenceParts {
            speaker: self.speaker().cloned(),
            prompt_text: self.block(true, Role::Prompt).cloned(),
            text: self.text().to_vec(),
            prompt_audio: self.block(false, Role::Prompt).cloned(),
            audio: self.block(false, Role::Target).cloned(),
        }
    }
}

fn build(
    format: SeqFormat,
    kind: FrameKind,
    parts: &SequenceParts,
    specials: &SpecialIds,
) -> Result<FramedSequence> {
    let name = format.name();
    match (format, &parts.speaker) {
        (SeqFormat::Seq3, None) => {
            return Err(format_err("speaker_info", "SEQ3 requires speaker latents"))
        }
        (SeqFormat::Seq1 | SeqFormat::Seq2, Some(_)) => {
            return Err(format_err("speaker_info", format!("speaker latents are not part of {name}")))
        }
        _ => {}
    }
    let prompt_text = non_empty(&parts.prompt_text);
    let prompt_audio = non_empty(&parts.prompt_audio);
    if format == SeqFormat::Seq1 {
        if prompt_text.is_none() {
            return Err(format_err("prompt_text", "prompt text required for SEQ1"));
        }
        if prompt_audio.is_none() {
            return Err(format_err("prompt_audio", "prompt audio required for SEQ1"));
        }
    } else {
        if prompt_text.is_some() {
            return Err(format_err("prompt_text", format!("prompt text is not part of {name}")));
        }
        if prompt_audio.is_some() {
            return Err(format_err("prompt_audio", format!("prompt audio is not part of {name}")));
        }
    }
    if parts.text.is_empty() {
        return Err(format_err("text", "text is empty; nothing to synthesize"));
    }
    match (kind, &parts.audio) {
        (FrameKind::Training, None) => {
            return Err(format_err("audio", "training sequences need a target audio block"))
        }
        (FrameKind::Prefix, Some(_)) => {
            return Err(format_err("audio", "target audio is not part of an inference prefix"))
        }
        _ => {}
    }

    let mut slots = Vec::new();
    let mut flattened = Vec::new();
    for slot in grammar(format, kind) {
        let seg = match slot {
            SlotKind::Speaker => {
                let s = parts.speaker.clone().expect("checked above");
                flattened.extend(std::iter::repeat(SPEAKER_PLACEHOLDER).take(s.slots()));
                Segment::SpeakerInfo(s)
            }
            SlotKind::Delim(d) => {
                flattened.push(d.id(specials));
                Segment::Special(d)
            }
            SlotKind::Text(role) | SlotKind::Audio(role) => {
                let ids = match slot {
                    SlotKind::Text(Role::Prompt) => prompt_text.cloned(),
                    SlotKind::Text(Role::Target) => Some(parts.text.clone()),
                    SlotKind::Audio(Role::Prompt) => prompt_audio.cloned(),
                    _ => parts.audio.clone(),
                }
                .expect("checked above");
                check_block(slot_name(slot), &ids, specials)?;
                flattened.extend_from_slice(&ids);
                if matches!(slot, SlotKind::Text(_)) {
                    Segment::Text { role, ids }
                } else {
                    Segment::Audio { role, ids }
                }
            }
        };
        slots.push(seg);
    }
    Ok(FramedSequence {
        format,
        kind,
        specials: *specials,
        slots,
        flattened,
    })
}

/// Full training sequence in the layout of `format`.
pub fn build_training_sequence(
    format: SeqFormat,
    parts: &SequenceParts,
    specials: &SpecialIds,
) -> Result<FramedSequence> {
    build(format, FrameKind::Training, parts, specials)
}

/// Inference prefix: the training layout cut right before the target audio.
pub fn build_inference_prefix(
    format: SeqFormat,
    parts: &SequenceParts,
    specials: &SpecialIds,
) -> Result<FramedSequence> {
    build(format, FrameKind::Prefix, parts, specials)
}

/// Validating parser for a flat id stream. `speaker` supplies the latent
/// rows behind the placeholders; `split` gives the prompt block lengths.
pub fn parse_sequence(
    format: SeqFormat,
    kind: FrameKind,
    ids: &[u32],
    speaker: Option<ConditioningLatents>,
    split: PromptSplit,
    specials: &SpecialIds,
) -> Result<FramedSequence> {
    let mut parts = SequenceParts::default();
    let mut at = 0;
    let take = |at: &mut usize, n: usize, slot: SlotKind| -> Result<Vec<u32>> {
        if *at + n > ids.len() {
            return Err(format_err(slot_name(slot), format!("stream ends inside the block at {}", *at)));
        }
        let block = ids[*at..*at + n].to_vec();
        *at += n;
        Ok(block)
    };
    let until = |at: usize, stop: u32, slot: SlotKind| -> Result<usize> {
        match ids[at..].iter().position(|&id| specials.contains(id)) {
            Some(n) if ids[at + n] == stop => Ok(n),
            Some(n) => Err(format_err(
                slot_name(slot),
                format!("delimiter {} inside the block at {}", ids[at + n], at + n),
            )),
            None => Err(format_err(slot_name(slot), "closing delimiter not found")),
        }
    };
    for slot in grammar(format, kind) {
        match slot {
            SlotKind::Speaker => {
                let s = speaker.clone().ok_or_else(|| {
                    format_err("speaker_info", "stream has a speaker slot but no latents were supplied")
                })?;
                let rows = ids[at..].iter().take_while(|&&id| id == SPEAKER_PLACEHOLDER).count();
                if rows != s.slots() {
                    return Err(format_err(
                        "speaker_info",
                        format!("{rows} placeholders for {} latent rows", s.slots()),
                    ));
                }
                at += rows;
                parts.speaker = Some(s);
            }
            SlotKind::Delim(d) => {
                match ids.get(at) {
                    Some(&id) if id == d.id(specials) => at += 1,
                    Some(&id) => {
                        return Err(format_err(d.name(), format!("expected {} at {at}, found {id}", d.name())))
                    }
                    None => return Err(format_err(d.name(), format!("stream ends before {}", d.name()))),
                }
            }
            SlotKind::Text(Role::Prompt) => parts.prompt_text = Some(take(&mut at, split.text, slot)?),
            SlotKind::Text(Role::Target) => {
                let n = until(at, specials.et, slot)?;
                parts.text = take(&mut at, n, slot)?;
            }
            SlotKind::Audio(Role::Prompt) => parts.prompt_audio = Some(take(&mut at, split.audio, slot)?),
            SlotKind::Audio(Role::Target) => {
                let n = until(at, specials.ea, slot)?;
                parts.audio = Some(take(&mut at, n, slot)?);
            }
        }
    }
    if at != ids.len() {
        return Err(format_err("trailing", format!("{} ids after the last slot", ids.len() - at)));
    }
    if speaker.is_some() && parts.speaker.is_none() {
        return Err(format_err("speaker_info", format!("{format} has no speaker slot")));
    }
    build(format, kind, &parts, specials)
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(tag = "tag", rename_all = "snake_case")]
enum SlotDoc {
    SpeakerInfo {
        rows: usize,
        cols: usize,
        source_refs: Vec<String>,
        latents: String,
    },
    Special {
        name: Delimiter,
        id: u32,
    },
    Text {
        role: Role,
        ids: Vec<u32>,
    },
    Audio {
        role: Role,
        ids: Vec<u32>,
    },
}

#[derive(Debug, Serialize, Deserialize)]
struct SequenceDoc {
    version: u32,
    format: SeqFormat,
    kind: FrameKind,
    specials: SpecialIds,
    slots: Vec<SlotDoc>,
    flattened: Vec<u32>,
}

/// Sidecar path for the speaker latents of `json_path`.
pub fn latent_sidecar(json_path: &Path) -> PathBuf {
    let stem = json_path.file_stem().map_or_else(|| "sequence".into(), |s| s.to_string_lossy().into_owned());
    json_path.with_file_name(format!("{stem}.latents.idxmt"))
}

impl FramedSequence {
    fn doc(&self, sidecar: &str) -> SequenceDoc {
        let slots = self
            .slots
            .iter()
            .map(|s| match s {
                Segment::SpeakerInfo(c) => SlotDoc::SpeakerInfo {
                    rows: c.latents.rows(),
                    cols: c.latents.cols(),
                    source_refs: c.source_refs.clone(),
                    latents: sidecar.to_string(),
                },
                Segment::Special(d) => SlotDoc::Special {
                    name: *d,
                    id: d.id(&self.specials),
                },
                Segment::Text { role, ids } => SlotDoc::Text { role: *role, ids: ids.clone() },
                Segment::Audio { role, ids } => SlotDoc::Audio { role: *role, ids: ids.clone() },
            })
            .collect();
        SequenceDoc {
            version: SEQUENCE_FILE_VERSION,
            format: self.format,
            kind: self.kind,
            specials: self.specials,
            slots,
            flattened: self.flattened.clone(),
        }
    }

    /// Writes the JSON document and, when a speaker slot is present, the
    /// latent sidecar next to it.
    pub fn save(&self, json_path: impl AsRef<Path>) -> Result<()> {
        let json_path = json_path.as_ref();
        let sidecar = latent_sidecar(json_path);
        let name = sidecar.file_name().unwrap_or_default().to_string_lossy().into_owned();
        if let Some(s) = self.speaker() {
            save_matrix(&sidecar, &s.latents, 0)?;
        }
        let mut text = serde_json::to_string_pretty(&self.doc(&name))?;
        text.push('\n');
        std::fs::write(json_path, text)?;
        Ok(())
    }

    /// Loads and validates a saved sequence: the slot list must follow the
    /// format grammar and reproduce the stored flat stream exactly.
    pub fn load(json_path: impl AsRef<Path>) -> Result<Self> {
        let json_path = json_path.as_ref();
        let doc: SequenceDoc = serde_json::from_str(&std::fs::read_to_string(json_path)?)?;
        if doc.version != SEQUENCE_FILE_VERSION {
            return Err(Error::Parse(format!("unsupported sequence file version {}", doc.version)));
        }
        let dir = json_path.parent().unwrap_or(Path::new("."));
        let mut expected = grammar(doc.format, doc.kind).into_iter();
        let mut parts = SequenceParts::default();
        for slot in doc.slots {
            let want = expected.next().ok_or_else(|| format_err("trailing", "more slots than the format allows"))?;
            let got = match &slot {
                SlotDoc::SpeakerInfo { .. } => SlotKind::Speaker,
                SlotDoc::Special { name, .. } => SlotKind::Delim(*name),
                SlotDoc::Text { role, .. } => SlotKind::Text(*role),
                SlotDoc::Audio { role, .. } => SlotKind::Audio(*role),
            };
            if got != want {
                return Err(format_err(
                    slot_name(want),
                    format!("found slot `{}` where `{}` belongs", slot_name(got), slot_name(want)),
                ));
            }
            match slot {
                SlotDoc::SpeakerInfo { rows, cols, source_refs, latents } => {
                    let (m, _) = load_matrix(dir.join(latents))?;
                    if m.rows() != rows || m.cols() != cols {
                        return Err(format_err("speaker_info", format!(
                            "sidecar is {}×{}, slot declares {rows}×{cols}", m.rows(), m.cols()
                        )));
                    }
                    parts.speaker = Some(ConditioningLatents::new(m, source_refs)?);
                }
                SlotDoc::Special { name, id } => {
                    if id != name.id(&doc.specials) {
                        return Err(format_err(name.name(), format!("slot id {id} does not match the specials table")));
                    }
                }
                SlotDoc::Text { role: Role::Prompt, ids } => parts.prompt_text = Some(ids),
                SlotDoc::Text { role: Role::Target, ids } => parts.text = ids,
                SlotDoc::Audio { role: Role::Prompt, ids } => parts.prompt_audio = Some(ids),
                SlotDoc::Audio { role: Role::Target, ids } => parts.audio = Some(ids),
            }
        }
        if let Some(missing) = expected.next() {
            return Err(format_err(slot_name(missing), "slot is missing"));
        }
        let seq = build(doc.format, doc.kind, &parts, &doc.specials)?;
        if seq.flattened != doc.flattened {
            return Err(format_err("flattened", "stored stream does not match the slot list"));
        }
        Ok(seq)
    }
}
