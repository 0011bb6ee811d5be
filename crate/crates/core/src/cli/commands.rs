use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde_json::{json, Value};

use super::{Cli, Command, EvalCmd, Io, QuantCmd, QuantKind, RateArgs, Report, SeqArgs, SeqCmd, SignalCmd, TextInput, TokenizerCmd};
use crate::error::{Error, Result};
use crate::eval::{
    edit_distance, load_polyphone_tsv, polyphone_report, read_records, run_table, score_record, speaker_similarity,
    EditCounts, EmbeddingStore, NormalizationConfig,
};
use crate::quantizer::toy::{run_toy_experiment, ToyConfig};
use crate::quantizer::{Codebook, FsqConfig, UtilizationReport};
use crate::sequence::{
    build_inference_prefix, build_training_sequence, ConditioningLatents, FramedSequence, Segment, SequenceParts,
    SpecialIds,
};
use crate::signal::{interpolate_latents, load_matrix, mel_extract, read_wav, save_matrix, FrameSpec, LatentSequence};
use crate::tokenizer::{bpe_train, normalize, pinyin_mix, required_atoms, PinyinLexicon, Vocabulary};

pub fn dispatch(cli: &Cli, io: &mut Io) -> Result<Report> {
    match &cli.command {
        Command::Tokenizer(c) => tokenizer(c, cli.seed, io),
        Command::Quant(c) => quant(c, cli.seed, io),
        Command::Signal(c) => signal(c, io),
        Command::Seq(c) => seq(c, io),
        Command::Eval(c) => eval(c, io),
        Command::Reproduce { .. } => unreachable!("handled before dispatch"),
    }
}

fn read_lines(path: &Path, io: &mut Io) -> Result<Vec<String>> {
    let text = std::fs::read_to_string(io.input(path))?;
    Ok(text.lines().map(str::to_string).collect())
}

fn texts(src: &TextInput, io: &mut Io) -> Result<Vec<String>> {
    match (&src.text, &src.input) {
        (Some(t), None) => Ok(vec![t.clone()]),
        (None, Some(p)) => read_lines(p, io),
        _ => Err(Error::Config("give either --text or --input".into())),
    }
}

fn parse_ids(s: &str) -> Result<Vec<u32>> {
    s.split(|c: char| c == ',' || c.is_whitespace())
        .filter(|t| !t.is_empty())
        .map(|t| t.parse::<u32>().map_err(|_| Error::Parse(format!("`{t}` is not a token id"))))
        .collect()
}

fn parse_vector(s: &str) -> Result<Vec<f64>> {
    s.split(|c: char| c == ',' || c.is_whitespace())
        .filter(|t| !t.is_empty())
        .map(|t| t.parse::<f64>().map_err(|_| Error::Parse(format!("`{t}` is not a number"))))
        .collect()
}

fn join<T: ToString>(v: &[T], sep: &str) -> String {
    v.iter().map(ToString::to_string).collect::<Vec<_>>().join(sep)
}

fn tokenizer(cmd: &TokenizerCmd, seed: u64, io: &mut Io) -> Result<Report> {
    match cmd {
        TokenizerCmd::Train { corpus, lexicon, budget, out } => {
            let lex = PinyinLexicon::load(io.input(lexicon))?;
            let lines = read_lines(corpus, io)?;
            let texts: Vec<_> = lines.iter().filter(|l| !l.trim().is_empty()).map(|l| normalize(l)).collect();
            let outcome = bpe_train(&texts, *budget, &required_atoms(&lex))?;
            outcome.vocab.save(out)?;
            io.output(out);
            let mut text = format!(
                "vocabulary: {} tokens, {} merges -> {}\n",
                outcome.vocab.len(),
                outcome.merges_learned,
                out.display()
            );
            if outcome.exhausted {
                text.push_str("note: pair statistics ran out before the budget was reached\n");
            }
            Ok(Report {
                text,
                json: json!({
                    "vocab_size": outcome.vocab.len(),
                    "merges_learned": outcome.merges_learned,
                    "exhausted": outcome.exhausted,
                    "out": out,
                }),
            })
        }
        TokenizerCmd::Encode { vocab, source, tokens } => {
            let v = Vocabulary::load(io.input(vocab))?;
            let mut text = String::new();
            let mut items = Vec::new();
            for line in texts(source, io)? {
                let mixed = normalize(&line);
                let ids = v.encode(&mixed);
                let toks = v.encode_to_strings(&mixed);
                if *tokens {
                    writeln!(text, "{}\t{}", join(&ids, " "), toks.join(" ")).ok();
                } else {
                    writeln!(text, "{}", join(&ids, " ")).ok();
                }
                items.push(json!({"normalized": mixed.render(), "ids": ids, "tokens": toks}));
            }
            Ok(Report { text, json: Value::Array(items) })
        }
        TokenizerCmd::Decode { vocab, ids, input } => {
            let v = Vocabulary::load(io.input(vocab))?;
            let lists = match (ids, input) {
                (Some(s), None) => vec![s.clone()],
                (None, Some(p)) => read_lines(p, io)?,
                _ => return Err(Error::Config("give either --ids or --input".into())),
            };
            let mut text = String::new();
            let mut items = Vec::new();
            for l in lists {
                let decoded = v.decode(&parse_ids(&l)?)?;
                writeln!(text, "{decoded}").ok();
                items.push(Value::String(decoded));
            }
            Ok(Report { text, json: Value::Array(items) })
        }
        TokenizerCmd::Mix { lexicon, sample_rate, char_rate, source } => {
            let lex = PinyinLexicon::load(io.input(lexicon))?;
            let mut text = String::new();
            let mut items = Vec::new();
            for (i, line) in texts(source, io)?.iter().enumerate() {
                let line_seed = seed.wrapping_add(i as u64);
                let m = pinyin_mix(&normalize(line), &lex, *sample_rate, *char_rate, line_seed)?;
                let rendered = m.text.render();
                writeln!(text, "{rendered}").ok();
                items.push(json!({
                    "seed": line_seed,
                    "text": rendered,
                    "sample_selected": m.sample_selected,
                    "eligible": m.eligible,
                    "replaced": m.replaced,
                }));
            }
            Ok(Report { text, json: Value::Array(items) })
        }
    }
}

fn save_report(r: &UtilizationReport, stem: &Path, io: &mut Io) -> Result<()> {
    r.save(stem)?;
    io.output(&stem.with_extension("json"));
    io.output(&stem.with_extension("hist"));
    Ok(())
}

fn report_text(r: &UtilizationReport) -> String {
    let s = r.summary(None);
    let mut t = format!(
        "tokens {}  codes {}/{}  utilization {:.4}\n",
        s.total_tokens, s.codes_seen, s.code_count, s.utilization
    );
    for (p, m) in &s.topk_mass {
        writeln!(t, "top {p:>4} of codes: {m:.4} of tokens").ok();
    }
    t
}

fn quant(cmd: &QuantCmd, seed: u64, io: &mut Io) -> Result<Report> {
    match cmd {
        QuantCmd::Vq { input, codebook, report } => {
            let cb = Codebook::load(io.input(codebook))?;
            let (m, _) = load_matrix(io.input(input))?;
            let mut ids = Vec::with_capacity(m.rows());
            for row in m.iter_rows() {
                ids.push(cb.quantize(row)?.0);
            }
            let mut text = join(&ids, "\n");
            text.push('\n');
            let mut j = json!({ "ids": ids });
            if let Some(stem) = report {
                let r = UtilizationReport::from_ids(ids.iter().map(|i| *i as u64), cb.size())?;
                save_report(&r, stem, io)?;
                j["report"] = serde_json::to_value(r.summary(None))?;
            }
            Ok(Report { text, json: j })
        }
        QuantCmd::Fsq { levels, input, zeros, bounded, report } => {
            let cfg = FsqConfig::new(levels.clone())?;
            let rows: Vec<Vec<f64>> = match (input, zeros) {
                (Some(p), false) => load_matrix(io.input(p))?.0.iter_rows().map(<[f64]>::to_vec).collect(),
                (None, true) => vec![vec![0.0; cfg.dim()]],
                _ => return Err(Error::Config("give either --input or --zeros".into())),
            };
            let mut text = String::new();
            let mut items = Vec::new();
            let mut indices = Vec::new();
            for row in &rows {
                let code = if *bounded { cfg.quantize_bounded(row)? } else { cfg.quantize(row)? };
                writeln!(text, "index {}  codes [{}]", code.index, join(&code.codes, ", ")).ok();
                items.push(json!({"index": code.index, "codes": code.codes, "values": code.values}));
                indices.push(code.index);
            }
            let mut j = json!({ "levels": cfg.levels(), "code_count": cfg.code_count(), "codes": items });
            if let Some(stem) = report {
                let k = usize::try_from(cfg.code_count())
                    .map_err(|_| Error::Config("code count too large for a histogram".into()))?;
                let r = UtilizationReport::from_ids(indices, k)?;
                save_report(&r, stem, io)?;
                j["report"] = serde_json::to_value(r.summary(None))?;
            }
            Ok(Report { text, json: j })
        }
        QuantCmd::Report { ids, code_count, histogram, out } => {
            let r = match (ids, histogram) {
                (Some(p), None) => {
                    let k = code_count.ok_or_else(|| Error::Config("--ids needs --code-count".into()))?;
                    let text = std::fs::read_to_string(io.input(p))?;
                    let ids = text
                        .split_whitespace()
                        .map(|t| t.parse::<u64>().map_err(|_| Error::Parse(format!("`{t}` is not a code id"))))
                        .collect::<Result<Vec<_>>>()?;
                    UtilizationReport::from_ids(ids, k)?
                }
                (None, Some(p)) => UtilizationReport::read_histogram(std::fs::File::open(io.input(p))?)?,
                _ => return Err(Error::Config("give either --ids or --histogram".into())),
            };
            if let Some(stem) = out {
                save_report(&r, stem, io)?;
            }
            Ok(Report { text: report_text(&r), json: serde_json::to_value(r.summary(None))? })
        }
        QuantCmd::ToyExp { quantizer, clusters, samples, steps, out } => {
            let mut cfg = match quantizer {
                QuantKind::Vq => ToyConfig::vq(*clusters, *samples, seed),
                QuantKind::Fsq => ToyConfig::fsq(*clusters, *samples, seed),
            };
            if let Some(s) = steps {
                cfg.steps = *s;
            }
            let res = run_toy_experiment(&cfg)?;
            let mut text = report_text(&res.report);
            writeln!(text, "held-out reconstruction {:.6}", res.eval_reconstruction).ok();
            if let Some(stem) = out {
                save_report(&res.report, stem, io)?;
                let curve = stem.with_extension("curve.json");
                let doc = json!({
                    "config": res.config,
                    "loss": res.loss_curve,
                    "utilization": res.utilization_curve,
                    "eval_reconstruction": res.eval_reconstruction,
                });
                std::fs::write(&curve, serde_json::to_string_pretty(&doc)? + "\n")?;
                io.output(&curve);
            }
            Ok(Report {
                text,
                json: json!({
                    "config": res.config,
                    "report": res.report.summary(None),
                    "eval_reconstruction": res.eval_reconstruction,
                    "final_loss": res.loss_curve.last(),
                }),
            })
        }
    }
}

fn frame_spec(r: &RateArgs) -> Result<FrameSpec> {
    FrameSpec::new(r.sample_rate, r.token_rate, r.latent_rate)
}

fn signal(cmd: &SignalCmd, io: &mut Io) -> Result<Report> {
    match cmd {
        SignalCmd::Frames { rates, token_index, samples } => {
            let spec = frame_spec(rates)?;
            let mut text = format!(
                "sample rate {} Hz, token rate {} Hz, latent rate {} Hz\nsamples per token {}\nupsample factor {}\n",
                spec.sample_rate,
                spec.token_rate,
                spec.latent_rate_out,
                spec.samples_per_token(),
                spec.upsample_factor()
            );
            let mut j = json!({
                "sample_rate": spec.sample_rate,
                "token_rate": spec.token_rate,
                "latent_rate": spec.latent_rate_out,
                "samples_per_token": spec.samples_per_token(),
                "upsample_factor": spec.upsample_factor(),
            });
            if let Some(i) = token_index {
                let (a, b) = spec.token_window(*i);
                writeln!(text, "token {i} covers samples [{a}, {b})").ok();
                j["window"] = json!([a, b]);
            }
            if let Some(n) = samples {
                writeln!(text, "{n} samples give {} tokens", spec.token_count(*n)).ok();
                j["token_count"] = json!(spec.token_count(*n));
            }
            Ok(Report { text, json: j })
        }
        SignalCmd::Interp { input, factor, out } => {
            let (m, rate) = load_matrix(io.input(input))?;
            let up = interpolate_latents(&LatentSequence::new(m, rate)?, *factor)?;
            save_matrix(out, &up.frames, up.rate)?;
            io.output(out);
            Ok(Report {
                text: format!("{} frames at {} Hz -> {}\n", up.len(), up.rate, out.display()),
                json: json!({"frames": up.len(), "rate": up.rate, "dim": up.frames.cols(), "out": out}),
            })
        }
        SignalCmd::Mel { input, rates, bins, out } => {
            let spec = frame_spec(rates)?;
            let audio = read_wav(io.input(input), spec.sample_rate)?;
            let mel = mel_extract(&audio, spec, *bins)?;
            save_matrix(out, &mel.frames, spec.token_rate)?;
            io.output(out);
            let mut text = format!("{} frames x {} bins -> {}\n", mel.frames.rows(), mel.frames.cols(), out.display());
            if mel.clamped > 0 {
                writeln!(text, "{} energies clamped to the log floor", mel.clamped).ok();
            }
            Ok(Report {
                text,
                json: json!({"frames": mel.frames.rows(), "bins": mel.frames.cols(), "clamped": mel.clamped, "out": out}),
            })
        }
    }
}

fn seq_parts(a: &SeqArgs, audio: Option<&str>, io: &mut Io) -> Result<(SequenceParts, SpecialIds)> {
    let specials = match a.specials.as_slice() {
        [bt, et, ba, ea] => SpecialIds::new(*bt, *et, *ba, *ea)?,
        _ => return Err(Error::Config("--specials takes four ids".into())),
    };
    let speaker = match &a.speaker {
        Some(p) => {
            let (m, _) = load_matrix(io.input(p))?;
            Some(ConditioningLatents::new(m, vec![p.display().to_string()])?)
        }
        None => None,
    };
    let parts = SequenceParts {
        speaker,
        prompt_text: a.prompt_text.as_deref().map(parse_ids).transpose()?,
        text: parse_ids(&a.text)?,
        prompt_audio: a.prompt_audio.as_deref().map(parse_ids).transpose()?,
        audio: audio.map(parse_ids).transpose()?,
    };
    Ok((parts, specials))
}

fn describe(seq: &FramedSequence) -> String {
    let mut t = String::new();
    for s in seq.slots() {
        match s {
            Segment::SpeakerInfo(l) => write!(t, "<speaker {}x{}> ", l.slots(), l.latents().cols()),
            Segment::Special(d) => write!(t, "{} ", d.name()),
            Segment::Text { ids, .. } | Segment::Audio { ids, .. } => write!(t, "{} ", join(ids, " ")),
        }
        .ok();
    }
    let mut line = t.trim_end().to_string();
    line.push('\n');
    line
}

fn seq_json(seq: &FramedSequence) -> Value {
    json!({
        "format": seq.format(),
        "kind": format!("{:?}", seq.kind()).to_lowercase(),
        "length": seq.flattened().len(),
        "prompt_split": seq.prompt_split(),
        "flattened": seq.flattened(),
    })
}

fn finish_seq(seq: FramedSequence, out: Option<&PathBuf>, io: &mut Io) -> Result<Report> {
    if let Some(p) = out {
        seq.save(p)?;
        io.output(p);
        if seq.speaker().is_some() {
            io.output(&crate::sequence::latent_sidecar(p));
        }
    }
    Ok(Report { text: describe(&seq), json: seq_json(&seq) })
}

fn seq(cmd: &SeqCmd, io: &mut Io) -> Result<Report> {
    match cmd {
        SeqCmd::Build { args, audio } => {
            let (parts, specials) = seq_parts(args, Some(audio), io)?;
            finish_seq(build_training_sequence(args.format, &parts, &specials)?, args.out.as_ref(), io)
        }
        SeqCmd::Prefix { args } => {
            let (parts, specials) = seq_parts(args, None, io)?;
            finish_seq(build_inference_prefix(args.format, &parts, &specials)?, args.out.as_ref(), io)
        }
        SeqCmd::Validate { file } => {
            let seq = FramedSequence::load(io.input(file))?;
            let mut text = format!("valid {} {:?} sequence, {} ids\n", seq.format().name(), seq.kind(), seq.flattened().len());
            text.push_str(&describe(&seq));
            Ok(Report { text, json: seq_json(&seq) })
        }
    }
}

fn norm_config(p: &Option<PathBuf>, io: &mut Io) -> Result<NormalizationConfig> {
    match p {
        Some(p) => NormalizationConfig::load(io.input(p)),
        None => Ok(NormalizationConfig::default()),
    }
}

fn eval(cmd: &EvalCmd, io: &mut Io) -> Result<Report> {
    match cmd {
        EvalCmd::Wer { lang, reference, hyp, records, normalization } => {
            let norm = norm_config(normalization, io)?;
            let metric = lang.metric();
            let (counts, units, utts) = match (reference, hyp, records) {
                (Some(r), Some(h), None) => {
                    let ru = norm.units(r, *lang);
                    if ru.is_empty() {
                        return Err(Error::Empty("reference after normalization"));
                    }
                    (edit_distance(&ru, &norm.units(h, *lang)), ru.len(), 1)
                }
                (None, None, Some(p)) => {
                    let recs = read_records(io.input(p))?;
                    let mut store = EmbeddingStore::new(p.parent().unwrap_or(Path::new(".")));
                    let mut total = EditCounts::default();
                    let mut units = 0;
                    for r in recs.iter().filter(|r| r.language == *lang) {
                        let mut plain = r.clone();
                        plain.prompt_embedding = None;
                        plain.generated_embedding = None;
                        let s = score_record(&plain, &norm, &mut store)?;
                        total += s.counts;
                        units += s.ref_units;
                    }
                    if units == 0 {
                        return Err(Error::Empty("records in the requested language"));
                    }
                    (total, units, recs.iter().filter(|r| r.language == *lang).count())
                }
                _ => return Err(Error::Config("give --ref and --hyp, or --records".into())),
            };
            let rate = counts.distance as f64 / units as f64;
            Ok(Report {
                text: format!(
                    "{metric} {:.2}%  ({} edits: {} sub, {} del, {} ins over {} units, {} utterances)\n",
                    100.0 * rate,
                    counts.distance,
                    counts.substitutions,
                    counts.deletions,
                    counts.insertions,
                    units,
                    utts
                ),
                json: json!({"metric": metric, "rate": rate, "counts": counts, "ref_units": units, "utterances": utts}),
            })
        }
        EvalCmd::Ss { a, b, records } => match (a, b, records) {
            (Some(a), Some(b), None) => {
                let s = speaker_similarity(&parse_vector(a)?, &parse_vector(b)?)?;
                Ok(Report { text: format!("SS {s:.4}\n"), json: json!({"similarity": s}) })
            }
            (None, None, Some(p)) => {
                let recs = read_records(io.input(p))?;
                let mut store = EmbeddingStore::new(p.parent().unwrap_or(Path::new(".")));
                let mut sims = Vec::new();
                for r in &recs {
                    if let (Some(pe), Some(ge)) = (&r.prompt_embedding, &r.generated_embedding) {
                        sims.push(speaker_similarity(&store.resolve(pe)?, &store.resolve(ge)?)?);
                    }
                }
                if sims.is_empty() {
                    return Err(Error::Empty("embedding pairs"));
                }
                let mut sorted = sims.clone();
                sorted.sort_by(f64::total_cmp);
                let mean = sorted.iter().sum::<f64>() / sorted.len() as f64;
                Ok(Report {
                    text: format!("SS {mean:.4}  ({} pairs)\n", sims.len()),
                    json: json!({"similarity": mean, "pairs": sims.len()}),
                })
            }
            _ => Err(Error::Config("give --a and --b, or --records".into())),
        },
        EvalCmd::Polyphone { input } => {
            let r = polyphone_report(&load_polyphone_tsv(io.input(input))?)?;
            Ok(Report { text: r.to_string(), json: r.to_json() })
        }
        EvalCmd::Table { sets } => {
            record_table_inputs(sets, io)?;
            let t = run_table(sets)?;
            Ok(Report { text: t.to_string(), json: serde_json::to_value(&t)? })
        }
    }
}

// Registers the config, its normalization file and every records file for
// the manifest. Embedding matrices are picked up from the records.
fn record_table_inputs(path: &Path, io: &mut Io) -> Result<()> {
    let cfg = crate::eval::TableConfig::load(io.input(path))?;
    let dir = path.parent().unwrap_or(Path::new("."));
    if let Some(n) = &cfg.normalization {
        io.input(&dir.join(n));
    }
    for s in &cfg.sets {
        let file = dir.join(&s.records);
        if let Ok(recs) = read_records(&file) {
            let base = file.parent().unwrap_or(dir).to_path_buf();
            for r in &recs {
                for e in [&r.prompt_embedding, &r.generated_embedding].into_iter().flatten() {
                    if let crate::eval::EmbeddingRef::File(spec) = e {
                        let f = spec.rsplit_once('#').map_or(spec.as_str(), |(f, _)| f);
                        io.input(&base.join(f));
                    }
                }
            }
        }
        io.input(&file);
    }
    Ok(())
}
