//! The `ttskit` command line: argument parsing, config merging, run
//! manifests and replay.

mod commands;
mod manifest;

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

pub use manifest::{file_digest, sha256_hex, FileDigest, RunManifest, SeedRecord, MANIFEST_VERSION};

use crate::error::{Error, Result};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "ttskit", version, about = "Bilingual TTS front-end, quantizers, sequence framing and evaluation")]
#[command(arg_required_else_help = true, propagate_version = true)]
pub struct Cli {
    /// Seed for every random stream.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Print JSON instead of human-readable tables.
    #[arg(long, global = true)]
    pub json: bool,
    /// TOML file of `option = value` defaults for the chosen subcommand.
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,
    /// Write a run manifest here.
    #[arg(long, global = true, value_name = "PATH")]
    pub manifest_out: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Text normalization, pinyin mixing and BPE.
    #[command(subcommand)]
    Tokenizer(TokenizerCmd),
    /// VQ/FSQ quantization, utilization reports and the toy experiment.
    #[command(subcommand)]
    Quant(QuantCmd),
    /// Frame arithmetic, latent interpolation and mel extraction.
    #[command(subcommand)]
    Signal(SignalCmd),
    /// Build and validate language-model sequences.
    #[command(subcommand)]
    Seq(SeqCmd),
    /// Error rates, speaker similarity, polyphone and results tables.
    #[command(subcommand)]
    Eval(EvalCmd),
    /// Replay a run manifest and check every digest.
    Reproduce {
        manifest: PathBuf,
    },
}

#[derive(Debug, Args)]
pub struct TextInput {
    /// Text given inline.
    #[arg(long, conflicts_with = "input")]
    pub text: Option<String>,
    /// File with one text per line.
    #[arg(long)]
    pub input: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum TokenizerCmd {
    /// Learn a BPE vocabulary from a corpus (one text per line).
    Train {
        #[arg(long)]
        corpus: PathBuf,
        #[arg(long)]
        lexicon: PathBuf,
        #[arg(long, default_value_t = crate::tokenizer::DEFAULT_BUDGET)]
        budget: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Normalize and encode text to ids.
    Encode {
        #[arg(long)]
        vocab: PathBuf,
        #[command(flatten)]
        source: TextInput,
        /// Print token strings next to ids.
        #[arg(long)]
        tokens: bool,
    },
    /// Decode ids (comma or space separated) to text.
    Decode {
        #[arg(long)]
        vocab: PathBuf,
        #[arg(long, conflicts_with = "input")]
        ids: Option<String>,
        /// File with one id list per line.
        #[arg(long)]
        input: Option<PathBuf>,
    },
    /// Replace non-polyphonic characters with pinyin. Line `i` of a file
    /// uses seed `seed + i`.
    Mix {
        #[arg(long)]
        lexicon: PathBuf,
        #[arg(long, default_value_t = 0.5)]
        sample_rate: f64,
        #[arg(long, default_value_t = 0.2)]
        char_rate: f64,
        #[command(flatten)]
        source: TextInput,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum QuantKind {
    Vq,
    Fsq,
}

#[derive(Debug, Subcommand)]
pub enum QuantCmd {
    /// Assign each row of a matrix file to its nearest codebook entry.
    Vq {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        codebook: PathBuf,
        /// Also write a utilization report to `<stem>.json`/`<stem>.hist`.
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Finite scalar quantization of matrix rows or of the zero vector.
    Fsq {
        #[arg(long, value_delimiter = ',', default_value = "8,8,8,6,5")]
        levels: Vec<u32>,
        #[arg(long, conflicts_with = "zeros")]
        input: Option<PathBuf>,
        /// Quantize the all-zero latent.
        #[arg(long)]
        zeros: bool,
        /// Treat inputs as already bounded to [-1, 1] (skip tanh).
        #[arg(long)]
        bounded: bool,
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Utilization report from a list of code ids or a histogram file.
    Report {
        /// Whitespace-separated code ids.
        #[arg(long, conflicts_with = "histogram", requires = "code_count")]
        ids: Option<PathBuf>,
        #[arg(long)]
        code_count: Option<usize>,
        /// Histogram written by an earlier report.
        #[arg(long)]
        histogram: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Train the toy autoencoder and report codebook usage.
    ToyExp {
        #[arg(long, value_enum)]
        quantizer: QuantKind,
        #[arg(long)]
        clusters: usize,
        #[arg(long)]
        samples: usize,
        #[arg(long)]
        steps: Option<usize>,
        /// Writes `<stem>.json`, `<stem>.hist` and `<stem>.curve.json`.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Debug, Args)]
pub struct RateArgs {
    #[arg(long, default_value_t = 24_000)]
    pub sample_rate: u32,
    #[arg(long, default_value_t = 25)]
    pub token_rate: u32,
    #[arg(long, default_value_t = 100)]
    pub latent_rate: u32,
}

#[derive(Debug, Subcommand)]
pub enum SignalCmd {
    /// Frame arithmetic for a rate configuration.
    Frames {
        #[command(flatten)]
        rates: RateArgs,
        /// Print the sample window of this token.
        #[arg(long)]
        token_index: Option<usize>,
        /// Print the token count for this many samples.
        #[arg(long)]
        samples: Option<usize>,
    },
    /// Upsample latent frames by linear interpolation.
    Interp {
        #[arg(long)]
        input: PathBuf,
        #[arg(long, default_value_t = 4)]
        factor: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Log-mel spectrogram of a mono WAV file, one frame per token.
    Mel {
        #[arg(long)]
        input: PathBuf,
        #[command(flatten)]
        rates: RateArgs,
        #[arg(long, default_value_t = crate::signal::DEFAULT_MEL_BINS)]
        bins: usize,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Debug, Args)]
pub struct SeqArgs {
    #[arg(long)]
    pub format: crate::sequence::SeqFormat,
    #[arg(long)]
    pub text: String,
    #[arg(long)]
    pub prompt_text: Option<String>,
    #[arg(long)]
    pub prompt_audio: Option<String>,
    /// Speaker latents as a matrix file (rows are latent slots).
    #[arg(long)]
    pub speaker: Option<PathBuf>,
    /// Delimiter ids as `bt,et,ba,ea`.
    #[arg(long, value_delimiter = ',', num_args = 4, default_value = "2,3,4,5")]
    pub specials: Vec<u32>,
    /// Save the sequence as JSON (with a latent sidecar for speakers).
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum SeqCmd {
    /// Training sequence.
    Build {
        #[command(flatten)]
        args: SeqArgs,
        #[arg(long)]
        audio: String,
    },
    /// Inference prefix.
    Prefix {
        #[command(flatten)]
        args: SeqArgs,
    },
    /// Check a saved sequence against its format grammar.
    Validate {
        file: PathBuf,
    },
}

#[derive(Debug, Subcommand)]
pub enum EvalCmd {
    /// Character or word error rate.
    Wer {
        #[arg(long)]
        lang: crate::eval::Language,
        #[arg(long = "ref", requires = "hyp", conflicts_with = "records")]
        reference: Option<String>,
        #[arg(long)]
        hyp: Option<String>,
        /// JSON-lines records; the corpus-level rate is reported.
        #[arg(long)]
        records: Option<PathBuf>,
        /// Normalization rules (TOML).
        #[arg(long)]
        normalization: Option<PathBuf>,
    },
    /// Raw cosine similarity of embedding pairs.
    Ss {
        #[arg(long, requires = "b", conflicts_with = "records", allow_hyphen_values = true)]
        a: Option<String>,
        #[arg(long, allow_hyphen_values = true)]
        b: Option<String>,
        #[arg(long)]
        records: Option<PathBuf>,
    },
    /// Error and correction counts of the polyphone set.
    Polyphone {
        #[arg(long)]
        input: PathBuf,
    },
    /// Per-set results and the average row.
    Table {
        #[arg(long)]
        sets: PathBuf,
    },
}

/// What a subcommand produced.
pub struct Report {
    pub text: String,
    pub json: serde_json::Value,
}

/// Files touched by a run, for the manifest.
#[derive(Debug, Default)]
pub struct Io {
    pub inputs: Vec<PathBuf>,
    pub outputs: Vec<PathBuf>,
}

impl Io {
    pub fn input(&mut self, p: &Path) -> PathBuf {
        if !self.inputs.iter().any(|x| x == p) {
            self.inputs.push(p.to_path_buf());
        }
        p.to_path_buf()
    }

    pub fn output(&mut self, p: &Path) {
        if !self.outputs.iter().any(|x| x == p) {
            self.outputs.push(p.to_path_buf());
        }
    }
}

fn toml_to_json(v: &toml::Value) -> serde_json::Value {
    serde_json::to_value(v).unwrap_or(serde_json::Value::Null)
}

/// Appends `--key value` for every config entry whose option is not on the
/// command line already. Booleans become bare flags when true.
fn merge_config(args: &[String], table: &toml::Table) -> Result<Vec<String>> {
    let mut merged = args.to_vec();
    for (key, value) in table {
        let flag = format!("--{}", key.replace('_', "-"));
        let present = args.iter().any(|a| a == &flag || a.starts_with(&format!("{flag}=")));
        if present {
            continue;
        }
        match value {
            toml::Value::Boolean(true) => merged.push(flag),
            toml::Value::Boolean(false) => {}
            toml::Value::String(s) => merged.extend([flag, s.clone()]),
            toml::Value::Integer(i) => merged.extend([flag, i.to_string()]),
            toml::Value::Float(f) => merged.extend([flag, f.to_string()]),
            toml::Value::Array(items) => {
                let parts: Vec<String> = items
                    .iter()
                    .map(|i| match i {
                        toml::Value::String(s) => s.clone(),
                        other => other.to_string(),
                    })
                    .collect();
                merged.extend([flag, parts.join(",")]);
            }
            other => {
                return Err(Error::Config(format!(
                    "config key `{key}` has unsupported value {other}"
                )))
            }
        }
    }
    Ok(merged)
}

fn config_path(args: &[String]) -> Option<PathBuf> {
    args.iter().enumerate().find_map(|(i, a)| {
        if a == "--config" {
            args.get(i + 1).map(PathBuf::from)
        } else {
            a.strip_prefix("--config=").map(PathBuf::from)
        }
    })
}

struct Outcome {
    code: i32,
    stdout: Vec<u8>,
    io: Io,
    effective: Vec<String>,
    config: Option<serde_json::Value>,
    seed: u64,
    manifest_out: Option<PathBuf>,
}

fn execute(args: &[String], err: &mut dyn Write) -> Outcome {
    let mut outcome = Outcome {
        code: EXIT_OK,
        stdout: Vec::new(),
        io: Io::default(),
        effective: args.to_vec(),
        config: None,
        seed: 0,
        manifest_out: None,
    };
    if let Some(path) = config_path(args) {
        let parsed = std::fs::read_to_string(&path)
            .map_err(Error::from)
            .and_then(|t| toml::from_str::<toml::Table>(&t).map_err(|e| Error::Config(e.to_string())));
        match parsed.and_then(|table| {
            outcome.config = Some(toml_to_json(&toml::Value::Table(table.clone())));
            merge_config(args, &table)
        }) {
            Ok(m) => {
                outcome.io.input(&path);
                outcome.effective = m;
            }
            Err(e) => {
                let _ = writeln!(err, "error: {}: {e}", path.display());
                outcome.code = EXIT_FAILURE;
                return outcome;
            }
        }
    }
    let argv = std::iter::once("ttskit".to_string()).chain(outcome.effective.iter().cloned());
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            let display_only = matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion);
            if display_only {
                let _ = write!(outcome.stdout, "{e}");
                outcome.code = EXIT_OK;
            } else {
                let _ = write!(err, "{}", e.render());
                outcome.code = EXIT_USAGE;
            }
            return outcome;
        }
    };
    outcome.seed = cli.seed;
    outcome.manifest_out = cli.manifest_out.clone();
    if let Command::Reproduce { manifest } = &cli.command {
        outcome.manifest_out = None;
        outcome.code = match reproduce(manifest, &mut outcome.stdout) {
            Ok(()) => EXIT_OK,
            Err(e) => {
                let _ = writeln!(err, "error: {e}");
                EXIT_FAILURE
            }
        };
        return outcome;
    }
    match commands::dispatch(&cli, &mut outcome.io) {
        Ok(report) => {
            if cli.json {
                let _ = writeln!(
                    outcome.stdout,
                    "{}",
                    serde_json::to_string_pretty(&report.json).unwrap_or_default()
                );
            } else {
                let _ = write!(outcome.stdout, "{}", report.text);
            }
        }
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            outcome.code = EXIT_FAILURE;
        }
    }
    outcome
}

fn digests(paths: &[PathBuf]) -> Vec<FileDigest> {
    paths
        .iter()
        .filter_map(|p| {
            file_digest(p).ok().map(|sha256| FileDigest {
                path: p.clone(),
                sha256,
            })
        })
        .collect()
}

fn manifest_for(args: &[String], o: &Outcome) -> RunManifest {
    RunManifest {
        version: MANIFEST_VERSION,
        tool: "ttskit".into(),
        tool_version: env!("CARGO_PKG_VERSION").into(),
        argv: args.to_vec(),
        effective_args: o.effective.clone(),
        config: o.config.clone(),
        seeds: SeedRecord::new(o.seed),
        inputs: digests(&o.io.inputs),
        outputs: digests(&o.io.outputs),
        stdout_sha256: sha256_hex(&o.stdout),
        exit_code: o.code,
    }
}

/// Re-runs the recorded invocation and compares stdout and every output
/// file digest with the manifest.
pub fn reproduce(path: &Path, out: &mut dyn Write) -> Result<()> {
    let m = RunManifest::load(path)?;
    m.verify_inputs()?;
    let args: Vec<String> = strip_manifest_flag(&m.effective_args);
    let mut sink = Vec::new();
    let o = execute(&args, &mut sink);
    if o.code != m.exit_code {
        return Err(Error::Config(format!(
            "replay exited with {} but the manifest recorded {}",
            o.code, m.exit_code
        )));
    }
    if sha256_hex(&o.stdout) != m.stdout_sha256 {
        return Err(Error::Digest { path: PathBuf::from("<stdout>") });
    }
    for f in &m.outputs {
        if file_digest(&f.path)? != f.sha256 {
            return Err(Error::Digest { path: f.path.clone() });
        }
    }
    writeln!(
        out,
        "reproduced: stdout and {} output file(s) match {}",
        m.outputs.len(),
        path.display()
    )?;
    Ok(())
}

fn strip_manifest_flag(args: &[String]) -> Vec<String> {
    let mut out = Vec::new();
    let mut skip = false;
    for a in args {
        if skip {
            skip = false;
            continue;
        }
        if a == "--manifest-out" {
            skip = true;
            continue;
        }
        if a.starts_with("--manifest-out=") {
            continue;
        }
        out.push(a.clone());
    }
    out
}

/// Runs the tool on `args` (without the program name) and returns the
/// exit code.
pub fn run<I, S>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<OsString>,
{
    let args: Vec<String> = args
        .into_iter()
        .map(|a| a.into().to_string_lossy().into_owned())
        .collect();
    let o = execute(&args, err);
    let _ = out.write_all(&o.stdout);
    if let Some(path) = &o.manifest_out {
        if let Err(e) = manifest_for(&args, &o).save(path) {
            let _ = writeln!(err, "error: writing manifest {}: {e}", path.display());
            return EXIT_FAILURE;
        }
    }
    o.code
}

/// Entry point for the binary.
pub fn main() -> i32 {
    let stdout = std::io::stdout();
    let stderr = std::io::stderr();
    run(std::env::args_os().skip(1), &mut stdout.lock(), &mut stderr.lock())
}
