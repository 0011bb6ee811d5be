use std::path::{Path, PathBuf};
use std::process::Command;

use serde_json::Value;
use ttskit::signal::{save_matrix, write_wav, Matrix};

fn manifest_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
}

fn fixture(name: &str) -> String {
    manifest_dir().join("fixtures").join(name).display().to_string()
}

struct Run {
    code: i32,
    stdout: String,
    stderr: String,
}

fn run(args: &[&str]) -> Run {
    let out = Command::new(env!("CARGO_BIN_EXE_ttskit")).args(args).output().expect("spawn");
    Run {
        code: out.status.code().unwrap_or(-1),
        stdout: String::from_utf8(out.stdout).unwrap(),
        stderr: String::from_utf8(out.stderr).unwrap(),
    }
}

fn ok(args: &[&str]) -> String {
    let r = run(args);
    assert_eq!(r.code, 0, "{args:?} failed: {}", r.stderr);
    r.stdout
}

fn assert_schema(schema: &str, args: &[&str]) -> Value {
    let mut full = args.to_vec();
    full.push("--json");
    let out = ok(&full);
    let instance: Value = serde_json::from_str(&out).unwrap_or_else(|e| panic!("{args:?}: not JSON ({e}): {out}"));
    let path = manifest_dir().join("schemas").join(format!("{schema}.schema.json"));
    let schema: Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    let validator = jsonschema::validator_for(&schema).expect("schema compiles");
    let errors: Vec<String> = validator.iter_errors(&instance).map(|e| e.to_string()).collect();
    assert!(errors.is_empty(), "{args:?} violates {}: {errors:?}\n{out}", path.display());
    instance
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

#[test]
fn exit_codes() {
    let r = run(&[]);
    assert_eq!(r.code, 2);
    assert!(r.stderr.contains("Usage"));

    let r = run(&["eval", "wer", "--nope"]);
    assert_eq!(r.code, 2);
    assert!(r.stderr.contains("--nope"));

    let r = run(&["quant", "fsq", "--levels", "8,1", "--zeros"]);
    assert_eq!(r.code, 1);
    assert!(r.stderr.starts_with("error: "), "{}", r.stderr);

    let r = run(&["eval", "polyphone", "--input", "/nonexistent/cases.tsv"]);
    assert_eq!(r.code, 1);

    assert_eq!(run(&["--help"]).code, 0);
    assert_eq!(run(&["--version"]).code, 0);
}

#[test]
fn fsq_zero_vector() {
    let out = ok(&["quant", "fsq", "--levels", "8,8,8,6,5", "--zeros"]);
    // Mixed radix, last dimension fastest: codes [4, 4, 4, 3, 2].
    let index = ((((4 * 8 + 4) * 8 + 4) * 6 + 3) * 5) + 2;
    assert_eq!(out, format!("index {index}  codes [4, 4, 4, 3, 2]\n"));
}

#[test]
fn polyphone_report_on_fixture() {
    let out = ok(&["eval", "polyphone", "--input", &fixture("table2_polyphone.tsv")]);
    assert!(out.contains("18.6%") && out.contains("94.0%"), "{out}");
}

#[test]
fn json_outputs_match_schemas() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let lex = fixture("lexicon.tsv");

    let corpus = d.join("corpus.txt");
    std::fs::write(&corpus, "晕眩是一种感觉，I want to go to the supermarket!\n银行 hello world.\n").unwrap();
    let vocab = d.join("vocab.json");
    assert_schema("tokenizer-train", &["tokenizer", "train", "--corpus", p(&corpus), "--lexicon", &lex, "--budget", "600", "--out", p(&vocab)]);
    let enc = assert_schema("tokenizer-encode", &["tokenizer", "encode", "--vocab", p(&vocab), "--text", "晕眩 hello!"]);
    let ids: Vec<String> = enc[0]["ids"].as_array().unwrap().iter().map(|v| v.to_string()).collect();
    let dec = assert_schema("tokenizer-decode", &["tokenizer", "decode", "--vocab", p(&vocab), "--ids", &ids.join(",")]);
    assert_eq!(dec[0], "晕 眩 HELLO !");
    assert_schema("tokenizer-mix", &["tokenizer", "mix", "--lexicon", &lex, "--text", "是一种感觉"]);

    let latents = d.join("z.idxmt");
    let m = Matrix::from_rows(&[vec![0.1, -0.4, 2.0, 0.0, 0.3], vec![-3.0, 0.2, 0.0, 0.9, -0.1]]).unwrap();
    save_matrix(&latents, &m, 25).unwrap();
    let fsq = assert_schema("quant-fsq", &["quant", "fsq", "--input", p(&latents), "--report", p(&d.join("fsq"))]);
    assert_eq!(fsq["codes"].as_array().unwrap().len(), 2);
    assert_schema("quant-report", &["quant", "report", "--histogram", p(&d.join("fsq.hist"))]);

    let cb = ttskit::quantizer::Codebook::new(3, 5, (0..15).map(|v| v as f64 / 10.0).collect()).unwrap();
    let cb_path = d.join("cb.idxcb");
    cb.save(&cb_path).unwrap();
    assert_schema("quant-vq", &["quant", "vq", "--input", p(&latents), "--codebook", p(&cb_path), "--report", p(&d.join("vq"))]);
    std::fs::write(d.join("ids.txt"), "0 1 1 2\n").unwrap();
    assert_schema("quant-report", &["quant", "report", "--ids", p(&d.join("ids.txt")), "--code-count", "4"]);
    assert_schema("quant-toy-exp", &["quant", "toy-exp", "--quantizer", "fsq", "--clusters", "8", "--samples", "500", "--steps", "50"]);

    assert_schema("signal-frames", &["signal", "frames", "--token-index", "2", "--samples", "24001"]);
    assert_schema("signal-interp", &["signal", "interp", "--input", p(&latents), "--out", p(&d.join("up.idxmt"))]);
    let wav = d.join("tone.wav");
    let tone: Vec<f64> = (0..24_000).map(|i| (i as f64 * 0.1).sin() * 0.5).collect();
    write_wav(&wav, &tone, 24_000).unwrap();
    let mel = assert_schema("signal-mel", &["signal", "mel", "--input", p(&wav), "--out", p(&d.join("mel.idxmt"))]);
    assert_eq!(mel["frames"], 25);

    let seq_out = d.join("seq.json");
    assert_schema("seq", &["seq", "build", "--format", "seq1", "--prompt-text", "10,11", "--text", "12", "--prompt-audio", "100", "--audio", "101,102", "--out", p(&seq_out)]);
    assert_schema("seq", &["seq", "validate", p(&seq_out)]);
    assert_schema("seq", &["seq", "prefix", "--format", "seq3", "--speaker", p(&latents), "--text", "12,13"]);

    assert_schema("eval-wer", &["eval", "wer", "--lang", "en", "--ref", "a b c", "--hyp", "a x c d"]);
    assert_schema("eval-wer", &["eval", "wer", "--lang", "zh", "--records", &fixture("table3/aishell1_test.jsonl")]);
    assert_schema("eval-ss", &["eval", "ss", "--a", "1,0,0", "--b", "1,1,0"]);
    assert_schema("eval-ss", &["eval", "ss", "--records", &fixture("table3/commonvoice_en.jsonl")]);
    assert_schema("eval-polyphone", &["eval", "polyphone", "--input", &fixture("table2_polyphone.tsv")]);
    assert_schema("eval-table", &["eval", "table", "--sets", &fixture("table3/table.toml")]);
}

#[test]
fn wer_by_hand() {
    let v = assert_schema("eval-wer", &["eval", "wer", "--lang", "en", "--ref", "the cat sat", "--hyp", "the cat sat down"]);
    assert_eq!(v["counts"]["insertions"], 1);
    assert_eq!(v["rate"].as_f64().unwrap(), 1.0 / 3.0);
}

#[test]
fn config_supplies_missing_flags() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("fsq.toml");
    std::fs::write(&cfg, "levels = [4, 4]\nzeros = true\n").unwrap();
    assert_eq!(ok(&["quant", "fsq", "--config", p(&cfg)]), "index 10  codes [2, 2]\n");
    // Flags on the command line win over the file.
    assert_eq!(ok(&["quant", "fsq", "--config", p(&cfg), "--levels", "3,3"]), "index 4  codes [1, 1]\n");

    std::fs::write(&cfg, "levels = { a = 1 }\n").unwrap();
    assert_eq!(run(&["quant", "fsq", "--config", p(&cfg)]).code, 1);
}

#[test]
fn seed_is_honored() {
    let lines: String = (0..40).map(|_| "是一种感觉是一种感觉\n").collect();
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("in.txt");
    std::fs::write(&input, lines).unwrap();
    let mix = |seed: &str| ok(&["tokenizer", "mix", "--lexicon", &fixture("lexicon.tsv"), "--input", p(&input), "--seed", seed]);
    assert_eq!(mix("11"), mix("11"));
    assert_ne!(mix("11"), mix("12"));

    let toy = |seed: &str| ok(&["quant", "toy-exp", "--quantizer", "vq", "--clusters", "8", "--samples", "300", "--steps", "40", "--seed", seed, "--json"]);
    assert_eq!(toy("3"), toy("3"));
    assert_ne!(toy("3"), toy("4"));
}

#[test]
fn toy_manifest_replays_byte_identically() {
    let dir = tempfile::tempdir().unwrap();
    let stem = dir.path().join("toy");
    let manifest = dir.path().join("run.json");
    ok(&[
        "quant", "toy-exp", "--quantizer", "vq", "--clusters", "8", "--samples", "400", "--steps", "60", "--seed", "9",
        "--out", p(&stem), "--manifest-out", p(&manifest),
    ]);
    let m: Value = serde_json::from_str(&std::fs::read_to_string(&manifest).unwrap()).unwrap();
    let schema: Value = serde_json::from_str(&std::fs::read_to_string(manifest_dir().join("schemas/manifest.schema.json")).unwrap()).unwrap();
    assert!(jsonschema::validator_for(&schema).unwrap().is_valid(&m));
    assert_eq!(m["seeds"]["seed"], 9);
    assert_eq!(m["outputs"].as_array().unwrap().len(), 3);

    let report = std::fs::read(stem.with_extension("json")).unwrap();
    let hist = std::fs::read(stem.with_extension("hist")).unwrap();
    let out = ok(&["reproduce", p(&manifest)]);
    assert!(out.starts_with("reproduced"), "{out}");
    assert_eq!(std::fs::read(stem.with_extension("json")).unwrap(), report);
    assert_eq!(std::fs::read(stem.with_extension("hist")).unwrap(), hist);
}

#[test]
fn reproduce_rejects_tampered_and_missing_inputs() {
    let dir = tempfile::tempdir().unwrap();
    let cases = dir.path().join("cases.tsv");
    std::fs::copy(fixture("table2_polyphone.tsv"), &cases).unwrap();
    let manifest = dir.path().join("m.json");
    ok(&["eval", "polyphone", "--input", p(&cases), "--manifest-out", p(&manifest)]);
    assert_eq!(run(&["reproduce", p(&manifest)]).code, 0);

    let mut text = std::fs::read_to_string(&cases).unwrap();
    text.push_str("extra\t行\t行\tXING2\t1\t-\n");
    std::fs::write(&cases, text).unwrap();
    let r = run(&["reproduce", p(&manifest)]);
    assert_eq!(r.code, 1);
    assert!(r.stderr.contains("digest") && r.stderr.contains("cases.tsv"), "{}", r.stderr);

    std::fs::remove_file(&cases).unwrap();
    let r = run(&["reproduce", p(&manifest)]);
    assert_eq!(r.code, 1);
    assert!(r.stderr.contains("cases.tsv"), "{}", r.stderr);
}

#[test]
fn equal_manifests_mean_equal_digests() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.json");
    let b = dir.path().join("b.json");
    for m in [&a, &b] {
        ok(&["eval", "table", "--sets", &fixture("table3/table.toml"), "--manifest-out", p(m)]);
    }
    let load = |path: &Path| -> Value { serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap() };
    let (ma, mb) = (load(&a), load(&b));
    assert_eq!(ma["inputs"], mb["inputs"]);
    assert_eq!(ma["stdout_sha256"], mb["stdout_sha256"]);
    // config, normalization, four record files and four embedding matrices
    assert_eq!(ma["inputs"].as_array().unwrap().len(), 10);
}

#[test]
fn sequence_errors_name_the_slot() {
    let r = run(&["seq", "build", "--format", "seq1", "--text", "12", "--audio", "1"]);
    assert_eq!(r.code, 1);
    assert!(r.stderr.contains("prompt_text"), "{}", r.stderr);
    let r = run(&["seq", "prefix", "--format", "seq2", "--text", "3"]);
    assert_eq!(r.code, 1);
    assert!(r.stderr.contains("[ET]") || r.stderr.contains("text"), "{}", r.stderr);
}
