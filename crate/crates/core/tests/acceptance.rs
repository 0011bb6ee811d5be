//! One PASS/FAIL line per acceptance criterion. Exits non-zero if any fail.

use std::collections::VecDeque;
use std::path::PathBuf;
use std::process::Command;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use ttskit::eval::{edit_distance, run_table};
use ttskit::quantizer::toy::{run_default_grid, setup, ToyConfig};
use ttskit::quantizer::{Codebook, FsqConfig};
use ttskit::sequence::{build_inference_prefix, build_training_sequence, ConditioningLatents, SeqFormat, SequenceParts, SpecialIds};
use ttskit::signal::{interpolate_latents, FrameSpec, LatentSequence, Matrix};
use ttskit::tokenizer::{normalize, pinyin_mix, unit_selected, PinyinLexicon, UnitKind};

type Check = Result<String, String>;

fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures").join(name)
}

fn ttskit(args: &[&str]) -> (i32, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_ttskit")).args(args).output().expect("spawn ttskit");
    (out.status.code().unwrap_or(-1), String::from_utf8(out.stdout).expect("utf-8 stdout"))
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn within(t: Instant, limit: Duration) -> Result<(), String> {
    ensure(t.elapsed() < limit, || format!("took {:.2?}, limit {limit:?}", t.elapsed()))
}

const TABLE1_INPUT: &str = "晕眩是一种感觉，I want to go to the supermarket!";
const TABLE1_MIX: &str = "晕 XUAN4 是 一 种 GAN3 觉 ， I WANT TO GO TO THE SUPERMARKET !";
// Selects units 1 (眩) and 5 (感) and none of the other eligible ones.
const TABLE1_SEED: u64 = 26;

fn c1_table1_mix() -> Check {
    let t = Instant::now();
    let eligible = [(1usize, true), (2, false), (3, false), (5, true)];
    for (i, want) in eligible {
        ensure(unit_selected(TABLE1_SEED, i, 0.5, 0.2) == want, || format!("seed {TABLE1_SEED} unit {i} selection is not {want}"))?;
    }
    let lexicon = fixture("lexicon.tsv");
    let (code, out) = ttskit(&[
        "tokenizer", "mix", "--lexicon", lexicon.to_str().unwrap(), "--seed", &TABLE1_SEED.to_string(), "--text", TABLE1_INPUT,
    ]);
    ensure(code == 0, || format!("exit {code}"))?;
    ensure(out == format!("{TABLE1_MIX}\n"), || format!("got {out:?}"))?;
    within(t, Duration::from_secs(1))?;
    Ok(format!("{:?}", out.trim_end()))
}

fn c2_mix_statistics() -> Check {
    let t = Instant::now();
    let lex = PinyinLexicon::load(fixture("lexicon.tsv")).map_err(|e| e.to_string())?;
    let chars: Vec<char> = lex.chars().collect();
    let words = ["hello", "world", "the", "model", "speech", "a", "test"];
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let (mut selected, mut eligible, mut replaced) = (0usize, 0usize, 0usize);
    let n = 10_000u64;
    for seed in 0..n {
        let mut s = String::new();
        for _ in 0..rng.gen_range(4..16) {
            match rng.gen_range(0..10) {
                0 => s.push('，'),
                1 => {
                    s.push(' ');
                    s.push_str(words[rng.gen_range(0..words.len())]);
                    s.push(' ');
                }
                _ => s.push(chars[rng.gen_range(0..chars.len())]),
            }
        }
        let input = normalize(&s);
        let m = pinyin_mix(&input, &lex, 0.5, 0.2, seed).map_err(|e| e.to_string())?;
        for (a, b) in input.units.iter().zip(&m.text.units) {
            let c = a.text.chars().next();
            if a.kind == UnitKind::Han && c.is_some_and(|c| lex.is_polyphone(c)) && a != b {
                return Err(format!("polyphone {} replaced with seed {seed}", a.text));
            }
        }
        if m.sample_selected {
            selected += 1;
            eligible += m.eligible;
            replaced += m.replaced;
        } else if m.replaced != 0 {
            return Err(format!("unselected text changed with seed {seed}"));
        }
    }
    let sample_frac = selected as f64 / n as f64;
    let char_frac = replaced as f64 / eligible as f64;
    ensure((sample_frac - 0.5).abs() <= 0.02, || format!("sample fraction {sample_frac}"))?;
    ensure((char_frac - 0.2).abs() <= 0.02, || format!("replacement fraction {char_frac}"))?;
    within(t, Duration::from_secs(30))?;
    Ok(format!("sample {sample_frac:.4}, replacement {char_frac:.4} over {eligible} eligible, 0 polyphones"))
}

fn c3_fsq_structure() -> Check {
    let t = Instant::now();
    let cfg = FsqConfig::new(vec![8, 8, 8, 6, 5]).map_err(|e| e.to_string())?;
    ensure(cfg.code_count() == 15_360, || format!("code_count {}", cfg.code_count()))?;
    // Enumerate every code tuple directly and check it maps onto 0..15360 once.
    let mut hit = vec![false; 15_360];
    for a in 0..8 {
        for b in 0..8 {
            for c in 0..8 {
                for d in 0..6 {
                    for e in 0..5 {
                        let codes = [a, b, c, d, e];
                        let i = cfg.index_of(&codes).map_err(|e| e.to_string())?;
                        ensure(i < 15_360 && !hit[i as usize], || format!("{codes:?} -> {i}"))?;
                        hit[i as usize] = true;
                        ensure(cfg.codes_of(i).map_err(|e| e.to_string())? == codes, || format!("codes_of({i})"))?;
                    }
                }
            }
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..100_000 {
        let z: Vec<f64> = (0..5).map(|_| 3.0 * rng.sample::<f64, _>(StandardNormal)).collect();
        let q = cfg.quantize(&z).map_err(|e| e.to_string())?;
        let again = cfg.quantize_bounded(&q.values).map_err(|e| e.to_string())?;
        ensure(again == q, || format!("not idempotent at {z:?}"))?;
    }
    within(t, Duration::from_secs(10))?;
    Ok("15360 codes, bijective, idempotent on 1e5 draws".into())
}

fn c4_vq_oracle() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut queries = 0;
    for (k, d) in [(1, 4), (2, 1), (16, 8), (256, 16), (1024, 8)] {
        let mut vectors: Vec<f64> = (0..k * d).map(|_| rng.sample(StandardNormal)).collect();
        // Duplicate entries force ties.
        if k >= 16 {
            let (head, tail) = vectors.split_at_mut(d * (k / 2));
            tail[..d].copy_from_slice(&head[..d]);
        }
        let cb = Codebook::new(k, d, vectors.clone()).map_err(|e| e.to_string())?;
        for q in 0..2_000 {
            let z: Vec<f64> = if q % 10 == 0 {
                vectors[(q % k) * d..(q % k + 1) * d].to_vec()
            } else {
                (0..d).map(|_| rng.sample(StandardNormal)).collect()
            };
            let (mut best, mut best_d) = (0, f64::INFINITY);
            for j in 0..k {
                let dist: f64 = (0..d).map(|c| (vectors[j * d + c] - z[c]).powi(2)).sum();
                if dist < best_d {
                    best = j;
                    best_d = dist;
                }
            }
            let (got, _) = cb.quantize(&z).map_err(|e| e.to_string())?;
            ensure(got == best, || format!("K={k} query {q}: {got} vs brute force {best}"))?;
            queries += 1;
        }
    }
    Ok(format!("{queries} queries, 0 mismatches"))
}

fn c5_gradient() -> Check {
    let mut checked = 0;
    let mut worst: f64 = 0.0;
    let mut pick = ChaCha8Rng::seed_from_u64(5);
    for cfg in [ToyConfig::vq(8, 1_000, 1), ToyConfig::fsq(8, 1_000, 1)] {
        let (model, train, _, _) = setup(&cfg).map_err(|e| e.to_string())?;
        let mut points = 0;
        while points < 50 {
            let x = &train[pick.gen_range(0..train.len())];
            if model.boundary_margin(x) < 1e-3 {
                continue;
            }
            points += 1;
            let batch = [x.as_slice()];
            let (_, grads, _) = model.loss_grad(&batch);
            let frozen = model.freeze(&batch);
            let h = 1e-4;
            for (which, analytic) in [(0, &grads.enc_w), (1, &grads.enc_b)] {
                for (i, a) in analytic.iter().enumerate() {
                    let mut plus = model.clone();
                    let mut minus = model.clone();
                    let (p, m) = if which == 0 { (&mut plus.enc_w, &mut minus.enc_w) } else { (&mut plus.enc_b, &mut minus.enc_b) };
                    p[i] += h;
                    m[i] -= h;
                    // The perturbation must not move the sample across a code boundary.
                    if plus.tokenize(x) != model.tokenize(x) || minus.tokenize(x) != model.tokenize(x) {
                        return Err(format!("parameter {i} perturbation changed the code"));
                    }
                    let fd = (plus.frozen_loss(&batch, &frozen) - minus.frozen_loss(&batch, &frozen)) / (2.0 * h);
                    let scale = a.abs().max(fd.abs()).max(1e-8);
                    let rel = (a - fd).abs() / scale;
                    worst = worst.max(rel);
                    ensure(rel <= 1e-5, || format!("param {which}/{i}: analytic {a} vs fd {fd}"))?;
                    checked += 1;
                }
            }
        }
    }
    Ok(format!("100 points, {checked} encoder partials, worst relative error {worst:.2e}"))
}

fn c6_utilization_grid() -> Check {
    let t = Instant::now();
    let cells = run_default_grid(0).map_err(|e| e.to_string())?;
    for c in &cells {
        ensure(c.fsq_utilization >= c.vq_utilization, || format!("{c:?}: FSQ below VQ"))?;
    }
    for samples in ttskit::quantizer::toy::GRID_SAMPLES {
        let row: Vec<f64> = cells.iter().filter(|c| c.samples == samples).map(|c| c.vq_utilization).collect();
        ensure(row.windows(2).all(|w| w[0] <= w[1]), || format!("VQ utilization not monotone in clusters at {samples} samples: {row:?}"))?;
    }
    let big = cells.iter().filter(|c| c.samples == 100_000).max_by_key(|c| c.clusters).expect("grid cell");
    ensure(big.vq_top_half_mass > 0.8, || format!("VQ topk_mass(0.5) = {}", big.vq_top_half_mass))?;
    within(t, Duration::from_secs(300))?;
    let summary: Vec<String> = cells
        .iter()
        .map(|c| format!("{}/{}: vq {:.3} fsq {:.3}", c.clusters, c.samples, c.vq_utilization, c.fsq_utilization))
        .collect();
    Ok(format!("{} in {:.1?}", summary.join("; "), t.elapsed()))
}

fn c7_sequence_layouts() -> Check {
    let s = SpecialIds::default();
    let speaker = ConditioningLatents::new(Matrix::zeros(32, 4), vec!["ref".into()]).map_err(|e| e.to_string())?;
    let full = SequenceParts {
        speaker: None,
        prompt_text: Some(vec![10, 11]),
        text: vec![12, 13],
        prompt_audio: Some(vec![100, 101]),
        audio: Some(vec![102, 103]),
    };
    let expected = [
        (SeqFormat::Seq1, "[BT], prompt_text, text, [ET], [BA], prompt_audio, audio, [EA]", "[BT], prompt_text, text, [ET], [BA], prompt_audio"),
        (SeqFormat::Seq2, "[BT], text, [ET], [BA], audio, [EA]", "[BT], text, [ET], [BA]"),
        (SeqFormat::Seq3, "speaker_info, [BT], text, [ET], [BA], audio, [EA]", "speaker_info, [BT], text, [ET], [BA]"),
    ];
    for (format, train_layout, prefix_layout) in expected {
        let parts = match format {
            SeqFormat::Seq1 => full.clone(),
            SeqFormat::Seq2 => SequenceParts { prompt_text: None, prompt_audio: None, ..full.clone() },
            SeqFormat::Seq3 => SequenceParts { speaker: Some(speaker.clone()), prompt_text: None, prompt_audio: None, ..full.clone() },
        };
        let train = build_training_sequence(format, &parts, &s).map_err(|e| e.to_string())?;
        let prefix = build_inference_prefix(format, &SequenceParts { audio: None, ..parts }, &s).map_err(|e| e.to_string())?;
        ensure(train.layout() == train_layout, || format!("{format:?} training layout {}", train.layout()))?;
        ensure(prefix.layout() == prefix_layout, || format!("{format:?} prefix layout {}", prefix.layout()))?;
    }

    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let ids = |rng: &mut ChaCha8Rng, lo: u32, hi: u32, min: usize| -> Vec<u32> {
        (0..rng.gen_range(min..8)).map(|_| rng.gen_range(lo..hi)).collect()
    };
    for i in 0..1_000 {
        let format = SeqFormat::ALL[i % 3];
        let mut parts = SequenceParts {
            speaker: None,
            prompt_text: Some(ids(&mut rng, 6, 50, 1)),
            text: ids(&mut rng, 6, 50, 1),
            prompt_audio: Some(ids(&mut rng, 50, 90, 1)),
            audio: Some(ids(&mut rng, 50, 90, 0)),
        };
        if format != SeqFormat::Seq1 {
            parts.prompt_text = None;
            parts.prompt_audio = None;
        }
        if format == SeqFormat::Seq3 {
            let rows = rng.gen_range(1..4);
            parts.speaker = Some(ConditioningLatents::new(Matrix::zeros(rows, 2), vec![format!("ref{i}")]).map_err(|e| e.to_string())?);
        }
        let train = build_training_sequence(format, &parts, &s).map_err(|e| e.to_string())?;
        let prefix = build_inference_prefix(format, &SequenceParts { audio: None, ..parts.clone() }, &s).map_err(|e| e.to_string())?;
        ensure(train.flattened().starts_with(prefix.flattened()), || format!("input {i}: prefix is not a prefix"))?;
        if format == SeqFormat::Seq3 {
            let prompt_text: Vec<u32> = ids(&mut rng, 200, 300, 1);
            let with_prompt = SequenceParts { prompt_text: Some(prompt_text.clone()), audio: None, ..parts };
            // A SEQ3 prefix either rejects prompt text or leaves it out.
            if let Ok(p) = build_inference_prefix(format, &with_prompt, &s) {
                ensure(!p.flattened().iter().any(|id| prompt_text.contains(id)), || format!("input {i}: prompt text in SEQ3 prefix"))?;
            }
            ensure(!prefix.flattened().iter().any(|id| (200..300).contains(id)), || format!("input {i}: prompt ids in prefix"))?;
        }
    }
    Ok("layouts match for SEQ1/SEQ2/SEQ3; 1000 prefix checks".into())
}

fn c8_interpolation() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut worst: f64 = 0.0;
    for trial in 0..200 {
        let (t, h) = (rng.gen_range(1..40), rng.gen_range(1..12));
        let mut random = || Matrix::new(t, h, (0..t * h).map(|_| rng.sample(StandardNormal)).collect()).expect("shape");
        let (x, y) = (random(), random());
        let (a, b): (f64, f64) = (rng.sample(StandardNormal), rng.sample(StandardNormal));
        let up = |m: &Matrix| -> Result<Matrix, String> {
            Ok(interpolate_latents(&LatentSequence::new(m.clone(), 25).map_err(|e| e.to_string())?, 4).map_err(|e| e.to_string())?.frames)
        };
        let ux = up(&x)?;
        ensure(ux.rows() == 4 * t, || format!("trial {trial}: {} rows for {t} frames", ux.rows()))?;
        for i in 0..t {
            ensure(ux.row(4 * i).iter().zip(x.row(i)).all(|(p, q)| p.to_bits() == q.to_bits()), || format!("trial {trial}: frame {i} altered"))?;
        }
        let combo: Vec<f64> = x.data().iter().zip(y.data()).map(|(p, q)| a * p + b * q).collect();
        let uc = up(&Matrix::new(t, h, combo).expect("shape"))?;
        let uy = up(&y)?;
        for ((c, p), q) in uc.data().iter().zip(ux.data()).zip(uy.data()) {
            worst = worst.max((c - (a * p + b * q)).abs());
        }
    }
    ensure(worst <= 1e-9, || format!("linearity error {worst:e}"))?;
    Ok(format!("200 random matrices, linearity error {worst:.1e}"))
}

fn c9_frame_arithmetic() -> Check {
    let spec = FrameSpec::CODEC;
    ensure(spec.samples_per_token() == 960, || format!("{}", spec.samples_per_token()))?;
    for len in (1..5_000).chain([24_000, 24_001, 1_000_000]) {
        let n = spec.token_count(len);
        let mut covered = 0;
        for i in 0..n {
            let (a, b) = spec.token_window(i);
            ensure(a == covered && b > a, || format!("len {len}: window {i} is [{a}, {b})"))?;
            covered = b.min(len);
        }
        ensure(covered == len, || format!("len {len}: windows cover {covered}"))?;
        ensure(spec.token_window(n - 1).0 < len, || format!("len {len}: last window is empty"))?;
    }
    Ok("960 samples per token; windows tile every length checked".into())
}

fn c10_polyphone_golden() -> Check {
    let input = fixture("table2_polyphone.tsv");
    let (code, out) = ttskit(&["eval", "polyphone", "--input", input.to_str().unwrap()]);
    ensure(code == 0, || format!("exit {code}"))?;
    let golden = std::fs::read_to_string(fixture("table2_report.txt")).map_err(|e| e.to_string())?;
    ensure(out == golden, || format!("report differs:\n{out}"))?;
    Ok("byte-exact: 2500 / 465 18.6% / 437 94.0% / 1.1%".into())
}

fn c11_table3() -> Check {
    let t = run_table(fixture("table3/table.toml")).map_err(|e| e.to_string())?;
    let aishell = t.sets.iter().find(|s| s.name == "aishell1_test").ok_or("aishell1_test missing")?;
    let pct = |v: f64| format!("{:.1}", 100.0 * v);
    let ss = |v: Option<f64>| v.map(|v| format!("{v:.3}")).unwrap_or_default();
    let got = [
        pct(aishell.error_rate),
        ss(aishell.similarity),
        pct(t.average.error_rate.unwrap_or(f64::NAN)),
        ss(t.average.similarity),
    ];
    ensure(got == ["1.3", "0.744", "3.7", "0.776"], || format!("{got:?}"))?;
    Ok(format!("aishell1 CER {} SS {}, AVG WER {} SS {}", got[0], got[1], got[2], got[3]))
}

/// All strings of length ≤ `max` over `{0, 1, 2}`, shortest first.
fn all_strings(max: usize) -> Vec<Vec<u8>> {
    let mut out = vec![vec![]];
    let mut start = 0;
    for _ in 0..max {
        let end = out.len();
        for i in start..end {
            for s in 0..3u8 {
                let mut v = out[i].clone();
                v.push(s);
                out.push(v);
            }
        }
        start = end;
    }
    out
}

fn c12_edit_distance() -> Check {
    const MAX: usize = 8;
    let strings = all_strings(MAX);
    let index: std::collections::HashMap<&[u8], u16> =
        strings.iter().enumerate().map(|(i, s)| (s.as_slice(), i as u16)).collect();
    // Single-edit neighbours, never longer than MAX: an optimal edit script
    // can always do its deletions before its insertions.
    let adj: Vec<Vec<u16>> = strings
        .iter()
        .map(|s| {
            let mut n = Vec::new();
            for i in 0..s.len() {
                let mut d = s.clone();
                d.remove(i);
                n.push(index[d.as_slice()]);
                for c in 0..3u8 {
                    if c != s[i] {
                        let mut r = s.clone();
                        r[i] = c;
                        n.push(index[r.as_slice()]);
                    }
                }
            }
            if s.len() < MAX {
                for i in 0..=s.len() {
                    for c in 0..3u8 {
                        let mut ins = s.clone();
                        ins.insert(i, c);
                        n.push(index[ins.as_slice()]);
                    }
                }
            }
            n.sort_unstable();
            n.dedup();
            n
        })
        .collect();
    let mut dist = vec![u8::MAX; strings.len()];
    let mut queue = VecDeque::new();
    let mut pairs = 0u64;
    for (a, sa) in strings.iter().enumerate() {
        dist.fill(u8::MAX);
        dist[a] = 0;
        queue.push_back(a as u16);
        while let Some(u) = queue.pop_front() {
            let du = dist[u as usize];
            for &v in &adj[u as usize] {
                if dist[v as usize] == u8::MAX {
                    dist[v as usize] = du + 1;
                    queue.push_back(v);
                }
            }
        }
        for (b, sb) in strings.iter().enumerate() {
            let e = edit_distance(sa, sb);
            if e.distance != usize::from(dist[b]) || e.substitutions + e.insertions + e.deletions != e.distance {
                return Err(format!("{sa:?} -> {sb:?}: dp {e:?}, enumeration {}", dist[b]));
            }
            pairs += 1;
        }
    }

    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let word = |rng: &mut ChaCha8Rng| -> Vec<u8> { (0..rng.gen_range(0..12)).map(|_| rng.gen_range(0..3)).collect() };
    for _ in 0..10_000 {
        let (x, y, z) = (word(&mut rng), word(&mut rng), word(&mut rng));
        let d = |p: &[u8], q: &[u8]| edit_distance(p, q).distance;
        ensure(d(&x, &x) == 0, || format!("d(x, x) != 0 for {x:?}"))?;
        ensure((d(&x, &y) == 0) == (x == y), || format!("identity fails for {x:?} {y:?}"))?;
        ensure(d(&x, &y) == d(&y, &x), || format!("asymmetric on {x:?} {y:?}"))?;
        ensure(d(&x, &z) <= d(&x, &y) + d(&y, &z), || format!("triangle fails on {x:?} {y:?} {z:?}"))?;
    }
    Ok(format!("{pairs} pairs match enumeration; metric axioms hold on 1e4 triples"))
}

fn main() {
    let criteria: [(&str, fn() -> Check); 12] = [
        ("table 1 pinyin mix", c1_table1_mix),
        ("mixing statistics", c2_mix_statistics),
        ("FSQ structure", c3_fsq_structure),
        ("VQ oracle equivalence", c4_vq_oracle),
        ("straight-through gradient", c5_gradient),
        ("utilization ordering", c6_utilization_grid),
        ("sequence layouts", c7_sequence_layouts),
        ("interpolation", c8_interpolation),
        ("frame arithmetic", c9_frame_arithmetic),
        ("table 2 polyphone report", c10_polyphone_golden),
        ("table 3 aggregation", c11_table3),
        ("edit-distance oracle", c12_edit_distance),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let t = Instant::now();
        let result = std::panic::catch_unwind(check).unwrap_or_else(|_| Err("panicked".into()));
        match result {
            Ok(detail) => println!("PASS {:>2} {name} ({:.2?}): {detail}", i + 1, t.elapsed()),
            Err(why) => {
                failed += 1;
                println!("FAIL {:>2} {name} ({:.2?}): {why}", i + 1, t.elapsed());
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
