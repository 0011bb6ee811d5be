//! Regenerates the evaluation fixtures under `fixtures/`: the polyphone
//! set and the per-utterance results behind the published IndexTTS row.
//!
//! ```text
//! cargo run --example eval_fixtures [OUT_DIR]
//! ```

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use ttskit::eval::{edit_distance, EmbeddingRef, EvalRecord, Language, NormalizationConfig};
use ttskit::rng::substream;
use ttskit::signal::{save_matrix, Matrix};

const SEED: u64 = 20250207;
const EMBED_DIM: usize = 16;

struct SetPlan {
    name: &'static str,
    language: Language,
    utterances: usize,
    units: usize,
    edits: usize,
    similarity: f64,
}

const SETS: [SetPlan; 4] = [
    SetPlan { name: "aishell1_test", language: Language::Zh, utterances: 210, units: 2667, edits: 35, similarity: 0.7440 },
    SetPlan { name: "commonvoice_zh", language: Language::Zh, utterances: 400, units: 5760, edits: 403, similarity: 0.7420 },
    SetPlan { name: "commonvoice_en", language: Language::En, utterances: 200, units: 1800, edits: 95, similarity: 0.7580 },
    SetPlan { name: "librispeech_test_clean", language: Language::En, utterances: 524, units: 9799, edits: 206, similarity: 0.8226 },
];

const ZH_POOL: &str = "我你他她们天气很今明人国学生在有不这来去上下小多说话吃饭水火山风雨花书爱家电脑手机车路走跑想知道时候年月日点钟银超市声音语文字读写听到可以能把被就也又再个些样什么怎哪里那高快慢新旧白黑红眼睛头心情朋友工作开关门口问题";
// never used in references, so every use in a hypothesis is an error
const ZH_FOREIGN: &str = "炫舞谈醉娱鞭慌躁碟叭";

const EN_POOL: &[&str] = &[
    "the", "a", "of", "to", "and", "in", "he", "she", "was", "it", "his", "her", "that", "with", "for",
    "on", "at", "by", "they", "we", "you", "had", "have", "not", "but", "from", "all", "were", "one",
    "there", "when", "would", "which", "their", "said", "been", "so", "no", "into", "them", "could",
    "time", "man", "little", "upon", "more", "old", "day", "long", "house", "great", "before", "way",
    "came", "through", "still", "again", "night", "eyes", "water", "light", "room", "door", "hand",
    "children", "morning", "voice", "world", "street", "river", "garden", "window", "letter", "city",
    "don't", "it's", "mother", "father", "friend", "story", "music", "winter", "summer", "market",
];
const EN_FOREIGN: &[&str] = &["thee", "ax", "ofter", "tu", "ande", "inn", "hee", "shee", "woz", "itt"];

const POLYPHONE_WORDS: &[(char, &str, &str)] = &[
    ('行', "HANG2", "银行"), ('行', "XING2", "行走"), ('长', "ZHANG3", "校长"), ('长', "CHANG2", "长城"),
    ('重', "CHONG2", "重新"), ('重', "ZHONG4", "重要"), ('还', "HUAN2", "还书"), ('还', "HAI2", "还是"),
    ('好', "HAO4", "爱好"), ('好', "HAO3", "好人"), ('乐', "YUE4", "音乐"), ('乐', "LE4", "快乐"),
    ('数', "SHU3", "数一数"), ('数', "SHU4", "数字"), ('都', "DU1", "首都"), ('都', "DOU1", "都是"),
    ('会', "KUAI4", "会计"), ('会', "HUI4", "开会"), ('差', "CHAI1", "出差"), ('差', "CHA4", "差不多"),
    ('调', "DIAO4", "调查"), ('调', "TIAO2", "空调"), ('便', "PIAN2", "便宜"), ('便', "BIAN4", "方便"),
    ('发', "FA4", "头发"), ('发', "FA1", "发现"), ('觉', "JIAO4", "睡觉"), ('觉', "JUE2", "感觉"),
    ('种', "ZHONG4", "种树"), ('种', "ZHONG3", "种子"), ('朝', "CHAO2", "朝代"), ('朝', "ZHAO1", "朝阳"),
    ('藏', "ZANG4", "西藏"), ('藏', "CANG2", "收藏"), ('传', "ZHUAN4", "传记"), ('传', "CHUAN2", "传说"),
    ('假', "JIA4", "放假"), ('假', "JIA3", "真假"), ('空', "KONG4", "空白"), ('空', "KONG1", "天空"),
    ('相', "XIANG4", "照相"), ('相', "XIANG1", "相信"), ('处', "CHU3", "处理"), ('处', "CHU4", "到处"),
    ('当', "DANG4", "上当"), ('当', "DANG1", "当然"), ('降', "XIANG2", "投降"), ('降', "JIANG4", "下降"),
];
const PREFIXES: &[&str] = &["我们", "今天", "他说", "听说", "其实", "明天", "老师说", "大家都知道", "没想到", "据说"];
const SUFFIXES: &[&str] = &["。", "很有意思。", "不太容易。", "是真的吗？", "让人难忘。", "，对吧？"];

/// Lengths averaging `total / n`, spread ±`spread`, summing to `total`.
fn lengths(rng: &mut ChaCha8Rng, n: usize, total: usize, spread: usize) -> Vec<usize> {
    let base = total / n;
    let mut v: Vec<usize> = (0..n).map(|_| base + rng.gen_range(0..=2 * spread) - spread).collect();
    let mut sum: usize = v.iter().sum();
    while sum != total {
        let i = rng.gen_range(0..n);
        if sum < total && v[i] < base + spread {
            v[i] += 1;
            sum += 1;
        } else if sum > total && v[i] > base - spread {
            v[i] -= 1;
            sum -= 1;
        }
    }
    v
}

fn unit_vector(rng: &mut ChaCha8Rng) -> Vec<f64> {
    let v: Vec<f64> = (0..EMBED_DIM).map(|_| StandardNormal.sample(rng)).collect();
    let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    v.into_iter().map(|x| x / n).collect()
}

/// Prompt and generated embeddings with cosine exactly `c` (before f32
/// storage).
fn embedding_pair(rng: &mut ChaCha8Rng, c: f64) -> (Vec<f64>, Vec<f64>) {
    let p = unit_vector(rng);
    let r = unit_vector(rng);
    let d: f64 = p.iter().zip(&r).map(|(a, b)| a * b).sum();
    let mut q: Vec<f64> = r.iter().zip(&p).map(|(x, y)| x - d * y).collect();
    let qn = q.iter().map(|x| x * x).sum::<f64>().sqrt();
    q.iter_mut().for_each(|x| *x /= qn);
    let s = (1.0 - c * c).sqrt();
    let scale_p = rng.gen_range(5.0..15.0);
    let scale_g = rng.gen_range(5.0..15.0);
    let g = p.iter().zip(&q).map(|(a, b)| scale_g * (c * a + s * b)).collect();
    (p.into_iter().map(|x| x * scale_p).collect(), g)
}

fn render(units: &[String], lang: Language, rng: &mut ChaCha8Rng) -> String {
    match lang {
        Language::Zh => {
            let mut s = String::new();
            for (i, u) in units.iter().enumerate() {
                s.push_str(u);
                if i + 1 < units.len() && i % 7 == 6 {
                    s.push('，');
                }
            }
            s.push('。');
            s
        }
        Language::En => {
            let mut words = units.to_vec();
            if let Some(w) = words.first_mut() {
                let mut c = w.chars();
                *w = c.next().map(|f| f.to_uppercase().chain(c).collect()).unwrap_or_default();
            }
            let mut s = words.join(" ");
            s.push(if rng.gen_bool(0.2) { '?' } else { '.' });
            s
        }
    }
}

fn build_set(plan: &SetPlan, dir: &Path, norm: &NormalizationConfig) -> Vec<EvalRecord> {
    let mut rng = substream(SEED, plan.name);
    let spread = match plan.language {
        Language::Zh => 5,
        Language::En => 6,
    };
    let lens = lengths(&mut rng, plan.utterances, plan.units, spread);
    let (pool, foreign): (Vec<String>, Vec<String>) = match plan.language {
        Language::Zh => (ZH_POOL.chars().map(String::from).collect(), ZH_FOREIGN.chars().map(String::from).collect()),
        Language::En => (
            EN_POOL.iter().map(|s| s.to_string()).collect(),
            EN_FOREIGN.iter().map(|s| s.to_string()).collect(),
        ),
    };

    // spread the edit budget over random utterances, at most one edit per
    // reference unit
    let mut slots: Vec<usize> = lens.iter().enumerate().flat_map(|(i, &n)| std::iter::repeat(i).take(n)).collect();
    slots.shuffle(&mut rng);
    let mut edits = vec![0usize; plan.utterances];
    for &u in &slots[..plan.edits] {
        edits[u] += 1;
    }

    let mut sims: Vec<f64> = (0..plan.utterances / 2)
        .flat_map(|_| {
            let d = rng.gen_range(0.0..0.08);
            [plan.similarity + d, plan.similarity - d]
        })
        .collect();
    sims.shuffle(&mut rng);

    let emb_file = format!("{}.emb.idxmt", plan.name);
    let mut emb_rows = Vec::new();
    let mut records = Vec::new();
    let mut total_dist = 0;
    for (i, (&n, &k)) in lens.iter().zip(&edits).enumerate() {
        let reference: Vec<String> = (0..n).map(|_| pool[rng.gen_range(0..pool.len())].clone()).collect();
        let mut hyp = reference.clone();
        // substitutions at distinct positions; some become insertions or
        // deletions, never both in one utterance
        let mut pos: Vec<usize> = (0..n).collect();
        pos.shuffle(&mut rng);
        let mut pos = pos[..k].to_vec();
        pos.sort_unstable_by(|a, b| b.cmp(a));
        let style = rng.gen_range(0..3);
        for (j, &p) in pos.iter().enumerate() {
            let f = foreign[rng.gen_range(0..foreign.len())].clone();
            match (style, j % 2) {
                (1, 1) => hyp.insert(p, f),
                (2, 1) => {
                    hyp.remove(p);
                }
                _ => hyp[p] = f,
            }
        }
        let ref_text = render(&reference, plan.language, &mut rng);
        let hyp_text = render(&hyp, plan.language, &mut rng);
        let ru = norm.units(&ref_text, plan.language);
        let hu = norm.units(&hyp_text, plan.language);
        assert_eq!(ru, reference, "rendering must round-trip through normalization");
        let dist = edit_distance(&ru, &hu).distance;
        assert_eq!(dist, k, "{} utterance {i}", plan.name);
        total_dist += dist;

        let (p, g) = embedding_pair(&mut rng, sims[i]);
        emb_rows.push(p);
        emb_rows.push(g);
        records.push(EvalRecord {
            utterance_id: format!("{}-{:04}", plan.name, i + 1),
            language: plan.language,
            reference_text: ref_text,
            hypothesis_text: hyp_text,
            prompt_embedding: Some(EmbeddingRef::File(format!("{emb_file}#{}", 2 * i))),
            generated_embedding: Some(EmbeddingRef::File(format!("{emb_file}#{}", 2 * i + 1))),
        });
    }
    assert_eq!(total_dist, plan.edits);
    save_matrix(dir.join(&emb_file), &Matrix::from_rows(&emb_rows).unwrap(), 0).unwrap();
    records
}

fn polyphone_tsv() -> String {
    let mut rng = substream(SEED, "polyphone");
    let total = 2500;
    let mut order: Vec<usize> = (0..total).collect();
    order.shuffle(&mut rng);
    let mut a1_fail = vec![false; total];
    let mut a2_fix = vec![false; total];
    for (rank, &i) in order[..465].iter().enumerate() {
        a1_fail[i] = true;
        a2_fix[i] = rank < 437;
    }
    let mut out = String::from("# sentence_id\ttext\ttarget_char\tintended_pinyin\ta1\ta2\n");
    for i in 0..total {
        let (c, reading, word) = POLYPHONE_WORDS[rng.gen_range(0..POLYPHONE_WORDS.len())];
        let pre = PREFIXES[rng.gen_range(0..PREFIXES.len())];
        let suf = SUFFIXES[rng.gen_range(0..SUFFIXES.len())];
        let a2 = if a1_fail[i] { u8::from(a2_fix[i]).to_string() } else { "-".into() };
        writeln!(out, "poly-{:04}\t{pre}{word}{suf}\t{c}\t{reading}\t{}\t{a2}", i + 1, u8::from(!a1_fail[i])).unwrap();
    }
    out
}

fn main() {
    let dir = std::env::args()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(|| Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures"));
    let t3 = dir.join("table3");
    std::fs::create_dir_all(&t3).unwrap();
    std::fs::write(dir.join("table2_polyphone.tsv"), polyphone_tsv()).unwrap();

    let norm = NormalizationConfig::default();
    std::fs::write(t3.join("normalization.toml"), norm.to_toml()).unwrap();
    let mut config = String::from("average = \"pooled\"\nnormalization = \"normalization.toml\"\n");
    for plan in &SETS {
        let records = build_set(plan, &t3, &norm);
        ttskit::eval::write_records(t3.join(format!("{}.jsonl", plan.name)), &records).unwrap();
        let lang = match plan.language {
            Language::Zh => "zh",
            Language::En => "en",
        };
        write!(config, "\n[[set]]\nname = \"{}\"\nlanguage = \"{lang}\"\nrecords = \"{}.jsonl\"\n", plan.name, plan.name).unwrap();
    }
    std::fs::write(t3.join("table.toml"), config).unwrap();
    println!("fixtures written to {}", dir.display());
}
