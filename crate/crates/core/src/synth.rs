//! Planted-topic corpus generator used for recovery, coherence and
//! determinism checks.
//!
//! Every topic owns a disjoint vocabulary: a marker token written twice per
//! post, nine core tokens written once per post, a pool of filler tokens
//! and a slice of the bundled affect lexicons. Posts also carry URLs and
//! handles that cleaning must strip.

use std::collections::HashSet;
use std::io::Write;

use chrono::{DateTime, TimeDelta, Utc};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::keywords::TokenPipeline;

const TOPIC_NAMES: [&str; 12] = [
    "alpha", "bravo", "charlie", "delta", "echo", "foxtrot", "golf", "hotel", "india", "juliett", "kilo", "lima",
];
const SYLLABLES: [&str; 20] = [
    "ka", "lo", "mi", "nu", "pe", "ra", "si", "tu", "ve", "zo", "bi", "cu", "da", "fe", "gu", "ho", "ji", "ky", "mo", "ny",
];
pub const CORE_WORDS: usize = 9;
const FILLER_WORDS: usize = 20;
const FILLERS_PER_POST: usize = 4;
const N_AUTHORS: usize = 40;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SyntheticConfig {
    pub n_topics: usize,
    pub docs_per_topic: usize,
    pub seed: u64,
    pub start: DateTime<Utc>,
    /// Length of the sampled period in days.
    pub span_days: i64,
}

impl Default for SyntheticConfig {
    fn default() -> Self {
        Self {
            n_topics: 8,
            docs_per_topic: 500,
            seed: 20_230_801,
            start: DateTime::parse_from_rfc3339("2021-01-01T00:00:00Z")
                .expect("valid literal")
                .with_timezone(&Utc),
            span_days: 900,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SyntheticDoc {
    pub id: String,
    pub timestamp: DateTime<Utc>,
    pub author: String,
    pub text: String,
    /// Planted topic.
    pub topic: usize,
}

/// Marker token of a planted topic.
pub fn marker(topic: usize) -> &'static str {
    TOPIC_NAMES[topic]
}

fn pseudo_word(topic: usize, j: usize) -> String {
    format!("{}{}{}", TOPIC_NAMES[topic], SYLLABLES[j / SYLLABLES.len()], SYLLABLES[j % SYLLABLES.len()])
}

/// Core tokens present in every post of the topic.
pub fn core_words(topic: usize) -> Vec<String> {
    (0..CORE_WORDS).map(|j| pseudo_word(topic, j)).collect()
}

fn filler_words(topic: usize) -> Vec<String> {
    (CORE_WORDS..CORE_WORDS + FILLER_WORDS).map(|j| pseudo_word(topic, j)).collect()
}

/// Lexicon words that survive the token pipeline unchanged, dealt round
/// robin so no two topics share one.
fn affect_pools(n_topics: usize) -> Vec<Vec<String>> {
    let pipeline = TokenPipeline::english();
    let mut words: Vec<String> = include_str!("../data/sentiment_lexicon.tsv")
        .lines()
        .chain(include_str!("../data/emotion_lexicon.tsv").lines())
        .filter_map(|l| l.split('\t').next())
        .map(str::to_string)
        .filter(|w| pipeline.tokenize(w) == [w.clone()])
        .collect::<HashSet<_>>()
        .into_iter()
        .collect();
    words.sort();
    let mut pools = vec![Vec::new(); n_topics];
    for (i, w) in words.into_iter().enumerate() {
        pools[i % n_topics].push(w);
    }
    pools
}

/// Generates `n_topics * docs_per_topic` posts. Output order is by
/// timestamp, ties by id.
///
/// # Panics
/// If `n_topics` is zero or above twelve.
pub fn planted_corpus(cfg: &SyntheticConfig) -> Vec<SyntheticDoc> {
    assert!((1..=TOPIC_NAMES.len()).contains(&cfg.n_topics), "n_topics out of range");
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let pools = affect_pools(cfg.n_topics);
    let span_secs = cfg.span_days * 86_400;
    let mut docs = Vec::with_capacity(cfg.n_topics * cfg.docs_per_topic);
    for t in 0..cfg.n_topics {
        let core = core_words(t);
        let fillers = filler_words(t);
        // A fifth of each topic falls in one burst week.
        let burst_start = rng.gen_range(0..(span_secs - 7 * 86_400).max(1));
        // Topic leader share grows with the topic index.
        let leader_share = 0.2 + 0.06 * t as f64;
        let leader = format!("kol_{}", marker(t));
        for i in 0..cfg.docs_per_topic {
            let offset = if rng.gen_bool(0.2) {
                burst_start + rng.gen_range(0..7 * 86_400)
            } else {
                rng.gen_range(0..span_secs)
            };
            let author = if rng.gen_bool(leader_share) {
                leader.clone()
            } else {
                format!("user{:02}", rng.gen_range(0..N_AUTHORS))
            };
            let mut tokens: Vec<String> = vec![marker(t).to_string(); 2];
            tokens.extend(core.iter().cloned());
            tokens.extend(fillers.choose_multiple(&mut rng, FILLERS_PER_POST).cloned());
            if let Some(w) = pools[t].choose(&mut rng) {
                tokens.push(w.clone());
            }
            tokens.shuffle(&mut rng);
            let mut text = tokens.join(" ");
            match rng.gen_range(0..10) {
                0 => text.push_str(&format!(" https://example.org/{t}/{i}")),
                1 => text = format!("@user{:02} {text}", rng.gen_range(0..N_AUTHORS)),
                2 => text.push_str(" desk@example.org"),
                _ => {}
            }
            docs.push(SyntheticDoc {
                id: format!("s{t}-{i:04}"),
                timestamp: cfg.start + TimeDelta::seconds(offset),
                author,
                text,
                topic: t,
            });
        }
    }
    docs.sort_by(|a, b| a.timestamp.cmp(&b.timestamp).then_with(|| a.id.cmp(&b.id)));
    docs
}

/// One JSON object per line with `id`, `timestamp`, `author`, `text` and
/// the planted `topic`.
pub fn write_jsonl<W: Write>(docs: &[SyntheticDoc], mut out: W) -> std::io::Result<()> {
    for d in docs {
        let line = serde_json::json!({
            "id": d.id,
            "timestamp": d.timestamp.to_rfc3339_opts(chrono::SecondsFormat::Secs, true),
            "author": d.author,
            "text": d.text,
            "topic": d.topic,
        });
        writeln!(out, "{line}")?;
    }
    Ok(())
}

/// Pools every token and re-deals them into documents of the original
/// lengths, destroying co-occurrence structure.
pub fn shuffle_tokens(documents: &[Vec<String>], seed: u64) -> Vec<Vec<String>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut pool: Vec<String> = documents.iter().flatten().cloned().collect();
    pool.shuffle(&mut rng);
    let mut it = pool.into_iter();
    documents.iter().map(|d| it.by_ref().take(d.len()).collect()).collect()
}

/// Fraction of items whose cluster's majority planted label equals their
/// own. Majority ties go to the smallest label.
pub fn cluster_purity(clusters: &[usize], truth: &[usize]) -> f64 {
    assert_eq!(clusters.len(), truth.len());
    let mut counts: std::collections::BTreeMap<usize, std::collections::BTreeMap<usize, usize>> = Default::default();
    for (&c, &t) in clusters.iter().zip(truth) {
        *counts.entry(c).or_default().entry(t).or_default() += 1;
    }
    let majority: usize = counts.values().map(|m| m.values().copied().max().unwrap_or(0)).sum();
    majority as f64 / clusters.len() as f64
}
