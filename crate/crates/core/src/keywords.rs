//! Keyword extraction: token normalisation and frequency rankings.

use std::collections::{HashMap, HashSet};
use std::io::BufRead;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::Corpus;
use crate::text::word_tokens;
use crate::topics::TopicAssignment;

const DEFAULT_STOPWORDS: &str = include_str!("../data/stopwords.txt");
const DEFAULT_LEMMAS: &str = include_str!("../data/lemmas.tsv");

#[derive(Debug, Error)]
pub enum KeywordError {
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("lemma map line {line}: expected `surface<TAB>lemma`")]
    BadLemmaLine { line: usize },
    #[error("lemma `{0}` maps onward to `{1}`; lemmas must be fixed points")]
    NonFixedLemma(String, String),
    #[error("unknown topic {0}")]
    UnknownTopic(usize),
    #[error("assignment covers {labels} documents, corpus has {docs}")]
    LengthMismatch { labels: usize, docs: usize },
}

pub fn bundled_stopwords() -> Vec<String> {
    parse_stopwords(DEFAULT_STOPWORDS.as_bytes()).expect("bundled stopwords")
}

pub fn bundled_lemmas() -> HashMap<String, String> {
    parse_lemma_map(DEFAULT_LEMMAS.as_bytes()).expect("bundled lemmas")
}

/// Stopword set plus surface-to-lemma table.
#[derive(Debug, Clone, Default)]
pub struct TokenPipeline {
    stopwords: HashSet<String>,
    lemma_map: HashMap<String, String>,
}

impl TokenPipeline {
    pub fn new(
        stopwords: impl IntoIterator<Item = String>,
        lemma_map: HashMap<String, String>,
    ) -> Result<Self, KeywordError> {
        for lemma in lemma_map.values() {
            if let Some(next) = lemma_map.get(lemma) {
                if next != lemma {
                    return Err(KeywordError::NonFixedLemma(lemma.clone(), next.clone()));
                }
            }
        }
        Ok(Self {
            stopwords: stopwords.into_iter().map(|s| s.to_lowercase()).collect(),
            lemma_map: lemma_map
                .into_iter()
                .map(|(k, v)| (k.to_lowercase(), v.to_lowercase()))
                .collect(),
        })
    }

    /// The bundled English stopword list and lemma table.
    pub fn english() -> Self {
        Self::new(bundled_stopwords(), bundled_lemmas()).expect("bundled lemma table is consistent")
    }

    pub fn is_stopword(&self, w: &str) -> bool {
        self.stopwords.contains(w)
    }

    /// Lowercases, splits on non-word characters (dropping a hashtag's `#`),
    /// lemmatises, and removes stopwords and single-character tokens.
    pub fn tokenize(&self, text: &str) -> Vec<String> {
        word_tokens(text)
            .into_iter()
            .map(|w| match self.lemma_map.get(&w) {
                Some(l) => l.clone(),
                None => w,
            })
            .filter(|w| w.chars().count() >= 2 && !self.stopwords.contains(w))
            .collect()
    }
}

/// One word per line; blank lines and `#` comments ignored.
pub fn parse_stopwords<R: BufRead>(input: R) -> Result<Vec<String>, KeywordError> {
    let mut out = Vec::new();
    for line in input.lines() {
        let line = line?;
        let w = line.trim();
        if !w.is_empty() && !w.starts_with('#') {
            out.push(w.to_lowercase());
        }
    }
    Ok(out)
}

/// `surface<TAB>lemma` per line.
pub fn parse_lemma_map<R: BufRead>(input: R) -> Result<HashMap<String, String>, KeywordError> {
    let mut out = HashMap::new();
    for (i, line) in input.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let mut parts = line.split('\t');
        match (parts.next(), parts.next(), parts.next()) {
            (Some(s), Some(l), None) if !s.trim().is_empty() && !l.trim().is_empty() => {
                out.insert(s.trim().to_lowercase(), l.trim().to_lowercase());
            }
            _ => return Err(KeywordError::BadLemmaLine { line: i + 1 }),
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RankingScope {
    Global,
    Topic(usize),
}

/// Keywords by descending count; equal counts in lexicographic order.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct KeywordRanking {
    pub scope: RankingScope,
    pub entries: Vec<(String, u64)>,
}

fn count_docs<'a, I: IntoIterator<Item = &'a str>>(docs: I, pipeline: &TokenPipeline) -> HashMap<String, u64> {
    let mut counts = HashMap::new();
    for doc in docs {
        for t in pipeline.tokenize(doc) {
            *counts.entry(t).or_insert(0) += 1;
        }
    }
    counts
}

pub(crate) fn rank_counts(counts: HashMap<String, u64>, top_n: usize) -> Vec<(String, u64)> {
    let mut entries: Vec<(String, u64)> = counts.into_iter().collect();
    entries.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
    entries.truncate(top_n);
    entries
}

pub fn global_keywords(corpus: &Corpus, pipeline: &TokenPipeline, top_n: usize) -> KeywordRanking {
    let counts = count_docs(corpus.records().iter().map(|r| r.clean_text.as_str()), pipeline);
    KeywordRanking {
        scope: RankingScope::Global,
        entries: rank_counts(counts, top_n),
    }
}

pub fn topic_keywords(
    corpus: &Corpus,
    assignment: &TopicAssignment,
    topic_id: usize,
    pipeline: &TokenPipeline,
    top_n: usize,
) -> Result<KeywordRanking, KeywordError> {
    if assignment.labels.len() != corpus.len() {
        return Err(KeywordError::LengthMismatch {
            labels: assignment.labels.len(),
            docs: corpus.len(),
        });
    }
    if topic_id >= assignment.k {
        return Err(KeywordError::UnknownTopic(topic_id));
    }
    let docs = corpus
        .records()
        .iter()
        .zip(&assignment.labels)
        .filter(|(_, &l)| l == topic_id)
        .map(|(r, _)| r.clean_text.as_str());
    Ok(KeywordRanking {
        scope: RankingScope::Topic(topic_id),
        entries: rank_counts(count_docs(docs, pipeline), top_n),
    })
}
