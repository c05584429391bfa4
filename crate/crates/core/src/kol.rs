//! Author volumes, per-topic author shares, topic leaders and concentration.

use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::Corpus;
use crate::topics::TopicAssignment;

#[derive(Debug, Error, PartialEq)]
pub enum KolError {
    #[error("top_k must be at least 1")]
    InvalidTopK,
    #[error("threshold {0} outside (0, 1)")]
    InvalidThreshold(f64),
    #[error("no volume to measure")]
    EmptyVolume,
    #[error("{labels} topic labels for {docs} documents")]
    LengthMismatch { labels: usize, docs: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Leader {
    pub author: String,
    pub count: u64,
    pub share: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShareRow {
    pub topic: usize,
    pub author: String,
    pub count: u64,
    pub share: f64,
}

/// Per-author and per-topic volume breakdown.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AuthorStats {
    /// Counts descending, ties by author name.
    pub volumes: Vec<(String, u64)>,
    /// `topic_counts[topic][author]`.
    pub topic_counts: Vec<BTreeMap<String, u64>>,
    pub topic_sizes: Vec<u64>,
    /// `None` for empty topics.
    pub leaders: Vec<Option<Leader>>,
    /// Number of topics where the author has at least `min_count` tweets.
    pub breadth: BTreeMap<String, usize>,
    pub min_count: u64,
}

impl AuthorStats {
    pub fn share(&self, topic: usize, author: &str) -> f64 {
        let size = self.topic_sizes[topic];
        if size == 0 {
            return 0.0;
        }
        self.topic_counts[topic].get(author).copied().unwrap_or(0) as f64 / size as f64
    }

    /// All nonzero `(topic, author)` shares, topic-major, author order.
    pub fn share_rows(&self) -> Vec<ShareRow> {
        self.topic_counts
            .iter()
            .enumerate()
            .flat_map(|(topic, counts)| {
                let size = self.topic_sizes[topic] as f64;
                counts.iter().map(move |(a, &c)| ShareRow {
                    topic,
                    author: a.clone(),
                    count: c,
                    share: c as f64 / size,
                })
            })
            .collect()
    }
}

fn ranked(counts: HashMap<&str, u64>) -> Vec<(String, u64)> {
    let mut v: Vec<(String, u64)> = counts.into_iter().map(|(a, c)| (a.to_string(), c)).collect();
    v.sort_by(|x, y| y.1.cmp(&x.1).then_with(|| x.0.cmp(&y.0)));
    v
}

/// Tweet count per author, descending, ties lexicographic.
pub fn author_volumes(corpus: &Corpus) -> Vec<(String, u64)> {
    let mut counts: HashMap<&str, u64> = HashMap::new();
    for r in corpus.records() {
        *counts.entry(r.author.as_str()).or_default() += 1;
    }
    ranked(counts)
}

/// Shares with "active" meaning at least one tweet in the topic.
pub fn topic_shares(corpus: &Corpus, assignment: &TopicAssignment) -> Result<AuthorStats, KolError> {
    topic_shares_with_min(corpus, assignment, 1)
}

pub fn topic_shares_with_min(
    corpus: &Corpus,
    assignment: &TopicAssignment,
    min_count: u64,
) -> Result<AuthorStats, KolError> {
    if assignment.labels.len() != corpus.len() {
        return Err(KolError::LengthMismatch {
            labels: assignment.labels.len(),
            docs: corpus.len(),
        });
    }
    let mut topic_counts = vec![BTreeMap::<String, u64>::new(); assignment.k];
    for (r, &t) in corpus.records().iter().zip(&assignment.labels) {
        *topic_counts[t].entry(r.author.clone()).or_default() += 1;
    }
    let topic_sizes: Vec<u64> = topic_counts.iter().map(|m| m.values().sum()).collect();
    let leaders = topic_counts
        .iter()
        .zip(&topic_sizes)
        .map(|(counts, &size)| {
            // BTreeMap order makes the first maximum the lexicographically smallest.
            let mut best: Option<(&String, u64)> = None;
            for (a, &c) in counts {
                if best.is_none_or(|(_, bc)| c > bc) {
                    best = Some((a, c));
                }
            }
            best.map(|(a, c)| Leader {
                author: a.clone(),
                count: c,
                share: c as f64 / size as f64,
            })
        })
        .collect();
    let mut breadth = BTreeMap::new();
    for counts in &topic_counts {
        for (a, &c) in counts {
            if c >= min_count.max(1) {
                *breadth.entry(a.clone()).or_insert(0) += 1;
            }
        }
    }
    Ok(AuthorStats {
        volumes: author_volumes(corpus),
        topic_counts,
        topic_sizes,
        leaders,
        breadth,
        min_count: min_count.max(1),
    })
}

/// Fraction of total volume from the `top_k` largest volumes. `top_k`
/// beyond the number of authors covers all of them.
pub fn concentration(volumes: &[u64], top_k: usize) -> Result<f64, KolError> {
    if top_k == 0 {
        return Err(KolError::InvalidTopK);
    }
    let total: u64 = volumes.iter().sum();
    if total == 0 {
        return Err(KolError::EmptyVolume);
    }
    let mut sorted = volumes.to_vec();
    sorted.sort_unstable_by(|a, b| b.cmp(a));
    let top: u64 = sorted.iter().take(top_k).sum();
    Ok(top as f64 / total as f64)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DominanceCensus {
    pub threshold: f64,
    pub topics: Vec<usize>,
    pub count: usize,
}

fn check_threshold(threshold: f64) -> Result<(), KolError> {
    if threshold > 0.0 && threshold < 1.0 {
        Ok(())
    } else {
        Err(KolError::InvalidThreshold(threshold))
    }
}

/// Topics whose single leader holds more than `threshold` of the tweets.
pub fn dominance_census(stats: &AuthorStats, threshold: f64) -> Result<DominanceCensus, KolError> {
    check_threshold(threshold)?;
    let topics: Vec<usize> = stats
        .leaders
        .iter()
        .enumerate()
        .filter(|(_, l)| l.as_ref().is_some_and(|l| l.share > threshold))
        .map(|(t, _)| t)
        .collect();
    Ok(DominanceCensus {
        threshold,
        count: topics.len(),
        topics,
    })
}

/// Topics where the corpus-level top `top_k` authors together hold more
/// than `threshold` of the tweets.
pub fn cumulative_dominance_census(
    stats: &AuthorStats,
    top_k: usize,
    threshold: f64,
) -> Result<DominanceCensus, KolError> {
    check_threshold(threshold)?;
    if top_k == 0 {
        return Err(KolError::InvalidTopK);
    }
    let kols: Vec<&str> = stats.volumes.iter().take(top_k).map(|(a, _)| a.as_str()).collect();
    let topics: Vec<usize> = (0..stats.topic_counts.len())
        .filter(|&t| kols.iter().map(|a| stats.share(t, a)).sum::<f64>() > threshold)
        .collect();
    Ok(DominanceCensus {
        threshold,
        count: topics.len(),
        topics,
    })
}
