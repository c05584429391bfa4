use std::collections::{BTreeSet, HashMap};

use super::{TopicError, TopicSummary};

const EPSILON: f64 = 1e-12;

/// Boolean sliding-window document frequencies for a fixed set of terms.
///
/// A document shorter than the window counts as a single window; a longer
/// one contributes `len - window + 1` windows.
#[derive(Debug, Clone)]
pub struct NpmiScorer {
    index: HashMap<String, usize>,
    single: Vec<u64>,
    joint: HashMap<(usize, usize), u64>,
    windows: u64,
}

impl NpmiScorer {
    pub fn new<'a, D, T>(documents: D, terms: T, window: usize) -> Result<Self, TopicError>
    where
        D: IntoIterator<Item = &'a [String]>,
        T: IntoIterator<Item = &'a str>,
    {
        if window < 2 {
            return Err(TopicError::InvalidParameter(format!("window must be >= 2, got {window}")));
        }
        let mut index = HashMap::new();
        for t in terms {
            let next = index.len();
            index.entry(t.to_string()).or_insert(next);
        }
        let mut single = vec![0u64; index.len()];
        let mut joint = HashMap::new();
        let mut windows = 0u64;
        let mut present = BTreeSet::new();
        for doc in documents {
            let ids: Vec<Option<usize>> = doc.iter().map(|t| index.get(t).copied()).collect();
            let spans = if ids.len() <= window { 1 } else { ids.len() - window + 1 };
            for s in 0..spans {
                windows += 1;
                present.clear();
                present.extend(ids[s..(s + window).min(ids.len())].iter().flatten().copied());
                for &a in &present {
                    single[a] += 1;
                }
                let p: Vec<usize> = present.iter().copied().collect();
                for (i, &a) in p.iter().enumerate() {
                    for &b in &p[i + 1..] {
                        *joint.entry((a, b)).or_insert(0) += 1;
                    }
                }
            }
        }
        Ok(Self {
            index,
            single,
            joint,
            windows,
        })
    }

    pub fn windows(&self) -> u64 {
        self.windows
    }

    /// Normalised PMI of two terms, `log(p_ij / (p_i p_j)) / -log(p_ij)`
    /// with `p_ij` smoothed by `1e-12`.
    pub fn npmi(&self, a: &str, b: &str) -> f64 {
        let (Some(&ia), Some(&ib)) = (self.index.get(a), self.index.get(b)) else {
            return -1.0;
        };
        let n = self.windows.max(1) as f64;
        let pa = self.single[ia] as f64 / n;
        let pb = self.single[ib] as f64 / n;
        if pa == 0.0 || pb == 0.0 {
            return -1.0;
        }
        let key = if ia < ib { (ia, ib) } else { (ib, ia) };
        let joint = if ia == ib {
            self.single[ia]
        } else {
            self.joint.get(&key).copied().unwrap_or(0)
        };
        let pab = joint as f64 / n + EPSILON;
        let denom = -pab.ln();
        if denom <= 0.0 {
            // Both terms occur in every window.
            return 1.0;
        }
        ((pab / (pa * pb)).ln() / denom).clamp(-1.0, 1.0)
    }

    /// Mean pairwise NPMI over `terms`.
    pub fn topic_score(&self, topic_id: usize, terms: &[&str]) -> Result<f64, TopicError> {
        if terms.len() < 2 {
            return Err(TopicError::CoherenceUndefined(topic_id));
        }
        let mut sum = 0.0;
        let mut pairs = 0usize;
        for i in 0..terms.len() {
            for j in (i + 1)..terms.len() {
                sum += self.npmi(terms[i], terms[j]);
                pairs += 1;
            }
        }
        Ok(sum / pairs as f64)
    }
}

/// Per-topic coherence: mean NPMI over all pairs of each topic's first
/// `top_m` terms. `documents` are the tokenised corpus documents.
pub fn coherence_npmi(
    summaries: &[TopicSummary],
    documents: &[Vec<String>],
    window: usize,
    top_m: usize,
) -> Result<Vec<f64>, TopicError> {
    if top_m < 2 {
        return Err(TopicError::InvalidParameter(format!("top_m must be >= 2, got {top_m}")));
    }
    let terms = summaries
        .iter()
        .flat_map(|s| s.top_terms.iter().take(top_m).map(|(t, _)| t.as_str()));
    let scorer = NpmiScorer::new(documents.iter().map(Vec::as_slice), terms, window)?;
    summaries
        .iter()
        .map(|s| {
            let terms: Vec<&str> = s.top_terms.iter().take(top_m).map(|(t, _)| t.as_str()).collect();
            scorer.topic_score(s.topic_id, &terms)
        })
        .collect()
}

/// Mean coherence over the `n` largest topics (ties by topic id) among
/// those with a defined score.
pub fn mean_coherence_of_largest(summaries: &[TopicSummary], n: usize) -> Option<f64> {
    let mut scored: Vec<&TopicSummary> = summaries.iter().filter(|s| s.coherence.is_some()).collect();
    scored.sort_by(|a, b| b.size.cmp(&a.size).then(a.topic_id.cmp(&b.topic_id)));
    scored.truncate(n);
    if scored.is_empty() {
        return None;
    }
    Some(scored.iter().filter_map(|s| s.coherence).sum::<f64>() / scored.len() as f64)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn docs(texts: &[&str]) -> Vec<Vec<String>> {
        texts.iter().map(|t| t.split(' ').map(String::from).collect()).collect()
    }

    fn summary(id: usize, terms: &[&str]) -> TopicSummary {
        TopicSummary {
            topic_id: id,
            size: 1,
            top_terms: terms.iter().map(|t| (t.to_string(), 1.0)).collect(),
            coherence: None,
        }
    }

    #[test]
    fn planted_terms_are_coherent() {
        let mut texts = Vec::new();
        for _ in 0..20 {
            texts.push("apple banana cherry");
            texts.push("xray yankee zulu");
        }
        let d = docs(&texts);
        let s = [summary(0, &["apple", "banana", "cherry"]), summary(1, &["xray", "yankee", "zulu"])];
        let c = coherence_npmi(&s, &d, 10, 3).unwrap();
        assert!(c.iter().all(|&v| v >= 0.9), "{c:?}");
    }

    #[test]
    fn never_cooccurring_terms() {
        let d = docs(&["aa", "bb", "aa", "bb"]);
        let scorer = NpmiScorer::new(d.iter().map(Vec::as_slice), ["aa", "bb"], 2).unwrap();
        // Closed form: (ln eps - ln(1/4)) / -ln eps.
        let want = (EPSILON.ln() - 0.25f64.ln()) / -EPSILON.ln();
        let got = scorer.npmi("aa", "bb");
        assert!((got - want).abs() < 1e-9);
        assert!(got <= -0.9);
    }

    #[test]
    fn independent_terms_score_zero() {
        // p(a) = p(b) = 1/2 and p(ab) = 1/4.
        let d = docs(&["aa bb", "aa cc", "dd bb", "dd cc"]);
        let scorer = NpmiScorer::new(d.iter().map(Vec::as_slice), ["aa", "bb"], 5).unwrap();
        assert!(scorer.npmi("aa", "bb").abs() < 0.05);
    }

    #[test]
    fn sliding_windows_are_counted() {
        let d = docs(&["aa xx xx bb"]);
        let scorer = NpmiScorer::new(d.iter().map(Vec::as_slice), ["aa", "bb"], 2).unwrap();
        assert_eq!(scorer.windows(), 3);
        assert!(scorer.npmi("aa", "bb") < -0.9);
    }

    #[test]
    fn undefined_for_single_term() {
        let d = docs(&["aa bb"]);
        let s = [summary(4, &["aa"])];
        assert_eq!(coherence_npmi(&s, &d, 5, 5).unwrap_err(), TopicError::CoherenceUndefined(4));
    }

    #[test]
    fn largest_topics_mean() {
        let mut a = summary(0, &["x", "y"]);
        a.size = 10;
        a.coherence = Some(0.5);
        let mut b = summary(1, &["x", "y"]);
        b.size = 5;
        b.coherence = Some(0.1);
        let mut c = summary(2, &["x", "y"]);
        c.size = 7;
        c.coherence = Some(0.3);
        assert_eq!(mean_coherence_of_largest(&[a, b, c], 2), Some(0.4));
    }
}
