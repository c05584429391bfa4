use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use super::{TopicAssignment, TopicError};
use crate::corpus::Corpus;
use crate::keywords::TokenPipeline;

/// Streaming term-by-class counts. Documents can be folded in batch by
/// batch; weights are computed from the running totals.
#[derive(Debug, Clone, Default)]
pub struct TermStats {
    vocab: Vec<String>,
    index: HashMap<String, usize>,
    /// Per class: term index to count.
    tf: Vec<HashMap<usize, u64>>,
    /// Global term frequency.
    ft: Vec<u64>,
    words_per_class: Vec<u64>,
}

impl TermStats {
    pub fn new(n_classes: usize) -> Self {
        Self {
            tf: vec![HashMap::new(); n_classes],
            words_per_class: vec![0; n_classes],
            ..Default::default()
        }
    }

    pub fn n_classes(&self) -> usize {
        self.tf.len()
    }

    pub fn add_document(&mut self, class: usize, tokens: &[String]) {
        for t in tokens {
            let id = match self.index.get(t) {
                Some(&id) => id,
                None => {
                    let id = self.vocab.len();
                    self.vocab.push(t.clone());
                    self.index.insert(t.clone(), id);
                    self.ft.push(0);
                    id
                }
            };
            *self.tf[class].entry(id).or_insert(0) += 1;
            self.ft[id] += 1;
            self.words_per_class[class] += 1;
        }
    }

    pub fn tf(&self, term: &str, class: usize) -> u64 {
        self.index
            .get(term)
            .and_then(|id| self.tf[class].get(id).copied())
            .unwrap_or(0)
    }

    pub fn global_frequency(&self, term: &str) -> u64 {
        self.index.get(term).map_or(0, |&id| self.ft[id])
    }

    /// Average number of words per class.
    pub fn average_class_words(&self) -> f64 {
        let total: u64 = self.words_per_class.iter().sum();
        total as f64 / self.n_classes().max(1) as f64
    }

    /// `tf(t,c) * ln(1 + A / f(t))`.
    pub fn weight(&self, term: &str, class: usize) -> f64 {
        let ft = self.global_frequency(term);
        if ft == 0 {
            return 0.0;
        }
        self.tf(term, class) as f64 * (1.0 + self.average_class_words() / ft as f64).ln()
    }

    /// Terms of `class` by weight descending, ties lexicographic.
    pub fn ranked_terms(&self, class: usize, top_n: usize) -> Vec<(String, f64)> {
        let a = self.average_class_words();
        let mut terms: Vec<(String, f64)> = self.tf[class]
            .iter()
            .map(|(&id, &n)| (self.vocab[id].clone(), n as f64 * (1.0 + a / self.ft[id] as f64).ln()))
            .collect();
        terms.sort_by(|x, y| y.1.total_cmp(&x.1).then_with(|| x.0.cmp(&y.0)));
        terms.truncate(top_n);
        terms
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TopicSummary {
    pub topic_id: usize,
    pub size: usize,
    pub top_terms: Vec<(String, f64)>,
    pub coherence: Option<f64>,
}

/// Class-based TF-IDF over the documents of each topic.
pub fn ctfidf_terms(
    corpus: &Corpus,
    assignment: &TopicAssignment,
    pipeline: &TokenPipeline,
    top_n: usize,
) -> Result<Vec<TopicSummary>, TopicError> {
    if assignment.labels.len() != corpus.len() {
        return Err(TopicError::DimError(format!(
            "{} labels for {} documents",
            assignment.labels.len(),
            corpus.len()
        )));
    }
    let sizes = assignment.sizes();
    if let Some(empty) = sizes.iter().position(|&s| s == 0) {
        return Err(TopicError::EmptyTopic(empty));
    }
    let mut stats = TermStats::new(assignment.k);
    for (r, &label) in corpus.records().iter().zip(&assignment.labels) {
        stats.add_document(label, &pipeline.tokenize(&r.clean_text));
    }
    Ok((0..assignment.k)
        .map(|t| TopicSummary {
            topic_id: t,
            size: sizes[t],
            top_terms: stats.ranked_terms(t, top_n),
            coherence: None,
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{parse_corpus, FieldSchema};

    fn corpus(texts: &[&str]) -> Corpus {
        let lines: Vec<String> = texts
            .iter()
            .enumerate()
            .map(|(i, t)| {
                serde_json::json!({"id": i.to_string(), "timestamp": format!("2022-01-01T00:00:{:02}Z", i), "author": "a", "text": t})
                    .to_string()
            })
            .collect();
        parse_corpus(lines.join("\n").as_bytes(), &FieldSchema::default()).unwrap().0
    }

    fn tokens(s: &str) -> Vec<String> {
        s.split(' ').map(String::from).collect()
    }

    #[test]
    fn two_class_formula() {
        let mut s = TermStats::new(2);
        s.add_document(0, &tokens("ai ai ml"));
        s.add_document(1, &tokens("farm farm cow"));
        assert_eq!(s.average_class_words(), 3.0);
        let w = s.weight("ai", 0);
        assert!((w - 2.0 * 2.5f64.ln()).abs() < 1e-12);
        assert!((w - 1.8326).abs() < 5e-5);
        assert_eq!(s.ranked_terms(0, 1)[0].0, "ai");
        assert_eq!(s.ranked_terms(1, 1)[0].0, "farm");
        assert_eq!(s.weight("ai", 1), 0.0);
    }

    #[test]
    fn uniform_term_has_equal_weights() {
        let mut s = TermStats::new(3);
        for c in 0..3 {
            s.add_document(c, &tokens("shared shared"));
            s.add_document(c, &tokens(["x", "y", "z"][c]));
        }
        let w: Vec<f64> = (0..3).map(|c| s.weight("shared", c)).collect();
        assert_eq!(w[0], w[1]);
        assert_eq!(w[1], w[2]);
    }

    #[test]
    fn summaries_from_corpus() {
        let c = corpus(&["ai ai ml", "farm farm cow"]);
        let a = TopicAssignment::new(vec![0, 1], 2).unwrap();
        let s = ctfidf_terms(&c, &a, &TokenPipeline::default(), 2).unwrap();
        assert_eq!(s[0].top_terms[0].0, "ai");
        assert_eq!(s[1].top_terms.len(), 2);
        assert_eq!(s[1].size, 1);

        let a = TopicAssignment::new(vec![0, 0], 3).unwrap();
        assert_eq!(ctfidf_terms(&c, &a, &TokenPipeline::default(), 2).unwrap_err(), TopicError::EmptyTopic(1));
    }

    #[test]
    fn exclusive_term_is_zero_elsewhere() {
        let c = corpus(&["alpha beta", "beta gamma", "delta beta"]);
        let a = TopicAssignment::new(vec![0, 1, 2], 3).unwrap();
        let s = ctfidf_terms(&c, &a, &TokenPipeline::default(), 10).unwrap();
        let w = |t: usize, term: &str| s[t].top_terms.iter().find(|(x, _)| x == term).map_or(0.0, |p| p.1);
        assert!(w(0, "alpha") > 0.0);
        assert_eq!(w(1, "alpha"), 0.0);
        assert_eq!(w(2, "alpha"), 0.0);
    }
}
