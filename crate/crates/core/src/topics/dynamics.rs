use chrono::{DateTime, TimeDelta, Utc};
use serde::{Deserialize, Serialize};

use super::{TopicAssignment, TopicError};
use crate::corpus::Corpus;

/// Per-topic counts over uniform time bins.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimeSeries {
    /// `n_bins + 1` edges; bin `i` is `[edges[i], edges[i+1])`.
    pub bin_edges: Vec<DateTime<Utc>>,
    /// `counts[topic][bin]`.
    pub counts: Vec<Vec<u64>>,
    /// Bins whose count exceeds mean + 2 population standard deviations.
    pub peaks: Vec<Vec<usize>>,
}

/// Indices where `series[i] > mean + 2 * sd` (population sd).
pub fn peak_bins(series: &[u64]) -> Vec<usize> {
    if series.is_empty() {
        return Vec::new();
    }
    let n = series.len() as f64;
    let mean = series.iter().map(|&c| c as f64).sum::<f64>() / n;
    let var = series.iter().map(|&c| (c as f64 - mean).powi(2)).sum::<f64>() / n;
    let threshold = mean + 2.0 * var.sqrt();
    series
        .iter()
        .enumerate()
        .filter(|(_, &c)| c as f64 > threshold)
        .map(|(i, _)| i)
        .collect()
}

/// Bins tweets per topic from the first corpus timestamp onward; the last
/// bin contains the latest timestamp.
pub fn topic_dynamics(
    assignment: &TopicAssignment,
    corpus: &Corpus,
    bin: TimeDelta,
) -> Result<TimeSeries, TopicError> {
    let bin_ms = bin.num_milliseconds();
    if bin_ms <= 0 {
        return Err(TopicError::InvalidParameter("bin duration must be positive".into()));
    }
    if assignment.labels.len() != corpus.len() {
        return Err(TopicError::DimError(format!(
            "{} labels for {} documents",
            assignment.labels.len(),
            corpus.len()
        )));
    }
    let (start, end) = corpus.time_span();
    let n_bins = ((end - start).num_milliseconds() / bin_ms) as usize + 1;
    let bin_edges = (0..=n_bins).map(|i| start + bin * i as i32).collect();
    let mut counts = vec![vec![0u64; n_bins]; assignment.k];
    for (r, &label) in corpus.records().iter().zip(&assignment.labels) {
        let idx = ((r.timestamp - start).num_milliseconds() / bin_ms) as usize;
        counts[label][idx] += 1;
    }
    let peaks = counts.iter().map(|s| peak_bins(s)).collect();
    Ok(TimeSeries {
        bin_edges,
        counts,
        peaks,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{parse_corpus, FieldSchema};

    #[test]
    fn spike_series() {
        assert_eq!(peak_bins(&[1, 1, 1, 1, 20, 1, 1, 1]), vec![4]);
        assert!(peak_bins(&[3, 3, 3, 3]).is_empty());
    }

    #[test]
    fn point_mass_week() {
        // Topic 1 spreads over ten weeks so the span has ten weekly bins;
        // topic 0 puts all ten tweets in week 3.
        let base = chrono::DateTime::parse_from_rfc3339("2022-01-01T00:00:00Z").unwrap();
        let mut lines = Vec::new();
        for w in 0..10 {
            let t = (base + TimeDelta::weeks(w)).to_rfc3339();
            lines.push(serde_json::json!({"id": format!("b{w}"), "timestamp": t, "author": "a", "text": "x"}));
        }
        for i in 0..10 {
            let t = format!("2022-01-{:02}T12:00:00Z", 22 + i % 5);
            lines.push(serde_json::json!({"id": format!("p{i}"), "timestamp": t, "author": "a", "text": "y"}));
        }
        let text: Vec<String> = lines.iter().map(|l| l.to_string()).collect();
        let corpus = parse_corpus(text.join("\n").as_bytes(), &FieldSchema::default()).unwrap().0;
        let labels = corpus.records().iter().map(|r| usize::from(!r.id.starts_with('p'))).collect();
        let a = TopicAssignment::new(labels, 2).unwrap();
        let ts = topic_dynamics(&a, &corpus, TimeDelta::days(7)).unwrap();
        assert_eq!(ts.counts[0].len(), 10);
        assert_eq!(ts.bin_edges.len(), 11);
        assert_eq!(ts.counts[0][3], 10);
        assert_eq!(ts.counts[0].iter().sum::<u64>(), 10);
        assert_eq!(ts.peaks[0], vec![3]);
        assert!(ts.peaks[1].is_empty());
        assert_eq!(ts.counts[1], vec![1; 10]);
    }
}
