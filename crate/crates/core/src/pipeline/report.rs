use std::path::{Path, PathBuf};

use super::artifacts as art;
use super::svg;
use super::StageError;
use crate::affect::Emotion;

/// Plain data behind the static charts.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ReportInputs {
    pub bin_labels: Vec<String>,
    /// `(topic, counts per bin)`.
    pub dynamics: Vec<(usize, Vec<u64>)>,
    /// `(topic, sentiment score)`.
    pub topic_sentiment: Vec<(usize, f64)>,
    /// `(topic, mean optimism, mean pessimism)`.
    pub topic_optimism: Vec<(usize, f64, f64)>,
    /// `(cluster, mean optimism, mean pessimism)`.
    pub cluster_optimism: Vec<(usize, f64, f64)>,
    /// Per-document scores, one vector per emotion in [`Emotion::ALL`] order.
    pub emotion_scores: Vec<Vec<f64>>,
    pub dominance: Vec<(Emotion, f64)>,
    /// `(topic, x, y, size)`.
    pub map: Vec<(usize, f64, f64, usize)>,
}

/// Writes the seven charts into `out_dir` and returns their paths.
pub fn emit_reports(inputs: &ReportInputs, out_dir: &Path) -> Result<Vec<PathBuf>, StageError> {
    if inputs.topic_sentiment.is_empty() {
        return Err(StageError::EmptyResults);
    }
    std::fs::create_dir_all(out_dir)?;
    let mut written = Vec::new();
    let mut emit = |name: &str, body: String| -> Result<(), StageError> {
        let p = out_dir.join(name);
        std::fs::write(&p, body)?;
        written.push(p);
        Ok(())
    };

    let series: Vec<(String, Vec<f64>)> = inputs
        .dynamics
        .iter()
        .map(|(t, c)| (format!("topic {t}"), c.iter().map(|&v| v as f64).collect()))
        .collect();
    emit(art::SVG_DYNAMICS, svg::line_chart("Topic volume per time bin", &inputs.bin_labels, &series))?;

    let labels: Vec<String> = inputs.topic_sentiment.iter().map(|(t, _)| t.to_string()).collect();
    let values = inputs.topic_sentiment.iter().map(|(_, s)| *s).collect();
    emit(
        art::SVG_SENTIMENT,
        svg::bar_chart("Sentiment score by topic", &labels, &[("sentiment".into(), values)]),
    )?;

    let panels: Vec<(String, Vec<f64>)> = Emotion::ALL
        .iter()
        .zip(&inputs.emotion_scores)
        .map(|(e, v)| (e.name().to_string(), v.clone()))
        .collect();
    emit(art::SVG_EMOTION_HISTOGRAMS, svg::histogram_grid("Emotion score distributions", &panels, 20))?;

    let dyad_bars = |rows: &[(usize, f64, f64)], title: &str| {
        let labels: Vec<String> = rows.iter().map(|r| r.0.to_string()).collect();
        svg::bar_chart(
            title,
            &labels,
            &[
                ("optimism".into(), rows.iter().map(|r| r.1).collect()),
                ("pessimism".into(), rows.iter().map(|r| r.2).collect()),
            ],
        )
    };
    emit(art::SVG_OPTIMISM_TOPICS, dyad_bars(&inputs.topic_optimism, "Optimism and pessimism by topic"))?;
    emit(
        art::SVG_OPTIMISM_CLUSTERS,
        dyad_bars(&inputs.cluster_optimism, "Optimism and pessimism by cluster"),
    )?;

    let labels: Vec<String> = inputs.dominance.iter().map(|(e, _)| e.name().to_string()).collect();
    let shares = inputs.dominance.iter().map(|(_, s)| *s).collect();
    emit(
        art::SVG_DOMINANT_EMOTIONS,
        svg::bar_chart("Share of topics dominated by each emotion", &labels, &[("share".into(), shares)]),
    )?;

    let points: Vec<(String, f64, f64, f64)> =
        inputs.map.iter().map(|&(t, x, y, s)| (t.to_string(), x, y, s as f64)).collect();
    emit(art::SVG_MAP, svg::scatter("Intertopic distance map", &points))?;
    Ok(written)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn inputs() -> ReportInputs {
        ReportInputs {
            bin_labels: vec!["a".into(), "b".into()],
            dynamics: (0..3).map(|t| (t, vec![1, t as u64])).collect(),
            topic_sentiment: vec![(0, 0.1), (1, -0.2), (2, 0.0)],
            topic_optimism: vec![(0, 0.5, 0.4), (1, 0.3, 0.2), (2, 0.1, 0.1)],
            cluster_optimism: vec![(0, 0.5, 0.4), (1, 0.2, 0.2)],
            emotion_scores: vec![vec![0.1, 0.2]; 9],
            dominance: vec![(Emotion::Joy, 1.0)],
            map: vec![(0, 0.0, 1.0, 3), (1, 1.0, 0.0, 2), (2, -1.0, -1.0, 1)],
        }
    }

    #[test]
    fn three_topics_give_three_polylines() {
        let dir = tempfile::tempdir().unwrap();
        let files = emit_reports(&inputs(), dir.path()).unwrap();
        assert_eq!(files.len(), 7);
        let dyn_svg = std::fs::read_to_string(dir.path().join(art::SVG_DYNAMICS)).unwrap();
        assert_eq!(dyn_svg.matches("<polyline").count(), 3);
    }

    #[test]
    fn empty_topics_are_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let empty = ReportInputs::default();
        assert!(matches!(emit_reports(&empty, dir.path()), Err(StageError::EmptyResults)));
    }
}
