//! Artifact file names and the CSV/JSON helpers used to write and reload
//! them between stages.

use std::fmt::Display;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::de::DeserializeOwned;
use serde::Serialize;

use super::StageError;

pub const CORPUS: &str = "corpus.jsonl";
pub const DEDUP_REPORT: &str = "dedup_report.json";
pub const EMBEDDINGS: &str = "embeddings.bin";
pub const MODEL: &str = "model.json";
pub const ASSIGNMENTS: &str = "assignments.csv";
pub const TOPICS: &str = "topics.json";
pub const DENDROGRAM: &str = "dendrogram.json";
pub const DYNAMICS: &str = "dynamics.csv";
pub const MAP: &str = "map.csv";
pub const KEYWORDS: &str = "keywords.csv";
pub const TOPIC_KEYWORDS: &str = "topic_keywords.csv";
pub const DOCUMENT_AFFECT: &str = "document_affect.csv";
pub const TOPIC_AFFECT: &str = "topic_affect.csv";
pub const CLUSTER_AFFECT: &str = "cluster_affect.csv";
pub const EMOTION_DOMINANCE: &str = "emotion_dominance.csv";
pub const STATS: &str = "stats.json";
pub const AUTHORS: &str = "authors.csv";
pub const SHARES: &str = "shares.csv";
pub const LEADERS: &str = "leaders.csv";
pub const CENSUS: &str = "census.json";
pub const RUN_SUMMARY: &str = "run_summary.json";
pub const MANIFEST: &str = "manifest.json";
pub const TIMINGS: &str = "timings.json";

pub const SVG_DYNAMICS: &str = "dynamics.svg";
pub const SVG_SENTIMENT: &str = "sentiment_by_topic.svg";
pub const SVG_EMOTION_HISTOGRAMS: &str = "emotion_histograms.svg";
pub const SVG_OPTIMISM_TOPICS: &str = "optimism_pessimism_topics.svg";
pub const SVG_OPTIMISM_CLUSTERS: &str = "optimism_pessimism_clusters.svg";
pub const SVG_DOMINANT_EMOTIONS: &str = "dominant_emotions.svg";
pub const SVG_MAP: &str = "intertopic_map.svg";

/// The twelve tables every complete run must produce.
pub const DECLARED: [&str; 12] = [
    DEDUP_REPORT,
    ASSIGNMENTS,
    TOPICS,
    DENDROGRAM,
    DYNAMICS,
    MAP,
    KEYWORDS,
    TOPIC_AFFECT,
    AUTHORS,
    SHARES,
    LEADERS,
    CENSUS,
];

/// A header plus string rows; numbers are written with `Display`, which
/// round-trips `f64` exactly.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Table {
    pub headers: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new<S: Into<String>>(headers: impl IntoIterator<Item = S>) -> Self {
        Self {
            headers: headers.into_iter().map(Into::into).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.headers.len());
        self.rows.push(row);
    }

    pub fn write(&self, path: &Path) -> Result<(), StageError> {
        let mut w = csv::Writer::from_path(path)?;
        w.write_record(&self.headers)?;
        for r in &self.rows {
            w.write_record(r)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn read(path: &Path) -> Result<Self, StageError> {
        let mut r = csv::Reader::from_path(path).map_err(|e| missing_or(path, e.into()))?;
        let headers = r.headers()?.iter().map(str::to_string).collect();
        let rows = r
            .records()
            .map(|rec| rec.map(|rec| rec.iter().map(str::to_string).collect()))
            .collect::<Result<_, _>>()?;
        Ok(Self { headers, rows })
    }

    pub fn col(&self, name: &str) -> Result<usize, StageError> {
        self.headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| StageError::Malformed(format!("missing column `{name}`")))
    }

    pub fn parse<T: FromStr>(&self, row: usize, col: usize) -> Result<T, StageError>
    where
        T::Err: Display,
    {
        let raw = &self.rows[row][col];
        raw.parse().map_err(|e: T::Err| {
            StageError::Malformed(format!("row {} column `{}`: `{raw}`: {e}", row + 1, self.headers[col]))
        })
    }

    /// Parses a whole column.
    pub fn column<T: FromStr>(&self, name: &str) -> Result<Vec<T>, StageError>
    where
        T::Err: Display,
    {
        let c = self.col(name)?;
        (0..self.rows.len()).map(|r| self.parse(r, c)).collect()
    }
}

fn missing_or(path: &Path, e: StageError) -> StageError {
    if path.exists() {
        e
    } else {
        StageError::MissingArtifact(path.to_path_buf())
    }
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), StageError> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    std::fs::write(path, text)?;
    Ok(())
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T, StageError> {
    let text = std::fs::read_to_string(path).map_err(|e| missing_or(path, e.into()))?;
    Ok(serde_json::from_str(&text)?)
}

pub fn open(path: &Path) -> Result<std::io::BufReader<std::fs::File>, StageError> {
    let f = std::fs::File::open(path).map_err(|e| missing_or(path, e.into()))?;
    Ok(std::io::BufReader::new(f))
}

pub fn join(dir: &Path, name: &str) -> PathBuf {
    dir.join(name)
}
