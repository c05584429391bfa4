//! Ingestion of line-delimited tweet records: parsing, cleaning, ordering and
//! deduplication.

use std::collections::{BTreeMap, HashSet};
use std::io::{BufRead, Write};
use std::sync::OnceLock;

use chrono::{DateTime, NaiveDateTime, SecondsFormat, Utc};
use log::warn;
use regex::Regex;
use serde::{Deserialize, Serialize};
use serde_json::Value;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("i/o error reading corpus: {0}")]
    Io(#[from] std::io::Error),
    #[error("corpus rejected: {malformed} of {total} lines are malformed")]
    CorpusRejected { malformed: usize, total: usize },
    #[error("corpus contains no valid records")]
    EmptyCorpus,
}

/// Field names used to pull a record out of one JSON line.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct FieldSchema {
    pub id: String,
    pub timestamp: String,
    pub author: String,
    pub text: String,
}

impl Default for FieldSchema {
    fn default() -> Self {
        Self {
            id: "id".into(),
            timestamp: "timestamp".into(),
            author: "author".into(),
            text: "text".into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TweetRecord {
    pub id: String,
    pub timestamp: DateTime<Utc>,
    /// Lowercased handle.
    pub author: String,
    pub raw_text: String,
    pub clean_text: String,
}

/// Immutable, timestamp-ordered collection of records.
#[derive(Debug, Clone)]
pub struct Corpus {
    records: Vec<TweetRecord>,
    author_index: BTreeMap<String, Vec<usize>>,
    time_span: (DateTime<Utc>, DateTime<Utc>),
}

/// What happened to the input lines during parsing.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ParseReport {
    pub lines: usize,
    pub malformed: usize,
    pub duplicate_ids: usize,
    pub emptied_by_cleaning: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DedupKey {
    Text,
    TimestampText,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct DedupReport {
    pub key: DedupKey,
    pub total_records: usize,
    pub unique_texts: usize,
    pub unique_pairs: usize,
    pub dropped: usize,
}

impl Corpus {
    /// Builds a corpus, stable-sorting records by timestamp.
    pub fn from_records(mut records: Vec<TweetRecord>) -> Result<Self, CorpusError> {
        if records.is_empty() {
            return Err(CorpusError::EmptyCorpus);
        }
        records.sort_by_key(|r| r.timestamp);
        let mut author_index: BTreeMap<String, Vec<usize>> = BTreeMap::new();
        for (i, r) in records.iter().enumerate() {
            author_index.entry(r.author.clone()).or_default().push(i);
        }
        let time_span = (records[0].timestamp, records[records.len() - 1].timestamp);
        Ok(Self {
            records,
            author_index,
            time_span,
        })
    }

    pub fn records(&self) -> &[TweetRecord] {
        &self.records
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn author_index(&self) -> &BTreeMap<String, Vec<usize>> {
        &self.author_index
    }

    pub fn time_span(&self) -> (DateTime<Utc>, DateTime<Utc>) {
        self.time_span
    }

    pub fn ids(&self) -> impl Iterator<Item = &str> {
        self.records.iter().map(|r| r.id.as_str())
    }

    /// Keeps records for which `keep` returns true, preserving order.
    pub fn retain<F: FnMut(&TweetRecord) -> bool>(&self, mut keep: F) -> Result<Self, CorpusError> {
        let records = self.records.iter().filter(|r| keep(r)).cloned().collect();
        Self::from_records(records)
    }

    /// Writes the corpus back out as JSON lines with the default schema.
    pub fn write_jsonl<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        for r in &self.records {
            let line = serde_json::json!({
                "id": r.id,
                "timestamp": r.timestamp.to_rfc3339_opts(SecondsFormat::AutoSi, true),
                "author": r.author,
                "text": r.raw_text,
            });
            writeln!(out, "{line}")?;
        }
        Ok(())
    }
}

fn url_re() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(r"(?i)(?:https?://|\bwww\.)\S*").unwrap())
}

fn email_re() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(r"[\w.%+\-]+@[\w\-]+(?:\.[\w\-]+)*\.\w+").unwrap())
}

fn handle_re() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(r"@\w{1,15}\b").unwrap())
}

fn clean_once(raw: &str) -> String {
    let s = url_re().replace_all(raw, " ");
    let s = email_re().replace_all(&s, " ");
    let s = handle_re().replace_all(&s, " ");
    s.split_whitespace().collect::<Vec<_>>().join(" ")
}

/// Removes URLs, then e-mail addresses, then user handles, and collapses
/// whitespace. Hashtags are kept verbatim.
///
/// Removals can splice neighbouring fragments into a new match, so the passes
/// are repeated until the text stops changing. Each pass either shrinks the
/// text or leaves it unchanged, which bounds the loop.
pub fn clean_text(raw: &str) -> String {
    let mut current = clean_once(raw);
    loop {
        let next = clean_once(&current);
        if next == current {
            return current;
        }
        current = next;
    }
}

fn parse_timestamp(s: &str) -> Option<DateTime<Utc>> {
    if let Ok(t) = DateTime::parse_from_rfc3339(s) {
        return Some(t.with_timezone(&Utc));
    }
    for fmt in ["%Y-%m-%dT%H:%M:%S%.f", "%Y-%m-%d %H:%M:%S%.f", "%Y-%m-%d %H:%M:%S%#z"] {
        if let Ok(t) = NaiveDateTime::parse_from_str(s, fmt) {
            return Some(t.and_utc());
        }
        if let Ok(t) = DateTime::parse_from_str(s, fmt) {
            return Some(t.with_timezone(&Utc));
        }
    }
    None
}

fn field_str<'a>(obj: &'a serde_json::Map<String, Value>, name: &str) -> Option<&'a str> {
    match obj.get(name)? {
        Value::String(s) => Some(s.as_str()),
        _ => None,
    }
}

fn parse_line(line: &str, schema: &FieldSchema) -> Option<TweetRecord> {
    let value: Value = serde_json::from_str(line).ok()?;
    let obj = value.as_object()?;
    // Numeric ids are common in exported tweet dumps.
    let id = match obj.get(&schema.id)? {
        Value::String(s) => s.clone(),
        Value::Number(n) => n.to_string(),
        _ => return None,
    };
    let timestamp = parse_timestamp(field_str(obj, &schema.timestamp)?)?;
    let author = field_str(obj, &schema.author)?.trim().to_lowercase();
    let raw_text = field_str(obj, &schema.text)?.to_string();
    if id.is_empty() || author.is_empty() {
        return None;
    }
    let clean_text = clean_text(&raw_text);
    Some(TweetRecord {
        id,
        timestamp,
        author,
        raw_text,
        clean_text,
    })
}

/// Parses one record per non-blank line.
///
/// Malformed lines are skipped and counted; more than half malformed rejects
/// the whole input. Repeated ids keep their first occurrence. Records whose
/// text is empty after cleaning are dropped.
pub fn parse_corpus<R: BufRead>(
    input: R,
    schema: &FieldSchema,
) -> Result<(Corpus, ParseReport), CorpusError> {
    let mut lines = Vec::new();
    for line in input.lines() {
        let line = line?;
        if !line.trim().is_empty() {
            lines.push(line);
        }
    }
    let parsed: Vec<Option<TweetRecord>> = {
        use rayon::prelude::*;
        lines.par_iter().map(|l| parse_line(l, schema)).collect()
    };

    let mut report = ParseReport {
        lines: lines.len(),
        ..Default::default()
    };
    let mut seen = HashSet::new();
    let mut records = Vec::with_capacity(parsed.len());
    for rec in parsed {
        let Some(rec) = rec else {
            report.malformed += 1;
            continue;
        };
        if !seen.insert(rec.id.clone()) {
            report.duplicate_ids += 1;
            continue;
        }
        if rec.clean_text.is_empty() {
            report.emptied_by_cleaning += 1;
            continue;
        }
        records.push(rec);
    }
    if report.malformed * 2 > report.lines {
        return Err(CorpusError::CorpusRejected {
            malformed: report.malformed,
            total: report.lines,
        });
    }
    if report.malformed > 0 {
        warn!("skipped {} malformed lines", report.malformed);
    }
    if report.duplicate_ids > 0 {
        warn!("skipped {} records with repeated ids", report.duplicate_ids);
    }
    if report.emptied_by_cleaning > 0 {
        warn!("dropped {} records emptied by cleaning", report.emptied_by_cleaning);
    }
    Ok((Corpus::from_records(records)?, report))
}

/// Drops repeated texts (or timestamp+text pairs), keeping the earliest
/// record. Both key cardinalities are reported whichever key is applied.
/// Keys use the raw text, as collected.
pub fn dedup(corpus: &Corpus, key: DedupKey) -> (Corpus, DedupReport) {
    let mut texts = HashSet::new();
    let mut pairs = HashSet::new();
    let mut keep = Vec::with_capacity(corpus.len());
    for r in corpus.records() {
        let new_text = texts.insert(r.raw_text.as_str());
        let new_pair = pairs.insert((r.timestamp, r.raw_text.as_str()));
        let fresh = match key {
            DedupKey::Text => new_text,
            DedupKey::TimestampText => new_pair,
        };
        keep.push(fresh);
    }
    let records: Vec<TweetRecord> = corpus
        .records()
        .iter()
        .zip(&keep)
        .filter(|(_, k)| **k)
        .map(|(r, _)| r.clone())
        .collect();
    let report = DedupReport {
        key,
        total_records: corpus.len(),
        unique_texts: texts.len(),
        unique_pairs: pairs.len(),
        dropped: corpus.len() - records.len(),
    };
    // A non-empty corpus always keeps its first record.
    let out = Corpus::from_records(records).expect("dedup keeps at least one record");
    (out, report)
}
