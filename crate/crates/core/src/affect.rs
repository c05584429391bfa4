//! Sentiment labels, primary emotion scores, anticipatory dyads and their
//! per-topic aggregation.

use std::collections::HashMap;
use std::fmt;
use std::io::{BufRead, Read};
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::Corpus;
use crate::text::word_tokens;
use crate::topics::TopicAssignment;

const DEFAULT_SENTIMENT_LEXICON: &str = include_str!("../data/sentiment_lexicon.tsv");
const DEFAULT_EMOTION_LEXICON: &str = include_str!("../data/emotion_lexicon.tsv");

#[derive(Debug, Error)]
pub enum AffectError {
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
    #[error("no sentiment label for document {0}")]
    MissingLabel(String),
    #[error("invalid sentiment label `{0}`")]
    InvalidLabel(String),
    #[error("no emotion scores for document {0}")]
    MissingEmotion(String),
    #[error("emotion row {line}: {reason}")]
    BadEmotionRow { line: usize, reason: String },
    #[error("lexicon line {line}: {reason}")]
    BadLexiconLine { line: usize, reason: String },
    #[error("unknown emotion `{0}`")]
    UnknownEmotion(String),
    #[error("emotion score {value} for {emotion} is outside [0, 1]")]
    ScoreOutOfRange { emotion: Emotion, value: f64 },
    #[error("sentiment score undefined for zero documents")]
    UndefinedScore,
    #[error("topic {0} has no documents")]
    EmptyTopic(usize),
    #[error("{what}: expected {expected} entries, got {got}")]
    LengthMismatch { what: &'static str, expected: usize, got: usize },
}

/// The nine primary emotions kept for analysis, in tie-break order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Emotion {
    Sadness,
    Disgust,
    Anger,
    Fear,
    Anticipation,
    Surprise,
    Joy,
    Love,
    Trust,
}

impl Emotion {
    pub const ALL: [Emotion; 9] = [
        Emotion::Sadness,
        Emotion::Disgust,
        Emotion::Anger,
        Emotion::Fear,
        Emotion::Anticipation,
        Emotion::Surprise,
        Emotion::Joy,
        Emotion::Love,
        Emotion::Trust,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Emotion::Sadness => "sadness",
            Emotion::Disgust => "disgust",
            Emotion::Anger => "anger",
            Emotion::Fear => "fear",
            Emotion::Anticipation => "anticipation",
            Emotion::Surprise => "surprise",
            Emotion::Joy => "joy",
            Emotion::Love => "love",
            Emotion::Trust => "trust",
        }
    }

    #[inline]
    pub fn index(self) -> usize {
        self as usize
    }
}

impl fmt::Display for Emotion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Emotion {
    type Err = AffectError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim().to_lowercase();
        Emotion::ALL
            .into_iter()
            .find(|e| e.name() == s)
            .ok_or(AffectError::UnknownEmotion(s))
    }
}

/// Emotions the upstream classifier emits but the analysis discards.
const REJECTED_EMOTIONS: [&str; 2] = ["optimism", "pessimism"];

/// Scores for the nine primary emotions, each finite and in `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EmotionVector([f64; 9]);

impl EmotionVector {
    pub fn new(scores: [f64; 9]) -> Result<Self, AffectError> {
        for (e, &v) in Emotion::ALL.iter().zip(&scores) {
            if !v.is_finite() || !(0.0..=1.0).contains(&v) {
                return Err(AffectError::ScoreOutOfRange { emotion: *e, value: v });
            }
        }
        Ok(Self(scores))
    }

    pub fn zero() -> Self {
        Self([0.0; 9])
    }

    pub fn from_pairs(pairs: &[(Emotion, f64)]) -> Result<Self, AffectError> {
        let mut s = [0.0; 9];
        for &(e, v) in pairs {
            s[e.index()] = v;
        }
        Self::new(s)
    }

    #[inline]
    pub fn get(&self, e: Emotion) -> f64 {
        self.0[e.index()]
    }

    pub fn scores(&self) -> &[f64; 9] {
        &self.0
    }

    /// Argmax; ties resolve to the earliest emotion in [`Emotion::ALL`].
    pub fn dominant(&self) -> Emotion {
        let mut best = 0;
        for i in 1..9 {
            if self.0[i] > self.0[best] {
                best = i;
            }
        }
        Emotion::ALL[best]
    }
}

/// Anticipatory compounds of one emotion vector. Only constructible via
/// [`compose_dyads`], so the defining sums always hold.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DyadScores {
    hope: f64,
    anxiety: f64,
    optimism: f64,
    pessimism: f64,
}

impl DyadScores {
    pub fn hope(&self) -> f64 {
        self.hope
    }
    pub fn anxiety(&self) -> f64 {
        self.anxiety
    }
    pub fn optimism(&self) -> f64 {
        self.optimism
    }
    pub fn pessimism(&self) -> f64 {
        self.pessimism
    }

    pub fn as_array(&self) -> [f64; 4] {
        [self.hope, self.anxiety, self.optimism, self.pessimism]
    }
}

/// hope = anticipation + trust, anxiety = anticipation + fear,
/// optimism = anticipation + joy, pessimism = anticipation + sadness.
pub fn compose_dyads(e: &EmotionVector) -> DyadScores {
    let ant = e.get(Emotion::Anticipation);
    DyadScores {
        hope: ant + e.get(Emotion::Trust),
        anxiety: ant + e.get(Emotion::Fear),
        optimism: ant + e.get(Emotion::Joy),
        pessimism: ant + e.get(Emotion::Sadness),
    }
}

/// Aggregated (mean or median) dyad values.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DyadStats {
    pub hope: f64,
    pub anxiety: f64,
    pub optimism: f64,
    pub pessimism: f64,
}

impl DyadStats {
    pub const NAMES: [&'static str; 4] = ["hope", "anxiety", "optimism", "pessimism"];

    fn from_array(a: [f64; 4]) -> Self {
        Self {
            hope: a[0],
            anxiety: a[1],
            optimism: a[2],
            pessimism: a[3],
        }
    }

    pub fn as_array(&self) -> [f64; 4] {
        [self.hope, self.anxiety, self.optimism, self.pessimism]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SentimentLabel {
    Pos,
    Neu,
    Neg,
}

impl SentimentLabel {
    pub fn as_str(self) -> &'static str {
        match self {
            SentimentLabel::Pos => "pos",
            SentimentLabel::Neu => "neu",
            SentimentLabel::Neg => "neg",
        }
    }
}

impl FromStr for SentimentLabel {
    type Err = AffectError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_lowercase().as_str() {
            "pos" | "positive" => Ok(SentimentLabel::Pos),
            "neu" | "neutral" => Ok(SentimentLabel::Neu),
            "neg" | "negative" => Ok(SentimentLabel::Neg),
            _ => Err(AffectError::InvalidLabel(s.to_string())),
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SentimentCounts {
    pub n_pos: u64,
    pub n_neu: u64,
    pub n_neg: u64,
}

impl SentimentCounts {
    pub fn from_labels<'a, I: IntoIterator<Item = &'a SentimentLabel>>(labels: I) -> Self {
        let mut c = Self::default();
        for l in labels {
            match l {
                SentimentLabel::Pos => c.n_pos += 1,
                SentimentLabel::Neu => c.n_neu += 1,
                SentimentLabel::Neg => c.n_neg += 1,
            }
        }
        c
    }

    pub fn total(&self) -> u64 {
        self.n_pos + self.n_neu + self.n_neg
    }
}

/// `(N+ - N-) / (N- + N0 + N+)`.
pub fn sentiment_score(counts: SentimentCounts) -> Result<f64, AffectError> {
    let total = counts.total();
    if total == 0 {
        return Err(AffectError::UndefinedScore);
    }
    Ok((counts.n_pos as f64 - counts.n_neg as f64) / total as f64)
}

/// Word polarity table.
#[derive(Debug, Clone, Default)]
pub struct SentimentLexicon(HashMap<String, i32>);

impl SentimentLexicon {
    pub fn from_pairs<I: IntoIterator<Item = (String, i32)>>(pairs: I) -> Self {
        Self(pairs.into_iter().map(|(w, p)| (w.to_lowercase(), p.signum())).collect())
    }

    /// `word<TAB>polarity` where polarity is `positive`/`pos`/`+`/`1` or
    /// `negative`/`neg`/`-`/`-1`.
    pub fn parse<R: BufRead>(input: R) -> Result<Self, AffectError> {
        let mut map = HashMap::new();
        for (i, line) in input.lines().enumerate() {
            let line = line?;
            if line.trim().is_empty() || line.starts_with('#') {
                continue;
            }
            let (word, pol) = line.split_once('\t').ok_or(AffectError::BadLexiconLine {
                line: i + 1,
                reason: "expected word<TAB>polarity".into(),
            })?;
            let p = match pol.trim().to_lowercase().as_str() {
                "positive" | "pos" | "+" | "1" | "+1" => 1,
                "negative" | "neg" | "-" | "-1" => -1,
                other => {
                    return Err(AffectError::BadLexiconLine {
                        line: i + 1,
                        reason: format!("unknown polarity `{other}`"),
                    })
                }
            };
            map.insert(word.trim().to_lowercase(), p);
        }
        Ok(Self(map))
    }

    pub fn bundled() -> Self {
        Self::parse(DEFAULT_SENTIMENT_LEXICON.as_bytes()).expect("bundled sentiment lexicon")
    }

    /// Sign of positive minus negative word hits; zero is neutral.
    pub fn label(&self, text: &str) -> SentimentLabel {
        let balance: i64 = word_tokens(text)
            .iter()
            .map(|w| i64::from(self.0.get(w).copied().unwrap_or(0)))
            .sum();
        match balance.signum() {
            1 => SentimentLabel::Pos,
            -1 => SentimentLabel::Neg,
            _ => SentimentLabel::Neu,
        }
    }
}

/// Word to emotion table; a word may carry several emotions.
#[derive(Debug, Clone, Default)]
pub struct EmotionLexicon(HashMap<String, Vec<Emotion>>);

impl EmotionLexicon {
    pub fn from_pairs<I: IntoIterator<Item = (String, Emotion)>>(pairs: I) -> Self {
        let mut map: HashMap<String, Vec<Emotion>> = HashMap::new();
        for (w, e) in pairs {
            let v = map.entry(w.to_lowercase()).or_default();
            if !v.contains(&e) {
                v.push(e);
            }
        }
        Self(map)
    }

    /// `word<TAB>emotion` per line, emotion one of the nine primary names.
    pub fn parse<R: BufRead>(input: R) -> Result<Self, AffectError> {
        let mut pairs = Vec::new();
        for (i, line) in input.lines().enumerate() {
            let line = line?;
            if line.trim().is_empty() || line.starts_with('#') {
                continue;
            }
            let (word, emo) = line.split_once('\t').ok_or(AffectError::BadLexiconLine {
                line: i + 1,
                reason: "expected word<TAB>emotion".into(),
            })?;
            let e = emo.parse::<Emotion>().map_err(|_| AffectError::BadLexiconLine {
                line: i + 1,
                reason: format!("unknown emotion `{}`", emo.trim()),
            })?;
            pairs.push((word.trim().to_string(), e));
        }
        Ok(Self::from_pairs(pairs))
    }

    pub fn bundled() -> Self {
        Self::parse(DEFAULT_EMOTION_LEXICON.as_bytes()).expect("bundled emotion lexicon")
    }

    /// Per emotion, matched words over all tokens, clipped to `[0, 1]`.
    pub fn score(&self, text: &str) -> EmotionVector {
        let tokens = word_tokens(text);
        if tokens.is_empty() {
            return EmotionVector::zero();
        }
        let mut hits = [0u64; 9];
        for t in &tokens {
            if let Some(es) = self.0.get(t) {
                for e in es {
                    hits[e.index()] += 1;
                }
            }
        }
        let n = tokens.len() as f64;
        EmotionVector(hits.map(|h| (h as f64 / n).clamp(0.0, 1.0)))
    }
}

pub enum SentimentProvider {
    Imported(HashMap<String, SentimentLabel>),
    Lexicon(SentimentLexicon),
}

pub enum EmotionProvider {
    Imported(HashMap<String, EmotionVector>),
    Lexicon(EmotionLexicon),
}

/// Reads `id,label` rows. A leading header row is skipped.
pub fn read_sentiment_labels<R: Read>(input: R) -> Result<HashMap<String, SentimentLabel>, AffectError> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(false).trim(csv::Trim::All).from_reader(input);
    let mut out = HashMap::new();
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let (Some(id), Some(label)) = (rec.get(0), rec.get(1)) else {
            return Err(AffectError::InvalidLabel(format!("row {} has fewer than two fields", i + 1)));
        };
        if i == 0 && id.eq_ignore_ascii_case("id") && label.eq_ignore_ascii_case("label") {
            continue;
        }
        out.insert(id.to_string(), label.parse()?);
    }
    Ok(out)
}

/// Reads a header-led CSV with an `id` column and one column per emotion.
/// The nine primary emotions are required; `optimism` and `pessimism` are
/// accepted and discarded.
pub fn read_emotion_scores<R: Read>(input: R) -> Result<HashMap<String, EmotionVector>, AffectError> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(input);
    let headers = rdr.headers()?.clone();
    let mut id_col = None;
    let mut cols: [Option<usize>; 9] = [None; 9];
    for (i, h) in headers.iter().enumerate() {
        let h = h.to_lowercase();
        if h == "id" {
            id_col = Some(i);
        } else if let Ok(e) = h.parse::<Emotion>() {
            cols[e.index()] = Some(i);
        } else if !REJECTED_EMOTIONS.contains(&h.as_str()) {
            return Err(AffectError::BadEmotionRow {
                line: 1,
                reason: format!("unexpected column `{h}`"),
            });
        }
    }
    let id_col = id_col.ok_or(AffectError::BadEmotionRow {
        line: 1,
        reason: "missing id column".into(),
    })?;
    if let Some(missing) = cols.iter().position(Option::is_none) {
        return Err(AffectError::BadEmotionRow {
            line: 1,
            reason: format!("missing column `{}`", Emotion::ALL[missing]),
        });
    }
    let mut out = HashMap::new();
    for (i, rec) in rdr.records().enumerate() {
        let line = i + 2;
        let rec = rec.map_err(|e| AffectError::BadEmotionRow {
            line,
            reason: e.to_string(),
        })?;
        if rec.len() != headers.len() {
            return Err(AffectError::BadEmotionRow {
                line,
                reason: format!("{} fields, header has {}", rec.len(), headers.len()),
            });
        }
        let mut scores = [0.0; 9];
        for (e, col) in cols.iter().enumerate() {
            let raw = &rec[col.expect("checked above")];
            scores[e] = raw.parse::<f64>().map_err(|_| AffectError::BadEmotionRow {
                line,
                reason: format!("`{raw}` is not a number"),
            })?;
        }
        let v = EmotionVector::new(scores).map_err(|e| AffectError::BadEmotionRow {
            line,
            reason: e.to_string(),
        })?;
        out.insert(rec[id_col].to_string(), v);
    }
    Ok(out)
}

pub fn score_sentiment_labels(
    corpus: &Corpus,
    provider: &SentimentProvider,
) -> Result<Vec<SentimentLabel>, AffectError> {
    corpus
        .records()
        .iter()
        .map(|r| match provider {
            SentimentProvider::Imported(map) => {
                map.get(&r.id).copied().ok_or_else(|| AffectError::MissingLabel(r.id.clone()))
            }
            SentimentProvider::Lexicon(lex) => Ok(lex.label(&r.clean_text)),
        })
        .collect()
}

pub fn score_emotions(corpus: &Corpus, provider: &EmotionProvider) -> Result<Vec<EmotionVector>, AffectError> {
    corpus
        .records()
        .iter()
        .map(|r| match provider {
            EmotionProvider::Imported(map) => {
                map.get(&r.id).copied().ok_or_else(|| AffectError::MissingEmotion(r.id.clone()))
            }
            EmotionProvider::Lexicon(lex) => Ok(lex.score(&r.clean_text)),
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TopicAffect {
    pub topic_id: usize,
    pub size: usize,
    pub counts: SentimentCounts,
    pub sentiment_score: f64,
    pub emotion_mean: EmotionVector,
    pub emotion_median: EmotionVector,
    pub dyad_mean: DyadStats,
    pub dyad_median: DyadStats,
    /// Argmax of `emotion_mean`.
    pub dominant_emotion: Emotion,
    /// Argmax of `emotion_median`.
    pub dominant_emotion_median: Emotion,
}

pub fn median(values: &mut [f64]) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    values.sort_by(f64::total_cmp);
    let n = values.len();
    Some(if n % 2 == 1 {
        values[n / 2]
    } else {
        (values[n / 2 - 1] + values[n / 2]) / 2.0
    })
}

fn mean(values: &[f64]) -> f64 {
    values.iter().sum::<f64>() / values.len() as f64
}

/// Per topic: sentiment score over its labels, and mean and median of every
/// emotion and dyad over its documents.
pub fn aggregate_topic_affect(
    labels: &[SentimentLabel],
    emotions: &[EmotionVector],
    assignment: &TopicAssignment,
) -> Result<Vec<TopicAffect>, AffectError> {
    let n = assignment.labels.len();
    if labels.len() != n {
        return Err(AffectError::LengthMismatch {
            what: "sentiment labels",
            expected: n,
            got: labels.len(),
        });
    }
    if emotions.len() != n {
        return Err(AffectError::LengthMismatch {
            what: "emotion vectors",
            expected: n,
            got: emotions.len(),
        });
    }
    let mut out = Vec::with_capacity(assignment.k);
    for (topic, docs) in assignment.members().into_iter().enumerate() {
        if docs.is_empty() {
            return Err(AffectError::EmptyTopic(topic));
        }
        let counts = SentimentCounts::from_labels(docs.iter().map(|&i| &labels[i]));
        let mut emo_mean = [0.0; 9];
        let mut emo_median = [0.0; 9];
        let mut column = Vec::with_capacity(docs.len());
        for e in 0..9 {
            column.clear();
            column.extend(docs.iter().map(|&i| emotions[i].0[e]));
            emo_mean[e] = mean(&column).clamp(0.0, 1.0);
            emo_median[e] = median(&mut column).expect("non-empty");
        }
        let dyads: Vec<[f64; 4]> = docs.iter().map(|&i| compose_dyads(&emotions[i]).as_array()).collect();
        let mut dyad_mean = [0.0; 4];
        let mut dyad_median = [0.0; 4];
        for d in 0..4 {
            column.clear();
            column.extend(dyads.iter().map(|row| row[d]));
            dyad_mean[d] = mean(&column);
            dyad_median[d] = median(&mut column).expect("non-empty");
        }
        let emotion_mean = EmotionVector::new(emo_mean)?;
        let emotion_median = EmotionVector::new(emo_median)?;
        out.push(TopicAffect {
            topic_id: topic,
            size: docs.len(),
            counts,
            sentiment_score: sentiment_score(counts)?,
            emotion_mean,
            emotion_median,
            dyad_mean: DyadStats::from_array(dyad_mean),
            dyad_median: DyadStats::from_array(dyad_median),
            dominant_emotion: emotion_mean.dominant(),
            dominant_emotion_median: emotion_median.dominant(),
        });
    }
    Ok(out)
}

/// Fraction of topics dominated by each emotion, in [`Emotion::ALL`]
/// order; emotions dominating no topic are omitted.
pub fn dominant_emotion_shares(affects: &[TopicAffect]) -> Vec<(Emotion, f64)> {
    let mut counts = [0usize; 9];
    for a in affects {
        counts[a.dominant_emotion.index()] += 1;
    }
    let n = affects.len() as f64;
    Emotion::ALL
        .iter()
        .zip(counts)
        .filter(|(_, c)| *c > 0)
        .map(|(e, c)| (*e, c as f64 / n))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn ev(pairs: &[(Emotion, f64)]) -> EmotionVector {
        EmotionVector::from_pairs(pairs).unwrap()
    }

    #[test]
    fn sentiment_score_examples() {
        let s = |p, n0, n| sentiment_score(SentimentCounts { n_pos: p, n_neu: n0, n_neg: n }).unwrap();
        assert_eq!(s(2, 1, 1), 0.25);
        assert_eq!(s(0, 5, 0), 0.0);
        assert_eq!(s(215, 689, 96), 0.119);
        assert!(matches!(sentiment_score(SentimentCounts::default()), Err(AffectError::UndefinedScore)));
    }

    #[test]
    fn lexicon_sentiment() {
        let lex = SentimentLexicon::from_pairs([("good".to_string(), 1), ("bad".to_string(), -1)]);
        assert_eq!(lex.label("good good bad"), SentimentLabel::Pos);
        assert_eq!(lex.label("bad good"), SentimentLabel::Neu);
        assert_eq!(lex.label("bad"), SentimentLabel::Neg);
    }

    #[test]
    fn label_parsing() {
        assert_eq!("positive".parse::<SentimentLabel>().unwrap(), SentimentLabel::Pos);
        assert_eq!("NEG".parse::<SentimentLabel>().unwrap(), SentimentLabel::Neg);
        assert!(matches!("meh".parse::<SentimentLabel>(), Err(AffectError::InvalidLabel(_))));
        let m = read_sentiment_labels("id,label\n1,positive\n2,neu\n".as_bytes()).unwrap();
        assert_eq!(m["1"], SentimentLabel::Pos);
        assert!(read_sentiment_labels("1,meh\n".as_bytes()).is_err());
    }

    #[test]
    fn lexicon_emotions() {
        let lex = EmotionLexicon::from_pairs([("dread".to_string(), Emotion::Fear)]);
        let v = lex.score("dread dread calm");
        assert!((v.get(Emotion::Fear) - 2.0 / 3.0).abs() < 1e-15);
        for e in Emotion::ALL.into_iter().filter(|&e| e != Emotion::Fear) {
            assert_eq!(v.get(e), 0.0);
        }
    }

    #[test]
    fn imported_emotions_drop_rejected_columns() {
        let csv = "id,sadness,disgust,anger,fear,anticipation,surprise,joy,love,trust,pessimism,optimism\n\
                   a,0.1,0,0,0.2,0.4,0,0.5,0,0.3,0.9,0.8\n";
        let m = read_emotion_scores(csv.as_bytes()).unwrap();
        assert_eq!(m["a"].scores().len(), 9);
        assert_eq!(m["a"].get(Emotion::Trust), 0.3);

        let bad = "id,sadness,disgust,anger,fear,anticipation,surprise,joy,love,trust\na,1.5,0,0,0,0,0,0,0,0\n";
        assert!(matches!(read_emotion_scores(bad.as_bytes()), Err(AffectError::BadEmotionRow { line: 2, .. })));
        let short = "id,sadness,disgust,anger,fear,anticipation,surprise,joy,love,trust\na,0,0\n";
        assert!(matches!(read_emotion_scores(short.as_bytes()), Err(AffectError::BadEmotionRow { line: 2, .. })));
        let missing = "id,sadness\na,0\n";
        assert!(matches!(read_emotion_scores(missing.as_bytes()), Err(AffectError::BadEmotionRow { line: 1, .. })));
    }

    #[test]
    fn dyad_examples() {
        let e = ev(&[
            (Emotion::Anticipation, 0.4),
            (Emotion::Fear, 0.2),
            (Emotion::Trust, 0.3),
            (Emotion::Joy, 0.5),
            (Emotion::Sadness, 0.1),
        ]);
        let d = compose_dyads(&e);
        assert!((d.anxiety() - 0.6).abs() < 1e-12);
        assert!((d.hope() - 0.7).abs() < 1e-12);
        assert!((d.optimism() - 0.9).abs() < 1e-12);
        assert!((d.pessimism() - 0.5).abs() < 1e-12);
        assert_eq!(compose_dyads(&EmotionVector::zero()).as_array(), [0.0; 4]);
        let top = compose_dyads(&ev(&[(Emotion::Anticipation, 1.0), (Emotion::Trust, 1.0)]));
        assert_eq!(top.hope(), 2.0);
    }

    #[test]
    fn aggregation_examples() {
        let emotions = vec![
            ev(&[(Emotion::Anticipation, 0.2)]),
            ev(&[(Emotion::Anticipation, 0.4)]),
            ev(&[(Emotion::Joy, 0.9)]),
            ev(&[(Emotion::Joy, 0.1)]),
            ev(&[(Emotion::Joy, 0.1)]),
            ev(&[(Emotion::Joy, 0.1)]),
        ];
        use SentimentLabel::*;
        let labels = vec![Pos, Neu, Pos, Pos, Pos, Neg];
        let a = TopicAssignment::new(vec![0, 0, 1, 1, 1, 1], 2).unwrap();
        let t = aggregate_topic_affect(&labels, &emotions, &a).unwrap();
        assert!((t[0].emotion_mean.get(Emotion::Anticipation) - 0.3).abs() < 1e-12);
        assert!((t[0].emotion_median.get(Emotion::Anticipation) - 0.3).abs() < 1e-12);
        assert_eq!(t[1].sentiment_score, 0.5);
        assert_eq!(t[0].dominant_emotion, Emotion::Anticipation);
        assert_eq!(t[1].dominant_emotion, Emotion::Joy);

        let empty = TopicAssignment::new(vec![0; 6], 2).unwrap();
        assert!(matches!(aggregate_topic_affect(&labels, &emotions, &empty), Err(AffectError::EmptyTopic(1))));
    }

    fn affect_with(dom: Emotion) -> TopicAffect {
        let e = ev(&[(dom, 0.5)]);
        TopicAffect {
            topic_id: 0,
            size: 1,
            counts: SentimentCounts::default(),
            sentiment_score: 0.0,
            emotion_mean: e,
            emotion_median: e,
            dyad_mean: DyadStats::from_array([0.0; 4]),
            dyad_median: DyadStats::from_array([0.0; 4]),
            dominant_emotion: dom,
            dominant_emotion_median: dom,
        }
    }

    #[test]
    fn dominance_share_examples() {
        let t = [
            affect_with(Emotion::Anticipation),
            affect_with(Emotion::Anticipation),
            affect_with(Emotion::Joy),
        ];
        let s = dominant_emotion_shares(&t);
        assert_eq!(s, vec![(Emotion::Anticipation, 2.0 / 3.0), (Emotion::Joy, 1.0 / 3.0)]);
        let all_joy = [affect_with(Emotion::Joy), affect_with(Emotion::Joy)];
        assert_eq!(dominant_emotion_shares(&all_joy), vec![(Emotion::Joy, 1.0)]);
    }

    #[test]
    fn dominance_ties_follow_fixed_order() {
        let e = ev(&[(Emotion::Trust, 0.5), (Emotion::Fear, 0.5)]);
        assert_eq!(e.dominant(), Emotion::Fear);
    }

    fn arb_emotions() -> impl Strategy<Value = EmotionVector> {
        prop::array::uniform9(0.0f64..=1.0).prop_map(|a| EmotionVector::new(a).unwrap())
    }

    proptest! {
        #[test]
        fn score_is_antisymmetric(p in 0u64..10_000, n0 in 0u64..10_000, n in 0u64..10_000) {
            prop_assume!(p + n0 + n > 0);
            let a = sentiment_score(SentimentCounts { n_pos: p, n_neu: n0, n_neg: n }).unwrap();
            let b = sentiment_score(SentimentCounts { n_pos: n, n_neu: n0, n_neg: p }).unwrap();
            prop_assert_eq!(a, -b);
            prop_assert!((-1.0..=1.0).contains(&a));
        }

        #[test]
        fn dyads_are_monotone(e in arb_emotions(), which in 0usize..9, bump in 0.0f64..1.0) {
            let mut raised = *e.scores();
            raised[which] = (raised[which] + bump).min(1.0);
            let before = compose_dyads(&e).as_array();
            let after = compose_dyads(&EmotionVector::new(raised).unwrap()).as_array();
            for (b, a) in before.iter().zip(after) {
                prop_assert!(a >= *b);
            }
        }

        #[test]
        fn aggregation_ignores_document_order(
            docs in prop::collection::vec((arb_emotions(), 0usize..3, 0usize..2), 2..20),
        ) {
            let labels: Vec<SentimentLabel> = docs.iter().map(|d| [SentimentLabel::Pos, SentimentLabel::Neu, SentimentLabel::Neg][d.1]).collect();
            let emotions: Vec<EmotionVector> = docs.iter().map(|d| d.0).collect();
            let mut topics: Vec<usize> = docs.iter().map(|d| d.2).collect();
            topics[0] = 0;
            topics[1] = 1;
            let a = TopicAssignment::new(topics.clone(), 2).unwrap();
            let fwd = aggregate_topic_affect(&labels, &emotions, &a).unwrap();
            let rl: Vec<_> = labels.iter().rev().copied().collect();
            let re: Vec<_> = emotions.iter().rev().copied().collect();
            let rt = TopicAssignment::new(topics.iter().rev().copied().collect(), 2).unwrap();
            let rev = aggregate_topic_affect(&rl, &re, &rt).unwrap();
            for (x, y) in fwd.iter().zip(&rev) {
                prop_assert_eq!(x.counts, y.counts);
                prop_assert_eq!(x.emotion_median, y.emotion_median);
                prop_assert_eq!(x.dyad_median, y.dyad_median);
                prop_assert_eq!(x.dominant_emotion, y.dominant_emotion);
                for (p, q) in x.emotion_mean.scores().iter().zip(y.emotion_mean.scores()) {
                    prop_assert!((p - q).abs() < 1e-12);
                }
            }
        }
    }
}
