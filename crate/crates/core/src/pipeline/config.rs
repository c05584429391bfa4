use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::{DedupKey, FieldSchema};
use crate::embedding::DEFAULT_HASH_DIM;
use crate::topics::Linkage;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read config {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("config is not valid JSON: {0}")]
    Parse(#[from] serde_json::Error),
    #[error("config field `{field}`: path {path} does not exist")]
    MissingPath { field: &'static str, path: PathBuf },
    #[error("config field `{field}`: {reason}")]
    Invalid { field: &'static str, reason: String },
}

/// Every tunable of a run. Relative paths resolve against the directory of
/// the config file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    pub corpus: PathBuf,
    pub schema: FieldSchema,
    /// Precomputed document vectors (JSONL or binary); hashing otherwise.
    pub embeddings: Option<PathBuf>,
    /// CSV `id,label`; lexicon labels otherwise.
    pub sentiment_labels: Option<PathBuf>,
    /// CSV with `id` and one column per emotion; lexicon scores otherwise.
    pub emotion_scores: Option<PathBuf>,
    pub sentiment_lexicon: Option<PathBuf>,
    pub emotion_lexicon: Option<PathBuf>,
    pub stopwords: Option<PathBuf>,
    pub lemmas: Option<PathBuf>,
    pub output_dir: PathBuf,
    pub dedup_key: DedupKey,
    pub embed_dim: usize,
    pub k: usize,
    pub out_dim: usize,
    pub seed: u64,
    pub batch_size: usize,
    pub epochs: usize,
    pub n_init: usize,
    pub cut_k: usize,
    pub linkage: Linkage,
    pub bin_days: i64,
    pub top_n_terms: usize,
    pub top_n_keywords: usize,
    pub coherence_window: usize,
    pub coherence_top_m: usize,
    pub coherence_topics: usize,
    pub dominance_threshold: f64,
    pub kol_top_k: usize,
    pub active_min_count: u64,
    #[serde(skip)]
    base_dir: PathBuf,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            corpus: PathBuf::new(),
            schema: FieldSchema::default(),
            embeddings: None,
            sentiment_labels: None,
            emotion_scores: None,
            sentiment_lexicon: None,
            emotion_lexicon: None,
            stopwords: None,
            lemmas: None,
            output_dir: PathBuf::from("adm_out"),
            dedup_key: DedupKey::TimestampText,
            embed_dim: DEFAULT_HASH_DIM,
            k: 100,
            out_dim: 5,
            seed: 42,
            batch_size: 1024,
            epochs: 10,
            n_init: 3,
            cut_k: 21,
            linkage: Linkage::Average,
            bin_days: 7,
            top_n_terms: 10,
            top_n_keywords: 100,
            coherence_window: 110,
            coherence_top_m: 10,
            coherence_topics: 25,
            dominance_threshold: 0.49,
            kol_top_k: 10,
            active_min_count: 1,
            base_dir: PathBuf::new(),
        }
    }
}

impl PipelineConfig {
    /// Reads a JSON config. Does not validate; see [`PipelineConfig::validate`].
    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        let mut cfg: PipelineConfig = serde_json::from_str(&text)?;
        cfg.base_dir = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Ok(cfg)
    }

    pub fn with_base_dir(mut self, dir: impl Into<PathBuf>) -> Self {
        self.base_dir = dir.into();
        self
    }

    pub fn resolve(&self, p: &Path) -> PathBuf {
        if p.is_absolute() {
            p.to_path_buf()
        } else {
            self.base_dir.join(p)
        }
    }

    pub fn output_path(&self) -> PathBuf {
        self.resolve(&self.output_dir)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.corpus.as_os_str().is_empty() {
            return Err(ConfigError::Invalid {
                field: "corpus",
                reason: "required".into(),
            });
        }
        let paths: [(&'static str, Option<&PathBuf>); 8] = [
            ("corpus", Some(&self.corpus)),
            ("embeddings", self.embeddings.as_ref()),
            ("sentiment_labels", self.sentiment_labels.as_ref()),
            ("emotion_scores", self.emotion_scores.as_ref()),
            ("sentiment_lexicon", self.sentiment_lexicon.as_ref()),
            ("emotion_lexicon", self.emotion_lexicon.as_ref()),
            ("stopwords", self.stopwords.as_ref()),
            ("lemmas", self.lemmas.as_ref()),
        ];
        for (field, p) in paths {
            if let Some(p) = p {
                let full = self.resolve(p);
                if !full.exists() {
                    return Err(ConfigError::MissingPath { field, path: full });
                }
            }
        }
        let invalid = |field: &'static str, reason: String| Err(ConfigError::Invalid { field, reason });
        if self.k < 2 {
            return invalid("k", format!("must be at least 2, got {}", self.k));
        }
        if self.out_dim == 0 {
            return invalid("out_dim", "must be positive".into());
        }
        if self.embeddings.is_none() && self.embed_dim < 8 {
            return invalid("embed_dim", format!("must be at least 8, got {}", self.embed_dim));
        }
        if self.embeddings.is_none() && self.out_dim > self.embed_dim {
            return invalid("out_dim", format!("exceeds embed_dim {}", self.embed_dim));
        }
        for (field, v) in [
            ("batch_size", self.batch_size),
            ("epochs", self.epochs),
            ("n_init", self.n_init),
            ("top_n_terms", self.top_n_terms),
            ("top_n_keywords", self.top_n_keywords),
            ("coherence_topics", self.coherence_topics),
            ("kol_top_k", self.kol_top_k),
        ] {
            if v == 0 {
                return invalid(field, "must be positive".into());
            }
        }
        if self.cut_k < 2 || self.cut_k > self.k {
            return invalid("cut_k", format!("must lie in [2, k={}], got {}", self.k, self.cut_k));
        }
        if self.bin_days <= 0 {
            return invalid("bin_days", "must be positive".into());
        }
        if self.coherence_window < 2 {
            return invalid("coherence_window", "must be at least 2".into());
        }
        if self.coherence_top_m < 2 {
            return invalid("coherence_top_m", "must be at least 2".into());
        }
        if !(self.dominance_threshold > 0.0 && self.dominance_threshold < 1.0) {
            return invalid("dominance_threshold", format!("must lie in (0, 1), got {}", self.dominance_threshold));
        }
        Ok(())
    }

    /// The config as JSON without `output_dir`, so runs that differ only in
    /// destination echo identically.
    pub fn echo(&self) -> serde_json::Value {
        let mut v = serde_json::to_value(self).expect("config serializes");
        if let Some(obj) = v.as_object_mut() {
            obj.remove("output_dir");
        }
        v
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn write_config(dir: &Path, body: &str) -> PathBuf {
        let p = dir.join("config.json");
        std::fs::write(&p, body).unwrap();
        p
    }

    #[test]
    fn relative_paths_resolve_against_config_dir() {
        let dir = tempfile::tempdir().unwrap();
        std::fs::write(dir.path().join("c.jsonl"), "").unwrap();
        let cfg = PipelineConfig::load(&write_config(dir.path(), r#"{"corpus": "c.jsonl", "k": 8, "cut_k": 3}"#)).unwrap();
        assert_eq!(cfg.resolve(&cfg.corpus), dir.path().join("c.jsonl"));
        cfg.validate().unwrap();
        assert_eq!(cfg.out_dim, 5);
    }

    #[test]
    fn missing_corpus_names_the_field() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = PipelineConfig::load(&write_config(dir.path(), r#"{"corpus": "nope.jsonl"}"#)).unwrap();
        let err = cfg.validate().unwrap_err();
        assert!(matches!(err, ConfigError::MissingPath { field: "corpus", .. }));
        assert!(err.to_string().contains("corpus"));
    }

    #[test]
    fn rejects_unknown_keys_and_bad_values() {
        let dir = tempfile::tempdir().unwrap();
        assert!(matches!(
            PipelineConfig::load(&write_config(dir.path(), r#"{"corpus": "x", "kk": 3}"#)),
            Err(ConfigError::Parse(_))
        ));
        std::fs::write(dir.path().join("c.jsonl"), "").unwrap();
        let cfg = PipelineConfig::load(&write_config(dir.path(), r#"{"corpus": "c.jsonl", "k": 1}"#)).unwrap();
        assert!(matches!(cfg.validate(), Err(ConfigError::Invalid { field: "k", .. })));
        let cfg = PipelineConfig::load(&write_config(dir.path(), r#"{"corpus": "c.jsonl", "k": 5, "cut_k": 6}"#)).unwrap();
        assert!(matches!(cfg.validate(), Err(ConfigError::Invalid { field: "cut_k", .. })));
    }

    #[test]
    fn echo_drops_output_dir() {
        let cfg = PipelineConfig {
            seed: 77,
            ..PipelineConfig::default()
        };
        let e = cfg.echo();
        assert!(e.get("output_dir").is_none());
        assert_eq!(e["seed"], 77);
    }
}
