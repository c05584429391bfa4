//! Config-driven orchestration. Every stage reads the artifacts of earlier
//! stages from the output directory and writes its own, so stages can be
//! re-run in isolation.

pub mod artifacts;
mod config;
mod report;
mod stages;
pub mod svg;

use std::fmt;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

pub use config::{ConfigError, PipelineConfig};
pub use report::{emit_reports, ReportInputs};
pub use stages::TopicsReport;

use crate::affect::AffectError;
use crate::corpus::CorpusError;
use crate::embedding::EmbeddingError;
use crate::keywords::KeywordError;
use crate::kol::KolError;
use crate::stats::StatsError;
use crate::topics::TopicError;

#[derive(Debug, Error)]
pub enum StageError {
    #[error(transparent)]
    Corpus(#[from] CorpusError),
    #[error(transparent)]
    Embedding(#[from] EmbeddingError),
    #[error(transparent)]
    Topic(#[from] TopicError),
    #[error(transparent)]
    Keyword(#[from] KeywordError),
    #[error(transparent)]
    Affect(#[from] AffectError),
    #[error(transparent)]
    Stats(#[from] StatsError),
    #[error(transparent)]
    Kol(#[from] KolError),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
    #[error("missing artifact {0}; run the producing stage first")]
    MissingArtifact(PathBuf),
    #[error("malformed artifact: {0}")]
    Malformed(String),
    #[error("no topics to report")]
    EmptyResults,
}

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("stage `{stage}` failed: {source}")]
    Stage {
        stage: Stage,
        #[source]
        source: StageError,
    },
}

impl PipelineError {
    /// 2 for configuration problems, 1 for stage failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            PipelineError::Config(_) => 2,
            PipelineError::Stage { .. } => 1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Stage {
    Ingest,
    Embed,
    Topics,
    Keywords,
    Affect,
    Stats,
    Kols,
    Report,
}

impl Stage {
    pub const ALL: [Stage; 8] = [
        Stage::Ingest,
        Stage::Embed,
        Stage::Topics,
        Stage::Keywords,
        Stage::Affect,
        Stage::Stats,
        Stage::Kols,
        Stage::Report,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Stage::Ingest => "ingest",
            Stage::Embed => "embed",
            Stage::Topics => "topics",
            Stage::Keywords => "keywords",
            Stage::Affect => "affect",
            Stage::Stats => "stats",
            Stage::Kols => "kols",
            Stage::Report => "report",
        }
    }
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RunStatus {
    Complete,
    Failed,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub path: String,
    pub sha256: String,
    pub bytes: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub status: RunStatus,
    pub failed_stage: Option<Stage>,
    pub error: Option<String>,
    /// True when a stage failed after earlier stages wrote artifacts.
    pub partial: bool,
    pub seed: u64,
    pub config: serde_json::Value,
    /// Sorted by path; excludes the manifest itself and timings.
    pub files: Vec<ManifestEntry>,
    pub missing_declared: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArtifactBundle {
    pub output_dir: PathBuf,
    pub manifest: Manifest,
    pub summary: serde_json::Value,
}

fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

fn hashed_files(out: &Path) -> Result<Vec<ManifestEntry>, StageError> {
    let mut names: Vec<String> = Vec::new();
    if out.exists() {
        for entry in std::fs::read_dir(out)? {
            let entry = entry?;
            if entry.file_type()?.is_file() {
                names.push(entry.file_name().to_string_lossy().into_owned());
            }
        }
    }
    names.retain(|n| n != artifacts::MANIFEST && n != artifacts::TIMINGS);
    names.sort();
    names
        .into_iter()
        .map(|name| {
            let bytes = std::fs::read(out.join(&name))?;
            Ok(ManifestEntry {
                sha256: sha256_hex(&bytes),
                bytes: bytes.len() as u64,
                path: name,
            })
        })
        .collect()
}

/// Hashes the output directory and writes `manifest.json`.
pub fn write_manifest(
    cfg: &PipelineConfig,
    failure: Option<(Stage, &StageError)>,
) -> Result<Manifest, StageError> {
    let out = cfg.output_path();
    std::fs::create_dir_all(&out)?;
    let files = hashed_files(&out)?;
    let missing_declared = artifacts::DECLARED
        .iter()
        .filter(|d| !files.iter().any(|f| f.path == **d))
        .map(|d| d.to_string())
        .collect();
    let manifest = Manifest {
        status: if failure.is_some() { RunStatus::Failed } else { RunStatus::Complete },
        failed_stage: failure.map(|f| f.0),
        error: failure.map(|f| f.1.to_string()),
        partial: failure.is_some() && !files.is_empty(),
        seed: cfg.seed,
        config: cfg.echo(),
        files,
        missing_declared,
    };
    artifacts::write_json(&out.join(artifacts::MANIFEST), &manifest)?;
    Ok(manifest)
}

/// Checks that every manifest entry exists with the recorded hash.
pub fn verify_manifest(out: &Path) -> Result<bool, StageError> {
    let manifest: Manifest = artifacts::read_json(&out.join(artifacts::MANIFEST))?;
    for e in &manifest.files {
        match std::fs::read(out.join(&e.path)) {
            Ok(bytes) if sha256_hex(&bytes) == e.sha256 => {}
            _ => return Ok(false),
        }
    }
    Ok(true)
}

/// Runs one stage against the configured output directory.
pub fn run_stage(cfg: &PipelineConfig, stage: Stage) -> Result<(), PipelineError> {
    cfg.validate()?;
    exec(cfg, stage).map_err(|source| PipelineError::Stage { stage, source })?;
    if stage == Stage::Report {
        write_manifest(cfg, None).map_err(|source| PipelineError::Stage { stage, source })?;
    }
    Ok(())
}

fn exec(cfg: &PipelineConfig, stage: Stage) -> Result<(), StageError> {
    let out = cfg.output_path();
    std::fs::create_dir_all(&out)?;
    log::info!("stage {stage}: start");
    match stage {
        Stage::Ingest => stages::ingest(cfg, &out),
        Stage::Embed => stages::embed(cfg, &out),
        Stage::Topics => stages::topics(cfg, &out),
        Stage::Keywords => stages::keywords(cfg, &out),
        Stage::Affect => stages::affect(cfg, &out),
        Stage::Stats => stages::stats(cfg, &out),
        Stage::Kols => stages::kols(cfg, &out),
        Stage::Report => stages::report(cfg, &out),
    }?;
    log::info!("stage {stage}: done");
    Ok(())
}

/// Runs every stage in order. On failure the manifest is still written,
/// flagged `failed` with the stage name.
pub fn run_pipeline(cfg: &PipelineConfig) -> Result<ArtifactBundle, PipelineError> {
    cfg.validate()?;
    let out = cfg.output_path();
    let mut timings = serde_json::Map::new();
    for stage in Stage::ALL {
        let t0 = Instant::now();
        if let Err(source) = exec(cfg, stage) {
            log::error!("stage {stage} failed: {source}");
            if let Err(e) = write_manifest(cfg, Some((stage, &source))) {
                log::error!("could not write manifest: {e}");
            }
            return Err(PipelineError::Stage { stage, source });
        }
        timings.insert(stage.name().into(), (t0.elapsed().as_secs_f64() * 1000.0).into());
    }
    let wrap = |source| PipelineError::Stage {
        stage: Stage::Report,
        source,
    };
    artifacts::write_json(&out.join(artifacts::TIMINGS), &timings).map_err(wrap)?;
    let manifest = write_manifest(cfg, None).map_err(wrap)?;
    let summary = artifacts::read_json(&out.join(artifacts::RUN_SUMMARY)).map_err(wrap)?;
    Ok(ArtifactBundle {
        output_dir: out,
        manifest,
        summary,
    })
}
