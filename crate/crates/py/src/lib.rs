//! Python bindings for `adm-core`: corpus loading, hashing embeddings,
//! topic fitting, affect scoring, the nonparametric tests and the full
//! pipeline. Every error surfaces as `adm.AdmError` with the core message.

use std::collections::HashMap;
use std::path::PathBuf;

use adm_core::affect::{self, Emotion, EmotionVector, SentimentCounts};
use adm_core::corpus::{self, FieldSchema};
use adm_core::pipeline::{self, PipelineConfig};
use adm_core::stats::{self, Alternative, TestMethod};
use adm_core::topics::{self, DenseMatrix, KMeansParams};
use pyo3::create_exception;
use pyo3::exceptions::PyException;
use pyo3::prelude::*;

create_exception!(adm, AdmError, PyException);

fn err<E: std::fmt::Display>(e: E) -> PyErr {
    AdmError::new_err(e.to_string())
}

fn matrix(rows: Vec<Vec<f64>>) -> PyResult<DenseMatrix> {
    DenseMatrix::from_rows(&rows).map_err(err)
}

fn to_rows(m: &DenseMatrix) -> Vec<Vec<f64>> {
    m.iter_rows().map(<[f64]>::to_vec).collect()
}

fn alternative(s: &str) -> PyResult<Alternative> {
    match s {
        "greater" => Ok(Alternative::Greater),
        "less" => Ok(Alternative::Less),
        other => Err(AdmError::new_err(format!("alternative must be 'greater' or 'less', got '{other}'"))),
    }
}

/// Statistic, p-value, effective sample size and method of one test.
#[pyclass(name = "TestResult", frozen, get_all)]
struct PyTestResult {
    statistic: f64,
    p_value: f64,
    n_eff: usize,
    method: String,
}

#[pymethods]
impl PyTestResult {
    fn __repr__(&self) -> String {
        format!(
            "TestResult(statistic={}, p_value={}, n_eff={}, method='{}')",
            self.statistic, self.p_value, self.n_eff, self.method
        )
    }
}

impl From<stats::TestResult> for PyTestResult {
    fn from(r: stats::TestResult) -> Self {
        let method = match r.method {
            TestMethod::Exact => "exact",
            TestMethod::NormalApprox => "normal_approx",
            TestMethod::TApprox => "t_approx",
        };
        Self {
            statistic: r.statistic,
            p_value: r.p_value,
            n_eff: r.n_eff,
            method: method.into(),
        }
    }
}

/// Timestamp-ordered, cleaned records read from JSON lines.
#[pyclass(name = "Corpus", frozen)]
struct PyCorpus {
    inner: corpus::Corpus,
}

#[pymethods]
impl PyCorpus {
    #[staticmethod]
    fn from_jsonl(path: PathBuf) -> PyResult<Self> {
        let f = std::fs::File::open(&path).map_err(err)?;
        let (inner, _) = corpus::parse_corpus(std::io::BufReader::new(f), &FieldSchema::default()).map_err(err)?;
        Ok(Self { inner })
    }

    fn __len__(&self) -> usize {
        self.inner.len()
    }

    fn ids(&self) -> Vec<String> {
        self.inner.ids().map(str::to_string).collect()
    }

    fn clean_texts(&self) -> Vec<String> {
        self.inner.records().iter().map(|r| r.clean_text.clone()).collect()
    }

    fn authors(&self) -> Vec<String> {
        self.inner.records().iter().map(|r| r.author.clone()).collect()
    }

    /// Hashing embeddings, one row per document that has tokens.
    #[pyo3(signature = (dim=256, seed=42))]
    fn embed(&self, dim: usize, seed: u64) -> PyResult<(Vec<String>, Vec<Vec<f64>>)> {
        let (m, _) = adm_core::embedding::hash_embed(&self.inner, dim, seed).map_err(err)?;
        Ok((m.doc_ids().to_vec(), m.rows().map(<[f64]>::to_vec).collect()))
    }

    /// Author volumes, descending.
    fn author_volumes(&self) -> Vec<(String, u64)> {
        adm_core::kol::author_volumes(&self.inner)
    }
}

/// Incremental PCA fitted over row batches.
#[pyclass(name = "PcaModel", frozen)]
struct PyPcaModel {
    inner: topics::PcaModel,
}

#[pymethods]
impl PyPcaModel {
    #[staticmethod]
    fn fit(batches: Vec<Vec<Vec<f64>>>, out_dim: usize) -> PyResult<Self> {
        let mats: Vec<DenseMatrix> = batches.into_iter().map(matrix).collect::<PyResult<_>>()?;
        let inner = topics::fit_incremental_pca(&mats, out_dim).map_err(err)?;
        Ok(Self { inner })
    }

    fn project(&self, rows: Vec<Vec<f64>>) -> PyResult<Vec<Vec<f64>>> {
        Ok(to_rows(&self.inner.project(&matrix(rows)?).map_err(err)?))
    }

    #[getter]
    fn components(&self) -> Vec<Vec<f64>> {
        to_rows(&self.inner.components)
    }

    #[getter]
    fn singular_values(&self) -> Vec<f64> {
        self.inner.singular_values.clone()
    }
}

/// Mini-batch k-means centroids.
#[pyclass(name = "TopicModel", frozen)]
struct PyTopicModel {
    inner: topics::TopicModel,
}

#[pymethods]
impl PyTopicModel {
    #[staticmethod]
    #[pyo3(signature = (rows, k, seed=42, batch_size=1024, epochs=10, n_init=3))]
    fn fit(rows: Vec<Vec<f64>>, k: usize, seed: u64, batch_size: usize, epochs: usize, n_init: usize) -> PyResult<Self> {
        let params = KMeansParams {
            k,
            seed,
            batch_size,
            epochs,
            n_init,
        };
        let inner = topics::fit_minibatch_kmeans(&matrix(rows)?, params).map_err(err)?;
        Ok(Self { inner })
    }

    fn assign(&self, rows: Vec<Vec<f64>>) -> PyResult<Vec<usize>> {
        Ok(topics::assign_topics(&self.inner, &matrix(rows)?).map_err(err)?.labels)
    }

    fn inertia(&self, rows: Vec<Vec<f64>>) -> PyResult<f64> {
        Ok(self.inner.inertia(&matrix(rows)?))
    }

    #[getter]
    fn k(&self) -> usize {
        self.inner.k
    }

    #[getter]
    fn centroids(&self) -> Vec<Vec<f64>> {
        to_rows(&self.inner.centroids)
    }
}

#[pyfunction]
fn clean_text(raw: &str) -> String {
    corpus::clean_text(raw)
}

/// `(N+ - N-) / (N+ + N0 + N-)`.
#[pyfunction]
fn sentiment_score(n_pos: u64, n_neu: u64, n_neg: u64) -> PyResult<f64> {
    affect::sentiment_score(SentimentCounts { n_pos, n_neu, n_neg }).map_err(err)
}

fn emotion_vector(scores: HashMap<String, f64>) -> PyResult<EmotionVector> {
    let pairs: Vec<(Emotion, f64)> = scores
        .into_iter()
        .map(|(k, v)| Ok((k.parse::<Emotion>().map_err(err)?, v)))
        .collect::<PyResult<_>>()?;
    EmotionVector::from_pairs(&pairs).map_err(err)
}

/// Hope, anxiety, optimism and pessimism from a `{emotion: score}` dict;
/// missing emotions count as zero.
#[pyfunction]
fn compose_dyads(scores: HashMap<String, f64>) -> PyResult<HashMap<&'static str, f64>> {
    let d = affect::compose_dyads(&emotion_vector(scores)?);
    Ok(affect::DyadStats::NAMES.into_iter().zip(d.as_array()).collect())
}

/// Argmax emotion, ties to the earlier emotion in the fixed order.
#[pyfunction]
fn dominant_emotion(scores: HashMap<String, f64>) -> PyResult<&'static str> {
    Ok(emotion_vector(scores)?.dominant().name())
}

#[pyfunction]
#[pyo3(signature = (a, b, alternative="greater", method=None))]
fn wilcoxon_signed_rank(a: Vec<f64>, b: Vec<f64>, alternative: &str, method: Option<&str>) -> PyResult<PyTestResult> {
    let method = match method {
        None => None,
        Some("exact") => Some(TestMethod::Exact),
        Some("normal_approx") => Some(TestMethod::NormalApprox),
        Some(other) => return Err(AdmError::new_err(format!("unknown method '{other}'"))),
    };
    let alt = self::alternative(alternative)?;
    stats::wilcoxon_with_method(&a, &b, alt, method).map(Into::into).map_err(err)
}

#[pyfunction]
fn spearman_rho(x: Vec<f64>, y: Vec<f64>) -> PyResult<PyTestResult> {
    stats::spearman_rho(&x, &y).map(Into::into).map_err(err)
}

#[pyfunction]
fn bonferroni(p_values: Vec<f64>, m: usize) -> PyResult<Vec<f64>> {
    stats::bonferroni(&p_values, m).map_err(err)
}

/// `100 * (median(a) - median(b)) / median(b)`.
#[pyfunction]
fn median_percent_diff(a: Vec<f64>, b: Vec<f64>) -> PyResult<f64> {
    stats::median_percent_diff(&a, &b).map_err(err)
}

/// Share of all volume held by the `top_k` largest entries.
#[pyfunction]
fn concentration(volumes: Vec<u64>, top_k: usize) -> PyResult<f64> {
    adm_core::kol::concentration(&volumes, top_k).map_err(err)
}

/// Runs every stage and returns `(summary_json, manifest_json)`. The GIL is
/// released while the pipeline runs.
#[pyfunction]
#[pyo3(signature = (config, out=None, seed=None))]
fn run_pipeline(py: Python<'_>, config: PathBuf, out: Option<PathBuf>, seed: Option<u64>) -> PyResult<(String, String)> {
    let mut cfg = PipelineConfig::load(&config).map_err(err)?;
    if let Some(out) = out {
        cfg.output_dir = std::path::absolute(out).map_err(err)?;
    }
    if let Some(seed) = seed {
        cfg.seed = seed;
    }
    let bundle = py.detach(|| pipeline::run_pipeline(&cfg)).map_err(err)?;
    let summary = serde_json::to_string(&bundle.summary).map_err(err)?;
    let manifest = serde_json::to_string(&bundle.manifest).map_err(err)?;
    Ok((summary, manifest))
}

#[pymodule]
fn adm(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("AdmError", m.py().get_type::<AdmError>())?;
    m.add_class::<PyTestResult>()?;
    m.add_class::<PyCorpus>()?;
    m.add_class::<PyPcaModel>()?;
    m.add_class::<PyTopicModel>()?;
    m.add_function(wrap_pyfunction!(clean_text, m)?)?;
    m.add_function(wrap_pyfunction!(sentiment_score, m)?)?;
    m.add_function(wrap_pyfunction!(compose_dyads, m)?)?;
    m.add_function(wrap_pyfunction!(dominant_emotion, m)?)?;
    m.add_function(wrap_pyfunction!(wilcoxon_signed_rank, m)?)?;
    m.add_function(wrap_pyfunction!(spearman_rho, m)?)?;
    m.add_function(wrap_pyfunction!(bonferroni, m)?)?;
    m.add_function(wrap_pyfunction!(median_percent_diff, m)?)?;
    m.add_function(wrap_pyfunction!(concentration, m)?)?;
    m.add_function(wrap_pyfunction!(run_pipeline, m)?)?;
    Ok(())
}
