//! Per-document dense vectors: a deterministic signed feature-hashing
//! embedder, and import of externally computed vectors.

use std::collections::HashMap;
use std::io::{BufRead, Read, Write};

use log::warn;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::Corpus;
use crate::text::word_tokens;

pub const DEFAULT_HASH_DIM: usize = 256;
const BINARY_MAGIC: &[u8; 4] = b"EMB1";

#[derive(Debug, Error)]
pub enum EmbeddingError {
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("hashing dimension must be at least 8, got {0}")]
    DimTooSmall(usize),
    #[error("no embedding for document {0}")]
    MissingEmbedding(String),
    #[error("embedding for {id} has dimension {got}, expected {expected}")]
    DimensionMismatch { id: String, expected: usize, got: usize },
    #[error("invalid embedding value: {0}")]
    InvalidValue(String),
    #[error("document {0} appears more than once in the embedding file")]
    DuplicateId(String),
    #[error("every document was dropped before embedding")]
    Empty,
}

/// Row-major `n_docs x dim` matrix aligned with a corpus.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingMatrix {
    doc_ids: Vec<String>,
    dim: usize,
    data: Vec<f64>,
}

impl EmbeddingMatrix {
    pub fn new(doc_ids: Vec<String>, dim: usize, data: Vec<f64>) -> Result<Self, EmbeddingError> {
        if dim == 0 || data.len() != doc_ids.len() * dim {
            return Err(EmbeddingError::InvalidValue(format!(
                "{} values cannot form {} rows of dimension {}",
                data.len(),
                doc_ids.len(),
                dim
            )));
        }
        if let Some(pos) = data.iter().position(|v| !v.is_finite()) {
            return Err(EmbeddingError::InvalidValue(format!(
                "non-finite value in row {}",
                doc_ids[pos / dim]
            )));
        }
        Ok(Self { doc_ids, dim, data })
    }

    pub fn doc_ids(&self) -> &[String] {
        &self.doc_ids
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn n_rows(&self) -> usize {
        self.doc_ids.len()
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.data.chunks_exact(self.dim)
    }

    /// Line-delimited `{"id": ..., "vector": [...]}`.
    pub fn write_jsonl<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        for (id, row) in self.doc_ids.iter().zip(self.rows()) {
            let line = serde_json::to_string(&JsonRow {
                id: id.clone(),
                vector: row.to_vec(),
            })?;
            writeln!(out, "{line}")?;
        }
        Ok(())
    }

    /// Packed little-endian form: `EMB1`, `u32 n`, `u32 dim`, `n*dim` f32
    /// values, then `n` ids each as `u32` byte length followed by UTF-8.
    pub fn write_binary<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        out.write_all(BINARY_MAGIC)?;
        out.write_all(&(self.n_rows() as u32).to_le_bytes())?;
        out.write_all(&(self.dim as u32).to_le_bytes())?;
        for v in &self.data {
            out.write_all(&(*v as f32).to_le_bytes())?;
        }
        for id in &self.doc_ids {
            out.write_all(&(id.len() as u32).to_le_bytes())?;
            out.write_all(id.as_bytes())?;
        }
        Ok(())
    }
}

#[derive(Serialize, Deserialize)]
struct JsonRow {
    id: String,
    vector: Vec<f64>,
}

/// 64-bit FNV-1a over the token bytes, keyed by `seed`, then a splitmix64
/// finalizer. Stable across platforms and toolchains.
fn seeded_hash(seed: u64, token: &str) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325 ^ splitmix64(seed);
    for b in token.as_bytes() {
        h ^= u64::from(*b);
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    splitmix64(h)
}

fn splitmix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Unigrams and space-joined bigrams of the lowercased words.
pub fn hash_features(text: &str) -> Vec<String> {
    let words = word_tokens(text);
    let mut feats = Vec::with_capacity(words.len() * 2);
    feats.extend(words.iter().cloned());
    feats.extend(words.windows(2).map(|w| format!("{} {}", w[0], w[1])));
    feats
}

/// Signed feature-hashing of one text into an L2-normalised vector. `None`
/// when the text has no tokens or every bucket cancels out.
pub fn hash_vector(text: &str, dim: usize, seed: u64) -> Option<Vec<f64>> {
    let sign_seed = seed ^ 0x5bd1_e995_0000_0001;
    let mut v = vec![0.0f64; dim];
    for f in hash_features(text) {
        let bucket = (seeded_hash(seed, &f) % dim as u64) as usize;
        let sign = if seeded_hash(sign_seed, &f) & 1 == 0 { 1.0 } else { -1.0 };
        v[bucket] += sign;
    }
    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    if norm == 0.0 {
        return None;
    }
    v.iter_mut().for_each(|x| *x /= norm);
    Some(v)
}

/// Embeds every record's `clean_text`. Documents without tokens are left
/// out and returned by id so the caller can drop them from the corpus.
pub fn hash_embed(
    corpus: &Corpus,
    dim: usize,
    seed: u64,
) -> Result<(EmbeddingMatrix, Vec<String>), EmbeddingError> {
    if dim < 8 {
        return Err(EmbeddingError::DimTooSmall(dim));
    }
    let rows: Vec<Option<Vec<f64>>> = corpus
        .records()
        .par_iter()
        .map(|r| hash_vector(&r.clean_text, dim, seed))
        .collect();
    let mut ids = Vec::with_capacity(rows.len());
    let mut dropped = Vec::new();
    let mut data = Vec::with_capacity(rows.len() * dim);
    for (r, row) in corpus.records().iter().zip(rows) {
        match row {
            Some(v) => {
                ids.push(r.id.clone());
                data.extend(v);
            }
            None => dropped.push(r.id.clone()),
        }
    }
    if !dropped.is_empty() {
        warn!("{} documents have no hashable tokens and were dropped", dropped.len());
    }
    if ids.is_empty() {
        return Err(EmbeddingError::Empty);
    }
    Ok((EmbeddingMatrix::new(ids, dim, data)?, dropped))
}

fn align(
    table: HashMap<String, Vec<f64>>,
    dim: usize,
    corpus: &Corpus,
) -> Result<EmbeddingMatrix, EmbeddingError> {
    let mut data = Vec::with_capacity(corpus.len() * dim);
    let mut ids = Vec::with_capacity(corpus.len());
    for id in corpus.ids() {
        let row = table
            .get(id)
            .ok_or_else(|| EmbeddingError::MissingEmbedding(id.to_string()))?;
        data.extend_from_slice(row);
        ids.push(id.to_string());
    }
    EmbeddingMatrix::new(ids, dim, data)
}

/// Reads line-delimited `{id, vector}` rows and aligns them to corpus order.
/// The dimension is taken from the first row.
pub fn import_embeddings_jsonl<R: BufRead>(
    input: R,
    corpus: &Corpus,
) -> Result<EmbeddingMatrix, EmbeddingError> {
    let mut table: HashMap<String, Vec<f64>> = HashMap::new();
    let mut dim = None;
    for (lineno, line) in input.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let row: JsonRow = serde_json::from_str(&line)
            .map_err(|e| EmbeddingError::InvalidValue(format!("line {}: {e}", lineno + 1)))?;
        let expected = *dim.get_or_insert(row.vector.len());
        if row.vector.len() != expected || expected == 0 {
            return Err(EmbeddingError::DimensionMismatch {
                id: row.id,
                expected,
                got: row.vector.len(),
            });
        }
        if row.vector.iter().any(|v| !v.is_finite()) {
            return Err(EmbeddingError::InvalidValue(format!("non-finite value for {}", row.id)));
        }
        if table.contains_key(&row.id) {
            return Err(EmbeddingError::DuplicateId(row.id));
        }
        table.insert(row.id, row.vector);
    }
    let Some(dim) = dim else {
        return match corpus.ids().next() {
            Some(id) => Err(EmbeddingError::MissingEmbedding(id.to_string())),
            None => Err(EmbeddingError::Empty),
        };
    };
    align(table, dim, corpus)
}

fn read_u32<R: Read>(r: &mut R) -> std::io::Result<u32> {
    let mut b = [0u8; 4];
    r.read_exact(&mut b)?;
    Ok(u32::from_le_bytes(b))
}

/// Reads the packed `EMB1` format and aligns rows to corpus order.
pub fn import_embeddings_binary<R: Read>(
    mut input: R,
    corpus: &Corpus,
) -> Result<EmbeddingMatrix, EmbeddingError> {
    let mut magic = [0u8; 4];
    input.read_exact(&mut magic)?;
    if &magic != BINARY_MAGIC {
        return Err(EmbeddingError::InvalidValue("bad magic, expected EMB1".into()));
    }
    let n = read_u32(&mut input)? as usize;
    let dim = read_u32(&mut input)? as usize;
    if dim == 0 {
        return Err(EmbeddingError::InvalidValue("zero dimension".into()));
    }
    let mut raw = vec![0u8; n * dim * 4];
    input.read_exact(&mut raw)?;
    let values: Vec<f64> = raw
        .chunks_exact(4)
        .map(|c| f64::from(f32::from_le_bytes([c[0], c[1], c[2], c[3]])))
        .collect();
    let mut table = HashMap::with_capacity(n);
    for row in values.chunks_exact(dim) {
        let len = read_u32(&mut input)? as usize;
        let mut buf = vec![0u8; len];
        input.read_exact(&mut buf)?;
        let id = String::from_utf8(buf)
            .map_err(|_| EmbeddingError::InvalidValue("id is not valid UTF-8".into()))?;
        if row.iter().any(|v| !v.is_finite()) {
            return Err(EmbeddingError::InvalidValue(format!("non-finite value for {id}")));
        }
        if table.insert(id.clone(), row.to_vec()).is_some() {
            return Err(EmbeddingError::DuplicateId(id));
        }
    }
    align(table, dim, corpus)
}

/// Dispatches on the file's leading magic bytes.
pub fn import_embeddings(
    path: &std::path::Path,
    corpus: &Corpus,
) -> Result<EmbeddingMatrix, EmbeddingError> {
    let bytes = std::fs::read(path)?;
    if bytes.starts_with(BINARY_MAGIC) {
        import_embeddings_binary(bytes.as_slice(), corpus)
    } else {
        import_embeddings_jsonl(bytes.as_slice(), corpus)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{parse_corpus, FieldSchema};
    use proptest::prelude::*;

    fn corpus(texts: &[&str]) -> Corpus {
        let lines: Vec<String> = texts
            .iter()
            .enumerate()
            .map(|(i, t)| {
                serde_json::json!({
                    "id": format!("d{i}"),
                    "timestamp": format!("2022-01-01T00:00:{:02}Z", i),
                    "author": "a",
                    "text": t,
                })
                .to_string()
            })
            .collect();
        parse_corpus(lines.join("\n").as_bytes(), &FieldSchema::default()).unwrap().0
    }

    fn cosine(a: &[f64], b: &[f64]) -> f64 {
        a.iter().zip(b).map(|(x, y)| x * y).sum()
    }

    #[test]
    fn deterministic_and_normalised() {
        let c = corpus(&["the quick brown fox", "the quick brown fox", "jumps"]);
        let (m, dropped) = hash_embed(&c, 64, 7).unwrap();
        assert!(dropped.is_empty());
        assert_eq!(m.row(0), m.row(1));
        for row in m.rows() {
            let n: f64 = row.iter().map(|x| x * x).sum::<f64>().sqrt();
            assert!((n - 1.0).abs() < 1e-9);
        }
        let (again, _) = hash_embed(&c, 64, 7).unwrap();
        assert_eq!(m, again);
    }

    #[test]
    fn tokenless_documents_are_dropped() {
        let c = corpus(&["!!! ???", "words here"]);
        let (m, dropped) = hash_embed(&c, 16, 1).unwrap();
        assert_eq!(dropped, vec!["d0".to_string()]);
        assert_eq!(m.doc_ids(), &["d1".to_string()]);
    }

    #[test]
    fn rejects_tiny_dim() {
        let c = corpus(&["a b"]);
        assert!(matches!(hash_embed(&c, 4, 0), Err(EmbeddingError::DimTooSmall(4))));
    }

    #[test]
    fn disjoint_vocabularies_are_nearly_orthogonal() {
        let a = "quantum qubit entanglement superposition decoherence processor cryogenic \
                 annealing photonic circuit error correction logical gate topology lattice \
                 fidelity readout calibration pulse";
        let b = "harvest tractor irrigation soil compost orchard livestock barley wheat \
                 pasture greenhouse fertilizer seedling drought rainfall farmer cattle \
                 granary plough silo";
        let ok = (0..1000u64)
            .filter(|&seed| {
                let va = hash_vector(a, 256, seed).unwrap();
                let vb = hash_vector(b, 256, seed).unwrap();
                cosine(&va, &vb).abs() < 0.2
            })
            .count();
        assert!(ok >= 990, "only {ok} of 1000 seeds kept |cos| < 0.2");
    }

    #[test]
    fn import_aligns_to_corpus_order() {
        let c = corpus(&["x one", "y two"]);
        let file = "{\"id\":\"d1\",\"vector\":[3.0,4.0]}\n{\"id\":\"d0\",\"vector\":[1.0,2.0]}\n";
        let m = import_embeddings_jsonl(file.as_bytes(), &c).unwrap();
        assert_eq!(m.row(0), &[1.0, 2.0]);
        assert_eq!(m.row(1), &[3.0, 4.0]);
    }

    #[test]
    fn import_errors() {
        let c = corpus(&["x one", "y two"]);
        let missing = "{\"id\":\"d0\",\"vector\":[1.0,2.0]}\n";
        assert!(matches!(
            import_embeddings_jsonl(missing.as_bytes(), &c),
            Err(EmbeddingError::MissingEmbedding(id)) if id == "d1"
        ));
        let long: Vec<String> = (0..384).map(|i| format!("{i}.0")).collect();
        let mismatch = format!(
            "{{\"id\":\"d0\",\"vector\":[1,2,3,4,5]}}\n{{\"id\":\"d1\",\"vector\":[{}]}}\n",
            long.join(",")
        );
        assert!(matches!(
            import_embeddings_jsonl(mismatch.as_bytes(), &c),
            Err(EmbeddingError::DimensionMismatch { expected: 5, got: 384, .. })
        ));
        let bad = "{\"id\":\"d0\",\"vector\":[1.0,null]}\n";
        assert!(matches!(
            import_embeddings_jsonl(bad.as_bytes(), &c),
            Err(EmbeddingError::InvalidValue(_))
        ));
    }

    #[test]
    fn binary_round_trip_is_f32_exact() {
        let c = corpus(&["alpha beta", "gamma delta"]);
        let (m, _) = hash_embed(&c, 32, 3).unwrap();
        let mut buf = Vec::new();
        m.write_binary(&mut buf).unwrap();
        let back = import_embeddings_binary(buf.as_slice(), &c).unwrap();
        for (a, b) in m.data().iter().zip(back.data()) {
            assert_eq!(*a as f32, *b as f32);
        }
    }

    proptest! {
        #[test]
        fn jsonl_round_trip_is_bit_exact(texts in prop::collection::vec("[a-e ]{1,20}[a-e]", 1..8), seed in any::<u64>()) {
            let refs: Vec<&str> = texts.iter().map(String::as_str).collect();
            let c = corpus(&refs);
            let (m, _) = hash_embed(&c, 16, seed).unwrap();
            let c = c.retain(|r| m.doc_ids().contains(&r.id)).unwrap();
            let mut buf = Vec::new();
            m.write_jsonl(&mut buf).unwrap();
            let back = import_embeddings_jsonl(buf.as_slice(), &c).unwrap();
            prop_assert_eq!(back, m);
        }

        #[test]
        fn rows_follow_documents(texts in prop::collection::vec("[a-h]{1,5}( [a-h]{1,5}){0,4}", 2..8), seed in any::<u64>()) {
            let fwd: Vec<&str> = texts.iter().map(String::as_str).collect();
            let rev: Vec<&str> = fwd.iter().rev().copied().collect();
            let (a, _) = hash_embed(&corpus(&fwd), 32, seed).unwrap();
            let (b, _) = hash_embed(&corpus(&rev), 32, seed).unwrap();
            if a.n_rows() == fwd.len() && b.n_rows() == rev.len() {
                for i in 0..fwd.len() {
                    prop_assert_eq!(a.row(i), b.row(fwd.len() - 1 - i));
                }
            }
        }
    }
}
