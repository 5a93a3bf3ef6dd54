//! Document retrieval with a deterministic hashed character n-gram embedder,
//! exact cosine top-k search, and token-overlap precision/recall/F-measure.

use std::collections::{BTreeMap, HashMap, HashSet};

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use thiserror::Error;

use crate::Scalar;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RetrievalError {
    #[error("bad embedder configuration: {0}")]
    BadConfig(String),
    #[error("vector dimensions differ: {0} vs {1}")]
    DimensionMismatch(usize, usize),
    #[error("document id `{0}` already indexed")]
    DuplicateId(String),
    #[error("document `{0}` has empty text")]
    EmptyText(String),
    #[error("index is empty")]
    EmptyIndex,
    #[error("k must be at least 1")]
    BadK,
    #[error("embedder `{found}` does not match index embedder `{expected}`")]
    EmbedderMismatch { expected: String, found: String },
    #[error("corpus line {line}: {reason}")]
    BadCorpus { line: usize, reason: String },
}

pub type Result<T, E = RetrievalError> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DocRecord {
    pub id: String,
    pub text: String,
    #[serde(default)]
    pub metadata: BTreeMap<String, String>,
}

impl DocRecord {
    pub fn new(id: impl Into<String>, text: impl Into<String>) -> Self {
        DocRecord {
            id: id.into(),
            text: text.into(),
            metadata: BTreeMap::new(),
        }
    }
}

/// Reads a JSON-lines corpus of `{id, text, metadata}` objects.
pub fn load_corpus(jsonl: &str) -> Result<Vec<DocRecord>> {
    jsonl
        .lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| {
            serde_json::from_str(l).map_err(|e| RetrievalError::BadCorpus {
                line: i + 1,
                reason: e.to_string(),
            })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingVector<T> {
    pub values: Vec<T>,
}

impl<T: Scalar> EmbeddingVector<T> {
    pub fn dimension(&self) -> usize {
        self.values.len()
    }

    pub fn norm(&self) -> T {
        self.values
            .iter()
            .fold(T::zero(), |acc, &v| acc + v * v)
            .sqrt()
    }

    pub fn is_zero(&self) -> bool {
        self.values.iter().all(|v| v.is_zero())
    }
}

/// Cosine similarity; 0 when either vector is zero.
pub fn cosine<T: Scalar>(a: &EmbeddingVector<T>, b: &EmbeddingVector<T>) -> Result<T> {
    if a.dimension() != b.dimension() {
        return Err(RetrievalError::DimensionMismatch(
            a.dimension(),
            b.dimension(),
        ));
    }
    let (na, nb) = (a.norm(), b.norm());
    if na.is_zero() || nb.is_zero() {
        return Ok(T::zero());
    }
    let dot = a
        .values
        .iter()
        .zip(&b.values)
        .fold(T::zero(), |acc, (&x, &y)| acc + x * y);
    Ok((dot / (na * nb)).max(-T::one()).min(T::one()))
}

/// Maps text to a vector. Implementations must be deterministic; the
/// fingerprint identifies the configuration so indexes can refuse queries
/// embedded differently.
pub trait Embedder<T> {
    fn embed(&self, text: &str) -> EmbeddingVector<T>;
    fn fingerprint(&self) -> String;
    fn dimension(&self) -> usize;
}

/// Lowercases, collapses whitespace runs to one space and trims.
pub fn normalize_text(text: &str) -> String {
    text.split_whitespace()
        .map(str::to_lowercase)
        .collect::<Vec<_>>()
        .join(" ")
}

const FNV_OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
const FNV_PRIME: u64 = 0x0000_0100_0000_01b3;

/// Feature hashing of character n-grams.
///
/// Each n-gram of the normalized text is hashed with 64-bit FNV-1a, starting
/// from the standard offset basis and first absorbing the eight little-endian
/// bytes of `seed`, then the n-gram's UTF-8 bytes. The bucket is
/// `hash mod dimension`; bucket counts are L2-normalized. Texts shorter than
/// `n` characters contribute a single gram (the whole text).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HashedNgramEmbedder {
    dimension: usize,
    ngram: usize,
    seed: u64,
}

impl Default for HashedNgramEmbedder {
    fn default() -> Self {
        HashedNgramEmbedder {
            dimension: 256,
            ngram: 3,
            seed: 0,
        }
    }
}

impl HashedNgramEmbedder {
    pub fn new(dimension: usize, ngram: usize, seed: u64) -> Result<Self> {
        if dimension < 8 {
            return Err(RetrievalError::BadConfig(format!(
                "dimension {dimension} < 8"
            )));
        }
        if ngram == 0 {
            return Err(RetrievalError::BadConfig("n-gram length 0".into()));
        }
        Ok(HashedNgramEmbedder {
            dimension,
            ngram,
            seed,
        })
    }

    pub fn ngram(&self) -> usize {
        self.ngram
    }

    /// The n-grams of the normalized text, in order, with repeats.
    pub fn grams(&self, text: &str) -> Vec<String> {
        let chars: Vec<char> = normalize_text(text).chars().collect();
        if chars.is_empty() {
            return Vec::new();
        }
        if chars.len() < self.ngram {
            return vec![chars.iter().collect()];
        }
        chars
            .windows(self.ngram)
            .map(|w| w.iter().collect())
            .collect()
    }

    pub fn bucket(&self, gram: &str) -> usize {
        let mut h = FNV_OFFSET;
        for b in self.seed.to_le_bytes().iter().chain(gram.as_bytes()) {
            h ^= *b as u64;
            h = h.wrapping_mul(FNV_PRIME);
        }
        (h % self.dimension as u64) as usize
    }
}

impl<T: Scalar> Embedder<T> for HashedNgramEmbedder {
    fn embed(&self, text: &str) -> EmbeddingVector<T> {
        let mut counts = vec![0u64; self.dimension];
        for g in self.grams(text) {
            counts[self.bucket(&g)] += 1;
        }
        let norm = (counts.iter().map(|&c| (c * c) as f64).sum::<f64>()).sqrt();
        let values = counts
            .iter()
            .map(|&c| {
                if norm > 0.0 {
                    T::lit(c as f64 / norm)
                } else {
                    T::zero()
                }
            })
            .collect();
        EmbeddingVector { values }
    }

    fn fingerprint(&self) -> String {
        format!(
            "fnv1a64-char{}-dim{}-seed{}",
            self.ngram, self.dimension, self.seed
        )
    }

    fn dimension(&self) -> usize {
        self.dimension
    }
}

#[derive(Debug, Clone)]
pub struct VectorIndex<T> {
    docs: Vec<DocRecord>,
    vectors: Vec<EmbeddingVector<T>>,
    fingerprint: String,
    ids: HashSet<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Hit<'a, T> {
    pub doc: &'a DocRecord,
    pub score: T,
}

impl<T: Scalar> VectorIndex<T> {
    pub fn new(embedder: &dyn Embedder<T>) -> Self {
        VectorIndex {
            docs: Vec::new(),
            vectors: Vec::new(),
            fingerprint: embedder.fingerprint(),
            ids: HashSet::new(),
        }
    }

    pub fn fingerprint(&self) -> &str {
        &self.fingerprint
    }

    pub fn len(&self) -> usize {
        self.docs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.docs.is_empty()
    }

    pub fn docs(&self) -> &[DocRecord] {
        &self.docs
    }

    pub fn vectors(&self) -> &[EmbeddingVector<T>] {
        &self.vectors
    }

    fn check(&self, embedder: &dyn Embedder<T>) -> Result<()> {
        let found = embedder.fingerprint();
        if found != self.fingerprint {
            return Err(RetrievalError::EmbedderMismatch {
                expected: self.fingerprint.clone(),
                found,
            });
        }
        Ok(())
    }

    /// Adds documents; on error nothing from this call is added.
    pub fn add(
        &mut self,
        embedder: &dyn Embedder<T>,
        docs: impl IntoIterator<Item = DocRecord>,
    ) -> Result<()> {
        self.check(embedder)?;
        let docs: Vec<DocRecord> = docs.into_iter().collect();
        let mut fresh = HashSet::new();
        for d in &docs {
            if d.text.trim().is_empty() {
                return Err(RetrievalError::EmptyText(d.id.clone()));
            }
            if self.ids.contains(&d.id) || !fresh.insert(d.id.clone()) {
                return Err(RetrievalError::DuplicateId(d.id.clone()));
            }
        }
        for d in docs {
            self.vectors.push(embedder.embed(&d.text));
            self.ids.insert(d.id.clone());
            self.docs.push(d);
        }
        Ok(())
    }

    /// Exact scan: descending cosine, ties by ascending id.
    pub fn search(
        &self,
        embedder: &dyn Embedder<T>,
        query: &str,
        k: usize,
    ) -> Result<Vec<Hit<'_, T>>> {
        self.check(embedder)?;
        self.search_vector(&embedder.embed(query), k)
    }

    pub fn search_vector(&self, query: &EmbeddingVector<T>, k: usize) -> Result<Vec<Hit<'_, T>>> {
        if k == 0 {
            return Err(RetrievalError::BadK);
        }
        if self.docs.is_empty() {
            return Err(RetrievalError::EmptyIndex);
        }
        let mut scored: Vec<(T, usize)> = self
            .vectors
            .iter()
            .enumerate()
            .map(|(i, v)| cosine(query, v).map(|s| (s, i)))
            .collect::<Result<_>>()?;
        scored.sort_by(|a, b| {
            b.0.partial_cmp(&a.0)
                .unwrap_or(std::cmp::Ordering::Equal)
                .then_with(|| self.docs[a.1].id.cmp(&self.docs[b.1].id))
        });
        Ok(scored
            .into_iter()
            .take(k)
            .map(|(score, i)| Hit {
                doc: &self.docs[i],
                score,
            })
            .collect())
    }
}

/// Default number of documents returned per query.
pub const DEFAULT_K: usize = 2;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EvalScores<T> {
    pub precision: T,
    pub recall: T,
    pub f_measure: T,
}

/// Lowercased alphanumeric runs.
pub fn tokenize(text: &str) -> Vec<String> {
    text.split(|c: char| !c.is_alphanumeric())
        .filter(|t| !t.is_empty())
        .map(str::to_lowercase)
        .collect()
}

/// Unigram multiset overlap between a response and a reference.
pub fn prf_scores<T: Scalar>(response: &str, reference: &str) -> EvalScores<T> {
    let (resp, refr) = (tokenize(response), tokenize(reference));
    match (resp.is_empty(), refr.is_empty()) {
        (true, true) => {
            return EvalScores {
                precision: T::one(),
                recall: T::one(),
                f_measure: T::one(),
            }
        }
        (true, false) | (false, true) => {
            return EvalScores {
                precision: T::zero(),
                recall: T::zero(),
                f_measure: T::zero(),
            }
        }
        _ => {}
    }
    let mut available: HashMap<&str, usize> = HashMap::new();
    for t in &refr {
        *available.entry(t).or_default() += 1;
    }
    let mut overlap = 0usize;
    for t in &resp {
        if let Some(n) = available.get_mut(t.as_str()) {
            if *n > 0 {
                *n -= 1;
                overlap += 1;
            }
        }
    }
    let p = T::from_count(overlap) / T::from_count(resp.len());
    let r = T::from_count(overlap) / T::from_count(refr.len());
    let f = if p + r > T::zero() {
        T::lit(2.0) * p * r / (p + r)
    } else {
        T::zero()
    };
    EvalScores {
        precision: p,
        recall: r,
        f_measure: f,
    }
}

/// Query text used to look up precautions for an alert.
pub fn alert_query(kind: &str, severity: &str) -> String {
    let topic = match kind {
        "DC_MOPUP" => "drought code deep fuel dryness mop-up",
        "FFMC_IGNITION" => "fine fuel moisture ignition potential",
        "ISI_SPREAD" => "initial spread index rate of spread wind",
        "DMC" => "duff moisture fuel consumption",
        "BUI" => "buildup index available fuel",
        "FWI" => "fire weather index overall fire danger",
        other => other,
    };
    format!("{topic} {severity}")
}

#[derive(Debug, Clone, PartialEq, Eq, Deserialize)]
pub struct EvalCase {
    pub query: String,
    pub reference: String,
}

/// Per-case report: top hit, its cosine, and P/R/F of the top hit's text
/// against the reference answer.
pub fn evaluate_cases<T: Scalar>(
    index: &VectorIndex<T>,
    embedder: &dyn Embedder<T>,
    cases: &[EvalCase],
) -> Result<Value> {
    let mut out = Vec::new();
    for c in cases {
        let hits = index.search(embedder, &c.query, 1)?;
        let top = &hits[0];
        let s = prf_scores::<T>(&top.doc.text, &c.reference);
        out.push(json!({
            "query": c.query,
            "top_id": top.doc.id,
            "cosine": top.score.as_f64(),
            "precision": s.precision.as_f64(),
            "recall": s.recall.as_f64(),
            "f_measure": s.f_measure.as_f64(),
        }));
    }
    Ok(json!({
        "scoring": "unigram multiset overlap of lowercased alphanumeric tokens",
        "embedder": index.fingerprint(),
        "cases": out,
    }))
}
