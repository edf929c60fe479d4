//! Lexical retrieval over chunks.
//!
//! [`Index`] scores chunks with Okapi BM25 (`k1 = 1.2`, `b = 0.75`). Terms
//! from a chunk's heading trail count twice, so a chunk whose headings name
//! the query topic outranks one that merely mentions it. Ties are broken by
//! ascending chunk ID, which keeps rankings reproducible.
//!
//! [`EmbeddingIndex`] ranks by cosine similarity over vectors from any
//! [`Embedder`]; no embedding model ships with the crate.

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::resolver::{Chunk, ChunkMethod};

pub const INDEX_VERSION: u32 = 1;
pub const BM25_K1: f64 = 1.2;
pub const BM25_B: f64 = 0.75;
pub const TRAIL_WEIGHT: u32 = 2;

#[derive(Debug, thiserror::Error)]
pub enum IndexError {
    #[error("cannot build an index from zero chunks")]
    Empty,
    #[error("duplicate chunk id {0}")]
    DuplicateChunk(String),
    #[error("index file {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("index file {path} is malformed: {message}")]
    Format { path: PathBuf, message: String },
    #[error("index version {found} is not supported (expected {INDEX_VERSION})")]
    Version { found: u32 },
}

/// Lowercased alphanumeric runs.
pub fn tokenize(text: &str) -> Vec<String> {
    text.split(|c: char| !c.is_alphanumeric())
        .filter(|t| !t.is_empty())
        .map(str::to_lowercase)
        .collect()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct IndexedChunk {
    pub chunk_id: String,
    pub doc_id: String,
    pub heading_trail: Vec<String>,
    pub body: String,
    pub method: ChunkMethod,
}

impl From<&Chunk> for IndexedChunk {
    fn from(c: &Chunk) -> Self {
        IndexedChunk {
            chunk_id: c.chunk_id.clone(),
            doc_id: c.doc_id.clone(),
            heading_trail: c.heading_trail.clone(),
            body: c.body.clone(),
            method: c.method,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoredChunk {
    pub chunk_id: String,
    pub score: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct RetrievalResult {
    pub ranked: Vec<ScoredChunk>,
}

impl RetrievalResult {
    pub fn ids(&self) -> impl Iterator<Item = &str> {
        self.ranked.iter().map(|s| s.chunk_id.as_str())
    }
}

pub trait Retriever: Sync {
    fn retrieve(&self, query: &str, k: usize) -> RetrievalResult;
    /// Every stored chunk, sorted by chunk ID.
    fn chunks(&self) -> &[IndexedChunk];

    fn chunk(&self, chunk_id: &str) -> Option<&IndexedChunk> {
        let chunks = self.chunks();
        chunks
            .binary_search_by(|c| c.chunk_id.as_str().cmp(chunk_id))
            .ok()
            .map(|n| &chunks[n])
    }
}

#[derive(Debug, Clone)]
pub struct Index {
    chunks: Vec<IndexedChunk>,
    postings: BTreeMap<String, Vec<(u32, u32)>>,
    lengths: Vec<u32>,
    avg_len: f64,
}

#[derive(Serialize, Deserialize)]
struct IndexFile {
    version: u32,
    k1: f64,
    b: f64,
    trail_weight: u32,
    chunks: Vec<IndexedChunk>,
}

impl Index {
    pub fn build(chunks: &[Chunk]) -> Result<Index, IndexError> {
        Self::from_indexed(chunks.iter().map(IndexedChunk::from).collect())
    }

    fn from_indexed(mut chunks: Vec<IndexedChunk>) -> Result<Index, IndexError> {
        if chunks.is_empty() {
            return Err(IndexError::Empty);
        }
        chunks.sort_by(|a, b| a.chunk_id.cmp(&b.chunk_id));
        if let Some(w) = chunks.windows(2).find(|w| w[0].chunk_id == w[1].chunk_id) {
            return Err(IndexError::DuplicateChunk(w[0].chunk_id.clone()));
        }
        let mut postings: BTreeMap<String, Vec<(u32, u32)>> = BTreeMap::new();
        let mut lengths = Vec::with_capacity(chunks.len());
        for (n, chunk) in chunks.iter().enumerate() {
            let weights = term_weights(chunk);
            lengths.push(weights.values().sum());
            for (term, tf) in weights {
                postings.entry(term).or_default().push((n as u32, tf));
            }
        }
        let avg_len = lengths.iter().map(|&l| f64::from(l)).sum::<f64>() / chunks.len() as f64;
        Ok(Index {
            chunks,
            postings,
            lengths,
            avg_len,
        })
    }

    pub fn len(&self) -> usize {
        self.chunks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.chunks.is_empty()
    }

    pub fn avg_len(&self) -> f64 {
        self.avg_len
    }

    /// Weighted term frequency of `term` in `chunk_id`.
    pub fn term_frequency(&self, term: &str, chunk_id: &str) -> u32 {
        let Ok(n) = self.chunks.binary_search_by(|c| c.chunk_id.as_str().cmp(chunk_id)) else {
            return 0;
        };
        self.postings
            .get(term)
            .and_then(|list| list.iter().find(|(c, _)| *c as usize == n))
            .map_or(0, |&(_, tf)| tf)
    }

    /// BM25 score of every chunk matching at least one query term.
    pub fn scores(&self, query: &str) -> Vec<(usize, f64)> {
        let terms: BTreeSet<String> = tokenize(query).into_iter().collect();
        let n = self.chunks.len() as f64;
        let mut acc: BTreeMap<usize, f64> = BTreeMap::new();
        for term in &terms {
            let Some(list) = self.postings.get(term) else { continue };
            let df = list.len() as f64;
            let idf = (1.0 + (n - df + 0.5) / (df + 0.5)).ln();
            for &(c, tf) in list {
                let tf = f64::from(tf);
                let len = f64::from(self.lengths[c as usize]);
                let norm = BM25_K1 * (1.0 - BM25_B + BM25_B * len / self.avg_len);
                *acc.entry(c as usize).or_default() += idf * tf * (BM25_K1 + 1.0) / (tf + norm);
            }
        }
        acc.into_iter().filter(|&(_, s)| s > 0.0).collect()
    }

    pub fn save(&self, path: &Path) -> Result<(), IndexError> {
        let file = IndexFile {
            version: INDEX_VERSION,
            k1: BM25_K1,
            b: BM25_B,
            trail_weight: TRAIL_WEIGHT,
            chunks: self.chunks.clone(),
        };
        let text = serde_json::to_string_pretty(&file).expect("index serializes");
        fs::write(path, text).map_err(|source| IndexError::Io {
            path: path.to_path_buf(),
            source,
        })
    }

    /// Loads a saved index; postings are rebuilt from the stored chunks.
    pub fn load(path: &Path) -> Result<Index, IndexError> {
        let text = fs::read_to_string(path).map_err(|source| IndexError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        let value: serde_json::Value = serde_json::from_str(&text).map_err(|e| IndexError::Format {
            path: path.to_path_buf(),
            message: e.to_string(),
        })?;
        let found = value.get("version").and_then(|v| v.as_u64()).unwrap_or(0) as u32;
        if found != INDEX_VERSION {
            return Err(IndexError::Version { found });
        }
        let file: IndexFile = serde_json::from_value(value).map_err(|e| IndexError::Format {
            path: path.to_path_buf(),
            message: e.to_string(),
        })?;
        Self::from_indexed(file.chunks)
    }
}

fn term_weights(chunk: &IndexedChunk) -> BTreeMap<String, u32> {
    let mut weights: BTreeMap<String, u32> = BTreeMap::new();
    for heading in &chunk.heading_trail {
        for t in tokenize(heading) {
            *weights.entry(t).or_default() += TRAIL_WEIGHT;
        }
    }
    for t in tokenize(&chunk.body) {
        *weights.entry(t).or_default() += 1;
    }
    weights
}

fn rank(mut scored: Vec<(usize, f64)>, chunks: &[IndexedChunk], k: usize) -> RetrievalResult {
    // chunks are sorted by id, so index order is id order
    scored.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
    scored.truncate(k);
    RetrievalResult {
        ranked: scored
            .into_iter()
            .map(|(i, score)| ScoredChunk {
                chunk_id: chunks[i].chunk_id.clone(),
                score,
            })
            .collect(),
    }
}

impl Retriever for Index {
    fn retrieve(&self, query: &str, k: usize) -> RetrievalResult {
        rank(self.scores(query), &self.chunks, k)
    }

    fn chunks(&self) -> &[IndexedChunk] {
        &self.chunks
    }
}

/// Maps text to a dense vector.
pub trait Embedder: Sync {
    fn embed(&self, text: &str) -> Vec<f32>;
}

/// Cosine-similarity ranking over embedded chunks. The embedded text is the
/// heading trail joined with ` > `, a blank line, then the body.
pub struct EmbeddingIndex<E> {
    embedder: E,
    chunks: Vec<IndexedChunk>,
    vectors: Vec<Vec<f32>>,
}

impl<E: Embedder> EmbeddingIndex<E> {
    pub fn build(chunks: &[Chunk], embedder: E) -> Result<Self, IndexError> {
        if chunks.is_empty() {
            return Err(IndexError::Empty);
        }
        let mut seen = HashSet::new();
        let mut stored: Vec<IndexedChunk> = Vec::with_capacity(chunks.len());
        for c in chunks {
            if !seen.insert(c.chunk_id.as_str()) {
                return Err(IndexError::DuplicateChunk(c.chunk_id.clone()));
            }
            stored.push(c.into());
        }
        stored.sort_by(|a, b| a.chunk_id.cmp(&b.chunk_id));
        let vectors = stored
            .iter()
            .map(|c| embedder.embed(&format!("{}\n\n{}", c.heading_trail.join(" > "), c.body)))
            .collect();
        Ok(EmbeddingIndex {
            embedder,
            chunks: stored,
            vectors,
        })
    }
}

fn cosine(a: &[f32], b: &[f32]) -> f64 {
    let dot: f64 = a.iter().zip(b).map(|(x, y)| f64::from(*x) * f64::from(*y)).sum();
    let na: f64 = a.iter().map(|x| f64::from(*x).powi(2)).sum::<f64>().sqrt();
    let nb: f64 = b.iter().map(|x| f64::from(*x).powi(2)).sum::<f64>().sqrt();
    if na == 0.0 || nb == 0.0 {
        0.0
    } else {
        dot / (na * nb)
    }
}

impl<E: Embedder> Retriever for EmbeddingIndex<E> {
    fn retrieve(&self, query: &str, k: usize) -> RetrievalResult {
        let q = self.embedder.embed(query);
        let scored = self
            .vectors
            .iter()
            .enumerate()
            .map(|(i, v)| (i, cosine(&q, v)))
            .filter(|&(_, s)| s > 0.0)
            .collect();
        rank(scored, &self.chunks, k)
    }

    fn chunks(&self) -> &[IndexedChunk] {
        &self.chunks
    }
}
