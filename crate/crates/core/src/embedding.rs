//! Vocabulary-indexed embedding table and the cosine geometry every probe
//! is built on.
//!
//! Rows are stored as `f32` (the on-disk precision of word2vec files); all
//! dot products, norms and means accumulate in `f64`.

use alloc::borrow::ToOwned;
use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use crate::error::{Error, Result};

/// Immutable vocabulary → vector table.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingMatrix {
    vocab: Vec<String>,
    index: BTreeMap<String, usize>,
    dim: usize,
    data: Vec<f32>,
    norms: Vec<f64>,
}

impl EmbeddingMatrix {
    /// Builds a matrix from a token list and a row-major payload of
    /// `vocab.len() * dim` floats.
    pub fn from_rows(vocab: Vec<String>, dim: usize, data: Vec<f32>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidMatrix("dimension must be positive".into()));
        }
        if data.len() != vocab.len() * dim {
            return Err(Error::Dimension {
                expected: vocab.len() * dim,
                found: data.len(),
            });
        }
        let mut index = BTreeMap::new();
        for (i, token) in vocab.iter().enumerate() {
            if token.is_empty() {
                return Err(Error::InvalidMatrix(format!("empty token at row {i}")));
            }
            if index.insert(token.clone(), i).is_some() {
                return Err(Error::DuplicateToken(token.clone()));
            }
        }
        if let Some(pos) = data.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidMatrix(format!(
                "non-finite value in row {} ({})",
                pos / dim,
                vocab[pos / dim]
            )));
        }
        let norms = data.chunks_exact(dim).map(norm_f32).collect();
        Ok(EmbeddingMatrix {
            vocab,
            index,
            dim,
            data,
            norms,
        })
    }

    pub fn len(&self) -> usize {
        self.vocab.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vocab.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn vocab(&self) -> &[String] {
        &self.vocab
    }

    pub fn token(&self, index: usize) -> &str {
        &self.vocab[index]
    }

    pub fn row(&self, index: usize) -> &[f32] {
        &self.data[index * self.dim..(index + 1) * self.dim]
    }

    /// Cached Euclidean norm of row `index`.
    pub fn norm(&self, index: usize) -> f64 {
        self.norms[index]
    }

    /// Row-major payload, `len() * dim()` floats.
    pub fn data(&self) -> &[f32] {
        &self.data
    }

    /// Exact token lookup, no normalization.
    pub fn index_of(&self, token: &str) -> Option<usize> {
        self.index.get(token).copied()
    }

    /// Resolves a word to a row index: spaces become underscores, then an
    /// exact-case match is tried before a lowercase fallback.
    pub fn resolve(&self, word: &str) -> Option<usize> {
        let token = normalize_token(word);
        if token.is_empty() {
            return None;
        }
        self.index_of(&token)
            .or_else(|| self.index_of(&token.to_lowercase()))
    }

    pub fn vector(&self, index: usize) -> WordVector {
        WordVector(self.row(index).iter().map(|&v| v as f64).collect())
    }

    pub fn lookup(&self, word: &str) -> Option<WordVector> {
        self.resolve(word).map(|i| self.vector(i))
    }

    /// Keeps the first `max_vocab` rows (word2vec files are frequency ordered).
    pub fn truncated(mut self, max_vocab: usize) -> Self {
        if max_vocab >= self.len() {
            return self;
        }
        for token in self.vocab.drain(max_vocab..) {
            self.index.remove(&token);
        }
        self.data.truncate(max_vocab * self.dim);
        self.norms.truncate(max_vocab);
        self
    }

    /// Resolves every word, failing on the first one that is absent.
    pub fn resolve_all<S: AsRef<str>>(&self, words: &[S]) -> Result<Vec<usize>> {
        words
            .iter()
            .map(|w| {
                self.resolve(w.as_ref())
                    .ok_or_else(|| Error::MissingWord(w.as_ref().to_owned()))
            })
            .collect()
    }
}

/// Replaces internal spaces with underscores (Google News phrase convention).
pub fn normalize_token(word: &str) -> String {
    word.trim().split_whitespace().collect::<Vec<_>>().join("_")
}

/// A single embedding vector in `f64`.
#[derive(Debug, Clone, PartialEq)]
pub struct WordVector(Vec<f64>);

impl WordVector {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::EmptySet("vector has no components"));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidMatrix("non-finite vector component".into()));
        }
        Ok(WordVector(values))
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn norm(&self) -> f64 {
        libm::sqrt(self.0.iter().map(|v| v * v).sum())
    }

    pub fn scaled(&self, factor: f64) -> WordVector {
        WordVector(self.0.iter().map(|v| v * factor).collect())
    }
}

impl From<&[f32]> for WordVector {
    fn from(row: &[f32]) -> Self {
        WordVector(row.iter().map(|&v| v as f64).collect())
    }
}

fn norm_f32(row: &[f32]) -> f64 {
    libm::sqrt(row.iter().map(|&v| (v as f64) * (v as f64)).sum())
}

fn dot_mixed(row: &[f32], query: &[f64]) -> f64 {
    row.iter().zip(query).map(|(&a, &b)| a as f64 * b).sum()
}

/// Cosine similarity `a·b / (‖a‖‖b‖)`, clamped to `[-1, 1]`.
pub fn cosine(a: &WordVector, b: &WordVector) -> Result<f64> {
    if a.dim() != b.dim() {
        return Err(Error::Dimension {
            expected: a.dim(),
            found: b.dim(),
        });
    }
    let (na, nb) = (a.norm(), b.norm());
    if na == 0.0 || nb == 0.0 {
        return Err(Error::DegenerateVector);
    }
    let dot: f64 = a.0.iter().zip(&b.0).map(|(x, y)| x * y).sum();
    Ok((dot / (na * nb)).clamp(-1.0, 1.0))
}

/// Cosine between two stored rows.
pub fn row_cosine(matrix: &EmbeddingMatrix, i: usize, j: usize) -> Result<f64> {
    let (ni, nj) = (matrix.norm(i), matrix.norm(j));
    if ni == 0.0 || nj == 0.0 {
        return Err(Error::DegenerateVector);
    }
    let dot: f64 = matrix
        .row(i)
        .iter()
        .zip(matrix.row(j))
        .map(|(&a, &b)| a as f64 * b as f64)
        .sum();
    Ok((dot / (ni * nj)).clamp(-1.0, 1.0))
}

/// Arithmetic mean of the raw (unnormalized) vectors of `words`.
pub fn centroid<S: AsRef<str>>(matrix: &EmbeddingMatrix, words: &[S]) -> Result<WordVector> {
    if words.is_empty() {
        return Err(Error::EmptySet("centroid of an empty word list"));
    }
    let indices = matrix.resolve_all(words)?;
    centroid_of_indices(matrix, &indices)
}

/// Mean of the given rows. Rows are summed in ascending index order so the
/// result does not depend on the order of `indices`.
pub fn centroid_of_indices(matrix: &EmbeddingMatrix, indices: &[usize]) -> Result<WordVector> {
    if indices.is_empty() {
        return Err(Error::EmptySet("centroid of an empty word list"));
    }
    let mut sorted = indices.to_vec();
    sorted.sort_unstable();
    let mut sum = alloc::vec![0.0f64; matrix.dim()];
    for &i in &sorted {
        for (acc, &v) in sum.iter_mut().zip(matrix.row(i)) {
            *acc += v as f64;
        }
    }
    let k = sorted.len() as f64;
    Ok(WordVector(sum.into_iter().map(|s| s / k).collect()))
}

/// Candidate set for nearest-neighbor ranking.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Pool {
    FullVocab,
    /// The first `k` vocabulary rows.
    Prefix(usize),
    /// Explicit rows, kept sorted and deduplicated.
    Subset(Vec<usize>),
}

impl Pool {
    pub fn from_tokens<S: AsRef<str>>(matrix: &EmbeddingMatrix, tokens: &[S]) -> Result<Pool> {
        let mut indices = matrix.resolve_all(tokens)?;
        indices.sort_unstable();
        indices.dedup();
        Ok(Pool::Subset(indices))
    }

    pub fn size(&self, matrix: &EmbeddingMatrix) -> usize {
        match self {
            Pool::FullVocab => matrix.len(),
            Pool::Prefix(k) => (*k).min(matrix.len()),
            Pool::Subset(v) => v.len(),
        }
    }

    /// Pool rows in ascending vocabulary order.
    pub fn indices(&self, matrix: &EmbeddingMatrix) -> Vec<usize> {
        match self {
            Pool::FullVocab => (0..matrix.len()).collect(),
            Pool::Prefix(k) => (0..(*k).min(matrix.len())).collect(),
            Pool::Subset(v) => v.clone(),
        }
    }

    pub fn describe(&self) -> String {
        match self {
            Pool::FullVocab => "full-vocab".into(),
            Pool::Prefix(k) => format!("prefix:{k}"),
            Pool::Subset(v) => format!("subset:{}", v.len()),
        }
    }
}

/// Cosine of every pool row to `query`, paired with its row index, in
/// ascending index order. Zero-norm rows score 0.
pub fn pool_similarities(
    matrix: &EmbeddingMatrix,
    query: &WordVector,
    pool: &Pool,
) -> Result<Vec<(usize, f64)>> {
    if query.dim() != matrix.dim() {
        return Err(Error::Dimension {
            expected: matrix.dim(),
            found: query.dim(),
        });
    }
    let qn = query.norm();
    if qn == 0.0 {
        return Err(Error::DegenerateVector);
    }
    Ok(pool
        .indices(matrix)
        .into_iter()
        .map(|i| (i, row_similarity(matrix, query.as_slice(), qn, i)))
        .collect())
}

fn row_similarity(matrix: &EmbeddingMatrix, query: &[f64], query_norm: f64, row: usize) -> f64 {
    let n = matrix.norm(row);
    if n == 0.0 {
        0.0
    } else {
        (dot_mixed(matrix.row(row), query) / (n * query_norm)).clamp(-1.0, 1.0)
    }
}

/// Similarity of one stored row to `query`, computed exactly as
/// [`pool_similarities`] does.
pub fn similarity_to_row(matrix: &EmbeddingMatrix, query: &WordVector, row: usize) -> Result<f64> {
    if query.dim() != matrix.dim() {
        return Err(Error::Dimension {
            expected: matrix.dim(),
            found: query.dim(),
        });
    }
    let qn = query.norm();
    if qn == 0.0 {
        return Err(Error::DegenerateVector);
    }
    Ok(row_similarity(matrix, query.as_slice(), qn, row))
}

/// Pool rows ordered by descending similarity to `query`; ties go to the
/// lower vocabulary index.
pub fn rank_indices(
    matrix: &EmbeddingMatrix,
    query: &WordVector,
    pool: &Pool,
) -> Result<Vec<(usize, f64)>> {
    let mut ranked = pool_similarities(matrix, query, pool)?;
    ranked.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
    Ok(ranked)
}

pub fn rank_by_cosine<'m>(
    matrix: &'m EmbeddingMatrix,
    query: &WordVector,
    pool: &Pool,
) -> Result<Vec<(&'m str, f64)>> {
    Ok(rank_indices(matrix, query, pool)?
        .into_iter()
        .map(|(i, s)| (matrix.token(i), s))
        .collect())
}

/// 1-based position `row` would take in the ranking of `sims` (which must
/// contain `(row, similarity)` when `row` is a pool member). Rows outside the
/// pool get the position they would occupy if inserted.
pub fn rank_of(sims: &[(usize, f64)], row: usize, similarity: f64) -> usize {
    1 + sims
        .iter()
        .filter(|&&(j, s)| j != row && (s > similarity || (s == similarity && j < row)))
        .count()
}
