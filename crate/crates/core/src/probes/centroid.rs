//! Full-vector baseline: a word is predicted positive when it sits among the
//! `n` pool words closest (by cosine) to the centroid of the training
//! positives.

use alloc::vec::Vec;

use crate::dataset::{Label, PropertyDataset};
use crate::embedding::{self, EmbeddingMatrix, Pool, WordVector};
use crate::error::{Error, Result};
use crate::evaluation::metrics::{f1, ConfusionCounts};

#[derive(Debug, Clone, PartialEq)]
pub struct CentroidModel {
    pub centroid: WordVector,
    /// Neighborhood size, `1 ≤ n ≤ |pool|`.
    pub n: usize,
    pub pool: Pool,
}

/// Centroid of `train_positives`; an `n` larger than the pool is clamped to
/// the pool size.
pub fn fit_centroid<S: AsRef<str>>(
    matrix: &EmbeddingMatrix,
    train_positives: &[S],
    n: usize,
    pool: &Pool,
) -> Result<CentroidModel> {
    if n == 0 {
        return Err(Error::InvalidArgument("n must be at least 1".into()));
    }
    let pool_size = pool.size(matrix);
    if pool_size == 0 {
        return Err(Error::EmptySet("candidate pool is empty"));
    }
    Ok(CentroidModel {
        centroid: embedding::centroid(matrix, train_positives)?,
        n: n.min(pool_size),
        pool: pool.clone(),
    })
}

impl CentroidModel {
    /// 1-based rank of `row` in the pool ordering by similarity to the
    /// centroid.
    pub fn rank_of_row(&self, matrix: &EmbeddingMatrix, row: usize) -> Result<usize> {
        rank_against(matrix, &self.centroid, &self.pool, &[row]).map(|r| r[0])
    }

    pub fn rank(&self, matrix: &EmbeddingMatrix, word: &str) -> Result<usize> {
        let row = matrix
            .resolve(word)
            .ok_or_else(|| Error::MissingWord(word.into()))?;
        self.rank_of_row(matrix, row)
    }

    pub fn predict(&self, matrix: &EmbeddingMatrix, word: &str) -> Result<bool> {
        Ok(self.rank(matrix, word)? <= self.n)
    }
}

pub fn predict_centroid(model: &CentroidModel, matrix: &EmbeddingMatrix, word: &str) -> Result<bool> {
    model.predict(matrix, word)
}

/// Ranks of `rows` against one query, sharing a single pass over the pool.
pub(crate) fn rank_against(
    matrix: &EmbeddingMatrix,
    query: &WordVector,
    pool: &Pool,
    rows: &[usize],
) -> Result<Vec<usize>> {
    let sims = embedding::pool_similarities(matrix, query, pool)?;
    rows.iter()
        .map(|&row| {
            let s = embedding::similarity_to_row(matrix, query, row)?;
            Ok(embedding::rank_of(&sims, row, s))
        })
        .collect()
}

/// Leave-one-out ranks: for each item, the rank of its row against the
/// centroid of all *other* positives.
pub fn loo_ranks(
    matrix: &EmbeddingMatrix,
    items: &[(usize, Label)],
    pool: &Pool,
) -> Result<Vec<usize>> {
    let positives: Vec<usize> = items
        .iter()
        .filter(|(_, l)| l.is_positive())
        .map(|&(r, _)| r)
        .collect();
    let mut shared: Option<Vec<(usize, f64)>> = None;
    let mut shared_query: Option<WordVector> = None;
    let mut ranks = Vec::with_capacity(items.len());
    for (pos, &(row, label)) in items.iter().enumerate() {
        if label.is_positive() {
            ranks.push(loo_positive_rank(matrix, items, pos, pool)?);
        } else {
            if shared.is_none() {
                if positives.is_empty() {
                    return Err(Error::DegenerateFold("no positive examples".into()));
                }
                let q = embedding::centroid_of_indices(matrix, &positives)?;
                shared = Some(embedding::pool_similarities(matrix, &q, pool)?);
                shared_query = Some(q);
            }
            let (sims, q) = (shared.as_ref().unwrap(), shared_query.as_ref().unwrap());
            let s = embedding::similarity_to_row(matrix, q, row)?;
            ranks.push(embedding::rank_of(sims, row, s));
        }
    }
    Ok(ranks)
}

/// Rank of the positive item at `held_out` against the centroid of the
/// remaining positives.
pub fn loo_positive_rank(
    matrix: &EmbeddingMatrix,
    items: &[(usize, Label)],
    held_out: usize,
    pool: &Pool,
) -> Result<usize> {
    let train: Vec<usize> = items
        .iter()
        .enumerate()
        .filter(|&(i, (_, l))| i != held_out && l.is_positive())
        .map(|(_, &(r, _))| r)
        .collect();
    if train.is_empty() {
        return Err(Error::DegenerateFold(alloc::format!(
            "no training positives when holding out {}",
            matrix.token(items[held_out].0)
        )));
    }
    let q = embedding::centroid_of_indices(matrix, &train)?;
    rank_against(matrix, &q, pool, &[items[held_out].0]).map(|r| r[0])
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepPoint {
    pub n: usize,
    pub counts: ConfusionCounts,
    pub f1: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult {
    pub best_n: usize,
    pub best_f1: f64,
    pub curve: Vec<SweepPoint>,
}

/// `100, 200, …, 1000`.
pub fn default_n_grid() -> Vec<usize> {
    (1..=10).map(|k| k * 100).collect()
}

fn check_grid(n_values: &[usize]) -> Result<()> {
    if n_values.is_empty() {
        return Err(Error::InvalidArgument("empty n grid".into()));
    }
    if n_values.contains(&0) {
        return Err(Error::InvalidArgument("n values must be at least 1".into()));
    }
    Ok(())
}

/// Scores every grid point from precomputed (truth, rank) pairs. Grid points
/// beyond the pool size behave like `n = |pool|`. The best point is the
/// highest F1, smallest `n` on ties.
pub fn sweep_from_ranks(
    outcomes: &[(Label, usize)],
    pool_size: usize,
    n_values: &[usize],
) -> Result<SweepResult> {
    check_grid(n_values)?;
    let curve: Vec<SweepPoint> = n_values
        .iter()
        .map(|&n| {
            let n_eff = n.min(pool_size);
            let mut counts = ConfusionCounts::default();
            for &(truth, rank) in outcomes {
                counts.record(truth.is_positive(), rank <= n_eff);
            }
            SweepPoint {
                n,
                counts,
                f1: f1(&counts).f1,
            }
        })
        .collect();
    let best = curve
        .iter()
        .fold(None::<&SweepPoint>, |best, p| match best {
            Some(b) if b.f1 > p.f1 || (b.f1 == p.f1 && b.n <= p.n) => Some(b),
            _ => Some(p),
        })
        .expect("non-empty grid");
    Ok(SweepResult {
        best_n: best.n,
        best_f1: best.f1,
        curve,
    })
}

/// Leave-one-out F1 of the centroid baseline for each `n` in the grid.
pub fn sweep_n(
    matrix: &EmbeddingMatrix,
    dataset: &PropertyDataset,
    pool: &Pool,
    n_values: &[usize],
) -> Result<SweepResult> {
    check_grid(n_values)?;
    let items: Vec<(usize, Label)> = dataset
        .items()
        .map(|(w, l, _)| {
            matrix
                .resolve(w)
                .map(|r| (r, l))
                .ok_or_else(|| Error::MissingWord(w.into()))
        })
        .collect::<Result<_>>()?;
    let ranks = loo_ranks(matrix, &items, pool)?;
    let outcomes: Vec<(Label, usize)> = items.iter().map(|&(_, l)| l).zip(ranks).collect();
    sweep_from_ranks(&outcomes, pool.size(matrix), n_values)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::Provenance;
    use alloc::string::String;

    fn line_space() -> EmbeddingMatrix {
        // unit vectors at increasing angles from the x axis
        let n = 12;
        let vocab: Vec<String> = (0..n).map(|i| alloc::format!("w{i:02}")).collect();
        let mut data = Vec::new();
        for i in 0..n {
            let a = i as f64 * 0.25;
            data.push(libm::cos(a) as f32);
            data.push(libm::sin(a) as f32);
        }
        EmbeddingMatrix::from_rows(vocab, 2, data).unwrap()
    }

    #[test]
    fn singleton_centroid_ranks_itself_first() {
        let m = line_space();
        let model = fit_centroid(&m, &["w05"], 1, &Pool::FullVocab).unwrap();
        assert_eq!(model.centroid, m.vector(5));
        assert_eq!(model.rank(&m, "w05").unwrap(), 1);
        assert!(model.predict(&m, "w05").unwrap());
        assert!(!model.predict(&m, "w00").unwrap());
    }

    #[test]
    fn full_pool_labels_everything_positive() {
        let m = line_space();
        let model = fit_centroid(&m, &["w00", "w01"], m.len(), &Pool::FullVocab).unwrap();
        for w in m.vocab() {
            assert!(model.predict(&m, w).unwrap());
        }
        let clamped = fit_centroid(&m, &["w00"], 10_000, &Pool::FullVocab).unwrap();
        assert_eq!(clamped.n, m.len());
        assert!(fit_centroid(&m, &["w00"], 0, &Pool::FullVocab).is_err());
        assert!(matches!(model.predict(&m, "zzz"), Err(Error::MissingWord(_))));
    }

    #[test]
    fn prediction_is_monotone_in_n() {
        let m = line_space();
        for n in 1..m.len() {
            let small = fit_centroid(&m, &["w03", "w04"], n, &Pool::FullVocab).unwrap();
            let large = fit_centroid(&m, &["w03", "w04"], n + 1, &Pool::FullVocab).unwrap();
            for w in m.vocab() {
                if small.predict(&m, w).unwrap() {
                    assert!(large.predict(&m, w).unwrap());
                }
            }
        }
    }

    #[test]
    fn loo_ranks_match_refit_per_fold() {
        let m = line_space();
        let ds = PropertyDataset::from_sets(
            "p",
            &["w00", "w01", "w02", "w03"],
            &["w06", "w09", "w11"],
            Provenance::Norm,
        )
        .unwrap();
        let items: Vec<(usize, Label)> = ds.items().map(|(w, l, _)| (m.resolve(w).unwrap(), l)).collect();
        let ranks = loo_ranks(&m, &items, &Pool::FullVocab).unwrap();
        for (i, (w, _, _)) in ds.items().enumerate() {
            let train: Vec<&str> = ds.positives().into_iter().filter(|p| *p != w).collect();
            let model = fit_centroid(&m, &train, 1, &Pool::FullVocab).unwrap();
            assert_eq!(ranks[i], model.rank(&m, w).unwrap(), "word {w}");
        }
    }

    #[test]
    fn sweep_picks_smallest_best_n() {
        // 100 positives packed around one direction, 150 negatives spread on
        // the opposite half-plane: perfect separation at n = 100
        let mut vocab = Vec::new();
        let mut data = Vec::new();
        for i in 0..100 {
            vocab.push(alloc::format!("p{i:03}"));
            let a = i as f64 * 0.001;
            data.extend([libm::cos(a) as f32, libm::sin(a) as f32]);
        }
        for i in 0..150 {
            vocab.push(alloc::format!("n{i:03}"));
            let a = 2.0 + i as f64 * 0.01;
            data.extend([libm::cos(a) as f32, libm::sin(a) as f32]);
        }
        let m = EmbeddingMatrix::from_rows(vocab.clone(), 2, data).unwrap();
        let (pos, neg) = vocab.split_at(100);
        let ds = PropertyDataset::from_sets("p", pos, neg, Provenance::Norm).unwrap();
        let r = sweep_n(&m, &ds, &Pool::FullVocab, &[50, 100, 150, 200]).unwrap();
        assert_eq!(r.best_n, 100);
        assert_eq!(r.best_f1, 1.0);
        assert!(r.curve.iter().all(|p| p.f1 <= r.best_f1));
        assert_eq!(r.curve.len(), 4);
    }

    #[test]
    fn sweep_from_ranks_ties_and_grid() {
        let outcomes = [(Label::Positive, 1), (Label::Negative, 5)];
        let r = sweep_from_ranks(&outcomes, 10, &[3, 1, 2]).unwrap();
        assert_eq!((r.best_n, r.best_f1), (1, 1.0));
        assert_eq!(default_n_grid().len(), 10);
        assert_eq!(default_n_grid()[9], 1000);
        assert!(sweep_from_ranks(&outcomes, 10, &[]).is_err());
        assert!(sweep_from_ranks(&outcomes, 10, &[0]).is_err());
    }
}
