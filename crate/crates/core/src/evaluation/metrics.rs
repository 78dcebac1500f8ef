use alloc::vec::Vec;
use core::ops::AddAssign;

use crate::embedding::{self, EmbeddingMatrix};
use crate::error::{Error, Result};

/// Positive-class confusion counts.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct ConfusionCounts {
    pub tp: usize,
    pub fp: usize,
    pub tn: usize,
    pub fn_: usize,
}

impl ConfusionCounts {
    pub fn record(&mut self, truth: bool, predicted: bool) {
        match (truth, predicted) {
            (true, true) => self.tp += 1,
            (false, true) => self.fp += 1,
            (false, false) => self.tn += 1,
            (true, false) => self.fn_ += 1,
        }
    }

    pub fn total(&self) -> usize {
        self.tp + self.fp + self.tn + self.fn_
    }

    pub fn from_pairs(pairs: impl IntoIterator<Item = (bool, bool)>) -> Self {
        let mut c = ConfusionCounts::default();
        for (truth, pred) in pairs {
            c.record(truth, pred);
        }
        c
    }
}

impl AddAssign for ConfusionCounts {
    fn add_assign(&mut self, rhs: Self) {
        self.tp += rhs.tp;
        self.fp += rhs.fp;
        self.tn += rhs.tn;
        self.fn_ += rhs.fn_;
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Scores {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

/// Precision, recall and F1 of the positive class. Each is 0 when its
/// denominator is 0.
pub fn f1(counts: &ConfusionCounts) -> Scores {
    let ratio = |num: usize, den: usize| if den == 0 { 0.0 } else { num as f64 / den as f64 };
    let precision = ratio(counts.tp, counts.tp + counts.fp);
    let recall = ratio(counts.tp, counts.tp + counts.fn_);
    // harmonic mean of p and r, reduced to one correctly rounded division
    let f1 = ratio(2 * counts.tp, 2 * counts.tp + counts.fp + counts.fn_);
    Scores {
        precision,
        recall,
        f1,
    }
}

/// Mean cosine over all unordered pairs of distinct list positions.
/// Words missing from the vocabulary are skipped.
pub fn average_pairwise_cosine<S: AsRef<str>>(matrix: &EmbeddingMatrix, words: &[S]) -> Result<f64> {
    let mut rows: Vec<usize> = words.iter().filter_map(|w| matrix.resolve(w.as_ref())).collect();
    average_pairwise_cosine_rows(matrix, &mut rows)
}

/// Same as [`average_pairwise_cosine`] on resolved rows; sorts `rows` so the
/// summation order, and hence the result, is permutation invariant.
pub fn average_pairwise_cosine_rows(matrix: &EmbeddingMatrix, rows: &mut [usize]) -> Result<f64> {
    if rows.len() < 2 {
        return Err(Error::EmptySet("need at least two resolvable words"));
    }
    rows.sort_unstable();
    let mut sum = 0.0;
    let mut pairs = 0usize;
    for i in 0..rows.len() {
        for j in i + 1..rows.len() {
            sum += embedding::row_cosine(matrix, rows[i], rows[j])?;
            pairs += 1;
        }
    }
    Ok(sum / pairs as f64)
}

/// Average (fractional) ranks, 1-based; tied values share the mean of the
/// positions they occupy.
pub fn average_ranks(values: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let mut ranks = alloc::vec![0.0; values.len()];
    let mut start = 0;
    while start < order.len() {
        let mut end = start + 1;
        while end < order.len() && values[order[end]] == values[order[start]] {
            end += 1;
        }
        // positions start+1 ..= end
        let mean = (start + 1 + end) as f64 / 2.0;
        for &idx in &order[start..end] {
            ranks[idx] = mean;
        }
        start = end;
    }
    ranks
}

fn pearson(xs: &[f64], ys: &[f64]) -> Result<f64> {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (x, y) in xs.iter().zip(ys) {
        let (dx, dy) = (x - mx, y - my);
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if sxx == 0.0 || syy == 0.0 {
        return Err(Error::Undefined("correlation of a constant sequence"));
    }
    Ok((sxy / libm::sqrt(sxx * syy)).clamp(-1.0, 1.0))
}

/// Spearman's rho: Pearson correlation of average ranks.
pub fn spearman(xs: &[f64], ys: &[f64]) -> Result<f64> {
    if xs.len() != ys.len() {
        return Err(Error::Dimension {
            expected: xs.len(),
            found: ys.len(),
        });
    }
    if xs.len() < 2 {
        return Err(Error::EmptySet("spearman needs at least two observations"));
    }
    if xs.iter().chain(ys).any(|v| v.is_nan()) {
        return Err(Error::Undefined("NaN in spearman input"));
    }
    pearson(&average_ranks(xs), &average_ranks(ys))
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::string::String;
    use alloc::vec;

    #[test]
    fn f1_examples() {
        let c = ConfusionCounts { tp: 5, ..Default::default() };
        assert_eq!(f1(&c), Scores { precision: 1.0, recall: 1.0, f1: 1.0 });
        let c = ConfusionCounts { tp: 0, fp: 3, tn: 2, fn_: 4 };
        assert_eq!(f1(&c).f1, 0.0);
        let c = ConfusionCounts { tp: 2, fp: 1, tn: 0, fn_: 1 };
        let s = f1(&c);
        assert!((s.precision - 2.0 / 3.0).abs() < 1e-15);
        assert!((s.recall - 2.0 / 3.0).abs() < 1e-15);
        assert!((s.f1 - 2.0 / 3.0).abs() < 1e-15);
        assert_eq!(f1(&ConfusionCounts::default()).f1, 0.0);
    }

    #[test]
    fn spearman_examples() {
        assert_eq!(spearman(&[1.0, 2.0, 3.0], &[10.0, 20.0, 30.0]).unwrap(), 1.0);
        assert_eq!(spearman(&[1.0, 2.0, 3.0], &[3.0, 2.0, 1.0]).unwrap(), -1.0);
        let rho = spearman(&[1.0, 2.0, 3.0], &[1.0, 3.0, 2.0]).unwrap();
        assert!((rho - 0.5).abs() < 1e-12);
        assert!(matches!(spearman(&[1.0, 2.0], &[1.0]), Err(Error::Dimension { .. })));
        assert!(spearman(&[1.0, 1.0], &[1.0, 2.0]).is_err());
    }

    #[test]
    fn ties_get_mean_rank() {
        assert_eq!(average_ranks(&[3.0, 1.0, 3.0, 2.0]), vec![3.5, 1.0, 3.5, 2.0]);
    }

    fn matrix(rows: &[[f32; 3]]) -> EmbeddingMatrix {
        let vocab: Vec<String> = (0..rows.len()).map(|i| alloc::format!("w{i}")).collect();
        EmbeddingMatrix::from_rows(vocab, 3, rows.iter().flatten().copied().collect()).unwrap()
    }

    #[test]
    fn pairwise_cosine_examples() {
        let m = matrix(&[[1.0, 2.0, 3.0], [1.0, 2.0, 3.0], [1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]]);
        assert!((average_pairwise_cosine(&m, &["w0", "w1"]).unwrap() - 1.0).abs() < 1e-12);
        assert_eq!(average_pairwise_cosine(&m, &["w2", "w3", "w4"]).unwrap(), 0.0);
        assert_eq!(
            average_pairwise_cosine(&m, &["w2", "nope"]),
            Err(Error::EmptySet("need at least two resolvable words"))
        );
        let a = average_pairwise_cosine(&m, &["w0", "w2", "w3"]).unwrap();
        let b = average_pairwise_cosine(&m, &["w3", "w0", "w2"]).unwrap();
        assert_eq!(a, b);
    }
}
