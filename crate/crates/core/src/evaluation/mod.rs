//! Leave-one-out and fixed-split evaluation of the three detectors, plus
//! per-property reports and hypothesis verdicts.
//!
//! Work is exposed at fold granularity ([`PreparedProperty::run_fold`]) so
//! callers can distribute folds over threads; [`combine_folds`] reduces them
//! in fold order, which keeps results bit-identical to [`loo_evaluate`].

pub mod metrics;

use alloc::borrow::ToOwned;
use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;

use crate::dataset::{build_split, Fold, Label, PropertyDataset, SplitSpec};
use crate::embedding::{self, EmbeddingMatrix, Pool};
use crate::error::{Error, Result};
use crate::probes::centroid::{sweep_from_ranks, SweepResult};
use crate::probes::{
    default_n_grid, train_logistic, train_mlp, LogisticConfig, MlpConfig, Samples,
};

pub use metrics::{average_pairwise_cosine, f1, spearman, ConfusionCounts, Scores};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Method {
    Neigh,
    Lr,
    Net,
}

impl Method {
    pub const ALL: [Method; 3] = [Method::Neigh, Method::Lr, Method::Net];

    pub fn as_str(self) -> &'static str {
        match self {
            Method::Neigh => "neigh",
            Method::Lr => "lr",
            Method::Net => "net",
        }
    }

    pub fn parse(s: &str) -> Option<Method> {
        match s.trim() {
            "neigh" => Some(Method::Neigh),
            "lr" => Some(Method::Lr),
            "net" => Some(Method::Net),
            _ => None,
        }
    }
}

/// What to do with dataset words missing from the vocabulary.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OovPolicy {
    /// Drop them from evaluation and list them in the report.
    Skip,
    /// Fail with [`Error::MissingWord`].
    Strict,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvalConfig {
    pub logistic: LogisticConfig,
    pub mlp: MlpConfig,
    /// One MLP run per seed.
    pub seeds: Vec<u64>,
    pub n_grid: Vec<usize>,
    pub pool: Pool,
    pub oov: OovPolicy,
}

impl Default for EvalConfig {
    fn default() -> Self {
        EvalConfig {
            logistic: LogisticConfig::default(),
            mlp: MlpConfig::default(),
            seeds: alloc::vec![1, 2],
            n_grid: default_n_grid(),
            pool: Pool::FullVocab,
            oov: OovPolicy::Skip,
        }
    }
}

/// One classifier to train per fold.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Probe {
    Centroid,
    Logistic,
    Mlp { seed: u64 },
}

/// Train/test positions into [`PreparedProperty::items`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IndexFold {
    pub train: Vec<usize>,
    pub test: Vec<usize>,
}

/// Per-test-item output of one fold: a binary decision for classifiers, the
/// centroid rank for the baseline.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum FoldOutput {
    Labels(Vec<bool>),
    Ranks(Vec<usize>),
}

/// A dataset resolved against an embedding matrix, OOV policy applied.
#[derive(Debug, Clone)]
pub struct PreparedProperty<'m> {
    matrix: &'m EmbeddingMatrix,
    dataset: PropertyDataset,
    words: Vec<String>,
    items: Vec<(usize, Label)>,
    features: Vec<f64>,
    oov: Vec<String>,
    all_positive_sims: Option<Vec<(usize, f64)>>,
}

impl<'m> PreparedProperty<'m> {
    pub fn new(matrix: &'m EmbeddingMatrix, dataset: &PropertyDataset, oov: OovPolicy) -> Result<Self> {
        let mut missing = Vec::new();
        for (w, _, _) in dataset.items() {
            if matrix.resolve(w).is_none() {
                if oov == OovPolicy::Strict {
                    return Err(Error::MissingWord(w.to_owned()));
                }
                missing.push(w.to_owned());
            }
        }
        let kept = dataset.filtered(|w| matrix.resolve(w).is_some());
        let mut words = Vec::with_capacity(kept.len());
        let mut items = Vec::with_capacity(kept.len());
        let mut features = Vec::with_capacity(kept.len() * matrix.dim());
        for (w, label, _) in kept.items() {
            let row = matrix.resolve(w).expect("filtered to resolvable words");
            words.push(w.to_owned());
            items.push((row, label));
            features.extend(matrix.row(row).iter().map(|&v| v as f64));
        }
        Ok(PreparedProperty {
            matrix,
            dataset: kept,
            words,
            items,
            features,
            oov: missing,
            all_positive_sims: None,
        })
    }

    pub fn property(&self) -> &str {
        self.dataset.property()
    }

    pub fn matrix(&self) -> &'m EmbeddingMatrix {
        self.matrix
    }

    /// Evaluated (resolvable) dataset.
    pub fn dataset(&self) -> &PropertyDataset {
        &self.dataset
    }

    pub fn items(&self) -> &[(usize, Label)] {
        &self.items
    }

    pub fn words(&self) -> &[String] {
        &self.words
    }

    pub fn oov(&self) -> &[String] {
        &self.oov
    }

    pub fn pos_count(&self) -> usize {
        self.dataset.pos_count()
    }

    pub fn neg_count(&self) -> usize {
        self.dataset.neg_count()
    }

    pub fn average_positive_cosine(&self) -> Result<f64> {
        let mut rows: Vec<usize> = self
            .items
            .iter()
            .filter(|(_, l)| l.is_positive())
            .map(|&(r, _)| r)
            .collect();
        metrics::average_pairwise_cosine_rows(self.matrix, &mut rows)
    }

    fn positions(&self, fold: &Fold) -> IndexFold {
        let lookup: BTreeMap<&str, usize> = self
            .words
            .iter()
            .enumerate()
            .map(|(i, w)| (w.as_str(), i))
            .collect();
        let pos = |w: &String| lookup[w.as_str()];
        let mut train: Vec<usize> = fold
            .train_positives
            .iter()
            .chain(&fold.train_negatives)
            .map(pos)
            .collect();
        train.sort_unstable();
        IndexFold {
            train,
            test: fold.test.iter().map(|(w, _)| pos(w)).collect(),
        }
    }

    /// Leave-one-out folds in held-out-word order.
    pub fn loo_folds(&self) -> Result<Vec<IndexFold>> {
        Ok(build_split(&self.dataset, &SplitSpec::LeaveOneOut)?
            .iter()
            .map(|f| self.positions(f))
            .collect())
    }

    /// The single fold of a fixed split. Split words that were dropped as
    /// OOV are ignored.
    pub fn fixed_fold(&self, spec: &SplitSpec) -> Result<IndexFold> {
        let spec = match spec {
            SplitSpec::Fixed { train, test } => SplitSpec::Fixed {
                train: train.iter().filter(|w| self.dataset.contains(w)).cloned().collect(),
                test: test.iter().filter(|w| self.dataset.contains(w)).cloned().collect(),
            },
            SplitSpec::LeaveOneOut => {
                return Err(Error::InvalidArgument("expected a fixed split".into()))
            }
        };
        let folds = build_split(&self.dataset, &spec)?;
        Ok(self.positions(&folds[0]))
    }

    /// Precomputes the pool similarities to the centroid of all positives,
    /// which every fold holding out a negative reuses.
    pub fn cache_centroid(&mut self, pool: &Pool) -> Result<()> {
        let rows: Vec<usize> = self
            .items
            .iter()
            .filter(|(_, l)| l.is_positive())
            .map(|&(r, _)| r)
            .collect();
        if rows.is_empty() {
            return Err(Error::DegenerateFold("no positive examples".into()));
        }
        let q = embedding::centroid_of_indices(self.matrix, &rows)?;
        self.all_positive_sims = Some(embedding::pool_similarities(self.matrix, &q, pool)?);
        Ok(())
    }

    fn samples(&self, positions: &[usize]) -> Samples {
        let dim = self.matrix.dim();
        let mut s = Samples::with_capacity(dim, positions.len());
        for &p in positions {
            s.push(&self.features[p * dim..(p + 1) * dim], self.items[p].1.is_positive())
                .expect("rows match matrix dimension");
        }
        s
    }

    /// Trains `probe` on the fold's training items and scores its test items.
    pub fn run_fold(&self, probe: Probe, fold: &IndexFold, config: &EvalConfig) -> Result<FoldOutput> {
        let dim = self.matrix.dim();
        let test_rows = || fold.test.iter().map(move |&p| &self.features[p * dim..(p + 1) * dim]);
        match probe {
            Probe::Centroid => {
                let positives: Vec<usize> = fold
                    .train
                    .iter()
                    .filter(|&&p| self.items[p].1.is_positive())
                    .map(|&p| self.items[p].0)
                    .collect();
                if positives.is_empty() {
                    return Err(Error::DegenerateFold("no training positives".into()));
                }
                let q = embedding::centroid_of_indices(self.matrix, &positives)?;
                let all_positives = positives.len() == self.pos_count();
                let fresh;
                let sims = match (&self.all_positive_sims, all_positives) {
                    (Some(cached), true) => cached,
                    _ => {
                        fresh = embedding::pool_similarities(self.matrix, &q, &config.pool)?;
                        &fresh
                    }
                };
                let ranks = fold
                    .test
                    .iter()
                    .map(|&p| {
                        let row = self.items[p].0;
                        let s = embedding::similarity_to_row(self.matrix, &q, row)?;
                        Ok(embedding::rank_of(sims, row, s))
                    })
                    .collect::<Result<_>>()?;
                Ok(FoldOutput::Ranks(ranks))
            }
            Probe::Logistic => {
                let model = train_logistic(&self.samples(&fold.train), &config.logistic)?;
                let labels = test_rows()
                    .map(|x| model.predict(x).map(|p| p.label))
                    .collect::<Result<_>>()?;
                Ok(FoldOutput::Labels(labels))
            }
            Probe::Mlp { seed } => {
                let model = train_mlp(&self.samples(&fold.train), &config.mlp, seed)?;
                let labels = test_rows()
                    .map(|x| model.predict(x).map(|p| p.label))
                    .collect::<Result<_>>()?;
                Ok(FoldOutput::Labels(labels))
            }
        }
    }

    /// Probes needed for `method` under `config`.
    pub fn probes_for(method: Method, config: &EvalConfig) -> Vec<Probe> {
        match method {
            Method::Neigh => alloc::vec![Probe::Centroid],
            Method::Lr => alloc::vec![Probe::Logistic],
            Method::Net => config.seeds.iter().map(|&seed| Probe::Mlp { seed }).collect(),
        }
    }
}

/// Per-item outcome of a classifier run.
#[derive(Debug, Clone, PartialEq)]
pub struct ClassifierRun {
    pub seed: Option<u64>,
    /// `(truth, predicted)` per evaluated item, in fold order.
    pub predictions: Vec<(bool, bool)>,
    pub counts: ConfusionCounts,
    pub f1: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct NeighRun {
    /// `(truth, rank)` per evaluated item, in fold order.
    pub ranks: Vec<(Label, usize)>,
    pub pool_size: usize,
    pub sweep: SweepResult,
}

#[derive(Debug, Clone, PartialEq)]
pub enum MethodRun {
    Neigh(NeighRun),
    Lr(ClassifierRun),
    Net(Vec<ClassifierRun>),
}

/// Result of evaluating one method on one property.
#[derive(Debug, Clone, PartialEq)]
pub struct Fragment {
    pub property: String,
    pub method: Method,
    pub run: MethodRun,
}

/// Reduces fold outputs (one list per probe, folds in order) to a method
/// result.
pub fn combine_folds(
    prepared: &PreparedProperty<'_>,
    method: Method,
    folds: &[IndexFold],
    outputs: &[(Probe, Vec<FoldOutput>)],
    config: &EvalConfig,
) -> Result<Fragment> {
    let truth = |p: usize| prepared.items[p].1;
    let classifier = |probe: Probe, outs: &[FoldOutput]| -> Result<ClassifierRun> {
        let mut predictions = Vec::new();
        for (fold, out) in folds.iter().zip(outs) {
            let FoldOutput::Labels(labels) = out else {
                return Err(Error::InvalidArgument("classifier fold produced ranks".into()));
            };
            for (&p, &pred) in fold.test.iter().zip(labels) {
                predictions.push((truth(p).is_positive(), pred));
            }
        }
        let counts = ConfusionCounts::from_pairs(predictions.iter().copied());
        Ok(ClassifierRun {
            seed: match probe {
                Probe::Mlp { seed } => Some(seed),
                _ => None,
            },
            f1: f1(&counts).f1,
            predictions,
            counts,
        })
    };
    let run = match method {
        Method::Neigh => {
            let (_, outs) = outputs
                .iter()
                .find(|(p, _)| *p == Probe::Centroid)
                .ok_or_else(|| Error::InvalidArgument("missing centroid outputs".into()))?;
            let mut ranks = Vec::new();
            for (fold, out) in folds.iter().zip(outs) {
                let FoldOutput::Ranks(r) = out else {
                    return Err(Error::InvalidArgument("centroid fold produced labels".into()));
                };
                ranks.extend(fold.test.iter().map(|&p| truth(p)).zip(r.iter().copied()));
            }
            let pool_size = config.pool.size(prepared.matrix);
            let sweep = sweep_from_ranks(&ranks, pool_size, &config.n_grid)?;
            MethodRun::Neigh(NeighRun {
                ranks,
                pool_size,
                sweep,
            })
        }
        Method::Lr => {
            let (probe, outs) = outputs
                .iter()
                .find(|(p, _)| *p == Probe::Logistic)
                .ok_or_else(|| Error::InvalidArgument("missing logistic outputs".into()))?;
            MethodRun::Lr(classifier(*probe, outs)?)
        }
        Method::Net => {
            let runs = outputs
                .iter()
                .filter(|(p, _)| matches!(p, Probe::Mlp { .. }))
                .map(|(p, outs)| classifier(*p, outs))
                .collect::<Result<Vec<_>>>()?;
            MethodRun::Net(runs)
        }
    };
    Ok(Fragment {
        property: prepared.property().to_owned(),
        method,
        run,
    })
}

fn run_sequential(
    prepared: &PreparedProperty<'_>,
    method: Method,
    folds: &[IndexFold],
    config: &EvalConfig,
) -> Result<Fragment> {
    let mut outputs = Vec::new();
    for probe in PreparedProperty::probes_for(method, config) {
        let outs = folds
            .iter()
            .map(|f| prepared.run_fold(probe, f, config))
            .collect::<Result<Vec<_>>>()?;
        outputs.push((probe, outs));
    }
    combine_folds(prepared, method, folds, &outputs, config)
}

/// Leave-one-out evaluation of one method.
pub fn loo_evaluate(
    matrix: &EmbeddingMatrix,
    dataset: &PropertyDataset,
    method: Method,
    config: &EvalConfig,
) -> Result<Fragment> {
    let mut prepared = PreparedProperty::new(matrix, dataset, config.oov)?;
    let folds = prepared.loo_folds()?;
    if method == Method::Neigh {
        prepared.cache_centroid(&config.pool)?;
    }
    run_sequential(&prepared, method, &folds, config)
}

/// Trains once on the split's training words and scores its test words.
pub fn fixed_split_evaluate(
    matrix: &EmbeddingMatrix,
    dataset: &PropertyDataset,
    spec: &SplitSpec,
    method: Method,
    config: &EvalConfig,
) -> Result<Fragment> {
    let prepared = PreparedProperty::new(matrix, dataset, config.oov)?;
    let fold = prepared.fixed_fold(spec)?;
    run_sequential(&prepared, method, core::slice::from_ref(&fold), config)
}

/// One row of the results table.
#[derive(Debug, Clone, PartialEq)]
pub struct PropertyReport {
    pub property: String,
    pub pos_count: usize,
    pub neg_count: usize,
    /// Mean pairwise cosine among the evaluated positives.
    pub avg_cos: f64,
    pub f1_neigh: Option<f64>,
    pub best_n: Option<usize>,
    pub f1_lr: Option<f64>,
    /// One entry per MLP seed.
    pub f1_net: Vec<f64>,
    pub oov: Vec<String>,
    pub pool: String,
}

impl PropertyReport {
    /// Highest supervised-classifier F1 (lr or any net run).
    pub fn best_classifier_f1(&self) -> Option<f64> {
        self.f1_lr
            .into_iter()
            .chain(self.f1_net.iter().copied())
            .fold(None, |best: Option<f64>, v| Some(best.map_or(v, |b| b.max(v))))
    }
}

/// Builds a report row from the fragments of one property.
pub fn assemble_report(
    prepared: &PreparedProperty<'_>,
    fragments: &[Fragment],
    config: &EvalConfig,
) -> Result<PropertyReport> {
    let mut report = PropertyReport {
        property: prepared.property().to_owned(),
        pos_count: prepared.pos_count(),
        neg_count: prepared.neg_count(),
        avg_cos: prepared.average_positive_cosine()?,
        f1_neigh: None,
        best_n: None,
        f1_lr: None,
        f1_net: Vec::new(),
        oov: prepared.oov().to_vec(),
        pool: config.pool.describe(),
    };
    for frag in fragments {
        match &frag.run {
            MethodRun::Neigh(run) => {
                report.f1_neigh = Some(run.sweep.best_f1);
                report.best_n = Some(run.sweep.best_n);
            }
            MethodRun::Lr(run) => report.f1_lr = Some(run.f1),
            MethodRun::Net(runs) => report.f1_net = runs.iter().map(|r| r.f1).collect(),
        }
    }
    Ok(report)
}

/// Evaluates every method on one property and assembles its report row.
pub fn evaluate_property(
    matrix: &EmbeddingMatrix,
    dataset: &PropertyDataset,
    methods: &[Method],
    split: &SplitSpec,
    config: &EvalConfig,
) -> Result<PropertyReport> {
    let mut prepared = PreparedProperty::new(matrix, dataset, config.oov)?;
    let folds = match split {
        SplitSpec::LeaveOneOut => prepared.loo_folds()?,
        fixed => alloc::vec![prepared.fixed_fold(fixed)?],
    };
    if methods.contains(&Method::Neigh) && matches!(split, SplitSpec::LeaveOneOut) {
        prepared.cache_centroid(&config.pool)?;
    }
    let fragments = methods
        .iter()
        .map(|&m| run_sequential(&prepared, m, &folds, config))
        .collect::<Result<Vec<_>>>()?;
    assemble_report(&prepared, &fragments, config)
}

/// Spearman correlation of each method's F1 column with `avg_cos`, in the
/// order neigh, lr, net (first seed). `None` where the column is missing
/// or the correlation is undefined.
pub fn spearman_summary(reports: &[PropertyReport]) -> [Option<f64>; 3] {
    let column = |get: &dyn Fn(&PropertyReport) -> Option<f64>| -> Option<f64> {
        let pairs: Option<Vec<(f64, f64)>> = reports.iter().map(|r| get(r).map(|v| (r.avg_cos, v))).collect();
        let pairs = pairs?;
        if pairs.len() < 2 {
            return None;
        }
        let (xs, ys): (Vec<f64>, Vec<f64>) = pairs.into_iter().unzip();
        spearman(&xs, &ys).ok()
    };
    [
        column(&|r| r.f1_neigh),
        column(&|r| r.f1_lr),
        column(&|r| r.f1_net.first().copied()),
    ]
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Expectation {
    Yes,
    Possibly,
    No,
}

impl Expectation {
    pub fn parse(s: &str) -> Option<Expectation> {
        match s.trim().to_ascii_lowercase().as_str() {
            "yes" => Some(Expectation::Yes),
            "possibly" => Some(Expectation::Possibly),
            "no" => Some(Expectation::No),
            _ => None,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Expectation::Yes => "yes",
            Expectation::Possibly => "possibly",
            Expectation::No => "no",
        }
    }

    fn level(self) -> i32 {
        match self {
            Expectation::Yes => 2,
            Expectation::Possibly => 1,
            Expectation::No => 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HypothesisEntry {
    pub property: String,
    pub expected: Expectation,
}

impl HypothesisEntry {
    pub fn new(property: &str, expected: Expectation) -> Self {
        HypothesisEntry {
            property: crate::dataset::normalize_label(property),
            expected,
        }
    }
}

/// Expected learnability of the eleven hand-picked CSLB properties.
pub fn default_hypotheses() -> Vec<HypothesisEntry> {
    use Expectation::*;
    [
        ("is_an_animal", Yes),
        ("is_food", Yes),
        ("is_dangerous", Yes),
        ("does_kill", Yes),
        ("is_used_in_cooking", Yes),
        ("has_wheels", Possibly),
        ("is_found_in_seas", Possibly),
        ("is_black", No),
        ("is_red", No),
        ("is_yellow", No),
        ("made_of_wood", No),
    ]
    .into_iter()
    .map(|(p, e)| HypothesisEntry::new(p, e))
    .collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Thresholds {
    /// Best classifier F1 at or above this counts as learnable.
    pub learnable: f64,
    pub possibly: f64,
}

impl Default for Thresholds {
    fn default() -> Self {
        Thresholds {
            learnable: 0.75,
            possibly: 0.5,
        }
    }
}

impl Thresholds {
    pub fn classify(&self, f1: f64) -> Expectation {
        if f1 >= self.learnable {
            Expectation::Yes
        } else if f1 >= self.possibly {
            Expectation::Possibly
        } else {
            Expectation::No
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Confirmed,
    /// Observed and expected differ by one level.
    Borderline,
    Contradicted,
}

impl Verdict {
    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::Confirmed => "confirmed",
            Verdict::Borderline => "borderline",
            Verdict::Contradicted => "contradicted",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct VerdictRow {
    pub property: String,
    pub expected: Expectation,
    pub observed: Expectation,
    pub best_f1: f64,
    pub verdict: Verdict,
}

/// Compares each hypothesis with the best classifier F1 of its report.
pub fn compare_hypotheses(
    reports: &[PropertyReport],
    hypotheses: &[HypothesisEntry],
    thresholds: &Thresholds,
) -> Result<Vec<VerdictRow>> {
    hypotheses
        .iter()
        .map(|h| {
            let report = reports
                .iter()
                .find(|r| r.property == h.property)
                .ok_or_else(|| Error::MissingReport(h.property.clone()))?;
            let best_f1 = report.best_classifier_f1().ok_or_else(|| {
                Error::InvalidArgument(alloc::format!(
                    "report for {} has no classifier scores",
                    h.property
                ))
            })?;
            let observed = thresholds.classify(best_f1);
            let verdict = match (observed.level() - h.expected.level()).abs() {
                0 => Verdict::Confirmed,
                1 => Verdict::Borderline,
                _ => Verdict::Contradicted,
            };
            Ok(VerdictRow {
                property: h.property.clone(),
                expected: h.expected,
                observed,
                best_f1,
                verdict,
            })
        })
        .collect()
}
