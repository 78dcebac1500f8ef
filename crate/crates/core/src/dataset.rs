//! Labeled example sets per semantic property: raw norm tables, implication
//! and exclusion rules, crowd verdicts, candidate expansion and splits.

use alloc::borrow::ToOwned;
use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use crate::embedding::{self, EmbeddingMatrix, Pool};
use crate::error::{Error, Result};

/// Normalizes a property label to the `relation_value` form.
pub fn normalize_label(label: &str) -> String {
    embedding::normalize_token(label)
}

/// Concept → property labels, as listed by a property-norm source.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct PropertyNormTable {
    entries: BTreeMap<String, BTreeSet<String>>,
}

impl PropertyNormTable {
    pub fn new() -> Self {
        Self::default()
    }

    /// Records that `concept` lists `property`. Duplicate pairs collapse.
    pub fn insert(&mut self, concept: &str, property: &str) -> Result<()> {
        let concept = concept.trim();
        let property = normalize_label(property);
        if concept.is_empty() || property.is_empty() {
            return Err(Error::InvalidArgument("empty concept or property".into()));
        }
        self.entries
            .entry(concept.to_owned())
            .or_default()
            .insert(property);
        Ok(())
    }

    pub fn entries(&self) -> &BTreeMap<String, BTreeSet<String>> {
        &self.entries
    }

    pub fn concept_count(&self) -> usize {
        self.entries.len()
    }

    pub fn properties_of(&self, concept: &str) -> Option<&BTreeSet<String>> {
        self.entries.get(concept)
    }

    pub fn has_property(&self, property: &str) -> bool {
        self.entries.values().any(|props| props.contains(property))
    }

    /// Concepts listing `property`, lexicographically ordered.
    pub fn concepts_with<'a>(&'a self, property: &'a str) -> impl Iterator<Item = &'a str> + 'a {
        self.entries
            .iter()
            .filter(move |(_, props)| props.contains(property))
            .map(|(c, _)| c.as_str())
    }

    /// Number of concepts per property.
    pub fn property_counts(&self) -> BTreeMap<&str, usize> {
        let mut counts = BTreeMap::new();
        for props in self.entries.values() {
            for p in props {
                *counts.entry(p.as_str()).or_insert(0) += 1;
            }
        }
        counts
    }
}

/// Properties listed for at least `min_concepts` concepts, most frequent
/// first, ties lexicographic.
pub fn select_properties(table: &PropertyNormTable, min_concepts: usize) -> Result<Vec<String>> {
    if min_concepts == 0 {
        return Err(Error::InvalidArgument("min_concepts must be at least 1".into()));
    }
    let mut kept: Vec<(&str, usize)> = table
        .property_counts()
        .into_iter()
        .filter(|&(_, n)| n >= min_concepts)
        .collect();
    kept.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(b.0)));
    Ok(kept.into_iter().map(|(p, _)| p.to_owned()).collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum RuleKind {
    Implies,
    Excludes,
}

/// `source implies target` or `source excludes target`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ImplicationRule {
    pub source: String,
    pub target: String,
    pub kind: RuleKind,
}

impl ImplicationRule {
    pub fn new(source: &str, kind: RuleKind, target: &str) -> Result<Self> {
        let source = normalize_label(source);
        let target = normalize_label(target);
        if source.is_empty() || target.is_empty() {
            return Err(Error::InvalidArgument("rule with empty property".into()));
        }
        if source == target {
            return Err(Error::InvalidArgument(format!(
                "rule source and target are both {source}"
            )));
        }
        Ok(ImplicationRule {
            source,
            target,
            kind,
        })
    }

    pub fn implies(source: &str, target: &str) -> Result<Self> {
        Self::new(source, RuleKind::Implies, target)
    }

    pub fn excludes(source: &str, target: &str) -> Result<Self> {
        Self::new(source, RuleKind::Excludes, target)
    }
}

/// The two rules quoted as examples for the CSLB norms.
pub fn default_rules() -> Vec<ImplicationRule> {
    alloc::vec![
        ImplicationRule::implies("is_a_bird", "is_an_animal").expect("valid rule"),
        ImplicationRule::excludes("is_food", "has_wheels").expect("valid rule"),
    ]
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Answer {
    Yes,
    Mostly,
    Possibly,
    No,
}

impl Answer {
    pub fn parse(s: &str) -> Option<Answer> {
        match s.trim().to_ascii_lowercase().as_str() {
            "yes" => Some(Answer::Yes),
            "mostly" => Some(Answer::Mostly),
            "possibly" => Some(Answer::Possibly),
            "no" => Some(Answer::No),
            _ => None,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Answer::Yes => "yes",
            Answer::Mostly => "mostly",
            Answer::Possibly => "possibly",
            Answer::No => "no",
        }
    }

    fn verdict(self) -> Option<Label> {
        match self {
            Answer::Yes | Answer::Mostly => Some(Label::Positive),
            Answer::No => Some(Label::Negative),
            Answer::Possibly => None,
        }
    }
}

/// One pre-aggregated crowd answer for a (word, property) pair.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CrowdJudgment {
    pub word: String,
    pub property: String,
    pub answer: Answer,
}

impl CrowdJudgment {
    pub fn new(word: &str, property: &str, answer: Answer) -> Self {
        CrowdJudgment {
            word: word.trim().to_owned(),
            property: normalize_label(property),
            answer,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Label {
    Positive,
    Negative,
}

impl Label {
    pub fn is_positive(self) -> bool {
        self == Label::Positive
    }

    pub fn from_bool(positive: bool) -> Label {
        if positive {
            Label::Positive
        } else {
            Label::Negative
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Provenance {
    Norm,
    Implied,
    Crowd,
    SeedExpansion,
}

impl Provenance {
    pub fn as_str(self) -> &'static str {
        match self {
            Provenance::Norm => "norm",
            Provenance::Implied => "implied",
            Provenance::Crowd => "crowd",
            Provenance::SeedExpansion => "seed-expansion",
        }
    }

    pub fn parse(s: &str) -> Option<Provenance> {
        match s.trim() {
            "norm" => Some(Provenance::Norm),
            "implied" => Some(Provenance::Implied),
            "crowd" => Some(Provenance::Crowd),
            "seed-expansion" => Some(Provenance::SeedExpansion),
            _ => None,
        }
    }
}

/// Verified positive and negative examples for one property.
///
/// Each word carries exactly one label, so the positive and negative sets
/// are disjoint by construction.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PropertyDataset {
    property: String,
    items: BTreeMap<String, (Label, Provenance)>,
}

impl PropertyDataset {
    pub fn new(property: &str) -> Self {
        PropertyDataset {
            property: normalize_label(property),
            items: BTreeMap::new(),
        }
    }

    /// Builds a dataset from explicit sets; overlapping words are a conflict.
    pub fn from_sets<S: AsRef<str>>(
        property: &str,
        positives: &[S],
        negatives: &[S],
        provenance: Provenance,
    ) -> Result<Self> {
        let mut ds = PropertyDataset::new(property);
        for w in positives {
            ds.set(w.as_ref(), Label::Positive, provenance);
        }
        let mut conflicts = Vec::new();
        for w in negatives {
            let w = w.as_ref().trim();
            if ds.label(w) == Some(Label::Positive) {
                conflicts.push(w.to_owned());
            } else {
                ds.set(w, Label::Negative, provenance);
            }
        }
        if conflicts.is_empty() {
            Ok(ds)
        } else {
            conflicts.sort();
            conflicts.dedup();
            Err(Error::Conflict(conflicts))
        }
    }

    pub fn property(&self) -> &str {
        &self.property
    }

    pub fn rename(&mut self, property: &str) {
        self.property = normalize_label(property);
    }

    /// Sets (or overwrites) the label of `word`.
    pub fn set(&mut self, word: &str, label: Label, provenance: Provenance) {
        self.items
            .insert(word.trim().to_owned(), (label, provenance));
    }

    pub fn remove(&mut self, word: &str) -> bool {
        self.items.remove(word.trim()).is_some()
    }

    pub fn label(&self, word: &str) -> Option<Label> {
        self.items.get(word).map(|&(l, _)| l)
    }

    pub fn provenance(&self, word: &str) -> Option<Provenance> {
        self.items.get(word).map(|&(_, p)| p)
    }

    pub fn contains(&self, word: &str) -> bool {
        self.items.contains_key(word)
    }

    /// All labeled words in lexicographic order.
    pub fn items(&self) -> impl Iterator<Item = (&str, Label, Provenance)> + '_ {
        self.items.iter().map(|(w, &(l, p))| (w.as_str(), l, p))
    }

    pub fn positives(&self) -> Vec<&str> {
        self.with_label(Label::Positive)
    }

    pub fn negatives(&self) -> Vec<&str> {
        self.with_label(Label::Negative)
    }

    fn with_label(&self, label: Label) -> Vec<&str> {
        self.items
            .iter()
            .filter(|(_, &(l, _))| l == label)
            .map(|(w, _)| w.as_str())
            .collect()
    }

    pub fn pos_count(&self) -> usize {
        self.items.values().filter(|(l, _)| l.is_positive()).count()
    }

    pub fn neg_count(&self) -> usize {
        self.len() - self.pos_count()
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    /// Copy restricted to words accepted by `keep`.
    pub fn filtered(&self, mut keep: impl FnMut(&str) -> bool) -> PropertyDataset {
        PropertyDataset {
            property: self.property.clone(),
            items: self
                .items
                .iter()
                .filter(|(w, _)| keep(w))
                .map(|(w, v)| (w.clone(), *v))
                .collect(),
        }
    }
}

/// Positives are the concepts listing `property`; every other concept is a
/// negative. Keeps the noise of incomplete norms.
pub fn naive_dataset(table: &PropertyNormTable, property: &str) -> Result<PropertyDataset> {
    let property = normalize_label(property);
    if !table.has_property(&property) {
        return Err(Error::UnknownProperty(property));
    }
    let mut ds = PropertyDataset::new(&property);
    for (concept, props) in table.entries() {
        let label = Label::from_bool(props.contains(&property));
        ds.set(concept, label, Provenance::Norm);
    }
    Ok(ds)
}

/// Verified examples via implication and exclusion rules targeting
/// `property`. Concepts reached by neither rule type are left out.
pub fn apply_implications(
    table: &PropertyNormTable,
    rules: &[ImplicationRule],
    property: &str,
) -> Result<PropertyDataset> {
    let property = normalize_label(property);
    if !table.has_property(&property) {
        return Err(Error::UnknownProperty(property));
    }
    let relevant: Vec<&ImplicationRule> = rules.iter().filter(|r| r.target == property).collect();
    for rule in &relevant {
        if !table.has_property(&rule.source) {
            return Err(Error::UnknownProperty(rule.source.clone()));
        }
    }
    let listed_by = |props: &BTreeSet<String>, kind: RuleKind| {
        relevant
            .iter()
            .any(|r| r.kind == kind && props.contains(&r.source))
    };

    let mut ds = PropertyDataset::new(&property);
    let mut conflicts = Vec::new();
    for (concept, props) in table.entries() {
        let direct = props.contains(&property);
        let implied = listed_by(props, RuleKind::Implies);
        let excluded = listed_by(props, RuleKind::Excludes);
        match (direct || implied, excluded) {
            (true, true) => conflicts.push(concept.clone()),
            (true, false) => {
                let prov = if direct {
                    Provenance::Norm
                } else {
                    Provenance::Implied
                };
                ds.set(concept, Label::Positive, prov);
            }
            (false, true) => ds.set(concept, Label::Negative, Provenance::Implied),
            (false, false) => {}
        }
    }
    if conflicts.is_empty() {
        Ok(ds)
    } else {
        Err(Error::Conflict(conflicts))
    }
}

/// Folds crowd verdicts into `dataset`: yes/mostly → positive, no →
/// negative, possibly → removed. Crowd verdicts win over existing labels.
/// Judgments for other properties are ignored.
pub fn merge_crowd(dataset: &PropertyDataset, judgments: &[CrowdJudgment]) -> Result<PropertyDataset> {
    let mut verdicts: BTreeMap<&str, Option<Label>> = BTreeMap::new();
    for j in judgments.iter().filter(|j| j.property == dataset.property) {
        let verdict = j.answer.verdict();
        match verdicts.get(j.word.as_str()) {
            Some(Some(prev)) if verdict.is_some_and(|v| v != *prev) => {
                return Err(Error::InconsistentJudgment(j.word.clone()));
            }
            // a definite verdict is never downgraded by "possibly"
            Some(Some(_)) => {}
            _ => {
                verdicts.insert(&j.word, verdict);
            }
        }
    }
    let mut merged = dataset.clone();
    for (word, verdict) in verdicts {
        match verdict {
            Some(label) => merged.set(word, label, Provenance::Crowd),
            None => {
                merged.remove(word);
            }
        }
    }
    Ok(merged)
}

/// Annotation candidates: the top-`n` cosine neighbors of the positive
/// centroid and of each seed, minus words already labeled, ordered by their
/// best similarity (ties by vocabulary index).
///
/// Positives missing from the vocabulary are ignored for the centroid.
pub fn expand_candidates<S: AsRef<str>>(
    matrix: &EmbeddingMatrix,
    dataset: &PropertyDataset,
    seeds: &[S],
    n: usize,
    pool: &Pool,
) -> Result<Vec<String>> {
    if n == 0 {
        return Err(Error::InvalidArgument("n must be at least 1".into()));
    }
    let positive_rows: Vec<usize> = dataset
        .positives()
        .iter()
        .filter_map(|w| matrix.resolve(w))
        .collect();
    if positive_rows.is_empty() {
        return Err(Error::EmptySet("no positive example in vocabulary"));
    }
    let labeled: BTreeSet<usize> = dataset
        .items()
        .filter_map(|(w, _, _)| matrix.resolve(w))
        .collect();

    let mut queries = alloc::vec![embedding::centroid_of_indices(matrix, &positive_rows)?];
    for row in matrix.resolve_all(seeds)? {
        queries.push(matrix.vector(row));
    }

    let mut best: BTreeMap<usize, f64> = BTreeMap::new();
    for q in &queries {
        for (row, sim) in embedding::rank_indices(matrix, q, pool)?.into_iter().take(n) {
            if labeled.contains(&row) {
                continue;
            }
            let entry = best.entry(row).or_insert(sim);
            if sim > *entry {
                *entry = sim;
            }
        }
    }
    let mut out: Vec<(usize, f64)> = best.into_iter().collect();
    out.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
    Ok(out
        .into_iter()
        .map(|(row, _)| matrix.token(row).to_owned())
        .collect())
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SplitSpec {
    LeaveOneOut,
    Fixed {
        train: BTreeSet<String>,
        test: BTreeSet<String>,
    },
}

impl SplitSpec {
    pub fn fixed<S: AsRef<str>>(train: &[S], test: &[S]) -> Result<SplitSpec> {
        let train: BTreeSet<String> = train.iter().map(|w| w.as_ref().trim().to_owned()).collect();
        let test: BTreeSet<String> = test.iter().map(|w| w.as_ref().trim().to_owned()).collect();
        if let Some(w) = train.intersection(&test).next() {
            return Err(Error::InvalidArgument(format!(
                "word {w} is in both train and test"
            )));
        }
        Ok(SplitSpec::Fixed { train, test })
    }
}

/// One train/test partition of a labeled dataset.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Fold {
    pub train_positives: Vec<String>,
    pub train_negatives: Vec<String>,
    pub test: Vec<(String, Label)>,
}

/// Leave-one-out yields one fold per labeled item (in lexicographic order of
/// the held-out word); a fixed split yields one fold.
pub fn build_split(dataset: &PropertyDataset, spec: &SplitSpec) -> Result<Vec<Fold>> {
    let folds = match spec {
        SplitSpec::LeaveOneOut => dataset
            .items()
            .map(|(held_out, label, _)| {
                let mut fold = Fold {
                    train_positives: Vec::new(),
                    train_negatives: Vec::new(),
                    test: alloc::vec![(held_out.to_owned(), label)],
                };
                for (w, l, _) in dataset.items().filter(|(w, _, _)| *w != held_out) {
                    match l {
                        Label::Positive => fold.train_positives.push(w.to_owned()),
                        Label::Negative => fold.train_negatives.push(w.to_owned()),
                    }
                }
                fold
            })
            .collect::<Vec<_>>(),
        SplitSpec::Fixed { train, test } => {
            let label_of = |w: &String| {
                dataset.label(w).ok_or_else(|| {
                    Error::InvalidArgument(format!("split word {w} not in dataset"))
                })
            };
            let mut fold = Fold {
                train_positives: Vec::new(),
                train_negatives: Vec::new(),
                test: Vec::new(),
            };
            for w in train {
                match label_of(w)? {
                    Label::Positive => fold.train_positives.push(w.clone()),
                    Label::Negative => fold.train_negatives.push(w.clone()),
                }
            }
            for w in test {
                fold.test.push((w.clone(), label_of(w)?));
            }
            alloc::vec![fold]
        }
    };
    if let Some(bad) = folds.iter().find(|f| f.train_positives.is_empty()) {
        let held: Vec<&str> = bad.test.iter().map(|(w, _)| w.as_str()).collect();
        return Err(Error::DegenerateFold(format!(
            "no training positives when testing on {}",
            held.join(", ")
        )));
    }
    Ok(folds)
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn table(pairs: &[(&str, &str)]) -> PropertyNormTable {
        let mut t = PropertyNormTable::new();
        for (c, p) in pairs {
            t.insert(c, p).unwrap();
        }
        t
    }

    #[test]
    fn norms_aggregate_and_dedupe() {
        let t = table(&[
            ("falcon", "is_a_bird"),
            ("falcon", "has_a_beak"),
            ("falcon", "has_a_beak"),
        ]);
        let props: Vec<&str> = t
            .properties_of("falcon")
            .unwrap()
            .iter()
            .map(|s| s.as_str())
            .collect();
        assert_eq!(props, ["has_a_beak", "is_a_bird"]);
        assert_eq!(t.concept_count(), 1);
    }

    #[test]
    fn labels_are_normalized() {
        let t = table(&[("tiger", "is dangerous")]);
        assert!(t.has_property("is_dangerous"));
    }

    #[test]
    fn select_properties_threshold_and_order() {
        let mut t = PropertyNormTable::new();
        let mut tally: BTreeMap<&str, usize> = BTreeMap::new();
        for (prop, count) in [("a", 30usize), ("b", 20), ("c", 5), ("d", 19), ("e", 25)] {
            for i in 0..count {
                t.insert(&format!("concept{i}"), prop).unwrap();
                *tally.entry(prop).or_default() += 1;
            }
        }
        // oracle: direct tally, filter, sort
        let mut expected: Vec<(&str, usize)> =
            tally.into_iter().filter(|&(_, n)| n >= 20).collect();
        expected.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(b.0)));
        let expected: Vec<String> = expected.into_iter().map(|(p, _)| p.into()).collect();
        assert_eq!(select_properties(&t, 20).unwrap(), expected);
        assert_eq!(select_properties(&t, 20).unwrap(), ["a", "e", "b"]);
        assert_eq!(select_properties(&t, 1).unwrap().len(), 5);
        assert!(select_properties(&t, 0).is_err());
    }

    #[test]
    fn naive_dataset_keeps_norm_noise() {
        let mut pairs = vec![];
        let names = ["c0", "c1", "c2", "c3", "c4", "c5", "c6", "c7", "c8", "c9"];
        for (i, n) in names.iter().enumerate() {
            pairs.push((*n, if i < 4 { "p" } else { "q" }));
        }
        let ds = naive_dataset(&table(&pairs), "p").unwrap();
        assert_eq!((ds.pos_count(), ds.neg_count()), (4, 6));

        let t = table(&[
            ("falcon", "is_a_bird"),
            ("dog", "is_an_animal"),
        ]);
        let ds = naive_dataset(&t, "is_an_animal").unwrap();
        assert_eq!(ds.label("falcon"), Some(Label::Negative));
        assert_eq!(
            naive_dataset(&t, "has_wheels"),
            Err(Error::UnknownProperty("has_wheels".into()))
        );
    }

    #[test]
    fn implications_add_verified_labels() {
        let t = table(&[
            ("falcon", "is_a_bird"),
            ("dog", "is_an_animal"),
            ("apple", "is_food"),
            ("bread", "is_food"),
            ("car", "has_wheels"),
            ("rock", "is_hard"),
        ]);
        let ds = apply_implications(&t, &default_rules(), "is_an_animal").unwrap();
        assert_eq!(ds.label("falcon"), Some(Label::Positive));
        assert_eq!(ds.provenance("falcon"), Some(Provenance::Implied));
        assert_eq!(ds.provenance("dog"), Some(Provenance::Norm));
        assert_eq!(ds.label("rock"), None);

        let ds = apply_implications(&t, &default_rules(), "has_wheels").unwrap();
        assert_eq!(ds.positives(), ["car"]);
        assert_eq!(ds.negatives(), ["apple", "bread"]);

        let ds = apply_implications(&t, &[], "has_wheels").unwrap();
        assert_eq!(ds.positives(), ["car"]);
        assert!(ds.negatives().is_empty());
    }

    #[test]
    fn implication_conflicts_are_reported() {
        let t = table(&[
            ("truck", "has_wheels"),
            ("truck", "is_food"),
            ("apple", "is_food"),
        ]);
        let err = apply_implications(&t, &default_rules(), "has_wheels").unwrap_err();
        assert_eq!(err, Error::Conflict(vec!["truck".into()]));
    }

    #[test]
    fn unknown_rule_source_is_rejected() {
        let t = table(&[("car", "has_wheels")]);
        let rules = [ImplicationRule::excludes("is_food", "has_wheels").unwrap()];
        assert_eq!(
            apply_implications(&t, &rules, "has_wheels"),
            Err(Error::UnknownProperty("is_food".into()))
        );
        assert!(ImplicationRule::implies("x", "x").is_err());
    }

    #[test]
    fn crowd_merge_rules() {
        let base = PropertyDataset::from_sets("is_dangerous", &["lion"], &["chicken"], Provenance::Implied)
            .unwrap();
        let j = [
            CrowdJudgment::new("tiger", "is_dangerous", Answer::Yes),
            CrowdJudgment::new("bikini", "is_dangerous", Answer::Possibly),
            CrowdJudgment::new("lion", "is_dangerous", Answer::No),
            CrowdJudgment::new("pea", "is_green", Answer::Yes),
            CrowdJudgment::new("knife", "is_dangerous", Answer::Mostly),
        ];
        let merged = merge_crowd(&base, &j).unwrap();
        assert_eq!(merged.label("tiger"), Some(Label::Positive));
        assert_eq!(merged.label("knife"), Some(Label::Positive));
        assert_eq!(merged.label("bikini"), None);
        assert_eq!(merged.label("lion"), Some(Label::Negative));
        assert_eq!(merged.provenance("lion"), Some(Provenance::Crowd));
        assert_eq!(merged.label("chicken"), Some(Label::Negative));
        assert!(!merged.contains("pea"));
        assert_eq!(merge_crowd(&merged, &j).unwrap(), merged);

        let bad = [
            CrowdJudgment::new("wolf", "is_dangerous", Answer::Yes),
            CrowdJudgment::new("wolf", "is_dangerous", Answer::No),
        ];
        assert_eq!(
            merge_crowd(&base, &bad),
            Err(Error::InconsistentJudgment("wolf".into()))
        );
    }

    #[test]
    fn possibly_removes_existing_label() {
        let base = PropertyDataset::from_sets("is_pink", &["flamingo", "bikini"], &["coal"], Provenance::Norm)
            .unwrap();
        let merged = merge_crowd(&base, &[CrowdJudgment::new("bikini", "is_pink", Answer::Possibly)]).unwrap();
        assert!(!merged.contains("bikini"));
        assert_eq!(merged.pos_count(), 1);
    }

    #[test]
    fn loo_split_counts() {
        let ds = PropertyDataset::from_sets("p", &["a", "b", "c"], &["x", "y"], Provenance::Norm).unwrap();
        let folds = build_split(&ds, &SplitSpec::LeaveOneOut).unwrap();
        assert_eq!(folds.len(), 5);
        for fold in &folds {
            let (held, _) = &fold.test[0];
            assert!(!fold.train_positives.contains(held));
            assert!(!fold.train_negatives.contains(held));
            assert_eq!(fold.train_positives.len() + fold.train_negatives.len(), 4);
        }
        let held: Vec<&str> = folds.iter().map(|f| f.test[0].0.as_str()).collect();
        assert_eq!(held, ["a", "b", "c", "x", "y"]);
    }

    #[test]
    fn degenerate_loo_fold() {
        let ds = PropertyDataset::from_sets("p", &["a"], &["x"], Provenance::Norm).unwrap();
        assert!(matches!(
            build_split(&ds, &SplitSpec::LeaveOneOut),
            Err(Error::DegenerateFold(_))
        ));
    }

    #[test]
    fn fixed_split_labels_from_dataset() {
        let ds = PropertyDataset::from_sets("p", &["a", "b", "c"], &["x", "y"], Provenance::Norm).unwrap();
        let spec = SplitSpec::fixed(&["a", "x"], &["b", "y"]).unwrap();
        let folds = build_split(&ds, &spec).unwrap();
        assert_eq!(folds.len(), 1);
        assert_eq!(folds[0].train_positives, ["a"]);
        assert_eq!(folds[0].train_negatives, ["x"]);
        assert_eq!(
            folds[0].test,
            [("b".into(), Label::Positive), ("y".into(), Label::Negative)]
        );
        assert!(SplitSpec::fixed(&["a"], &["a"]).is_err());
        let spec = SplitSpec::fixed(&["zzz"], &["b"]).unwrap();
        assert!(build_split(&ds, &spec).is_err());
    }

    fn planted_space() -> EmbeddingMatrix {
        // five words around (1, 0, 0), five spread elsewhere
        let rows: [(&str, [f32; 3]); 10] = [
            ("c1", [1.0, 0.05, 0.0]),
            ("c2", [1.0, 0.0, 0.05]),
            ("c3", [1.0, -0.05, 0.0]),
            ("c4", [1.0, 0.0, -0.05]),
            ("c5", [1.0, 0.03, 0.03]),
            ("o1", [0.0, 1.0, 0.0]),
            ("o2", [0.0, 0.0, 1.0]),
            ("o3", [-1.0, 0.0, 0.0]),
            ("o4", [0.0, -1.0, 0.2]),
            ("o5", [0.1, 0.7, -0.7]),
        ];
        EmbeddingMatrix::from_rows(
            rows.iter().map(|(t, _)| (*t).into()).collect(),
            3,
            rows.iter().flat_map(|(_, r)| r.iter().copied()).collect(),
        )
        .unwrap()
    }

    #[test]
    fn expansion_returns_unlabeled_cluster_members() {
        let m = planted_space();
        let ds = PropertyDataset::from_sets("p", &["c1", "c2"], &["o1"], Provenance::Norm).unwrap();
        // oracle: brute-force ranking of the centroid over all rows
        let c = embedding::centroid(&m, &["c1", "c2"]).unwrap();
        let mut brute: Vec<(f64, usize)> = (0..m.len())
            .map(|i| (embedding::cosine(&c, &m.vector(i)).unwrap(), i))
            .collect();
        brute.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)));
        let top5: BTreeSet<&str> = brute[..5].iter().map(|&(_, i)| m.token(i)).collect();
        assert_eq!(top5, ["c1", "c2", "c3", "c4", "c5"].into_iter().collect());

        let got = expand_candidates::<&str>(&m, &ds, &[], 5, &Pool::FullVocab).unwrap();
        let got_set: BTreeSet<&str> = got.iter().map(|s| s.as_str()).collect();
        assert_eq!(got_set, ["c3", "c4", "c5"].into_iter().collect());
    }

    #[test]
    fn expansion_with_labeled_nearest_neighbor_is_empty() {
        let m = planted_space();
        // single positive c1 is both the centroid and the seed; its nearest
        // neighbor is itself
        let ds = PropertyDataset::from_sets("p", &["c1"], &["o1"], Provenance::Norm).unwrap();
        let got = expand_candidates(&m, &ds, &["c1"], 1, &Pool::FullVocab).unwrap();
        assert!(got.is_empty());
    }

    #[test]
    fn expansion_orders_by_best_similarity() {
        let m = planted_space();
        let ds = PropertyDataset::from_sets("p", &["c1"], &["o3"], Provenance::Norm).unwrap();
        let got = expand_candidates(&m, &ds, &["o1"], 3, &Pool::FullVocab).unwrap();
        // o1 itself is an unlabeled seed with similarity 1.0
        assert_eq!(got[0], "o1");
        assert!(got.iter().all(|w| !ds.contains(w)));
        assert!(matches!(
            expand_candidates(&m, &ds, &["missing"], 3, &Pool::FullVocab),
            Err(Error::MissingWord(_))
        ));
    }
}
