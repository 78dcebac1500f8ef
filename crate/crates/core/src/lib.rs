//! Diagnostics for whether semantic properties are encoded in word
//! embeddings.
//!
//! Supervised probes (logistic regression and a one-hidden-layer MLP) are
//! contrasted with a full-vector baseline that labels the `n` nearest
//! neighbors of the positive-example centroid. A property that classifiers
//! recover but centroid proximity misses is carried by specific directions
//! of the space rather than by overall similarity.
//!
//! The crate is `no_std` and needs only `alloc`; file formats, parallel
//! evaluation and the command-line tool live in the `propprobe` crate.

#![no_std]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod dataset;
pub mod embedding;
pub mod error;
pub mod evaluation;
pub mod probes;
pub mod synthbench;

pub use dataset::{
    apply_implications, build_split, expand_candidates, merge_crowd, naive_dataset,
    select_properties, Answer, CrowdJudgment, Fold, ImplicationRule, Label, PropertyDataset,
    PropertyNormTable, Provenance, RuleKind, SplitSpec,
};
pub use embedding::{centroid, cosine, rank_by_cosine, EmbeddingMatrix, Pool, WordVector};
pub use error::{Error, Result};
pub use evaluation::{
    compare_hypotheses, evaluate_property, fixed_split_evaluate, loo_evaluate, EvalConfig,
    HypothesisEntry, Method, OovPolicy, PropertyReport, Thresholds,
};
pub use synthbench::{generate_scenario, ScenarioKind, ScenarioSpec};
