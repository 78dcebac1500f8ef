//! Synthetic embedding spaces with a planted (or withheld) property.
//!
//! Every word is `center + noise`, with cluster centers at unit distance from
//! the origin and isotropic Gaussian noise of total scale `cluster_spread`.
//! The three scenario kinds differ in how positives relate to the clusters:
//!
//! * cluster-aligned: positives are one cluster and are pushed further along
//!   that cluster's own direction; negatives fill the other clusters.
//! * cross-cutting: both classes are spread evenly over all clusters and
//!   positives share an additive offset on `signal_dims` coordinates, on
//!   which cluster centers are zero.
//! * absent: labels are assigned at random, independent of geometry.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::dataset::{Label, PropertyDataset, Provenance};
use crate::embedding::EmbeddingMatrix;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum ScenarioKind {
    ClusterAligned,
    CrossCutting,
    Absent,
}

impl ScenarioKind {
    pub const ALL: [ScenarioKind; 3] = [
        ScenarioKind::ClusterAligned,
        ScenarioKind::CrossCutting,
        ScenarioKind::Absent,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ScenarioKind::ClusterAligned => "cluster-aligned",
            ScenarioKind::CrossCutting => "cross-cutting",
            ScenarioKind::Absent => "absent",
        }
    }

    pub fn parse(s: &str) -> Option<ScenarioKind> {
        match s.trim() {
            "cluster-aligned" => Some(ScenarioKind::ClusterAligned),
            "cross-cutting" => Some(ScenarioKind::CrossCutting),
            "absent" => Some(ScenarioKind::Absent),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioSpec {
    pub kind: ScenarioKind,
    pub dim: usize,
    pub n_pos: usize,
    pub n_neg: usize,
    pub cluster_count: usize,
    /// Expected Euclidean norm of the per-word noise.
    pub cluster_spread: f64,
    pub signal_dims: usize,
    pub signal_strength: f64,
    pub seed: u64,
}

/// Smallest class size accepted by [`ScenarioSpec::validate`].
pub const MIN_CLASS_SIZE: usize = 10;

impl ScenarioSpec {
    pub fn validate(&self) -> Result<()> {
        let fail = |msg: String| Err(Error::Spec(msg));
        if self.dim == 0 {
            return fail("dim must be positive".into());
        }
        if self.signal_dims > self.dim {
            return fail(format!(
                "signal_dims {} exceeds dim {}",
                self.signal_dims, self.dim
            ));
        }
        if self.n_pos < MIN_CLASS_SIZE || self.n_neg < MIN_CLASS_SIZE {
            return fail(format!("n_pos and n_neg must be at least {MIN_CLASS_SIZE}"));
        }
        if self.cluster_count == 0 {
            return fail("cluster_count must be positive".into());
        }
        if !(self.cluster_spread.is_finite() && self.cluster_spread >= 0.0) {
            return fail("cluster_spread must be finite and non-negative".into());
        }
        if !self.signal_strength.is_finite() || self.signal_strength < 0.0 {
            return fail("signal_strength must be finite and non-negative".into());
        }
        match self.kind {
            ScenarioKind::Absent => {}
            ScenarioKind::ClusterAligned | ScenarioKind::CrossCutting if self.signal_strength == 0.0 => {
                return fail("signal_strength must be positive unless kind is absent".into());
            }
            ScenarioKind::ClusterAligned if self.cluster_count < 2 => {
                return fail("cluster-aligned needs at least two clusters".into());
            }
            ScenarioKind::CrossCutting if self.signal_dims == 0 => {
                return fail("cross-cutting needs at least one signal dimension".into());
            }
            ScenarioKind::CrossCutting if self.signal_dims == self.dim => {
                return fail("cross-cutting needs dimensions outside the signal".into());
            }
            _ => {}
        }
        Ok(())
    }

    /// Property label used for the generated dataset, e.g.
    /// `cross-cutting_s0.40_seed7`.
    pub fn name(&self) -> String {
        format!("{}_s{:.2}_seed{}", self.kind.as_str(), self.cluster_spread, self.seed)
    }
}

fn gaussian(rng: &mut ChaCha8Rng) -> f64 {
    StandardNormal.sample(rng)
}

/// Random unit vector supported on the coordinates where `mask` is true.
fn unit_on(rng: &mut ChaCha8Rng, mask: &[bool]) -> Vec<f64> {
    loop {
        let v: Vec<f64> = mask
            .iter()
            .map(|&m| if m { gaussian(rng) } else { 0.0 })
            .collect();
        let norm = libm::sqrt(v.iter().map(|x| x * x).sum());
        if norm > 1e-12 {
            return v.into_iter().map(|x| x / norm).collect();
        }
    }
}

/// Builds the matrix and labeled dataset for `spec`. Output depends only on
/// the spec (including its seed).
pub fn generate_scenario(spec: &ScenarioSpec) -> Result<(EmbeddingMatrix, PropertyDataset)> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let dim = spec.dim;
    let k = spec.cluster_count;
    let total = spec.n_pos + spec.n_neg;

    let mut signal_mask = vec![false; dim];
    if spec.kind == ScenarioKind::CrossCutting {
        let mut coords: Vec<usize> = (0..dim).collect();
        coords.shuffle(&mut rng);
        for &c in &coords[..spec.signal_dims] {
            signal_mask[c] = true;
        }
    }
    let center_mask: Vec<bool> = signal_mask.iter().map(|&s| !s).collect();
    let centers: Vec<Vec<f64>> = (0..k).map(|_| unit_on(&mut rng, &center_mask)).collect();
    let signal: Vec<f64> = if spec.kind == ScenarioKind::CrossCutting {
        let u = unit_on(&mut rng, &signal_mask);
        u.into_iter().map(|x| x * spec.signal_strength).collect()
    } else {
        vec![0.0; dim]
    };

    // (cluster, label) per word
    let mut plan: Vec<(usize, Label)> = Vec::with_capacity(total);
    match spec.kind {
        ScenarioKind::ClusterAligned => {
            plan.extend((0..spec.n_pos).map(|_| (0, Label::Positive)));
            plan.extend((0..spec.n_neg).map(|i| (1 + i % (k - 1), Label::Negative)));
        }
        ScenarioKind::CrossCutting => {
            plan.extend((0..spec.n_pos).map(|i| (i % k, Label::Positive)));
            plan.extend((0..spec.n_neg).map(|i| (i % k, Label::Negative)));
        }
        ScenarioKind::Absent => {
            let mut labels: Vec<Label> = (0..total)
                .map(|i| Label::from_bool(i < spec.n_pos))
                .collect();
            labels.shuffle(&mut rng);
            plan.extend(labels.into_iter().enumerate().map(|(i, l)| (i % k, l)));
        }
    }
    plan.shuffle(&mut rng);

    let noise_scale = spec.cluster_spread / libm::sqrt(dim as f64);
    let mut data = Vec::with_capacity(total * dim);
    for &(cluster, label) in &plan {
        let center = &centers[cluster];
        let boost = match (spec.kind, label) {
            (ScenarioKind::ClusterAligned, Label::Positive) => spec.signal_strength,
            _ => 0.0,
        };
        let offset = matches!((spec.kind, label), (ScenarioKind::CrossCutting, Label::Positive));
        for d in 0..dim {
            let mut v = center[d] * (1.0 + boost) + noise_scale * gaussian(&mut rng);
            if offset {
                v += signal[d];
            }
            data.push(v as f32);
        }
    }

    let width = format!("{total}").len().max(4);
    let vocab: Vec<String> = (1..=total).map(|i| format!("w{i:0width$}")).collect();
    let matrix = EmbeddingMatrix::from_rows(vocab, dim, data)?;
    let mut dataset = PropertyDataset::new(&spec.name());
    for (i, &(_, label)) in plan.iter().enumerate() {
        dataset.set(matrix.token(i), label, Provenance::Norm);
    }
    Ok((matrix, dataset))
}

/// Default recipe for the verification battery (dim 50, 200/200 words,
/// five clusters).
pub fn base_spec(kind: ScenarioKind, cluster_spread: f64, seed: u64) -> ScenarioSpec {
    ScenarioSpec {
        kind,
        dim: 50,
        n_pos: 200,
        n_neg: 200,
        cluster_count: 5,
        cluster_spread,
        signal_dims: 5,
        signal_strength: match kind {
            ScenarioKind::ClusterAligned => 0.25,
            ScenarioKind::CrossCutting => 0.8 * cluster_spread,
            ScenarioKind::Absent => 0.0,
        },
        seed,
    }
}

/// Spreads swept by [`standard_battery`], tight to loose.
pub const BATTERY_SPREADS: [f64; 5] = [0.2, 0.4, 0.6, 0.8, 1.0];

/// Spread used when a single scenario per kind is wanted.
pub const REFERENCE_SPREAD: f64 = 0.2;

/// Five spreads × three kinds, deterministic seeds.
pub fn standard_battery() -> Vec<ScenarioSpec> {
    let mut specs = Vec::new();
    for (ki, kind) in ScenarioKind::ALL.into_iter().enumerate() {
        for (si, &spread) in BATTERY_SPREADS.iter().enumerate() {
            specs.push(base_spec(kind, spread, 1000 + (ki * 10 + si) as u64));
        }
    }
    specs
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::evaluation::metrics::average_pairwise_cosine;

    #[test]
    fn generation_is_deterministic() {
        let spec = base_spec(ScenarioKind::CrossCutting, 0.5, 3);
        let (m1, d1) = generate_scenario(&spec).unwrap();
        let (m2, d2) = generate_scenario(&spec).unwrap();
        assert_eq!(m1, m2);
        assert_eq!(d1, d2);
        assert!(m1.data().iter().zip(m2.data()).all(|(a, b)| a.to_bits() == b.to_bits()));
        let (m3, _) = generate_scenario(&ScenarioSpec { seed: 4, ..spec }).unwrap();
        assert_ne!(m1, m3);
    }

    #[test]
    fn counts_and_token_names() {
        let spec = base_spec(ScenarioKind::Absent, 0.5, 1);
        let (m, d) = generate_scenario(&spec).unwrap();
        assert_eq!((d.pos_count(), d.neg_count()), (200, 200));
        assert_eq!(m.len(), 400);
        assert_eq!(m.dim(), 50);
        assert_eq!(m.token(0), "w0001");
        assert_eq!(m.token(399), "w0400");
    }

    #[test]
    fn spec_validation() {
        let ok = base_spec(ScenarioKind::CrossCutting, 0.5, 1);
        assert!(ok.validate().is_ok());
        let bad = [
            ScenarioSpec { signal_dims: 60, ..ok.clone() },
            ScenarioSpec { n_pos: 9, ..ok.clone() },
            ScenarioSpec { signal_strength: 0.0, ..ok.clone() },
            ScenarioSpec { cluster_count: 0, ..ok.clone() },
            ScenarioSpec { cluster_spread: f64::NAN, ..ok.clone() },
            ScenarioSpec { kind: ScenarioKind::ClusterAligned, cluster_count: 1, ..ok.clone() },
        ];
        for spec in bad {
            assert!(matches!(generate_scenario(&spec), Err(Error::Spec(_))), "{spec:?}");
        }
        let absent = ScenarioSpec { kind: ScenarioKind::Absent, signal_strength: 0.0, ..ok };
        assert!(absent.validate().is_ok());
    }

    #[test]
    fn cross_cutting_positives_are_more_diverse() {
        for &spread in &BATTERY_SPREADS {
            let aligned = base_spec(ScenarioKind::ClusterAligned, spread, 5);
            let crossing = ScenarioSpec { kind: ScenarioKind::CrossCutting, ..aligned.clone() };
            let (ma, da) = generate_scenario(&aligned).unwrap();
            let (mc, dc) = generate_scenario(&crossing).unwrap();
            let ca = average_pairwise_cosine(&ma, &da.positives()).unwrap();
            let cc = average_pairwise_cosine(&mc, &dc.positives()).unwrap();
            assert!(cc < ca, "spread {spread}: cross {cc} vs aligned {ca}");
        }
    }

    #[test]
    fn battery_has_fifteen_distinct_scenarios() {
        let b = standard_battery();
        assert_eq!(b.len(), 15);
        let mut names: Vec<String> = b.iter().map(|s| s.name()).collect();
        names.sort();
        names.dedup();
        assert_eq!(names.len(), 15);
    }
}
