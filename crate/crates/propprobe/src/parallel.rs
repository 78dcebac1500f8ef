//! Concurrent evaluation of many properties. Every (property, probe, fold)
//! triple is an independent task; results are reduced in task order, so the
//! output does not depend on the number of worker threads.

use rayon::prelude::*;

use propprobe_core::dataset::{PropertyDataset, SplitSpec};
use propprobe_core::embedding::EmbeddingMatrix;
use propprobe_core::evaluation::{
    assemble_report, combine_folds, EvalConfig, Fragment, IndexFold, Method, PreparedProperty, Probe, PropertyReport,
};

use crate::error::{Error, Result};

/// Runs `f` on a pool of `jobs` threads (rayon's default when `None`).
pub fn with_jobs<T: Send>(jobs: Option<usize>, f: impl FnOnce() -> T + Send) -> Result<T> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = jobs {
        builder = builder.num_threads(n);
    }
    let pool = builder
        .build()
        .map_err(|e| Error::Config(format!("cannot start worker threads: {e}")))?;
    Ok(pool.install(f))
}

/// One property to evaluate against its embedding matrix.
pub struct Job<'m> {
    pub matrix: &'m EmbeddingMatrix,
    pub dataset: &'m PropertyDataset,
}

struct Prepared<'m> {
    prepared: PreparedProperty<'m>,
    folds: Vec<IndexFold>,
}

fn prepare<'m>(job: &Job<'m>, methods: &[Method], split: &SplitSpec, config: &EvalConfig) -> Result<Prepared<'m>> {
    let mut prepared = PreparedProperty::new(job.matrix, job.dataset, config.oov)?;
    let folds = match split {
        SplitSpec::LeaveOneOut => prepared.loo_folds()?,
        fixed => vec![prepared.fixed_fold(fixed)?],
    };
    if methods.contains(&Method::Neigh) && matches!(split, SplitSpec::LeaveOneOut) {
        prepared.cache_centroid(&config.pool)?;
    }
    Ok(Prepared { prepared, folds })
}

/// Per-property method fragments, in `jobs` order and `methods` order.
pub fn evaluate_fragments<'m>(
    jobs: &[Job<'m>],
    methods: &[Method],
    split: &SplitSpec,
    config: &EvalConfig,
) -> Result<Vec<(PreparedProperty<'m>, Vec<Fragment>)>> {
    let prepared: Vec<Prepared<'m>> = jobs
        .par_iter()
        .map(|j| prepare(j, methods, split, config))
        .collect::<Vec<_>>()
        .into_iter()
        .collect::<std::result::Result<_, _>>()?;

    let mut tasks: Vec<(usize, Probe, usize)> = Vec::new();
    for (p, prep) in prepared.iter().enumerate() {
        for &method in methods {
            for probe in PreparedProperty::probes_for(method, config) {
                tasks.extend((0..prep.folds.len()).map(|f| (p, probe, f)));
            }
        }
    }
    let outputs: Vec<_> = tasks
        .par_iter()
        .map(|&(p, probe, f)| prepared[p].prepared.run_fold(probe, &prepared[p].folds[f], config))
        .collect();

    let mut outputs = outputs.into_iter();
    let mut out = Vec::with_capacity(prepared.len());
    for prep in prepared {
        let mut fragments = Vec::with_capacity(methods.len());
        for &method in methods {
            let mut per_probe = Vec::new();
            for probe in PreparedProperty::probes_for(method, config) {
                let outs = outputs
                    .by_ref()
                    .take(prep.folds.len())
                    .collect::<std::result::Result<Vec<_>, _>>()?;
                per_probe.push((probe, outs));
            }
            fragments.push(combine_folds(&prep.prepared, method, &prep.folds, &per_probe, config)?);
        }
        out.push((prep.prepared, fragments));
    }
    Ok(out)
}

/// Report rows for every job, in input order.
pub fn evaluate_all(
    jobs: &[Job<'_>],
    methods: &[Method],
    split: &SplitSpec,
    config: &EvalConfig,
) -> Result<Vec<PropertyReport>> {
    evaluate_fragments(jobs, methods, split, config)?
        .iter()
        .map(|(prep, frags)| assemble_report(prep, frags, config).map_err(Error::from))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use propprobe_core::evaluation::evaluate_property;
    use propprobe_core::synthbench::{generate_scenario, ScenarioKind, ScenarioSpec};

    #[test]
    fn matches_sequential_evaluation_for_any_job_count() {
        let specs: Vec<ScenarioSpec> = ScenarioKind::ALL
            .into_iter()
            .enumerate()
            .map(|(i, kind)| ScenarioSpec {
                kind,
                dim: 10,
                n_pos: 12,
                n_neg: 12,
                cluster_count: 3,
                cluster_spread: 0.3,
                signal_dims: 3,
                signal_strength: if kind == ScenarioKind::Absent { 0.0 } else { 0.5 },
                seed: 40 + i as u64,
            })
            .collect();
        let data: Vec<_> = specs.iter().map(|s| generate_scenario(s).unwrap()).collect();
        let jobs: Vec<Job<'_>> = data.iter().map(|(m, d)| Job { matrix: m, dataset: d }).collect();
        let config = EvalConfig {
            n_grid: vec![5, 10, 15],
            ..Default::default()
        };
        let expected: Vec<PropertyReport> = data
            .iter()
            .map(|(m, d)| evaluate_property(m, d, &Method::ALL, &SplitSpec::LeaveOneOut, &config).unwrap())
            .collect();
        for threads in [1, 3] {
            let got =
                with_jobs(Some(threads), || evaluate_all(&jobs, &Method::ALL, &SplitSpec::LeaveOneOut, &config))
                    .unwrap()
                    .unwrap();
            assert_eq!(got, expected);
        }
    }
}
