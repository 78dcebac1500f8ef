//! Subcommand implementations. Each reads only the inputs named in its
//! [`RunConfig`] and writes only the declared outputs; progress goes to
//! standard error.

use std::fmt::Write as _;
use std::io::BufRead;
use std::path::{Path, PathBuf};

use rayon::prelude::*;

use propprobe_core::dataset::{
    apply_implications, default_rules, expand_candidates, merge_crowd, select_properties, PropertyDataset, SplitSpec,
};
use propprobe_core::embedding::EmbeddingMatrix;
use propprobe_core::evaluation::{compare_hypotheses, EvalConfig, Method, OovPolicy, PropertyReport};
use propprobe_core::probes::{fit_centroid, train_logistic, train_mlp, ProbeModel, Samples};
use propprobe_core::synthbench::{generate_scenario, standard_battery, ScenarioSpec};

use crate::config::{RunConfig, SynthSource};
use crate::error::{Error, Result};
use crate::model_io::dump_model;
use crate::parallel::{evaluate_all, evaluate_fragments, with_jobs, Job};
use crate::report::{emit_report, emit_verdicts};
use crate::tables;
use crate::word2vec::{load_embeddings, save_embeddings, EmbeddingFormat};

fn require<'a, T>(value: &'a Option<T>, key: &str, command: &str) -> Result<&'a T> {
    value
        .as_ref()
        .ok_or_else(|| Error::Config(format!("{command} needs `{key}`")))
}

fn embeddings(config: &RunConfig, command: &str) -> Result<EmbeddingMatrix> {
    let path = require(&config.embeddings, "embeddings", command)?;
    eprintln!("loading {} ({})", path.display(), config.embeddings_format.as_str());
    let m = load_embeddings(path, config.embeddings_format, config.max_vocab)?;
    eprintln!("loaded {} vectors of dimension {}", m.len(), m.dim());
    Ok(m)
}

fn scenario_specs(source: &SynthSource) -> Result<Vec<ScenarioSpec>> {
    match source {
        SynthSource::StandardBattery => Ok(standard_battery()),
        SynthSource::SpecFile(path) => tables::load_scenarios(path),
    }
}

fn word_list(path: &Path) -> Result<Vec<String>> {
    let mut words = Vec::new();
    for line in tables::open(path)?.lines() {
        let line = line.map_err(|e| Error::io(path, e))?;
        let w = line.trim();
        if !w.is_empty() && !w.starts_with('#') {
            words.push(w.to_owned());
        }
    }
    Ok(words)
}

fn split(config: &RunConfig) -> Result<SplitSpec> {
    match (&config.split_train, &config.split_test) {
        (Some(train), Some(test)) => Ok(SplitSpec::fixed(&word_list(train)?, &word_list(test)?)?),
        _ => Ok(SplitSpec::LeaveOneOut),
    }
}

/// The (matrix, dataset) pairs an `evaluate` or `sweep` run works on: either
/// generated scenarios or the configured datasets against one embedding file.
enum Inputs {
    Synthetic(Vec<(EmbeddingMatrix, PropertyDataset)>),
    Real(EmbeddingMatrix, Vec<PropertyDataset>),
}

impl Inputs {
    fn load(config: &RunConfig, command: &str) -> Result<Inputs> {
        if let Some(source) = &config.synth {
            if config.embeddings.is_some() || !config.datasets.is_empty() {
                return Err(Error::Config("`synth` cannot be combined with `embeddings` or `datasets`".into()));
            }
            let specs = scenario_specs(source)?;
            let data = specs
                .par_iter()
                .map(generate_scenario)
                .collect::<Vec<_>>()
                .into_iter()
                .collect::<std::result::Result<Vec<_>, _>>()?;
            eprintln!("generated {} scenarios", data.len());
            return Ok(Inputs::Synthetic(data));
        }
        if config.datasets.is_empty() {
            return Err(Error::Config(format!("{command} needs `datasets` or `synth`")));
        }
        let path = require(&config.embeddings, "embeddings", command)?;
        if !path.exists() {
            return Err(Error::MissingEmbeddings(path.clone()));
        }
        let datasets = config
            .datasets
            .iter()
            .map(|p| tables::load_dataset(p))
            .collect::<Result<Vec<_>>>()?;
        Ok(Inputs::Real(embeddings(config, command)?, datasets))
    }

    fn jobs(&self) -> Vec<Job<'_>> {
        match self {
            Inputs::Synthetic(data) => data.iter().map(|(m, d)| Job { matrix: m, dataset: d }).collect(),
            Inputs::Real(m, ds) => ds.iter().map(|d| Job { matrix: m, dataset: d }).collect(),
        }
    }
}

/// Builds one verified dataset per property and writes `<out_dir>/<property>.tsv`.
pub fn cmd_build(config: &RunConfig) -> Result<Vec<PathBuf>> {
    config.validate()?;
    let norms = require(&config.norms, "norms", "build")?;
    let out_dir = require(&config.out_dir, "out_dir", "build")?;
    let table = tables::load_norms(norms)?;
    let rules = match &config.rules {
        Some(p) => tables::load_rules(p)?,
        None => default_rules(),
    };
    let crowd = match &config.crowd {
        Some(p) => tables::load_crowd(p)?,
        None => Vec::new(),
    };
    let properties = if config.properties.is_empty() {
        select_properties(&table, config.min_concepts)?
    } else {
        config.properties.clone()
    };
    eprintln!(
        "{} concepts, {} rules, {} crowd judgments, {} properties",
        table.concept_count(),
        rules.len(),
        crowd.len(),
        properties.len()
    );
    let mut written = Vec::new();
    for property in &properties {
        let dataset = merge_crowd(&apply_implications(&table, &rules, property)?, &crowd)?;
        let path = out_dir.join(format!("{}.tsv", dataset.property()));
        tables::save_dataset(&path, &dataset)?;
        eprintln!("{}: {} pos / {} neg", dataset.property(), dataset.pos_count(), dataset.neg_count());
        written.push(path);
    }
    Ok(written)
}

/// Evaluates every dataset (or scenario) and writes the report, plus the
/// verdict table when hypotheses are configured.
pub fn cmd_evaluate(config: &RunConfig) -> Result<Vec<PropertyReport>> {
    config.validate()?;
    let output = require(&config.output, "output", "evaluate")?;
    if config.hypotheses.is_some() && config.verdicts.is_none() {
        return Err(Error::Config("`hypotheses` needs a `verdicts` output path".into()));
    }
    let split = split(config)?;
    let eval = config.eval_config();
    let inputs = Inputs::load(config, "evaluate")?;
    let jobs = inputs.jobs();
    eprintln!(
        "evaluating {} properties with {}",
        jobs.len(),
        config.methods.iter().map(|m| m.as_str()).collect::<Vec<_>>().join(", ")
    );
    let reports = with_jobs(config.jobs, || evaluate_all(&jobs, &config.methods, &split, &eval))??;
    tables::write_file(output, emit_report(&reports, config.output_format)?.as_bytes())?;
    eprintln!("wrote {}", output.display());

    if let (Some(hyp), Some(verdicts)) = (&config.hypotheses, &config.verdicts) {
        let rows = compare_hypotheses(&reports, &tables::load_hypotheses(hyp)?, &config.thresholds)?;
        tables::write_file(verdicts, emit_verdicts(&rows).as_bytes())?;
        eprintln!("wrote {}", verdicts.display());
    }
    if let Some(dir) = &config.models_dir {
        for (job, report) in jobs.iter().zip(&reports) {
            save_models(dir, job, report, &config.methods, &eval)?;
        }
        eprintln!("wrote models to {}", dir.display());
    }
    Ok(reports)
}

/// Trains each method on every resolvable item of the dataset and dumps it.
fn save_models(dir: &Path, job: &Job<'_>, report: &PropertyReport, methods: &[Method], eval: &EvalConfig) -> Result<()> {
    let m = job.matrix;
    let mut samples = Samples::new(m.dim());
    let mut positives = Vec::new();
    for (word, label, _) in job.dataset.items() {
        let Some(row) = m.resolve(word) else {
            if eval.oov == OovPolicy::Strict {
                return Err(propprobe_core::Error::MissingWord(word.into()).into());
            }
            continue;
        };
        samples.push_f32(m.row(row), label.is_positive())?;
        if label.is_positive() {
            positives.push(m.token(row).to_owned());
        }
    }
    let property = job.dataset.property();
    let mut models = Vec::new();
    for &method in methods {
        match method {
            Method::Neigh => {
                let n = report.best_n.unwrap_or(eval.n_grid[0]);
                let model = fit_centroid(m, &positives, n, &eval.pool)?;
                models.push(("neigh".to_owned(), ProbeModel::Centroid(model)));
            }
            Method::Lr => models.push(("lr".into(), ProbeModel::Logistic(train_logistic(&samples, &eval.logistic)?))),
            Method::Net => {
                for &seed in &eval.seeds {
                    let model = train_mlp(&samples, &eval.mlp, seed)?;
                    models.push((format!("net-seed{seed}"), ProbeModel::Mlp(model)));
                }
            }
        }
    }
    for (tag, model) in models {
        let path = dir.join(format!("{property}.{tag}.model"));
        tables::write_file(&path, dump_model(&model).as_bytes())?;
    }
    Ok(())
}

/// Writes the centroid baseline's F1 at every grid point:
/// `property n tp fp tn fn f1`.
pub fn cmd_sweep(config: &RunConfig) -> Result<()> {
    config.validate()?;
    let output = require(&config.output, "output", "sweep")?;
    let eval = config.eval_config();
    let inputs = Inputs::load(config, "sweep")?;
    let jobs = inputs.jobs();
    let results =
        with_jobs(config.jobs, || evaluate_fragments(&jobs, &[Method::Neigh], &SplitSpec::LeaveOneOut, &eval))??;
    let mut out = String::from("property\tn\ttp\tfp\ttn\tfn\tf1\n");
    for (prep, frags) in &results {
        let propprobe_core::evaluation::MethodRun::Neigh(run) = &frags[0].run else {
            unreachable!("only the centroid method was requested")
        };
        for p in &run.sweep.curve {
            let c = &p.counts;
            let _ = writeln!(out, "{}\t{}\t{}\t{}\t{}\t{}\t{:.4}", prep.property(), p.n, c.tp, c.fp, c.tn, c.fn_, p.f1);
        }
    }
    tables::write_file(output, out.as_bytes())?;
    eprintln!("wrote {}", output.display());
    Ok(())
}

/// Writes each scenario as `<name>.txt` (word2vec text) and `<name>.tsv`
/// (dataset), plus the specs in `scenarios.tsv`.
pub fn cmd_synth(config: &RunConfig) -> Result<Vec<PathBuf>> {
    config.validate()?;
    let out_dir = require(&config.out_dir, "out_dir", "synth")?;
    let source = config.synth.clone().unwrap_or(SynthSource::StandardBattery);
    let specs = scenario_specs(&source)?;
    let mut written = Vec::new();
    for spec in &specs {
        let (matrix, dataset) = generate_scenario(spec)?;
        let vectors = out_dir.join(format!("{}.txt", spec.name()));
        save_embeddings(&vectors, EmbeddingFormat::Text, &matrix)?;
        let data = out_dir.join(format!("{}.tsv", spec.name()));
        tables::save_dataset(&data, &dataset)?;
        written.push(vectors);
        written.push(data);
    }
    let mut buf = Vec::new();
    tables::write_scenarios(&mut buf, &specs).expect("writing to memory");
    let index = out_dir.join("scenarios.tsv");
    tables::write_file(&index, &buf)?;
    written.push(index);
    eprintln!("wrote {} scenarios to {}", specs.len(), out_dir.display());
    Ok(written)
}

/// Writes annotation candidates for the single configured dataset, one word
/// per line.
pub fn cmd_expand(config: &RunConfig) -> Result<Vec<String>> {
    config.validate()?;
    let output = require(&config.output, "output", "expand")?;
    let [path] = config.datasets.as_slice() else {
        return Err(Error::Config("expand needs exactly one dataset".into()));
    };
    let dataset = tables::load_dataset(path)?;
    let matrix = embeddings(config, "expand")?;
    let words = expand_candidates(&matrix, &dataset, &config.expand_seeds, config.expand_n, &config.pool.to_pool())?;
    let mut out = String::new();
    for w in &words {
        out.push_str(w);
        out.push('\n');
    }
    tables::write_file(output, out.as_bytes())?;
    eprintln!("wrote {} candidates to {}", words.len(), output.display());
    Ok(words)
}
