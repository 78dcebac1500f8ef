//! Run configuration: a `key = value` file (with a mandatory `schema = 1`)
//! overlaid by command-line flags.
//!
//! ```text
//! schema = 1
//! embeddings = data/GoogleNews-vectors-negative300.bin
//! embeddings_format = word2vec-binary
//! max_vocab = 500000
//! datasets = out/is_dangerous.tsv, out/has_wheels.tsv
//! methods = neigh, lr, net
//! seeds = 1, 2
//! output = results/report.tsv
//! ```
//!
//! Lists are comma separated, `#` starts a comment line, and unknown keys are
//! rejected so typos do not silently fall back to defaults.

use std::path::{Path, PathBuf};

use propprobe_core::embedding::Pool;
use propprobe_core::evaluation::{EvalConfig, Method, OovPolicy, Thresholds};
use propprobe_core::probes::{default_n_grid, LogisticConfig, MlpConfig, MlpOptimizer};

use crate::error::{Error, Result};
use crate::report::ReportFormat;
use crate::word2vec::EmbeddingFormat;

pub const SCHEMA_VERSION: u32 = 1;

/// Candidate pool as written in a config; `Subset` pools are not
/// expressible here.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PoolSetting {
    FullVocab,
    Prefix(usize),
}

impl PoolSetting {
    pub fn to_pool(self) -> Pool {
        match self {
            PoolSetting::FullVocab => Pool::FullVocab,
            PoolSetting::Prefix(k) => Pool::Prefix(k),
        }
    }
}

/// Source of synthetic scenarios.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SynthSource {
    StandardBattery,
    SpecFile(PathBuf),
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub embeddings: Option<PathBuf>,
    pub embeddings_format: EmbeddingFormat,
    pub max_vocab: Option<usize>,
    pub norms: Option<PathBuf>,
    /// `None` means the two built-in rules.
    pub rules: Option<PathBuf>,
    pub crowd: Option<PathBuf>,
    /// Properties to build; empty selects every property with at least
    /// `min_concepts` concepts.
    pub properties: Vec<String>,
    pub min_concepts: usize,
    /// Dataset TSVs to evaluate or sweep.
    pub datasets: Vec<PathBuf>,
    pub synth: Option<SynthSource>,
    pub methods: Vec<Method>,
    pub seeds: Vec<u64>,
    pub n_grid: Vec<usize>,
    pub pool: PoolSetting,
    pub oov: OovPolicy,
    pub logistic: LogisticConfig,
    pub mlp: MlpConfig,
    /// Word lists (one per line) for a fixed train/test split; LOO when unset.
    pub split_train: Option<PathBuf>,
    pub split_test: Option<PathBuf>,
    pub output: Option<PathBuf>,
    pub output_format: ReportFormat,
    pub out_dir: Option<PathBuf>,
    pub hypotheses: Option<PathBuf>,
    pub verdicts: Option<PathBuf>,
    pub thresholds: Thresholds,
    /// Where `evaluate` dumps models trained on each full dataset.
    pub models_dir: Option<PathBuf>,
    pub expand_seeds: Vec<String>,
    pub expand_n: usize,
    /// Worker threads; `None` lets the thread pool decide.
    pub jobs: Option<usize>,
}

impl Default for RunConfig {
    fn default() -> Self {
        let eval = EvalConfig::default();
        RunConfig {
            embeddings: None,
            embeddings_format: EmbeddingFormat::Binary,
            max_vocab: None,
            norms: None,
            rules: None,
            crowd: None,
            properties: Vec::new(),
            min_concepts: 20,
            datasets: Vec::new(),
            synth: None,
            methods: Method::ALL.to_vec(),
            seeds: eval.seeds,
            n_grid: default_n_grid(),
            pool: PoolSetting::FullVocab,
            oov: OovPolicy::Skip,
            logistic: eval.logistic,
            mlp: eval.mlp,
            split_train: None,
            split_test: None,
            output: None,
            output_format: ReportFormat::Tsv,
            out_dir: None,
            hypotheses: None,
            verdicts: None,
            thresholds: Thresholds::default(),
            models_dir: None,
            expand_seeds: Vec::new(),
            expand_n: 100,
            jobs: None,
        }
    }
}

fn list(value: &str) -> impl Iterator<Item = &str> {
    value.split(',').map(str::trim).filter(|s| !s.is_empty())
}

fn bad(key: &str, value: &str, expected: &str) -> Error {
    Error::Config(format!("{key}: expected {expected}, got {value:?}"))
}

fn num<T: std::str::FromStr>(key: &str, value: &str, expected: &str) -> Result<T> {
    value.trim().parse().map_err(|_| bad(key, value, expected))
}

fn positive(key: &str, value: &str) -> Result<usize> {
    match num::<usize>(key, value, "a positive integer")? {
        0 => Err(bad(key, value, "a positive integer")),
        n => Ok(n),
    }
}

fn opt_path(value: &str) -> Option<PathBuf> {
    let v = value.trim();
    (!v.is_empty()).then(|| PathBuf::from(v))
}

impl RunConfig {
    /// Keys accepted by [`RunConfig::set`], in documentation order.
    pub const KEYS: &'static [&'static str] = &[
        "embeddings",
        "embeddings_format",
        "max_vocab",
        "norms",
        "rules",
        "crowd",
        "properties",
        "min_concepts",
        "datasets",
        "synth",
        "methods",
        "seeds",
        "n_grid",
        "pool",
        "oov",
        "lr_l2",
        "lr_tolerance",
        "lr_max_iterations",
        "net_l2",
        "net_tolerance",
        "net_max_iterations",
        "net_hidden",
        "net_optimizer",
        "split_train",
        "split_test",
        "output",
        "output_format",
        "out_dir",
        "hypotheses",
        "verdicts",
        "threshold_learnable",
        "threshold_possibly",
        "models_dir",
        "expand_seeds",
        "expand_n",
        "jobs",
    ];

    /// Applies one setting. Paths are taken as given.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let v = value.trim();
        match key {
            "schema" => {
                if num::<u32>(key, v, "1")? != SCHEMA_VERSION {
                    return Err(Error::Config(format!("unsupported schema {v}; this build reads schema {SCHEMA_VERSION}")));
                }
            }
            "embeddings" => self.embeddings = opt_path(v),
            "embeddings_format" => {
                self.embeddings_format = v.parse().map_err(|_| bad(key, v, "word2vec-binary or word2vec-text"))?
            }
            "max_vocab" => self.max_vocab = if v.is_empty() { None } else { Some(positive(key, v)?) },
            "norms" => self.norms = opt_path(v),
            "rules" => self.rules = opt_path(v),
            "crowd" => self.crowd = opt_path(v),
            "properties" => self.properties = list(v).map(propprobe_core::dataset::normalize_label).collect(),
            "min_concepts" => self.min_concepts = positive(key, v)?,
            "datasets" => self.datasets = list(v).map(PathBuf::from).collect(),
            "synth" => {
                self.synth = match v {
                    "" => None,
                    "standard" => Some(SynthSource::StandardBattery),
                    path => Some(SynthSource::SpecFile(path.into())),
                }
            }
            "methods" => {
                let methods = list(v)
                    .map(|m| Method::parse(m).ok_or_else(|| bad(key, m, "neigh, lr or net")))
                    .collect::<Result<Vec<_>>>()?;
                let mut seen = Vec::new();
                for m in methods {
                    if !seen.contains(&m) {
                        seen.push(m);
                    }
                }
                self.methods = seen;
            }
            "seeds" => self.seeds = list(v).map(|s| num(key, s, "an integer")).collect::<Result<_>>()?,
            "n_grid" => self.n_grid = list(v).map(|s| positive(key, s)).collect::<Result<_>>()?,
            "pool" => {
                self.pool = match v {
                    "full-vocab" | "full" => PoolSetting::FullVocab,
                    p if p.starts_with("prefix:") => PoolSetting::Prefix(positive(key, &p[7..])?),
                    _ => return Err(bad(key, v, "full-vocab or prefix:<k>")),
                }
            }
            "oov" => {
                self.oov = match v {
                    "skip" => OovPolicy::Skip,
                    "strict" => OovPolicy::Strict,
                    _ => return Err(bad(key, v, "skip or strict")),
                }
            }
            "lr_l2" => self.logistic.l2_penalty = num(key, v, "a number")?,
            "lr_tolerance" => self.logistic.tolerance = num(key, v, "a number")?,
            "lr_max_iterations" => self.logistic.max_iterations = positive(key, v)?,
            "net_l2" => self.mlp.l2_penalty = num(key, v, "a number")?,
            "net_tolerance" => self.mlp.tolerance = num(key, v, "a number")?,
            "net_max_iterations" => self.mlp.max_iterations = positive(key, v)?,
            "net_hidden" => self.mlp.hidden_size = if v.is_empty() { None } else { Some(positive(key, v)?) },
            "net_optimizer" => {
                self.mlp.optimizer = match v {
                    "lbfgs" => MlpOptimizer::Lbfgs,
                    o if o.starts_with("gd:") => MlpOptimizer::GradientDescent {
                        learning_rate: num(key, &o[3..], "gd:<learning rate>")?,
                    },
                    _ => return Err(bad(key, v, "lbfgs or gd:<learning rate>")),
                }
            }
            "split_train" => self.split_train = opt_path(v),
            "split_test" => self.split_test = opt_path(v),
            "output" => self.output = opt_path(v),
            "output_format" => self.output_format = ReportFormat::parse(v).ok_or_else(|| bad(key, v, "tsv or markdown"))?,
            "out_dir" => self.out_dir = opt_path(v),
            "hypotheses" => self.hypotheses = opt_path(v),
            "verdicts" => self.verdicts = opt_path(v),
            "threshold_learnable" => self.thresholds.learnable = num(key, v, "a number")?,
            "threshold_possibly" => self.thresholds.possibly = num(key, v, "a number")?,
            "models_dir" => self.models_dir = opt_path(v),
            "expand_seeds" => self.expand_seeds = list(v).map(String::from).collect(),
            "expand_n" => self.expand_n = positive(key, v)?,
            "jobs" => self.jobs = Some(positive(key, v)?),
            _ => return Err(Error::Config(format!("unknown config key {key:?}"))),
        }
        Ok(())
    }

    /// Parses config text. `schema = 1` must be present.
    pub fn parse(text: &str, name: &str) -> Result<RunConfig> {
        let mut config = RunConfig::default();
        let mut schema = false;
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("{name}:{}: expected key = value", i + 1)))?;
            let key = key.trim();
            config
                .set(key, value)
                .map_err(|e| Error::Config(format!("{name}:{}: {}", i + 1, strip_prefix(e))))?;
            schema |= key == "schema";
        }
        if !schema {
            return Err(Error::Config(format!("{name}: missing `schema = {SCHEMA_VERSION}`")));
        }
        Ok(config)
    }

    pub fn load(path: &Path) -> Result<RunConfig> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        RunConfig::parse(&text, &path.display().to_string())
    }

    /// Renders every key, so a run can be recorded and replayed.
    pub fn to_text(&self) -> String {
        let path = |p: &Option<PathBuf>| p.as_ref().map(|p| p.display().to_string()).unwrap_or_default();
        let join = |v: Vec<String>| v.join(", ");
        let mut out = format!("schema = {SCHEMA_VERSION}\n");
        for &key in Self::KEYS {
            let value = match key {
                "embeddings" => path(&self.embeddings),
                "embeddings_format" => self.embeddings_format.as_str().into(),
                "max_vocab" => self.max_vocab.map(|v| v.to_string()).unwrap_or_default(),
                "norms" => path(&self.norms),
                "rules" => path(&self.rules),
                "crowd" => path(&self.crowd),
                "properties" => self.properties.join(", "),
                "min_concepts" => self.min_concepts.to_string(),
                "datasets" => join(self.datasets.iter().map(|p| p.display().to_string()).collect()),
                "synth" => match &self.synth {
                    None => String::new(),
                    Some(SynthSource::StandardBattery) => "standard".into(),
                    Some(SynthSource::SpecFile(p)) => p.display().to_string(),
                },
                "methods" => join(self.methods.iter().map(|m| m.as_str().to_owned()).collect()),
                "seeds" => join(self.seeds.iter().map(u64::to_string).collect()),
                "n_grid" => join(self.n_grid.iter().map(usize::to_string).collect()),
                "pool" => match self.pool {
                    PoolSetting::FullVocab => "full-vocab".into(),
                    PoolSetting::Prefix(k) => format!("prefix:{k}"),
                },
                "oov" => match self.oov {
                    OovPolicy::Skip => "skip".into(),
                    OovPolicy::Strict => "strict".into(),
                },
                "lr_l2" => format!("{:?}", self.logistic.l2_penalty),
                "lr_tolerance" => format!("{:?}", self.logistic.tolerance),
                "lr_max_iterations" => self.logistic.max_iterations.to_string(),
                "net_l2" => format!("{:?}", self.mlp.l2_penalty),
                "net_tolerance" => format!("{:?}", self.mlp.tolerance),
                "net_max_iterations" => self.mlp.max_iterations.to_string(),
                "net_hidden" => self.mlp.hidden_size.map(|h| h.to_string()).unwrap_or_default(),
                "net_optimizer" => match self.mlp.optimizer {
                    MlpOptimizer::Lbfgs => "lbfgs".into(),
                    MlpOptimizer::GradientDescent { learning_rate } => format!("gd:{learning_rate:?}"),
                },
                "split_train" => path(&self.split_train),
                "split_test" => path(&self.split_test),
                "output" => path(&self.output),
                "output_format" => self.output_format.as_str().into(),
                "out_dir" => path(&self.out_dir),
                "hypotheses" => path(&self.hypotheses),
                "verdicts" => path(&self.verdicts),
                "threshold_learnable" => format!("{:?}", self.thresholds.learnable),
                "threshold_possibly" => format!("{:?}", self.thresholds.possibly),
                "models_dir" => path(&self.models_dir),
                "expand_seeds" => self.expand_seeds.join(", "),
                "expand_n" => self.expand_n.to_string(),
                "jobs" => self.jobs.map(|j| j.to_string()).unwrap_or_default(),
                _ => unreachable!("key list and renderer out of sync"),
            };
            if !value.is_empty() {
                out.push_str(&format!("{key} = {value}\n"));
            }
        }
        out
    }

    pub fn eval_config(&self) -> EvalConfig {
        EvalConfig {
            logistic: self.logistic,
            mlp: self.mlp,
            seeds: self.seeds.clone(),
            n_grid: self.n_grid.clone(),
            pool: self.pool.to_pool(),
            oov: self.oov,
        }
    }

    /// Checks invariants that do not depend on the subcommand.
    pub fn validate(&self) -> Result<()> {
        if self.methods.is_empty() {
            return Err(Error::Config("at least one method must be selected".into()));
        }
        if self.methods.contains(&Method::Net) && self.seeds.is_empty() {
            return Err(Error::Config("method net needs at least one seed".into()));
        }
        if self.n_grid.is_empty() {
            return Err(Error::Config("n_grid is empty".into()));
        }
        let t = &self.thresholds;
        if !(0.0..=1.0).contains(&t.possibly) || !(0.0..=1.0).contains(&t.learnable) || t.possibly > t.learnable {
            return Err(Error::Config("thresholds must satisfy 0 <= possibly <= learnable <= 1".into()));
        }
        if self.split_train.is_some() != self.split_test.is_some() {
            return Err(Error::Config("split_train and split_test must be given together".into()));
        }
        let inputs = [&self.norms, &self.rules, &self.crowd, &self.hypotheses, &self.split_train, &self.split_test];
        for p in inputs.into_iter().flatten().chain(&self.datasets) {
            if !p.is_file() {
                return Err(Error::Config(format!("file not found: {}", p.display())));
            }
        }
        if let Some(SynthSource::SpecFile(p)) = &self.synth {
            if !p.is_file() {
                return Err(Error::Config(format!("file not found: {}", p.display())));
            }
        }
        Ok(())
    }
}

fn strip_prefix(e: Error) -> String {
    match e {
        Error::Config(msg) => msg,
        other => other.to_string(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_lists_and_comments() {
        let c = RunConfig::parse(
            "# experiment\nschema = 1\nmethods = lr, net, lr\nseeds=3,4\nn_grid = 10, 20\npool = prefix:5000\noov = strict\n",
            "c",
        )
        .unwrap();
        assert_eq!(c.methods, vec![Method::Lr, Method::Net]);
        assert_eq!(c.seeds, vec![3, 4]);
        assert_eq!(c.n_grid, vec![10, 20]);
        assert_eq!(c.pool, PoolSetting::Prefix(5000));
        assert_eq!(c.oov, OovPolicy::Strict);
    }

    #[test]
    fn schema_is_required_and_checked() {
        assert!(matches!(RunConfig::parse("methods = lr\n", "c"), Err(Error::Config(m)) if m.contains("schema")));
        assert!(RunConfig::parse("schema = 2\n", "c").is_err());
    }

    #[test]
    fn unknown_keys_and_bad_values_name_the_line() {
        let Err(Error::Config(m)) = RunConfig::parse("schema = 1\nmethod = lr\n", "c.cfg") else { panic!() };
        assert!(m.starts_with("c.cfg:2:"), "{m}");
        let Err(Error::Config(m)) = RunConfig::parse("schema = 1\nseeds = 1, x\n", "c.cfg") else { panic!() };
        assert!(m.starts_with("c.cfg:2:") && m.contains("seeds"), "{m}");
        assert!(RunConfig::parse("schema = 1\nn_grid = 0\n", "c").is_err());
    }

    #[test]
    fn text_round_trip() {
        let mut c = RunConfig::default();
        c.set("synth", "standard").unwrap();
        c.set("net_optimizer", "gd:0.01").unwrap();
        c.set("lr_l2", "0.5").unwrap();
        c.set("datasets", "a.tsv, b.tsv").unwrap();
        c.set("expand_seeds", "car, sledge, ship").unwrap();
        c.set("max_vocab", "1000").unwrap();
        assert_eq!(RunConfig::parse(&c.to_text(), "c").unwrap(), c);
        assert_eq!(RunConfig::parse(&RunConfig::default().to_text(), "c").unwrap(), RunConfig::default());
    }

    #[test]
    fn validation() {
        let mut c = RunConfig::default();
        assert!(c.validate().is_ok());
        c.methods.clear();
        assert!(c.validate().is_err());
        let mut c = RunConfig::default();
        c.thresholds.possibly = 0.9;
        assert!(c.validate().is_err());
        let mut c = RunConfig::default();
        c.norms = Some("/nonexistent/norms.tsv".into());
        assert!(c.validate().is_err());
    }
}
