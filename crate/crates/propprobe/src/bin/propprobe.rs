use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use propprobe::commands;
use propprobe::{Error, RunConfig};

/// Probe word embeddings for semantic properties.
///
/// Settings come from an optional `key = value` config file (`--config`),
/// then `--set` overrides, then the subcommand flags; later sources win.
#[derive(Parser)]
#[command(name = "propprobe", version, about, long_about = None)]
struct Cli {
    /// Config file (`schema = 1` plus key = value lines).
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,
    /// Worker threads for evaluation.
    #[arg(long, global = true, value_name = "N")]
    jobs: Option<String>,
    /// Override any config key, e.g. `--set lr_l2=0.5`. Repeatable.
    #[arg(long = "set", global = true, value_name = "KEY=VALUE")]
    set: Vec<String>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build verified property datasets from norms, rules and crowd answers.
    Build(BuildArgs),
    /// Evaluate properties with leave-one-out or a fixed split and write a report.
    Evaluate(EvaluateArgs),
    /// Write the centroid baseline's F1 for every neighborhood size.
    Sweep(SweepArgs),
    /// Write synthetic scenarios as word2vec text files and datasets.
    Synth(SynthArgs),
    /// List annotation candidates near a dataset's positives and seed words.
    Expand(ExpandArgs),
}

#[derive(Args)]
struct EmbeddingArgs {
    /// word2vec file.
    #[arg(long, value_name = "FILE")]
    embeddings: Option<String>,
    /// word2vec-binary or word2vec-text.
    #[arg(long, value_name = "FORMAT")]
    format: Option<String>,
    /// Keep only the first K vectors.
    #[arg(long, value_name = "K")]
    max_vocab: Option<String>,
}

#[derive(Args)]
struct BuildArgs {
    /// `concept<TAB>property` pairs.
    #[arg(long, value_name = "FILE")]
    norms: Option<String>,
    /// `source<TAB>implies|excludes<TAB>target` rules; two built-in rules when absent.
    #[arg(long, value_name = "FILE")]
    rules: Option<String>,
    /// `word,property,answer` judgments.
    #[arg(long, value_name = "FILE")]
    crowd: Option<String>,
    /// Comma-separated properties; default is every property with enough concepts.
    #[arg(long, value_name = "LIST")]
    properties: Option<String>,
    /// Smallest concept count for automatic property selection.
    #[arg(long, value_name = "N")]
    min_concepts: Option<String>,
    /// Directory for `<property>.tsv` files.
    #[arg(long, value_name = "DIR")]
    out_dir: Option<String>,
}

#[derive(Args)]
struct EvalArgs {
    /// Comma-separated dataset TSV files.
    #[arg(long, value_name = "LIST")]
    datasets: Option<String>,
    /// `standard` for the built-in battery, or a scenario TSV file.
    #[arg(long, value_name = "SOURCE")]
    synth: Option<String>,
    /// Centroid neighborhood sizes, comma separated.
    #[arg(long, value_name = "LIST")]
    n_grid: Option<String>,
    /// full-vocab or prefix:<k>.
    #[arg(long, value_name = "POOL")]
    pool: Option<String>,
    /// skip or strict.
    #[arg(long, value_name = "POLICY")]
    oov: Option<String>,
    /// Report (evaluate) or curve (sweep) file.
    #[arg(long, value_name = "FILE")]
    output: Option<String>,
}

#[derive(Args)]
struct EvaluateArgs {
    #[command(flatten)]
    emb: EmbeddingArgs,
    #[command(flatten)]
    eval: EvalArgs,
    /// Comma-separated subset of neigh, lr, net.
    #[arg(long, value_name = "LIST")]
    methods: Option<String>,
    /// MLP seeds, one run each.
    #[arg(long, value_name = "LIST")]
    seeds: Option<String>,
    /// tsv or markdown.
    #[arg(long, value_name = "FORMAT")]
    output_format: Option<String>,
    /// `property<TAB>yes|possibly|no` expectations.
    #[arg(long, value_name = "FILE")]
    hypotheses: Option<String>,
    /// Verdict table output.
    #[arg(long, value_name = "FILE")]
    verdicts: Option<String>,
    /// Best classifier F1 counted as learnable.
    #[arg(long, value_name = "F1")]
    learnable: Option<String>,
    /// Best classifier F1 counted as possibly learnable.
    #[arg(long, value_name = "F1")]
    possibly: Option<String>,
    /// Training words for a fixed split, one per line.
    #[arg(long, value_name = "FILE")]
    split_train: Option<String>,
    /// Test words for a fixed split, one per line.
    #[arg(long, value_name = "FILE")]
    split_test: Option<String>,
    /// Dump models trained on each full dataset here.
    #[arg(long, value_name = "DIR")]
    models_dir: Option<String>,
}

#[derive(Args)]
struct SweepArgs {
    #[command(flatten)]
    emb: EmbeddingArgs,
    #[command(flatten)]
    eval: EvalArgs,
}

#[derive(Args)]
struct SynthArgs {
    /// `standard` for the built-in battery, or a scenario TSV file.
    #[arg(long, value_name = "SOURCE")]
    synth: Option<String>,
    /// Directory for the scenario files.
    #[arg(long, value_name = "DIR")]
    out_dir: Option<String>,
}

#[derive(Args)]
struct ExpandArgs {
    #[command(flatten)]
    emb: EmbeddingArgs,
    /// Dataset whose positives define the centroid.
    #[arg(long, value_name = "FILE")]
    dataset: Option<String>,
    /// Comma-separated seed words.
    #[arg(long, value_name = "LIST")]
    seeds: Option<String>,
    /// Neighbors taken per query.
    #[arg(long, value_name = "N")]
    n: Option<String>,
    /// full-vocab or prefix:<k>.
    #[arg(long, value_name = "POOL")]
    pool: Option<String>,
    /// Candidate list, one word per line.
    #[arg(long, value_name = "FILE")]
    output: Option<String>,
}

type Pairs = Vec<(&'static str, Option<String>)>;

fn emb_pairs(a: EmbeddingArgs) -> Pairs {
    vec![("embeddings", a.embeddings), ("embeddings_format", a.format), ("max_vocab", a.max_vocab)]
}

fn eval_pairs(a: EvalArgs) -> Pairs {
    vec![
        ("datasets", a.datasets),
        ("synth", a.synth),
        ("n_grid", a.n_grid),
        ("pool", a.pool),
        ("oov", a.oov),
        ("output", a.output),
    ]
}

fn run(cli: Cli) -> Result<(), Error> {
    let mut config = match &cli.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    for kv in &cli.set {
        let (k, v) = kv
            .split_once('=')
            .ok_or_else(|| Error::Config(format!("--set expects KEY=VALUE, got {kv:?}")))?;
        config.set(k.trim(), v)?;
    }
    let mut flags: Pairs = vec![("jobs", cli.jobs)];
    let command = match cli.command {
        Command::Build(a) => {
            flags.extend([
                ("norms", a.norms),
                ("rules", a.rules),
                ("crowd", a.crowd),
                ("properties", a.properties),
                ("min_concepts", a.min_concepts),
                ("out_dir", a.out_dir),
            ]);
            "build"
        }
        Command::Evaluate(a) => {
            flags.extend(emb_pairs(a.emb));
            flags.extend(eval_pairs(a.eval));
            flags.extend([
                ("methods", a.methods),
                ("seeds", a.seeds),
                ("output_format", a.output_format),
                ("hypotheses", a.hypotheses),
                ("verdicts", a.verdicts),
                ("threshold_learnable", a.learnable),
                ("threshold_possibly", a.possibly),
                ("split_train", a.split_train),
                ("split_test", a.split_test),
                ("models_dir", a.models_dir),
            ]);
            "evaluate"
        }
        Command::Sweep(a) => {
            flags.extend(emb_pairs(a.emb));
            flags.extend(eval_pairs(a.eval));
            "sweep"
        }
        Command::Synth(a) => {
            flags.extend([("synth", a.synth), ("out_dir", a.out_dir)]);
            "synth"
        }
        Command::Expand(a) => {
            flags.extend(emb_pairs(a.emb));
            flags.extend([
                ("datasets", a.dataset),
                ("expand_seeds", a.seeds),
                ("expand_n", a.n),
                ("pool", a.pool),
                ("output", a.output),
            ]);
            "expand"
        }
    };
    for (key, value) in flags {
        if let Some(v) = value {
            config.set(key, &v).map_err(|e| match e {
                Error::Config(msg) => Error::Config(format!("--{}: {msg}", key.replace('_', "-"))),
                other => other,
            })?;
        }
    }
    match command {
        "build" => commands::cmd_build(&config).map(drop),
        "evaluate" => commands::cmd_evaluate(&config).map(drop),
        "sweep" => commands::cmd_sweep(&config),
        "synth" => commands::cmd_synth(&config).map(drop),
        "expand" => commands::cmd_expand(&config).map(drop),
        _ => unreachable!(),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("propprobe: error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
