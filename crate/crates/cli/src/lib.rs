//! The `influence` command line: ingest, annotate, features, benchmark, synth, verify.
//!
//! Every subcommand reads its inputs, writes its outputs under the output directory and
//! never touches the input files. Settings come from flags first, then the optional TOML
//! config file, then built-in defaults.

use std::collections::BTreeMap;
use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context};
use chrono::{DateTime, Utc};
use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};

use influence_core::annotate::{
    annotate_dataset, AnnotatedDataset, AnnotationReport, Annotator, ExternalProviderConfig, HttpAnnotator,
    LexiconAnnotator, LexiconConfig, SentimentLexicon, TaxonomyLexicon,
};
use influence_core::corpus::{
    cleanse, covering_period_spec, load_dataset, partition_periods, save_dataset, synthesize, CleanseOptions,
    CleanseReport, Dataset, GroundTruthLabels, LoadOptions, LoadReport, PeriodSpec, SynthConfig, YearMonth,
};
use influence_core::evaluate::{benchmark, BenchmarkReport, SplitSpec};
use influence_core::features::{
    assemble_all_periods, assemble_matrix, top_k_report, FeatureMatrix, PeriodSelection, TweetSelection,
};
use influence_core::fixtures::{self, Implementations};
use influence_core::learn::{derive_seed, Algorithm, AlgorithmParams, ModelSpec};

/// Raised for problems with how the tool was invoked; the binary exits with status 2.
#[derive(Debug)]
pub struct UsageError(pub String);

impl fmt::Display for UsageError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

fn usage(msg: impl Into<String>) -> anyhow::Error {
    UsageError(msg.into()).into()
}

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, Parser)]
#[command(
    name = "influence",
    version,
    about = "Domain-based influencer features and classifiers"
)]
pub struct Cli {
    /// Master seed for every random choice.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Upper bound on worker threads; results do not depend on it.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    #[arg(long, global = true)]
    pub output_dir: Option<PathBuf>,
    /// TOML run configuration.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Parse and cleanse an archive into a canonical dataset file.
    Ingest(IngestArgs),
    /// Annotate tweet domains and reply sentiment.
    Annotate(AnnotateArgs),
    /// Build the feature matrix and the per-period top-k report for one domain.
    Features(FeaturesArgs),
    /// Train and score all seven classifiers on one split.
    Benchmark(BenchmarkArgs),
    /// Generate a synthetic archive with planted influencers.
    Synth(SynthArgs),
    /// Replay the embedded reference fixtures.
    Verify(VerifyArgs),
}

#[derive(Debug, Args)]
pub struct IngestArgs {
    pub archive: Option<PathBuf>,
    /// Stop at the first malformed line.
    #[arg(long)]
    pub fail_fast: bool,
    /// Capture timestamp (RFC 3339) for archives without a meta line.
    #[arg(long)]
    pub capture_at: Option<DateTime<Utc>>,
    #[arg(long)]
    pub keep_untagged_language: bool,
    /// Drop users with at least this many friends.
    #[arg(long)]
    pub max_friends: Option<u64>,
}

#[derive(Debug, Args)]
pub struct AnnotateArgs {
    pub dataset: Option<PathBuf>,
    /// `lexicon` or `external`.
    #[arg(long)]
    pub annotator: Option<AnnotatorKind>,
    /// Base URL of the external annotation service.
    #[arg(long)]
    pub endpoint: Option<String>,
}

#[derive(Debug, Args)]
pub struct FeaturesArgs {
    pub dataset: Option<PathBuf>,
    #[arg(long)]
    pub domain: Option<String>,
    /// Annotations written by `annotate`; annotated in-process when absent.
    #[arg(long)]
    pub annotations: Option<PathBuf>,
    /// `user_id,domain,label` CSV; keeps only labeled users.
    #[arg(long)]
    pub labels: Option<PathBuf>,
    /// First month, `YYYY-MM`.
    #[arg(long)]
    pub start: Option<YearMonth>,
    #[arg(long)]
    pub periods: Option<u32>,
    #[arg(long)]
    pub top_k: Option<usize>,
    /// Also write one matrix per period.
    #[arg(long)]
    pub per_period: bool,
}

#[derive(Debug, Args)]
pub struct BenchmarkArgs {
    pub matrix: Option<PathBuf>,
    /// Labels for a matrix written without them.
    #[arg(long)]
    pub labels: Option<PathBuf>,
    #[arg(long)]
    pub train_fraction: Option<f64>,
    #[arg(long)]
    pub no_stratify: bool,
    /// Literal hyperparameter-table readings (gaussian GLM, 50 hidden layers).
    #[arg(long)]
    pub literal_settings: bool,
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    #[arg(long)]
    pub users: Option<usize>,
    #[arg(long)]
    pub periods: Option<u32>,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    /// List the fixtures without running them.
    #[arg(long)]
    pub list: bool,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum AnnotatorKind {
    #[default]
    Lexicon,
    External,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Preset {
    #[default]
    Defaults,
    LiteralSettings,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub seed: Option<u64>,
    pub threads: Option<usize>,
    pub output_dir: Option<PathBuf>,
    pub ingest: IngestConfig,
    pub annotate: AnnotateConfig,
    pub features: FeaturesConfig,
    pub benchmark: BenchmarkConfig,
    pub synth: SynthConfig,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct IngestConfig {
    pub archive: Option<PathBuf>,
    pub fail_fast: bool,
    pub capture_at: Option<DateTime<Utc>>,
    pub cleanse: CleanseOptions,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AnnotateConfig {
    pub dataset: Option<PathBuf>,
    pub annotator: AnnotatorKind,
    pub taxonomy_lexicon: Option<PathBuf>,
    pub sentiment_lexicon: Option<PathBuf>,
    pub lexicon: LexiconConfig,
    pub external: Option<ExternalProviderConfig>,
    /// JSON object mapping URLs to the text content annotated for them.
    pub url_text: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FeaturesConfig {
    pub dataset: Option<PathBuf>,
    pub annotations: Option<PathBuf>,
    pub labels: Option<PathBuf>,
    pub domain: Option<String>,
    pub start: Option<YearMonth>,
    pub periods: Option<u32>,
    pub top_k: usize,
    pub per_period: bool,
}

impl Default for FeaturesConfig {
    fn default() -> Self {
        FeaturesConfig {
            dataset: None,
            annotations: None,
            labels: None,
            domain: None,
            start: None,
            periods: None,
            top_k: 5,
            per_period: false,
        }
    }
}

/// One configured model; without a seed it gets one derived from the master seed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelEntry {
    #[serde(flatten)]
    pub params: AlgorithmParams,
    #[serde(default)]
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BenchmarkConfig {
    pub matrix: Option<PathBuf>,
    pub labels: Option<PathBuf>,
    pub preset: Preset,
    pub train_fraction: Option<f64>,
    pub stratified: Option<bool>,
    pub models: Vec<ModelEntry>,
}

impl RunConfig {
    pub fn load(path: &Path) -> anyhow::Result<Self> {
        let text =
            fs::read_to_string(path).map_err(|e| usage(format!("cannot read config {}: {e}", path.display())))?;
        toml::from_str(&text).map_err(|e| usage(format!("invalid config {}: {e}", path.display())))
    }
}

fn ensure_dir(dir: &Path) -> anyhow::Result<()> {
    fs::create_dir_all(dir).with_context(|| format!("cannot create output directory {}", dir.display()))
}

fn write_file(path: &Path, contents: impl AsRef<[u8]>) -> anyhow::Result<()> {
    fs::write(path, contents).with_context(|| format!("cannot write {}", path.display()))
}

fn to_json<T: Serialize>(value: &T) -> anyhow::Result<String> {
    Ok(serde_json::to_string_pretty(value)? + "\n")
}

fn require_input(path: Option<PathBuf>, what: &str, flag: &str) -> anyhow::Result<PathBuf> {
    let path = path.ok_or_else(|| {
        usage(format!(
            "no {what} given; pass it as {flag} or set it in the config file"
        ))
    })?;
    if !path.exists() {
        return Err(usage(format!("{what} {} does not exist", path.display())));
    }
    Ok(path)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IngestSummary {
    pub users: usize,
    pub tweets: usize,
    pub replies: usize,
    pub load: LoadReport,
    pub cleanse: CleanseReport,
}

/// Writes `dataset.jsonl` (canonical archive lines) and `ingest_report.json`.
pub fn cmd_ingest(archive: &Path, config: &IngestConfig, out_dir: &Path) -> anyhow::Result<IngestSummary> {
    let options = LoadOptions {
        fail_fast: config.fail_fast,
        capture_at: config.capture_at,
    };
    let loaded = load_dataset(archive, &options).with_context(|| format!("cannot ingest {}", archive.display()))?;
    let (dataset, cleanse_report) = cleanse(&loaded.dataset, &config.cleanse);
    ensure_dir(out_dir)?;
    save_dataset(&dataset, &out_dir.join("dataset.jsonl"))?;
    let summary = IngestSummary {
        users: dataset.users.len(),
        tweets: dataset.tweets.len(),
        replies: dataset.replies.len(),
        load: loaded.report,
        cleanse: cleanse_report,
    };
    write_file(&out_dir.join("ingest_report.json"), to_json(&summary)?)?;
    Ok(summary)
}

fn load_input_dataset(path: &Path) -> anyhow::Result<Dataset> {
    Ok(load_dataset(path, &LoadOptions::default())
        .with_context(|| format!("cannot load dataset {}", path.display()))?
        .dataset)
}

fn build_annotator(config: &AnnotateConfig) -> anyhow::Result<Box<dyn Annotator>> {
    match config.annotator {
        AnnotatorKind::Lexicon => {
            let taxonomy = match &config.taxonomy_lexicon {
                Some(p) => TaxonomyLexicon::from_file(p)?,
                None => TaxonomyLexicon::builtin(),
            };
            let sentiment = match &config.sentiment_lexicon {
                Some(p) => SentimentLexicon::from_file(p)?,
                None => SentimentLexicon::builtin(),
            };
            Ok(Box::new(LexiconAnnotator::new(taxonomy, sentiment, config.lexicon)))
        }
        AnnotatorKind::External => {
            let external = config
                .external
                .as_ref()
                .ok_or_else(|| usage("the external annotator needs an endpoint (--endpoint or [annotate.external])"))?;
            Ok(Box::new(HttpAnnotator::new(external)))
        }
    }
}

fn annotate_with(dataset: &Dataset, config: &AnnotateConfig) -> anyhow::Result<AnnotatedDataset> {
    let annotator = build_annotator(config)?;
    let url_text: Option<BTreeMap<String, String>> = match &config.url_text {
        Some(p) => {
            let text = fs::read_to_string(p).with_context(|| format!("cannot read {}", p.display()))?;
            Some(serde_json::from_str(&text).with_context(|| format!("invalid URL text map {}", p.display()))?)
        }
        None => None,
    };
    let resolver = url_text
        .as_ref()
        .map(|m| m as &dyn influence_core::annotate::UrlTextResolver);
    Ok(annotate_dataset(dataset, annotator.as_ref(), resolver))
}

/// Writes `annotations.json`.
pub fn cmd_annotate(dataset: &Path, config: &AnnotateConfig, out_dir: &Path) -> anyhow::Result<AnnotationReport> {
    let dataset = load_input_dataset(dataset)?;
    let annotated = annotate_with(&dataset, config)?;
    ensure_dir(out_dir)?;
    annotated.save(&out_dir.join("annotations.json"))?;
    Ok(annotated.report)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeaturesSummary {
    pub domain: String,
    pub periods: PeriodSpec,
    pub rows: usize,
    pub labeled: bool,
    pub period_files: Vec<String>,
}

/// Writes `features.csv` (all periods pooled), `top_k.txt` and `top_k.json`, and with
/// `per_period` one `features_period_<n>.csv` per non-empty period.
pub fn cmd_features(
    dataset_path: &Path,
    config: &FeaturesConfig,
    annotate_config: &AnnotateConfig,
    out_dir: &Path,
) -> anyhow::Result<FeaturesSummary> {
    let dataset = load_input_dataset(dataset_path)?;
    let labels = match &config.labels {
        Some(p) => {
            if !p.exists() {
                return Err(usage(format!("labels file {} does not exist", p.display())));
            }
            Some(GroundTruthLabels::read_csv(p).with_context(|| format!("cannot read labels {}", p.display()))?)
        }
        None => None,
    };
    let domain = match (&config.domain, &labels) {
        (Some(d), _) => d.clone(),
        (None, Some(l)) if !l.domain.is_empty() => l.domain.clone(),
        _ => return Err(usage("no domain given; pass --domain or set features.domain")),
    };
    if let Some(l) = &labels {
        if !l.domain.is_empty() && l.domain != domain {
            bail!(
                "labels are for domain `{}` but features were requested for `{domain}`",
                l.domain
            );
        }
    }
    let annotations = match &config.annotations {
        Some(p) => AnnotatedDataset::load(p).with_context(|| format!("cannot load annotations {}", p.display()))?,
        None => annotate_with(&dataset, annotate_config)?,
    };
    let covering = covering_period_spec(&dataset).context("the dataset has no tweets")?;
    let periods = PeriodSpec {
        start: config.start.unwrap_or(covering.start),
        periods: config.periods.unwrap_or(covering.periods),
    };
    let partition = partition_periods(&dataset, &periods)?;

    let matrix = assemble_matrix(
        &dataset,
        &annotations,
        &domain,
        &TweetSelection::pooled(&partition),
        labels.as_ref(),
    )?;
    ensure_dir(out_dir)?;
    matrix.save_csv(&out_dir.join("features.csv"))?;

    let mut period_files = Vec::new();
    if config.per_period {
        for (period, m) in assemble_all_periods(&dataset, &annotations, &domain, &partition, labels.as_ref())? {
            if let PeriodSelection::Period(n) = period {
                let name = format!("features_period_{n}.csv");
                m.save_csv(&out_dir.join(&name))?;
                period_files.push(name);
            }
        }
    }

    let report = top_k_report(&dataset, &annotations, &domain, &partition, config.top_k);
    write_file(&out_dir.join("top_k.txt"), report.to_text())?;
    write_file(&out_dir.join("top_k.json"), to_json(&report)?)?;
    Ok(FeaturesSummary {
        domain,
        periods,
        rows: matrix.len(),
        labeled: matrix.is_labeled(),
        period_files,
    })
}

/// The seven specs for a benchmark run: the preset, overridden by configured entries.
/// Seeds not given explicitly are derived from `seed` and the algorithm's report position.
pub fn model_specs(config: &BenchmarkConfig, seed: u64) -> anyhow::Result<Vec<ModelSpec>> {
    let mut specs: Vec<ModelSpec> = Algorithm::ALL
        .iter()
        .enumerate()
        .map(|(i, &a)| {
            let params = match config.preset {
                Preset::Defaults => AlgorithmParams::defaults(a),
                Preset::LiteralSettings => AlgorithmParams::literal_table(a),
            };
            ModelSpec::new(params, derive_seed(seed, i as u64))
        })
        .collect();
    for (k, entry) in config.models.iter().enumerate() {
        let algorithm = entry.params.algorithm();
        if config.models[..k].iter().any(|e| e.params.algorithm() == algorithm) {
            return Err(usage(format!("model `{algorithm}` is configured twice")));
        }
        entry.params.validate().map_err(|e| usage(e.to_string()))?;
        let i = Algorithm::ALL
            .iter()
            .position(|&a| a == algorithm)
            .expect("every algorithm is listed");
        specs[i] = ModelSpec::new(entry.params.clone(), entry.seed.unwrap_or(specs[i].seed));
    }
    Ok(specs)
}

fn load_labeled_matrix(matrix_path: &Path, labels: Option<&Path>) -> anyhow::Result<FeatureMatrix> {
    let mut matrix = FeatureMatrix::load_csv(matrix_path)
        .with_context(|| format!("cannot load feature matrix {}", matrix_path.display()))?;
    if let Some(p) = labels {
        if !p.exists() {
            return Err(usage(format!(
                "labels file {} does not exist; pass a `user_id,domain,label` CSV",
                p.display()
            )));
        }
        let labels = GroundTruthLabels::read_csv(p).with_context(|| format!("cannot read labels {}", p.display()))?;
        let before = matrix.len();
        matrix = matrix.with_labels(&labels);
        if matrix.len() < before {
            log::warn!("{} matrix rows have no label and are left out", before - matrix.len());
        }
    }
    if matrix.is_empty() {
        bail!("no labeled rows to benchmark in {}", matrix_path.display());
    }
    if !matrix.is_labeled() {
        return Err(usage(format!(
            "{} has unlabeled rows; pass --labels <file> (a `user_id,domain,label` CSV) or build the matrix with `features --labels`",
            matrix_path.display()
        )));
    }
    Ok(matrix)
}

/// Writes `benchmark.json`, `benchmark.tsv`, `roc.csv` and `timings.json`.
///
/// The first three depend only on the inputs and the seed; wall times go to the last.
pub fn cmd_benchmark(
    matrix_path: &Path,
    labels: Option<&Path>,
    config: &BenchmarkConfig,
    seed: u64,
    out_dir: &Path,
) -> anyhow::Result<BenchmarkReport> {
    let matrix = load_labeled_matrix(matrix_path, labels)?;
    let specs = model_specs(config, seed)?;
    let split = SplitSpec {
        train_fraction: config.train_fraction.unwrap_or(0.6),
        seed,
        stratified: config.stratified.unwrap_or(true),
    };
    if !(split.train_fraction > 0.0 && split.train_fraction < 1.0) {
        return Err(usage(format!(
            "train fraction must be in (0, 1), got {}",
            split.train_fraction
        )));
    }
    let (report, timings) = benchmark(&matrix, &specs, &split)?;
    ensure_dir(out_dir)?;
    write_file(&out_dir.join("benchmark.json"), report.to_json()?)?;
    write_file(&out_dir.join("benchmark.tsv"), report.to_table())?;
    let mut roc = Vec::new();
    report.write_roc_csv(&mut roc)?;
    write_file(&out_dir.join("roc.csv"), roc)?;
    write_file(&out_dir.join("timings.json"), to_json(&timings)?)?;
    Ok(report)
}

/// Writes `archive.jsonl` and `labels.csv`.
pub fn cmd_synth(config: &SynthConfig, seed: u64, out_dir: &Path) -> anyhow::Result<GroundTruthLabels> {
    let (dataset, labels) = synthesize(config, seed)?;
    ensure_dir(out_dir)?;
    save_dataset(&dataset, &out_dir.join("archive.jsonl"))?;
    let mut buf = Vec::new();
    labels.write_csv(&mut buf)?;
    write_file(&out_dir.join("labels.csv"), buf)?;
    Ok(labels)
}

/// Runs (or lists) the reference fixtures; returns the printed lines and whether all passed.
pub fn cmd_verify(list: bool, implementations: &Implementations) -> (Vec<String>, bool) {
    if list {
        let lines = fixtures::FIXTURES
            .iter()
            .map(|f| format!("{:<24} {}", f.name, f.description))
            .collect();
        return (lines, true);
    }
    let outcomes = fixtures::run_all(implementations);
    let all = outcomes.iter().all(|o| o.passed);
    let lines = outcomes
        .into_iter()
        .map(|o| {
            if o.passed {
                format!("ok    {}", o.name)
            } else {
                format!("FAIL  {}: {}", o.name, o.detail)
            }
        })
        .collect();
    (lines, all)
}

fn run_command(cli: Cli, config: RunConfig) -> anyhow::Result<i32> {
    let seed = cli.seed.or(config.seed).unwrap_or(0);
    let out_dir = cli
        .output_dir
        .clone()
        .or(config.output_dir.clone())
        .unwrap_or_else(|| PathBuf::from("."));
    match cli.command {
        Command::Ingest(a) => {
            let mut c = config.ingest;
            c.fail_fast |= a.fail_fast;
            c.capture_at = a.capture_at.or(c.capture_at);
            c.cleanse.keep_untagged_language |= a.keep_untagged_language;
            c.cleanse.max_friends = a.max_friends.or(c.cleanse.max_friends);
            let archive = require_input(a.archive.or(c.archive.clone()), "archive", "the ARCHIVE argument")?;
            let s = cmd_ingest(&archive, &c, &out_dir)?;
            println!(
                "{} users, {} tweets, {} replies; {} malformed lines skipped, {} records quarantined",
                s.users,
                s.tweets,
                s.replies,
                s.load.malformed_lines.len(),
                s.load.quarantined()
            );
        }
        Command::Annotate(a) => {
            let mut c = config.annotate;
            apply_annotator_flags(&mut c, a.annotator, a.endpoint);
            let dataset = require_input(a.dataset.or(c.dataset.clone()), "dataset", "the DATASET argument")?;
            let r = cmd_annotate(&dataset, &c, &out_dir)?;
            println!(
                "{} tweets ({} annotatable), {} replies scored, {} failures",
                r.tweets_total,
                r.annotatable,
                r.replies_scored,
                r.failures.len()
            );
        }
        Command::Features(a) => {
            let mut c = config.features;
            c.domain = a.domain.or(c.domain);
            c.annotations = a.annotations.or(c.annotations);
            c.labels = a.labels.or(c.labels);
            c.start = a.start.or(c.start);
            c.periods = a.periods.or(c.periods);
            c.top_k = a.top_k.unwrap_or(c.top_k);
            c.per_period |= a.per_period;
            let dataset = require_input(a.dataset.or(c.dataset.clone()), "dataset", "the DATASET argument")?;
            let s = cmd_features(&dataset, &c, &config.annotate, &out_dir)?;
            println!(
                "{} rows for `{}` over {} period(s) from {}",
                s.rows, s.domain, s.periods.periods, s.periods.start
            );
        }
        Command::Benchmark(a) => {
            let mut c = config.benchmark;
            c.train_fraction = a.train_fraction.or(c.train_fraction);
            if a.no_stratify {
                c.stratified = Some(false);
            }
            if a.literal_settings {
                c.preset = Preset::LiteralSettings;
            }
            let matrix = require_input(a.matrix.or(c.matrix.clone()), "feature matrix", "the MATRIX argument")?;
            let labels = a.labels.or(c.labels.clone());
            let report = cmd_benchmark(&matrix, labels.as_deref(), &c, seed, &out_dir)?;
            print!("{}", report.to_table());
        }
        Command::Synth(a) => {
            let mut c = config.synth;
            c.n_users = a.users.unwrap_or(c.n_users);
            c.periods = a.periods.unwrap_or(c.periods);
            let labels = cmd_synth(&c, seed, &out_dir)?;
            println!(
                "{} users, {} planted influencers in `{}`",
                labels.labels.len(),
                labels.positives(),
                labels.domain
            );
        }
        Command::Verify(a) => {
            let (lines, ok) = cmd_verify(a.list, &Implementations::default());
            for l in lines {
                println!("{l}");
            }
            return Ok(if ok { EXIT_OK } else { EXIT_FAILURE });
        }
    }
    Ok(EXIT_OK)
}

fn apply_annotator_flags(c: &mut AnnotateConfig, kind: Option<AnnotatorKind>, endpoint: Option<String>) {
    if let Some(k) = kind {
        c.annotator = k;
    }
    if let Some(endpoint) = endpoint {
        match &mut c.external {
            Some(e) => e.endpoint = endpoint,
            None => {
                c.external = Some(ExternalProviderConfig {
                    endpoint,
                    token_env: "INFLUENCE_ANNOTATOR_TOKEN".into(),
                    timeout_secs: 30,
                })
            }
        }
    }
}

/// Runs a parsed command line and returns the process exit status.
pub fn run(cli: Cli) -> anyhow::Result<i32> {
    let config = match &cli.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    let threads = cli.threads.or(config.threads);
    match threads {
        Some(0) => Err(usage("--threads must be at least 1")),
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new().num_threads(n).build()?;
            pool.install(|| run_command(cli, config))
        }
        None => run_command(cli, config),
    }
}

/// Exit status for an error returned by [`run`].
pub fn exit_code(err: &anyhow::Error) -> i32 {
    if err.downcast_ref::<UsageError>().is_some() {
        EXIT_USAGE
    } else {
        EXIT_FAILURE
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn config_entries_override_preset() {
        let config: BenchmarkConfig = toml::from_str(
            r#"
            preset = "literal_settings"
            [[models]]
            algorithm = "glm_elastic_net"
            lambda = 0.0
            seed = 5
            "#,
        )
        .unwrap();
        let specs = model_specs(&config, 42).unwrap();
        assert_eq!(specs.len(), 7);
        let glm = specs
            .iter()
            .find(|s| s.algorithm() == Algorithm::GlmElasticNet)
            .unwrap();
        assert_eq!(glm.seed, 5);
        match &glm.params {
            AlgorithmParams::GlmElasticNet(p) => assert_eq!(p.lambda, 0.0),
            _ => unreachable!(),
        }
        let nn = specs.iter().find(|s| s.algorithm() == Algorithm::NeuralNet).unwrap();
        match &nn.params {
            AlgorithmParams::NeuralNet(p) => assert_eq!(p.hidden_layers, 50),
            _ => unreachable!(),
        }
        let seeds: std::collections::BTreeSet<u64> = specs.iter().map(|s| s.seed).collect();
        assert_eq!(seeds.len(), 7);
    }

    #[test]
    fn duplicate_model_is_usage_error() {
        let config: BenchmarkConfig =
            toml::from_str("[[models]]\nalgorithm = \"logistic\"\n[[models]]\nalgorithm = \"logistic\"\n").unwrap();
        let err = model_specs(&config, 0).unwrap_err();
        assert_eq!(exit_code(&err), EXIT_USAGE);
    }

    #[test]
    fn verify_reports_a_broken_implementation() {
        let imp = Implementations {
            followers_friends_relation: |followers, friends, _| followers as f64 - friends as f64,
            ..Default::default()
        };
        let (lines, ok) = cmd_verify(false, &imp);
        assert!(!ok);
        let failed: Vec<&String> = lines.iter().filter(|l| l.starts_with("FAIL")).collect();
        assert_eq!(failed.len(), 1);
        assert!(failed[0].contains("followers-friends"));
    }

    #[test]
    fn misspelled_model_parameter_rejected() {
        let bad = "[[models]]\nalgorithm = \"random_forest\"\nnumber_of_tress = 5\n";
        assert!(toml::from_str::<BenchmarkConfig>(bad).is_err());
        let good = "[[models]]\nalgorithm = \"random_forest\"\nnumber_of_trees = 5\nseed = 2\n";
        let config: BenchmarkConfig = toml::from_str(good).unwrap();
        assert_eq!(config.models[0].seed, Some(2));
    }

    #[test]
    fn unknown_config_key_rejected() {
        assert!(toml::from_str::<RunConfig>("sed = 3\n").is_err());
        assert!(toml::from_str::<RunConfig>("seed = 3\n[features]\ndomain = \"x\"\n").is_ok());
    }
}
