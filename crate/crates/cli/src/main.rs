//! `logsphere` — train, apply and evaluate the hyperspherical log anomaly
//! detector from the command line.
//!
//! Every run that takes an `--out` directory echoes its fully resolved
//! configuration there as `config.json`, so results stay reproducible.
//! Exit codes: 0 success, 2 usage problems (bad flags, missing referenced
//! files), 1 runtime failures.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::anyhow;
use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};
use serde_json::json;

use logsphere_core::{
    best_f1_metrics, build_training_set, dataset_digest, export_embeddings, fine_tune,
    gen_synthetic, load_bundle, load_labeled_log, message_score, metrics_at_threshold,
    pca_with_embeddings, run_aux_ablation, run_label_ablation, run_tfidf_pca_baseline,
    save_bundle, score_labeled, score_message, sweep_threshold, time_ordered_split, train,
    AnomalyVerdict, BundleMetadata, ClassLabel, ComponentSelection, Label, LabelFormat, LogRecord,
    LossConfig, ModelBundle, ModelConfig, OptimConfig, Origin, SyntheticSpec, TrainConfig,
    TrainReport, TrainedModel,
};

// ---------------------------------------------------------------------------
// Error plumbing: usage problems exit 2, runtime failures exit 1
// ---------------------------------------------------------------------------

enum CliError {
    Usage(String),
    Runtime(anyhow::Error),
}

type CliResult<T> = Result<T, CliError>;

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

impl From<logsphere_core::Error> for CliError {
    fn from(e: logsphere_core::Error) -> Self {
        CliError::Runtime(anyhow::Error::new(e))
    }
}

impl From<anyhow::Error> for CliError {
    fn from(e: anyhow::Error) -> Self {
        CliError::Runtime(e)
    }
}

// ---------------------------------------------------------------------------
// Configuration: flat JSON keys mirroring the flags
// ---------------------------------------------------------------------------

/// Resolved run configuration. A config file uses exactly these keys, and
/// each key has a flag of the same name; precedence is
/// defaults < config file < explicit flags.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct RunConfig {
    embed_dim: usize,
    num_heads: usize,
    num_layers: usize,
    max_len: usize,
    ffn_width: usize,
    dropout: f64,
    learning_rate: f64,
    weight_decay: f64,
    beta1: f64,
    beta2: f64,
    adam_eps: f64,
    batch_size: usize,
    max_epochs: usize,
    patience: usize,
    min_rel_improvement: f64,
    threads: usize,
    seed: u64,
    min_count: usize,
    weight_normal: f64,
    weight_anomaly: f64,
    log_arg_floor: f64,
}

impl Default for RunConfig {
    fn default() -> Self {
        let cfg = TrainConfig::default();
        RunConfig {
            embed_dim: cfg.model.embed_dim,
            num_heads: cfg.model.num_heads,
            num_layers: cfg.model.num_layers,
            max_len: cfg.model.max_len,
            ffn_width: cfg.model.ffn_width,
            dropout: cfg.model.dropout_p,
            learning_rate: cfg.optim.learning_rate,
            weight_decay: cfg.optim.weight_decay,
            beta1: cfg.optim.beta1,
            beta2: cfg.optim.beta2,
            adam_eps: cfg.optim.adam_eps,
            batch_size: cfg.optim.batch_size,
            max_epochs: cfg.optim.max_epochs,
            patience: cfg.optim.patience,
            min_rel_improvement: cfg.optim.min_rel_improvement,
            threads: cfg.optim.threads,
            seed: cfg.optim.seed,
            min_count: cfg.min_count,
            weight_normal: cfg.loss.weight_normal,
            weight_anomaly: cfg.loss.weight_anomaly,
            log_arg_floor: cfg.loss.log_arg_floor,
        }
    }
}

impl RunConfig {
    fn to_train_config(self) -> TrainConfig {
        TrainConfig {
            model: ModelConfig {
                embed_dim: self.embed_dim,
                num_heads: self.num_heads,
                num_layers: self.num_layers,
                max_len: self.max_len,
                ffn_width: self.ffn_width,
                dropout_p: self.dropout,
            },
            optim: OptimConfig {
                learning_rate: self.learning_rate,
                weight_decay: self.weight_decay,
                beta1: self.beta1,
                beta2: self.beta2,
                adam_eps: self.adam_eps,
                batch_size: self.batch_size,
                max_epochs: self.max_epochs,
                patience: self.patience,
                min_rel_improvement: self.min_rel_improvement,
                seed: self.seed,
                threads: self.threads,
            },
            loss: LossConfig {
                weight_normal: self.weight_normal,
                weight_anomaly: self.weight_anomaly,
                log_arg_floor: self.log_arg_floor,
            },
            min_count: self.min_count,
        }
    }
}

/// Model and optimizer knobs shared by the training-style subcommands.
#[derive(Debug, Args)]
struct ModelOpts {
    /// JSON config file with the same keys as these flags
    #[arg(long)]
    config: Option<PathBuf>,
    /// Embedding width d
    #[arg(long)]
    embed_dim: Option<usize>,
    /// Attention heads per layer
    #[arg(long)]
    num_heads: Option<usize>,
    /// Encoder layers
    #[arg(long)]
    num_layers: Option<usize>,
    /// Token positions per message (longer messages are truncated)
    #[arg(long)]
    max_len: Option<usize>,
    /// Hidden width of the position-wise feed-forward blocks
    #[arg(long)]
    ffn_width: Option<usize>,
    /// Dropout rate applied while training
    #[arg(long)]
    dropout: Option<f64>,
    /// Adam step size
    #[arg(long)]
    learning_rate: Option<f64>,
    /// L2 penalty coupled into the update
    #[arg(long)]
    weight_decay: Option<f64>,
    /// Messages per gradient step
    #[arg(long)]
    batch_size: Option<usize>,
    /// Epoch cap
    #[arg(long)]
    max_epochs: Option<usize>,
    /// Early-stop patience in epochs (0 disables early stopping)
    #[arg(long)]
    patience: Option<usize>,
    /// Relative loss improvement that resets patience
    #[arg(long)]
    min_rel_improvement: Option<f64>,
    /// Gradient worker threads (1 = reference single-thread mode)
    #[arg(long)]
    threads: Option<usize>,
    /// RNG seed for init, shuffling and dropout
    #[arg(long)]
    seed: Option<u64>,
    /// Minimum token frequency kept in the vocabulary
    #[arg(long)]
    min_count: Option<usize>,
    /// Loss weight on y=0 records
    #[arg(long)]
    weight_normal: Option<f64>,
    /// Loss weight on y=1 records
    #[arg(long)]
    weight_anomaly: Option<f64>,
}

fn resolve_config(opts: &ModelOpts) -> CliResult<RunConfig> {
    let mut rc = match &opts.config {
        Some(path) => {
            let text = read_file(path)?;
            serde_json::from_str(&text)
                .map_err(|e| usage(format!("config file {}: {e}", path.display())))?
        }
        None => RunConfig::default(),
    };
    macro_rules! overlay {
        ($($field:ident),* $(,)?) => {
            $( if let Some(v) = opts.$field { rc.$field = v; } )*
        };
    }
    overlay!(
        embed_dim, num_heads, num_layers, max_len, ffn_width, dropout, learning_rate,
        weight_decay, batch_size, max_epochs, patience, min_rel_improvement, threads, seed,
        min_count, weight_normal, weight_anomaly,
    );
    Ok(rc)
}

// ---------------------------------------------------------------------------
// Shared inputs
// ---------------------------------------------------------------------------

/// Target-system input: either one time-ordered file split by fraction, or
/// pre-split train/test files.
#[derive(Debug, Args)]
struct SplitInput {
    /// One time-ordered target log; the leading --train-frac of it trains
    #[arg(long, conflicts_with_all = ["train", "test"])]
    target: Option<PathBuf>,
    /// Fraction of --target used for training, in (0, 1)
    #[arg(long, requires = "target")]
    train_frac: Option<f64>,
    /// Pre-split train window (pair with --test)
    #[arg(long, requires = "test")]
    train: Option<PathBuf>,
    /// Pre-split test window (pair with --train)
    #[arg(long, requires = "train")]
    test: Option<PathBuf>,
    /// Label format of the target files: dash, csv or plain
    #[arg(long, default_value = "dash")]
    format: LabelFormat,
}

impl SplitInput {
    fn resolve(&self) -> CliResult<(Vec<LogRecord>, Vec<LogRecord>)> {
        match (&self.target, &self.train, &self.test) {
            (Some(target), None, None) => {
                let frac = self
                    .train_frac
                    .ok_or_else(|| usage("--target requires --train-frac"))?;
                let records = load_records(target, self.format, Origin::Target)?;
                let (train_window, test_window) = time_ordered_split(&records, frac)?;
                Ok((train_window.to_vec(), test_window.to_vec()))
            }
            (None, Some(train_path), Some(test_path)) => Ok((
                load_records(train_path, self.format, Origin::Target)?,
                load_records(test_path, self.format, Origin::Target)?,
            )),
            _ => Err(usage(
                "provide either --target with --train-frac, or --train with --test",
            )),
        }
    }

    fn echo(&self) -> serde_json::Value {
        json!({
            "target": self.target,
            "train_frac": self.train_frac,
            "train": self.train,
            "test": self.test,
            "format": self.format,
        })
    }
}

#[derive(Debug, Args)]
struct AuxInput {
    /// Auxiliary-system log — the y=1 sample pool
    #[arg(long)]
    aux: PathBuf,
    /// Label format of --aux: dash, csv or plain
    #[arg(long, default_value = "plain")]
    aux_format: LabelFormat,
}

impl AuxInput {
    fn load(&self) -> CliResult<Vec<LogRecord>> {
        load_records(&self.aux, self.aux_format, Origin::Auxiliary)
    }
}

// ---------------------------------------------------------------------------
// Command definitions
// ---------------------------------------------------------------------------

#[derive(Parser)]
#[command(
    name = "logsphere",
    version,
    about = "Log anomaly detection with hyperspherical message embeddings"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Train a detector and save a model bundle
    Train(TrainArgs),
    /// Continue training an existing bundle on labeled records
    Finetune(FinetuneArgs),
    /// Score a log stream with a trained bundle (JSON lines on stdout)
    Score(ScoreArgs),
    /// Evaluate a bundle against labeled records
    Eval(EvalArgs),
    /// Sweep detection thresholds over labeled records
    Sweep(SweepArgs),
    /// TF-IDF + PCA residual baseline
    BaselinePca(BaselinePcaArgs),
    /// The same PCA residual detector over learned embeddings
    PcaEmbed(PcaEmbedArgs),
    /// Train and evaluate across auxiliary-set sizes
    AblateAux(AblateAuxArgs),
    /// Expert-label injection ablation
    AblateLabels(AblateLabelsArgs),
    /// Generate a labeled synthetic corpus
    GenSynthetic(GenSyntheticArgs),
    /// Export message embeddings and scores as CSV
    ExportEmbeddings(ExportEmbeddingsArgs),
}

#[derive(Debug, Args)]
struct TrainArgs {
    #[command(flatten)]
    input: SplitInput,
    #[command(flatten)]
    aux: AuxInput,
    /// Number of auxiliary samples mixed into training (m)
    #[arg(long, default_value_t = 1000)]
    m: usize,
    #[command(flatten)]
    opts: ModelOpts,
    /// Output directory for model.bundle, train_report.jsonl, config.json
    #[arg(long, env = "LOGSPHERE_OUT")]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct FinetuneArgs {
    /// Existing model bundle
    #[arg(long)]
    model: PathBuf,
    /// Labeled records to continue training on
    #[arg(long)]
    labels: PathBuf,
    /// Label format of --labels: dash, csv or plain
    #[arg(long, default_value = "dash")]
    format: LabelFormat,
    /// Optimization epochs over the labeled set
    #[arg(long, default_value_t = 3)]
    epochs: usize,
    #[command(flatten)]
    opts: ModelOpts,
    /// Output directory for the updated bundle
    #[arg(long, env = "LOGSPHERE_OUT")]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct ScoreArgs {
    /// Trained model bundle
    #[arg(long)]
    model: PathBuf,
    /// Log file to score
    #[arg(long)]
    input: PathBuf,
    /// Label format of --input (labels are stripped, not required)
    #[arg(long, default_value = "plain")]
    format: LabelFormat,
    /// Override the threshold stored in the bundle
    #[arg(long)]
    threshold: Option<f64>,
}

#[derive(Debug, Args)]
struct EvalArgs {
    #[arg(long)]
    model: PathBuf,
    /// Labeled log file to evaluate against
    #[arg(long)]
    input: PathBuf,
    #[arg(long, default_value = "dash")]
    format: LabelFormat,
    /// Evaluate at this threshold instead of sweeping for the best F1
    #[arg(long)]
    threshold: Option<f64>,
    /// Optional directory for eval_report.json
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct SweepArgs {
    #[arg(long)]
    model: PathBuf,
    /// Labeled log file to sweep over
    #[arg(long)]
    input: PathBuf,
    #[arg(long, default_value = "dash")]
    format: LabelFormat,
    /// Optional directory for sweep.json
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct PcaSelection {
    /// Keep the smallest component prefix covering this variance fraction
    #[arg(long, default_value_t = 0.95, conflicts_with = "components")]
    variance_fraction: f64,
    /// Keep exactly this many components instead
    #[arg(long)]
    components: Option<usize>,
}

impl PcaSelection {
    fn resolve(&self) -> ComponentSelection {
        match self.components {
            Some(k) => ComponentSelection::FixedCount(k),
            None => ComponentSelection::VarianceFraction(self.variance_fraction),
        }
    }
}

#[derive(Debug, Args)]
struct BaselinePcaArgs {
    #[command(flatten)]
    input: SplitInput,
    #[command(flatten)]
    selection: PcaSelection,
    /// Optional directory for baseline_report.json
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct PcaEmbedArgs {
    /// Trained model bundle supplying the embeddings
    #[arg(long)]
    model: PathBuf,
    #[command(flatten)]
    input: SplitInput,
    #[command(flatten)]
    selection: PcaSelection,
    /// Optional directory for pca_embed_report.json
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct AblateAuxArgs {
    #[command(flatten)]
    input: SplitInput,
    #[command(flatten)]
    aux: AuxInput,
    /// Comma-separated auxiliary sizes, e.g. 1,10,100,1000
    #[arg(long, value_delimiter = ',', default_value = "1,10,100,1000")]
    m_values: Vec<usize>,
    #[command(flatten)]
    opts: ModelOpts,
    #[arg(long, env = "LOGSPHERE_OUT")]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct AblateLabelsArgs {
    #[command(flatten)]
    input: SplitInput,
    #[command(flatten)]
    aux: AuxInput,
    /// Auxiliary samples per cell
    #[arg(long, default_value_t = 1000)]
    m: usize,
    /// Comma-separated expert-label fractions, e.g. 0,0.02,0.1
    #[arg(long, value_delimiter = ',', default_value = "0,0.02,0.1")]
    fractions: Vec<f64>,
    /// Fine-tuning epochs after injecting labels
    #[arg(long, default_value_t = 3)]
    finetune_epochs: usize,
    #[command(flatten)]
    opts: ModelOpts,
    #[arg(long, env = "LOGSPHERE_OUT")]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct GenSyntheticArgs {
    /// JSON corpus spec; omitted keys (or the whole flag) fall back to defaults
    #[arg(long)]
    spec: Option<PathBuf>,
    /// Override the seed given in --spec
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory for train/test/target/auxiliary logs and spec.json
    #[arg(long, env = "LOGSPHERE_OUT")]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct ExportEmbeddingsArgs {
    #[arg(long)]
    model: PathBuf,
    /// Log file whose messages get embedded
    #[arg(long)]
    input: PathBuf,
    #[arg(long, default_value = "dash")]
    format: LabelFormat,
    /// Output directory for embeddings.csv
    #[arg(long, env = "LOGSPHERE_OUT")]
    out: PathBuf,
}

// ---------------------------------------------------------------------------
// Helpers
// ---------------------------------------------------------------------------

fn require_file(path: &Path, what: &str) -> CliResult<()> {
    if path.is_file() {
        Ok(())
    } else {
        Err(usage(format!("{what} {} does not exist", path.display())))
    }
}

fn read_file(path: &Path) -> CliResult<String> {
    require_file(path, "file")?;
    fs::read_to_string(path)
        .map_err(|e| CliError::Runtime(anyhow!("reading {}: {e}", path.display())))
}

fn load_records(path: &Path, format: LabelFormat, origin: Origin) -> CliResult<Vec<LogRecord>> {
    require_file(path, "input file")?;
    Ok(load_labeled_log(path, format, origin)?)
}

fn load_model(path: &Path) -> CliResult<ModelBundle> {
    require_file(path, "model file")?;
    Ok(load_bundle(path)?)
}

fn ensure_dir(dir: &Path) -> CliResult<()> {
    fs::create_dir_all(dir)
        .map_err(|e| CliError::Runtime(anyhow!("creating {}: {e}", dir.display())))
}

fn write_text(path: &Path, contents: &str) -> CliResult<()> {
    fs::write(path, contents)
        .map_err(|e| CliError::Runtime(anyhow!("writing {}: {e}", path.display())))
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> CliResult<()> {
    let mut text = serde_json::to_string_pretty(value)
        .map_err(|e| CliError::Runtime(anyhow!("serializing {}: {e}", path.display())))?;
    text.push('\n');
    write_text(path, &text)
}

/// Echoes the fully resolved run configuration into `<out>/config.json`.
fn echo_config(out: &Path, value: serde_json::Value) -> CliResult<()> {
    write_json(&out.join("config.json"), &value)
}

fn print_json<T: Serialize>(value: &T) {
    println!(
        "{}",
        serde_json::to_string_pretty(value).expect("report serialization")
    );
}

/// Sweeps a threshold over the given labeled records, if both classes are
/// present; used to stamp freshly trained bundles.
fn threshold_from_mixture(
    model: &TrainedModel,
    pairs: &[(LogRecord, ClassLabel)],
    source: &str,
) -> CliResult<(Option<f64>, Option<String>)> {
    let has_both = pairs.iter().any(|(_, y)| *y == 1) && pairs.iter().any(|(_, y)| *y == 0);
    if !has_both {
        log::warn!("single-class training mixture; the bundle stores no threshold");
        return Ok((None, None));
    }
    let mut scored = Vec::with_capacity(pairs.len());
    for (rec, y) in pairs {
        scored.push((message_score(&rec.raw_text, model)?, *y == 1));
    }
    let sweep = sweep_threshold(&scored)?;
    log::info!(
        "threshold {:.6} picked by {source} (F1 {:.4} on the mixture)",
        sweep.best_threshold,
        sweep.best_f1
    );
    Ok((Some(sweep.best_threshold), Some(source.to_string())))
}

fn dash_line(rec: &LogRecord) -> String {
    let marker = if rec.label == Label::Anomaly { "FAULT" } else { "-" };
    format!("{marker} {}\n", rec.raw_text)
}

fn write_dash_log(path: &Path, records: &[LogRecord]) -> CliResult<()> {
    let mut text = String::new();
    for rec in records {
        text.push_str(&dash_line(rec));
    }
    write_text(path, &text)
}

// ---------------------------------------------------------------------------
// Subcommand implementations
// ---------------------------------------------------------------------------

/// Epoch rows followed by one summary row, so a report file alone is enough
/// to audit how a run ended and whether it can be reproduced.
fn report_jsonl(report: &TrainReport) -> String {
    let mut text = report.to_jsonl();
    let summary = json!({
        "stopped_epoch": report.stopped_epoch,
        "params_checksum": report.params_checksum,
        "collapse_warning": report.collapse_warning,
    });
    text.push_str(&summary.to_string());
    text.push('\n');
    text
}

fn run_train(args: TrainArgs) -> CliResult<()> {
    let rc = resolve_config(&args.opts)?;
    let (train_window, test_window) = args.input.resolve()?;
    let auxiliary = args.aux.load()?;
    let dataset = build_training_set(&train_window, &test_window, &auxiliary, args.m, rc.seed)?;
    let digest = dataset_digest(&dataset);
    let cfg = rc.to_train_config();
    log::info!(
        "training on {} records ({} auxiliary), vocabulary pending",
        dataset.train.len(),
        args.m
    );
    let (model, report) = train(&dataset, &cfg)?;
    if report.collapse_warning {
        log::warn!("no y=1 samples were present; scores will collapse toward zero");
    }
    let (threshold, threshold_source) =
        threshold_from_mixture(&model, &dataset.train, "train-mixture-sweep")?;
    let bundle = ModelBundle {
        model,
        threshold,
        metadata: BundleMetadata {
            seed: rc.seed,
            dataset_digest: digest,
            threshold_source,
        },
    };
    ensure_dir(&args.out)?;
    save_bundle(&bundle, &args.out.join("model.bundle"))?;
    write_text(&args.out.join("train_report.jsonl"), &report_jsonl(&report))?;
    echo_config(
        &args.out,
        json!({
            "command": "train",
            "input": args.input.echo(),
            "aux": args.aux.aux,
            "aux_format": args.aux.aux_format,
            "m": args.m,
            "config": rc,
        }),
    )?;
    println!(
        "trained {} epochs (final loss {:.6}); bundle written to {}",
        report.stopped_epoch,
        report.epochs.last().map(|e| e.loss).unwrap_or(f64::NAN),
        args.out.join("model.bundle").display()
    );
    Ok(())
}

fn run_finetune(args: FinetuneArgs) -> CliResult<()> {
    let rc = resolve_config(&args.opts)?;
    let mut bundle = load_model(&args.model)?;
    let records = load_records(&args.labels, args.format, Origin::Target)?;
    let mut unknown = 0usize;
    let pairs: Vec<(LogRecord, ClassLabel)> = records
        .into_iter()
        .map(|rec| {
            let y = match rec.label {
                Label::Anomaly => 1,
                Label::Normal => 0,
                Label::Unknown => {
                    unknown += 1;
                    0
                }
            };
            (rec, y)
        })
        .collect();
    if unknown > 0 {
        log::warn!("{unknown} unlabeled records are treated as normal (y=0)");
    }
    let cfg = rc.to_train_config();
    let report = fine_tune(&mut bundle.model, &pairs, &cfg, args.epochs)?;
    let (threshold, source) = threshold_from_mixture(&bundle.model, &pairs, "finetune-sweep")?;
    if threshold.is_some() {
        bundle.threshold = threshold;
        bundle.metadata.threshold_source = source;
    }
    ensure_dir(&args.out)?;
    save_bundle(&bundle, &args.out.join("model.bundle"))?;
    write_text(&args.out.join("finetune_report.jsonl"), &report_jsonl(&report))?;
    echo_config(
        &args.out,
        json!({
            "command": "finetune",
            "model": args.model,
            "labels": args.labels,
            "format": args.format,
            "epochs": args.epochs,
            "config": rc,
        }),
    )?;
    println!(
        "fine-tuned {} epochs; bundle written to {}",
        report.stopped_epoch,
        args.out.join("model.bundle").display()
    );
    Ok(())
}

#[derive(Serialize)]
struct ScoredLine {
    seq_index: u64,
    #[serde(flatten)]
    verdict: AnomalyVerdict,
}

fn run_score(args: ScoreArgs) -> CliResult<()> {
    let bundle = load_model(&args.model)?;
    let records = load_records(&args.input, args.format, Origin::Target)?;
    let stdout = std::io::stdout();
    let mut out = stdout.lock();
    for rec in &records {
        let verdict = score_message(&rec.raw_text, &bundle, args.threshold)?;
        let line = ScoredLine {
            seq_index: rec.seq_index,
            verdict,
        };
        let json = serde_json::to_string(&line).expect("verdict serialization");
        if let Err(e) = writeln!(out, "{json}") {
            // A closed pipe (e.g. `| head`) ends the stream, it is not a failure.
            if e.kind() == std::io::ErrorKind::BrokenPipe {
                return Ok(());
            }
            return Err(CliError::Runtime(anyhow!("writing to stdout: {e}")));
        }
    }
    Ok(())
}

fn run_eval(args: EvalArgs) -> CliResult<()> {
    let bundle = load_model(&args.model)?;
    let records = load_records(&args.input, args.format, Origin::Target)?;
    let scored = score_labeled(&bundle.model, &records)?;
    // Precedence: explicit --threshold, then the threshold stored in the
    // bundle, then a best-F1 sweep over the labeled scores.
    let report = match args.threshold.or(bundle.threshold) {
        Some(t) => metrics_at_threshold(&scored, t)?,
        None => best_f1_metrics(&scored)?,
    };
    print_json(&report);
    if let Some(out) = &args.out {
        ensure_dir(out)?;
        write_json(&out.join("eval_report.json"), &report)?;
        echo_config(
            out,
            json!({
                "command": "eval",
                "model": args.model,
                "input": args.input,
                "format": args.format,
                "threshold": args.threshold,
            }),
        )?;
    }
    Ok(())
}

fn run_sweep(args: SweepArgs) -> CliResult<()> {
    let bundle = load_model(&args.model)?;
    let records = load_records(&args.input, args.format, Origin::Target)?;
    let scored = score_labeled(&bundle.model, &records)?;
    let sweep = sweep_threshold(&scored)?;
    print_json(&sweep);
    if let Some(out) = &args.out {
        ensure_dir(out)?;
        write_json(&out.join("sweep.json"), &sweep)?;
        echo_config(
            out,
            json!({
                "command": "sweep",
                "model": args.model,
                "input": args.input,
                "format": args.format,
            }),
        )?;
    }
    Ok(())
}

/// The fit side of both PCA commands models normal behaviour only: records
/// the input labels as anomalous are excluded, like in training.
fn drop_labeled_anomalies(records: Vec<LogRecord>) -> Vec<LogRecord> {
    records
        .into_iter()
        .filter(|r| r.label != Label::Anomaly)
        .collect()
}

fn run_baseline_pca(args: BaselinePcaArgs) -> CliResult<()> {
    let (train_window, test_window) = args.input.resolve()?;
    let fit_on = drop_labeled_anomalies(train_window);
    let report = run_tfidf_pca_baseline(&fit_on, &test_window, args.selection.resolve())?;
    print_json(&report);
    if let Some(out) = &args.out {
        ensure_dir(out)?;
        write_json(&out.join("baseline_report.json"), &report)?;
        echo_config(
            out,
            json!({
                "command": "baseline-pca",
                "input": args.input.echo(),
                "selection": args.selection.resolve(),
            }),
        )?;
    }
    Ok(())
}

fn run_pca_embed(args: PcaEmbedArgs) -> CliResult<()> {
    let bundle = load_model(&args.model)?;
    let (train_window, test_window) = args.input.resolve()?;
    let fit_on = drop_labeled_anomalies(train_window);
    let report = pca_with_embeddings(
        &bundle.model,
        &fit_on,
        &test_window,
        args.selection.resolve(),
    )?;
    print_json(&report);
    if let Some(out) = &args.out {
        ensure_dir(out)?;
        write_json(&out.join("pca_embed_report.json"), &report)?;
        echo_config(
            out,
            json!({
                "command": "pca-embed",
                "model": args.model,
                "input": args.input.echo(),
                "selection": args.selection.resolve(),
            }),
        )?;
    }
    Ok(())
}

fn run_ablate_aux(args: AblateAuxArgs) -> CliResult<()> {
    let rc = resolve_config(&args.opts)?;
    let (train_window, test_window) = args.input.resolve()?;
    let auxiliary = args.aux.load()?;
    let cfg = rc.to_train_config();
    let rows = run_aux_ablation(&train_window, &test_window, &auxiliary, &args.m_values, &cfg)?;
    print_json(&rows);
    ensure_dir(&args.out)?;
    write_json(&args.out.join("aux_ablation.json"), &rows)?;
    echo_config(
        &args.out,
        json!({
            "command": "ablate-aux",
            "input": args.input.echo(),
            "aux": args.aux.aux,
            "aux_format": args.aux.aux_format,
            "m_values": args.m_values,
            "config": rc,
        }),
    )?;
    Ok(())
}

fn run_ablate_labels(args: AblateLabelsArgs) -> CliResult<()> {
    let rc = resolve_config(&args.opts)?;
    let (train_window, test_window) = args.input.resolve()?;
    let auxiliary = args.aux.load()?;
    let labeled: Vec<LogRecord> = train_window
        .iter()
        .filter(|r| r.label == Label::Anomaly)
        .cloned()
        .collect();
    if labeled.is_empty() {
        log::warn!("the train window contains no labeled anomalies; nothing to inject");
    }
    let cfg = rc.to_train_config();
    let rows = run_label_ablation(
        &train_window,
        &test_window,
        &auxiliary,
        &labeled,
        &args.fractions,
        args.m,
        args.finetune_epochs,
        &cfg,
    )?;
    print_json(&rows);
    ensure_dir(&args.out)?;
    write_json(&args.out.join("label_ablation.json"), &rows)?;
    echo_config(
        &args.out,
        json!({
            "command": "ablate-labels",
            "input": args.input.echo(),
            "aux": args.aux.aux,
            "aux_format": args.aux.aux_format,
            "m": args.m,
            "fractions": args.fractions,
            "finetune_epochs": args.finetune_epochs,
            "config": rc,
        }),
    )?;
    Ok(())
}

fn run_gen_synthetic(args: GenSyntheticArgs) -> CliResult<()> {
    let mut spec = match &args.spec {
        Some(path) => {
            let text = read_file(path)?;
            serde_json::from_str::<SyntheticSpec>(&text)
                .map_err(|e| usage(format!("spec file {}: {e}", path.display())))?
        }
        None => SyntheticSpec::default(),
    };
    if let Some(seed) = args.seed {
        spec.seed = seed;
    }
    let corpus = gen_synthetic(&spec)?;
    ensure_dir(&args.out)?;
    write_dash_log(&args.out.join("train.log"), &corpus.train)?;
    write_dash_log(&args.out.join("test.log"), &corpus.test)?;
    write_dash_log(&args.out.join("target.log"), &corpus.target_stream())?;
    write_dash_log(&args.out.join("auxiliary.log"), &corpus.auxiliary)?;
    write_json(&args.out.join("spec.json"), &spec)?;
    println!(
        "wrote {} train / {} test / {} auxiliary messages to {}",
        corpus.train.len(),
        corpus.test.len(),
        corpus.auxiliary.len(),
        args.out.display()
    );
    Ok(())
}

fn run_export_embeddings(args: ExportEmbeddingsArgs) -> CliResult<()> {
    let bundle = load_model(&args.model)?;
    let records = load_records(&args.input, args.format, Origin::Target)?;
    ensure_dir(&args.out)?;
    let path = args.out.join("embeddings.csv");
    export_embeddings(&bundle.model, &records, &path)?;
    echo_config(
        &args.out,
        json!({
            "command": "export-embeddings",
            "model": args.model,
            "input": args.input,
            "format": args.format,
        }),
    )?;
    println!("wrote {} rows to {}", records.len(), path.display());
    Ok(())
}

fn main() {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info"))
        .format_timestamp(None)
        .init();
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Train(args) => run_train(args),
        Command::Finetune(args) => run_finetune(args),
        Command::Score(args) => run_score(args),
        Command::Eval(args) => run_eval(args),
        Command::Sweep(args) => run_sweep(args),
        Command::BaselinePca(args) => run_baseline_pca(args),
        Command::PcaEmbed(args) => run_pca_embed(args),
        Command::AblateAux(args) => run_ablate_aux(args),
        Command::AblateLabels(args) => run_ablate_labels(args),
        Command::GenSynthetic(args) => run_gen_synthetic(args),
        Command::ExportEmbeddings(args) => run_export_embeddings(args),
    };
    match result {
        Ok(()) => {}
        Err(CliError::Usage(msg)) => {
            eprintln!("error: {msg}");
            std::process::exit(2);
        }
        Err(CliError::Runtime(err)) => {
            eprintln!("error: {err:#}");
            std::process::exit(1);
        }
    }
}
