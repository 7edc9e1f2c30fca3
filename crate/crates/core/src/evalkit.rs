//! Evaluation kit: detection metrics, a deterministic synthetic log corpus,
//! experiment drivers (time-split grid, auxiliary-size ablation, expert-label
//! ablation, PCA baselines) and embedding export.

use std::collections::HashSet;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::baseline::{
    dense_to_sparse, pca_fit, pca_residual_score, tfidf_fit, tfidf_transform, ComponentSelection,
};
use crate::detector::{embed_message, message_score, sweep_threshold};
use crate::error::{Error, Result};
use crate::ingest::{
    build_training_set, inject_expert_labels, time_ordered_split, Label, LogRecord, Origin,
};
use crate::objective::anomaly_score;
use crate::seeding::{derive_seed, derive_seed_indexed};
use crate::tokenizer::preprocess;
use crate::trainer::{fine_tune, train, TrainConfig, TrainedModel};

// ---------------------------------------------------------------------------
// Metrics
// ---------------------------------------------------------------------------

/// Binary detection counts and derived scores; the positive class is
/// "anomaly". Degenerate ratios (0/0) are reported as 0.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub true_pos: usize,
    pub false_pos: usize,
    pub true_neg: usize,
    pub false_neg: usize,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub accuracy: f64,
    /// The score threshold these counts were taken at, when one applies.
    pub threshold: Option<f64>,
}

fn ratio(num: usize, den: usize) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

/// Tallies predicted-vs-actual pairs. Each entry is
/// `(predicted_anomaly, actually_anomaly)`.
pub fn compute_metrics(verdicts: &[(bool, bool)]) -> Result<MetricsReport> {
    if verdicts.is_empty() {
        return Err(Error::EmptyInput("no verdicts to compute metrics over".into()));
    }
    let mut tp = 0;
    let mut fp = 0;
    let mut tn = 0;
    let mut fn_ = 0;
    for &(predicted, actual) in verdicts {
        match (predicted, actual) {
            (true, true) => tp += 1,
            (true, false) => fp += 1,
            (false, false) => tn += 1,
            (false, true) => fn_ += 1,
        }
    }
    Ok(MetricsReport {
        true_pos: tp,
        false_pos: fp,
        true_neg: tn,
        false_neg: fn_,
        precision: ratio(tp, tp + fp),
        recall: ratio(tp, tp + fn_),
        f1: ratio(2 * tp, 2 * tp + fp + fn_),
        accuracy: ratio(tp + tn, tp + fp + tn + fn_),
        threshold: None,
    })
}

/// Metrics of the verdict rule `score > threshold` over `(score, is_anomaly)`
/// pairs.
pub fn metrics_at_threshold(scored: &[(f64, bool)], threshold: f64) -> Result<MetricsReport> {
    let verdicts: Vec<(bool, bool)> = scored
        .iter()
        .map(|&(score, actual)| (score > threshold, actual))
        .collect();
    let mut report = compute_metrics(&verdicts)?;
    report.threshold = Some(threshold);
    Ok(report)
}

/// Sweeps all distinguishable thresholds and reports metrics at the best one.
pub fn best_f1_metrics(scored: &[(f64, bool)]) -> Result<MetricsReport> {
    let sweep = sweep_threshold(scored)?;
    metrics_at_threshold(scored, sweep.best_threshold)
}

/// Scores every labeled record with the trained encoder; `Unknown` records
/// are skipped (counted in the log) since they cannot be graded.
pub fn score_labeled(model: &TrainedModel, records: &[LogRecord]) -> Result<Vec<(f64, bool)>> {
    let mut out = Vec::with_capacity(records.len());
    let mut skipped = 0usize;
    for rec in records {
        match rec.label {
            Label::Unknown => skipped += 1,
            _ => out.push((
                message_score(&rec.raw_text, model)?,
                rec.label == Label::Anomaly,
            )),
        }
    }
    if skipped > 0 {
        log::warn!("skipped {skipped} unlabeled records during evaluation");
    }
    if out.is_empty() {
        return Err(Error::EmptyInput("no labeled records to evaluate".into()));
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// Synthetic corpus
// ---------------------------------------------------------------------------

/// Vocabulary of the simulated target system. Disjoint from the other pools;
/// free of digits and stopwords so every word survives preprocessing.
pub const TARGET_WORDS: [&str; 36] = [
    "request", "handler", "session", "cache", "worker", "queue", "task", "commit", "flush",
    "replica", "shard", "bucket", "snapshot", "backup", "restore", "upload", "download", "client",
    "gateway", "proxy", "token", "lease", "heartbeat", "cluster", "node", "volume", "mounted",
    "ready", "started", "completed", "scheduled", "accepted", "stream", "batch", "record",
    "checkpoint",
];

/// Vocabulary of the simulated auxiliary (unrelated) system.
pub const AUXILIARY_WORDS: [&str; 36] = [
    "kernel", "module", "driver", "firmware", "interface", "packet", "socket", "buffer", "thread",
    "process", "memory", "paging", "swap", "inode", "filesystem", "device", "sensor", "voltage",
    "temperature", "fan", "power", "bridge", "link", "port", "frame", "interrupt", "register",
    "controller", "bus", "clock", "daemon", "watchdog", "spool", "mailbox", "quota", "cgroup",
];

/// Failure vocabulary used by anomalous messages. A share of auxiliary
/// templates also carries one of these words, so the anomaly vocabulary is
/// seen during training — as class y=1.
pub const ANOMALY_WORDS: [&str; 18] = [
    "error", "failure", "failed", "fatal", "panic", "exception", "corrupt", "corrupted",
    "timeout", "refused", "unreachable", "abort", "aborted", "crash", "overflow", "denied",
    "critical", "dead",
];

/// Parameters of the synthetic corpus. Everything is derived from `seed`;
/// the same spec always generates byte-identical corpora.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SyntheticSpec {
    pub n_train: usize,
    pub n_test: usize,
    pub n_auxiliary: usize,
    /// Distinct normal templates available to the target train window.
    pub templates_train: usize,
    /// Additional normal templates that only ever appear in test.
    pub templates_unseen: usize,
    pub templates_anomaly: usize,
    pub templates_auxiliary: usize,
    /// Fraction of test messages rendered from anomaly templates
    /// (exact count: `floor(rate * n_test)`).
    pub anomaly_rate: f64,
    /// Fraction of *normal* test messages rendered from unseen templates.
    pub unseen_rate: f64,
    /// Fraction of train messages that are (latent) anomalies — contamination
    /// for the expert-label experiment.
    pub train_anomaly_rate: f64,
    pub seed: u64,
}

impl Default for SyntheticSpec {
    fn default() -> Self {
        SyntheticSpec {
            n_train: 5000,
            n_test: 2000,
            n_auxiliary: 5000,
            templates_train: 30,
            templates_unseen: 10,
            templates_anomaly: 12,
            templates_auxiliary: 30,
            anomaly_rate: 0.1,
            unseen_rate: 0.2,
            train_anomaly_rate: 0.0,
            seed: 7,
        }
    }
}

impl SyntheticSpec {
    pub fn validate(&self) -> Result<()> {
        for (name, rate) in [
            ("anomaly_rate", self.anomaly_rate),
            ("unseen_rate", self.unseen_rate),
            ("train_anomaly_rate", self.train_anomaly_rate),
        ] {
            if !(0.0..=1.0).contains(&rate) || !rate.is_finite() {
                return Err(Error::InvalidArgument(format!(
                    "{name} {rate} must lie in [0, 1]"
                )));
            }
        }
        if self.n_train == 0 || self.n_test == 0 {
            return Err(Error::InvalidArgument(
                "synthetic corpus needs nonzero train and test sizes".into(),
            ));
        }
        if self.templates_train == 0 {
            return Err(Error::InvalidArgument(
                "synthetic corpus needs at least one train template".into(),
            ));
        }
        if self.unseen_rate > 0.0 && self.templates_unseen == 0 {
            return Err(Error::InvalidArgument(
                "unseen_rate > 0 requires unseen templates".into(),
            ));
        }
        if (self.anomaly_rate > 0.0 || self.train_anomaly_rate > 0.0) && self.templates_anomaly == 0
        {
            return Err(Error::InvalidArgument(
                "anomaly injection requires anomaly templates".into(),
            ));
        }
        if self.n_auxiliary > 0 && self.templates_auxiliary == 0 {
            return Err(Error::InvalidArgument(
                "auxiliary messages require auxiliary templates".into(),
            ));
        }
        Ok(())
    }
}

/// A generated corpus. `train` and `test` form one time-ordered target
/// stream (test seq indices continue after train); labels carry the ground
/// truth for evaluation and expert-label experiments.
#[derive(Debug, Clone)]
pub struct SyntheticCorpus {
    pub train: Vec<LogRecord>,
    pub test: Vec<LogRecord>,
    pub auxiliary: Vec<LogRecord>,
}

impl SyntheticCorpus {
    /// The full target stream, train window first — ready for re-splitting
    /// at arbitrary fractions.
    pub fn target_stream(&self) -> Vec<LogRecord> {
        let mut all = self.train.clone();
        all.extend(self.test.iter().cloned());
        all
    }

    /// Ground-truth anomalies inside the train window — the pool an expert
    /// would label.
    pub fn train_anomalies(&self) -> Vec<LogRecord> {
        self.train
            .iter()
            .filter(|r| r.label == Label::Anomaly)
            .cloned()
            .collect()
    }
}

/// One position in a message template: a fixed word, or a variable slot
/// rendered with digits so the tokenizer's digit rule removes it.
#[derive(Debug, Clone, Copy)]
enum Piece {
    Word(&'static str),
    IntSlot,
    HexSlot,
    MillisSlot,
}

type Template = Vec<Piece>;

fn sample_words(rng: &mut ChaCha8Rng, pool: &[&'static str], len: usize) -> Vec<&'static str> {
    rand::seq::index::sample(rng, pool.len(), len)
        .iter()
        .map(|i| pool[i])
        .collect()
}

fn insert_slots(rng: &mut ChaCha8Rng, words: &[&'static str]) -> Template {
    let mut pieces: Template = words.iter().map(|&w| Piece::Word(w)).collect();
    let n_slots = 1 + rng.gen_range(0..=1usize);
    for _ in 0..n_slots {
        let pos = rng.gen_range(0..=pieces.len());
        let slot = match rng.gen_range(0..3u32) {
            0 => Piece::IntSlot,
            1 => Piece::HexSlot,
            _ => Piece::MillisSlot,
        };
        pieces.insert(pos, slot);
    }
    pieces
}

const TEMPLATE_ATTEMPTS: usize = 10_000;

fn too_few_templates() -> Error {
    Error::InvalidArgument("could not draw enough distinct templates from the word pools".into())
}

/// Distinct-word-set templates over the target pool. `taken` is shared
/// between the train and unseen batches so unseen templates really are new.
fn build_target_templates(
    rng: &mut ChaCha8Rng,
    count: usize,
    taken: &mut HashSet<Vec<&'static str>>,
) -> Result<Vec<Template>> {
    let mut out = Vec::with_capacity(count);
    for _ in 0..count {
        let mut attempts = 0;
        loop {
            attempts += 1;
            if attempts > TEMPLATE_ATTEMPTS {
                return Err(too_few_templates());
            }
            let len = rng.gen_range(3..=5usize);
            let words = sample_words(rng, &TARGET_WORDS, len);
            let mut key = words.clone();
            key.sort_unstable();
            if taken.insert(key) {
                out.push(insert_slots(rng, &words));
                break;
            }
        }
    }
    Ok(out)
}

/// Anomaly templates: two failure words mixed with one or two auxiliary-pool
/// words, in shuffled order.
fn build_anomaly_templates(rng: &mut ChaCha8Rng, count: usize) -> Result<Vec<Template>> {
    let mut taken: HashSet<Vec<&'static str>> = HashSet::new();
    let mut out = Vec::with_capacity(count);
    for _ in 0..count {
        let mut attempts = 0;
        loop {
            attempts += 1;
            if attempts > TEMPLATE_ATTEMPTS {
                return Err(too_few_templates());
            }
            let n_aux = rng.gen_range(1..=2usize);
            let mut words = sample_words(rng, &ANOMALY_WORDS, 2);
            words.extend(sample_words(rng, &AUXILIARY_WORDS, n_aux));
            words.shuffle(rng);
            let mut key = words.clone();
            key.sort_unstable();
            if taken.insert(key) {
                out.push(insert_slots(rng, &words));
                break;
            }
        }
    }
    Ok(out)
}

/// Auxiliary-system templates. Every third one carries a single failure word
/// so that vocabulary is trained (as y=1) without ever appearing in target
/// training data.
fn build_aux_templates(rng: &mut ChaCha8Rng, count: usize) -> Result<Vec<Template>> {
    let mut taken: HashSet<Vec<&'static str>> = HashSet::new();
    let mut out = Vec::with_capacity(count);
    for i in 0..count {
        let mut attempts = 0;
        loop {
            attempts += 1;
            if attempts > TEMPLATE_ATTEMPTS {
                return Err(too_few_templates());
            }
            let len = rng.gen_range(3..=5usize);
            let mut words = sample_words(rng, &AUXILIARY_WORDS, len);
            if i % 3 == 0 {
                let w = ANOMALY_WORDS[rng.gen_range(0..ANOMALY_WORDS.len())];
                let pos = rng.gen_range(0..=words.len());
                words.insert(pos, w);
            }
            let mut key = words.clone();
            key.sort_unstable();
            if taken.insert(key) {
                out.push(insert_slots(rng, &words));
                break;
            }
        }
    }
    Ok(out)
}

fn render(rng: &mut ChaCha8Rng, template: &Template) -> String {
    let mut parts: Vec<String> = Vec::with_capacity(template.len());
    for piece in template {
        parts.push(match piece {
            Piece::Word(w) => (*w).to_string(),
            Piece::IntSlot => format!("id={}", rng.gen_range(0..100_000u32)),
            Piece::HexSlot => format!("0x{:05x}", rng.gen_range(0x1000..0x10_0000u32)),
            Piece::MillisSlot => format!("{}ms", rng.gen_range(1..5_000u32)),
        });
    }
    parts.join(" ")
}

/// Exactly `k` true flags over `n` positions, sampled without replacement.
fn flag_positions(rng: &mut ChaCha8Rng, n: usize, k: usize) -> Vec<bool> {
    let mut flags = vec![false; n];
    if k > 0 {
        for idx in rand::seq::index::sample(rng, n, k).iter() {
            flags[idx] = true;
        }
    }
    flags
}

/// Generates the corpus. Anomaly and unseen-template counts are exact:
/// `floor(rate * n)` positions, sampled without replacement.
pub fn gen_synthetic(spec: &SyntheticSpec) -> Result<SyntheticCorpus> {
    spec.validate()?;
    let mut trng = ChaCha8Rng::seed_from_u64(derive_seed(spec.seed, &["synthetic", "templates"]));
    let mut target_taken = HashSet::new();
    let train_templates = build_target_templates(&mut trng, spec.templates_train, &mut target_taken)?;
    let unseen_templates =
        build_target_templates(&mut trng, spec.templates_unseen, &mut target_taken)?;
    let anomaly_templates = build_anomaly_templates(&mut trng, spec.templates_anomaly)?;
    let aux_templates = build_aux_templates(&mut trng, spec.templates_auxiliary)?;

    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(spec.seed, &["synthetic", "train"]));
    let n_contaminated = (spec.train_anomaly_rate * spec.n_train as f64).floor() as usize;
    let contaminated = flag_positions(&mut rng, spec.n_train, n_contaminated);
    let mut train = Vec::with_capacity(spec.n_train);
    for i in 0..spec.n_train {
        let (template, label) = if contaminated[i] {
            (&anomaly_templates[rng.gen_range(0..anomaly_templates.len())], Label::Anomaly)
        } else {
            (&train_templates[rng.gen_range(0..train_templates.len())], Label::Normal)
        };
        train.push(LogRecord {
            seq_index: (i + 1) as u64,
            raw_text: render(&mut rng, template),
            origin: Origin::Target,
            label,
        });
    }

    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(spec.seed, &["synthetic", "test"]));
    let n_anomalies = (spec.anomaly_rate * spec.n_test as f64).floor() as usize;
    let anomalous = flag_positions(&mut rng, spec.n_test, n_anomalies);
    let n_normal = spec.n_test - n_anomalies;
    let n_unseen = (spec.unseen_rate * n_normal as f64).floor() as usize;
    let unseen = flag_positions(&mut rng, n_normal, n_unseen);
    let mut test = Vec::with_capacity(spec.n_test);
    let mut normals_emitted = 0usize;
    for i in 0..spec.n_test {
        let (template, label) = if anomalous[i] {
            (&anomaly_templates[rng.gen_range(0..anomaly_templates.len())], Label::Anomaly)
        } else {
            let pool = if unseen[normals_emitted] {
                &unseen_templates
            } else {
                &train_templates
            };
            normals_emitted += 1;
            (&pool[rng.gen_range(0..pool.len())], Label::Normal)
        };
        test.push(LogRecord {
            seq_index: (spec.n_train + i + 1) as u64,
            raw_text: render(&mut rng, template),
            origin: Origin::Target,
            label,
        });
    }

    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(spec.seed, &["synthetic", "aux"]));
    let mut auxiliary = Vec::with_capacity(spec.n_auxiliary);
    for i in 0..spec.n_auxiliary {
        let template = &aux_templates[rng.gen_range(0..aux_templates.len())];
        auxiliary.push(LogRecord {
            seq_index: (i + 1) as u64,
            raw_text: render(&mut rng, template),
            origin: Origin::Auxiliary,
            label: Label::Normal,
        });
    }

    Ok(SyntheticCorpus {
        train,
        test,
        auxiliary,
    })
}

// ---------------------------------------------------------------------------
// Experiment drivers
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Serialize)]
pub struct SplitGridRow {
    pub train_fraction: f64,
    pub train_size: usize,
    pub metrics: MetricsReport,
}

/// Trains and evaluates once per train fraction. Every cell gets a fresh
/// seed derived from the base seed and its position — no model reuse.
pub fn run_split_grid(
    target: &[LogRecord],
    auxiliary: &[LogRecord],
    fractions: &[f64],
    m: usize,
    cfg: &TrainConfig,
) -> Result<Vec<SplitGridRow>> {
    if fractions.is_empty() {
        return Err(Error::EmptyInput("split grid needs at least one fraction".into()));
    }
    let mut rows = Vec::with_capacity(fractions.len());
    for (i, &fraction) in fractions.iter().enumerate() {
        let (train_target, test_target) = time_ordered_split(target, fraction)?;
        let mut cell = *cfg;
        cell.optim.seed = derive_seed_indexed(cfg.optim.seed, "split-grid", &[i as u64]);
        let dataset = build_training_set(train_target, test_target, auxiliary, m, cell.optim.seed)?;
        let (model, _) = train(&dataset, &cell)?;
        let scored = score_labeled(&model, &dataset.test)?;
        rows.push(SplitGridRow {
            train_fraction: fraction,
            train_size: train_target.len(),
            metrics: best_f1_metrics(&scored)?,
        });
    }
    Ok(rows)
}

#[derive(Debug, Clone, Serialize)]
pub struct AuxAblationRow {
    pub m: usize,
    pub collapse_warning: bool,
    pub metrics: MetricsReport,
}

/// Trains once per auxiliary-sample count `m`, fresh seed per cell.
pub fn run_aux_ablation(
    train_target: &[LogRecord],
    test_target: &[LogRecord],
    auxiliary: &[LogRecord],
    m_values: &[usize],
    cfg: &TrainConfig,
) -> Result<Vec<AuxAblationRow>> {
    if m_values.is_empty() {
        return Err(Error::EmptyInput("auxiliary ablation needs at least one m".into()));
    }
    let mut rows = Vec::with_capacity(m_values.len());
    for (i, &m) in m_values.iter().enumerate() {
        let mut cell = *cfg;
        cell.optim.seed = derive_seed_indexed(cfg.optim.seed, "aux-ablation", &[i as u64]);
        let dataset = build_training_set(train_target, test_target, auxiliary, m, cell.optim.seed)?;
        let (model, report) = train(&dataset, &cell)?;
        let scored = score_labeled(&model, &dataset.test)?;
        rows.push(AuxAblationRow {
            m,
            collapse_warning: report.collapse_warning,
            metrics: best_f1_metrics(&scored)?,
        });
    }
    Ok(rows)
}

#[derive(Debug, Clone, Serialize)]
pub struct LabelAblationRow {
    pub fraction: f64,
    /// How many expert-labeled anomalies were actually injected.
    pub injected: usize,
    pub base: MetricsReport,
    pub tuned: MetricsReport,
}

/// For each label fraction: trains a base model, injects that share of
/// expert-labeled target anomalies, fine-tunes a copy on the augmented
/// training set, and reports both test metrics.
#[allow(clippy::too_many_arguments)]
pub fn run_label_ablation(
    train_target: &[LogRecord],
    test_target: &[LogRecord],
    auxiliary: &[LogRecord],
    labeled_anomalies: &[LogRecord],
    fractions: &[f64],
    m: usize,
    fine_tune_epochs: usize,
    cfg: &TrainConfig,
) -> Result<Vec<LabelAblationRow>> {
    if fractions.is_empty() {
        return Err(Error::EmptyInput("label ablation needs at least one fraction".into()));
    }
    let mut rows = Vec::with_capacity(fractions.len());
    for (i, &fraction) in fractions.iter().enumerate() {
        let mut cell = *cfg;
        cell.optim.seed = derive_seed_indexed(cfg.optim.seed, "label-ablation", &[i as u64]);
        let base_dataset =
            build_training_set(train_target, test_target, auxiliary, m, cell.optim.seed)?;
        let (base_model, _) = train(&base_dataset, &cell)?;
        let base = best_f1_metrics(&score_labeled(&base_model, &base_dataset.test)?)?;
        let injected_dataset =
            inject_expert_labels(base_dataset.clone(), labeled_anomalies, fraction)?;
        let injected = injected_dataset.train.len() - base_dataset.train.len();
        let tuned = if injected == 0 {
            base.clone()
        } else {
            let mut tuned_model = base_model.clone();
            fine_tune(&mut tuned_model, &injected_dataset.train, &cell, fine_tune_epochs)?;
            best_f1_metrics(&score_labeled(&tuned_model, &injected_dataset.test)?)?
        };
        rows.push(LabelAblationRow {
            fraction,
            injected,
            base,
            tuned,
        });
    }
    Ok(rows)
}

// ---------------------------------------------------------------------------
// PCA baselines
// ---------------------------------------------------------------------------

/// TF-IDF + PCA residual baseline: fits on the (tokenized) training records,
/// scores the labeled test records, and reports best-F1 metrics.
pub fn run_tfidf_pca_baseline(
    train: &[LogRecord],
    test: &[LogRecord],
    selection: ComponentSelection,
) -> Result<MetricsReport> {
    let token_lists: Vec<Vec<String>> = train.iter().map(|r| preprocess(&r.raw_text)).collect();
    let (tfidf, vectors) = tfidf_fit(&token_lists)?;
    let detector = pca_fit(&vectors, tfidf.dim(), selection)?;
    let mut scored = Vec::new();
    for rec in test {
        if rec.label == Label::Unknown {
            continue;
        }
        let vector = tfidf_transform(&tfidf, &preprocess(&rec.raw_text));
        scored.push((
            pca_residual_score(&detector, &vector)?,
            rec.label == Label::Anomaly,
        ));
    }
    best_f1_metrics(&scored)
}

/// Swap mode: the identical PCA residual detector, but over learned message
/// embeddings instead of TF-IDF vectors.
pub fn pca_with_embeddings(
    model: &TrainedModel,
    train: &[LogRecord],
    test: &[LogRecord],
    selection: ComponentSelection,
) -> Result<MetricsReport> {
    let dim = model.config.embed_dim;
    let mut vectors = Vec::with_capacity(train.len());
    for rec in train {
        vectors.push(dense_to_sparse(&embed_message(&rec.raw_text, model)?));
    }
    let detector = pca_fit(&vectors, dim, selection)?;
    let mut scored = Vec::new();
    for rec in test {
        if rec.label == Label::Unknown {
            continue;
        }
        let vector = dense_to_sparse(&embed_message(&rec.raw_text, model)?);
        scored.push((
            pca_residual_score(&detector, &vector)?,
            rec.label == Label::Anomaly,
        ));
    }
    best_f1_metrics(&scored)
}

// ---------------------------------------------------------------------------
// Embedding export
// ---------------------------------------------------------------------------

fn label_str(label: Label) -> &'static str {
    match label {
        Label::Normal => "normal",
        Label::Anomaly => "anomaly",
        Label::Unknown => "unknown",
    }
}

/// Writes one CSV row per record: message id, label, the d embedding
/// coordinates, and the anomaly score (which is exactly the squared norm of
/// the embedding columns).
pub fn export_embeddings(
    model: &TrainedModel,
    records: &[LogRecord],
    path: &Path,
) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::Io {
        path: path.to_path_buf(),
        source: e,
    })?;
    let mut out = BufWriter::new(file);
    write!(out, "message_id,label")?;
    for d in 0..model.config.embed_dim {
        write!(out, ",e{d}")?;
    }
    writeln!(out, ",score")?;
    for rec in records {
        let z = embed_message(&rec.raw_text, model)?;
        write!(out, "{},{}", rec.seq_index, label_str(rec.label))?;
        for v in &z {
            write!(out, ",{v}")?;
        }
        writeln!(out, ",{}", anomaly_score(&z))?;
    }
    out.flush()?;
    Ok(())
}
