//! Log file ingestion, time-ordered splitting and training-set assembly.
//!
//! Training needs two corpora: the *target* system under observation (whose
//! normal behaviour the model has to internalize, class y=0) and one or more
//! unrelated *auxiliary* systems that supply easy-to-get samples of "other"
//! log content (class y=1).

use std::fs::File;
use std::io::{BufRead, BufReader, Read};
use std::path::Path;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hashing::sha256_hex;
use crate::seeding::derive_seed;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Origin {
    Target,
    Auxiliary,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Label {
    Normal,
    Anomaly,
    /// No usable ground truth (unlabeled input or malformed label field).
    Unknown,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogRecord {
    /// 1-based line number in the source file; empty lines are skipped but
    /// still counted, so indices stay traceable to the file.
    pub seq_index: u64,
    pub raw_text: String,
    pub origin: Origin,
    pub label: Label,
}

/// How ground-truth labels are encoded in an input file.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LabelFormat {
    /// First whitespace-delimited field is `-` for normal, anything else is
    /// an anomaly tag; the field is removed from the message text.
    Dash,
    /// `label,message` with label 0 (normal) or 1 (anomaly); split on the
    /// first comma. A malformed label yields `Unknown`.
    Csv,
    /// No labels; the whole line is the message.
    Plain,
}

impl FromStr for LabelFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "dash" => Ok(LabelFormat::Dash),
            "csv" => Ok(LabelFormat::Csv),
            "plain" => Ok(LabelFormat::Plain),
            other => Err(Error::InvalidArgument(format!(
                "unknown label format {other:?} (expected dash, csv or plain)"
            ))),
        }
    }
}

/// Splits one line into (label, message text) according to the format.
/// Returns `Label::Unknown` for malformed labels rather than failing, so a
/// few bad lines cannot kill a large ingest.
pub fn parse_line(line: &str, format: LabelFormat) -> (Label, String) {
    match format {
        LabelFormat::Plain => (Label::Unknown, line.to_string()),
        LabelFormat::Dash => {
            let mut parts = line.splitn(2, char::is_whitespace);
            match parts.next() {
                Some("-") => (Label::Normal, parts.next().unwrap_or("").to_string()),
                Some(_) => (Label::Anomaly, parts.next().unwrap_or("").to_string()),
                None => (Label::Unknown, String::new()),
            }
        }
        LabelFormat::Csv => match line.split_once(',') {
            Some(("0", msg)) => (Label::Normal, msg.to_string()),
            Some(("1", msg)) => (Label::Anomaly, msg.to_string()),
            Some((_, msg)) => (Label::Unknown, msg.to_string()),
            None => (Label::Unknown, line.to_string()),
        },
    }
}

/// Reads a log file line by line. Bytes that are not valid UTF-8 are decoded
/// lossily; empty lines are skipped. Malformed label fields are kept as
/// `Unknown` records and reported through the log facade.
pub fn load_labeled_log(path: &Path, format: LabelFormat, origin: Origin) -> Result<Vec<LogRecord>> {
    let file = File::open(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let mut reader = BufReader::new(file);
    let mut records = Vec::new();
    let mut malformed = 0usize;
    let mut line_no = 0u64;
    let mut buf = Vec::new();
    loop {
        buf.clear();
        let n = reader.read_until(b'\n', &mut buf).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })?;
        if n == 0 {
            break;
        }
        line_no += 1;
        let line = String::from_utf8_lossy(&buf);
        let line = line.trim_end_matches(['\n', '\r']);
        if line.is_empty() {
            continue;
        }
        let (label, raw_text) = parse_line(line, format);
        if label == Label::Unknown && format != LabelFormat::Plain {
            malformed += 1;
        }
        records.push(LogRecord {
            seq_index: line_no,
            raw_text,
            origin,
            label,
        });
    }
    if malformed > 0 {
        log::warn!(
            "{}: {malformed} line(s) had malformed labels, kept as unknown",
            path.display()
        );
    }
    Ok(records)
}

/// Convenience wrapper over [`load_labeled_log`] for in-memory content.
pub fn parse_log_text(text: &str, format: LabelFormat, origin: Origin) -> Vec<LogRecord> {
    let mut records = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        if line.is_empty() {
            continue;
        }
        let (label, raw_text) = parse_line(line, format);
        records.push(LogRecord {
            seq_index: idx as u64 + 1,
            raw_text,
            origin,
            label,
        });
    }
    records
}

fn read_to_string_lossy(path: &Path) -> Result<String> {
    let mut file = File::open(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let mut bytes = Vec::new();
    file.read_to_end(&mut bytes).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    Ok(String::from_utf8_lossy(&bytes).into_owned())
}

/// Reads a whole file as lossy UTF-8 (used for config files).
pub fn read_text_file(path: &Path) -> Result<String> {
    read_to_string_lossy(path)
}

/// Split parameters for building a dataset out of raw streams.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct SplitSpec {
    /// Fraction of the target stream (by time order) that becomes the train
    /// window; the remainder is the test window.
    pub train_fraction: f64,
    /// Number of auxiliary samples (`m`) mixed into training as class y=1.
    pub auxiliary_count: usize,
    pub seed: u64,
}

/// Deterministic leading-prefix split: the first `floor(n * train_fraction)`
/// records train, the rest test. No shuffling — later records must never
/// leak into training, mirroring deployment where only the past is known.
pub fn time_ordered_split(
    records: &[LogRecord],
    train_fraction: f64,
) -> Result<(&[LogRecord], &[LogRecord])> {
    if records.is_empty() {
        return Err(Error::EmptyInput("cannot split an empty record list".into()));
    }
    if !(train_fraction > 0.0 && train_fraction < 1.0) {
        return Err(Error::InvalidSplit {
            fraction: train_fraction,
            reason: "must lie strictly between 0 and 1".into(),
        });
    }
    if records.windows(2).any(|w| w[0].seq_index > w[1].seq_index) {
        return Err(Error::InvalidArgument(
            "records must be ordered by seq_index before splitting".into(),
        ));
    }
    let cut = (records.len() as f64 * train_fraction).floor() as usize;
    if cut == 0 {
        return Err(Error::InvalidSplit {
            fraction: train_fraction,
            reason: format!("train side would be empty for {} records", records.len()),
        });
    }
    if cut == records.len() {
        return Err(Error::InvalidSplit {
            fraction: train_fraction,
            reason: format!("test side would be empty for {} records", records.len()),
        });
    }
    Ok(records.split_at(cut))
}

/// Anomaly class assignment for a training pair: 0 = target/normal side of
/// the objective, 1 = auxiliary (or expert-labeled anomaly).
pub type ClassLabel = u8;

#[derive(Debug, Clone)]
pub struct Dataset {
    pub train: Vec<(LogRecord, ClassLabel)>,
    pub test: Vec<LogRecord>,
}

/// Assembles the training mixture: the target train window as y=0 (records
/// labeled `Anomaly` are dropped — the method assumes the observed stream is
/// mostly normal and unlabeled records count as normal), plus `m` auxiliary
/// records sampled uniformly without replacement as y=1. The final order is
/// a seeded shuffle; the same seed reproduces the dataset exactly.
pub fn build_training_set(
    train_target: &[LogRecord],
    test_target: &[LogRecord],
    auxiliary: &[LogRecord],
    m: usize,
    seed: u64,
) -> Result<Dataset> {
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, &["dataset"]));
    let pool: Vec<&LogRecord> = auxiliary
        .iter()
        .filter(|r| r.label != Label::Anomaly)
        .collect();
    if m > pool.len() {
        return Err(Error::AuxiliaryPoolExceeded {
            requested: m,
            available: pool.len(),
        });
    }
    let picked = rand::seq::index::sample(&mut rng, pool.len(), m);
    let mut train: Vec<(LogRecord, ClassLabel)> = train_target
        .iter()
        .filter(|r| r.label != Label::Anomaly)
        .map(|r| (r.clone(), 0))
        .collect();
    for idx in picked.iter() {
        let mut rec = pool[idx].clone();
        rec.origin = Origin::Auxiliary;
        train.push((rec, 1));
    }
    if train.is_empty() {
        return Err(Error::EmptyInput("training set came out empty".into()));
    }
    train.shuffle(&mut rng);
    Ok(Dataset {
        train,
        test: test_target.to_vec(),
    })
}

/// Stable digest of the exact training mixture — recorded alongside saved
/// models so a bundle can be traced back to the data that produced it.
pub fn dataset_digest(dataset: &Dataset) -> String {
    let mut bytes = Vec::new();
    for (rec, y) in &dataset.train {
        bytes.extend_from_slice(&rec.seq_index.to_le_bytes());
        bytes.push(match rec.origin {
            Origin::Target => 0,
            Origin::Auxiliary => 1,
        });
        bytes.push(*y);
        bytes.extend_from_slice(rec.raw_text.as_bytes());
        bytes.push(0xff);
    }
    sha256_hex(&bytes)
}

/// Expert-label mode: moves a fraction of *known* target anomalies into the
/// training mixture as y=1. `labeled` must be target-origin records labeled
/// `Anomaly` (typically the ones dropped from the train window). Selection
/// is the first `floor(fraction * n)` in seq order — deterministic, no
/// sampling — so repeated runs inject the identical records.
pub fn inject_expert_labels(
    mut dataset: Dataset,
    labeled: &[LogRecord],
    fraction: f64,
) -> Result<Dataset> {
    if !(0.0..=1.0).contains(&fraction) {
        return Err(Error::InvalidArgument(format!(
            "expert label fraction {fraction} must lie in [0, 1]"
        )));
    }
    for rec in labeled {
        if rec.origin != Origin::Target || rec.label != Label::Anomaly {
            return Err(Error::InvalidArgument(
                "expert labels must be target-origin anomaly records".into(),
            ));
        }
    }
    let mut ordered: Vec<&LogRecord> = labeled.iter().collect();
    ordered.sort_by_key(|r| r.seq_index);
    let take = (fraction * ordered.len() as f64).floor() as usize;
    for rec in &ordered[..take] {
        dataset.train.push(((*rec).clone(), 1));
    }
    Ok(dataset)
}
