//! Turning embeddings into verdicts: anomaly scoring, threshold selection,
//! and the self-contained model bundle file.
//!
//! A bundle is a single file holding everything scoring needs — config,
//! vocabulary, parameters, optional decision threshold, and provenance
//! metadata — with a checksummed little-endian payload so a load is either
//! bit-exact or an error.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::encoder::{forward, EmbeddingVector, ModelConfig, ModelParams};
use crate::error::{Error, Result};
use crate::hashing::sha256_hex;
use crate::objective::anomaly_score;
use crate::tokenizer::{encode, preprocess, Vocabulary};
use crate::trainer::TrainedModel;

pub const BUNDLE_MAGIC: &[u8; 8] = b"LGSPHERE";
pub const BUNDLE_FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BundleMetadata {
    /// Seed the model was trained with.
    pub seed: u64,
    /// SHA-256 over the training pairs, for traceability.
    pub dataset_digest: String,
    /// Where the stored threshold came from (e.g. "validation-sweep"),
    /// if one is stored.
    pub threshold_source: Option<String>,
}

/// A trained model plus everything needed to reproduce its verdicts.
#[derive(Debug, Clone)]
pub struct ModelBundle {
    pub model: TrainedModel,
    pub threshold: Option<f64>,
    pub metadata: BundleMetadata,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AnomalyVerdict {
    pub score: f64,
    /// True iff score strictly exceeds the threshold.
    pub is_anomaly: bool,
    pub threshold: f64,
}

/// Embeds one raw message with a trained model (preprocess, encode, forward).
pub fn embed_message(raw_text: &str, model: &TrainedModel) -> Result<EmbeddingVector> {
    let tokens = preprocess(raw_text);
    let seq = encode(&tokens, &model.vocab, model.config.max_len)?;
    forward(&seq, &model.params, &model.config)
}

/// Anomaly score of one raw message: squared norm of its embedding.
pub fn message_score(raw_text: &str, model: &TrainedModel) -> Result<f64> {
    Ok(anomaly_score(&embed_message(raw_text, model)?))
}

/// Scores a message and compares against a threshold: the explicit argument
/// wins, otherwise the bundle's stored threshold, otherwise an error.
pub fn score_message(
    raw_text: &str,
    bundle: &ModelBundle,
    threshold: Option<f64>,
) -> Result<AnomalyVerdict> {
    let threshold = threshold.or(bundle.threshold).ok_or_else(|| {
        Error::InvalidArgument(
            "no decision threshold: none stored in the bundle and none supplied".into(),
        )
    })?;
    let score = message_score(raw_text, &bundle.model)?;
    Ok(AnomalyVerdict {
        score,
        is_anomaly: score > threshold,
        threshold,
    })
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SweepPoint {
    pub threshold: f64,
    pub f1: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ThresholdSweep {
    pub best_threshold: f64,
    pub best_f1: f64,
    /// F1 at every candidate threshold, ascending.
    pub points: Vec<SweepPoint>,
}

/// Finds the threshold maximizing F1 over labeled scores (`true` marks a
/// real anomaly). Candidates are one value below the minimum (everything
/// flagged), the midpoints between consecutive distinct scores, and the
/// maximum itself (nothing flagged, since the comparison is strict). Ties
/// resolve to the lowest threshold.
pub fn sweep_threshold(scored: &[(f64, bool)]) -> Result<ThresholdSweep> {
    let positives = scored.iter().filter(|(_, a)| *a).count();
    let negatives = scored.len() - positives;
    if positives == 0 || negatives == 0 {
        return Err(Error::SingleClass(format!(
            "{positives} anomalies and {negatives} normals in the sweep input"
        )));
    }
    if scored.iter().any(|(s, _)| !s.is_finite()) {
        return Err(Error::NonFinite {
            location: "threshold sweep scores".into(),
        });
    }
    let mut sorted: Vec<(f64, bool)> = scored.to_vec();
    sorted.sort_by(|a, b| a.0.partial_cmp(&b.0).expect("finite scores"));

    // Group equal scores so each candidate drops a whole group from the
    // predicted-positive side.
    let mut groups: Vec<(f64, usize, usize)> = Vec::new();
    for &(score, anomalous) in &sorted {
        match groups.last_mut() {
            Some((s, pos, neg)) if *s == score => {
                if anomalous {
                    *pos += 1;
                } else {
                    *neg += 1;
                }
            }
            _ => groups.push((score, usize::from(anomalous), usize::from(!anomalous))),
        }
    }

    let f1_of = |tp: usize, fp: usize, fn_: usize| -> f64 {
        if tp == 0 {
            0.0
        } else {
            2.0 * tp as f64 / (2.0 * tp as f64 + fp as f64 + fn_ as f64)
        }
    };

    let mut tp = positives;
    let mut fp = negatives;
    let mut points = Vec::with_capacity(groups.len() + 1);
    let mut best_threshold = groups[0].0 - 1.0;
    let mut best_f1 = f1_of(tp, fp, positives - tp);
    points.push(SweepPoint {
        threshold: best_threshold,
        f1: best_f1,
    });
    for (i, &(score, pos, neg)) in groups.iter().enumerate() {
        tp -= pos;
        fp -= neg;
        let threshold = if i + 1 < groups.len() {
            (score + groups[i + 1].0) / 2.0
        } else {
            score
        };
        let f1 = f1_of(tp, fp, positives - tp);
        points.push(SweepPoint { threshold, f1 });
        if f1 > best_f1 {
            best_f1 = f1;
            best_threshold = threshold;
        }
    }
    Ok(ThresholdSweep {
        best_threshold,
        best_f1,
        points,
    })
}

// ---------------------------------------------------------------------------
// Bundle file format
// ---------------------------------------------------------------------------

#[derive(Debug, Serialize, Deserialize)]
struct TensorEntry {
    name: String,
    rows: usize,
    cols: usize,
    /// Byte offset into the payload.
    offset: u64,
}

#[derive(Debug, Serialize, Deserialize)]
struct BundleHeader {
    format_version: u32,
    config: ModelConfig,
    vocab: Vocabulary,
    threshold: Option<f64>,
    metadata: BundleMetadata,
    tensors: Vec<TensorEntry>,
    payload_len: u64,
    payload_sha256: String,
}

/// Writes the bundle: magic, u64-LE header length, JSON header, raw
/// little-endian f64 tensor payload in the order declared by the header.
pub fn save_bundle(bundle: &ModelBundle, path: &Path) -> Result<()> {
    let payload = bundle.model.params.payload_bytes();
    let mut tensors = Vec::new();
    let mut offset = 0u64;
    for (name, rows, cols) in bundle.model.params.tensor_specs() {
        tensors.push(TensorEntry {
            name,
            rows,
            cols,
            offset,
        });
        offset += (rows * cols * 8) as u64;
    }
    let header = BundleHeader {
        format_version: BUNDLE_FORMAT_VERSION,
        config: bundle.model.config,
        vocab: bundle.model.vocab.clone(),
        threshold: bundle.threshold,
        metadata: bundle.metadata.clone(),
        tensors,
        payload_len: payload.len() as u64,
        payload_sha256: sha256_hex(&payload),
    };
    let header_json = serde_json::to_vec(&header)?;
    let mut bytes = Vec::with_capacity(8 + 8 + header_json.len() + payload.len());
    bytes.extend_from_slice(BUNDLE_MAGIC);
    bytes.extend_from_slice(&(header_json.len() as u64).to_le_bytes());
    bytes.extend_from_slice(&header_json);
    bytes.extend_from_slice(&payload);
    fs::write(path, bytes).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// Reads a bundle back, verifying magic, format version, declared tensor
/// shapes and the payload checksum. A corrupted or truncated file fails
/// loudly instead of producing a subtly different model.
pub fn load_bundle(path: &Path) -> Result<ModelBundle> {
    let bytes = fs::read(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    if bytes.len() < 16 || &bytes[..8] != BUNDLE_MAGIC {
        return Err(Error::Bundle(format!(
            "{} is not a model bundle (bad magic)",
            path.display()
        )));
    }
    let header_len = u64::from_le_bytes(bytes[8..16].try_into().unwrap()) as usize;
    let header_end = 16usize.checked_add(header_len).ok_or_else(|| {
        Error::Bundle("header length overflows".into())
    })?;
    if bytes.len() < header_end {
        return Err(Error::Bundle(
            "file truncated inside the header".into(),
        ));
    }
    let header: BundleHeader = serde_json::from_slice(&bytes[16..header_end])?;
    if header.format_version != BUNDLE_FORMAT_VERSION {
        return Err(Error::BundleVersion {
            found: header.format_version,
            supported: BUNDLE_FORMAT_VERSION,
        });
    }
    header.config.validate()?;
    let payload = &bytes[header_end..];
    if payload.len() as u64 != header.payload_len {
        return Err(Error::Bundle(format!(
            "payload is {} bytes but the header declares {}",
            payload.len(),
            header.payload_len
        )));
    }
    let actual = sha256_hex(payload);
    if actual != header.payload_sha256 {
        return Err(Error::ChecksumMismatch {
            expected: header.payload_sha256,
            actual,
        });
    }
    let params = ModelParams::from_payload(&header.config, header.vocab.len(), payload)?;
    // The tensor table is part of the contract: verify it matches the
    // shapes this build derives from the config.
    let specs = params.tensor_specs();
    if specs.len() != header.tensors.len() {
        return Err(Error::Bundle(format!(
            "header declares {} tensors, expected {}",
            header.tensors.len(),
            specs.len()
        )));
    }
    let mut offset = 0u64;
    for ((name, rows, cols), entry) in specs.into_iter().zip(&header.tensors) {
        if entry.name != name || entry.rows != rows || entry.cols != cols || entry.offset != offset {
            return Err(Error::Bundle(format!(
                "tensor table mismatch at {name}: header says {}({}x{}) at offset {}",
                entry.name, entry.rows, entry.cols, entry.offset
            )));
        }
        offset += (rows * cols * 8) as u64;
    }
    Ok(ModelBundle {
        model: TrainedModel {
            config: header.config,
            vocab: header.vocab,
            params,
        },
        threshold: header.threshold,
        metadata: header.metadata,
    })
}
