//! Log anomaly detection with learned hyperspherical message embeddings.
//!
//! A small Transformer encoder maps each log message to a fixed-size vector.
//! Training pulls messages from the monitored (target) system toward the
//! origin of that space and pushes messages from unrelated auxiliary systems
//! away from it; the anomaly score of a message is simply the squared
//! distance of its embedding from the origin. Everything — tokenizer,
//! encoder, backpropagation, Adam, detection, baselines, evaluation — is
//! implemented here with plain `f64` math and deterministic seeding.
//!
//! Typical flow:
//!
//! ```no_run
//! use logsphere_core::{
//!     build_training_set, load_labeled_log, message_score, time_ordered_split, train,
//!     LabelFormat, Origin, TrainConfig,
//! };
//!
//! # fn main() -> logsphere_core::Result<()> {
//! let target = load_labeled_log("target.log".as_ref(), LabelFormat::Dash, Origin::Target)?;
//! let aux = load_labeled_log("aux.log".as_ref(), LabelFormat::Plain, Origin::Auxiliary)?;
//! let (train_window, test_window) = time_ordered_split(&target, 0.2)?;
//! let dataset = build_training_set(train_window, test_window, &aux, 1000, 7)?;
//! let (model, report) = train(&dataset, &TrainConfig::default())?;
//! println!("trained {} epochs", report.stopped_epoch);
//! let score = message_score("machine check interrupt", &model)?;
//! # let _ = score;
//! # Ok(())
//! # }
//! ```

pub mod baseline;
pub mod detector;
pub mod encoder;
pub mod error;
pub mod evalkit;
pub mod hashing;
pub mod ingest;
pub mod matrix;
pub mod objective;
pub mod seeding;
pub mod stopwords;
pub mod tokenizer;
pub mod trainer;

pub use baseline::{
    dense_to_sparse, pca_fit, pca_residual_score, tfidf_fit, tfidf_transform, ComponentSelection,
    PcaDetector, SparseVector, TfidfModel,
};
pub use detector::{
    embed_message, load_bundle, message_score, save_bundle, score_message, sweep_threshold,
    AnomalyVerdict, BundleMetadata, ModelBundle, ThresholdSweep,
};
pub use encoder::{
    attention_head, forward, positional_encoding, EmbeddingVector, ModelConfig, ModelParams,
};
pub use error::{Error, Result};
pub use evalkit::{
    best_f1_metrics, compute_metrics, export_embeddings, gen_synthetic, metrics_at_threshold,
    pca_with_embeddings, run_aux_ablation, run_label_ablation, run_split_grid,
    run_tfidf_pca_baseline, score_labeled, MetricsReport, SyntheticCorpus, SyntheticSpec,
};
pub use ingest::{
    build_training_set, dataset_digest, inject_expert_labels, load_labeled_log, parse_log_text,
    time_ordered_split, ClassLabel, Dataset, Label, LabelFormat, LogRecord, Origin, SplitSpec,
};
pub use objective::{
    anomaly_score, bce_reference_loss, hypersphere_loss, radial_score, sample_loss_and_grad,
    LossConfig,
};
pub use tokenizer::{
    build_vocab, encode, preprocess, TokenSequence, Vocabulary, EMBEDDING_ID, EMBEDDING_TOKEN,
    PAD_ID, PAD_TOKEN, UNK_ID, UNK_TOKEN,
};
pub use trainer::{
    adam_step, backward, fine_tune, train, AdamState, EpochStats, OptimConfig, TrainConfig,
    TrainReport, TrainedModel,
};
