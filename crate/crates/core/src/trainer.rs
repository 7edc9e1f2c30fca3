//! Optimization: exact reverse-mode gradients for the encoder, Adam with
//! decoupled weight decay, the epoch loop with early stopping, and the
//! fine-tuning entry point used by expert-label mode.
//!
//! The backward pass is derived by hand, mirror-image of the forward pass in
//! the encoder module, and is validated against central finite differences
//! in the test suite. Dropout masks recorded during the forward pass are
//! replayed exactly.

use std::time::Instant;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::encoder::{
    forward_cached, ForwardCache, LayerNormCache, LayerNormParams, ModelConfig, ModelParams,
};
use crate::error::{Error, Result};
use crate::hashing::sha256_hex;
use crate::ingest::{ClassLabel, Dataset, LogRecord};
use crate::matrix::Matrix;
use crate::objective::{sample_loss_and_grad, LossConfig};
use crate::seeding::{derive_seed, derive_seed_indexed};
use crate::tokenizer::{build_vocab, encode, preprocess, TokenSequence, Vocabulary};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct OptimConfig {
    pub learning_rate: f64,
    /// Decoupled weight decay: parameters shrink by `lr * weight_decay`
    /// before each Adam delta.
    pub weight_decay: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub adam_eps: f64,
    pub batch_size: usize,
    pub max_epochs: usize,
    /// Stop after this many consecutive epochs whose mean loss fails to
    /// improve on the best seen by at least `min_rel_improvement`.
    pub patience: usize,
    pub min_rel_improvement: f64,
    pub seed: u64,
    /// Gradient workers per batch. More than one keeps runs reproducible
    /// for a fixed thread count, though sums regroup relative to one thread.
    pub threads: usize,
}

impl Default for OptimConfig {
    fn default() -> Self {
        OptimConfig {
            learning_rate: 1e-4,
            weight_decay: 1e-3,
            beta1: 0.9,
            beta2: 0.999,
            adam_eps: 1e-8,
            batch_size: 256,
            max_epochs: 100,
            patience: 3,
            min_rel_improvement: 1e-4,
            seed: 7,
            threads: 1,
        }
    }
}

impl OptimConfig {
    pub fn validate(&self) -> Result<()> {
        if self.batch_size == 0 {
            return Err(Error::InvalidArgument("batch_size must be positive".into()));
        }
        if self.threads == 0 {
            return Err(Error::InvalidArgument("threads must be positive".into()));
        }
        if !(self.learning_rate > 0.0) {
            return Err(Error::InvalidArgument("learning_rate must be positive".into()));
        }
        for (name, b) in [("beta1", self.beta1), ("beta2", self.beta2)] {
            if !(0.0..1.0).contains(&b) {
                return Err(Error::InvalidArgument(format!("{name} must lie in [0, 1)")));
            }
        }
        if self.weight_decay < 0.0 || self.adam_eps <= 0.0 {
            return Err(Error::InvalidArgument(
                "weight_decay must be >= 0 and adam_eps > 0".into(),
            ));
        }
        Ok(())
    }
}

/// Everything train() needs besides the data.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TrainConfig {
    pub model: ModelConfig,
    pub optim: OptimConfig,
    pub loss: LossConfig,
    /// Tokens seen fewer times than this in training map to `[UNK]`.
    pub min_count: usize,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            model: ModelConfig::default(),
            optim: OptimConfig::default(),
            loss: LossConfig::default(),
            min_count: 1,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EpochStats {
    pub epoch: usize,
    pub loss: f64,
    pub wall_secs: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TrainReport {
    pub epochs: Vec<EpochStats>,
    /// Last epoch that actually ran (0 when no epochs ran).
    pub stopped_epoch: usize,
    /// SHA-256 of the final parameter payload; two runs match iff this does.
    pub params_checksum: String,
    /// Set when the training set had no y=1 samples: with nothing pushing
    /// embeddings away from the origin, scores collapse toward zero.
    pub collapse_warning: bool,
}

impl TrainReport {
    /// One JSON object per line, one line per epoch.
    pub fn to_jsonl(&self) -> String {
        let mut out = String::new();
        for e in &self.epochs {
            out.push_str(&serde_json::to_string(e).expect("epoch stats serialize"));
            out.push('\n');
        }
        out
    }
}

/// A trained encoder with everything needed to score new messages.
#[derive(Debug, Clone)]
pub struct TrainedModel {
    pub config: ModelConfig,
    pub vocab: Vocabulary,
    pub params: ModelParams,
}

// ---------------------------------------------------------------------------
// Backward pass
// ---------------------------------------------------------------------------

fn add_assign(into: &mut Matrix, other: &Matrix) {
    debug_assert_eq!(into.data.len(), other.data.len());
    for (a, b) in into.data.iter_mut().zip(&other.data) {
        *a += b;
    }
}

/// into += a^T · b, where a is n×p and b is n×q (into is p×q).
fn accumulate_t(a: &Matrix, b: &Matrix, into: &mut Matrix) {
    debug_assert_eq!(a.rows, b.rows);
    debug_assert_eq!(into.rows, a.cols);
    debug_assert_eq!(into.cols, b.cols);
    for r in 0..a.rows {
        let arow = a.row(r);
        let brow = b.row(r);
        for (p, &av) in arow.iter().enumerate() {
            if av == 0.0 {
                continue;
            }
            let dst = into.row_mut(p);
            for (d, &bv) in dst.iter_mut().zip(brow) {
                *d += av * bv;
            }
        }
    }
}

/// a · b^T, where a is n×q and b is m×q (result n×m).
fn mat_mul_t(a: &Matrix, b: &Matrix) -> Matrix {
    debug_assert_eq!(a.cols, b.cols);
    let mut out = Matrix::zeros(a.rows, b.rows);
    for r in 0..a.rows {
        let arow = a.row(r);
        let orow = out.row_mut(r);
        for m in 0..b.rows {
            let brow = b.row(m);
            let mut acc = 0.0;
            for (x, y) in arow.iter().zip(brow) {
                acc += x * y;
            }
            orow[m] = acc;
        }
    }
    out
}

/// Backward through row-wise layer norm. Returns the input gradient and
/// accumulates gain/bias gradients.
fn layer_norm_backward(
    d_out: &Matrix,
    cache: &LayerNormCache,
    params: &LayerNormParams,
    g_gain: &mut [f64],
    g_bias: &mut [f64],
) -> Matrix {
    let d = d_out.cols as f64;
    let mut d_in = Matrix::zeros(d_out.rows, d_out.cols);
    for r in 0..d_out.rows {
        let dy = d_out.row(r);
        let xhat = cache.normalized.row(r);
        let mut m1 = 0.0;
        let mut m2 = 0.0;
        for (c, &dyc) in dy.iter().enumerate() {
            g_gain[c] += dyc * xhat[c];
            g_bias[c] += dyc;
        }
        // dxhat = dy * gain; the remaining terms come from the mean and
        // variance of the row itself.
        let mut dxhat = vec![0.0; dy.len()];
        for (c, &dyc) in dy.iter().enumerate() {
            dxhat[c] = dyc * params.gain[c];
            m1 += dxhat[c];
            m2 += dxhat[c] * xhat[c];
        }
        m1 /= d;
        m2 /= d;
        let istd = cache.inv_std[r];
        let drow = d_in.row_mut(r);
        for c in 0..dy.len() {
            drow[c] = istd * (dxhat[c] - m1 - xhat[c] * m2);
        }
    }
    d_in
}

fn apply_dropout_grad(d: &Matrix, mask: &Option<Matrix>) -> Matrix {
    match mask {
        None => d.clone(),
        Some(m) => {
            let mut out = d.clone();
            for (o, s) in out.data.iter_mut().zip(&m.data) {
                *o *= s;
            }
            out
        }
    }
}

/// Accumulates the gradient of one sample's loss into `grads`, given the
/// recorded forward cache and dL/dz.
fn backward_sample(
    cache: &ForwardCache,
    params: &ModelParams,
    cfg: &ModelConfig,
    d_z: &[f64],
    grads: &mut ModelParams,
) {
    let d = cfg.embed_dim;
    let width = cfg.head_width();
    let n = cache.x_input.rows;
    let scale = 1.0 / (width as f64).sqrt();

    // Readout: z = out_last[0] · W + b.
    let last_out = &cache.layers.last().expect("at least one layer").output;
    let first_row = last_out.row(0);
    for (c, &dzc) in d_z.iter().enumerate() {
        grads.readout_b[c] += dzc;
    }
    for i in 0..d {
        let gw = grads.readout_w.row_mut(i);
        let xi = first_row[i];
        for (c, &dzc) in d_z.iter().enumerate() {
            gw[c] += xi * dzc;
        }
    }
    let mut d_out = Matrix::zeros(n, d);
    {
        let drow = d_out.row_mut(0);
        for i in 0..d {
            let wrow = params.readout_w.row(i);
            let mut acc = 0.0;
            for (c, &dzc) in d_z.iter().enumerate() {
                acc += dzc * wrow[c];
            }
            drow[i] = acc;
        }
    }

    for (l, lc) in cache.layers.iter().enumerate().rev() {
        let lp = &params.layers[l];
        let gl = &mut grads.layers[l];

        // Second norm (after the feed-forward residual).
        let d_add2 = layer_norm_backward(
            &d_out,
            &lc.norm_ffn,
            &lp.norm_ffn,
            &mut gl.norm_ffn.gain,
            &mut gl.norm_ffn.bias,
        );
        // Residual split: one branch into the FFN output (through dropout),
        // one directly into the FFN input.
        let d_ffn_out = apply_dropout_grad(&d_add2, &lc.drop_ffn);
        let mut d_after_attn = d_add2;

        for r in 0..n {
            for (c, &v) in d_ffn_out.row(r).iter().enumerate() {
                gl.ffn_b_out[c] += v;
            }
        }
        accumulate_t(&lc.ffn_act, &d_ffn_out, &mut gl.ffn_w_out);
        let d_act = mat_mul_t(&d_ffn_out, &lp.ffn_w_out);
        let mut d_pre = d_act;
        for (dp, &pre) in d_pre.data.iter_mut().zip(&lc.ffn_pre.data) {
            if pre <= 0.0 {
                *dp = 0.0;
            }
        }
        for r in 0..n {
            for (c, &v) in d_pre.row(r).iter().enumerate() {
                gl.ffn_b_in[c] += v;
            }
        }
        accumulate_t(&lc.after_attn, &d_pre, &mut gl.ffn_w_in);
        add_assign(&mut d_after_attn, &mat_mul_t(&d_pre, &lp.ffn_w_in));

        // First norm (after the attention residual).
        let d_add1 = layer_norm_backward(
            &d_after_attn,
            &lc.norm_attn,
            &lp.norm_attn,
            &mut gl.norm_attn.gain,
            &mut gl.norm_attn.bias,
        );
        let d_projected = apply_dropout_grad(&d_add1, &lc.drop_attn);
        let mut d_input = d_add1;

        accumulate_t(&lc.concat, &d_projected, &mut gl.attn_output);
        let d_concat = mat_mul_t(&d_projected, &lp.attn_output);

        for h in 0..cfg.num_heads {
            let mut d_head = Matrix::zeros(n, width);
            for r in 0..n {
                d_head
                    .row_mut(r)
                    .copy_from_slice(&d_concat.row(r)[h * width..(h + 1) * width]);
            }
            let probs = &lc.probs[h];
            // Value path.
            let mut d_v = Matrix::zeros(n, width);
            accumulate_t(probs, &d_head, &mut d_v);
            // Softmax backward: dS_ij = P_ij (dP_ij - sum_k dP_ik P_ik).
            let d_p = mat_mul_t(&d_head, &lc.v[h]);
            let mut d_scores = Matrix::zeros(n, n);
            for i in 0..n {
                let prow = probs.row(i);
                let dprow = d_p.row(i);
                let dot: f64 = prow.iter().zip(dprow).map(|(p, dp)| p * dp).sum();
                let srow = d_scores.row_mut(i);
                for j in 0..n {
                    srow[j] = prow[j] * (dprow[j] - dot);
                }
            }
            // Scores were q·k^T scaled by 1/sqrt(width).
            let mut d_q = d_scores.matmul(&lc.k[h]);
            for v in d_q.data.iter_mut() {
                *v *= scale;
            }
            let mut d_k = Matrix::zeros(n, width);
            accumulate_t(&d_scores, &lc.q[h], &mut d_k);
            for v in d_k.data.iter_mut() {
                *v *= scale;
            }
            accumulate_t(&lc.input, &d_q, &mut gl.query[h]);
            accumulate_t(&lc.input, &d_k, &mut gl.key[h]);
            accumulate_t(&lc.input, &d_v, &mut gl.value[h]);
            add_assign(&mut d_input, &mat_mul_t(&d_q, &lp.query[h]));
            add_assign(&mut d_input, &mat_mul_t(&d_k, &lp.key[h]));
            add_assign(&mut d_input, &mat_mul_t(&d_v, &lp.value[h]));
        }
        d_out = d_input;
    }

    // Token embeddings: position codes are constant, so the row gradient is
    // the input gradient itself.
    for (r, &id) in cache.ids.iter().enumerate() {
        let src = d_out.row(r);
        let dst = grads.token_embedding.row_mut(id);
        for (g, &v) in dst.iter_mut().zip(src) {
            *g += v;
        }
    }
}

/// Mean batch loss and its exact gradient, evaluation mode (no dropout).
pub fn backward(
    batch: &[(TokenSequence, ClassLabel)],
    params: &ModelParams,
    model: &ModelConfig,
    loss_cfg: &LossConfig,
) -> Result<(f64, ModelParams)> {
    if batch.is_empty() {
        return Err(Error::EmptyInput("gradient over an empty batch".into()));
    }
    let mut grads = params.zeros_like();
    let mut loss_sum = 0.0;
    let inv_b = 1.0 / batch.len() as f64;
    for (seq, y) in batch {
        let cache = forward_cached(seq, params, model, None)?;
        let (term, mut dz) = sample_loss_and_grad(&cache.z, *y, loss_cfg);
        loss_sum += term;
        for g in dz.iter_mut() {
            *g *= inv_b;
        }
        backward_sample(&cache, params, model, &dz, &mut grads);
    }
    let loss = loss_sum * inv_b;
    if !loss.is_finite() {
        return Err(Error::NonFinite {
            location: "batch loss".into(),
        });
    }
    Ok((loss, grads))
}

/// Training-mode batch gradient: per-sample dropout streams are seeded from
/// `sample_seeds` so the computation is reproducible regardless of how the
/// batch is chunked across threads.
fn backward_train_chunk(
    batch: &[(&TokenSequence, ClassLabel, u64)],
    params: &ModelParams,
    model: &ModelConfig,
    loss_cfg: &LossConfig,
    inv_b: f64,
) -> Result<(f64, ModelParams)> {
    let mut grads = params.zeros_like();
    let mut loss_sum = 0.0;
    for (seq, y, sample_seed) in batch {
        let mut rng = ChaCha8Rng::seed_from_u64(*sample_seed);
        let cache = forward_cached(seq, params, model, Some(&mut rng))?;
        let (term, mut dz) = sample_loss_and_grad(&cache.z, *y, loss_cfg);
        loss_sum += term;
        for g in dz.iter_mut() {
            *g *= inv_b;
        }
        backward_sample(&cache, params, model, &dz, &mut grads);
    }
    Ok((loss_sum, grads))
}

fn backward_train(
    batch: &[(&TokenSequence, ClassLabel, u64)],
    params: &ModelParams,
    model: &ModelConfig,
    loss_cfg: &LossConfig,
    threads: usize,
) -> Result<(f64, ModelParams)> {
    let inv_b = 1.0 / batch.len() as f64;
    if threads <= 1 || batch.len() < 2 * threads {
        let (loss_sum, grads) = backward_train_chunk(batch, params, model, loss_cfg, inv_b)?;
        return Ok((loss_sum * inv_b, grads));
    }
    let chunk_len = batch.len().div_ceil(threads);
    let results: Vec<Result<(f64, ModelParams)>> = std::thread::scope(|scope| {
        let handles: Vec<_> = batch
            .chunks(chunk_len)
            .map(|chunk| {
                scope.spawn(move || backward_train_chunk(chunk, params, model, loss_cfg, inv_b))
            })
            .collect();
        handles.into_iter().map(|h| h.join().expect("gradient worker")).collect()
    });
    // Combine in chunk order so the reduction is deterministic for a fixed
    // thread count.
    let mut total_loss = 0.0;
    let mut total: Option<ModelParams> = None;
    for res in results {
        let (loss_sum, grads) = res?;
        total_loss += loss_sum;
        match &mut total {
            None => total = Some(grads),
            Some(t) => {
                for (a, b) in t.tensors_mut().into_iter().zip(grads.tensors()) {
                    for (x, y) in a.iter_mut().zip(b) {
                        *x += y;
                    }
                }
            }
        }
    }
    Ok((total_loss * inv_b, total.expect("at least one chunk")))
}

// ---------------------------------------------------------------------------
// Adam
// ---------------------------------------------------------------------------

/// First/second moment buffers plus the step counter.
pub struct AdamState {
    m: ModelParams,
    v: ModelParams,
    step: u64,
}

impl AdamState {
    pub fn new(params: &ModelParams) -> Self {
        AdamState {
            m: params.zeros_like(),
            v: params.zeros_like(),
            step: 0,
        }
    }

    pub fn step_count(&self) -> u64 {
        self.step
    }
}

/// One Adam update with decoupled weight decay: parameters first shrink by
/// `lr * weight_decay`, then move by the bias-corrected moment ratio. With
/// zero gradients and zero decay this is exactly the identity.
pub fn adam_step(
    params: &mut ModelParams,
    grads: &ModelParams,
    state: &mut AdamState,
    cfg: &OptimConfig,
) {
    state.step += 1;
    let t = state.step as i32;
    let bc1 = 1.0 - cfg.beta1.powi(t);
    let bc2 = 1.0 - cfg.beta2.powi(t);
    let decay = 1.0 - cfg.learning_rate * cfg.weight_decay;
    let mut ps = params.tensors_mut();
    let gs = grads.tensors();
    let mut ms = state.m.tensors_mut();
    let mut vs = state.v.tensors_mut();
    for ti in 0..ps.len() {
        let p = &mut ps[ti];
        let g = gs[ti];
        let m = &mut ms[ti];
        let v = &mut vs[ti];
        for i in 0..p.len() {
            p[i] *= decay;
            m[i] = cfg.beta1 * m[i] + (1.0 - cfg.beta1) * g[i];
            v[i] = cfg.beta2 * v[i] + (1.0 - cfg.beta2) * g[i] * g[i];
            let m_hat = m[i] / bc1;
            let v_hat = v[i] / bc2;
            p[i] -= cfg.learning_rate * m_hat / (v_hat.sqrt() + cfg.adam_eps);
        }
    }
}

// ---------------------------------------------------------------------------
// Training loops
// ---------------------------------------------------------------------------

struct EncodedSet {
    sequences: Vec<TokenSequence>,
    labels: Vec<ClassLabel>,
}

fn encode_training_pairs(
    pairs: &[(LogRecord, ClassLabel)],
    vocab: &Vocabulary,
    max_len: usize,
) -> Result<EncodedSet> {
    let mut sequences = Vec::with_capacity(pairs.len());
    let mut labels = Vec::with_capacity(pairs.len());
    for (rec, y) in pairs {
        sequences.push(encode(&preprocess(&rec.raw_text), vocab, max_len)?);
        labels.push(*y);
    }
    Ok(EncodedSet { sequences, labels })
}

/// Shared epoch loop for train and fine-tune.
fn run_epochs(
    params: &mut ModelParams,
    set: &EncodedSet,
    cfg: &TrainConfig,
    max_epochs: usize,
    seed_tag: &str,
) -> Result<(Vec<EpochStats>, usize)> {
    let n = set.sequences.len();
    let mut adam = AdamState::new(params);
    let mut epochs = Vec::new();
    let mut best = f64::INFINITY;
    let mut stall = 0usize;
    let mut stopped = 0usize;
    for epoch in 1..=max_epochs {
        let started = Instant::now();
        let mut order: Vec<usize> = (0..n).collect();
        let mut shuffle_rng = ChaCha8Rng::seed_from_u64(derive_seed_indexed(
            cfg.optim.seed,
            &format!("{seed_tag}-shuffle"),
            &[epoch as u64],
        ));
        order.shuffle(&mut shuffle_rng);
        let mut loss_weighted = 0.0;
        for (step, chunk) in order.chunks(cfg.optim.batch_size).enumerate() {
            let batch: Vec<(&TokenSequence, ClassLabel, u64)> = chunk
                .iter()
                .enumerate()
                .map(|(i, &idx)| {
                    let sample_seed = derive_seed_indexed(
                        cfg.optim.seed,
                        &format!("{seed_tag}-dropout"),
                        &[epoch as u64, step as u64, i as u64],
                    );
                    (&set.sequences[idx], set.labels[idx], sample_seed)
                })
                .collect();
            let (loss, grads) =
                backward_train(&batch, params, &cfg.model, &cfg.loss, cfg.optim.threads)?;
            if !loss.is_finite() {
                return Err(Error::Divergence { epoch, step });
            }
            adam_step(params, &grads, &mut adam, &cfg.optim);
            loss_weighted += loss * chunk.len() as f64;
        }
        let epoch_loss = loss_weighted / n as f64;
        epochs.push(EpochStats {
            epoch,
            loss: epoch_loss,
            wall_secs: started.elapsed().as_secs_f64(),
        });
        stopped = epoch;
        // Early stopping on relative improvement against the best epoch.
        let improved = if best.is_finite() {
            (best - epoch_loss) / best.abs().max(1e-12) >= cfg.optim.min_rel_improvement
        } else {
            true
        };
        if epoch_loss < best {
            best = epoch_loss;
        }
        if improved {
            stall = 0;
        } else {
            stall += 1;
            if stall >= cfg.optim.patience {
                break;
            }
        }
    }
    Ok((epochs, stopped))
}

/// Trains a fresh model on the dataset: builds the vocabulary from the
/// training texts, initializes parameters from the run seed, and optimizes
/// until convergence or `max_epochs`. Fully deterministic for a fixed seed
/// and thread count.
pub fn train(dataset: &Dataset, cfg: &TrainConfig) -> Result<(TrainedModel, TrainReport)> {
    cfg.model.validate()?;
    cfg.optim.validate()?;
    if dataset.train.is_empty() {
        return Err(Error::EmptyInput("training set is empty".into()));
    }
    if cfg.optim.max_epochs == 0 {
        return Err(Error::InvalidArgument("max_epochs must be positive".into()));
    }
    let collapse_warning = !dataset.train.iter().any(|(_, y)| *y == 1);
    if collapse_warning {
        log::warn!(
            "training set has no y=1 samples: nothing anchors the outside of the \
             normal region, all scores will collapse toward zero"
        );
    }
    let token_lists: Vec<Vec<String>> = dataset
        .train
        .iter()
        .map(|(rec, _)| preprocess(&rec.raw_text))
        .collect();
    let vocab = build_vocab(&token_lists, cfg.min_count);
    let set = encode_training_pairs(&dataset.train, &vocab, cfg.model.max_len)?;
    let mut params = ModelParams::init(
        &cfg.model,
        vocab.len(),
        derive_seed(cfg.optim.seed, &["init"]),
    );
    let (epochs, stopped) = run_epochs(&mut params, &set, cfg, cfg.optim.max_epochs, "train")?;
    let report = TrainReport {
        epochs,
        stopped_epoch: stopped,
        params_checksum: sha256_hex(&params.payload_bytes()),
        collapse_warning,
    };
    Ok((
        TrainedModel {
            config: cfg.model,
            vocab,
            params,
        },
        report,
    ))
}

/// Continues optimization of an existing model on a small labeled set —
/// typically the train-window normals plus expert-labeled anomalies. The
/// vocabulary stays frozen (new tokens map to `[UNK]`) and the optimizer
/// state starts fresh. Zero epochs or an empty set leave the model unchanged.
pub fn fine_tune(
    model: &mut TrainedModel,
    labeled: &[(LogRecord, ClassLabel)],
    cfg: &TrainConfig,
    epochs: usize,
) -> Result<TrainReport> {
    let unchanged = || TrainReport {
        epochs: Vec::new(),
        stopped_epoch: 0,
        params_checksum: String::new(),
        collapse_warning: false,
    };
    if labeled.is_empty() {
        log::warn!("fine-tune called with no labeled records; model left unchanged");
        return Ok(unchanged());
    }
    if epochs == 0 {
        return Ok(unchanged());
    }
    let mut tune_cfg = *cfg;
    tune_cfg.model = model.config;
    let set = encode_training_pairs(labeled, &model.vocab, model.config.max_len)?;
    let (stats, stopped) = run_epochs(&mut model.params, &set, &tune_cfg, epochs, "finetune")?;
    Ok(TrainReport {
        epochs: stats,
        stopped_epoch: stopped,
        params_checksum: sha256_hex(&model.params.payload_bytes()),
        collapse_warning: false,
    })
}
