//! Transformer encoder over token sequences, written directly against flat
//! f64 buffers (no autodiff, no BLAS). The forward pass records every
//! intermediate needed by the trainer's hand-derived backward pass.
//!
//! A message enters as `[EMBEDDING] t1 t2 ...`; the model's output is the
//! readout of the `[EMBEDDING]` position after the final layer — a single
//! d-dimensional vector per message whose squared norm is the anomaly score.
//!
//! Attention is the only operation that mixes rows, so the forward pass
//! simply computes the `real_len` non-pad rows and ignores the padding tail;
//! that is numerically identical to masking pad keys with -inf and keeps the
//! guarantee that appending padding never changes the output.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::{vec_matmul, Matrix};
use crate::tokenizer::TokenSequence;

pub const LAYER_NORM_EPS: f64 = 1e-5;

pub type EmbeddingVector = Vec<f64>;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ModelConfig {
    /// Token embedding width d; also the width of every residual stream.
    pub embed_dim: usize,
    /// Attention heads per layer; must divide `embed_dim`.
    pub num_heads: usize,
    /// Stacked encoder layers.
    pub num_layers: usize,
    /// Fixed sequence length after padding/truncation, including the
    /// `[EMBEDDING]` prefix position.
    pub max_len: usize,
    /// Hidden width of the position-wise feed-forward block.
    pub ffn_width: usize,
    /// Dropout probability applied after attention and after the
    /// feed-forward block (training only).
    pub dropout_p: f64,
}

impl Default for ModelConfig {
    fn default() -> Self {
        ModelConfig {
            embed_dim: 16,
            num_heads: 2,
            num_layers: 2,
            max_len: 50,
            ffn_width: 16,
            dropout_p: 0.05,
        }
    }
}

impl ModelConfig {
    pub fn validate(&self) -> Result<()> {
        if self.embed_dim < 2 || self.embed_dim % 2 != 0 {
            return Err(Error::InvalidArgument(format!(
                "embed_dim must be even and at least 2, got {}",
                self.embed_dim
            )));
        }
        if self.num_heads == 0 || self.embed_dim % self.num_heads != 0 {
            return Err(Error::InvalidArgument(format!(
                "num_heads ({}) must be positive and divide embed_dim ({})",
                self.num_heads, self.embed_dim
            )));
        }
        if self.num_layers == 0 {
            return Err(Error::InvalidArgument("num_layers must be positive".into()));
        }
        if self.max_len == 0 {
            return Err(Error::InvalidArgument("max_len must be positive".into()));
        }
        if self.ffn_width == 0 {
            return Err(Error::InvalidArgument("ffn_width must be positive".into()));
        }
        if !(0.0..1.0).contains(&self.dropout_p) {
            return Err(Error::InvalidArgument(format!(
                "dropout_p must lie in [0, 1), got {}",
                self.dropout_p
            )));
        }
        Ok(())
    }

    pub fn head_width(&self) -> usize {
        self.embed_dim / self.num_heads
    }
}

/// Sinusoidal position code for 1-based `position`: element `e` of the
/// d-vector is `sin(position / 10000^(e/d))` for even `e` and
/// `cos(position / 10000^(e/d))` for odd `e`. Odd `d` is rejected because
/// the encoding is defined over sine/cosine element pairs.
pub fn positional_encoding(position: usize, dim: usize) -> Result<Vec<f64>> {
    if dim == 0 || dim % 2 != 0 {
        return Err(Error::InvalidArgument(format!(
            "positional encoding needs an even dimension, got {dim}"
        )));
    }
    if position == 0 {
        return Err(Error::InvalidArgument(
            "positions are 1-based; 0 is not a valid row position".into(),
        ));
    }
    let mut pe = Vec::with_capacity(dim);
    for e in 0..dim {
        let angle = position as f64 / 10000f64.powf(e as f64 / dim as f64);
        pe.push(if e % 2 == 0 { angle.sin() } else { angle.cos() });
    }
    Ok(pe)
}

#[derive(Debug, Clone, PartialEq)]
pub struct LayerNormParams {
    pub gain: Vec<f64>,
    pub bias: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LayerParams {
    /// Per-head projections, each embed_dim × head_width, no biases.
    pub query: Vec<Matrix>,
    pub key: Vec<Matrix>,
    pub value: Vec<Matrix>,
    /// Projection applied to the concatenated heads, embed_dim × embed_dim.
    pub attn_output: Matrix,
    pub norm_attn: LayerNormParams,
    pub ffn_w_in: Matrix,
    pub ffn_b_in: Vec<f64>,
    pub ffn_w_out: Matrix,
    pub ffn_b_out: Vec<f64>,
    pub norm_ffn: LayerNormParams,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ModelParams {
    /// vocab_size × embed_dim lookup table; includes the reserved rows.
    pub token_embedding: Matrix,
    pub layers: Vec<LayerParams>,
    /// Readout on the `[EMBEDDING]` row of the final layer output.
    pub readout_w: Matrix,
    pub readout_b: Vec<f64>,
}

impl ModelParams {
    fn shaped(cfg: &ModelConfig, vocab_size: usize, mut fill: impl FnMut() -> f64) -> Self {
        let d = cfg.embed_dim;
        let w = cfg.head_width();
        let mut layers = Vec::with_capacity(cfg.num_layers);
        let mat = |rows: usize, cols: usize, fill: &mut dyn FnMut() -> f64| {
            Matrix::from_fn(rows, cols, |_, _| fill())
        };
        let token_embedding = mat(vocab_size, d, &mut fill);
        for _ in 0..cfg.num_layers {
            layers.push(LayerParams {
                query: (0..cfg.num_heads).map(|_| mat(d, w, &mut fill)).collect(),
                key: (0..cfg.num_heads).map(|_| mat(d, w, &mut fill)).collect(),
                value: (0..cfg.num_heads).map(|_| mat(d, w, &mut fill)).collect(),
                attn_output: mat(d, d, &mut fill),
                norm_attn: LayerNormParams {
                    gain: vec![1.0; d],
                    bias: vec![0.0; d],
                },
                ffn_w_in: mat(d, cfg.ffn_width, &mut fill),
                ffn_b_in: vec![0.0; cfg.ffn_width],
                ffn_w_out: mat(cfg.ffn_width, d, &mut fill),
                ffn_b_out: vec![0.0; d],
                norm_ffn: LayerNormParams {
                    gain: vec![1.0; d],
                    bias: vec![0.0; d],
                },
            });
        }
        let readout_w = mat(d, d, &mut fill);
        ModelParams {
            token_embedding,
            layers,
            readout_w,
            readout_b: vec![0.0; d],
        }
    }

    /// Fresh parameters: weights from U(-1/sqrt(d), 1/sqrt(d)), linear biases
    /// zero, norm gains one.
    pub fn init(cfg: &ModelConfig, vocab_size: usize, seed: u64) -> Self {
        let bound = 1.0 / (cfg.embed_dim as f64).sqrt();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        Self::shaped(cfg, vocab_size, || rng.gen_range(-bound..bound))
    }

    /// Same shapes, every tensor zero — including norm gains. Used for
    /// gradient and optimizer-moment buffers, never as a live model.
    pub fn zeros_like(&self) -> Self {
        let mut z = self.clone();
        for t in z.tensors_mut() {
            t.fill(0.0);
        }
        z
    }

    pub fn vocab_size(&self) -> usize {
        self.token_embedding.rows
    }

    pub fn num_params(&self) -> usize {
        self.tensors().iter().map(|t| t.len()).sum()
    }

    /// All tensors in the canonical traversal order shared by [`tensors_mut`],
    /// [`tensor_specs`] and the bundle payload layout.
    pub fn tensors(&self) -> Vec<&[f64]> {
        let mut out: Vec<&[f64]> = vec![&self.token_embedding.data];
        for layer in &self.layers {
            for h in &layer.query {
                out.push(&h.data);
            }
            for h in &layer.key {
                out.push(&h.data);
            }
            for h in &layer.value {
                out.push(&h.data);
            }
            out.push(&layer.attn_output.data);
            out.push(&layer.norm_attn.gain);
            out.push(&layer.norm_attn.bias);
            out.push(&layer.ffn_w_in.data);
            out.push(&layer.ffn_b_in);
            out.push(&layer.ffn_w_out.data);
            out.push(&layer.ffn_b_out);
            out.push(&layer.norm_ffn.gain);
            out.push(&layer.norm_ffn.bias);
        }
        out.push(&self.readout_w.data);
        out.push(&self.readout_b);
        out
    }

    pub fn tensors_mut(&mut self) -> Vec<&mut [f64]> {
        let mut out: Vec<&mut [f64]> = vec![&mut self.token_embedding.data];
        for layer in &mut self.layers {
            for h in &mut layer.query {
                out.push(&mut h.data);
            }
            for h in &mut layer.key {
                out.push(&mut h.data);
            }
            for h in &mut layer.value {
                out.push(&mut h.data);
            }
            out.push(&mut layer.attn_output.data);
            out.push(&mut layer.norm_attn.gain);
            out.push(&mut layer.norm_attn.bias);
            out.push(&mut layer.ffn_w_in.data);
            out.push(&mut layer.ffn_b_in);
            out.push(&mut layer.ffn_w_out.data);
            out.push(&mut layer.ffn_b_out);
            out.push(&mut layer.norm_ffn.gain);
            out.push(&mut layer.norm_ffn.bias);
        }
        out.push(&mut self.readout_w.data);
        out.push(&mut self.readout_b);
        out
    }

    /// (name, rows, cols) for each tensor, aligned with [`tensors`]. Vectors
    /// report cols = 1.
    pub fn tensor_specs(&self) -> Vec<(String, usize, usize)> {
        let mut out = vec![(
            "token_embedding".to_string(),
            self.token_embedding.rows,
            self.token_embedding.cols,
        )];
        for (l, layer) in self.layers.iter().enumerate() {
            for (kind, heads) in [("query", &layer.query), ("key", &layer.key), ("value", &layer.value)] {
                for (h, m) in heads.iter().enumerate() {
                    out.push((format!("layer{l}.attention.head{h}.{kind}"), m.rows, m.cols));
                }
            }
            out.push((
                format!("layer{l}.attention.output"),
                layer.attn_output.rows,
                layer.attn_output.cols,
            ));
            out.push((format!("layer{l}.norm_attention.gain"), layer.norm_attn.gain.len(), 1));
            out.push((format!("layer{l}.norm_attention.bias"), layer.norm_attn.bias.len(), 1));
            out.push((format!("layer{l}.ffn.weight_in"), layer.ffn_w_in.rows, layer.ffn_w_in.cols));
            out.push((format!("layer{l}.ffn.bias_in"), layer.ffn_b_in.len(), 1));
            out.push((format!("layer{l}.ffn.weight_out"), layer.ffn_w_out.rows, layer.ffn_w_out.cols));
            out.push((format!("layer{l}.ffn.bias_out"), layer.ffn_b_out.len(), 1));
            out.push((format!("layer{l}.norm_ffn.gain"), layer.norm_ffn.gain.len(), 1));
            out.push((format!("layer{l}.norm_ffn.bias"), layer.norm_ffn.bias.len(), 1));
        }
        out.push(("readout.weight".to_string(), self.readout_w.rows, self.readout_w.cols));
        out.push(("readout.bias".to_string(), self.readout_b.len(), 1));
        out
    }

    /// Little-endian f64 payload in canonical tensor order; the byte-exact
    /// representation used for bundle files and checksums.
    pub fn payload_bytes(&self) -> Vec<u8> {
        let mut bytes = Vec::with_capacity(self.num_params() * 8);
        for t in self.tensors() {
            for v in t {
                bytes.extend_from_slice(&v.to_le_bytes());
            }
        }
        bytes
    }

    /// Rebuilds parameters from a payload produced by [`payload_bytes`].
    pub fn from_payload(cfg: &ModelConfig, vocab_size: usize, payload: &[u8]) -> Result<Self> {
        let mut params = Self::shaped(cfg, vocab_size, || 0.0);
        let expected = params.num_params() * 8;
        if payload.len() != expected {
            return Err(Error::Bundle(format!(
                "payload holds {} bytes but the declared shapes need {expected}",
                payload.len()
            )));
        }
        let mut off = 0;
        for t in params.tensors_mut() {
            for v in t.iter_mut() {
                *v = f64::from_le_bytes(payload[off..off + 8].try_into().unwrap());
                off += 8;
            }
        }
        Ok(params)
    }
}

/// input (rows × d) times projection (d × w).
fn project(input: &Matrix, w: &Matrix) -> Matrix {
    input.matmul(w)
}

/// Scaled dot-product attention. For each *valid* query row i, softmax over
/// the valid key positions of `q_i . k_j / sqrt(width)`, then the weighted
/// sum of value rows. Invalid (pad) query rows come out all-zero and invalid
/// keys get exactly zero weight — equivalent to adding -inf to their scores.
fn attend(q: &Matrix, k: &Matrix, v: &Matrix, mask: &[bool]) -> (Matrix, Matrix) {
    let n = q.rows;
    let width = q.cols;
    let scale = 1.0 / (width as f64).sqrt();
    let mut probs = Matrix::zeros(n, n);
    let mut out = Matrix::zeros(n, v.cols);
    let mut scores = vec![0.0; n];
    for i in 0..n {
        if !mask[i] {
            continue;
        }
        let qi = q.row(i);
        let mut max_score = f64::NEG_INFINITY;
        for j in 0..n {
            if !mask[j] {
                continue;
            }
            let kj = k.row(j);
            let mut s = 0.0;
            for (a, b) in qi.iter().zip(kj) {
                s += a * b;
            }
            s *= scale;
            scores[j] = s;
            if s > max_score {
                max_score = s;
            }
        }
        let mut total = 0.0;
        for j in 0..n {
            if mask[j] {
                let e = (scores[j] - max_score).exp();
                scores[j] = e;
                total += e;
            }
        }
        let probs_row = probs.row_mut(i);
        for j in 0..n {
            if mask[j] {
                probs_row[j] = scores[j] / total;
            }
        }
        let probs_row = probs.row(i).to_vec();
        let out_row = out.row_mut(i);
        for (j, &p) in probs_row.iter().enumerate() {
            if p == 0.0 {
                continue;
            }
            for (o, &vj) in out_row.iter_mut().zip(v.row(j)) {
                *o += p * vj;
            }
        }
    }
    (probs, out)
}

/// One attention head as a standalone operation: projects `input` with the
/// given query/key/value weights and applies masked scaled dot-product
/// attention. `mask[i]` marks real (non-pad) positions.
pub fn attention_head(
    input: &Matrix,
    w_query: &Matrix,
    w_key: &Matrix,
    w_value: &Matrix,
    mask: &[bool],
) -> Result<Matrix> {
    for (name, w) in [("query", w_query), ("key", w_key), ("value", w_value)] {
        if w.rows != input.cols {
            return Err(Error::ShapeMismatch(format!(
                "{name} projection has {} rows but input width is {}",
                w.rows, input.cols
            )));
        }
        if w.cols != w_query.cols {
            return Err(Error::ShapeMismatch(format!(
                "{name} projection width {} differs from query width {}",
                w.cols, w_query.cols
            )));
        }
    }
    if mask.len() != input.rows {
        return Err(Error::ShapeMismatch(format!(
            "mask length {} does not match {} input rows",
            mask.len(),
            input.rows
        )));
    }
    let q = project(input, w_query);
    let k = project(input, w_key);
    let v = project(input, w_value);
    let (_, out) = attend(&q, &k, &v, mask);
    Ok(out)
}

pub(crate) struct LayerNormCache {
    /// Normalized rows before gain/bias.
    pub normalized: Matrix,
    pub inv_std: Vec<f64>,
}

/// Row-wise layer norm with biased variance: each row is centered, divided
/// by sqrt(var + eps), then scaled and shifted per feature.
pub(crate) fn layer_norm_rows(input: &Matrix, p: &LayerNormParams) -> (Matrix, LayerNormCache) {
    let d = input.cols;
    let mut normalized = Matrix::zeros(input.rows, d);
    let mut out = Matrix::zeros(input.rows, d);
    let mut inv_std = Vec::with_capacity(input.rows);
    for r in 0..input.rows {
        let row = input.row(r);
        let mean = row.iter().sum::<f64>() / d as f64;
        let var = row.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / d as f64;
        let istd = 1.0 / (var + LAYER_NORM_EPS).sqrt();
        inv_std.push(istd);
        let nrow = normalized.row_mut(r);
        for (c, &x) in row.iter().enumerate() {
            nrow[c] = (x - mean) * istd;
        }
        let nrow = normalized.row(r);
        let orow = out.row_mut(r);
        for c in 0..d {
            orow[c] = nrow[c] * p.gain[c] + p.bias[c];
        }
    }
    (out, LayerNormCache { normalized, inv_std })
}

/// Standalone layer-norm of a single row (exposed for tests).
pub fn layer_norm(row: &[f64], gain: &[f64], bias: &[f64]) -> Vec<f64> {
    let p = LayerNormParams {
        gain: gain.to_vec(),
        bias: bias.to_vec(),
    };
    let m = Matrix {
        rows: 1,
        cols: row.len(),
        data: row.to_vec(),
    };
    layer_norm_rows(&m, &p).0.data
}

pub(crate) struct LayerForwardCache {
    /// Layer input X (the previous layer's output), real_len × d.
    pub input: Matrix,
    pub q: Vec<Matrix>,
    pub k: Vec<Matrix>,
    pub v: Vec<Matrix>,
    pub probs: Vec<Matrix>,
    /// Heads concatenated, before the output projection.
    pub concat: Matrix,
    /// Dropout scale factors (0 or 1/(1-p)); None when dropout is off.
    pub drop_attn: Option<Matrix>,
    pub norm_attn: LayerNormCache,
    /// Output of the first norm; input to the feed-forward block.
    pub after_attn: Matrix,
    pub ffn_pre: Matrix,
    pub ffn_act: Matrix,
    pub drop_ffn: Option<Matrix>,
    pub norm_ffn: LayerNormCache,
    pub output: Matrix,
}

pub(crate) struct ForwardCache {
    /// Token ids actually consumed (the non-pad prefix).
    pub ids: Vec<usize>,
    /// Embedded input after adding position codes, real_len × d.
    pub x_input: Matrix,
    pub layers: Vec<LayerForwardCache>,
    pub z: EmbeddingVector,
}

fn dropout_mask(rows: usize, cols: usize, p: f64, rng: &mut ChaCha8Rng) -> Matrix {
    let keep_scale = 1.0 / (1.0 - p);
    Matrix::from_fn(rows, cols, |_, _| {
        if rng.gen::<f64>() < p {
            0.0
        } else {
            keep_scale
        }
    })
}

fn apply_mask(m: &Matrix, mask: &Matrix) -> Matrix {
    let mut out = m.clone();
    for (o, s) in out.data.iter_mut().zip(&mask.data) {
        *o *= s;
    }
    out
}

fn check_finite(m: &[f64], location: &str) -> Result<()> {
    if m.iter().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(Error::NonFinite {
            location: location.to_string(),
        })
    }
}

/// Full forward pass. With `dropout_rng` set, inverted dropout runs after
/// the attention projection and after the feed-forward block, and the masks
/// are recorded in the cache so the backward pass replays them exactly.
pub(crate) fn forward_cached(
    seq: &TokenSequence,
    params: &ModelParams,
    cfg: &ModelConfig,
    mut dropout_rng: Option<&mut ChaCha8Rng>,
) -> Result<ForwardCache> {
    cfg.validate()?;
    if seq.real_len == 0 || seq.real_len > seq.ids.len() {
        return Err(Error::InvalidArgument(format!(
            "real_len {} out of range for a sequence of {} ids",
            seq.real_len,
            seq.ids.len()
        )));
    }
    let d = cfg.embed_dim;
    if params.token_embedding.cols != d {
        return Err(Error::ShapeMismatch(format!(
            "token embedding width {} does not match embed_dim {d}",
            params.token_embedding.cols
        )));
    }
    let n = seq.real_len;
    let ids = seq.ids[..n].to_vec();
    let mut x = Matrix::zeros(n, d);
    for (r, &id) in ids.iter().enumerate() {
        if id >= params.vocab_size() {
            return Err(Error::TokenIdRange {
                id,
                vocab_size: params.vocab_size(),
            });
        }
        let emb = params.token_embedding.row(id);
        let pe = positional_encoding(r + 1, d)?;
        let row = x.row_mut(r);
        for c in 0..d {
            row[c] = emb[c] + pe[c];
        }
    }
    check_finite(&x.data, "embedded input")?;

    let all_valid = vec![true; n];
    let mut layers = Vec::with_capacity(cfg.num_layers);
    let mut current = x.clone();
    for (l, layer) in params.layers.iter().enumerate() {
        let mut q = Vec::with_capacity(cfg.num_heads);
        let mut k = Vec::with_capacity(cfg.num_heads);
        let mut v = Vec::with_capacity(cfg.num_heads);
        let mut probs = Vec::with_capacity(cfg.num_heads);
        let mut concat = Matrix::zeros(n, d);
        let width = cfg.head_width();
        for h in 0..cfg.num_heads {
            let qh = project(&current, &layer.query[h]);
            let kh = project(&current, &layer.key[h]);
            let vh = project(&current, &layer.value[h]);
            let (ph, oh) = attend(&qh, &kh, &vh, &all_valid);
            for r in 0..n {
                concat.row_mut(r)[h * width..(h + 1) * width].copy_from_slice(oh.row(r));
            }
            q.push(qh);
            k.push(kh);
            v.push(vh);
            probs.push(ph);
        }
        let projected = concat.matmul(&layer.attn_output);
        let drop_attn = match (&mut dropout_rng, cfg.dropout_p > 0.0) {
            (Some(rng), true) => Some(dropout_mask(n, d, cfg.dropout_p, rng)),
            _ => None,
        };
        let dropped = drop_attn
            .as_ref()
            .map_or_else(|| projected.clone(), |m| apply_mask(&projected, m));
        let mut residual = current.clone();
        for (o, &v_) in residual.data.iter_mut().zip(&dropped.data) {
            *o += v_;
        }
        let (after_attn, norm_attn) = layer_norm_rows(&residual, &layer.norm_attn);

        let mut ffn_pre = after_attn.matmul(&layer.ffn_w_in);
        for r in 0..n {
            let row = ffn_pre.row_mut(r);
            for (c, b) in layer.ffn_b_in.iter().enumerate() {
                row[c] += b;
            }
        }
        let mut ffn_act = ffn_pre.clone();
        for v_ in ffn_act.data.iter_mut() {
            if *v_ < 0.0 {
                *v_ = 0.0;
            }
        }
        let mut ffn_out = ffn_act.matmul(&layer.ffn_w_out);
        for r in 0..n {
            let row = ffn_out.row_mut(r);
            for (c, b) in layer.ffn_b_out.iter().enumerate() {
                row[c] += b;
            }
        }
        let drop_ffn = match (&mut dropout_rng, cfg.dropout_p > 0.0) {
            (Some(rng), true) => Some(dropout_mask(n, d, cfg.dropout_p, rng)),
            _ => None,
        };
        let dropped_ffn = drop_ffn
            .as_ref()
            .map_or_else(|| ffn_out.clone(), |m| apply_mask(&ffn_out, m));
        let mut residual2 = after_attn.clone();
        for (o, &v_) in residual2.data.iter_mut().zip(&dropped_ffn.data) {
            *o += v_;
        }
        let (output, norm_ffn) = layer_norm_rows(&residual2, &layer.norm_ffn);
        check_finite(&output.data, &format!("encoder layer {l} output"))?;

        let next = output.clone();
        layers.push(LayerForwardCache {
            input: current,
            q,
            k,
            v,
            probs,
            concat,
            drop_attn,
            norm_attn,
            after_attn,
            ffn_pre,
            ffn_act,
            drop_ffn,
            norm_ffn,
            output,
        });
        current = next;
    }

    let first_row = current.row(0);
    let mut z = vec![0.0; d];
    vec_matmul(first_row, &params.readout_w, &mut z);
    for (zc, b) in z.iter_mut().zip(&params.readout_b) {
        *zc += b;
    }
    check_finite(&z, "readout output")?;
    Ok(ForwardCache {
        ids,
        x_input: x,
        layers,
        z,
    })
}

/// Embeds one encoded message into the d-dimensional output space
/// (evaluation mode: dropout off). Pure: identical inputs and parameters
/// give bit-identical outputs, and appending padding never changes them.
pub fn forward(seq: &TokenSequence, params: &ModelParams, cfg: &ModelConfig) -> Result<EmbeddingVector> {
    forward_cached(seq, params, cfg, None).map(|c| c.z)
}
