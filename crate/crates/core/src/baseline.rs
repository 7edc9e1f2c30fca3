//! Classical baseline: TF-IDF document vectors reduced with PCA, scoring a
//! message by its squared reconstruction residual — how much of it lies
//! outside the principal subspace of the training data.
//!
//! The same PCA machinery also runs in swap mode over learned message
//! embeddings instead of TF-IDF vectors, isolating how much of the detection
//! quality comes from the representation.

use std::collections::HashMap;

use nalgebra::{DMatrix, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// (dimension index, value) pairs, strictly ascending by index.
pub type SparseVector = Vec<(usize, f64)>;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TfidfModel {
    terms: Vec<String>,
    #[serde(skip)]
    term_to_index: HashMap<String, usize>,
    idf: Vec<f64>,
    pub n_docs: usize,
}

impl TfidfModel {
    pub fn dim(&self) -> usize {
        self.terms.len()
    }

    fn rebuild_index(&mut self) {
        self.term_to_index = self
            .terms
            .iter()
            .enumerate()
            .map(|(i, t)| (t.clone(), i))
            .collect();
    }
}

/// Fits IDF statistics on tokenized training messages and returns their
/// vectors. Term indices follow first occurrence in the corpus;
/// `idf = ln((1 + D) / (1 + df)) + 1`, so a term present in every document
/// still contributes with weight exactly 1 before normalization.
pub fn tfidf_fit(messages: &[Vec<String>]) -> Result<(TfidfModel, Vec<SparseVector>)> {
    if messages.is_empty() {
        return Err(Error::EmptyInput("TF-IDF fit over an empty corpus".into()));
    }
    let mut terms: Vec<String> = Vec::new();
    let mut term_to_index: HashMap<String, usize> = HashMap::new();
    let mut df: Vec<usize> = Vec::new();
    for msg in messages {
        let mut seen_here: Vec<usize> = Vec::new();
        for tok in msg {
            let idx = *term_to_index.entry(tok.clone()).or_insert_with(|| {
                terms.push(tok.clone());
                df.push(0);
                terms.len() - 1
            });
            if !seen_here.contains(&idx) {
                seen_here.push(idx);
                df[idx] += 1;
            }
        }
    }
    let n_docs = messages.len();
    let idf: Vec<f64> = df
        .iter()
        .map(|&d| ((1.0 + n_docs as f64) / (1.0 + d as f64)).ln() + 1.0)
        .collect();
    let mut model = TfidfModel {
        terms,
        term_to_index: HashMap::new(),
        idf,
        n_docs,
    };
    model.rebuild_index();
    let vectors = messages
        .iter()
        .map(|m| tfidf_transform(&model, m))
        .collect();
    Ok((model, vectors))
}

/// Vectorizes one tokenized message with the fitted statistics. Terms the
/// fit never saw are ignored — test data cannot leak into the model. The
/// result is L2-normalized (an all-unseen message maps to the zero vector).
pub fn tfidf_transform(model: &TfidfModel, message: &[String]) -> SparseVector {
    let mut counts: HashMap<usize, f64> = HashMap::new();
    for tok in message {
        if let Some(&idx) = model.term_to_index.get(tok) {
            *counts.entry(idx).or_insert(0.0) += 1.0;
        }
    }
    let mut vec: SparseVector = counts
        .into_iter()
        .map(|(idx, tf)| (idx, tf * model.idf[idx]))
        .collect();
    vec.sort_unstable_by_key(|&(idx, _)| idx);
    let norm = vec.iter().map(|(_, v)| v * v).sum::<f64>().sqrt();
    if norm > 0.0 {
        for (_, v) in vec.iter_mut() {
            *v /= norm;
        }
    }
    vec
}

/// How many principal components to keep.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum ComponentSelection {
    /// Smallest k whose eigenvalues cover this fraction of total variance.
    VarianceFraction(f64),
    FixedCount(usize),
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PcaDetector {
    pub mean: Vec<f64>,
    /// Top-k orthonormal principal directions, one row per component.
    pub components: Vec<Vec<f64>>,
    /// All eigenvalues of the sample covariance, non-increasing.
    pub eigenvalues: Vec<f64>,
    pub dim: usize,
}

impl PcaDetector {
    pub fn k(&self) -> usize {
        self.components.len()
    }
}

fn densify(v: &SparseVector, dim: usize) -> Result<Vec<f64>> {
    let mut out = vec![0.0; dim];
    for &(idx, val) in v {
        if idx >= dim {
            return Err(Error::ShapeMismatch(format!(
                "vector index {idx} outside dimension {dim}"
            )));
        }
        out[idx] = val;
    }
    Ok(out)
}

pub fn dense_to_sparse(v: &[f64]) -> SparseVector {
    v.iter().copied().enumerate().collect()
}

/// In-place Gram-Schmidt over `(eigenvalue, vector)` pairs sorted by
/// descending eigenvalue. Zero-eigenvalue entries are skipped; a vector that
/// collapses under projection is numerically dependent on earlier ones and is
/// demoted to zero variance.
fn orthonormalize(pairs: &mut [(f64, Vec<f64>)]) {
    for i in 0..pairs.len() {
        if pairs[i].0 <= 0.0 {
            continue;
        }
        let (done, rest) = pairs.split_at_mut(i);
        let (lambda, v) = &mut rest[0];
        for (prev_lambda, prev) in done.iter() {
            if *prev_lambda <= 0.0 {
                continue;
            }
            let dot: f64 = prev.iter().zip(v.iter()).map(|(a, b)| a * b).sum();
            for (x, p) in v.iter_mut().zip(prev.iter()) {
                *x -= dot * p;
            }
        }
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm < 1e-6 {
            *lambda = 0.0;
            v.iter_mut().for_each(|x| *x = 0.0);
        } else {
            v.iter_mut().for_each(|x| *x /= norm);
        }
    }
}

/// Fits the PCA detector on training vectors: centers them, eigendecomposes
/// the sample covariance (through the Gram matrix when dimension exceeds the
/// sample count) and keeps the leading components. Zero-variance data yields
/// k = 0, where the score degenerates to squared distance from the mean.
pub fn pca_fit(
    vectors: &[SparseVector],
    dim: usize,
    selection: ComponentSelection,
) -> Result<PcaDetector> {
    let n = vectors.len();
    if n < 2 {
        return Err(Error::EmptyInput(format!(
            "PCA needs at least 2 vectors, got {n}"
        )));
    }
    if dim == 0 {
        return Err(Error::InvalidArgument("PCA over dimension 0".into()));
    }
    if let ComponentSelection::VarianceFraction(f) = selection {
        if !(f > 0.0 && f <= 1.0) {
            return Err(Error::InvalidArgument(format!(
                "variance fraction {f} must lie in (0, 1]"
            )));
        }
    }
    let mut mean = vec![0.0; dim];
    for v in vectors {
        for &(idx, val) in v {
            if idx >= dim {
                return Err(Error::ShapeMismatch(format!(
                    "vector index {idx} outside dimension {dim}"
                )));
            }
            mean[idx] += val;
        }
    }
    for m in mean.iter_mut() {
        *m /= n as f64;
    }
    // Centered data matrix, n × dim.
    let mut centered = DMatrix::<f64>::zeros(n, dim);
    for (r, v) in vectors.iter().enumerate() {
        let dense = densify(v, dim)?;
        for (c, (&x, &mu)) in dense.iter().zip(&mean).enumerate() {
            centered[(r, c)] = x - mu;
        }
    }
    let denom = (n - 1) as f64;
    // Eigenvalues this far below the largest one are numerical noise around
    // a rank-deficient covariance; their directions carry no information and
    // are treated as zero variance.
    const EIG_REL_TOL: f64 = 1e-12;
    let mut pairs: Vec<(f64, Vec<f64>)> = Vec::new();
    let gram_route = dim > n;
    if !gram_route {
        let cov = centered.transpose() * &centered / denom;
        let eig = SymmetricEigen::new(cov);
        let floor = eig.eigenvalues.iter().copied().fold(0.0, f64::max) * EIG_REL_TOL;
        for (i, &lambda) in eig.eigenvalues.iter().enumerate() {
            let col: Vec<f64> = eig.eigenvectors.column(i).iter().copied().collect();
            pairs.push((if lambda <= floor { 0.0 } else { lambda }, col));
        }
    } else {
        // Gram trick: eigenvectors u of X·X^T / (n-1) map to covariance
        // eigenvectors X^T·u / sqrt(lambda (n-1)) with the same eigenvalues.
        let gram = &centered * centered.transpose() / denom;
        let eig = SymmetricEigen::new(gram);
        let floor = eig.eigenvalues.iter().copied().fold(0.0, f64::max) * EIG_REL_TOL;
        for (i, &lambda) in eig.eigenvalues.iter().enumerate() {
            if lambda <= floor {
                pairs.push((0.0, vec![0.0; dim]));
                continue;
            }
            let u = eig.eigenvectors.column(i);
            let mut comp = vec![0.0; dim];
            for r in 0..n {
                let ur = u[r];
                if ur == 0.0 {
                    continue;
                }
                for c in 0..dim {
                    comp[c] += centered[(r, c)] * ur;
                }
            }
            let scale = 1.0 / (lambda * denom).sqrt();
            for v in comp.iter_mut() {
                *v *= scale;
            }
            pairs.push((lambda, comp));
        }
    }
    pairs.sort_by(|a, b| b.0.partial_cmp(&a.0).expect("finite eigenvalues"));
    if gram_route {
        // The mapped vectors drift from orthonormality near the noise floor;
        // a Gram-Schmidt pass (dominant directions first) restores it.
        orthonormalize(&mut pairs);
        pairs.sort_by(|a, b| b.0.partial_cmp(&a.0).expect("finite eigenvalues"));
    }
    let eigenvalues: Vec<f64> = pairs.iter().map(|(l, _)| *l).collect();
    let total: f64 = eigenvalues.iter().sum();
    let k = match selection {
        ComponentSelection::FixedCount(k) => k.min(pairs.len()),
        ComponentSelection::VarianceFraction(f) => {
            if total <= 0.0 {
                0
            } else {
                let target = f * total;
                let mut acc = 0.0;
                let mut k = 0;
                for (l, _) in &pairs {
                    if acc >= target {
                        break;
                    }
                    acc += l;
                    k += 1;
                }
                k
            }
        }
    };
    // Drop zero-variance directions even if the count asked for more.
    let components: Vec<Vec<f64>> = pairs
        .into_iter()
        .take(k)
        .filter(|(l, _)| *l > 0.0)
        .map(|(_, c)| c)
        .collect();
    Ok(PcaDetector {
        mean,
        components,
        eigenvalues,
        dim,
    })
}

/// Squared reconstruction residual: squared distance from the mean minus the
/// energy captured by the kept components. Non-negative up to rounding.
pub fn pca_residual_score(det: &PcaDetector, v: &SparseVector) -> Result<f64> {
    let dense = densify(v, det.dim)?;
    let dev: Vec<f64> = dense.iter().zip(&det.mean).map(|(x, m)| x - m).collect();
    let total: f64 = dev.iter().map(|x| x * x).sum();
    let mut captured = 0.0;
    for comp in &det.components {
        let proj: f64 = comp.iter().zip(&dev).map(|(c, d)| c * d).sum();
        captured += proj * proj;
    }
    Ok(total - captured)
}
