//! Node embeddings from symmetric matrix factorization.

use std::cmp::Ordering;
use std::fmt;

use ndarray::{Array1, Array2, Axis};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{validate_walkable, Graph};
use crate::linalg::{canonicalize_signs, sym_eigen};
use crate::pmi::{pmi_approx, pmi_limit, PmiConfig, Ramp};
use crate::spectral::{spectral_cache, unnormalized_laplacian_pinv, DenseSymMatrix, SpectralCache};

pub const DEFAULT_DIM: usize = 128;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "method", rename_all = "snake_case")]
pub enum EmbedMethod {
    /// Factorize `log(R(J + M∞/T))`.
    InfiniteWalk { window: usize, ramp: Ramp },
    /// Factorize `[L⁺ ≥ c]` with `c` the `quantile` element of `L⁺`.
    BinarizedLaplacian { quantile: f64 },
    /// Factorize the adjacency matrix.
    Adjacency,
    /// Factorize `M∞` with no nonlinearity.
    LimitRaw,
}

impl fmt::Display for EmbedMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EmbedMethod::InfiniteWalk { window, ramp } => {
                write!(f, "infinitewalk(T={window},{})", ramp.label())
            }
            EmbedMethod::BinarizedLaplacian { quantile } => write!(f, "binlap(q={quantile})"),
            EmbedMethod::Adjacency => f.write_str("adjacency"),
            EmbedMethod::LimitRaw => f.write_str("limitraw"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EmbedConfig {
    pub dim: usize,
    pub method: EmbedMethod,
}

impl EmbedConfig {
    pub fn new(dim: usize, method: EmbedMethod) -> Self {
        Self { dim, method }
    }

    pub fn validate(&self, n: usize) -> Result<()> {
        if self.dim < 1 || self.dim > n {
            return Err(Error::invalid(format!("dimension d={} must lie in [1, {n}]", self.dim)));
        }
        match self.method {
            EmbedMethod::InfiniteWalk { window, ramp } => PmiConfig { window, neg_ratio: 1.0, ramp }.validate(),
            EmbedMethod::BinarizedLaplacian { quantile } => check_quantile(quantile),
            EmbedMethod::Adjacency | EmbedMethod::LimitRaw => Ok(()),
        }
    }
}

fn check_quantile(q: f64) -> Result<()> {
    if !(q > 0.0 && q < 1.0) {
        return Err(Error::invalid(format!("quantile q={q} must lie in (0, 1)")));
    }
    Ok(())
}

/// Rank-`d` symmetric factorization `m ≈ V diag(w) Vᵀ`, returned as
/// `V diag(√|w|)` with the signed `w` kept alongside.
#[derive(Debug, Clone, PartialEq)]
pub struct Factorization {
    pub vectors: Array2<f64>,
    pub eigenvalues: Array1<f64>,
}

impl Factorization {
    /// `V diag(w) Vᵀ`, using the recorded signs.
    pub fn reconstruct(&self) -> Array2<f64> {
        let mut signed = self.vectors.clone();
        for (mut col, &w) in signed.axis_iter_mut(Axis(1)).zip(self.eigenvalues.iter()) {
            let s = w.signum();
            col.mapv_inplace(|x| x * s);
        }
        signed.dot(&self.vectors.t())
    }
}

/// Keeps the `d` eigenpairs of largest `|λ|` (ties: larger `λ` first, then
/// solver order). Each kept eigenvector gets the largest-entry-positive sign
/// convention before scaling by `√|λ|`.
pub fn factorize(m: &DenseSymMatrix, d: usize) -> Result<Factorization> {
    let n = m.n();
    if d < 1 || d > n {
        return Err(Error::invalid(format!("dimension d={d} must lie in [1, {n}]")));
    }
    let (values, vectors) = sym_eigen(m.view())?;
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| {
        values[b]
            .abs()
            .total_cmp(&values[a].abs())
            .then_with(|| values[b].total_cmp(&values[a]))
            .then(a.cmp(&b))
    });
    order.truncate(d);
    let mut picked = vectors.select(Axis(1), &order);
    canonicalize_signs(&mut picked);
    let eigenvalues: Array1<f64> = order.iter().map(|&j| values[j]).collect();
    for (mut col, &w) in picked.axis_iter_mut(Axis(1)).zip(eigenvalues.iter()) {
        let s = w.abs().sqrt();
        col.mapv_inplace(|x| x * s);
    }
    if picked.iter().any(|x| !x.is_finite()) {
        return Err(Error::Numerical("embedding has non-finite entries".into()));
    }
    Ok(Factorization { vectors: picked, eigenvalues })
}

#[derive(Debug, Clone, PartialEq)]
pub struct Embedding {
    pub vectors: Array2<f64>,
    pub config: EmbedConfig,
    /// Signed eigenvalues behind each column.
    pub eigenvalues_used: Array1<f64>,
}

impl Embedding {
    pub fn n(&self) -> usize {
        self.vectors.nrows()
    }

    pub fn dim(&self) -> usize {
        self.vectors.ncols()
    }
}

/// `[lpinv ≥ c]` for the `quantile` element `c` of `lpinv`.
#[derive(Debug, Clone, PartialEq)]
pub struct BinaryMatrix {
    pub values: Array2<bool>,
    pub threshold: f64,
    pub quantile: f64,
}

impl BinaryMatrix {
    pub fn density(&self) -> f64 {
        let ones = self.values.iter().filter(|&&b| b).count();
        ones as f64 / self.values.len().max(1) as f64
    }

    pub fn to_real(&self) -> DenseSymMatrix {
        DenseSymMatrix::from_fn(self.values.nrows(), |i, j| if self.values[[i, j]] { 1.0 } else { 0.0 })
    }
}

/// 1-based nearest rank `⌈q·N⌉`, robust to `q·N` landing a hair above an
/// integer through rounding.
fn nearest_rank(q: f64, total: usize) -> usize {
    let x = q * total as f64;
    let r = x.round();
    let rank = if (x - r).abs() <= 1e-9 * total as f64 { r } else { x.ceil() };
    (rank as usize).clamp(1, total)
}

/// Entries within this relative distance below the threshold count as ties.
/// Entries that are equal in exact arithmetic come out of the
/// eigendecomposition a few ulps apart.
pub const BINARIZE_TIE_TOL: f64 = 1e-12;

/// Thresholds `lpinv` at its nearest-rank `q`-quantile over all `n²` entries.
pub fn binarize_lpinv(lpinv: &DenseSymMatrix, quantile: f64) -> Result<BinaryMatrix> {
    check_quantile(quantile)?;
    let n = lpinv.n();
    if n == 0 {
        return Err(Error::EmptyGraph);
    }
    let mut sorted: Vec<f64> = lpinv.view().iter().copied().collect();
    sorted.sort_by(f64::total_cmp);
    let threshold = sorted[nearest_rank(quantile, sorted.len()) - 1];
    let scale = sorted[0].abs().max(sorted[sorted.len() - 1].abs());
    let cut = threshold - BINARIZE_TIE_TOL * scale;
    let values = lpinv.view().mapv(|x| x >= cut);
    Ok(BinaryMatrix { values, threshold, quantile })
}

/// Runs the configured method end to end on `g`.
pub fn embed(g: &Graph, cfg: &EmbedConfig) -> Result<Embedding> {
    validate_walkable(g)?;
    cfg.validate(g.n())?;
    match cfg.method {
        EmbedMethod::InfiniteWalk { .. } | EmbedMethod::LimitRaw => {
            let cache = spectral_cache(g)?;
            embed_with_cache(&cache, cfg)
        }
        _ => {
            let matrix = embedding_matrix(g, None, cfg)?;
            finish(&matrix, cfg)
        }
    }
}

/// Same as [`embed`] but reuses an existing decomposition of `P̃`.
pub fn embed_with_cache(cache: &SpectralCache<'_>, cfg: &EmbedConfig) -> Result<Embedding> {
    let g = cache.graph();
    validate_walkable(g)?;
    cfg.validate(g.n())?;
    let matrix = embedding_matrix(g, Some(cache), cfg)?;
    finish(&matrix, cfg)
}

fn finish(matrix: &DenseSymMatrix, cfg: &EmbedConfig) -> Result<Embedding> {
    let f = factorize(matrix, cfg.dim)?;
    Ok(Embedding { vectors: f.vectors, config: *cfg, eigenvalues_used: f.eigenvalues })
}

/// The matrix each method factorizes.
pub fn embedding_matrix(
    g: &Graph,
    cache: Option<&SpectralCache<'_>>,
    cfg: &EmbedConfig,
) -> Result<DenseSymMatrix> {
    let limit = |cache: Option<&SpectralCache<'_>>| match cache {
        Some(c) => pmi_limit(c),
        None => pmi_limit(&spectral_cache(g)?),
    };
    match cfg.method {
        EmbedMethod::InfiniteWalk { window, ramp } => {
            let pmi = pmi_approx(&limit(cache)?, &PmiConfig { window, neg_ratio: 1.0, ramp })?;
            Ok(pmi.values)
        }
        EmbedMethod::LimitRaw => Ok(limit(cache)?.values),
        EmbedMethod::BinarizedLaplacian { quantile } => {
            let lpinv = unnormalized_laplacian_pinv(g)?;
            Ok(binarize_lpinv(&lpinv, quantile)?.to_real())
        }
        EmbedMethod::Adjacency => DenseSymMatrix::new(g.dense_adjacency()),
    }
}

/// Mean cosine similarity over row pairs, split by whether `groups` match.
/// Returns `(within, between)`; used to sanity-check block recovery.
pub fn mean_cosine_by_group(vectors: &Array2<f64>, groups: &[usize]) -> (f64, f64) {
    let norms: Vec<f64> = vectors.rows().into_iter().map(|r| r.dot(&r).sqrt()).collect();
    let (mut within, mut nw, mut between, mut nb) = (0.0, 0usize, 0.0, 0usize);
    let n = vectors.nrows();
    for i in 0..n {
        for j in (i + 1)..n {
            let denom = norms[i] * norms[j];
            let c = if denom > 0.0 { vectors.row(i).dot(&vectors.row(j)) / denom } else { 0.0 };
            match groups[i].cmp(&groups[j]) {
                Ordering::Equal => {
                    within += c;
                    nw += 1;
                }
                _ => {
                    between += c;
                    nb += 1;
                }
            }
        }
    }
    (within / nw.max(1) as f64, between / nb.max(1) as f64)
}
