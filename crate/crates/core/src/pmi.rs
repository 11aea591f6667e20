//! DeepWalk PMI matrices.
//!
//! Four routes to (approximations of) the window-`T` PMI matrix:
//!
//! | route | function | inner argument of the log |
//! |-------|----------|---------------------------|
//! | power sum | [`pmi_exact`] | `v_G D^{-1/2} (T⁻¹ Σₖ P̃ᵏ) D^{-1/2}` |
//! | spectral | [`pmi_closed_form`] | `J + T⁻¹ D̃^{-1/2} Σ_{j≥2} λⱼ(1-λⱼᵀ)/(1-λⱼ) wⱼwⱼᵀ D̃^{-1/2}` |
//! | limit | [`pmi_approx`] | `J + T⁻¹ M∞` |
//! | sampling | [`empirical_pmi`] | `#(w,c)·|D| / (#(w)·#(c))` from random walks |
//!
//! The limit `M∞ = lim T·M_T` has two constructions, [`pmi_limit`] through
//! the normalized Laplacian pseudoinverse and [`pmi_limit_rank3`] through the
//! unnormalized one; they agree to rounding.

use ndarray::{Array2, ArrayView2, Zip};
use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{validate_walkable, Graph};
use crate::linalg::{frobenius, matmul};
use crate::spectral::{
    normalized_laplacian_pinv, sym_transition, symmetrize, unnormalized_laplacian_pinv,
    DenseSymMatrix, SpectralCache,
};

/// Default ramp floor, `e^{-36}`, roughly the f64 machine epsilon.
pub fn default_epsilon() -> f64 {
    (-36.0f64).exp()
}

/// Entrywise floor applied before the logarithm.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Ramp {
    /// `max(1, x)`: the floor used by NetMF.
    One,
    /// `max(ε, x)`.
    Epsilon(f64),
}

impl Ramp {
    pub fn floor(self) -> f64 {
        match self {
            Ramp::One => 1.0,
            Ramp::Epsilon(eps) => eps,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Ramp::One => "R1",
            Ramp::Epsilon(_) => "Reps",
        }
    }
}

impl Default for Ramp {
    fn default() -> Self {
        Ramp::Epsilon(default_epsilon())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PmiConfig {
    /// Window size `T`.
    pub window: usize,
    /// Negative sampling ratio `b`.
    pub neg_ratio: f64,
    pub ramp: Ramp,
}

impl PmiConfig {
    pub fn new(window: usize) -> Self {
        Self { window, neg_ratio: 1.0, ramp: Ramp::default() }
    }

    pub fn with_ramp(mut self, ramp: Ramp) -> Self {
        self.ramp = ramp;
        self
    }

    pub fn with_neg_ratio(mut self, b: f64) -> Self {
        self.neg_ratio = b;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.window < 1 {
            return Err(Error::invalid("window T must be at least 1"));
        }
        if !(self.neg_ratio > 0.0 && self.neg_ratio.is_finite()) {
            return Err(Error::invalid(format!("negative ratio b={} must be > 0", self.neg_ratio)));
        }
        if let Ramp::Epsilon(eps) = self.ramp {
            if !(eps > 0.0 && eps < 1.0) {
                return Err(Error::invalid(format!("ramp floor ε={eps} must lie in (0, 1)")));
            }
        }
        Ok(())
    }

    fn require_unit_ratio(&self) -> Result<()> {
        if self.neg_ratio != 1.0 {
            return Err(Error::invalid(format!(
                "negative ratio b={} unsupported here; limit-based forms fix b=1",
                self.neg_ratio
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PmiKind {
    ExactPowerSum,
    ClosedForm,
    ApproxFromLimit,
    Empirical,
}

impl PmiKind {
    pub fn as_str(self) -> &'static str {
        match self {
            PmiKind::ExactPowerSum => "exact_power_sum",
            PmiKind::ClosedForm => "closed_form",
            PmiKind::ApproxFromLimit => "approx_from_limit",
            PmiKind::Empirical => "empirical",
        }
    }
}

/// A log-ramped PMI matrix together with the mask of floored entries.
#[derive(Debug, Clone, PartialEq)]
pub struct PmiMatrix {
    pub values: DenseSymMatrix,
    pub config: PmiConfig,
    pub kind: PmiKind,
    pub ramped: Array2<bool>,
}

impl PmiMatrix {
    pub fn n(&self) -> usize {
        self.values.n()
    }

    pub fn ramped_count(&self) -> usize {
        self.ramped.iter().filter(|&&r| r).count()
    }

    /// Largest `|a - b|` over entries ramped in neither matrix.
    pub fn max_abs_deviation_unramped(&self, other: &PmiMatrix) -> Result<f64> {
        same_dim(self.n(), other.n())?;
        let mut worst = 0.0f64;
        Zip::from(self.values.view())
            .and(other.values.view())
            .and(&self.ramped)
            .and(&other.ramped)
            .for_each(|a, b, &ra, &rb| {
                if !ra && !rb {
                    worst = worst.max((a - b).abs());
                }
            });
        Ok(worst)
    }
}

fn same_dim(a: usize, b: usize) -> Result<()> {
    if a != b {
        return Err(Error::DimensionMismatch { expected: a, actual: b });
    }
    Ok(())
}

/// Arguments within this fraction of `max|x|` above the floor count as
/// floored. The argument carries absolute rounding error of about
/// `n·u·max|x|`, so an exact zero or an exact 1 lands on either side of the
/// floor depending on the route that produced it.
pub const RAMP_TIE_TOL: f64 = 1e-11;

/// `log(max(floor, x)) - log b` entrywise, with the mask of floored entries.
fn log_ramp(arg: Array2<f64>, cfg: &PmiConfig, kind: PmiKind) -> PmiMatrix {
    let floor = cfg.ramp.floor();
    let shift = cfg.neg_ratio.ln();
    let scale = arg.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    let cut = floor + RAMP_TIE_TOL * scale;
    let ramped = arg.mapv(|x| x <= cut);
    let floored = floor.ln() - shift;
    let values = Zip::from(&arg).and(&ramped).map_collect(|&x, &r| if r { floored } else { x.ln() - shift });
    PmiMatrix { values: DenseSymMatrix::from_fn(values.nrows(), |i, j| values[[i, j]]), config: *cfg, kind, ramped }
}

/// `√(1/d̃ᵢ) = √(v_G/dᵢ)` for every node.
fn inv_sqrt_stationary(g: &Graph) -> Vec<f64> {
    let v = g.volume();
    g.degree().iter().map(|d| (v / d).sqrt()).collect()
}

/// Pre-log argument of the window-`T` PMI matrix by direct power summation
/// in the symmetric domain: `v_G D^{-1/2} (T⁻¹ Σ_{k=1}^T P̃ᵏ) D^{-1/2}`.
pub fn exact_argument(g: &Graph, window: usize) -> Result<Array2<f64>> {
    if window < 1 {
        return Err(Error::invalid("window T must be at least 1"));
    }
    let p = sym_transition(g)?;
    let mut power = p.as_array().clone();
    let mut acc = power.clone();
    for _ in 1..window {
        power = symmetrize(matmul(power.view(), p.view()));
        acc += &power;
    }
    let scale = inv_sqrt_stationary(g);
    let t = window as f64;
    let n = g.n();
    let arg = Array2::from_shape_fn((n, n), |(i, j)| acc[[i, j]] / t * scale[i] * scale[j]);
    Ok(symmetrize(arg))
}

/// Window-`T` PMI matrix computed from powers of the transition matrix.
/// This is the reference every other construction is checked against.
pub fn pmi_exact(g: &Graph, cfg: &PmiConfig) -> Result<PmiMatrix> {
    cfg.validate()?;
    let arg = exact_argument(g, cfg.window)?;
    Ok(log_ramp(arg, cfg, PmiKind::ExactPowerSum))
}

/// `Σ_{k=1}^T λᵏ`.
fn geometric_partial_sum(lambda: f64, window: usize) -> f64 {
    if (1.0 - lambda).abs() > 1e-3 {
        let t = i32::try_from(window).unwrap_or(i32::MAX);
        lambda * (1.0 - lambda.powi(t)) / (1.0 - lambda)
    } else {
        let mut term = 1.0;
        let mut sum = 0.0;
        for _ in 0..window {
            term *= lambda;
            sum += term;
        }
        sum
    }
}

/// Pre-log argument of the window-`T` PMI matrix from the spectrum of `P̃`.
pub fn closed_form_argument(s: &SpectralCache<'_>, window: usize) -> Result<Array2<f64>> {
    if window < 1 {
        return Err(Error::invalid("window T must be at least 1"));
    }
    let inner = s.spectral_sum(|l| geometric_partial_sum(l, window));
    let scale = inv_sqrt_stationary(s.graph());
    let t = window as f64;
    let n = s.n();
    let arg = Array2::from_shape_fn((n, n), |(i, j)| 1.0 + inner[[i, j]] * scale[i] * scale[j] / t);
    Ok(symmetrize(arg))
}

/// Window-`T` PMI matrix via the spectral expansion of `Pᵏ`. Requires `b = 1`.
pub fn pmi_closed_form(s: &SpectralCache<'_>, cfg: &PmiConfig) -> Result<PmiMatrix> {
    cfg.validate()?;
    cfg.require_unit_ratio()?;
    let arg = closed_form_argument(s, cfg.window)?;
    Ok(log_ramp(arg, cfg, PmiKind::ClosedForm))
}

/// The limiting matrix `M∞ = lim_{T→∞} T·M_T`.
#[derive(Debug, Clone, PartialEq)]
pub struct LimitMatrix {
    pub values: DenseSymMatrix,
}

impl LimitMatrix {
    pub fn n(&self) -> usize {
        self.values.n()
    }

    pub fn view(&self) -> ArrayView2<'_, f64> {
        self.values.view()
    }
}

/// `M∞ = J + D̃^{-1/2} (L̃⁺ - I) D̃^{-1/2}`.
pub fn pmi_limit(s: &SpectralCache<'_>) -> Result<LimitMatrix> {
    let lpinv = normalized_laplacian_pinv(s)?;
    let scale = inv_sqrt_stationary(s.graph());
    let lp = lpinv.view();
    let values = DenseSymMatrix::from_fn(s.n(), |i, j| {
        let delta = if i == j { 1.0 } else { 0.0 };
        1.0 + scale[i] * scale[j] * (lp[[i, j]] - delta)
    });
    Ok(LimitMatrix { values })
}

/// `M∞ = J + v_G ((I - 1d̃ᵀ) L⁺ (I - d̃1ᵀ) - D^{-1})`, built from the
/// unnormalized Laplacian pseudoinverse.
pub fn pmi_limit_rank3(g: &Graph) -> Result<LimitMatrix> {
    let lpinv = unnormalized_laplacian_pinv(g)?;
    Ok(LimitMatrix { values: limit_from_unnormalized_pinv(g, &lpinv) })
}

/// `(I - 1d̃ᵀ) L⁺ (I - d̃1ᵀ)` expanded as `L⁺ - 1uᵀ - u1ᵀ + (d̃ᵀu) J` with
/// `u = L⁺d̃`.
pub fn stationary_projected_pinv(g: &Graph, lpinv: &DenseSymMatrix) -> DenseSymMatrix {
    let d = g.stationary();
    let u = lpinv.as_array().dot(&d);
    let c = d.dot(&u);
    let lp = lpinv.view();
    DenseSymMatrix::from_fn(g.n(), |i, j| lp[[i, j]] - u[i] - u[j] + c)
}

fn limit_from_unnormalized_pinv(g: &Graph, lpinv: &DenseSymMatrix) -> DenseSymMatrix {
    let projected = stationary_projected_pinv(g, lpinv);
    let v = g.volume();
    let deg = g.degree();
    let p = projected.view();
    DenseSymMatrix::from_fn(g.n(), |i, j| {
        let diag = if i == j { 1.0 / deg[i] } else { 0.0 };
        1.0 + v * (p[[i, j]] - diag)
    })
}

/// InfiniteWalk's finite-`T` approximation `log(R(J + M∞/T))`. Requires `b = 1`.
pub fn pmi_approx(m: &LimitMatrix, cfg: &PmiConfig) -> Result<PmiMatrix> {
    cfg.validate()?;
    cfg.require_unit_ratio()?;
    let t = cfg.window as f64;
    let arg = m.values.as_array().mapv(|x| 1.0 + x / t);
    Ok(log_ramp(arg, cfg, PmiKind::ApproxFromLimit))
}

/// How far an approximate PMI matrix sits from the exact one.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorReport {
    pub relative_frobenius_error: f64,
    /// Entries ramped in exactly one of the two matrices, over `n²`.
    pub ramped_disagreement_fraction: f64,
    #[serde(rename = "T")]
    pub window: usize,
    pub ramp: String,
}

pub fn approx_error_report(exact: &PmiMatrix, approx: &PmiMatrix) -> Result<ErrorReport> {
    same_dim(exact.n(), approx.n())?;
    if exact.config.window != approx.config.window {
        return Err(Error::invalid(format!(
            "window mismatch: {} vs {}",
            exact.config.window, approx.config.window
        )));
    }
    if exact.config.ramp.label() != approx.config.ramp.label() {
        return Err(Error::invalid("both matrices must use the same ramp"));
    }
    let diff = exact.values.as_array() - approx.values.as_array();
    let num = frobenius(diff.view());
    let den = frobenius(exact.values.view());
    let relative_frobenius_error = if num == 0.0 { 0.0 } else { num / den };
    let disagree = Zip::from(&exact.ramped)
        .and(&approx.ramped)
        .fold(0usize, |acc, &a, &b| acc + usize::from(a != b));
    let n = exact.n();
    let cells = (n * n).max(1) as f64;
    Ok(ErrorReport {
        relative_frobenius_error,
        ramped_disagreement_fraction: disagree as f64 / cells,
        window: exact.config.window,
        ramp: exact.config.ramp.label().to_string(),
    })
}

/// Random-walk schedule for the sampling estimator.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WalkConfig {
    /// Walks started from every node (γ).
    pub walks_per_node: usize,
    /// Nodes per walk (L).
    pub walk_length: usize,
    /// Window size (T).
    pub window: usize,
    pub seed: u64,
}

impl WalkConfig {
    pub fn validate(&self) -> Result<()> {
        if self.walks_per_node < 1 {
            return Err(Error::invalid("walks per node must be at least 1"));
        }
        if self.window < 1 {
            return Err(Error::invalid("window T must be at least 1"));
        }
        if self.walk_length < self.window + 1 {
            return Err(Error::invalid(format!(
                "walk length {} must be at least T + 1 = {}",
                self.walk_length,
                self.window + 1
            )));
        }
        Ok(())
    }
}

/// RNG for walk number `walk` (global index `start * γ + k`). Each walk owns
/// a ChaCha stream, so results do not depend on thread scheduling.
fn walk_rng(seed: u64, walk: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(walk);
    rng
}

/// Symmetric co-occurrence counts from `γ` walks per node: for each walk
/// position `i` and offset `r ∈ [1, T]`, both `(xᵢ, x_{i+r})` and
/// `(x_{i+r}, xᵢ)` are counted.
pub fn cooccurrence_counts(g: &Graph, wcfg: &WalkConfig) -> Result<Array2<u64>> {
    wcfg.validate()?;
    validate_walkable(g)?;
    let n = g.n();
    let samplers: Vec<WeightedIndex<f64>> = (0..n)
        .map(|i| {
            WeightedIndex::new(g.neighbors(i).iter().map(|&(_, w)| w))
                .map_err(|e| Error::Numerical(format!("node {i}: {e}")))
        })
        .collect::<Result<_>>()?;
    let gamma = wcfg.walks_per_node;
    let len = wcfg.walk_length;
    let window = wcfg.window;

    let counts = (0..n * gamma)
        .into_par_iter()
        .fold(
            || (vec![0u64; n * n], Vec::with_capacity(len)),
            |(mut acc, mut walk): (Vec<u64>, Vec<usize>), idx| {
                let mut rng = walk_rng(wcfg.seed, idx as u64);
                walk.clear();
                let mut cur = idx / gamma;
                walk.push(cur);
                for _ in 1..len {
                    let nb = g.neighbors(cur);
                    cur = nb[samplers[cur].sample(&mut rng)].0;
                    walk.push(cur);
                }
                for i in 0..len {
                    for r in 1..=window.min(len - 1 - i) {
                        let (a, b) = (walk[i], walk[i + r]);
                        acc[a * n + b] += 1;
                        acc[b * n + a] += 1;
                    }
                }
                (acc, walk)
            },
        )
        .map(|(acc, _)| acc)
        .reduce(
            || vec![0u64; n * n],
            |mut a, b| {
                a.iter_mut().zip(b).for_each(|(x, y)| *x += y);
                a
            },
        );
    Ok(Array2::from_shape_vec((n, n), counts).expect("n*n buffer"))
}

/// PMI estimated from sampled walks, `log(#(w,c)·|D| / (#(w)·#(c)))` with
/// `b = 1`; never-observed pairs are floored at `log ε`.
pub fn empirical_pmi(g: &Graph, wcfg: &WalkConfig) -> Result<PmiMatrix> {
    let counts = cooccurrence_counts(g, wcfg)?;
    let n = g.n();
    let row: Vec<f64> = counts.rows().into_iter().map(|r| r.sum() as f64).collect();
    let total: f64 = row.iter().sum();
    let arg = Array2::from_shape_fn((n, n), |(i, j)| {
        let c = counts[[i, j]] as f64;
        if c == 0.0 {
            0.0
        } else {
            c * total / (row[i] * row[j])
        }
    });
    let cfg = PmiConfig::new(wcfg.window);
    Ok(log_ramp(symmetrize(arg), &cfg, PmiKind::Empirical))
}
