//! Eigendecomposition of the symmetrized transition matrix and the
//! Laplacian pseudoinverses derived from it.
//!
//! Everything spectral hangs off one full decomposition of
//! `P̃ = D^{-1/2} A D^{-1/2}`, held in a [`SpectralCache`]. Eigenvalues are
//! stored in descending order, so `λ₁ = 1` comes first and the Fiedler
//! eigenvalue second.

use std::io::Write;

use ndarray::{s, Array1, Array2, ArrayView1, ArrayView2, Axis};

use crate::error::{Error, Result};
use crate::graph::{validate_walkable, Graph};
use crate::linalg::{canonicalize_signs, matmul, max_abs, sym_eigen};

/// Dense square matrix that is symmetric up to rounding.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseSymMatrix {
    data: Array2<f64>,
}

impl DenseSymMatrix {
    /// Absolute asymmetry allowed on construction, scaled by the largest
    /// entry magnitude when that exceeds one.
    pub const SYMMETRY_TOL: f64 = 1e-9;

    /// Checks symmetry, then averages `a` with its transpose so the stored
    /// matrix is exactly symmetric.
    pub fn new(a: Array2<f64>) -> Result<Self> {
        let n = a.nrows();
        if a.ncols() != n {
            return Err(Error::DimensionMismatch { expected: n, actual: a.ncols() });
        }
        let scale = max_abs(a.view()).max(1.0);
        let mut worst = 0.0f64;
        for i in 0..n {
            for j in 0..i {
                worst = worst.max((a[[i, j]] - a[[j, i]]).abs());
            }
        }
        if worst > Self::SYMMETRY_TOL * scale || worst.is_nan() {
            return Err(Error::NotSymmetric(worst));
        }
        Ok(Self { data: symmetrize(a) })
    }

    pub fn from_fn(n: usize, f: impl Fn(usize, usize) -> f64) -> Self {
        let mut data = Array2::zeros((n, n));
        for i in 0..n {
            for j in 0..=i {
                let x = f(i, j);
                data[[i, j]] = x;
                data[[j, i]] = x;
            }
        }
        Self { data }
    }

    pub fn n(&self) -> usize {
        self.data.nrows()
    }

    pub fn view(&self) -> ArrayView2<'_, f64> {
        self.data.view()
    }

    pub fn as_array(&self) -> &Array2<f64> {
        &self.data
    }

    pub fn into_inner(self) -> Array2<f64> {
        self.data
    }
}

/// `(a + aᵀ) / 2`, exactly symmetric in floating point.
pub(crate) fn symmetrize(mut a: Array2<f64>) -> Array2<f64> {
    let n = a.nrows();
    for i in 0..n {
        for j in 0..i {
            let m = 0.5 * (a[[i, j]] + a[[j, i]]);
            a[[i, j]] = m;
            a[[j, i]] = m;
        }
    }
    a
}

/// `D^{-1/2} A D^{-1/2}` for a walkable graph.
pub fn sym_transition(g: &Graph) -> Result<DenseSymMatrix> {
    validate_walkable(g)?;
    let inv_sqrt: Vec<f64> = g.degree().iter().map(|d| 1.0 / d.sqrt()).collect();
    let n = g.n();
    let mut p = Array2::zeros((n, n));
    for e in g.edges() {
        let x = e.weight * inv_sqrt[e.u] * inv_sqrt[e.v];
        p[[e.u, e.v]] = x;
        p[[e.v, e.u]] = x;
    }
    Ok(DenseSymMatrix { data: p })
}

/// Full eigendecomposition of `P̃` for one graph.
#[derive(Debug, Clone)]
pub struct SpectralCache<'g> {
    graph: &'g Graph,
    eigenvalues: Array1<f64>,
    eigenvectors: Array2<f64>,
}

impl<'g> SpectralCache<'g> {
    pub fn graph(&self) -> &'g Graph {
        self.graph
    }

    /// Descending, `λ₁ = 1` first.
    pub fn eigenvalues(&self) -> ArrayView1<'_, f64> {
        self.eigenvalues.view()
    }

    /// Column `j` is the unit eigenvector for `eigenvalues()[j]`.
    pub fn eigenvectors(&self) -> ArrayView2<'_, f64> {
        self.eigenvectors.view()
    }

    pub fn n(&self) -> usize {
        self.eigenvalues.len()
    }

    /// Largest `|λⱼ|` over `j ≥ 2`: the rate at which `P̃ᵏ` approaches its
    /// rank-one limit.
    pub fn second_largest_magnitude(&self) -> f64 {
        self.eigenvalues.iter().skip(1).fold(0.0f64, |m, x| m.max(x.abs()))
    }

    /// `Σ_{j≥2} f(λⱼ) wⱼwⱼᵀ`.
    pub fn spectral_sum(&self, f: impl Fn(f64) -> f64) -> Array2<f64> {
        let rest = self.eigenvectors.slice(s![.., 1..]);
        let mut scaled = rest.to_owned();
        for (mut col, &lambda) in scaled.axis_iter_mut(Axis(1)).zip(self.eigenvalues.iter().skip(1)) {
            let c = f(lambda);
            col.mapv_inplace(|x| x * c);
        }
        symmetrize(matmul(scaled.view(), rest.t()))
    }
}

/// Decomposes `m = sym_transition(g)`. Eigenvalues come out descending and
/// each eigenvector's largest-magnitude entry is made positive.
pub fn eigendecompose<'g>(m: &DenseSymMatrix, g: &'g Graph) -> Result<SpectralCache<'g>> {
    if m.n() != g.n() {
        return Err(Error::DimensionMismatch { expected: g.n(), actual: m.n() });
    }
    let (asc_values, asc_vectors) = sym_eigen(m.view())?;
    let n = m.n();
    let eigenvalues: Array1<f64> = asc_values.iter().rev().copied().collect();
    let mut eigenvectors = Array2::zeros((n, n));
    for j in 0..n {
        eigenvectors.column_mut(j).assign(&asc_vectors.column(n - 1 - j));
    }
    canonicalize_signs(&mut eigenvectors);

    if n > 0 {
        let top = eigenvalues[0];
        if (top - 1.0).abs() > 1e-8 {
            return Err(Error::Numerical(format!("leading eigenvalue {top} is not 1")));
        }
        if let Some(bad) = eigenvalues.iter().find(|x| x.abs() > 1.0 + 1e-8) {
            return Err(Error::Numerical(format!("eigenvalue {bad} outside [-1, 1]")));
        }
    }
    Ok(SpectralCache { graph: g, eigenvalues, eigenvectors })
}

/// Convenience: gate, build `P̃` and decompose it.
pub fn spectral_cache(g: &Graph) -> Result<SpectralCache<'_>> {
    let p = sym_transition(g)?;
    eigendecompose(&p, g)
}

/// Second-largest eigenvalue of `P̃`.
pub fn fiedler_value(s: &SpectralCache<'_>) -> Result<f64> {
    if s.n() < 2 {
        return Err(Error::invalid("Fiedler eigenvalue needs at least 2 nodes"));
    }
    Ok(s.eigenvalues[1])
}

/// Gap below which `1 - λⱼ` counts as a repeated unit eigenvalue.
const UNIT_EIGENVALUE_GAP: f64 = 1e-10;

/// `L̃⁺ = Σ_{j≥2} (1 - λⱼ)^{-1} wⱼwⱼᵀ`, the pseudoinverse of `I - P̃`.
pub fn normalized_laplacian_pinv(s: &SpectralCache<'_>) -> Result<DenseSymMatrix> {
    if let Some(lambda) = s.eigenvalues.iter().skip(1).find(|&&l| 1.0 - l <= UNIT_EIGENVALUE_GAP) {
        return Err(Error::Numerical(format!(
            "eigenvalue {lambda} at 1 beyond the first: graph is disconnected"
        )));
    }
    Ok(DenseSymMatrix { data: s.spectral_sum(|l| 1.0 / (1.0 - l)) })
}

/// Relative cutoff under which Laplacian eigenvalues count as zero.
pub const PINV_RELATIVE_TOL: f64 = 1e-9;

/// Moore–Penrose pseudoinverse of the unnormalized Laplacian `D - A`.
pub fn unnormalized_laplacian_pinv(g: &Graph) -> Result<DenseSymMatrix> {
    validate_walkable(g)?;
    let (values, vectors) = sym_eigen(g.laplacian().view())?;
    let top = values.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    let cutoff = PINV_RELATIVE_TOL * top;
    let keep: Vec<usize> = (0..values.len()).filter(|&j| values[j] > cutoff).collect();
    let kept = vectors.select(Axis(1), &keep);
    let mut scaled = kept.clone();
    for (mut col, &j) in scaled.axis_iter_mut(Axis(1)).zip(&keep) {
        let c = 1.0 / values[j];
        col.mapv_inplace(|x| x * c);
    }
    Ok(DenseSymMatrix { data: symmetrize(matmul(scaled.view(), kept.t())) })
}

/// Writes `index,eigenvalue` rows, eigenvalues descending, index from 1.
pub fn write_spectrum_csv<W: Write>(s: &SpectralCache<'_>, mut out: W) -> std::io::Result<()> {
    writeln!(out, "index,eigenvalue")?;
    for (i, l) in s.eigenvalues.iter().enumerate() {
        writeln!(out, "{},{:.17e}", i + 1, l)?;
    }
    Ok(())
}
