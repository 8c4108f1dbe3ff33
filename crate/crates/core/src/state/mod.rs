//! Density matrices over effective product-basis states.

pub mod symmetric;

use std::fmt;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::ser::SerializeStruct;
use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::graph::BiasedGraph;
use crate::product::ProductBasis;
use crate::spectral::{eigendecompose_hermitian, Spectrum};

pub use symmetric::{
    alternator, labels_by_twos, numerical_rank, permutation_operator, symmetrizer, Permutation,
    PermutationOperator, MAX_TENSOR_FACTORS,
};

const TOL: f64 = 1e-10;

/// Hermitian, positive semidefinite, unit-trace matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    matrix: DMatrix<Complex64>,
}

impl DensityMatrix {
    /// Validates trace, Hermiticity and positivity to within `1e-10`.
    pub fn new(matrix: DMatrix<Complex64>) -> Result<Self> {
        if !matrix.is_square() || matrix.nrows() == 0 {
            return Err(Error::InvalidDensity(format!("shape {}x{}", matrix.nrows(), matrix.ncols())));
        }
        let trace = matrix.trace();
        if (trace - Complex64::new(1.0, 0.0)).norm() > TOL {
            return Err(Error::InvalidDensity(format!("trace {trace} differs from 1")));
        }
        let skew = (&matrix - matrix.adjoint()).iter().map(|z| z.norm()).fold(0.0, f64::max);
        if skew > TOL {
            return Err(Error::InvalidDensity(format!("not Hermitian: max |rho - rho^dagger| = {skew:.3e}")));
        }
        let min = eigendecompose_hermitian(matrix.clone())?.eigenvalues().last().copied().unwrap_or(0.0);
        if min < -TOL {
            return Err(Error::InvalidDensity(format!("negative eigenvalue {min:.3e}")));
        }
        Ok(Self { matrix })
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.matrix
    }

    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.matrix[(i, j)]
    }

    /// `tr(rho^2)`.
    pub fn purity(&self) -> f64 {
        self.matrix.iter().map(|z| z.norm_sqr()).sum()
    }

    /// `<psi| rho |psi>` for a unit vector `psi`.
    pub fn expectation(&self, psi: &[Complex64]) -> f64 {
        let v = DVector::from_column_slice(psi);
        v.dotc(&(&self.matrix * &v)).re
    }

    /// Largest entrywise modulus of `self - other`.
    pub fn max_abs_diff(&self, other: &DensityMatrix) -> f64 {
        (&self.matrix - &other.matrix).iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Two-qubit concurrence; see [`concurrence`].
    pub fn concurrence(&self) -> Result<f64> {
        concurrence(self)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

impl Serialize for DensityMatrix {
    /// `{dim, entries}` with `entries` row-major `[re, im]` pairs.
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let rows: Vec<Vec<[f64; 2]>> = (0..self.dim())
            .map(|i| (0..self.dim()).map(|j| [self.matrix[(i, j)].re, self.matrix[(i, j)].im]).collect())
            .collect();
        let mut st = s.serialize_struct("DensityMatrix", 2)?;
        st.serialize_field("dim", &self.dim())?;
        st.serialize_field("entries", &rows)?;
        st.end()
    }
}

impl fmt::Display for DensityMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..self.dim() {
            let row: Vec<String> = (0..self.dim())
                .map(|j| {
                    let z = self.matrix[(i, j)];
                    let (re, im) = (clean(z.re), clean(z.im));
                    format!("{re:>8.4}{}{:.4}i", if im < 0.0 { '-' } else { '+' }, im.abs())
                })
                .collect();
            writeln!(f, "[ {} ]", row.join("  "))?;
        }
        Ok(())
    }
}

fn clean(x: f64) -> f64 {
    if x.abs() < 5e-13 { 0.0 } else { x }
}

/// `rho = c c^dagger` for a unit coefficient vector.
pub fn density_from_state(c: &[Complex64]) -> Result<DensityMatrix> {
    let v = DVector::from_column_slice(c);
    let norm = v.norm();
    if (norm - 1.0).abs() > 1e-8 {
        return Err(Error::InvalidDensity(format!("state has norm {norm}, expected 1")));
    }
    let v = v / Complex64::new(norm, 0.0);
    DensityMatrix::new(&v * v.adjoint())
}

/// `sum_i w_i rho_i` with `w_i >= 0` summing to one.
pub fn convex_sum(rhos: &[DensityMatrix], weights: &[f64]) -> Result<DensityMatrix> {
    if rhos.is_empty() || rhos.len() != weights.len() {
        return Err(Error::InvalidArgument(format!("{} matrices with {} weights", rhos.len(), weights.len())));
    }
    if weights.iter().any(|&w| !(w >= 0.0)) || (weights.iter().sum::<f64>() - 1.0).abs() > 1e-9 {
        return Err(Error::InvalidArgument("weights must be non-negative and sum to 1".into()));
    }
    let dim = rhos[0].dim();
    if rhos.iter().any(|r| r.dim() != dim) {
        return Err(Error::InvalidArgument("density matrices differ in dimension".into()));
    }
    let mut m = DMatrix::from_element(dim, dim, Complex64::default());
    for (r, &w) in rhos.iter().zip(weights) {
        m += &r.matrix * Complex64::new(w, 0.0);
    }
    DensityMatrix::new(m)
}

/// Equal-weight mixture.
pub fn uniform_mixture(rhos: &[DensityMatrix]) -> Result<DensityMatrix> {
    let w = vec![1.0 / rhos.len().max(1) as f64; rhos.len()];
    convex_sum(rhos, &w)
}

/// Wootters concurrence `max(0, s1 - s2 - s3 - s4)` of a 4x4 density matrix.
///
/// `s_i` are the decreasing square roots of the eigenvalues of
/// `rho (Y⊗Y) rho* (Y⊗Y)`, obtained here from the Hermitian matrix
/// `sqrt(rho) rho~ sqrt(rho)` which has the same spectrum.
pub fn concurrence(rho: &DensityMatrix) -> Result<f64> {
    if rho.dim() != 4 {
        return Err(Error::InvalidArgument(format!("concurrence needs a 4x4 matrix, got {}x{}", rho.dim(), rho.dim())));
    }
    let yy = DMatrix::from_row_slice(4, 4, &[
        0.0, 0.0, 0.0, -1.0,
        0.0, 0.0, 1.0, 0.0,
        0.0, 1.0, 0.0, 0.0,
        -1.0, 0.0, 0.0, 0.0,
    ])
    .map(|x| Complex64::new(x, 0.0));
    let tilde = &yy * rho.matrix.conjugate() * &yy;
    let eig = eigendecompose_hermitian(rho.matrix.clone())?;
    let sqrt_rho = matrix_function(&eig, |l| l.max(0.0).sqrt());
    let m = &sqrt_rho * tilde * &sqrt_rho;
    let m = (&m + m.adjoint()) * Complex64::new(0.5, 0.0);
    let s: Vec<f64> = eigendecompose_hermitian(m)?.eigenvalues().iter().map(|l| l.max(0.0).sqrt()).collect();
    Ok((s[0] - s[1] - s[2] - s[3]).clamp(0.0, 1.0))
}

fn matrix_function(eig: &Spectrum, f: impl Fn(f64) -> f64) -> DMatrix<Complex64> {
    let v = eig.eigenvectors();
    let d = DMatrix::from_diagonal(&DVector::from_iterator(eig.len(), eig.eigenvalues().iter().map(|&l| Complex64::new(f(l), 0.0))));
    v * d * v.adjoint()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum BellState {
    PhiPlus,
    PhiMinus,
    PsiPlus,
    PsiMinus,
}

impl BellState {
    /// Coefficients in the order `a1b1, a2b1, a1b2, a2b2`.
    pub fn coefficients(self) -> Vec<Complex64> {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let v = match self {
            Self::PhiPlus => [h, 0.0, 0.0, h],
            Self::PhiMinus => [h, 0.0, 0.0, -h],
            Self::PsiPlus => [0.0, h, h, 0.0],
            Self::PsiMinus => [0.0, -h, h, 0.0],
        };
        v.iter().map(|&x| Complex64::new(x, 0.0)).collect()
    }
}

/// `Phi+, Phi-, Psi+, Psi-` in the fixed product-basis order.
///
/// `Psi- = |a1 b2> - |a2 b1>`, so its `a2b1` entry carries the minus sign.
pub fn bell_states() -> [(BellState, Vec<Complex64>); 4] {
    [BellState::PhiPlus, BellState::PhiMinus, BellState::PsiPlus, BellState::PsiMinus].map(|b| (b, b.coefficients()))
}

/// Equal mixture of the renormalized effective states of a degenerate cluster.
///
/// The cluster is the highest one with at least two members among the
/// eigenvalues inside `[lo, hi]`.
pub fn degenerate_mixture(g: &BiasedGraph, spec: &Spectrum, window: (f64, f64)) -> Result<DensityMatrix> {
    let (lo, hi) = window;
    let cluster = spec
        .clusters()
        .into_iter()
        .map(|r| r.filter(|&i| (lo..=hi).contains(&spec.eigenvalue(i))).collect::<Vec<_>>())
        .find(|members| members.len() >= 2)
        .ok_or(Error::NoDegeneracy { lo, hi })?;
    let basis = ProductBasis::from_graph(g)?;
    let rhos = cluster
        .iter()
        .map(|&i| density_from_state(&basis.project(&spec.eigenvector(i))?.normalized()?))
        .collect::<Result<Vec<_>>>()?;
    uniform_mixture(&rhos)
}

/// `tr(ρ²)` of the equal mixture of unit vectors, via `(1/R²) Σ |<v_r, v_s>|²`.
pub fn ensemble_purity(vectors: &[DVector<Complex64>]) -> Result<f64> {
    let r = vectors.len();
    if r == 0 || vectors.iter().any(|v| v.len() != vectors[0].len() || (v.norm() - 1.0).abs() > 1e-8) {
        return Err(Error::InvalidArgument("ensemble purity needs equal-length unit vectors".into()));
    }
    let mut sum = 0.0;
    for (i, a) in vectors.iter().enumerate() {
        sum += a.norm_squared().powi(2);
        for b in &vectors[i + 1..] {
            sum += 2.0 * a.dotc(b).norm_sqr();
        }
    }
    Ok(sum / (r * r) as f64)
}

fn check_dims(a: &[Complex64], b: &[Complex64]) -> Result<()> {
    if a.len() != b.len() {
        return Err(Error::InvalidArgument(format!("dimension mismatch: {} vs {}", a.len(), b.len())));
    }
    Ok(())
}

fn inner(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

/// `<u ⊗ x, v ⊗ y> = <u, v> <x, y>`.
pub fn tensor_inner(u: &[Complex64], x: &[Complex64], v: &[Complex64], y: &[Complex64]) -> Result<Complex64> {
    check_dims(u, v)?;
    check_dims(x, y)?;
    Ok(inner(u, v) * inner(x, y))
}

/// `||u ⊗ x - v ⊗ y||` from the tensor inner product.
pub fn tensor_distance(u: &[Complex64], x: &[Complex64], v: &[Complex64], y: &[Complex64]) -> Result<f64> {
    let cross = tensor_inner(u, x, v, y)?.re;
    let a = inner(u, u).re * inner(x, x).re;
    let b = inner(v, v).re * inner(y, y).re;
    Ok((a + b - 2.0 * cross).max(0.0).sqrt())
}
