//! Dense Hermitian eigendecomposition and spectral diagnostics.

use std::io::Write;
use std::ops::Range;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fmt::g12;
use crate::graph::{check_regular, BiasedGraph};
use crate::rng::derive_seed;

/// Eigenpairs sorted by descending eigenvalue.
///
/// Each eigenvector carries a fixed gauge: its largest-magnitude entry (first
/// one on ties) is real and positive.
#[derive(Debug, Clone)]
pub struct Spectrum {
    eigenvalues: Vec<f64>,
    eigenvectors: DMatrix<Complex64>,
}

impl Spectrum {
    pub fn len(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eigenvalues.is_empty()
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn eigenvalue(&self, i: usize) -> f64 {
        self.eigenvalues[i]
    }

    /// Unitary matrix whose columns are the eigenvectors.
    pub fn eigenvectors(&self) -> &DMatrix<Complex64> {
        &self.eigenvectors
    }

    pub fn eigenvector(&self, i: usize) -> DVector<Complex64> {
        self.eigenvectors.column(i).into_owned()
    }

    /// Eigenvalues closer than this are treated as degenerate.
    pub fn degeneracy_tolerance(&self) -> f64 {
        1e-6 * self.eigenvalues.first().map_or(1.0, |l| l.abs().max(1.0))
    }

    /// Maximal runs of consecutive eigenvalues chained by gaps within the tolerance.
    pub fn clusters(&self) -> Vec<Range<usize>> {
        let tol = self.degeneracy_tolerance();
        let mut out = Vec::new();
        let mut start = 0;
        for i in 1..=self.len() {
            if i == self.len() || self.eigenvalues[i - 1] - self.eigenvalues[i] > tol {
                out.push(start..i);
                start = i;
            }
        }
        out
    }

    /// Degenerate cluster containing index `i`.
    pub fn cluster_of(&self, i: usize) -> Range<usize> {
        self.clusters().into_iter().find(|r| r.contains(&i)).expect("index in range")
    }
}

/// Diagonalizes the adjacency matrix of `g`.
pub fn eigendecompose(g: &BiasedGraph) -> Result<Spectrum> {
    match g.real_adjacency() {
        Some(a) => eigendecompose_real(a),
        None => eigendecompose_hermitian(g.adjacency()),
    }
}

/// Diagonalizes a real symmetric matrix.
pub fn eigendecompose_real(a: DMatrix<f64>) -> Result<Spectrum> {
    let n = a.nrows();
    if n == 0 {
        return Err(Error::InvalidArgument("cannot diagonalize an empty matrix".into()));
    }
    let max = a.iter().fold(0.0f64, |acc, x| acc.max(x.abs()));
    let (values, vectors) = solve_with_retry(a, max)?;
    Ok(sorted(&values, |i| vectors.column(i).map(|x| Complex64::new(x, 0.0))))
}

/// Diagonal shifts tried when the QR iteration returns non-finite output.
///
/// nalgebra's implicit QR occasionally yields NaN eigenpairs on very sparse,
/// highly degenerate matrices (a few edges on many isolated vertices). A
/// shift `A + cI` keeps the eigenvectors and moves the eigenvalues by `c`,
/// which avoids the failure in practice.
const RETRY_SHIFTS: [f64; 3] = [0.0, 0.372_548_1, 1.618_033_9];

fn solve_with_retry<T>(a: DMatrix<T>, max_abs: f64) -> Result<(Vec<f64>, DMatrix<T>)>
where
    T: nalgebra::ComplexField<RealField = f64>,
{
    let n = a.nrows();
    for c in RETRY_SHIFTS.map(|s| s * max_abs.max(1.0)) {
        let mut m = a.clone();
        for i in 0..n {
            m[(i, i)] += T::from_real(c);
        }
        let Some(eig) = SymmetricEigen::try_new(m, f64::EPSILON, iteration_cap(n)) else { continue };
        let finite = eig.eigenvalues.iter().all(|x| x.is_finite())
            && eig.eigenvectors.iter().all(|x| x.clone().modulus().is_finite());
        if finite {
            return Ok((eig.eigenvalues.iter().map(|x| x - c).collect(), eig.eigenvectors));
        }
    }
    Err(Error::NoConvergence(n))
}

/// Diagonalizes a Hermitian matrix; only the lower triangle is read.
pub fn eigendecompose_hermitian(a: DMatrix<Complex64>) -> Result<Spectrum> {
    let n = a.nrows();
    if n == 0 {
        return Err(Error::InvalidArgument("cannot diagonalize an empty matrix".into()));
    }
    let max = a.iter().fold(0.0f64, |acc, x| acc.max(x.norm()));
    let (values, vectors) = solve_with_retry(a, max)?;
    Ok(sorted(&values, |i| vectors.column(i).into_owned()))
}

fn iteration_cap(n: usize) -> usize {
    1000 * n.max(10)
}

fn sorted(values: &[f64], column: impl Fn(usize) -> DVector<Complex64>) -> Spectrum {
    let n = values.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| values[j].total_cmp(&values[i]).then(i.cmp(&j)));
    let mut vectors = DMatrix::from_element(n, n, Complex64::default());
    for (k, &i) in order.iter().enumerate() {
        vectors.set_column(k, &fix_gauge(column(i)));
    }
    Spectrum { eigenvalues: order.iter().map(|&i| values[i]).collect(), eigenvectors: vectors }
}

/// Rotates `v` so its largest entry is real and positive.
pub fn fix_gauge(mut v: DVector<Complex64>) -> DVector<Complex64> {
    let max = v.iter().map(|z| z.norm()).fold(0.0, f64::max);
    if max == 0.0 {
        return v;
    }
    let pivot = v.iter().position(|z| z.norm() >= max - 1e-10 * max).expect("max exists");
    let phase = v[pivot].conj() / v[pivot].norm();
    v.iter_mut().for_each(|z| *z *= phase);
    v
}

/// `lambda_0 - lambda_1`.
pub fn spectral_gap(spec: &Spectrum) -> Result<f64> {
    if spec.len() < 2 {
        return Err(Error::InvalidArgument("spectral gap needs at least two eigenvalues".into()));
    }
    Ok(spec.eigenvalue(0) - spec.eigenvalue(1))
}

/// Alon–Boppana / Ramanujan threshold `2 sqrt(d - 1)`.
pub fn ramanujan_bound(d: usize) -> f64 {
    2.0 * (d as f64 - 1.0).max(0.0).sqrt()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RamanujanReport {
    pub is_ramanujan: bool,
    pub max_nontrivial: f64,
    pub bound: f64,
}

/// Tests `|lambda_j| <= 2 sqrt(d - 1)` over the nontrivial eigenvalues.
///
/// With `bipartite` set the trivial `-d` eigenvalue is excluded as well.
pub fn ramanujan_check(g: &BiasedGraph, d: usize, bipartite: bool) -> Result<RamanujanReport> {
    check_regular(g, d)?;
    let spec = eigendecompose(g)?;
    Ok(ramanujan_from_spectrum(&spec, d, bipartite))
}

pub fn ramanujan_from_spectrum(spec: &Spectrum, d: usize, bipartite: bool) -> RamanujanReport {
    let n = spec.len();
    let end = if bipartite { n.saturating_sub(1) } else { n };
    let max_nontrivial =
        spec.eigenvalues().get(1..end).unwrap_or(&[]).iter().map(|l| l.abs()).fold(0.0, f64::max);
    let bound = ramanujan_bound(d);
    RamanujanReport { is_ramanujan: max_nontrivial <= bound + 1e-9, max_nontrivial, bound }
}

/// How to pick the emergent eigenpair.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EmergentPolicy {
    /// Largest eigenvalue.
    #[default]
    Highest,
    /// Largest `|lambda|`; ties prefer the positive end.
    HighestMagnitude,
}

#[derive(Debug, Clone)]
pub struct EmergentState {
    pub index: usize,
    pub eigenvalue: f64,
    pub vector: DVector<Complex64>,
    /// The selected eigenvalue belongs to a cluster of size > 1.
    pub degenerate: bool,
}

/// Index of the emergent eigenpair under `policy`.
pub fn emergent_index(spec: &Spectrum, policy: EmergentPolicy) -> usize {
    match policy {
        EmergentPolicy::Highest => 0,
        EmergentPolicy::HighestMagnitude => {
            let bottom = spec.cluster_of(spec.len() - 1).start;
            let (top, low) = (spec.eigenvalue(0), spec.eigenvalue(bottom));
            if low < 0.0 && low.abs() > top.abs() + spec.degeneracy_tolerance() {
                bottom
            } else {
                0
            }
        }
    }
}

pub fn emergent_state(spec: &Spectrum, policy: EmergentPolicy) -> EmergentState {
    let index = emergent_index(spec, policy);
    EmergentState {
        index,
        eigenvalue: spec.eigenvalue(index),
        vector: spec.eigenvector(index),
        degenerate: spec.cluster_of(index).len() > 1,
    }
}

/// All indices degenerate with the emergent eigenvalue.
pub fn emergent_cluster(spec: &Spectrum, policy: EmergentPolicy) -> Range<usize> {
    spec.cluster_of(emergent_index(spec, policy))
}

/// Histogram binning for ensemble spectra.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum Bins {
    /// `count` equal bins on `[lo, hi]`; values outside land in the end bins.
    Fixed { lo: f64, hi: f64, count: usize },
    /// `count` equal bins spanning the observed range.
    Auto { count: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EnsembleSpectrum {
    pub edges: Vec<f64>,
    pub counts: Vec<u64>,
    pub realizations: usize,
    pub description: String,
}

impl EnsembleSpectrum {
    pub fn from_eigenvalues(values: &[Vec<f64>], bins: Bins, description: impl Into<String>) -> Result<Self> {
        let all = values.iter().flatten().copied();
        let (lo, hi, count) = match bins {
            Bins::Fixed { lo, hi, count } => (lo, hi, count),
            Bins::Auto { count } => {
                let (lo, hi) = all.clone().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), x| (a.min(x), b.max(x)));
                if lo.is_finite() && hi > lo { (lo, hi, count) } else { (lo - 0.5, lo + 0.5, count) }
            }
        };
        if count == 0 || !(hi > lo) {
            return Err(Error::InvalidArgument(format!("bad histogram range [{lo}, {hi}] with {count} bins")));
        }
        let width = (hi - lo) / count as f64;
        let mut counts = vec![0u64; count];
        for x in all {
            let k = ((x - lo) / width).floor().clamp(0.0, (count - 1) as f64) as usize;
            counts[k] += 1;
        }
        let edges = (0..=count).map(|k| if k == count { hi } else { lo + k as f64 * width }).collect();
        Ok(Self { edges, counts, realizations: values.len(), description: description.into() })
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    /// Writes `bin_left,bin_right,count`.
    pub fn write_csv(&self, mut w: impl Write) -> Result<()> {
        writeln!(w, "bin_left,bin_right,count")?;
        for (k, c) in self.counts.iter().enumerate() {
            writeln!(w, "{},{},{}", g12(self.edges[k]), g12(self.edges[k + 1]), c)?;
        }
        Ok(())
    }
}

/// Eigenvalues of `realizations` graphs, realization `r` built from seed
/// `derive_seed(master_seed, r)`. Runs in parallel; output is in realization order.
pub fn ensemble_eigenvalues<F>(generator: F, realizations: usize, master_seed: u64) -> Result<Vec<Vec<f64>>>
where
    F: Fn(u64) -> Result<BiasedGraph> + Sync,
{
    (0..realizations as u64)
        .into_par_iter()
        .map(|r| {
            let g = generator(derive_seed(master_seed, r))?;
            Ok(eigendecompose(&g)?.eigenvalues)
        })
        .collect()
}

/// Histogram over all eigenvalues of an ensemble.
pub fn ensemble_spectrum<F>(
    generator: F,
    realizations: usize,
    bins: Bins,
    master_seed: u64,
    description: impl Into<String>,
) -> Result<EnsembleSpectrum>
where
    F: Fn(u64) -> Result<BiasedGraph> + Sync,
{
    if realizations == 0 {
        return Err(Error::InvalidArgument("ensemble needs at least one realization".into()));
    }
    let values = ensemble_eigenvalues(generator, realizations, master_seed)?;
    EnsembleSpectrum::from_eigenvalues(&values, bins, description)
}

/// Emergent states of an ensemble: mixture purity and top eigenvalues.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EmergentEnsemble {
    /// `tr(ρ²)` of the equal mixture of the top eigenvectors.
    pub purity: f64,
    pub top_eigenvalues: Vec<f64>,
    pub mean_degree: f64,
}

impl EmergentEnsemble {
    pub fn mean_eigenvalue(&self) -> f64 {
        self.top_eigenvalues.iter().sum::<f64>() / self.top_eigenvalues.len() as f64
    }
}

/// Top eigenvectors of `realizations` graphs mixed with equal weights.
pub fn emergent_ensemble<F>(generator: F, realizations: usize, master_seed: u64) -> Result<EmergentEnsemble>
where
    F: Fn(u64) -> Result<BiasedGraph> + Sync,
{
    if realizations == 0 {
        return Err(Error::InvalidArgument("ensemble needs at least one realization".into()));
    }
    let runs = (0..realizations as u64)
        .into_par_iter()
        .map(|r| {
            let g = generator(derive_seed(master_seed, r))?;
            let spec = eigendecompose(&g)?;
            Ok((spec.eigenvalue(0), spec.eigenvector(0), crate::graph::average_degree(&g)))
        })
        .collect::<Result<Vec<_>>>()?;
    let vectors: Vec<DVector<Complex64>> = runs.iter().map(|r| r.1.clone()).collect();
    Ok(EmergentEnsemble {
        purity: crate::state::ensemble_purity(&vectors)?,
        top_eigenvalues: runs.iter().map(|r| r.0).collect(),
        mean_degree: runs.iter().map(|r| r.2).sum::<f64>() / realizations as f64,
    })
}

/// One retention level of a disorder sweep.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DisorderPoint {
    pub retention: f64,
    pub purity: f64,
    pub mean_eigenvalue: f64,
    pub mean_degree: f64,
}

/// Random `d`-regular graphs on `n` vertices with a fraction `1 - retention`
/// of their edges deleted, one ensemble per retention level.
///
/// Realization `r` uses the same base graph and deletion stream at every
/// level, so the levels differ only in how many edges go.
pub fn disorder_sweep(n: usize, d: usize, retentions: &[f64], realizations: usize, master_seed: u64) -> Result<Vec<DisorderPoint>> {
    retentions
        .iter()
        .map(|&retention| {
            if !(0.0..=1.0).contains(&retention) {
                return Err(Error::InvalidArgument(format!("retention {retention} outside [0, 1]")));
            }
            let ens = emergent_ensemble(
                |s| {
                    let g = crate::graph::d_regular_random(n, d, derive_seed(s, 0))?;
                    crate::graph::delete_random_edges(&g, 1.0 - retention, derive_seed(s, 1))
                },
                realizations,
                master_seed,
            )?;
            Ok(DisorderPoint { retention, purity: ens.purity, mean_eigenvalue: ens.mean_eigenvalue(), mean_degree: ens.mean_degree })
        })
        .collect()
}

/// CSV `retention,purity,mean_eigenvalue,mean_degree`.
pub fn write_disorder_csv(points: &[DisorderPoint], mut w: impl Write) -> Result<()> {
    writeln!(w, "retention,purity,mean_eigenvalue,mean_degree")?;
    for p in points {
        writeln!(w, "{},{},{},{}", g12(p.retention), g12(p.purity), g12(p.mean_eigenvalue), g12(p.mean_degree))?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{complete, cycle, d_regular_random, disjoint_union, GraphBuilder};
    use approx::assert_abs_diff_eq;

    #[test]
    fn sparse_degenerate_matrix_is_finite() {
        // Plain QR returns NaN eigenpairs for this matrix.
        let mut b = GraphBuilder::new(40);
        for (u, v) in [(1, 35), (3, 30), (6, 15), (7, 30), (8, 32), (26, 37)] {
            b.add_edge(u, v, Complex64::new(1.0, 0.0)).unwrap();
        }
        let g = b.build().unwrap();
        let spec = eigendecompose(&g).unwrap();
        assert!(spec.eigenvectors().iter().all(|z| z.norm().is_finite()));
        assert_abs_diff_eq!(spec.eigenvalue(0), 2f64.sqrt(), epsilon = 1e-12);
        let a = g.adjacency();
        for i in 0..40 {
            let v = spec.eigenvector(i);
            assert!((&a * &v - &v * Complex64::new(spec.eigenvalue(i), 0.0)).norm() < 1e-10);
        }
    }

    #[test]
    fn full_retention_is_pure() {
        let pts = disorder_sweep(30, 4, &[1.0, 0.3], 6, 2).unwrap();
        assert_abs_diff_eq!(pts[0].purity, 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(pts[0].mean_eigenvalue, 4.0, epsilon = 1e-9);
        assert!(pts[1].purity < pts[0].purity);
        assert!(disorder_sweep(30, 4, &[1.5], 2, 2).is_err());
    }

    #[test]
    fn k2_spectrum() {
        let mut b = GraphBuilder::new(2);
        b.add_edge(0, 1, Complex64::new(1.0, 0.0)).unwrap();
        let s = eigendecompose(&b.build().unwrap()).unwrap();
        assert_abs_diff_eq!(s.eigenvalue(0), 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(s.eigenvalue(1), -1.0, epsilon = 1e-12);
    }

    #[test]
    fn c3_spectrum() {
        let s = eigendecompose(&cycle(3).unwrap()).unwrap();
        for (x, y) in s.eigenvalues().iter().zip([2.0, -1.0, -1.0]) {
            assert_abs_diff_eq!(*x, y, epsilon = 1e-12);
        }
    }

    #[test]
    fn regular_top_vector_uniform() {
        let g = d_regular_random(12, 8, 3).unwrap();
        let s = eigendecompose(&g).unwrap();
        assert_abs_diff_eq!(s.eigenvalue(0), 8.0, epsilon = 1e-9);
        let v = s.eigenvector(0);
        for z in v.iter() {
            assert_abs_diff_eq!(z.re, 1.0 / 12f64.sqrt(), epsilon = 1e-8);
            assert_abs_diff_eq!(z.im, 0.0, epsilon = 1e-8);
        }
    }

    #[test]
    fn gaps() {
        let c5 = eigendecompose(&cycle(5).unwrap()).unwrap();
        assert_abs_diff_eq!(spectral_gap(&c5).unwrap(), 2.0 - 2.0 * (0.4 * std::f64::consts::PI).cos(), epsilon = 1e-12);
        let k4 = complete(4).unwrap();
        assert_abs_diff_eq!(spectral_gap(&eigendecompose(&k4).unwrap()).unwrap(), 4.0, epsilon = 1e-12);
        let two = disjoint_union(&k4, &k4).unwrap();
        assert_abs_diff_eq!(spectral_gap(&eigendecompose(&two).unwrap()).unwrap(), 0.0, epsilon = 1e-12);
    }

    #[test]
    fn ramanujan_k4_and_cycles() {
        let r = ramanujan_check(&complete(4).unwrap(), 3, false).unwrap();
        assert!(r.is_ramanujan);
        assert_abs_diff_eq!(r.max_nontrivial, 1.0, epsilon = 1e-12);
        let r = ramanujan_check(&cycle(101).unwrap(), 2, false).unwrap();
        assert!(r.is_ramanujan);
        assert!(r.max_nontrivial > 1.99);
        assert!(matches!(ramanujan_check(&cycle(5).unwrap(), 3, false), Err(Error::NotRegular { .. })));
    }

    #[test]
    fn empty_graph_emergent_is_degenerate() {
        let s = eigendecompose(&BiasedGraph::empty(4)).unwrap();
        let e = emergent_state(&s, EmergentPolicy::HighestMagnitude);
        assert_eq!(e.eigenvalue, 0.0);
        assert!(e.degenerate);
        assert_eq!(e.index, 0);
    }

    #[test]
    fn highest_magnitude_picks_negative_end() {
        let g = complete(4).unwrap().map_edges(|e| -e.value);
        let s = eigendecompose(&g).unwrap();
        assert_eq!(emergent_state(&s, EmergentPolicy::Highest).eigenvalue, s.eigenvalue(0));
        let e = emergent_state(&s, EmergentPolicy::HighestMagnitude);
        assert_abs_diff_eq!(e.eigenvalue, -3.0, epsilon = 1e-12);
        assert!(!e.degenerate);
    }

    #[test]
    fn single_realization_histogram_matches_spectrum() {
        let es = ensemble_spectrum(|_| cycle(5), 1, Bins::Fixed { lo: -2.5, hi: 2.5, count: 5 }, 0, "c5").unwrap();
        assert_eq!(es.counts, vec![2, 0, 0, 2, 1]);
        let mut buf = Vec::new();
        es.write_csv(&mut buf).unwrap();
        assert!(String::from_utf8(buf).unwrap().starts_with("bin_left,bin_right,count\n-2.5,-1.5,2\n"));
    }

    #[test]
    fn ensemble_total_and_determinism() {
        let gen = |s| d_regular_random(20, 4, s);
        let a = ensemble_spectrum(gen, 8, Bins::Auto { count: 30 }, 7, "d4").unwrap();
        let b = ensemble_spectrum(gen, 8, Bins::Auto { count: 30 }, 7, "d4").unwrap();
        assert_eq!(a.total(), 160);
        assert_eq!(a, b);
    }
}
