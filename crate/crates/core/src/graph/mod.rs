//! Complex-biased undirected graphs.
//!
//! An edge `(u, v)` with `u < v` stores one complex value `a_uv`; the reverse
//! entry `a_vu = conj(a_uv)` is implied, so every adjacency matrix built from a
//! [`BiasedGraph`] is Hermitian by construction. The value is the product of a
//! real coupling weight and a unit-modulus bias.

mod generate;
mod io;
mod ops;

use std::collections::BTreeMap;

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};

pub use generate::{
    bipartite_d_regular, complete, cycle, d_regular_random, two_lift, two_lift_with, GraphGenSpec,
};
pub use io::GraphFile;
pub use ops::{
    add_diagonal_disorder, average_degree, check_regular, delete_random_edges, disjoint_union,
    permute_vertices,
};

/// Named vertex blocks. Block contents are sorted vertex indices.
pub type Labels = BTreeMap<String, Vec<usize>>;

/// One stored edge, `u < v`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Edge {
    pub u: usize,
    pub v: usize,
    pub value: Complex64,
}

impl Edge {
    /// Unit-modulus phase factor.
    pub fn bias(&self) -> Complex64 {
        self.value / self.value.norm()
    }

    /// Real coupling magnitude.
    pub fn weight(&self) -> f64 {
        self.value.norm()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BiasedGraph {
    n: usize,
    edges: BTreeMap<(usize, usize), Complex64>,
    diagonal: Vec<f64>,
    labels: Option<Labels>,
}

impl BiasedGraph {
    /// Graph on `n` vertices with no edges.
    pub fn empty(n: usize) -> Self {
        Self { n, edges: BTreeMap::new(), diagonal: vec![0.0; n], labels: None }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    /// Edges in ascending `(u, v)` order.
    pub fn edges(&self) -> impl ExactSizeIterator<Item = Edge> + '_ {
        self.edges.iter().map(|(&(u, v), &value)| Edge { u, v, value })
    }

    /// Adjacency entry `a_uv` including the implied conjugate and the diagonal.
    pub fn entry(&self, u: usize, v: usize) -> Complex64 {
        if u == v {
            return Complex64::new(self.diagonal.get(u).copied().unwrap_or(0.0), 0.0);
        }
        if u < v {
            self.edges.get(&(u, v)).copied().unwrap_or_default()
        } else {
            self.edges.get(&(v, u)).map(|z| z.conj()).unwrap_or_default()
        }
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        self.edges.contains_key(&(u.min(v), u.max(v)))
    }

    pub fn diagonal(&self) -> &[f64] {
        &self.diagonal
    }

    pub fn labels(&self) -> Option<&Labels> {
        self.labels.as_ref()
    }

    /// Vertices of one label block.
    pub fn block(&self, name: &str) -> Option<&[usize]> {
        self.labels.as_ref()?.get(name).map(Vec::as_slice)
    }

    /// Unweighted vertex degrees.
    pub fn degrees(&self) -> Vec<usize> {
        let mut deg = vec![0; self.n];
        for &(u, v) in self.edges.keys() {
            deg[u] += 1;
            deg[v] += 1;
        }
        deg
    }

    /// Neighbor lists with edge values oriented away from the list owner.
    pub fn adjacency_lists(&self) -> Vec<Vec<(usize, Complex64)>> {
        let mut adj = vec![Vec::new(); self.n];
        for (&(u, v), &z) in &self.edges {
            adj[u].push((v, z));
            adj[v].push((u, z.conj()));
        }
        adj
    }

    /// True when every edge value and diagonal entry is real.
    pub fn is_real(&self) -> bool {
        self.edges.values().all(|z| z.im == 0.0)
    }

    /// Dense Hermitian adjacency matrix.
    pub fn adjacency(&self) -> DMatrix<Complex64> {
        let mut a = DMatrix::from_element(self.n, self.n, Complex64::default());
        for (i, &d) in self.diagonal.iter().enumerate() {
            a[(i, i)] = Complex64::new(d, 0.0);
        }
        for (&(u, v), &z) in &self.edges {
            a[(u, v)] = z;
            a[(v, u)] = z.conj();
        }
        a
    }

    /// Dense real symmetric adjacency, available when [`Self::is_real`] holds.
    pub fn real_adjacency(&self) -> Option<DMatrix<f64>> {
        if !self.is_real() {
            return None;
        }
        let mut a = DMatrix::zeros(self.n, self.n);
        for (i, &d) in self.diagonal.iter().enumerate() {
            a[(i, i)] = d;
        }
        for (&(u, v), z) in &self.edges {
            a[(u, v)] = z.re;
            a[(v, u)] = z.re;
        }
        Some(a)
    }

    /// Replaces the label partition.
    pub fn with_labels(mut self, labels: Option<Labels>) -> Result<Self> {
        if let Some(l) = &labels {
            validate_labels(self.n, l)?;
        }
        self.labels = labels.map(normalize_labels);
        Ok(self)
    }

    /// Replaces the diagonal.
    pub fn with_diagonal(mut self, diagonal: Vec<f64>) -> Result<Self> {
        if diagonal.len() != self.n {
            return Err(Error::InvalidArgument(format!(
                "diagonal has {} entries for {} vertices",
                diagonal.len(),
                self.n
            )));
        }
        if diagonal.iter().any(|d| !d.is_finite()) {
            return Err(Error::InvalidArgument("non-finite diagonal entry".into()));
        }
        self.diagonal = diagonal;
        Ok(self)
    }

    /// New graph with every edge value rewritten by `f(edge)`; zero results drop the edge.
    pub fn map_edges(&self, mut f: impl FnMut(Edge) -> Complex64) -> Self {
        let edges = self
            .edges()
            .filter_map(|e| {
                let z = f(e);
                (z != Complex64::default()).then_some(((e.u, e.v), z))
            })
            .collect();
        Self { n: self.n, edges, diagonal: self.diagonal.clone(), labels: self.labels.clone() }
    }
}

fn normalize_labels(mut labels: Labels) -> Labels {
    for block in labels.values_mut() {
        block.sort_unstable();
    }
    labels
}

fn validate_labels(n: usize, labels: &Labels) -> Result<()> {
    let mut seen = vec![false; n];
    for (name, block) in labels {
        if name.is_empty() {
            return Err(Error::MissingLabels("empty label name".into()));
        }
        for &v in block {
            if v >= n {
                return Err(Error::MissingLabels(format!("label {name} lists vertex {v} >= n = {n}")));
            }
            if std::mem::replace(&mut seen[v], true) {
                return Err(Error::MissingLabels(format!("vertex {v} appears in more than one block")));
            }
        }
    }
    if let Some(v) = seen.iter().position(|s| !s) {
        return Err(Error::MissingLabels(format!("vertex {v} is not covered by any block")));
    }
    Ok(())
}

/// Incremental constructor enforcing the graph invariants on [`GraphBuilder::build`].
#[derive(Debug, Clone)]
pub struct GraphBuilder {
    n: usize,
    edges: BTreeMap<(usize, usize), Complex64>,
    diagonal: Vec<f64>,
    labels: Option<Labels>,
}

impl GraphBuilder {
    pub fn new(n: usize) -> Self {
        Self { n, edges: BTreeMap::new(), diagonal: vec![0.0; n], labels: None }
    }

    /// Starts from an existing graph.
    pub fn from_graph(g: &BiasedGraph) -> Self {
        Self {
            n: g.n,
            edges: g.edges.clone(),
            diagonal: g.diagonal.clone(),
            labels: g.labels.clone(),
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Inserts the edge `u -- v` with adjacency entry `a_uv = value`.
    ///
    /// The value is stored as seen from the smaller endpoint, so passing
    /// `(v, u, z)` stores `conj(z)`.
    pub fn add_edge(&mut self, u: usize, v: usize, value: Complex64) -> Result<&mut Self> {
        if u == v {
            return Err(Error::InvalidArgument(format!("self-loop at vertex {u}")));
        }
        if u >= self.n || v >= self.n {
            return Err(Error::InvalidArgument(format!(
                "edge ({u}, {v}) out of range for n = {}",
                self.n
            )));
        }
        if !(value.re.is_finite() && value.im.is_finite()) || value == Complex64::default() {
            return Err(Error::InvalidArgument(format!("edge ({u}, {v}) has invalid value {value}")));
        }
        let (key, z) = if u < v { ((u, v), value) } else { ((v, u), value.conj()) };
        if self.edges.insert(key, z).is_some() {
            return Err(Error::InvalidArgument(format!("duplicate edge ({}, {})", key.0, key.1)));
        }
        Ok(self)
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        self.edges.contains_key(&(u.min(v), u.max(v)))
    }

    pub fn set_diagonal(&mut self, v: usize, value: f64) -> &mut Self {
        self.diagonal[v] = value;
        self
    }

    pub fn add_label(&mut self, name: impl Into<String>, vertices: Vec<usize>) -> &mut Self {
        self.labels.get_or_insert_with(Labels::new).insert(name.into(), vertices);
        self
    }

    pub fn build(self) -> Result<BiasedGraph> {
        if self.diagonal.iter().any(|d| !d.is_finite()) {
            return Err(Error::InvalidArgument("non-finite diagonal entry".into()));
        }
        if let Some(l) = &self.labels {
            validate_labels(self.n, l)?;
        }
        Ok(BiasedGraph {
            n: self.n,
            edges: self.edges,
            diagonal: self.diagonal,
            labels: self.labels.map(normalize_labels),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn reverse_insertion_stores_conjugate() {
        let mut b = GraphBuilder::new(3);
        b.add_edge(2, 0, c(0.0, 1.0)).unwrap();
        let g = b.build().unwrap();
        assert_eq!(g.entry(2, 0), c(0.0, 1.0));
        assert_eq!(g.entry(0, 2), c(0.0, -1.0));
        let a = g.adjacency();
        assert_eq!(a.adjoint(), a);
    }

    #[test]
    fn rejects_loops_duplicates_and_zero() {
        let mut b = GraphBuilder::new(3);
        assert!(b.add_edge(1, 1, c(1.0, 0.0)).is_err());
        b.add_edge(0, 1, c(1.0, 0.0)).unwrap();
        assert!(b.add_edge(1, 0, c(1.0, 0.0)).is_err());
        assert!(b.add_edge(0, 2, c(0.0, 0.0)).is_err());
        assert!(b.add_edge(0, 3, c(1.0, 0.0)).is_err());
    }

    #[test]
    fn label_validation() {
        let mut b = GraphBuilder::new(4);
        b.add_label("a1", vec![0, 1]).add_label("a2", vec![2]);
        assert!(matches!(b.build(), Err(Error::MissingLabels(_))));

        let mut b = GraphBuilder::new(3);
        b.add_label("a1", vec![0, 1]).add_label("a2", vec![1, 2]);
        assert!(b.build().is_err());

        let mut b = GraphBuilder::new(3);
        b.add_label("a1", vec![1, 0]).add_label("a2", vec![2]);
        let g = b.build().unwrap();
        assert_eq!(g.block("a1").unwrap(), &[0, 1]);
    }

    #[test]
    fn bias_and_weight_split() {
        let e = Edge { u: 0, v: 1, value: c(0.0, -0.25) };
        assert_eq!(e.weight(), 0.25);
        assert_eq!(e.bias(), c(0.0, -1.0));
    }

    #[test]
    fn map_edges_drops_zeros() {
        let mut b = GraphBuilder::new(3);
        b.add_edge(0, 1, c(1.0, 0.0)).unwrap();
        b.add_edge(1, 2, c(1.0, 0.0)).unwrap();
        let g = b.build().unwrap();
        let h = g.map_edges(|e| if e.u == 0 { c(0.0, 0.0) } else { -e.value });
        assert_eq!(h.edge_count(), 1);
        assert_eq!(h.entry(1, 2), c(-1.0, 0.0));
    }
}
