//! Cartesian and contracted products of QL bits and the product basis.
//!
//! Basis order: the first QL bit varies fastest. For two bits the blocks are
//! `a1b1, a2b1, a1b2, a2b2`, i.e. block index `k = sum_j (digit_j - 1) 2^j`.
//! In a Cartesian product `g □ h` vertex `(u, x)` has index `u + |g| x`.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::seq::index::sample;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{d_regular_random, BiasedGraph, GraphBuilder, Labels};
use crate::qlbit::{build_qlbit, QlBitSpec};
use crate::rng::{derive_seed, rng_from_seed};
use crate::spectral::{eigendecompose, Spectrum};

/// Largest number of QL bits a labeled product may carry.
pub const MAX_BITS: usize = 16;

/// One basis label, e.g. `(a1,b2)`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ProductBasisLabel {
    pub letters: Vec<char>,
    /// Subgraph choice per bit, each 1 or 2.
    pub bits: Vec<u8>,
}

impl ProductBasisLabel {
    /// Compact block name, e.g. `a1b2`.
    pub fn name(&self) -> String {
        self.letters.iter().zip(&self.bits).map(|(l, b)| format!("{l}{b}")).collect()
    }
}

impl fmt::Display for ProductBasisLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.letters.iter().zip(&self.bits).map(|(l, b)| format!("{l}{b}")).collect();
        write!(f, "({})", parts.join(","))
    }
}

/// Parses `a1b2c1` into `[('a', 1), ('b', 2), ('c', 1)]`, sorted by letter.
fn parse_label(name: &str) -> Option<Vec<(char, u8)>> {
    let chars: Vec<char> = name.chars().collect();
    if chars.is_empty() || chars.len() % 2 != 0 {
        return None;
    }
    let mut tokens = Vec::with_capacity(chars.len() / 2);
    for pair in chars.chunks_exact(2) {
        let digit = match pair[1] {
            '1' => 1,
            '2' => 2,
            _ => return None,
        };
        if !pair[0].is_ascii_lowercase() {
            return None;
        }
        tokens.push((pair[0], digit));
    }
    tokens.sort_unstable();
    tokens.windows(2).all(|w| w[0].0 != w[1].0).then_some(tokens)
}

/// The `2^q` labeled blocks of a product graph.
#[derive(Debug, Clone, PartialEq)]
pub struct ProductBasis {
    letters: Vec<char>,
    blocks: Vec<Vec<usize>>,
}

impl ProductBasis {
    pub fn from_graph(g: &BiasedGraph) -> Result<Self> {
        let labels = g.labels().ok_or_else(|| Error::MissingLabels("graph has no labels".into()))?;
        Self::from_labels(labels)
    }

    /// Reads block names of the form `a1b2...`; every combination must be present once.
    pub fn from_labels(labels: &Labels) -> Result<Self> {
        let mut parsed = Vec::with_capacity(labels.len());
        for (name, block) in labels {
            let tokens = parse_label(name)
                .ok_or_else(|| Error::MissingLabels(format!("label {name:?} is not of the form a1b2...")))?;
            parsed.push((name, tokens, block));
        }
        let letters: Vec<char> = parsed
            .first()
            .ok_or_else(|| Error::MissingLabels("empty label set".into()))?
            .1
            .iter()
            .map(|t| t.0)
            .collect();
        let q = letters.len();
        if q > MAX_BITS {
            return Err(Error::MissingLabels(format!("{q} bits exceeds the limit of {MAX_BITS}")));
        }
        if labels.len() != 1 << q {
            return Err(Error::MissingLabels(format!("{} labels for {q} bits, expected {}", labels.len(), 1 << q)));
        }
        let mut blocks = vec![None; 1 << q];
        for (name, tokens, block) in parsed {
            if tokens.iter().map(|t| t.0).ne(letters.iter().copied()) {
                return Err(Error::MissingLabels(format!("label {name:?} uses different bit letters")));
            }
            if block.is_empty() {
                return Err(Error::EmptySubgraph);
            }
            let k: usize = tokens.iter().enumerate().map(|(j, t)| usize::from(t.1 - 1) << j).sum();
            if blocks[k].replace(block.clone()).is_some() {
                return Err(Error::MissingLabels(format!("duplicate block for label {name:?}")));
            }
        }
        Ok(Self { letters, blocks: blocks.into_iter().map(|b| b.expect("all 2^q labels seen")).collect() })
    }

    pub fn q(&self) -> usize {
        self.letters.len()
    }

    pub fn dim(&self) -> usize {
        self.blocks.len()
    }

    pub fn letters(&self) -> &[char] {
        &self.letters
    }

    pub fn block(&self, k: usize) -> &[usize] {
        &self.blocks[k]
    }

    pub fn label(&self, k: usize) -> ProductBasisLabel {
        ProductBasisLabel {
            letters: self.letters.clone(),
            bits: (0..self.q()).map(|j| 1 + ((k >> j) & 1) as u8).collect(),
        }
    }

    /// Normalized block indicator vectors in basis order.
    pub fn j_vectors(&self, n: usize) -> Vec<DVector<Complex64>> {
        self.blocks
            .iter()
            .map(|block| {
                let mut v = DVector::from_element(n, Complex64::default());
                let x = Complex64::new(1.0 / (block.len() as f64).sqrt(), 0.0);
                block.iter().for_each(|&i| v[i] = x);
                v
            })
            .collect()
    }

    /// `c_k = <J_k, W>` for a unit vector `W`.
    pub fn project(&self, w: &DVector<Complex64>) -> Result<EffectiveProductState> {
        let norm = w.norm();
        if (norm - 1.0).abs() > 1e-8 {
            return Err(Error::InvalidArgument(format!("projected vector has norm {norm}, expected 1")));
        }
        let coefficients: Vec<Complex64> = self
            .blocks
            .iter()
            .map(|block| {
                let s: Complex64 = block.iter().map(|&i| w[i]).sum();
                s / (block.len() as f64).sqrt()
            })
            .collect();
        let captured: f64 = coefficients.iter().map(|c| c.norm_sqr()).sum();
        Ok(EffectiveProductState { coefficients, residual: (1.0 - captured).max(0.0).sqrt() })
    }
}

/// Coefficients of an eigenvector in the `2^q` product basis.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EffectiveProductState {
    pub coefficients: Vec<Complex64>,
    /// Norm of the part outside the span of the block indicators.
    pub residual: f64,
}

impl EffectiveProductState {
    /// Coefficients rescaled to unit norm.
    pub fn normalized(&self) -> Result<Vec<Complex64>> {
        let norm = self.coefficients.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
        if norm < 1e-12 {
            return Err(Error::InvalidArgument("projection vanishes; cannot renormalize".into()));
        }
        Ok(self.coefficients.iter().map(|c| c / norm).collect())
    }

    /// Captured weight `sum |c_k|^2`.
    pub fn weight(&self) -> f64 {
        self.coefficients.iter().map(|c| c.norm_sqr()).sum()
    }
}

/// Normalized block indicators of a labeled product graph.
pub fn product_j_vectors(g: &BiasedGraph) -> Result<Vec<DVector<Complex64>>> {
    Ok(ProductBasis::from_graph(g)?.j_vectors(g.n()))
}

pub fn project_product_state(g: &BiasedGraph, w: &DVector<Complex64>) -> Result<EffectiveProductState> {
    ProductBasis::from_graph(g)?.project(w)
}

/// Superposition with sign `s_j` on every `*2` component of bit `j`, normalized.
///
/// `[1, 1]` gives `v++ = (1, 1, 1, 1) / 2`; `[-1, 1]` gives `v-+ = (1, -1, 1, -1) / 2`.
pub fn superposition_pattern(signs: &[f64]) -> Vec<Complex64> {
    let dim = 1usize << signs.len();
    let scale = 1.0 / (dim as f64).sqrt();
    (0..dim)
        .map(|k| {
            let sign: f64 = signs.iter().enumerate().filter(|(j, _)| (k >> j) & 1 == 1).map(|(_, s)| s).product();
            Complex64::new(sign * scale, 0.0)
        })
        .collect()
}

/// `sum_b |<b, target>|^2` over an orthonormal basis `b` of the span of `states`.
///
/// Equals the usual fidelity `|<s, target>|^2` for one unit state and stays
/// basis independent for degenerate sets.
pub fn subspace_fidelity(states: &[Vec<Complex64>], target: &[Complex64]) -> f64 {
    let mut basis: Vec<DVector<Complex64>> = Vec::new();
    for s in states {
        let mut v = DVector::from_column_slice(s);
        for b in &basis {
            let overlap = b.dotc(&v);
            v -= b * overlap;
        }
        let norm = v.norm();
        if norm > 1e-10 {
            basis.push(v / Complex64::new(norm, 0.0));
        }
    }
    let t = DVector::from_column_slice(target);
    basis.iter().map(|b| b.dotc(&t).norm_sqr()).sum()
}

/// The `count` eigenpairs with the largest captured product-basis weight,
/// ordered by descending eigenvalue.
pub fn emergent_product_states(
    g: &BiasedGraph,
    spec: &Spectrum,
    count: usize,
) -> Result<Vec<(f64, EffectiveProductState)>> {
    let basis = ProductBasis::from_graph(g)?;
    let mut all = (0..spec.len())
        .map(|i| Ok((i, basis.project(&spec.eigenvector(i))?)))
        .collect::<Result<Vec<_>>>()?;
    all.sort_by(|a, b| b.1.weight().total_cmp(&a.1.weight()).then(a.0.cmp(&b.0)));
    all.truncate(count);
    all.sort_by_key(|(i, _)| *i);
    Ok(all.into_iter().map(|(i, p)| (spec.eigenvalue(i), p)).collect())
}

fn labels_tokens(labels: &Labels) -> Option<BTreeMap<&str, Vec<(char, u8)>>> {
    labels.keys().map(|k| parse_label(k).map(|t| (k.as_str(), t))).collect()
}

/// Combined block names for `g □ h`; bit letters of `h` are shifted past
/// those of `g` when they collide.
fn product_label_names(lg: &Labels, lh: &Labels) -> impl Fn(&str, &str) -> String {
    let shift = match (labels_tokens(lg), labels_tokens(lh)) {
        (Some(tg), Some(th)) => {
            let g_letters: BTreeSet<char> = tg.values().flatten().map(|t| t.0).collect();
            let h_letters: BTreeSet<char> = th.values().flatten().map(|t| t.0).collect();
            match (g_letters.last(), h_letters.first(), h_letters.last()) {
                (Some(&gmax), Some(&hmin), Some(&hmax)) if !g_letters.is_disjoint(&h_letters) => {
                    let s = gmax as u32 + 1 - hmin as u32;
                    (hmax as u32 + s <= 'z' as u32).then_some(s)
                }
                _ => Some(0),
            }
        }
        _ => None,
    };
    move |gn: &str, hn: &str| match (shift, parse_label(gn), parse_label(hn)) {
        (Some(s), Some(mut a), Some(b)) => {
            a.extend(b.into_iter().map(|(l, d)| (char::from_u32(l as u32 + s).expect("ascii letter"), d)));
            a.sort_unstable();
            a.into_iter().map(|(l, d)| format!("{l}{d}")).collect()
        }
        _ => format!("{gn}{hn}"),
    }
}

/// Cartesian product `g □ h`. Diagonals add; labels combine blockwise.
pub fn cartesian_product(g: &BiasedGraph, h: &BiasedGraph) -> BiasedGraph {
    let (ng, nh) = (g.n(), h.n());
    let idx = |u: usize, x: usize| u + ng * x;
    let mut b = GraphBuilder::new(ng * nh);
    for x in 0..nh {
        for e in g.edges() {
            b.add_edge(idx(e.u, x), idx(e.v, x), e.value).expect("distinct product edges");
        }
    }
    for u in 0..ng {
        for e in h.edges() {
            b.add_edge(idx(u, e.u), idx(u, e.v), e.value).expect("distinct product edges");
        }
    }
    for x in 0..nh {
        for u in 0..ng {
            b.set_diagonal(idx(u, x), g.diagonal()[u] + h.diagonal()[x]);
        }
    }
    let whole = |n: usize| {
        let mut l = Labels::new();
        l.insert(String::new(), (0..n).collect());
        l
    };
    if g.labels().is_some() || h.labels().is_some() {
        let lg = g.labels().cloned().unwrap_or_else(|| whole(ng));
        let lh = h.labels().cloned().unwrap_or_else(|| whole(nh));
        let name = product_label_names(&lg, &lh);
        for (gn, gb) in &lg {
            for (hn, hb) in &lh {
                let block = hb.iter().flat_map(|&x| gb.iter().map(move |&u| idx(u, x))).collect();
                b.add_label(name(gn, hn), block);
            }
        }
    }
    b.build().expect("product of valid graphs is valid")
}

/// `g □ g □ ... □ g` with `depth` factors.
pub fn cartesian_power(g: &BiasedGraph, depth: usize) -> Result<BiasedGraph> {
    if depth == 0 {
        return Err(Error::InvalidArgument("product depth must be at least 1".into()));
    }
    Ok((1..depth).fold(g.clone(), |acc, _| cartesian_product(&acc, g)))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CompositionReport {
    pub holds: bool,
    /// Largest gap between sorted product eigenvalues and sorted pairwise sums.
    pub max_eigenvalue_error: f64,
    /// Largest eigen-equation residual over the sampled tensor vectors.
    pub max_residual: f64,
}

/// Checks that `spec(g □ h) = {lambda_i + mu_j}` and that five sampled
/// `X_i ⊗ Y_j` are eigenvectors, both within `tol`.
pub fn verify_spectrum_composition(g: &BiasedGraph, h: &BiasedGraph, tol: f64, seed: u64) -> Result<CompositionReport> {
    let (sg, sh) = (eigendecompose(g)?, eigendecompose(h)?);
    let p = cartesian_product(g, h);
    let sp = eigendecompose(&p)?;
    let mut sums: Vec<f64> = sg.eigenvalues().iter().flat_map(|l| sh.eigenvalues().iter().map(move |m| l + m)).collect();
    sums.sort_by(|a, b| b.total_cmp(a));
    let max_eigenvalue_error = sums.iter().zip(sp.eigenvalues()).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);

    let a: DMatrix<Complex64> = p.adjacency();
    let mut rng = rng_from_seed(seed);
    let picks = sample(&mut rng, g.n() * h.n(), 5.min(g.n() * h.n()));
    let mut max_residual: f64 = 0.0;
    for flat in picks {
        let (i, j) = (flat % g.n(), flat / g.n());
        let t = sh.eigenvector(j).kronecker(&sg.eigenvector(i));
        let lambda = Complex64::new(sg.eigenvalue(i) + sh.eigenvalue(j), 0.0);
        max_residual = max_residual.max((&a * &t - t * lambda).norm());
    }
    Ok(CompositionReport {
        holds: max_eigenvalue_error <= tol && max_residual <= tol,
        max_eigenvalue_error,
        max_residual,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProductMode {
    #[default]
    Full,
    Contracted,
}

/// Block size and degree for contracted products.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ContractedParams {
    pub n: usize,
    pub d: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProductSpec {
    pub qlbits: Vec<QlBitSpec>,
    #[serde(default)]
    pub mode: ProductMode,
    /// Contracted block shape; defaults to the first bit's `sub1` size and degree.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub contracted: Option<ContractedParams>,
    #[serde(default)]
    pub seed: u64,
}

impl ProductSpec {
    pub fn contracted(qlbits: Vec<QlBitSpec>, n: usize, d: usize, seed: u64) -> Self {
        Self { qlbits, mode: ProductMode::Contracted, contracted: Some(ContractedParams { n, d }), seed }
    }

    pub fn full(qlbits: Vec<QlBitSpec>, seed: u64) -> Self {
        Self { qlbits, mode: ProductMode::Full, contracted: None, seed }
    }

    pub fn q(&self) -> usize {
        self.qlbits.len()
    }

    /// Same recipe with all randomness derived from `seed`.
    pub fn reseeded(&self, seed: u64) -> Self {
        Self {
            qlbits: self.qlbits.iter().enumerate().map(|(j, b)| b.reseeded(derive_seed(seed, j as u64))).collect(),
            seed: derive_seed(seed, u64::MAX),
            ..self.clone()
        }
    }

    fn block_shape(&self) -> Result<ContractedParams> {
        if let Some(p) = self.contracted {
            return Ok(p);
        }
        let first = self.qlbits.first().ok_or_else(|| Error::InvalidArgument("product needs at least one QL bit".into()))?;
        Ok(ContractedParams { n: first.sub1.vertex_count(), d: first.sub1.degree() })
    }
}

/// Builds the product graph in the requested mode.
pub fn build_product(spec: &ProductSpec) -> Result<BiasedGraph> {
    match spec.mode {
        ProductMode::Full => {
            let mut bits = spec.qlbits.iter();
            let first = bits.next().ok_or_else(|| Error::InvalidArgument("product needs at least one QL bit".into()))?;
            let mut acc = build_qlbit(first)?;
            for b in bits {
                acc = cartesian_product(&acc, &build_qlbit(b)?);
            }
            Ok(acc)
        }
        ProductMode::Contracted => build_contracted_product(spec),
    }
}

/// Contracted product: `2^q` blocks of `n` vertices, each a fresh `d`-regular
/// random graph. Blocks whose labels differ in bit `j` are joined by cross
/// edges drawn with bit `j`'s connect policy and bias (oriented from the
/// `*1` block to the `*2` block). Intra-block bias is the product of the
/// per-bit blue (`*1`) or red (`*2`) biases.
pub fn build_contracted_product(spec: &ProductSpec) -> Result<BiasedGraph> {
    let q = spec.q();
    if q == 0 {
        return Err(Error::InvalidArgument("product needs at least one QL bit".into()));
    }
    if q > MAX_BITS {
        return Err(Error::InvalidArgument(format!("{q} bits exceeds the limit of {MAX_BITS}")));
    }
    for b in &spec.qlbits {
        b.validate()?;
    }
    let ContractedParams { n, d } = spec.block_shape()?;
    if n == 0 {
        return Err(Error::EmptySubgraph);
    }
    let blocks = 1usize << q;
    let mut b = GraphBuilder::new(n * blocks);
    let mut intra_edges = 0;
    for k in 0..blocks {
        let sub = d_regular_random(n, d, derive_seed(spec.seed, k as u64))?;
        intra_edges = sub.edge_count();
        let bias: Complex64 = spec
            .qlbits
            .iter()
            .enumerate()
            .map(|(j, bit)| if (k >> j) & 1 == 0 { bit.blue_bias.value() } else { bit.red_bias.value() })
            .product();
        for e in sub.edges() {
            b.add_edge(k * n + e.u, k * n + e.v, e.value * bias)?;
        }
    }
    let mut rng = rng_from_seed(derive_seed(spec.seed, blocks as u64));
    for (j, bit) in spec.qlbits.iter().enumerate() {
        if bit.connect_bias.is_zero() {
            continue;
        }
        for k in (0..blocks).filter(|k| (k >> j) & 1 == 0) {
            let k2 = k | (1 << j);
            for (u, x) in bit.connect.sample_pairs(n, n, 2 * intra_edges, &mut rng)? {
                b.add_edge(k * n + u, k2 * n + x, bit.connect_bias.value())?;
            }
        }
    }
    for k in 0..blocks {
        let name: String = (0..q).map(|j| format!("{}{}", (b'a' + j as u8) as char, 1 + ((k >> j) & 1))).collect();
        b.add_label(name, (k * n..(k + 1) * n).collect());
    }
    b.build()
}

/// How subgraph frequencies map onto product blocks.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DetuningRule {
    /// Per-bit sum, see [`apply_subgraph_detuning`].
    #[default]
    Additive,
    /// `omega1` on blocks with an even number of `*2` labels, `omega2` on the
    /// rest; for two bits `a1b1, a2b2` against `a1b2, a2b1`.
    Parity,
}

/// Applies `rule` to the block diagonals of a labeled product.
pub fn apply_detuning(g: &BiasedGraph, omega1: f64, omega2: f64, rule: DetuningRule) -> Result<BiasedGraph> {
    match rule {
        DetuningRule::Additive => apply_subgraph_detuning(g, omega1, omega2),
        DetuningRule::Parity => {
            let basis = ProductBasis::from_graph(g)?;
            let mut diag = g.diagonal().to_vec();
            for k in 0..basis.dim() {
                let shift = if k.count_ones() % 2 == 0 { omega1 } else { omega2 };
                basis.block(k).iter().for_each(|&v| diag[v] += shift);
            }
            g.clone().with_diagonal(diag)
        }
    }
}

/// Adds `omega1` per `*1` bit and `omega2` per `*2` bit to each block's diagonal.
///
/// In a two-bit product block `a1b1` shifts by `2 omega1`, `a1b2` and `a2b1`
/// by `omega1 + omega2`, and `a2b2` by `2 omega2`.
pub fn apply_subgraph_detuning(g: &BiasedGraph, omega1: f64, omega2: f64) -> Result<BiasedGraph> {
    let basis = ProductBasis::from_graph(g)?;
    let mut diag = g.diagonal().to_vec();
    for k in 0..basis.dim() {
        let ones = (0..basis.q()).filter(|j| (k >> j) & 1 == 0).count();
        let shift = ones as f64 * omega1 + (basis.q() - ones) as f64 * omega2;
        basis.block(k).iter().for_each(|&v| diag[v] += shift);
    }
    g.clone().with_diagonal(diag)
}

/// Pairs of block indices joined by at least one edge.
pub fn block_connectivity(g: &BiasedGraph) -> Result<BTreeSet<(usize, usize)>> {
    let basis = ProductBasis::from_graph(g)?;
    let mut owner = vec![0; g.n()];
    for k in 0..basis.dim() {
        basis.block(k).iter().for_each(|&v| owner[v] = k);
    }
    Ok(g.edges()
        .filter(|e| owner[e.u] != owner[e.v])
        .map(|e| (owner[e.u].min(owner[e.v]), owner[e.u].max(owner[e.v])))
        .collect())
}
