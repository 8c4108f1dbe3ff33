//! Witness QL bits coupled to like-labeled blocks of a product graph.
//!
//! The witness subgraph `x1` is joined to every product block whose target
//! bit is 1, `x2` to every block whose target bit is 2. Reading the sign of
//! the emergent state on `x1` and `x2` tells whether the target bit is in
//! phase with the witness.

use num_complex::Complex64;
use rand::seq::index::sample;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{disjoint_union, BiasedGraph, GraphBuilder, Labels};
use crate::product::ProductBasis;
use crate::qlbit::{build_qlbit, Bias, QlBitSpec};
use crate::rng::{derive_seed, rng_from_seed};
use crate::spectral::{eigendecompose, emergent_index, EmergentPolicy};

/// Projections below this magnitude on both witness halves are ambiguous.
pub const AMBIGUITY_THRESHOLD: f64 = 0.05;

/// Default fraction of `n` used as the edge count per coupling group.
pub const DEFAULT_DENSITY: f64 = 0.1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Phase {
    Plus,
    Minus,
}

impl Phase {
    pub fn sign(self) -> f64 {
        match self {
            Self::Plus => 1.0,
            Self::Minus => -1.0,
        }
    }

    pub fn bias(self) -> Bias {
        match self {
            Self::Plus => Bias::PLUS,
            Self::Minus => Bias::MINUS,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Readout {
    Same,
    Inverted,
}

/// Edges from one witness half to one product block.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CouplingGroup {
    /// 0 for `x1`, 1 for `x2`.
    pub witness_half: usize,
    /// Product-basis index of the block.
    pub block: usize,
    pub edges: Vec<(usize, usize)>,
}

#[derive(Debug, Clone)]
pub struct WitnessAttachment {
    pub graph: BiasedGraph,
    pub target: usize,
    pub strength: f64,
    pub density: f64,
    /// Vertices `0..product_vertices` belong to the product.
    pub product_vertices: usize,
    pub witness_blocks: [Vec<usize>; 2],
    pub groups: Vec<CouplingGroup>,
    /// Basis of the product part alone.
    pub basis: ProductBasis,
}

/// Couples the QL bit built from `witness` to `product`.
///
/// Every witness half gets `round(density * n)` random edges of value
/// `strength` to each product block sharing its label on bit `target`,
/// where `n` is the product block size. The witness half labels become
/// `x1` and `x2`. `strength = 0` adds no edges.
pub fn attach_witness(
    product: &BiasedGraph,
    witness: &QlBitSpec,
    target: usize,
    strength: f64,
    density: f64,
    seed: u64,
) -> Result<WitnessAttachment> {
    let basis = ProductBasis::from_graph(product)?;
    if target >= basis.q() {
        return Err(Error::UnknownBit { index: target, bits: basis.q() });
    }
    if !(strength >= 0.0) || !(density >= 0.0) {
        return Err(Error::InvalidArgument("witness strength and density must be non-negative".into()));
    }
    let w = build_qlbit(witness)?;
    let mut labels = Labels::new();
    labels.insert("x1".into(), w.block("a1").expect("QL bit labels").to_vec());
    labels.insert("x2".into(), w.block("a2").expect("QL bit labels").to_vec());
    let w = w.with_labels(Some(labels))?;

    let off = product.n();
    let combined = disjoint_union(product, &w)?;
    let witness_blocks = ["x1", "x2"].map(|x| combined.block(x).expect("witness labels").to_vec());
    let mut b = GraphBuilder::from_graph(&combined);
    let mut groups = Vec::new();
    for k in 0..basis.dim() {
        let half = (k >> target) & 1;
        let (xs, block) = (&witness_blocks[half], basis.block(k));
        let m = (density * block.len() as f64).round() as usize;
        if m > xs.len() * block.len() {
            return Err(Error::PolicyInfeasible(format!("{m} witness edges exceed {} possible pairs", xs.len() * block.len())));
        }
        let mut edges = Vec::new();
        if strength > 0.0 {
            let mut rng = rng_from_seed(derive_seed(seed, k as u64));
            for p in sample(&mut rng, xs.len() * block.len(), m) {
                let (x, v) = (xs[p / block.len()], block[p % block.len()]);
                b.add_edge(v, x, Complex64::new(strength, 0.0))?;
                edges.push((x, v));
            }
        }
        groups.push(CouplingGroup { witness_half: half, block: k, edges });
    }
    Ok(WitnessAttachment {
        graph: b.build()?,
        target,
        strength,
        density,
        product_vertices: off,
        witness_blocks,
        groups,
        basis,
    })
}

impl WitnessAttachment {
    /// `Re<J_x1, W>` and `Re<J_x2, W>` of the emergent state `W`.
    pub fn witness_projections(&self) -> Result<(f64, f64)> {
        let spec = eigendecompose(&self.graph)?;
        let w = spec.eigenvector(emergent_index(&spec, EmergentPolicy::Highest));
        let [p1, p2] = self.witness_blocks.clone().map(|xs| {
            let s: Complex64 = xs.iter().map(|&i| w[i]).sum();
            s.re / (xs.len() as f64).sqrt()
        });
        Ok((p1, p2))
    }

    /// Marginal two-state of the target bit: `<J_s, W>` with `J_s` the
    /// normalized indicator of all product blocks whose target label is `s`.
    pub fn target_marginal(&self) -> Result<[Complex64; 2]> {
        let spec = eigendecompose(&self.graph)?;
        let w = spec.eigenvector(emergent_index(&spec, EmergentPolicy::Highest));
        let mut out = [Complex64::default(); 2];
        let mut counts = [0usize; 2];
        for k in 0..self.basis.dim() {
            let half = (k >> self.target) & 1;
            for &i in self.basis.block(k) {
                out[half] += w[i];
            }
            counts[half] += self.basis.block(k).len();
        }
        Ok([0, 1].map(|s| out[s] / (counts[s] as f64).sqrt()))
    }

    /// `atan2(|β|, |α|)` of [`Self::target_marginal`].
    pub fn target_angle(&self) -> Result<f64> {
        let [a, b] = self.target_marginal()?;
        Ok(b.norm().atan2(a.norm()))
    }
}

/// `Same` when the sign of `p1 p2` matches the witness phase.
pub fn witness_readout(att: &WitnessAttachment, known_phase: Phase) -> Result<Readout> {
    let (x1, x2) = att.witness_projections()?;
    if x1.abs() < AMBIGUITY_THRESHOLD && x2.abs() < AMBIGUITY_THRESHOLD {
        return Err(Error::AmbiguousReadout { x1, x2 });
    }
    Ok(if (x1 * x2).signum() == known_phase.sign() { Readout::Same } else { Readout::Inverted })
}
