use std::collections::HashSet;

use num_complex::Complex64;
use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{BiasedGraph, GraphBuilder};
use crate::error::{Error, Result};
use crate::rng::{derive_seed, rng_from_seed};

/// Restarts allowed before the regular-graph samplers give up.
pub const MAX_RESTARTS: usize = 10_000;

/// Reshuffle rounds of leftover stubs inside one pairing attempt.
const MAX_ROUNDS: usize = 1_000;

const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Serializable graph recipe.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum GraphGenSpec {
    DRegularRandom {
        n: usize,
        d: usize,
        #[serde(default)]
        seed: u64,
    },
    Cycle {
        n: usize,
    },
    Complete {
        n: usize,
    },
    BipartiteDRegular {
        n_per_side: usize,
        d: usize,
        #[serde(default)]
        seed: u64,
    },
    TwoLiftOf {
        base: Box<GraphGenSpec>,
        #[serde(default)]
        seed: u64,
    },
}

impl GraphGenSpec {
    pub fn generate(&self) -> Result<BiasedGraph> {
        match self {
            Self::DRegularRandom { n, d, seed } => d_regular_random(*n, *d, *seed),
            Self::Cycle { n } => cycle(*n),
            Self::Complete { n } => complete(*n),
            Self::BipartiteDRegular { n_per_side, d, seed } => {
                bipartite_d_regular(*n_per_side, *d, *seed)
            }
            Self::TwoLiftOf { base, seed } => two_lift(&base.generate()?, *seed),
        }
    }

    pub fn vertex_count(&self) -> usize {
        match self {
            Self::DRegularRandom { n, .. } | Self::Cycle { n } | Self::Complete { n } => *n,
            Self::BipartiteDRegular { n_per_side, .. } => 2 * n_per_side,
            Self::TwoLiftOf { base, .. } => 2 * base.vertex_count(),
        }
    }

    /// Degree of every vertex of the generated graph.
    pub fn degree(&self) -> usize {
        match self {
            Self::DRegularRandom { d, .. } | Self::BipartiteDRegular { d, .. } => *d,
            Self::Cycle { .. } => 2,
            Self::Complete { n } => n.saturating_sub(1),
            Self::TwoLiftOf { base, .. } => base.degree(),
        }
    }

    pub fn is_bipartite(&self) -> bool {
        matches!(self, Self::BipartiteDRegular { .. })
    }

    /// Same recipe with every random choice driven by `seed`.
    pub fn reseeded(&self, seed: u64) -> Self {
        match self {
            Self::DRegularRandom { n, d, .. } => Self::DRegularRandom { n: *n, d: *d, seed },
            Self::BipartiteDRegular { n_per_side, d, .. } => {
                Self::BipartiteDRegular { n_per_side: *n_per_side, d: *d, seed }
            }
            Self::TwoLiftOf { base, .. } => Self::TwoLiftOf {
                base: Box::new(base.reseeded(derive_seed(seed, 0))),
                seed: derive_seed(seed, 1),
            },
            other => other.clone(),
        }
    }
}

/// Ring on `n >= 3` vertices.
pub fn cycle(n: usize) -> Result<BiasedGraph> {
    if n < 3 {
        return Err(Error::InvalidArgument(format!("cycle needs n >= 3, got {n}")));
    }
    let mut b = GraphBuilder::new(n);
    for i in 0..n {
        b.add_edge(i, (i + 1) % n, ONE)?;
    }
    b.build()
}

/// Complete graph `K_n`.
pub fn complete(n: usize) -> Result<BiasedGraph> {
    if n == 0 {
        return Err(Error::InvalidArgument("complete graph needs n >= 1".into()));
    }
    let mut b = GraphBuilder::new(n);
    for u in 0..n {
        for v in u + 1..n {
            b.add_edge(u, v, ONE)?;
        }
    }
    b.build()
}

/// Uniform-ish random simple `d`-regular graph with unit biases.
///
/// Stubs are paired at random; colliding pairs (loops, repeated edges) are
/// returned to the pool and reshuffled, and the attempt restarts only when
/// the leftover stubs cannot be completed. For `d > (n-1)/2` the
/// complementary `(n-1-d)`-regular graph is sampled instead.
pub fn d_regular_random(n: usize, d: usize, seed: u64) -> Result<BiasedGraph> {
    if d == 0 || d >= n {
        return Err(Error::InfeasibleDegree(format!("need 0 < d < n, got n = {n}, d = {d}")));
    }
    if (n * d) % 2 == 1 {
        return Err(Error::InfeasibleDegree(format!("n * d must be even, got n = {n}, d = {d}")));
    }
    let mut rng = rng_from_seed(seed);
    let complement = 2 * d > n - 1;
    let k = if complement { n - 1 - d } else { d };
    let pairs = if k == 0 {
        HashSet::new()
    } else {
        let mut found = None;
        for _ in 0..MAX_RESTARTS {
            if let Some(p) = try_pairing(n, k, &mut rng) {
                found = Some(p);
                break;
            }
        }
        found.ok_or(Error::RetryExhausted(MAX_RESTARTS))?
    };
    let mut b = GraphBuilder::new(n);
    for u in 0..n {
        for v in u + 1..n {
            if pairs.contains(&(u, v)) != complement {
                b.add_edge(u, v, ONE)?;
            }
        }
    }
    b.build()
}

fn try_pairing(n: usize, d: usize, rng: &mut impl Rng) -> Option<HashSet<(usize, usize)>> {
    let mut edges = HashSet::with_capacity(n * d / 2);
    let mut stubs: Vec<usize> = (0..n).flat_map(|v| std::iter::repeat_n(v, d)).collect();
    for _ in 0..MAX_ROUNDS {
        if stubs.is_empty() {
            return Some(edges);
        }
        stubs.shuffle(rng);
        let mut left = vec![0usize; n];
        for pair in stubs.chunks_exact(2) {
            let (a, b) = (pair[0].min(pair[1]), pair[0].max(pair[1]));
            if a != b && edges.insert((a, b)) {
                continue;
            }
            left[a] += 1;
            left[b] += 1;
        }
        let open: Vec<usize> = (0..n).filter(|&v| left[v] > 0).collect();
        let completable = open
            .iter()
            .enumerate()
            .any(|(i, &a)| open[i + 1..].iter().any(|&b| !edges.contains(&(a, b))));
        if !open.is_empty() && !completable {
            return None;
        }
        stubs = open.iter().flat_map(|&v| std::iter::repeat_n(v, left[v])).collect();
    }
    None
}

/// Random bipartite graph with both sides `d`-regular.
///
/// Vertices `0..n_per_side` form one side and `n_per_side..2*n_per_side` the
/// other. For `d > n_per_side / 2` the bipartite complement is sampled.
pub fn bipartite_d_regular(n_per_side: usize, d: usize, seed: u64) -> Result<BiasedGraph> {
    let n = n_per_side;
    if d == 0 || d > n {
        return Err(Error::InfeasibleDegree(format!(
            "need 0 < d <= n_per_side, got n_per_side = {n}, d = {d}"
        )));
    }
    let mut rng = rng_from_seed(seed);
    let complement = 2 * d > n;
    let k = if complement { n - d } else { d };
    let pairs = if k == 0 {
        HashSet::new()
    } else {
        let mut found = None;
        for _ in 0..MAX_RESTARTS {
            if let Some(p) = try_bipartite_pairing(n, k, &mut rng) {
                found = Some(p);
                break;
            }
        }
        found.ok_or(Error::RetryExhausted(MAX_RESTARTS))?
    };
    let mut b = GraphBuilder::new(2 * n);
    for u in 0..n {
        for x in 0..n {
            if pairs.contains(&(u, x)) != complement {
                b.add_edge(u, n + x, ONE)?;
            }
        }
    }
    b.build()
}

fn try_bipartite_pairing(n: usize, d: usize, rng: &mut impl Rng) -> Option<HashSet<(usize, usize)>> {
    let mut edges = HashSet::with_capacity(n * d);
    let mut left: Vec<usize> = (0..n).flat_map(|v| std::iter::repeat_n(v, d)).collect();
    let mut right = left.clone();
    for _ in 0..MAX_ROUNDS {
        if left.is_empty() {
            return Some(edges);
        }
        right.shuffle(rng);
        let (mut lo, mut ro) = (Vec::new(), Vec::new());
        for (&u, &x) in left.iter().zip(&right) {
            if !edges.insert((u, x)) {
                lo.push(u);
                ro.push(x);
            }
        }
        let completable = lo.iter().any(|&u| ro.iter().any(|&x| !edges.contains(&(u, x))));
        if !lo.is_empty() && !completable {
            return None;
        }
        left = lo;
        right = ro;
    }
    None
}

/// Random 2-lift: each edge independently lifts to the parallel or crossing pair.
pub fn two_lift(g: &BiasedGraph, seed: u64) -> Result<BiasedGraph> {
    let mut rng = rng_from_seed(seed);
    two_lift_with(g, |_| rng.random_bool(0.5))
}

/// 2-lift with caller-chosen crossings; `crossing(edge)` is called once per
/// edge in ascending order. Vertex `v` has copies `v` and `v + n`.
pub fn two_lift_with(
    g: &BiasedGraph,
    mut crossing: impl FnMut(super::Edge) -> bool,
) -> Result<BiasedGraph> {
    let n = g.n();
    let mut b = GraphBuilder::new(2 * n);
    for e in g.edges() {
        if crossing(e) {
            b.add_edge(e.u, e.v + n, e.value)?;
            b.add_edge(e.u + n, e.v, e.value)?;
        } else {
            b.add_edge(e.u, e.v, e.value)?;
            b.add_edge(e.u + n, e.v + n, e.value)?;
        }
    }
    for (i, &x) in g.diagonal().iter().enumerate() {
        b.set_diagonal(i, x).set_diagonal(i + n, x);
    }
    if let Some(labels) = g.labels() {
        for (name, block) in labels {
            let lifted = block.iter().copied().chain(block.iter().map(|v| v + n)).collect();
            b.add_label(name.clone(), lifted);
        }
    }
    b.build()
}
