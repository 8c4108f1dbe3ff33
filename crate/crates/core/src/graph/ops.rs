use rand::seq::index::sample;
use rand_distr::{Distribution, Normal};

use super::{BiasedGraph, GraphBuilder, Labels};
use crate::error::{Error, Result};
use crate::rng::rng_from_seed;

/// Removes exactly `round(fraction * m)` edges chosen uniformly without replacement.
pub fn delete_random_edges(g: &BiasedGraph, fraction: f64, seed: u64) -> Result<BiasedGraph> {
    if !(0.0..=1.0).contains(&fraction) {
        return Err(Error::InvalidArgument(format!("deletion fraction {fraction} outside [0, 1]")));
    }
    let m = g.edge_count();
    let k = (fraction * m as f64).round() as usize;
    let mut rng = rng_from_seed(seed);
    let mut doomed = vec![false; m];
    for i in sample(&mut rng, m, k) {
        doomed[i] = true;
    }
    let mut out = g.clone();
    out.edges = g
        .edges()
        .zip(doomed)
        .filter(|(_, d)| !d)
        .map(|(e, _)| ((e.u, e.v), e.value))
        .collect();
    Ok(out)
}

/// Adds an independent `N(0, sigma^2)` draw to every diagonal entry, in vertex order.
pub fn add_diagonal_disorder(g: &BiasedGraph, sigma: f64, seed: u64) -> Result<BiasedGraph> {
    if !(sigma >= 0.0 && sigma.is_finite()) {
        return Err(Error::InvalidArgument(format!("disorder width {sigma} must be finite and >= 0")));
    }
    if sigma == 0.0 {
        return Ok(g.clone());
    }
    let normal = Normal::new(0.0, sigma).expect("validated width");
    let mut rng = rng_from_seed(seed);
    let mut out = g.clone();
    for d in &mut out.diagonal {
        *d += normal.sample(&mut rng);
    }
    Ok(out)
}

/// `2m / n`, ignoring edge magnitudes.
pub fn average_degree(g: &BiasedGraph) -> f64 {
    if g.n() == 0 {
        return 0.0;
    }
    2.0 * g.edge_count() as f64 / g.n() as f64
}

/// Errors with the first vertex whose degree differs from `d`.
pub fn check_regular(g: &BiasedGraph, d: usize) -> Result<()> {
    match g.degrees().into_iter().enumerate().find(|&(_, k)| k != d) {
        Some((vertex, degree)) => Err(Error::NotRegular { d, vertex, degree }),
        None => Ok(()),
    }
}

/// Relabels vertex `v` as `perm[v]`.
pub fn permute_vertices(g: &BiasedGraph, perm: &[usize]) -> Result<BiasedGraph> {
    let n = g.n();
    let mut seen = vec![false; n];
    if perm.len() != n || perm.iter().any(|&p| p >= n || std::mem::replace(&mut seen[p], true)) {
        return Err(Error::InvalidArgument("not a permutation of the vertex set".into()));
    }
    let mut b = GraphBuilder::new(n);
    for e in g.edges() {
        b.add_edge(perm[e.u], perm[e.v], e.value)?;
    }
    for (v, &x) in g.diagonal().iter().enumerate() {
        b.set_diagonal(perm[v], x);
    }
    if let Some(labels) = g.labels() {
        for (name, block) in labels {
            b.add_label(name.clone(), block.iter().map(|&v| perm[v]).collect());
        }
    }
    b.build()
}

/// Places `h` after `g`. Labels are kept only when both parts are labeled with distinct names.
pub fn disjoint_union(g: &BiasedGraph, h: &BiasedGraph) -> Result<BiasedGraph> {
    let off = g.n();
    let mut b = GraphBuilder::new(off + h.n());
    for e in g.edges() {
        b.add_edge(e.u, e.v, e.value)?;
    }
    for e in h.edges() {
        b.add_edge(e.u + off, e.v + off, e.value)?;
    }
    for (v, &x) in g.diagonal().iter().chain(h.diagonal()).enumerate() {
        b.set_diagonal(v, x);
    }
    if let (Some(lg), Some(lh)) = (g.labels(), h.labels()) {
        if lg.keys().all(|k| !lh.contains_key(k)) {
            let mut labels: Labels = lg.clone();
            for (name, block) in lh {
                labels.insert(name.clone(), block.iter().map(|v| v + off).collect());
            }
            for (name, block) in labels {
                b.add_label(name, block);
            }
        }
    }
    b.build()
}
