//! Exact isoperimetric constants and the spectral Cheeger sandwich.
//!
//! `h(G) = min |∂Y| / |Y|` over nonempty `Y` with `|Y| <= n/2`, where `∂Y`
//! counts edges with exactly one endpoint in `Y`. Edge values are ignored;
//! only the edge pattern matters here.

use std::cmp::Ordering;
use std::io::Write;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::fmt::g12;
use crate::graph::{check_regular, BiasedGraph, GraphGenSpec};
use crate::spectral::eigendecompose;

/// Largest vertex count accepted by [`isoperimetric_exact`].
pub const MAX_EXACT_VERTICES: usize = 22;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheegerReport {
    pub h: f64,
    /// Minimizing subset, sorted.
    pub subset: Vec<usize>,
    pub boundary: usize,
    /// `(d - λ1)/2`, present when the graph is regular.
    pub lower_bound: Option<f64>,
    /// `sqrt(2d(d - λ1))`, present when the graph is regular.
    pub upper_bound: Option<f64>,
}

impl CheegerReport {
    /// True when both bounds exist and `lower <= h <= upper` (with `1e-9` slack).
    pub fn sandwich_holds(&self) -> Option<bool> {
        Some(self.lower_bound? <= self.h + 1e-9 && self.h <= self.upper_bound? + 1e-9)
    }
}

/// Candidate minimizer: boundary, size and membership mask.
#[derive(Debug, Clone, Copy)]
struct Candidate {
    boundary: u64,
    size: u64,
    mask: u32,
}

impl Candidate {
    /// Ratio first, then size, then the lexicographically smaller sorted list.
    fn cmp(&self, o: &Self) -> Ordering {
        (self.boundary * o.size)
            .cmp(&(o.boundary * self.size))
            .then(self.size.cmp(&o.size))
            .then_with(|| {
                let diff = self.mask ^ o.mask;
                if diff == 0 {
                    Ordering::Equal
                } else if self.mask & (diff & diff.wrapping_neg()) != 0 {
                    Ordering::Less
                } else {
                    Ordering::Greater
                }
            })
    }

    fn better(a: Option<Self>, b: Option<Self>) -> Option<Self> {
        match (a, b) {
            (Some(x), Some(y)) => Some(if y.cmp(&x) == Ordering::Less { y } else { x }),
            (x, None) => x,
            (None, y) => y,
        }
    }
}

fn neighbor_masks(g: &BiasedGraph) -> Vec<u32> {
    let mut masks = vec![0u32; g.n()];
    for e in g.edges() {
        masks[e.u] |= 1 << e.v;
        masks[e.v] |= 1 << e.u;
    }
    masks
}

/// Number of edges leaving `subset`.
pub fn boundary_size(g: &BiasedGraph, subset: &[usize]) -> usize {
    let mut inside = vec![false; g.n()];
    subset.iter().for_each(|&v| inside[v] = true);
    g.edges().filter(|e| inside[e.u] != inside[e.v]).count()
}

/// Brute-force `h(G)` for `n <= 22`.
///
/// Subsets of the first `n-1` vertices are visited in Gray-code order with an
/// O(1) boundary update per step; each subset stands for itself or its
/// complement, whichever has at most `n/2` vertices. The top bits are split
/// into prefixes that run in parallel and are merged by min-reduction.
/// Disconnected graphs come out with `h = 0`.
pub fn isoperimetric_exact(g: &BiasedGraph) -> Result<CheegerReport> {
    let n = g.n();
    if n > MAX_EXACT_VERTICES {
        return Err(Error::TooLarge { n, max: MAX_EXACT_VERTICES });
    }
    if n < 2 {
        return Err(Error::InvalidArgument(format!("isoperimetric constant needs n >= 2, got {n}")));
    }
    let nbr = neighbor_masks(g);
    let deg: Vec<u64> = nbr.iter().map(|m| u64::from(m.count_ones())).collect();
    let free = n - 1;
    let prefix_bits = free.min(6);
    let low_bits = free - prefix_bits;
    let full = (1u32 << n) - 1;
    let half = (n / 2) as u64;

    let consider = |best: &mut Option<Candidate>, mask: u32, boundary: u64| {
        let size = u64::from(mask.count_ones());
        for (m, s) in [(mask, size), (full & !mask, n as u64 - size)] {
            if s > 0 && s <= half {
                *best = Candidate::better(*best, Some(Candidate { boundary, size: s, mask: m }));
            }
        }
    };

    let best = (0u32..1 << prefix_bits)
        .into_par_iter()
        .map(|prefix| {
            let mut mask = prefix << low_bits;
            let mut boundary: u64 = (0..n)
                .filter(|&v| mask >> v & 1 == 1)
                .map(|v| u64::from((nbr[v] & !mask).count_ones()))
                .sum();
            let mut best = None;
            consider(&mut best, mask, boundary);
            for step in 1u32..1 << low_bits {
                let v = step.trailing_zeros() as usize;
                let inside = u64::from((nbr[v] & mask).count_ones());
                if mask >> v & 1 == 0 {
                    boundary = boundary + deg[v] - 2 * inside;
                } else {
                    boundary = boundary + 2 * inside - deg[v];
                }
                mask ^= 1 << v;
                consider(&mut best, mask, boundary);
            }
            best
        })
        .reduce(|| None, Candidate::better)
        .expect("n >= 2 has a nonempty half-size subset");

    let subset: Vec<usize> = (0..n).filter(|&v| best.mask >> v & 1 == 1).collect();
    let d = deg[0] as usize;
    let (lower_bound, upper_bound) = match cheeger_bounds(g, d) {
        Ok((l, u)) => (Some(l), Some(u)),
        Err(_) => (None, None),
    };
    Ok(CheegerReport {
        h: best.boundary as f64 / best.size as f64,
        subset,
        boundary: best.boundary as usize,
        lower_bound,
        upper_bound,
    })
}

/// `((d - λ1)/2, sqrt(2d(d - λ1)))` for a `d`-regular graph.
///
/// `λ1` is the second-largest eigenvalue of the 0/1 adjacency pattern.
pub fn cheeger_bounds(g: &BiasedGraph, d: usize) -> Result<(f64, f64)> {
    check_regular(g, d)?;
    let pattern = g.map_edges(|_| Complex64::new(1.0, 0.0));
    let spec = eigendecompose(&pattern)?;
    if spec.len() < 2 {
        return Err(Error::InvalidArgument("Cheeger bounds need at least two vertices".into()));
    }
    let d = d as f64;
    let gap = (d - spec.eigenvalue(1)).max(0.0);
    Ok((gap / 2.0, (2.0 * d * gap).sqrt()))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProfileRow {
    pub n: usize,
    /// Exact `h`, or the Cheeger lower bound when `is_exact` is false.
    pub h: f64,
    pub lower: f64,
    pub upper: f64,
    pub is_exact: bool,
}

/// One row per graph; exact `h` up to 22 vertices, the lower bound beyond.
pub fn expansion_profile(family: &[GraphGenSpec]) -> Result<Vec<ProfileRow>> {
    family
        .par_iter()
        .map(|spec| {
            let g = spec.generate()?;
            let (lower, upper) = cheeger_bounds(&g, spec.degree())?;
            let is_exact = g.n() <= MAX_EXACT_VERTICES;
            let h = if is_exact { isoperimetric_exact(&g)?.h } else { lower };
            Ok(ProfileRow { n: g.n(), h, lower, upper, is_exact })
        })
        .collect()
}

/// CSV with header `n,h,lower,upper,is_exact`.
pub fn write_profile_csv(rows: &[ProfileRow], mut w: impl Write) -> Result<()> {
    writeln!(w, "n,h,lower,upper,is_exact")?;
    for r in rows {
        writeln!(w, "{},{},{},{},{}", r.n, g12(r.h), g12(r.lower), g12(r.upper), r.is_exact)?;
    }
    Ok(())
}
