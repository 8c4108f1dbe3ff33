use std::io::Write;

use anyhow::Result;
use qllab_core::expander::{cheeger_bounds, isoperimetric_exact, MAX_EXACT_VERTICES};
use qllab_core::fmt::g12;
use qllab_core::graph::GraphGenSpec;
use qllab_core::rng::derive_seed;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::{config_error, Resolved};
use crate::output::Outputs;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CheegerParams {
    pub graphs: Vec<GraphGenSpec>,
}

#[derive(Debug, Serialize)]
struct Entry {
    n: usize,
    /// Exact value; absent above the enumeration limit.
    h: Option<f64>,
    subset: Option<Vec<usize>>,
    boundary: Option<usize>,
    lower_bound: Option<f64>,
    upper_bound: Option<f64>,
    sandwich_holds: Option<bool>,
}

pub fn run(r: Resolved<CheegerParams>) -> Result<()> {
    let p = &r.params;
    if p.graphs.is_empty() {
        return Err(config_error("at `params.graphs`: need at least one graph"));
    }
    let entries = p
        .graphs
        .par_iter()
        .enumerate()
        .map(|(i, spec)| {
            let g = spec.reseeded(derive_seed(r.seed, i as u64)).generate()?;
            let (lower_bound, upper_bound) = match cheeger_bounds(&g, spec.degree()) {
                Ok((l, u)) => (Some(l), Some(u)),
                Err(qllab_core::Error::NotRegular { .. }) => (None, None),
                Err(e) => return Err(e),
            };
            let exact = if g.n() <= MAX_EXACT_VERTICES { Some(isoperimetric_exact(&g)?) } else { None };
            let h = exact.as_ref().map(|x| x.h);
            let sandwich_holds = match (h, lower_bound, upper_bound) {
                (Some(h), Some(l), Some(u)) => Some(l <= h + 1e-9 && h <= u + 1e-9),
                _ => None,
            };
            Ok(Entry {
                n: g.n(),
                h,
                subset: exact.as_ref().map(|x| x.subset.clone()),
                boundary: exact.map(|x| x.boundary),
                lower_bound,
                upper_bound,
                sandwich_holds,
            })
        })
        .collect::<qllab_core::Result<Vec<_>>>()?;

    let opt = |x: Option<f64>| x.map(g12).unwrap_or_default();
    let mut out = Outputs::create(&r.out)?;
    out.write("cheeger.csv", |w| {
        writeln!(w, "graph,n,h,lower,upper")?;
        for (i, e) in entries.iter().enumerate() {
            writeln!(w, "{i},{},{},{},{}", e.n, opt(e.h), opt(e.lower_bound), opt(e.upper_bound))?;
        }
        Ok(())
    })?;
    out.json("report.json", &entries)?;
    out.finish("cheeger", r.seed, p)?;
    for (i, e) in entries.iter().enumerate() {
        let h = e.h.map(g12).unwrap_or_else(|| "n/a".into());
        println!("graph {i}: n = {} h = {h} bounds [{}, {}]", e.n, opt(e.lower_bound), opt(e.upper_bound));
    }
    Ok(())
}
