use std::io::Write;

use anyhow::Result;
use qllab_core::fmt::g12;
use qllab_core::graph::{add_diagonal_disorder, average_degree, delete_random_edges};
use qllab_core::rng::derive_seed;
use qllab_core::spectral::{eigendecompose, ramanujan_bound, Bins};
use qllab_core::state::ensemble_purity;
use qllab_core::{DVector, Complex64, EnsembleSpectrum};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::source::GraphSource;
use crate::config::{config_error, Resolved};
use crate::output::Outputs;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpectrumParams {
    #[serde(default)]
    pub graph: GraphSource,
    #[serde(default = "one")]
    pub realizations: usize,
    /// Fraction of edges kept after random deletion.
    #[serde(default = "full")]
    pub retain: f64,
    /// Width of normal diagonal disorder.
    #[serde(default)]
    pub disorder_sigma: f64,
    #[serde(default = "default_bins")]
    pub bins: Bins,
    /// Report how many realizations meet the Ramanujan bound.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ramanujan: Option<RamanujanParams>,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RamanujanParams {
    pub d: usize,
    /// Also exclude the trivial `-d` eigenvalue.
    #[serde(default)]
    pub bipartite: bool,
}

#[derive(Serialize)]
struct RamanujanSummary {
    bound: f64,
    /// Fraction with every nontrivial `|lambda| <= 2 sqrt(d - 1)`.
    fraction: f64,
    /// Fraction with `lambda_1 <= 2 sqrt(d - 1) + 0.5`.
    fraction_within_half: f64,
}

fn one() -> usize {
    1
}

fn full() -> f64 {
    1.0
}

fn default_bins() -> Bins {
    Bins::Auto { count: 50 }
}

#[derive(Serialize)]
struct Summary {
    vertices: usize,
    realizations: usize,
    mean_degree: f64,
    mean_top_eigenvalue: f64,
    mean_second_eigenvalue: Option<f64>,
    /// `tr(ρ²)` of the equal mixture of top eigenvectors.
    emergent_purity: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    ramanujan: Option<RamanujanSummary>,
}

struct Realization {
    eigenvalues: Vec<f64>,
    top: DVector<Complex64>,
    degree: f64,
}

fn ramanujan_summary(values: &[Vec<f64>], rp: RamanujanParams) -> RamanujanSummary {
    let bound = ramanujan_bound(rp.d);
    let count = values.len() as f64;
    let ok = values
        .iter()
        .filter(|v| {
            let end = if rp.bipartite { v.len().saturating_sub(1) } else { v.len() };
            v.get(1..end).unwrap_or(&[]).iter().all(|l| l.abs() <= bound + 1e-9)
        })
        .count();
    let near = values.iter().filter(|v| v.get(1).is_none_or(|l| *l <= bound + 0.5)).count();
    RamanujanSummary { bound, fraction: ok as f64 / count, fraction_within_half: near as f64 / count }
}

pub fn run(r: Resolved<SpectrumParams>) -> Result<()> {
    let p = &r.params;
    p.graph.preflight()?;
    if p.realizations == 0 {
        return Err(config_error("at `params.realizations`: must be at least 1"));
    }
    if !(0.0..=1.0).contains(&p.retain) {
        return Err(config_error("at `params.retain`: must lie in [0, 1]"));
    }
    if !(p.disorder_sigma >= 0.0) {
        return Err(config_error("at `params.disorder_sigma`: must be non-negative"));
    }

    let runs = (0..p.realizations as u64)
        .into_par_iter()
        .map(|i| {
            let s = derive_seed(r.seed, i);
            let mut g = p.graph.build(derive_seed(s, 0))?;
            if p.retain < 1.0 {
                g = delete_random_edges(&g, 1.0 - p.retain, derive_seed(s, 1))?;
            }
            g = add_diagonal_disorder(&g, p.disorder_sigma, derive_seed(s, 2))?;
            let spec = eigendecompose(&g)?;
            Ok(Realization { eigenvalues: spec.eigenvalues().to_vec(), top: spec.eigenvector(0), degree: average_degree(&g) })
        })
        .collect::<qllab_core::Result<Vec<_>>>()?;

    let values: Vec<Vec<f64>> = runs.iter().map(|x| x.eigenvalues.clone()).collect();
    let hist = EnsembleSpectrum::from_eigenvalues(&values, p.bins, format!("{:?}", p.graph))?;
    let count = p.realizations as f64;
    let n = values[0].len();
    let summary = Summary {
        vertices: n,
        realizations: p.realizations,
        mean_degree: runs.iter().map(|x| x.degree).sum::<f64>() / count,
        mean_top_eigenvalue: values.iter().map(|v| v[0]).sum::<f64>() / count,
        mean_second_eigenvalue: (n > 1).then(|| values.iter().map(|v| v[1]).sum::<f64>() / count),
        emergent_purity: ensemble_purity(&runs.iter().map(|x| x.top.clone()).collect::<Vec<_>>())?,
        ramanujan: p.ramanujan.map(|rp| ramanujan_summary(&values, rp)),
    };

    let mut out = Outputs::create(&r.out)?;
    out.write("spectrum.csv", |w| {
        writeln!(w, "realization,index,eigenvalue")?;
        for (i, vals) in values.iter().enumerate() {
            for (k, x) in vals.iter().enumerate() {
                writeln!(w, "{i},{k},{}", g12(*x))?;
            }
        }
        Ok(())
    })?;
    out.write("histogram.csv", |w| Ok(hist.write_csv(w)?))?;
    out.json("summary.json", &summary)?;
    out.finish("spectrum", r.seed, p)?;

    println!("vertices {n}, realizations {}", p.realizations);
    println!("lambda0 = {}", g12(summary.mean_top_eigenvalue));
    if let Some(l1) = summary.mean_second_eigenvalue {
        println!("lambda1 = {}", g12(l1));
    }
    println!("mean degree = {}", g12(summary.mean_degree));
    println!("emergent purity = {}", g12(summary.emergent_purity));
    if let Some(rs) = &summary.ramanujan {
        println!("ramanujan fraction = {} (bound {})", g12(rs.fraction), g12(rs.bound));
        println!("lambda1 within bound + 0.5: {}", g12(rs.fraction_within_half));
    }
    Ok(())
}
