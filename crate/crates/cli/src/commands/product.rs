use std::io::Write;

use anyhow::Result;
use qllab_core::fmt::g12;
use qllab_core::product::{apply_detuning, build_product, emergent_product_states, verify_spectrum_composition};
use qllab_core::rng::derive_seed;
use qllab_core::spectral::eigendecompose;
use qllab_core::state::{degenerate_mixture, density_from_state};
use qllab_core::{Bias, ConnectPolicy, DensityMatrix, DetuningRule, ProductBasis, ProductSpec, QlBitSpec};
use serde::{Deserialize, Serialize};

use super::source::GraphSource;
use crate::config::{config_error, Resolved};
use crate::output::Outputs;

/// Tolerance of the composition check.
const COMPOSITION_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProductParams {
    #[serde(default = "default_spec")]
    pub spec: ProductSpec,
    /// Number of emergent states to report; defaults to `2^q`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub states: Option<usize>,
    /// Eigenvalue window for a degenerate-cluster density matrix.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mixture_window: Option<(f64, f64)>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub detuning: Option<Detuning>,
    /// Run the composition check on these two graphs.
    #[serde(default)]
    pub verify: bool,
    #[serde(default = "default_pair")]
    pub verify_pair: (GraphSource, GraphSource),
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Detuning {
    pub omega1: f64,
    pub omega2: f64,
    #[serde(default)]
    pub rule: DetuningRule,
}

/// Two-bit contracted product with exactly regular cross edges.
fn default_spec() -> ProductSpec {
    let bit = |s| QlBitSpec::regular(50, 20, s).with_connect(ConnectPolicy::RegularDegree(2), Bias::PLUS);
    ProductSpec::contracted(vec![bit(1), bit(2)], 50, 20, 3)
}

fn default_pair() -> (GraphSource, GraphSource) {
    (GraphSource::default(), GraphSource::default())
}

#[derive(Serialize)]
struct Mixture {
    window: (f64, f64),
    purity: f64,
    concurrence: Option<f64>,
    matrix: DensityMatrix,
}

#[derive(Serialize)]
struct Summary {
    vertices: usize,
    edges: usize,
    top_eigenvalues: Vec<f64>,
    /// Concurrence of the top effective state when the product has two bits.
    emergent_concurrence: Option<f64>,
    mixture: Option<Mixture>,
}

pub fn run(r: Resolved<ProductParams>, verify_flag: bool) -> Result<()> {
    let p = &r.params;
    for b in &p.spec.qlbits {
        b.validate().map_err(|e| config_error(format!("at `params.spec.qlbits`: {e}")))?;
    }
    let q = p.spec.q();
    if q == 0 {
        return Err(config_error("at `params.spec.qlbits`: need at least one QL bit"));
    }
    let mut out = Outputs::create(&r.out)?;

    if verify_flag || p.verify {
        p.verify_pair.0.preflight()?;
        p.verify_pair.1.preflight()?;
        let g = p.verify_pair.0.build(derive_seed(r.seed, 10))?;
        let h = p.verify_pair.1.build(derive_seed(r.seed, 11))?;
        let rep = verify_spectrum_composition(&g, &h, COMPOSITION_TOL, derive_seed(r.seed, 12))?;
        out.json("composition.json", &rep)?;
        if !rep.holds {
            anyhow::bail!(
                "spectrum composition FAILED: eigenvalue error {:e}, residual {:e}",
                rep.max_eigenvalue_error,
                rep.max_residual
            );
        }
        println!(
            "spectrum composition OK (eigenvalue error {:.1e}, residual {:.1e})",
            rep.max_eigenvalue_error, rep.max_residual
        );
    }

    let mut g = build_product(&p.spec.reseeded(derive_seed(r.seed, 0)))?;
    if let Some(d) = p.detuning {
        g = apply_detuning(&g, d.omega1, d.omega2, d.rule)?;
    }
    let basis = ProductBasis::from_graph(&g)?;
    let spec = eigendecompose(&g)?;
    let count = p.states.unwrap_or(basis.dim()).min(spec.len());
    let states = emergent_product_states(&g, &spec, count)?;

    out.write("product_states.csv", |w| {
        let names: Vec<String> = (0..basis.dim()).map(|k| basis.label(k).name()).collect();
        let cols: Vec<String> = names.iter().flat_map(|n| [format!("{n}_re"), format!("{n}_im")]).collect();
        writeln!(w, "rank,eigenvalue,residual,{}", cols.join(","))?;
        for (i, (lambda, st)) in states.iter().enumerate() {
            let cs: Vec<String> = st.coefficients.iter().flat_map(|c| [g12(c.re), g12(c.im)]).collect();
            writeln!(w, "{i},{},{},{}", g12(*lambda), g12(st.residual), cs.join(","))?;
        }
        Ok(())
    })?;

    let emergent_concurrence = match q {
        2 => {
            let top = basis.project(&spec.eigenvector(0))?.normalized()?;
            Some(density_from_state(&top)?.concurrence()?)
        }
        _ => None,
    };
    let mixture = match p.mixture_window {
        Some(window) => {
            let rho = degenerate_mixture(&g, &spec, window)?;
            let concurrence = if rho.dim() == 4 { Some(rho.concurrence()?) } else { None };
            Some(Mixture { window, purity: rho.purity(), concurrence, matrix: rho })
        }
        None => None,
    };
    let summary = Summary {
        vertices: g.n(),
        edges: g.edge_count(),
        top_eigenvalues: spec.eigenvalues().iter().take(basis.dim()).copied().collect(),
        emergent_concurrence,
        mixture,
    };
    out.json("summary.json", &summary)?;
    out.finish("product", r.seed, p)?;

    println!("vertices {}, edges {}", summary.vertices, summary.edges);
    for (lambda, st) in &states {
        let cs: Vec<String> = st.coefficients.iter().map(|c| format!("{:+.3}{:+.3}i", c.re, c.im)).collect();
        println!("eigenvalue {} state [{}] residual {:.3}", g12(*lambda), cs.join(", "), st.residual);
    }
    if let Some(c) = summary.emergent_concurrence {
        println!("emergent concurrence {}", g12(c));
    }
    if let Some(m) = &summary.mixture {
        println!("mixture purity {}", g12(m.purity));
        if let Some(c) = m.concurrence {
            println!("mixture concurrence {}", g12(c));
        }
        print!("{}", m.matrix);
    }
    Ok(())
}
