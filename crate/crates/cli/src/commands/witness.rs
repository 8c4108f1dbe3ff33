use std::io::Write;

use anyhow::Result;
use qllab_core::fmt::g12;
use qllab_core::product::build_product;
use qllab_core::rng::derive_seed;
use qllab_core::witness::{attach_witness, witness_readout, Phase, Readout, DEFAULT_DENSITY};
use qllab_core::{ProductSpec, QlBitSpec};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::{config_error, Resolved};
use crate::output::Outputs;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WitnessParams {
    #[serde(default = "default_product")]
    pub product: ProductSpec,
    /// Its connecting bias is overwritten by `known_phase`.
    #[serde(default = "default_witness")]
    pub witness: QlBitSpec,
    #[serde(default)]
    pub target: usize,
    #[serde(default = "default_strength")]
    pub strength: f64,
    /// Edges per coupling group as a fraction of the block size.
    #[serde(default = "default_density")]
    pub density: f64,
    #[serde(default = "default_phase")]
    pub known_phase: Phase,
    #[serde(default = "default_trials")]
    pub trials: usize,
}

fn default_product() -> ProductSpec {
    let bit = QlBitSpec::regular(16, 8, 0);
    ProductSpec::contracted(vec![bit.clone(), bit.reseeded(1)], 16, 8, 2)
}

fn default_witness() -> QlBitSpec {
    QlBitSpec::regular(16, 8, 3)
}

fn default_strength() -> f64 {
    0.1
}

fn default_density() -> f64 {
    DEFAULT_DENSITY
}

fn default_phase() -> Phase {
    Phase::Plus
}

fn default_trials() -> usize {
    50
}

#[derive(Serialize)]
struct Summary {
    trials: usize,
    same: usize,
    inverted: usize,
    ambiguous: usize,
}

pub fn run(r: Resolved<WitnessParams>) -> Result<()> {
    let p = &r.params;
    p.witness.validate().map_err(|e| config_error(format!("at `params.witness`: {e}")))?;
    for b in &p.product.qlbits {
        b.validate().map_err(|e| config_error(format!("at `params.product.qlbits`: {e}")))?;
    }
    if p.target >= p.product.q() {
        return Err(config_error(format!("at `params.target`: product has {} QL bits", p.product.q())));
    }
    if !(p.strength >= 0.0 && p.density >= 0.0) {
        return Err(config_error("at `params.strength`: strength and density must be non-negative"));
    }
    let witness = p.witness.clone().with_connect(p.witness.connect, p.known_phase.bias());

    let rows = (0..p.trials as u64)
        .into_par_iter()
        .map(|t| {
            let s = derive_seed(r.seed, t);
            let product = build_product(&p.product.reseeded(derive_seed(s, 0)))?;
            let att = attach_witness(&product, &witness.reseeded(derive_seed(s, 1)), p.target, p.strength, p.density, derive_seed(s, 2))?;
            let (x1, x2) = att.witness_projections()?;
            let readout = match witness_readout(&att, p.known_phase) {
                Ok(Readout::Same) => "same",
                Ok(Readout::Inverted) => "inverted",
                Err(qllab_core::Error::AmbiguousReadout { .. }) => "ambiguous",
                Err(e) => return Err(e),
            };
            Ok((x1, x2, readout))
        })
        .collect::<qllab_core::Result<Vec<_>>>()?;

    let count = |k: &str| rows.iter().filter(|r| r.2 == k).count();
    let summary = Summary { trials: p.trials, same: count("same"), inverted: count("inverted"), ambiguous: count("ambiguous") };
    let mut out = Outputs::create(&r.out)?;
    out.write("witness.csv", |w| {
        writeln!(w, "trial,x1,x2,readout")?;
        for (t, (x1, x2, readout)) in rows.iter().enumerate() {
            writeln!(w, "{t},{},{},{readout}", g12(*x1), g12(*x2))?;
        }
        Ok(())
    })?;
    out.json("summary.json", &summary)?;
    out.finish("witness", r.seed, p)?;
    println!("same {} inverted {} ambiguous {} of {}", summary.same, summary.inverted, summary.ambiguous, summary.trials);
    Ok(())
}
