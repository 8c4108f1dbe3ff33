use std::io::Write;

use anyhow::Result;
use qllab_core::fmt::g12;
use qllab_core::qlbit::{apply_bias_topology, build_qlbit, build_regular_qlbit, project_two_state, row_fidelity};
use qllab_core::rng::derive_seed;
use qllab_core::spectral::{eigendecompose, emergent_state};
use qllab_core::{EmergentPolicy, QlBitSpec, TableOneRow};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::{config_error, Resolved};
use crate::output::Outputs;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QlBitParams {
    #[serde(default = "default_spec")]
    pub spec: QlBitSpec,
    #[serde(default = "default_realizations")]
    pub realizations: usize,
    #[serde(default)]
    pub policy: EmergentPolicy,
    /// Also evaluate the six reference bias rows on exactly regular bits.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub table_one: Option<TableOneParams>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TableOneParams {
    pub n_per_side: usize,
    pub d: usize,
    #[serde(default = "one")]
    pub cross_degree: usize,
    #[serde(default = "ten")]
    pub realizations: usize,
}

fn default_spec() -> QlBitSpec {
    QlBitSpec::regular(50, 10, 0)
}

fn default_realizations() -> usize {
    100
}

fn one() -> usize {
    1
}

fn ten() -> usize {
    10
}

struct Row {
    eigenvalue: f64,
    alpha: qllab_core::Complex64,
    beta: qllab_core::Complex64,
    residual: f64,
}

pub fn run(r: Resolved<QlBitParams>) -> Result<()> {
    let p = &r.params;
    p.spec.validate().map_err(|e| config_error(format!("at `params.spec`: {e}")))?;
    if p.realizations == 0 {
        return Err(config_error("at `params.realizations`: must be at least 1"));
    }
    let rows = (0..p.realizations as u64)
        .into_par_iter()
        .map(|i| {
            let g = build_qlbit(&p.spec.reseeded(derive_seed(r.seed, i)))?;
            let em = emergent_state(&eigendecompose(&g)?, p.policy);
            let two = project_two_state(&g, &em.vector)?;
            Ok(Row { eigenvalue: em.eigenvalue, alpha: two.alpha, beta: two.beta, residual: two.residual })
        })
        .collect::<qllab_core::Result<Vec<_>>>()?;

    let mut out = Outputs::create(&r.out)?;
    out.write("qlbit.csv", |w| {
        writeln!(w, "realization,eigenvalue,alpha_re,alpha_im,beta_re,beta_im,residual")?;
        for (i, x) in rows.iter().enumerate() {
            let v = [x.eigenvalue, x.alpha.re, x.alpha.im, x.beta.re, x.beta.im, x.residual].map(g12);
            writeln!(w, "{i},{}", v.join(","))?;
        }
        Ok(())
    })?;
    let count = rows.len() as f64;
    println!("mean eigenvalue {}", g12(rows.iter().map(|x| x.eigenvalue).sum::<f64>() / count));
    println!("mean |alpha| {}", g12(rows.iter().map(|x| x.alpha.norm()).sum::<f64>() / count));
    println!("mean |beta| {}", g12(rows.iter().map(|x| x.beta.norm()).sum::<f64>() / count));

    if let Some(t) = &p.table_one {
        if t.realizations == 0 {
            return Err(config_error("at `params.table_one.realizations`: must be at least 1"));
        }
        let refs = TableOneRow::reference_rows();
        let cells = (0..t.realizations as u64)
            .into_par_iter()
            .map(|i| {
                let base = build_regular_qlbit(t.n_per_side, t.d, t.cross_degree, derive_seed(derive_seed(r.seed, 1 << 32), i))?;
                refs.iter()
                    .map(|row| {
                        let g = apply_bias_topology(&base, row.row)?;
                        row_fidelity(&g, row.state, EmergentPolicy::HighestMagnitude)
                    })
                    .collect::<qllab_core::Result<Vec<_>>>()
            })
            .collect::<qllab_core::Result<Vec<_>>>()?;
        out.write("table_one.csv", |w| {
            writeln!(w, "row,realization,eigenvalue,fidelity")?;
            for (k, row) in refs.iter().enumerate() {
                for (i, c) in cells.iter().enumerate() {
                    writeln!(w, "{},{i},{},{}", row.name, g12(c[k].0), g12(c[k].1))?;
                }
            }
            Ok(())
        })?;
        for (k, row) in refs.iter().enumerate() {
            let n = cells.len() as f64;
            let eig = cells.iter().map(|c| c[k].0).sum::<f64>() / n;
            let fid = cells.iter().map(|c| c[k].1).sum::<f64>() / n;
            println!("row {}: eigenvalue {} fidelity {}", row.name, g12(eig), g12(fid));
        }
    }
    out.finish("qlbit", r.seed, p)?;
    Ok(())
}
