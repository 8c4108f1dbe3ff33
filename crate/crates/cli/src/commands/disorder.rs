use anyhow::Result;
use qllab_core::fmt::g12;
use qllab_core::spectral::{disorder_sweep, write_disorder_csv};
use serde::{Deserialize, Serialize};

use crate::config::{config_error, Resolved};
use crate::output::Outputs;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DisorderParams {
    #[serde(default = "default_n")]
    pub n: usize,
    #[serde(default = "default_d")]
    pub d: usize,
    #[serde(default = "default_retentions")]
    pub retentions: Vec<f64>,
    #[serde(default = "default_realizations")]
    pub realizations: usize,
}

fn default_n() -> usize {
    400
}

fn default_d() -> usize {
    10
}

fn default_retentions() -> Vec<f64> {
    vec![1.0, 0.9, 0.75, 0.5, 0.3, 0.1, 0.05]
}

fn default_realizations() -> usize {
    50
}

pub fn run(r: Resolved<DisorderParams>) -> Result<()> {
    let p = &r.params;
    if p.retentions.is_empty() || p.retentions.iter().any(|x| !(0.0..=1.0).contains(x)) {
        return Err(config_error("at `params.retentions`: need a nonempty list of fractions in [0, 1]"));
    }
    if p.realizations == 0 {
        return Err(config_error("at `params.realizations`: must be at least 1"));
    }
    if p.d >= p.n || p.n * p.d % 2 == 1 {
        return Err(config_error(format!("at `params.d`: no {}-regular graph on {} vertices", p.d, p.n)));
    }
    let points = disorder_sweep(p.n, p.d, &p.retentions, p.realizations, r.seed)?;
    let mut out = Outputs::create(&r.out)?;
    out.write("disorder_sweep.csv", |w| Ok(write_disorder_csv(&points, w)?))?;
    out.finish("disorder-sweep", r.seed, p)?;
    for pt in &points {
        println!(
            "retention {} purity {} mean eigenvalue {} mean degree {}",
            g12(pt.retention),
            g12(pt.purity),
            g12(pt.mean_eigenvalue),
            g12(pt.mean_degree)
        );
    }
    Ok(())
}
