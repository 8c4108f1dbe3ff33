use std::path::PathBuf;

use qllab_core::graph::{cycle, GraphGenSpec};
use qllab_core::product::{build_product, cartesian_power};
use qllab_core::qlbit::build_qlbit;
use qllab_core::{BiasedGraph, ProductSpec, QlBitSpec};
use serde::{Deserialize, Serialize};

use crate::config::ConfigError;

/// Where a command's graph comes from.
///
/// Seeds inside recipes are replaced by seeds derived from the run's master
/// seed, so one `--seed` controls all randomness.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum GraphSource {
    /// `depth`-fold Cartesian power of the cycle `C_n`.
    CyclePower {
        #[serde(default = "five")]
        n: usize,
        #[serde(default = "one")]
        depth: usize,
    },
    Generated {
        spec: GraphGenSpec,
    },
    Qlbit {
        spec: QlBitSpec,
    },
    Product {
        spec: ProductSpec,
    },
    /// Graph JSON file; used as is.
    File {
        path: PathBuf,
    },
}

fn five() -> usize {
    5
}

fn one() -> usize {
    1
}

impl Default for GraphSource {
    fn default() -> Self {
        Self::CyclePower { n: 5, depth: 1 }
    }
}

impl GraphSource {
    /// Rejects recipes that cannot work whatever the seed.
    pub fn preflight(&self) -> Result<(), ConfigError> {
        let err = |e: qllab_core::Error| ConfigError(format!("at `params.graph`: {e}"));
        match self {
            Self::CyclePower { .. } | Self::File { .. } => self.build(0).map(drop).map_err(err),
            Self::Generated { .. } => Ok(()),
            Self::Qlbit { spec } => spec.validate().map_err(err),
            Self::Product { spec } => spec.qlbits.iter().try_for_each(|b| b.validate()).map_err(err),
        }
    }

    pub fn build(&self, seed: u64) -> qllab_core::Result<BiasedGraph> {
        match self {
            Self::CyclePower { n, depth } => cartesian_power(&cycle(*n)?, *depth),
            Self::Generated { spec } => spec.reseeded(seed).generate(),
            Self::Qlbit { spec } => build_qlbit(&spec.reseeded(seed)),
            Self::Product { spec } => build_product(&spec.reseeded(seed)),
            Self::File { path } => BiasedGraph::load(path),
        }
    }
}
