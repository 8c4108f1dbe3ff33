use std::io::{Read, Write};
use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{BiasedGraph, GraphBuilder, Labels};
use crate::error::Result;

/// On-disk graph representation: `{n, edges: [[u, v, re, im], ...], diagonal, labels}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GraphFile {
    pub n: usize,
    pub edges: Vec<(usize, usize, f64, f64)>,
    #[serde(default)]
    pub diagonal: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub labels: Option<Labels>,
}

impl From<&BiasedGraph> for GraphFile {
    fn from(g: &BiasedGraph) -> Self {
        Self {
            n: g.n(),
            edges: g.edges().map(|e| (e.u, e.v, e.value.re, e.value.im)).collect(),
            diagonal: g.diagonal().to_vec(),
            labels: g.labels().cloned(),
        }
    }
}

impl TryFrom<GraphFile> for BiasedGraph {
    type Error = crate::Error;

    fn try_from(f: GraphFile) -> Result<Self> {
        let mut b = GraphBuilder::new(f.n);
        for (u, v, re, im) in f.edges {
            b.add_edge(u, v, Complex64::new(re, im))?;
        }
        let g = b.build()?;
        let g = if f.diagonal.is_empty() { g } else { g.with_diagonal(f.diagonal)? };
        g.with_labels(f.labels)
    }
}

impl BiasedGraph {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(&GraphFile::from(self))?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        serde_json::from_str::<GraphFile>(s)?.try_into()
    }

    pub fn write_json(&self, mut w: impl Write) -> Result<()> {
        serde_json::to_writer_pretty(&mut w, &GraphFile::from(self))?;
        w.write_all(b"\n")?;
        Ok(())
    }

    pub fn read_json(r: impl Read) -> Result<Self> {
        serde_json::from_reader::<_, GraphFile>(r)?.try_into()
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let f = std::io::BufWriter::new(std::fs::File::create(path)?);
        self.write_json(f)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::read_json(std::io::BufReader::new(std::fs::File::open(path)?))
    }
}
