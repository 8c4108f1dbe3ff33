use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde::Serialize;

/// Owns the output directory of one run and records what was written.
pub struct Outputs {
    dir: PathBuf,
    files: Vec<String>,
}

impl Outputs {
    pub fn create(dir: &Path) -> Result<Self> {
        std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
        Ok(Self { dir: dir.to_path_buf(), files: Vec::new() })
    }

    /// Opens `name` for writing, hands it to `body`, and flushes it.
    pub fn write<F>(&mut self, name: &str, body: F) -> Result<()>
    where
        F: FnOnce(&mut BufWriter<File>) -> Result<()>,
    {
        let path = self.dir.join(name);
        let mut w = BufWriter::new(File::create(&path).with_context(|| format!("creating {}", path.display()))?);
        body(&mut w)?;
        w.flush()?;
        self.files.push(name.to_string());
        Ok(())
    }

    pub fn json(&mut self, name: &str, value: &impl Serialize) -> Result<()> {
        self.write(name, |w| {
            serde_json::to_writer_pretty(&mut *w, value)?;
            writeln!(w)?;
            Ok(())
        })
    }

    /// Writes `manifest.json` listing the config, tool version, seed and outputs.
    pub fn finish(mut self, experiment: &str, seed: u64, config: &impl Serialize) -> Result<()> {
        #[derive(Serialize)]
        struct Manifest<'a, C> {
            tool: &'a str,
            version: &'a str,
            experiment: &'a str,
            seed: u64,
            config: &'a C,
            outputs: &'a [String],
        }
        let files = self.files.clone();
        let manifest = Manifest {
            tool: env!("CARGO_PKG_NAME"),
            version: env!("CARGO_PKG_VERSION"),
            experiment,
            seed,
            config,
            outputs: &files,
        };
        self.json("manifest.json", &manifest)
    }
}
