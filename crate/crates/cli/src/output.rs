use std::fs;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use polariton_core::config::RunConfig;
use polariton_core::Result;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// CSV file whose first line is `# ` followed by the JSON run header.
pub struct Csv {
    path: PathBuf,
    out: BufWriter<fs::File>,
}

impl Csv {
    pub fn create(cfg: &RunConfig, name: &str, columns: &[String]) -> Result<Self> {
        let path = cfg.output_dir.join(name);
        let mut out = BufWriter::new(fs::File::create(&path)?);
        writeln!(out, "# {}", cfg.header(VERSION)?)?;
        writeln!(out, "{}", columns.join(","))?;
        Ok(Csv { path, out })
    }

    pub fn row(&mut self, values: &[f64]) -> Result<()> {
        let line: Vec<String> = values.iter().map(|v| v.to_string()).collect();
        writeln!(self.out, "{}", line.join(","))?;
        Ok(())
    }

    pub fn finish(mut self) -> Result<PathBuf> {
        self.out.flush()?;
        Ok(self.path)
    }
}

/// JSON-lines file with the same header convention.
pub struct Jsonl {
    path: PathBuf,
    out: BufWriter<fs::File>,
}

impl Jsonl {
    pub fn create(cfg: &RunConfig, name: &str) -> Result<Self> {
        let path = cfg.output_dir.join(name);
        let mut out = BufWriter::new(fs::File::create(&path)?);
        writeln!(out, "# {}", cfg.header(VERSION)?)?;
        Ok(Jsonl { path, out })
    }

    pub fn line(&mut self, value: &serde_json::Value) -> Result<()> {
        writeln!(self.out, "{value}")?;
        Ok(())
    }

    pub fn finish(mut self) -> Result<PathBuf> {
        self.out.flush()?;
        Ok(self.path)
    }
}

pub fn columns(names: &[&str]) -> Vec<String> {
    names.iter().map(|s| s.to_string()).collect()
}

pub fn ensure_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir)?;
    Ok(())
}
