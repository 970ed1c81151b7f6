//! Deterministic run-directory writer.
//!
//! Every data file is written with fixed float formatting (`{:.17e}`) and a
//! fixed row order, so identical configs produce byte-identical data files
//! regardless of thread count. The wall-clock timestamp appears only in
//! `summary.json`.

use std::path::{Path, PathBuf};

use anyhow::Context;
use serde_json::Value;

pub struct RunDir {
    dir: PathBuf,
}

impl RunDir {
    pub fn create(dir: &Path) -> anyhow::Result<Self> {
        std::fs::create_dir_all(dir)
            .with_context(|| format!("cannot create output directory {}", dir.display()))?;
        Ok(RunDir { dir: dir.to_path_buf() })
    }

    pub fn path(&self, name: &str) -> PathBuf {
        self.dir.join(name)
    }

    pub fn write_text(&self, name: &str, content: &str) -> anyhow::Result<()> {
        let path = self.path(name);
        std::fs::write(&path, content).with_context(|| format!("cannot write {}", path.display()))?;
        Ok(())
    }

    /// CSV with a header line and pre-rendered rows.
    pub fn write_csv(&self, name: &str, header: &str, rows: &[String]) -> anyhow::Result<()> {
        let mut out = String::with_capacity(header.len() + 1 + rows.iter().map(|r| r.len() + 1).sum::<usize>());
        out.push_str(header);
        out.push('\n');
        for r in rows {
            out.push_str(r);
            out.push('\n');
        }
        self.write_text(name, &out)
    }

    /// `summary.json` with the timestamp added at write time (the only
    /// wall-clock item in a run directory).
    pub fn write_summary(&self, mut summary: Value) -> anyhow::Result<()> {
        let ts = std::time::SystemTime::now()
            .duration_since(std::time::UNIX_EPOCH)
            .map(|d| d.as_secs())
            .unwrap_or(0);
        if let Value::Object(map) = &mut summary {
            map.insert("timestamp_unix".into(), Value::from(ts));
        }
        self.write_text("summary.json", &format!("{:#}\n", summary))
    }
}

pub fn f(x: f64) -> String {
    format!("{x:.17e}")
}
