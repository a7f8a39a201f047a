//! Artifact directory layout.
//!
//! ```text
//! <out>/config.toml            copy of the resolved configuration
//! <out>/summary.json           results; byte-identical for identical configs
//! <out>/manifest.json          file list, CSV columns, creation time
//! <out>/series/<run>/<observer>.csv
//! <out>/snapshots/<run>/<k>.snap
//! <out>/tables/<name>.csv
//! ```
//!
//! Series CSVs start with a `t` column followed by the observer columns;
//! missing values (no crossing found) are written as `NaN`.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use roadfront::snapshot::save_snapshot;
use roadfront::{Grid, Series, State};
use serde::Serialize;

use crate::error::{HarnessError, Result};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FileEntry {
    pub path: String,
    pub format: &'static str,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub columns: Vec<String>,
}

pub struct OutputDir {
    root: PathBuf,
    files: Vec<FileEntry>,
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> HarnessError + '_ {
    move |source| HarnessError::Io {
        path: path.to_path_buf(),
        source,
    }
}

/// Keeps run identifiers usable as path components.
pub fn sanitize(id: &str) -> String {
    id.chars()
        .map(|c| match c {
            'a'..='z' | 'A'..='Z' | '0'..='9' | '.' | '-' | '_' | '=' => c,
            _ => '_',
        })
        .collect()
}

impl OutputDir {
    /// Prepares `root`. An existing non-empty directory is an error unless
    /// `force`, in which case its contents are removed.
    pub fn create(root: &Path, force: bool) -> Result<Self> {
        if root.exists() {
            let mut entries = fs::read_dir(root).map_err(io_err(root))?;
            if entries.next().is_some() {
                if !force {
                    return Err(HarnessError::OutputExists(root.to_path_buf()));
                }
                fs::remove_dir_all(root).map_err(io_err(root))?;
            }
        }
        fs::create_dir_all(root).map_err(io_err(root))?;
        Ok(Self {
            root: root.to_path_buf(),
            files: Vec::new(),
        })
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    fn prepare(&self, rel: &str) -> Result<PathBuf> {
        let path = self.root.join(rel);
        if let Some(dir) = path.parent() {
            fs::create_dir_all(dir).map_err(io_err(dir))?;
        }
        Ok(path)
    }

    pub fn write_text(&mut self, rel: &str, format: &'static str, text: &str) -> Result<()> {
        let path = self.prepare(rel)?;
        fs::write(&path, text).map_err(io_err(&path))?;
        self.files.push(FileEntry {
            path: rel.to_string(),
            format,
            columns: Vec::new(),
        });
        Ok(())
    }

    pub fn write_json<T: Serialize>(&mut self, rel: &str, value: &T) -> Result<()> {
        let mut text = serde_json::to_string_pretty(value)?;
        text.push('\n');
        self.write_text(rel, "json", &text)
    }

    /// Writes a table with the given header; every row must match its width.
    pub fn write_table(&mut self, rel: &str, columns: &[&str], rows: &[Vec<f64>]) -> Result<()> {
        let text = csv_text(columns, rows.iter().map(|r| r.as_slice()));
        let path = self.prepare(rel)?;
        fs::write(&path, text).map_err(io_err(&path))?;
        self.files.push(FileEntry {
            path: rel.to_string(),
            format: "csv",
            columns: columns.iter().map(|c| c.to_string()).collect(),
        });
        Ok(())
    }

    pub fn write_series(&mut self, run: &str, series: &Series) -> Result<()> {
        let mut columns = vec!["t"];
        columns.extend(series.columns.iter().map(String::as_str));
        let rows: Vec<Vec<f64>> = series
            .times
            .iter()
            .zip(&series.rows)
            .map(|(&t, r)| std::iter::once(t).chain(r.iter().copied()).collect())
            .collect();
        let rel = format!("series/{}/{}.csv", sanitize(run), sanitize(&series.name));
        self.write_table(&rel, &columns, &rows)
    }

    pub fn write_snapshots(&mut self, run: &str, grid: &Grid, states: &[State]) -> Result<()> {
        for (k, s) in states.iter().enumerate() {
            let rel = format!("snapshots/{}/{k:03}.snap", sanitize(run));
            let path = self.prepare(&rel)?;
            save_snapshot(&path, s, grid.x_min, grid.dx, grid.dy)?;
            self.files.push(FileEntry {
                path: rel,
                format: "roadfront-snapshot-v1",
                columns: Vec::new(),
            });
        }
        Ok(())
    }

    pub fn files(&self) -> &[FileEntry] {
        &self.files
    }

    /// Writes `manifest.json` listing everything written so far. The creation
    /// time lives here so that `summary.json` stays reproducible.
    pub fn finish(mut self, name: &str, kind: &str) -> Result<PathBuf> {
        #[derive(Serialize)]
        struct Manifest<'a> {
            tool: &'static str,
            version: &'static str,
            experiment: &'a str,
            kind: &'a str,
            created_unix: u64,
            files: &'a [FileEntry],
        }
        let created_unix = SystemTime::now()
            .duration_since(UNIX_EPOCH)
            .map(|d| d.as_secs())
            .unwrap_or(0);
        let files = std::mem::take(&mut self.files);
        let manifest = Manifest {
            tool: "roadfront",
            version: env!("CARGO_PKG_VERSION"),
            experiment: name,
            kind,
            created_unix,
            files: &files,
        };
        let path = self.root.join("manifest.json");
        let mut text = serde_json::to_string_pretty(&manifest)?;
        text.push('\n');
        fs::write(&path, text).map_err(io_err(&path))?;
        Ok(self.root)
    }
}

/// Comma-separated table; numbers in shortest round-trip form.
pub fn csv_text<'a>(columns: &[&str], rows: impl Iterator<Item = &'a [f64]>) -> String {
    let mut out = columns.join(",");
    out.push('\n');
    for row in rows {
        for (k, x) in row.iter().enumerate() {
            if k > 0 {
                out.push(',');
            }
            let _ = write!(out, "{x:?}");
        }
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_round_trips_floats() {
        let rows = [vec![0.1, f64::NAN, 1e-300]];
        let text = csv_text(&["a", "b", "c"], rows.iter().map(|r| r.as_slice()));
        assert_eq!(text, "a,b,c\n0.1,NaN,1e-300\n");
    }

    #[test]
    fn sanitize_keeps_sweep_ids() {
        assert_eq!(sanitize("D=25,mu=1.4"), "D=25_mu=1.4");
        assert_eq!(sanitize("../x"), ".._x");
    }
}
