//! Output directory bookkeeping: every file goes through `ArtifactWriter`,
//! which rewrites `manifest.json` after each one. A run that stops early
//! leaves `complete: false` behind.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::CliError;
use crate::spec::ExperimentSpec;

pub const MANIFEST: &str = "manifest.json";

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ArtifactEntry {
    pub path: String,
    pub kind: String,
    pub bytes: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub tool_version: String,
    pub spec: ExperimentSpec,
    pub complete: bool,
    pub artifacts: Vec<ArtifactEntry>,
}

impl Manifest {
    pub fn read(dir: &Path) -> Result<Manifest, CliError> {
        let text = fs::read_to_string(dir.join(MANIFEST))?;
        Ok(serde_json::from_str(&text)?)
    }

    pub fn of_kind<'a>(&'a self, kind: &'a str) -> impl Iterator<Item = &'a ArtifactEntry> + 'a {
        self.artifacts.iter().filter(move |a| a.kind == kind)
    }
}

pub struct ArtifactWriter {
    dir: PathBuf,
    manifest: Manifest,
}

impl ArtifactWriter {
    /// Creates the directory and an empty, incomplete manifest.
    pub fn create(spec: &ExperimentSpec) -> Result<Self, CliError> {
        fs::create_dir_all(&spec.out_dir)?;
        let mut w = ArtifactWriter {
            dir: spec.out_dir.clone(),
            manifest: Manifest {
                tool_version: env!("CARGO_PKG_VERSION").to_string(),
                spec: spec.clone(),
                complete: false,
                artifacts: Vec::new(),
            },
        };
        w.flush()?;
        Ok(w)
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    fn flush(&mut self) -> Result<(), CliError> {
        let mut text = serde_json::to_string_pretty(&self.manifest)?;
        text.push('\n');
        let tmp = self.dir.join(format!("{MANIFEST}.tmp"));
        fs::write(&tmp, text)?;
        fs::rename(tmp, self.dir.join(MANIFEST))?;
        Ok(())
    }

    /// Writes `bytes` to `rel` (forward slashes) and records it.
    pub fn write(&mut self, rel: &str, kind: &str, bytes: &[u8]) -> Result<(), CliError> {
        let path = self.dir.join(rel);
        if let Some(parent) = path.parent() {
            fs::create_dir_all(parent)?;
        }
        fs::write(&path, bytes)?;
        self.manifest.artifacts.push(ArtifactEntry {
            path: rel.to_string(),
            kind: kind.to_string(),
            bytes: bytes.len() as u64,
        });
        self.flush()
    }

    pub fn write_json<T: Serialize>(&mut self, rel: &str, kind: &str, value: &T) -> Result<(), CliError> {
        let mut text = serde_json::to_vec_pretty(value)?;
        text.push(b'\n');
        self.write(rel, kind, &text)
    }

    pub fn write_csv<T: Serialize>(&mut self, rel: &str, kind: &str, rows: &[T]) -> Result<(), CliError> {
        let mut w = csv::Writer::from_writer(Vec::new());
        for row in rows {
            w.serialize(row)?;
        }
        let bytes = w.into_inner().map_err(|e| CliError::Io(e.into_error()))?;
        self.write(rel, kind, &bytes)
    }

    pub fn finish(mut self) -> Result<Manifest, CliError> {
        self.manifest.complete = true;
        self.flush()?;
        Ok(self.manifest)
    }
}

pub fn read_csv<T: serde::de::DeserializeOwned>(path: &Path) -> Result<Vec<T>, CliError> {
    let mut r = csv::Reader::from_path(path)?;
    let rows = r.deserialize().collect::<Result<Vec<T>, _>>()?;
    Ok(rows)
}

pub fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T, CliError> {
    Ok(serde_json::from_str(&fs::read_to_string(path)?)?)
}
