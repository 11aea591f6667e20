//! Staged output files and run manifests.
//!
//! Every file a command produces is first written next to its destination
//! under a hidden temporary name. `commit` renames them all into place; if
//! the command fails first, dropping the stage deletes the temporaries so no
//! partial output is left behind.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde::{Deserialize, Serialize};

use crate::commands::Command;

#[derive(Debug, Default)]
pub struct Stage {
    pending: Vec<(PathBuf, PathBuf)>,
    created_dir: Option<PathBuf>,
    committed: bool,
}

impl Stage {
    pub fn new() -> Self {
        Self::default()
    }

    /// Creates `dir` if needed; it is removed again on failure if this stage
    /// created it and it is still empty.
    pub fn ensure_dir(&mut self, dir: &Path) -> Result<()> {
        if !dir.exists() {
            fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
            self.created_dir = Some(dir.to_path_buf());
        }
        Ok(())
    }

    pub fn write<F>(&mut self, dest: &Path, body: F) -> Result<()>
    where
        F: FnOnce(&mut BufWriter<File>) -> Result<()>,
    {
        let name = dest.file_name().with_context(|| format!("{} has no file name", dest.display()))?;
        let tmp = dest.with_file_name(format!(".{}.tmp{}", name.to_string_lossy(), std::process::id()));
        if let Some(parent) = dest.parent().filter(|p| !p.as_os_str().is_empty()) {
            if !parent.exists() {
                anyhow::bail!(std::io::Error::new(
                    std::io::ErrorKind::NotFound,
                    format!("output directory {} does not exist", parent.display())
                ));
            }
        }
        self.pending.push((tmp.clone(), dest.to_path_buf()));
        let file = File::create(&tmp).with_context(|| format!("creating {}", tmp.display()))?;
        let mut out = BufWriter::new(file);
        body(&mut out)?;
        out.flush()?;
        Ok(())
    }

    pub fn write_bytes(&mut self, dest: &Path, bytes: &[u8]) -> Result<()> {
        self.write(dest, |w| Ok(w.write_all(bytes)?))
    }

    pub fn destinations(&self) -> Vec<PathBuf> {
        self.pending.iter().map(|(_, d)| d.clone()).collect()
    }

    pub fn commit(mut self) -> Result<()> {
        for (tmp, dest) in &self.pending {
            fs::rename(tmp, dest).with_context(|| format!("moving output into {}", dest.display()))?;
        }
        self.committed = true;
        Ok(())
    }
}

impl Drop for Stage {
    fn drop(&mut self) {
        if self.committed {
            return;
        }
        for (tmp, _) in &self.pending {
            let _ = fs::remove_file(tmp);
        }
        if let Some(dir) = &self.created_dir {
            let _ = fs::remove_dir(dir);
        }
    }
}

/// Everything needed to re-run a command and get the same bytes.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    pub argv: Vec<String>,
    /// Fully resolved arguments, defaults filled in and paths absolute.
    pub args: Command,
    pub version: String,
    pub threads: usize,
    pub duration_secs: f64,
    pub outputs: Vec<PathBuf>,
}

/// Manifest path for a command whose primary output is `out`.
pub fn manifest_path(out: &Path, is_dir: bool) -> PathBuf {
    if is_dir {
        out.join("manifest.json")
    } else {
        let mut name = out.file_name().unwrap_or_default().to_os_string();
        name.push(".manifest.json");
        out.with_file_name(name)
    }
}

pub fn read_manifest(path: &Path) -> Result<RunManifest> {
    let text = fs::read_to_string(path).with_context(|| format!("reading manifest {}", path.display()))?;
    serde_json::from_str(&text).with_context(|| format!("parsing manifest {}", path.display()))
}

/// `path` with `suffix` appended to its file name.
pub fn with_suffix(path: &Path, suffix: &str) -> PathBuf {
    let mut name = path.file_name().unwrap_or_default().to_os_string();
    name.push(suffix);
    path.with_file_name(name)
}
