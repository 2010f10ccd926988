use std::collections::BTreeMap;
use std::io::Write;
use std::path::{Path, PathBuf};

use phinet::digest::{file_sha256, sha256_hex};
use phinet::{Error, Result};
use serde::Serialize;

/// Written next to every output file. Contains nothing time dependent, so
/// identical runs produce identical manifests.
#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub tool: &'static str,
    pub version: &'static str,
    pub subcommand: &'static str,
    pub options: serde_json::Value,
    pub seed: Option<u64>,
    /// Input path to sha256.
    pub inputs: BTreeMap<String, String>,
    /// Output file name to sha256.
    pub outputs: BTreeMap<String, String>,
}

pub struct Run {
    manifest: RunManifest,
}

impl Run {
    pub fn new(subcommand: &'static str, options: &impl Serialize, seed: Option<u64>) -> Result<Self> {
        Ok(Self {
            manifest: RunManifest {
                tool: "phinet",
                version: env!("CARGO_PKG_VERSION"),
                subcommand,
                options: serde_json::to_value(options)?,
                seed,
                inputs: BTreeMap::new(),
                outputs: BTreeMap::new(),
            },
        })
    }

    pub fn input(&mut self, path: &Path) -> Result<()> {
        let digest = file_sha256(path)?;
        self.manifest.inputs.insert(path.display().to_string(), digest);
        Ok(())
    }

    /// Atomically replaces `path` with `bytes`.
    pub fn write(&mut self, path: &Path, bytes: &[u8]) -> Result<()> {
        write_atomic(path, bytes)?;
        self.manifest.outputs.insert(file_name(path), sha256_hex(bytes));
        Ok(())
    }

    pub fn manifest_name(primary: &Path) -> PathBuf {
        let mut name = primary.as_os_str().to_owned();
        name.push(".manifest.json");
        PathBuf::from(name)
    }

    pub fn finish(self, manifest_path: &Path) -> Result<()> {
        let mut text = serde_json::to_vec_pretty(&self.manifest)?;
        text.push(b'\n');
        write_atomic(manifest_path, &text)
    }
}

fn file_name(path: &Path) -> String {
    path.file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_else(|| path.display().to_string())
}

pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(|e| Error::io(dir, e))?;
    tmp.write_all(bytes).map_err(|e| Error::io(path, e))?;
    tmp.as_file().sync_all().map_err(|e| Error::io(path, e))?;
    tmp.persist(path).map_err(|e| Error::io(path, e.error))?;
    Ok(())
}

/// Writes to `out` with a manifest, or to standard output.
pub fn emit(run: Run, out: Option<&Path>, bytes: &[u8]) -> Result<()> {
    match out {
        Some(path) => {
            let mut run = run;
            run.write(path, bytes)?;
            run.finish(&Run::manifest_name(path))
        }
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout
                .write_all(bytes)
                .and_then(|_| stdout.flush())
                .map_err(|e| Error::io("<stdout>", e))
        }
    }
}

pub fn json_bytes(value: &impl Serialize) -> Result<Vec<u8>> {
    let mut v = serde_json::to_vec_pretty(value)?;
    v.push(b'\n');
    Ok(v)
}
