//! Report staging, atomic writes and the run manifest.

use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde::Serialize;
use sha2::{Digest, Sha256};

pub fn sha256_hex(bytes: &[u8]) -> String {
    format!("{:x}", Sha256::digest(bytes))
}

pub fn file_digest(path: &Path) -> Result<String> {
    let bytes = fs::read(path).with_context(|| format!("cannot read {}", path.display()))?;
    Ok(sha256_hex(&bytes))
}

/// Writes via a sibling temp file and rename, so readers never observe a
/// partially written report.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = path.parent().unwrap_or(Path::new("."));
    fs::create_dir_all(dir).with_context(|| format!("cannot create {}", dir.display()))?;
    let name = path.file_name().and_then(|n| n.to_str()).unwrap_or("out");
    let tmp = dir.join(format!(".{name}.tmp-{}", std::process::id()));
    let result = (|| -> std::io::Result<()> {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(bytes)?;
        f.sync_all()?;
        fs::rename(&tmp, path)
    })();
    if result.is_err() {
        let _ = fs::remove_file(&tmp);
    }
    result.with_context(|| format!("cannot write {}", path.display()))
}

#[derive(Debug, Clone, Serialize)]
pub struct InputDigest {
    pub role: String,
    pub path: String,
    pub sha256: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct OutputEntry {
    pub path: String,
    pub sha256: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct RunManifest {
    pub command: String,
    pub toolkit_version: String,
    pub config: serde_json::Value,
    pub inputs: Vec<InputDigest>,
    /// Digest of command, version, config and inputs. Reports embed it.
    pub run_digest: String,
    /// Seconds since the Unix epoch (`SOURCE_DATE_EPOCH` when set). Not part
    /// of any digest.
    pub timestamp: u64,
    pub outputs: Vec<OutputEntry>,
}

impl RunManifest {
    pub fn new(command: &str, config: serde_json::Value, inputs: Vec<InputDigest>) -> RunManifest {
        let toolkit_version = env!("CARGO_PKG_VERSION").to_string();
        let basis = serde_json::json!({
            "command": command,
            "toolkit_version": toolkit_version,
            "config": config,
            "inputs": inputs,
        });
        let run_digest = sha256_hex(
            serde_json::to_string(&basis)
                .expect("manifest basis serializes")
                .as_bytes(),
        );
        let timestamp = std::env::var("SOURCE_DATE_EPOCH")
            .ok()
            .and_then(|s| s.parse().ok())
            .unwrap_or_else(|| {
                std::time::SystemTime::now()
                    .duration_since(std::time::UNIX_EPOCH)
                    .map_or(0, |d| d.as_secs())
            });
        RunManifest {
            command: command.into(),
            toolkit_version,
            config,
            inputs,
            run_digest,
            timestamp,
            outputs: Vec::new(),
        }
    }
}

/// Collects every report in memory first; nothing touches the output
/// directory until [`Staged::commit`].
#[derive(Debug, Default)]
pub struct Staged {
    files: BTreeMap<String, Vec<u8>>,
}

impl Staged {
    pub fn add(&mut self, name: impl Into<String>, bytes: impl Into<Vec<u8>>) {
        self.files.insert(name.into(), bytes.into());
    }

    pub fn add_json<T: Serialize>(&mut self, name: &str, value: &T) {
        let mut text = serde_json::to_string_pretty(value).expect("report serializes");
        text.push('\n');
        self.add(name, text);
    }

    /// Writes all staged files and finally `manifest.json`.
    pub fn commit(self, out_dir: &Path, mut manifest: RunManifest) -> Result<PathBuf> {
        for (name, bytes) in &self.files {
            write_atomic(&out_dir.join(name), bytes)?;
            manifest.outputs.push(OutputEntry {
                path: name.clone(),
                sha256: sha256_hex(bytes),
            });
        }
        let path = out_dir.join("manifest.json");
        let mut text = serde_json::to_string_pretty(&manifest)?;
        text.push('\n');
        write_atomic(&path, text.as_bytes())?;
        Ok(path)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn atomic_write_replaces() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("a.txt");
        write_atomic(&p, b"one").unwrap();
        write_atomic(&p, b"two").unwrap();
        assert_eq!(fs::read(&p).unwrap(), b"two");
        assert_eq!(fs::read_dir(dir.path()).unwrap().count(), 1);
    }

    #[test]
    fn digest_ignores_timestamp() {
        let a = RunManifest::new("x", serde_json::json!({"k": 1}), vec![]);
        let b = RunManifest::new("x", serde_json::json!({"k": 1}), vec![]);
        assert_eq!(a.run_digest, b.run_digest);
        let c = RunManifest::new("x", serde_json::json!({"k": 2}), vec![]);
        assert_ne!(a.run_digest, c.run_digest);
    }
}
