//! Run directories and their manifests.

use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

pub const MANIFEST_FILE: &str = "manifest.json";

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

pub fn sha256_file(path: &Path) -> Result<String> {
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    Ok(sha256_hex(&bytes))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Digest256 {
    pub path: String,
    pub sha256: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct Manifest<'a, C: Serialize> {
    pub toolkit: &'static str,
    pub version: &'static str,
    pub command: &'a str,
    pub seed: u64,
    pub config: &'a C,
    pub inputs: Vec<Digest256>,
    pub outputs: Vec<Digest256>,
}

/// Picks the directory a run writes into. An absent or empty `out` is used
/// as is, as is any `out` when `force` is set; otherwise outputs go to a
/// fresh `<out>.run-<unix seconds>` sibling so earlier results are kept.
pub fn resolve_run_dir(out: &Path, force: bool) -> PathBuf {
    let occupied = std::fs::read_dir(out).map(|mut d| d.next().is_some()).unwrap_or(false)
        || (out.exists() && !out.is_dir());
    if !occupied || force {
        return out.to_path_buf();
    }
    let secs = SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0);
    let base = format!("{}.run-{secs}", out.display());
    let mut candidate = PathBuf::from(&base);
    let mut n = 2;
    while candidate.exists() {
        candidate = PathBuf::from(format!("{base}-{n}"));
        n += 1;
    }
    candidate
}

/// An output directory that records a digest for every file written to it.
#[derive(Debug)]
pub struct RunDir {
    pub path: PathBuf,
    outputs: Vec<Digest256>,
}

impl RunDir {
    pub fn create(out: &Path, force: bool) -> Result<Self> {
        let path = resolve_run_dir(out, force);
        std::fs::create_dir_all(&path).map_err(|e| Error::io(&path, e))?;
        Ok(Self {
            path,
            outputs: Vec::new(),
        })
    }

    pub fn write(&mut self, name: &str, bytes: &[u8]) -> Result<PathBuf> {
        let p = self.path.join(name);
        if let Some(parent) = p.parent() {
            std::fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
        }
        std::fs::write(&p, bytes).map_err(|e| Error::io(&p, e))?;
        self.outputs.push(Digest256 {
            path: name.into(),
            sha256: sha256_hex(bytes),
        });
        Ok(p)
    }

    pub fn write_json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<PathBuf> {
        let mut s = serde_json::to_string_pretty(value).expect("serializable output");
        s.push('\n');
        self.write(name, s.as_bytes())
    }

    /// Writes `manifest.json` listing inputs and every output so far.
    pub fn finish<C: Serialize>(self, command: &str, seed: u64, config: &C, inputs: &[PathBuf]) -> Result<PathBuf> {
        let inputs = inputs
            .iter()
            .map(|p| {
                Ok(Digest256 {
                    path: p.display().to_string(),
                    sha256: sha256_file(p)?,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        let m = Manifest {
            toolkit: env!("CARGO_PKG_NAME"),
            version: env!("CARGO_PKG_VERSION"),
            command,
            seed,
            config,
            inputs,
            outputs: self.outputs.clone(),
        };
        let mut s = serde_json::to_string_pretty(&m).expect("serializable manifest");
        s.push('\n');
        let p = self.path.join(MANIFEST_FILE);
        std::fs::write(&p, s).map_err(|e| Error::io(&p, e))?;
        Ok(self.path)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn occupied_dir_gets_fresh_sibling() {
        let tmp = tempfile::tempdir().unwrap();
        let out = tmp.path().join("o");
        assert_eq!(resolve_run_dir(&out, false), out);
        std::fs::create_dir(&out).unwrap();
        assert_eq!(resolve_run_dir(&out, false), out);
        std::fs::write(out.join("x"), "1").unwrap();
        let fresh = resolve_run_dir(&out, false);
        assert!(fresh.display().to_string().contains("o.run-"));
        assert_eq!(resolve_run_dir(&out, true), out);
    }

    #[test]
    fn known_digest() {
        assert_eq!(
            sha256_hex(b"abc"),
            "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad"
        );
    }
}
