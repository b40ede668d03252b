//! Artifact writing: every file carries a provenance header and is renamed
//! into place only once complete.

use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;
use sha2::{Digest, Sha256};

use mtcal_core::rng::RNG_ALGORITHM;
use mtcal_core::tsv::TsvBuilder;
use mtcal_core::{Error, Result};

pub const TOOL: &str = concat!("mtcal ", env!("CARGO_PKG_VERSION"));

#[derive(Debug, Clone, Serialize)]
pub struct Meta {
    pub tool: &'static str,
    pub stage: &'static str,
    pub config_hash: String,
    pub seed: u64,
    pub rng: &'static str,
    /// Digest over the stage's input files.
    pub inputs: String,
}

impl Meta {
    pub fn tsv_lines(&self) -> Vec<String> {
        vec![
            format!("{} stage={}", self.tool, self.stage),
            format!("config={} seed={} rng={}", self.config_hash, self.seed, self.rng),
            format!("inputs={}", self.inputs),
        ]
    }

    pub fn tsv(&self) -> TsvBuilder {
        let mut b = TsvBuilder::new();
        for l in self.tsv_lines() {
            b.meta(&l);
        }
        b
    }

    pub fn json(&self) -> serde_json::Value {
        serde_json::to_value(self).expect("meta serialises")
    }
}

/// Hashes input files by (label, contents); labels keep the digest
/// independent of where the run lives on disk.
pub struct InputDigest(Sha256);

impl InputDigest {
    pub fn new() -> Self {
        Self(Sha256::new())
    }

    pub fn file(&mut self, label: &str, path: &Path) -> Result<()> {
        let bytes = std::fs::read(path).map_err(|e| Error::io(format!("reading {}", path.display()), e))?;
        self.0.update(label.as_bytes());
        self.0.update([0]);
        self.0.update((bytes.len() as u64).to_le_bytes());
        self.0.update(&bytes);
        Ok(())
    }

    pub fn finish(self) -> String {
        hex::encode(self.0.finalize())
    }
}

pub struct Stage {
    pub dir: PathBuf,
    pub meta: Meta,
}

impl Stage {
    pub fn path(&self, name: &str) -> PathBuf {
        self.dir.join(name)
    }

    pub fn write(&self, name: &str, body: &str) -> Result<PathBuf> {
        write_atomic(&self.path(name), body.as_bytes())?;
        Ok(self.path(name))
    }
}

/// Writes `bytes` to a temporary file beside `path` and renames it over `path`.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    std::fs::create_dir_all(dir).map_err(|e| Error::io(format!("creating {}", dir.display()), e))?;
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(|e| Error::io(format!("temp file in {}", dir.display()), e))?;
    tmp.write_all(bytes).map_err(|e| Error::io(format!("writing {}", path.display()), e))?;
    tmp.persist(path).map_err(|e| Error::io(format!("renaming into {}", path.display()), e.error))?;
    Ok(())
}

pub fn meta(stage: &'static str, config_hash: &str, seed: u64, inputs: String) -> Meta {
    Meta { tool: TOOL, stage, config_hash: config_hash.to_string(), seed, rng: RNG_ALGORITHM, inputs }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn atomic_write_replaces() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("sub/a.txt");
        write_atomic(&p, b"one").unwrap();
        write_atomic(&p, b"two").unwrap();
        assert_eq!(std::fs::read_to_string(&p).unwrap(), "two");
        assert_eq!(std::fs::read_dir(p.parent().unwrap()).unwrap().count(), 1);
    }

    #[test]
    fn digest_ignores_location() {
        let a = tempfile::tempdir().unwrap();
        let b = tempfile::tempdir().unwrap();
        for d in [&a, &b] {
            std::fs::write(d.path().join("x"), "same").unwrap();
        }
        let h = |d: &Path| {
            let mut g = InputDigest::new();
            g.file("x", &d.join("x")).unwrap();
            g.finish()
        };
        assert_eq!(h(a.path()), h(b.path()));
    }
}
