//! Artifact manifests: one line per artifact with its relative path, byte
//! size and FNV-1a 64-bit content hash.

use std::hash::Hasher;
use std::path::{Path, PathBuf};

use fnv::FnvHasher;

use crate::error::{CliError, Result};

pub const MANIFEST_NAME: &str = "manifest.txt";
const HEADER: &str = "# shearsparse manifest v1";

pub fn content_hash(bytes: &[u8]) -> u64 {
    let mut h = FnvHasher::default();
    h.write(bytes);
    h.finish()
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Artifact {
    pub name: String,
    pub bytes: Vec<u8>,
}

impl Artifact {
    pub fn new(name: impl Into<String>, bytes: impl Into<Vec<u8>>) -> Self {
        Artifact {
            name: name.into(),
            bytes: bytes.into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Entry {
    pub path: String,
    pub size: u64,
    pub hash: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Manifest {
    pub entries: Vec<Entry>,
}

impl Manifest {
    pub fn render(&self) -> String {
        let mut s = format!("{HEADER}\n");
        for e in &self.entries {
            s.push_str(&format!("{}\t{}\t{:016x}\n", e.path, e.size, e.hash));
        }
        s
    }

    pub fn parse(text: &str, path: &Path) -> Result<Manifest> {
        let mut entries = vec![];
        for (i, line) in text.lines().enumerate() {
            if line.starts_with('#') || line.trim().is_empty() {
                continue;
            }
            let bad = |what: &str| CliError::corrupt(path, format!("line {}: {what}", i + 1));
            let f: Vec<&str> = line.split('\t').collect();
            if f.len() != 3 {
                return Err(bad("expected path, size and hash"));
            }
            let size = f[1].parse().map_err(|_| bad("bad size"))?;
            if f[2].len() != 16 {
                return Err(bad("hash must be 16 hex digits"));
            }
            let hash = u64::from_str_radix(f[2], 16).map_err(|_| bad("bad hash"))?;
            let rel = Path::new(f[0]);
            if f[0].is_empty() || rel.is_absolute() || rel.components().any(|c| matches!(c, std::path::Component::ParentDir)) {
                return Err(bad("artifact path must be relative and inside the manifest directory"));
            }
            entries.push(Entry {
                path: f[0].to_string(),
                size,
                hash,
            });
        }
        Ok(Manifest { entries })
    }

    pub fn get(&self, name: &str) -> Option<&Entry> {
        self.entries.iter().find(|e| e.path == name)
    }
}

/// Writes every artifact under `dir` followed by the manifest.
pub fn write_artifacts(dir: &Path, artifacts: &[Artifact]) -> Result<(PathBuf, Manifest)> {
    std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    let mut m = Manifest::default();
    for a in artifacts {
        let p = dir.join(&a.name);
        std::fs::write(&p, &a.bytes).map_err(|e| CliError::io(&p, e))?;
        m.entries.push(Entry {
            path: a.name.clone(),
            size: a.bytes.len() as u64,
            hash: content_hash(&a.bytes),
        });
    }
    let mp = dir.join(MANIFEST_NAME);
    std::fs::write(&mp, m.render()).map_err(|e| CliError::io(&mp, e))?;
    Ok((mp, m))
}

/// A manifest whose artifacts have been checked against their sizes and
/// hashes.
#[derive(Debug, Clone)]
pub struct VerifiedManifest {
    pub path: PathBuf,
    pub manifest: Manifest,
}

impl VerifiedManifest {
    pub fn open(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::corrupt(path, e.to_string()))?;
        if text.lines().next() != Some(HEADER) {
            return Err(CliError::corrupt(path, "missing header"));
        }
        let manifest = Manifest::parse(&text, path)?;
        let dir = path.parent().unwrap_or(Path::new("."));
        for e in &manifest.entries {
            let bytes = std::fs::read(dir.join(&e.path))
                .map_err(|err| CliError::corrupt(path, format!("{}: {err}", e.path)))?;
            if bytes.len() as u64 != e.size {
                return Err(CliError::corrupt(path, format!("{}: size {} != {}", e.path, bytes.len(), e.size)));
            }
            let h = content_hash(&bytes);
            if h != e.hash {
                return Err(CliError::corrupt(path, format!("{}: hash {h:016x} != {:016x}", e.path, e.hash)));
            }
        }
        Ok(VerifiedManifest {
            path: path.to_path_buf(),
            manifest,
        })
    }

    pub fn read(&self, name: &str) -> Option<String> {
        self.manifest.get(name)?;
        let dir = self.path.parent().unwrap_or(Path::new("."));
        std::fs::read_to_string(dir.join(name)).ok()
    }
}
