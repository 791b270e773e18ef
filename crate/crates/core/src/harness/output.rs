use std::path::{Path, PathBuf};

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

/// Lowercase hex SHA-256 of the canonical JSON form of `value`.
pub fn param_hash<S: Serialize>(value: &S) -> String {
    let bytes = serde_json::to_vec(value).unwrap_or_else(|e| panic!("parameters always serialize: {e}"));
    Sha256::digest(&bytes).iter().map(|b| format!("{b:02x}")).collect()
}

/// One file written by a campaign.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Artifact {
    /// Path relative to the campaign directory.
    pub path: String,
    pub kind: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub algorithm: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    pub params_hash: String,
}

#[derive(Clone, Debug, Serialize)]
pub struct Manifest {
    pub kind: String,
    pub config_hash: String,
    pub seeds: Vec<u64>,
    pub artifacts: Vec<Artifact>,
}

/// Collects the files of a campaign under one directory.
pub struct OutputDir {
    root: PathBuf,
    artifacts: Vec<Artifact>,
}

impl OutputDir {
    pub fn create(root: impl AsRef<Path>) -> Result<Self> {
        let root = root.as_ref().to_path_buf();
        std::fs::create_dir_all(&root).map_err(|e| Error::io(&root, e))?;
        Ok(Self { root, artifacts: Vec::new() })
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn write_bytes(&mut self, name: &str, bytes: &[u8], artifact: Artifact) -> Result<PathBuf> {
        let path = self.root.join(name);
        std::fs::write(&path, bytes).map_err(|e| Error::io(&path, e))?;
        self.artifacts.push(Artifact { path: name.to_string(), ..artifact });
        Ok(path)
    }

    pub fn write_json<S: Serialize>(&mut self, name: &str, value: &S, artifact: Artifact) -> Result<PathBuf> {
        let mut bytes = serde_json::to_vec_pretty(value)?;
        bytes.push(b'\n');
        self.write_bytes(name, &bytes, artifact)
    }

    /// Writes `manifest.json` and returns the artifact list.
    pub fn finish(self, kind: &str, config_hash: String, seeds: Vec<u64>) -> Result<Vec<Artifact>> {
        let manifest = Manifest {
            kind: kind.to_string(),
            config_hash,
            seeds,
            artifacts: self.artifacts,
        };
        let path = self.root.join("manifest.json");
        let mut bytes = serde_json::to_vec_pretty(&manifest)?;
        bytes.push(b'\n');
        std::fs::write(&path, bytes).map_err(|e| Error::io(&path, e))?;
        Ok(manifest.artifacts)
    }
}

pub fn artifact(kind: &str, algorithm: Option<&str>, seed: Option<u64>, params_hash: String) -> Artifact {
    Artifact {
        path: String::new(),
        kind: kind.to_string(),
        algorithm: algorithm.map(str::to_string),
        seed,
        params_hash,
    }
}

/// Formats a float for CSV output: shortest round-trip form.
pub fn fmt_float(v: f64) -> String {
    format!("{v:?}")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hash_is_stable_and_sensitive() {
        let a = param_hash(&("push_saga", 0.5, 3u64));
        assert_eq!(a, param_hash(&("push_saga", 0.5, 3u64)));
        assert_ne!(a, param_hash(&("push_saga", 0.5, 4u64)));
        assert_eq!(a.len(), 64);
    }
}
