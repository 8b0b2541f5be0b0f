//! Run directory layout, content hashes and per-phase manifests.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufReader, Read};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::config::ExperimentConfig;
use crate::{PipelineError, Result};

pub const CONFIG_FILE: &str = "config.toml";

pub fn sha256_file(path: &Path) -> Result<String> {
    let mut f = BufReader::new(File::open(path).map_err(|e| PipelineError::MissingArtifact {
        path: path.to_path_buf(),
        message: e.to_string(),
    })?);
    let mut h = Sha256::new();
    let mut buf = [0u8; 1 << 16];
    loop {
        let n = f.read(&mut buf)?;
        if n == 0 {
            break;
        }
        h.update(&buf[..n]);
    }
    Ok(hex::encode(h.finalize()))
}

pub fn sha256_bytes(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Deterministic sub-seed from a base seed and a label.
pub fn derive_seed(base: u64, label: &str) -> u64 {
    let mut h = Sha256::new();
    h.update(base.to_le_bytes());
    h.update(label.as_bytes());
    let d = h.finalize();
    u64::from_le_bytes(d[..8].try_into().expect("digest has 32 bytes"))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FileEntry {
    /// Relative to the run directory.
    pub path: String,
    pub sha256: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Quarantine {
    pub id: String,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub phase: String,
    pub config_sha256: String,
    pub files: Vec<FileEntry>,
    #[serde(default)]
    pub quarantined: Vec<Quarantine>,
    #[serde(default)]
    pub notes: BTreeMap<String, serde_json::Value>,
}

impl Manifest {
    pub fn new(phase: &str, config_sha256: &str) -> Self {
        Self {
            phase: phase.into(),
            config_sha256: config_sha256.into(),
            files: Vec::new(),
            quarantined: Vec::new(),
            notes: BTreeMap::new(),
        }
    }

    pub fn note(&mut self, key: &str, value: impl Serialize) {
        self.notes
            .insert(key.into(), serde_json::to_value(value).expect("note serializes"));
    }
}

/// A run directory. Phase outputs live in `phase1/` … `phase4/` and
/// `report/`, each with a `manifest.json`.
#[derive(Debug, Clone)]
pub struct RunDir {
    pub root: PathBuf,
}

impl RunDir {
    /// Creates the directory and stores the config, or checks that an
    /// existing run was made with the same config.
    pub fn create(root: &Path, config: &ExperimentConfig) -> Result<Self> {
        std::fs::create_dir_all(root)?;
        let run = Self { root: root.to_path_buf() };
        let path = run.root.join(CONFIG_FILE);
        let text = config.to_toml();
        if path.exists() {
            let old: ExperimentConfig = toml::from_str(&std::fs::read_to_string(&path)?)?;
            if &old != config {
                return Err(PipelineError::Config(format!(
                    "{} already holds a run with a different configuration",
                    root.display()
                )));
            }
        } else {
            std::fs::write(&path, text)?;
        }
        Ok(run)
    }

    pub fn open(root: &Path) -> Result<(Self, ExperimentConfig)> {
        let path = root.join(CONFIG_FILE);
        if !path.exists() {
            return Err(PipelineError::MissingArtifact {
                path,
                message: "not a run directory (no config)".into(),
            });
        }
        let cfg = ExperimentConfig::load(&path)?;
        Ok((Self { root: root.to_path_buf() }, cfg))
    }

    pub fn config_sha256(&self) -> Result<String> {
        sha256_file(&self.root.join(CONFIG_FILE))
    }

    pub fn phase_dir(&self, phase: &str) -> Result<PathBuf> {
        let p = self.root.join(phase);
        std::fs::create_dir_all(&p)?;
        Ok(p)
    }

    pub fn relative(&self, path: &Path) -> String {
        path.strip_prefix(&self.root)
            .unwrap_or(path)
            .to_string_lossy()
            .replace('\\', "/")
    }

    pub fn entry(&self, path: &Path) -> Result<FileEntry> {
        Ok(FileEntry {
            path: self.relative(path),
            sha256: sha256_file(path)?,
        })
    }

    pub fn manifest_path(&self, phase: &str) -> PathBuf {
        self.root.join(phase).join("manifest.json")
    }

    pub fn write_manifest(&self, m: &Manifest) -> Result<()> {
        let path = self.manifest_path(&m.phase);
        std::fs::create_dir_all(path.parent().expect("manifest has a parent"))?;
        std::fs::write(path, serde_json::to_string_pretty(m)? + "\n")?;
        Ok(())
    }

    pub fn read_manifest(&self, phase: &str) -> Result<Manifest> {
        let path = self.manifest_path(phase);
        let text = std::fs::read_to_string(&path).map_err(|e| PipelineError::MissingArtifact {
            path: path.clone(),
            message: format!("{phase} has not completed ({e})"),
        })?;
        Ok(serde_json::from_str(&text)?)
    }

    /// Re-hashes every file listed in a phase manifest.
    pub fn verify(&self, phase: &str) -> Result<Manifest> {
        let m = self.read_manifest(phase)?;
        for f in &m.files {
            let p = self.root.join(&f.path);
            if sha256_file(&p)? != f.sha256 {
                return Err(PipelineError::HashMismatch(p));
            }
        }
        Ok(m)
    }
}
