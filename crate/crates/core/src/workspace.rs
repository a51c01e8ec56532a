//! On-disk staging area shared by the CLI commands.
//!
//! Every artifact a stage writes is recorded in `manifest.json` together
//! with its SHA-256. Later stages re-hash what they read and refuse to run
//! on anything that no longer matches.

use std::collections::BTreeMap;
use std::fs::{self, File, OpenOptions};
use std::io::{self, BufReader, Read};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

pub const MANIFEST: &str = "manifest.json";
pub const BUSINESSES: &str = "businesses.jsonl";
pub const REVIEWS: &str = "reviews.jsonl";
pub const INGEST_SUMMARY: &str = "ingest_summary.json";
pub const TAXONOMY: &str = "taxonomy.toml";
pub const RANKED: &str = "ranked.csv";
pub const FEATURE_FREQUENCY: &str = "feature_frequency.csv";
pub const TOPICS: &str = "topics.tsv";
pub const COHORT_SCORES: &str = "cohort_scores.csv";
pub const CORPUS: &str = "corpus_df.tsv";
const LOCK: &str = ".lock";

pub const INGEST_ARTIFACTS: [&str; 3] = [BUSINESSES, REVIEWS, INGEST_SUMMARY];
pub const RANK_ARTIFACTS: [&str; 3] = [TAXONOMY, RANKED, FEATURE_FREQUENCY];
pub const SCORE_ARTIFACTS: [&str; 3] = [TOPICS, COHORT_SCORES, CORPUS];

pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Error)]
pub enum WorkspaceError {
    #[error("stale workspace {dir}: {reason}")]
    Stale { dir: String, reason: String },
    #[error("workspace {dir} is locked by another command (remove {dir}/.lock if no command is running)")]
    Locked { dir: String },
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: io::Error,
    },
}

impl WorkspaceError {
    fn io(path: &Path, source: io::Error) -> Self {
        WorkspaceError::Io {
            path: path.display().to_string(),
            source,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Manifest {
    pub tool_version: String,
    pub config_hash: Option<String>,
    pub cutoff: Option<usize>,
    pub k: Option<usize>,
    pub lexicon_path: Option<String>,
    pub lexicon_sha256: Option<String>,
    pub corpus_documents: Option<usize>,
    /// Artifact file name → SHA-256 of its contents.
    pub artifacts: BTreeMap<String, String>,
}

pub fn sha256_file(path: &Path) -> Result<String, WorkspaceError> {
    let file = File::open(path).map_err(|e| WorkspaceError::io(path, e))?;
    let mut reader = BufReader::new(file);
    let mut hasher = Sha256::new();
    let mut buf = [0u8; 64 * 1024];
    loop {
        let n = reader.read(&mut buf).map_err(|e| WorkspaceError::io(path, e))?;
        if n == 0 {
            break;
        }
        hasher.update(&buf[..n]);
    }
    Ok(hex::encode(hasher.finalize()))
}

/// Exclusive hold on a workspace directory, released on drop.
#[derive(Debug)]
pub struct WorkspaceLock {
    path: PathBuf,
}

impl Drop for WorkspaceLock {
    fn drop(&mut self) {
        let _ = fs::remove_file(&self.path);
    }
}

/// A workspace directory plus its loaded manifest.
#[derive(Debug)]
pub struct Workspace {
    root: PathBuf,
    manifest: Manifest,
    _lock: WorkspaceLock,
}

impl Workspace {
    fn lock(root: &Path) -> Result<WorkspaceLock, WorkspaceError> {
        let path = root.join(LOCK);
        match OpenOptions::new().write(true).create_new(true).open(&path) {
            Ok(_) => Ok(WorkspaceLock { path }),
            Err(e) if e.kind() == io::ErrorKind::AlreadyExists => Err(WorkspaceError::Locked {
                dir: root.display().to_string(),
            }),
            Err(e) => Err(WorkspaceError::io(&path, e)),
        }
    }

    /// Creates the directory if needed and starts a fresh manifest,
    /// discarding every artifact of an earlier run.
    pub fn create(root: &Path) -> Result<Self, WorkspaceError> {
        fs::create_dir_all(root).map_err(|e| WorkspaceError::io(root, e))?;
        let lock = Self::lock(root)?;
        let mut ws = Workspace {
            root: root.to_path_buf(),
            manifest: Manifest {
                tool_version: TOOL_VERSION.to_string(),
                ..Manifest::default()
            },
            _lock: lock,
        };
        ws.remove_artifacts(&INGEST_ARTIFACTS)?;
        ws.remove_artifacts(&RANK_ARTIFACTS)?;
        ws.remove_artifacts(&SCORE_ARTIFACTS)?;
        Ok(ws)
    }

    /// Opens an existing workspace written by this tool version.
    pub fn open(root: &Path) -> Result<Self, WorkspaceError> {
        let manifest_path = root.join(MANIFEST);
        if !manifest_path.is_file() {
            return Err(WorkspaceError::Stale {
                dir: root.display().to_string(),
                reason: "no manifest.json; run `ingest` first".to_string(),
            });
        }
        let lock = Self::lock(root)?;
        let text =
            fs::read_to_string(&manifest_path).map_err(|e| WorkspaceError::io(&manifest_path, e))?;
        let manifest: Manifest =
            serde_json::from_str(&text).map_err(|e| WorkspaceError::Stale {
                dir: root.display().to_string(),
                reason: format!("unreadable manifest.json: {e}"),
            })?;
        let ws = Workspace {
            root: root.to_path_buf(),
            manifest,
            _lock: lock,
        };
        if ws.manifest.tool_version != TOOL_VERSION {
            return Err(ws.stale(format!(
                "written by version {}, this is {}",
                ws.manifest.tool_version, TOOL_VERSION
            )));
        }
        Ok(ws)
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn path(&self, name: &str) -> PathBuf {
        self.root.join(name)
    }

    pub fn manifest(&self) -> &Manifest {
        &self.manifest
    }

    pub fn manifest_mut(&mut self) -> &mut Manifest {
        &mut self.manifest
    }

    pub fn stale(&self, reason: impl Into<String>) -> WorkspaceError {
        WorkspaceError::Stale {
            dir: self.root.display().to_string(),
            reason: reason.into(),
        }
    }

    /// Checks that every named artifact is recorded and unchanged on disk.
    pub fn verify(&self, names: &[&str]) -> Result<(), WorkspaceError> {
        for name in names {
            let Some(expected) = self.manifest.artifacts.get(*name) else {
                return Err(self.stale(format!("{name} has not been produced by an earlier stage")));
            };
            let path = self.path(name);
            if !path.is_file() {
                return Err(self.stale(format!("{name} is missing")));
            }
            if &sha256_file(&path)? != expected {
                return Err(self.stale(format!("{name} changed since it was written")));
            }
        }
        Ok(())
    }

    /// Records the current contents of the named artifacts.
    pub fn record(&mut self, names: &[&str]) -> Result<(), WorkspaceError> {
        for name in names {
            let digest = sha256_file(&self.path(name))?;
            self.manifest.artifacts.insert(name.to_string(), digest);
        }
        Ok(())
    }

    /// Deletes the named artifacts and forgets them.
    pub fn remove_artifacts(&mut self, names: &[&str]) -> Result<(), WorkspaceError> {
        for name in names {
            self.manifest.artifacts.remove(*name);
            let path = self.path(name);
            match fs::remove_file(&path) {
                Ok(()) => {}
                Err(e) if e.kind() == io::ErrorKind::NotFound => {}
                Err(e) => return Err(WorkspaceError::io(&path, e)),
            }
        }
        Ok(())
    }

    pub fn save_manifest(&self) -> Result<(), WorkspaceError> {
        let path = self.path(MANIFEST);
        let mut text = serde_json::to_string_pretty(&self.manifest).expect("manifest serializes");
        text.push('\n');
        fs::write(&path, text).map_err(|e| WorkspaceError::io(&path, e))
    }
}
