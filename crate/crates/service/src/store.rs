//! JSON-file persistence: one snapshot and one append-only audit log per
//! session.

use std::fs::{self, File, OpenOptions};
use std::io::{self, BufRead, BufReader, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::session::{AuditEntry, CreateSession};

/// The immutable part of a session.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Snapshot {
    pub id: String,
    pub created_ms: u64,
    pub config: CreateSession,
}

/// Session storage. Without a directory nothing is written.
#[derive(Debug, Clone, Default)]
pub struct Store {
    dir: Option<PathBuf>,
}

impl Store {
    pub fn in_memory() -> Self {
        Store { dir: None }
    }

    pub fn at(dir: impl AsRef<Path>) -> io::Result<Self> {
        fs::create_dir_all(dir.as_ref())?;
        Ok(Store { dir: Some(dir.as_ref().to_path_buf()) })
    }

    pub fn dir(&self) -> Option<&Path> {
        self.dir.as_deref()
    }

    fn paths(&self, id: &str) -> Option<(PathBuf, PathBuf)> {
        let dir = self.dir.as_ref()?;
        Some((dir.join(format!("{id}.json")), dir.join(format!("{id}.audit.jsonl"))))
    }

    /// Writes the snapshot through a temporary file and a rename.
    pub fn save_snapshot(&self, snap: &Snapshot) -> io::Result<()> {
        let Some((path, _)) = self.paths(&snap.id) else { return Ok(()) };
        let tmp = path.with_extension("json.tmp");
        let mut f = File::create(&tmp)?;
        serde_json::to_writer_pretty(&mut f, snap)?;
        f.sync_all()?;
        fs::rename(tmp, path)
    }

    pub fn append(&self, id: &str, entry: &AuditEntry) -> io::Result<()> {
        let Some((_, log)) = self.paths(id) else { return Ok(()) };
        let mut f = OpenOptions::new().create(true).append(true).open(log)?;
        let mut line = serde_json::to_string(entry)?;
        line.push('\n');
        f.write_all(line.as_bytes())?;
        f.sync_data()
    }

    /// The snapshot and log of `id`, if stored.
    pub fn load(&self, id: &str) -> io::Result<Option<(Snapshot, Vec<AuditEntry>)>> {
        let Some((path, log)) = self.paths(id) else { return Ok(None) };
        if !path.exists() {
            return Ok(None);
        }
        let snap: Snapshot = serde_json::from_reader(BufReader::new(File::open(path)?))?;
        let mut entries = Vec::new();
        if log.exists() {
            for (n, line) in BufReader::new(File::open(log)?).lines().enumerate() {
                let line = line?;
                if line.trim().is_empty() {
                    continue;
                }
                let entry = serde_json::from_str(&line)
                    .map_err(|e| io::Error::new(io::ErrorKind::InvalidData, format!("audit line {}: {e}", n + 1)))?;
                entries.push(entry);
            }
        }
        Ok(Some((snap, entries)))
    }

    /// Ids of all stored sessions.
    pub fn list(&self) -> io::Result<Vec<String>> {
        let Some(dir) = &self.dir else { return Ok(Vec::new()) };
        let mut ids = Vec::new();
        for entry in fs::read_dir(dir)? {
            let name = entry?.file_name().to_string_lossy().into_owned();
            if let Some(id) = name.strip_suffix(".json") {
                ids.push(id.to_string());
            }
        }
        ids.sort();
        Ok(ids)
    }
}
