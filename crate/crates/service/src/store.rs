use std::collections::HashMap;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::Mutex;

use uuid::Uuid;

use crate::record::{SessionRecord, SCHEMA_VERSION};

#[derive(Debug, thiserror::Error)]
pub enum StoreError {
    #[error("storage io at {path}: {message}")]
    Io { path: PathBuf, message: String },
    #[error("session document {id} is corrupt: {message}")]
    Corrupt { id: Uuid, message: String },
    #[error("session document {id} has schema version {found}, expected {SCHEMA_VERSION}")]
    Version { id: Uuid, found: u64 },
}

/// Session document store. Each save replaces the whole document atomically.
pub trait Store: Send + Sync {
    fn load(&self, id: Uuid) -> Result<Option<SessionRecord>, StoreError>;
    fn save(&self, record: &SessionRecord) -> Result<(), StoreError>;
    /// Saves only when no document with this id exists. Returns whether it did.
    fn insert(&self, record: &SessionRecord) -> Result<bool, StoreError>;
    fn ids(&self) -> Result<Vec<Uuid>, StoreError>;
}

fn encode(record: &SessionRecord) -> Vec<u8> {
    serde_json::to_vec_pretty(record).expect("session record serializes")
}

fn decode(id: Uuid, bytes: &[u8]) -> Result<SessionRecord, StoreError> {
    let value: serde_json::Value =
        serde_json::from_slice(bytes).map_err(|e| StoreError::Corrupt { id, message: e.to_string() })?;
    let found = value.get("schema_version").and_then(|v| v.as_u64()).unwrap_or(0);
    if found != SCHEMA_VERSION as u64 {
        return Err(StoreError::Version { id, found });
    }
    serde_json::from_value(value).map_err(|e| StoreError::Corrupt { id, message: e.to_string() })
}

/// Documents kept as serialized JSON so they take the same path as on disk.
#[derive(Debug, Default)]
pub struct MemoryStore {
    docs: Mutex<HashMap<Uuid, Vec<u8>>>,
}

impl MemoryStore {
    pub fn new() -> Self {
        Self::default()
    }
}

impl Store for MemoryStore {
    fn load(&self, id: Uuid) -> Result<Option<SessionRecord>, StoreError> {
        let docs = self.docs.lock().expect("store lock");
        docs.get(&id).map(|b| decode(id, b)).transpose()
    }

    fn save(&self, record: &SessionRecord) -> Result<(), StoreError> {
        self.docs.lock().expect("store lock").insert(record.id, encode(record));
        Ok(())
    }

    fn insert(&self, record: &SessionRecord) -> Result<bool, StoreError> {
        let mut docs = self.docs.lock().expect("store lock");
        if docs.contains_key(&record.id) {
            return Ok(false);
        }
        docs.insert(record.id, encode(record));
        Ok(true)
    }

    fn ids(&self) -> Result<Vec<Uuid>, StoreError> {
        let mut ids: Vec<Uuid> = self.docs.lock().expect("store lock").keys().copied().collect();
        ids.sort();
        Ok(ids)
    }
}

/// One JSON document per session in a directory. Writes go to a temp file in
/// the same directory which is then renamed over the old document.
#[derive(Debug)]
pub struct FileStore {
    dir: PathBuf,
}

impl FileStore {
    pub fn open(dir: impl Into<PathBuf>) -> Result<Self, StoreError> {
        let dir = dir.into();
        fs::create_dir_all(&dir).map_err(|e| io_err(&dir, e))?;
        Ok(Self { dir })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    fn path(&self, id: Uuid) -> PathBuf {
        self.dir.join(format!("{id}.json"))
    }

    fn staged(&self, record: &SessionRecord) -> Result<tempfile::NamedTempFile, StoreError> {
        let mut tmp = tempfile::Builder::new()
            .prefix(".session-")
            .suffix(".tmp")
            .tempfile_in(&self.dir)
            .map_err(|e| io_err(&self.dir, e))?;
        tmp.write_all(&encode(record)).map_err(|e| io_err(tmp.path(), e))?;
        tmp.as_file().sync_all().map_err(|e| io_err(tmp.path(), e))?;
        Ok(tmp)
    }

    fn sync_dir(&self) {
        // Makes the rename durable where the platform allows opening a directory.
        if let Ok(d) = fs::File::open(&self.dir) {
            let _ = d.sync_all();
        }
    }
}

fn io_err(path: &Path, e: impl std::fmt::Display) -> StoreError {
    StoreError::Io { path: path.to_path_buf(), message: e.to_string() }
}

impl Store for FileStore {
    fn load(&self, id: Uuid) -> Result<Option<SessionRecord>, StoreError> {
        let path = self.path(id);
        match fs::read(&path) {
            Ok(bytes) => decode(id, &bytes).map(Some),
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => Ok(None),
            Err(e) => Err(io_err(&path, e)),
        }
    }

    fn save(&self, record: &SessionRecord) -> Result<(), StoreError> {
        let path = self.path(record.id);
        self.staged(record)?.persist(&path).map_err(|e| io_err(&path, e.error))?;
        self.sync_dir();
        Ok(())
    }

    fn insert(&self, record: &SessionRecord) -> Result<bool, StoreError> {
        let path = self.path(record.id);
        match self.staged(record)?.persist_noclobber(&path) {
            Ok(_) => {
                self.sync_dir();
                Ok(true)
            }
            Err(e) if e.error.kind() == std::io::ErrorKind::AlreadyExists => Ok(false),
            Err(e) => Err(io_err(&path, e.error)),
        }
    }

    fn ids(&self) -> Result<Vec<Uuid>, StoreError> {
        let mut ids = Vec::new();
        for entry in fs::read_dir(&self.dir).map_err(|e| io_err(&self.dir, e))? {
            let entry = entry.map_err(|e| io_err(&self.dir, e))?;
            let name = entry.file_name();
            let Some(stem) = name.to_str().and_then(|n| n.strip_suffix(".json")) else { continue };
            if let Ok(id) = stem.parse() {
                ids.push(id);
            }
        }
        ids.sort();
        Ok(ids)
    }
}
