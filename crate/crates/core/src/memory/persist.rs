//! On-disk layout: one JSON-lines file per region plus `manifest.json`.
//! Every file is written to a temporary sibling first; renames happen only
//! after all temporaries are complete, manifest last.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::{MemoryError, MemoryRecord, MemoryStore, Region};

/// Called with each final path just before its temporary file is renamed
/// into place. Returning an error aborts the save.
pub type PersistHook<'a> = &'a mut dyn FnMut(&Path) -> std::io::Result<()>;

const MANIFEST: &str = "manifest.json";
const FORMAT: u32 = 1;

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct Manifest {
    format: u32,
    next_seq: u64,
}

fn io_err(path: &Path, e: impl std::fmt::Display) -> MemoryError {
    MemoryError::Io { path: path.display().to_string(), message: e.to_string() }
}

fn region_file(region: Region) -> String {
    format!("{}.jsonl", region.as_str())
}

impl MemoryStore {
    pub fn persist(&self, dir: &Path) -> Result<(), MemoryError> {
        self.persist_with(dir, &mut |_| Ok(()))
    }

    pub fn persist_with(&self, dir: &Path, hook: PersistHook<'_>) -> Result<(), MemoryError> {
        fs::create_dir_all(dir).map_err(|e| io_err(dir, e))?;
        let mut files: Vec<(PathBuf, Vec<u8>)> = Vec::new();
        for region in Region::ALL {
            let mut body = Vec::new();
            for r in self.region(region) {
                serde_json::to_writer(&mut body, r).expect("record serializes");
                body.push(b'\n');
            }
            files.push((dir.join(region_file(region)), body));
        }
        let manifest = Manifest { format: FORMAT, next_seq: self.next_seq };
        let mut mbody = serde_json::to_vec_pretty(&manifest).expect("manifest serializes");
        mbody.push(b'\n');
        files.push((dir.join(MANIFEST), mbody));

        let mut staged = Vec::new();
        for (path, body) in &files {
            let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(|e| io_err(dir, e))?;
            tmp.write_all(body).map_err(|e| io_err(path, e))?;
            tmp.as_file().sync_all().map_err(|e| io_err(path, e))?;
            staged.push((path, tmp));
        }
        for (path, tmp) in staged {
            hook(path).map_err(|e| io_err(path, e))?;
            tmp.persist(path).map_err(|e| io_err(path, e.error))?;
        }
        Ok(())
    }

    /// Loads a store; a missing directory or missing region files are empty.
    pub fn load(dir: &Path) -> Result<MemoryStore, MemoryError> {
        let mut store = MemoryStore::new();
        if !dir.exists() {
            return Ok(store);
        }
        for region in Region::ALL {
            let name = region_file(region);
            let path = dir.join(&name);
            let text = match fs::read_to_string(&path) {
                Ok(t) => t,
                Err(e) if e.kind() == std::io::ErrorKind::NotFound => continue,
                Err(e) => return Err(io_err(&path, e)),
            };
            for (i, line) in text.lines().enumerate() {
                if line.trim().is_empty() {
                    continue;
                }
                let corrupt = |message: String| MemoryError::CorruptStore { file: name.clone(), line: i + 1, message };
                let record: MemoryRecord = serde_json::from_str(line).map_err(|e| corrupt(e.to_string()))?;
                if record.region != region {
                    return Err(corrupt(format!("{} record in {name}", record.region)));
                }
                if store.records.insert(record.created_at, record).is_some() {
                    return Err(corrupt("duplicate record id".into()));
                }
            }
        }
        let max_next = store.records.keys().next_back().map(|k| k + 1).unwrap_or(0);
        let manifest_path = dir.join(MANIFEST);
        store.next_seq = match fs::read_to_string(&manifest_path) {
            Ok(text) => {
                let m: Manifest = serde_json::from_str(&text).map_err(|e| MemoryError::CorruptStore {
                    file: MANIFEST.into(),
                    line: e.line(),
                    message: e.to_string(),
                })?;
                if m.format != FORMAT {
                    return Err(MemoryError::CorruptStore {
                        file: MANIFEST.into(),
                        line: 1,
                        message: format!("unsupported format {}", m.format),
                    });
                }
                m.next_seq.max(max_next)
            }
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => max_next,
            Err(e) => return Err(io_err(&manifest_path, e)),
        };
        Ok(store)
    }
}
