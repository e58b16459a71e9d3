use std::collections::BTreeMap;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

#[derive(Serialize, Deserialize)]
struct Line {
    key: String,
    body: String,
}

/// Line-delimited `{"key": ..., "body": ...}` records. Bodies are stored
/// verbatim. Saving rewrites the file sorted by key, so the file content
/// depends only on the set of entries.
#[derive(Debug, Clone, Default)]
pub struct ResponseCache {
    path: Option<PathBuf>,
    entries: BTreeMap<String, String>,
    dirty: bool,
}

impl ResponseCache {
    pub fn in_memory() -> Self {
        ResponseCache::default()
    }

    /// Loads `path`; a missing file yields an empty cache bound to `path`.
    pub fn open(path: &Path) -> Result<Self> {
        let mut cache = ResponseCache {
            path: Some(path.to_path_buf()),
            ..Default::default()
        };
        let text = match std::fs::read_to_string(path) {
            Ok(t) => t,
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok(cache),
            Err(e) => return Err(Error::io(path, e)),
        };
        for (i, line) in text.lines().enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let rec: Line = serde_json::from_str(line)
                .map_err(|e| Error::parse(format!("{}:{}", path.display(), i + 1), e.to_string()))?;
            cache.entries.insert(rec.key, rec.body);
        }
        Ok(cache)
    }

    pub fn path(&self) -> Option<&Path> {
        self.path.as_deref()
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries.get(key).map(String::as_str)
    }

    pub fn insert(&mut self, key: String, body: String) {
        if self.entries.get(&key) != Some(&body) {
            self.entries.insert(key, body);
            self.dirty = true;
        }
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Writes the cache back when it has changed.
    pub fn save(&mut self) -> Result<()> {
        let Some(path) = &self.path else {
            return Ok(());
        };
        if !self.dirty {
            return Ok(());
        }
        if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
            std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        }
        let mut out = Vec::new();
        for (key, body) in &self.entries {
            let line = serde_json::to_string(&Line {
                key: key.clone(),
                body: body.clone(),
            })
            .expect("strings serialize");
            out.extend_from_slice(line.as_bytes());
            out.push(b'\n');
        }
        let tmp = path.with_extension("tmp");
        std::fs::File::create(&tmp)
            .and_then(|mut f| f.write_all(&out))
            .map_err(|e| Error::io(&tmp, e))?;
        std::fs::rename(&tmp, path).map_err(|e| Error::io(path, e))?;
        self.dirty = false;
        Ok(())
    }
}
