//! Embedded key-value store with JSON values.
//!
//! Keys are strings ordered bytewise. Writes happen only through
//! [`Store::update`], which runs a closure against a transaction under the
//! store's write lock and commits its writes all at once or not at all.
//! With a journal file attached, every committed batch is appended as one
//! JSON line before it becomes visible, and the file is replayed on open.

use std::collections::BTreeMap;
use std::fs::{File, OpenOptions};
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::{Mutex, RwLock};

use serde::de::DeserializeOwned;
use serde::Serialize;
use serde_json::Value;

use crate::error::{Error, Result};

type Map = BTreeMap<String, Value>;

#[derive(Debug)]
pub struct Store {
    data: RwLock<Map>,
    journal: Option<Mutex<File>>,
    path: Option<PathBuf>,
}

fn poisoned<T>(_: T) -> Error {
    Error::Store("lock poisoned".into())
}

fn range_prefix<'a>(
    map: &'a Map,
    prefix: &'a str,
) -> impl Iterator<Item = (&'a String, &'a Value)> + 'a {
    map.range(prefix.to_owned()..)
        .take_while(move |(k, _)| k.starts_with(prefix))
}

impl Store {
    pub fn in_memory() -> Self {
        Store {
            data: RwLock::new(Map::new()),
            journal: None,
            path: None,
        }
    }

    /// Opens (or creates) a journal-backed store. A torn final line, left
    /// by a crash mid-append, is cut off.
    pub fn open(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
            std::fs::create_dir_all(dir)?;
        }
        let mut data = Map::new();
        if path.exists() {
            let text = std::fs::read_to_string(path)?;
            let complete = text.rfind('\n').map_or(0, |i| i + 1);
            for (i, line) in text[..complete].lines().enumerate() {
                if line.trim().is_empty() {
                    continue;
                }
                let batch: Map = serde_json::from_str(line)
                    .map_err(|e| Error::Store(format!("{}:{}: {e}", path.display(), i + 1)))?;
                data.extend(batch);
            }
            if complete < text.len() {
                OpenOptions::new()
                    .write(true)
                    .open(path)?
                    .set_len(complete as u64)?;
            }
        }
        let file = OpenOptions::new().create(true).append(true).open(path)?;
        Ok(Store {
            data: RwLock::new(data),
            journal: Some(Mutex::new(file)),
            path: Some(path.to_owned()),
        })
    }

    pub fn path(&self) -> Option<&Path> {
        self.path.as_deref()
    }

    pub fn get(&self, key: &str) -> Result<Option<Value>> {
        Ok(self.data.read().map_err(poisoned)?.get(key).cloned())
    }

    pub fn get_as<T: DeserializeOwned>(&self, key: &str) -> Result<Option<T>> {
        self.get(key)?
            .map(serde_json::from_value)
            .transpose()
            .map_err(Error::from)
    }

    /// Entries whose key starts with `prefix`, in key order.
    pub fn scan_prefix(&self, prefix: &str) -> Result<Vec<(String, Value)>> {
        let data = self.data.read().map_err(poisoned)?;
        Ok(range_prefix(&data, prefix)
            .map(|(k, v)| (k.clone(), v.clone()))
            .collect())
    }

    pub fn len(&self) -> Result<usize> {
        Ok(self.data.read().map_err(poisoned)?.len())
    }

    pub fn is_empty(&self) -> Result<bool> {
        Ok(self.len()? == 0)
    }

    /// Runs `f` with exclusive access. Writes staged through the
    /// transaction are committed only if `f` returns `Ok`.
    pub fn update<R>(&self, f: impl FnOnce(&mut Txn<'_>) -> Result<R>) -> Result<R> {
        let mut data = self.data.write().map_err(poisoned)?;
        let mut txn = Txn {
            base: &data,
            pending: Map::new(),
        };
        let out = f(&mut txn)?;
        let pending = txn.pending;
        if pending.is_empty() {
            return Ok(out);
        }
        if let Some(journal) = &self.journal {
            let mut line = serde_json::to_string(&pending)?;
            line.push('\n');
            let mut file = journal.lock().map_err(poisoned)?;
            file.write_all(line.as_bytes())?;
            file.sync_data()?;
        }
        data.extend(pending);
        Ok(out)
    }

    /// Writes `new` iff the current value equals `expected` (`None` meaning
    /// absent). Returns whether the write happened.
    pub fn compare_and_set(&self, key: &str, expected: Option<&Value>, new: Value) -> Result<bool> {
        self.update(|txn| {
            if txn.get(key) != expected {
                return Ok(false);
            }
            txn.put(key, new);
            Ok(true)
        })
    }
}

/// A view of the store plus staged writes. Reads see staged writes.
pub struct Txn<'a> {
    base: &'a Map,
    pending: Map,
}

impl Txn<'_> {
    pub fn get(&self, key: &str) -> Option<&Value> {
        self.pending.get(key).or_else(|| self.base.get(key))
    }

    pub fn get_as<T: DeserializeOwned>(&self, key: &str) -> Result<Option<T>> {
        self.get(key)
            .cloned()
            .map(serde_json::from_value)
            .transpose()
            .map_err(Error::from)
    }

    pub fn contains(&self, key: &str) -> bool {
        self.get(key).is_some()
    }

    pub fn put(&mut self, key: impl Into<String>, value: Value) {
        self.pending.insert(key.into(), value);
    }

    pub fn put_as<T: Serialize>(&mut self, key: impl Into<String>, value: &T) -> Result<()> {
        self.put(key, serde_json::to_value(value)?);
        Ok(())
    }

    /// Number of keys under `prefix`, staged writes included.
    pub fn count_prefix(&self, prefix: &str) -> usize {
        let staged_new = range_prefix(&self.pending, prefix)
            .filter(|(k, _)| !self.base.contains_key(*k))
            .count();
        range_prefix(self.base, prefix).count() + staged_new
    }
}
