//! Sorted key-value store backends for triple ingest.
//!
//! The store contract is deliberately small — batched writes, ranged
//! ordered reads, and a distinct-key count — because that is all the
//! ingest pipeline needs from a tablet-style database. Keys are plain
//! byte strings ordered lexicographically. Writers from any number of
//! threads may call [`KvStore::put_batch`] concurrently; each batch is
//! applied atomically from a reader's point of view, and a later write of
//! the same key wins.
//!
//! Two backends exist: an in-memory ordered map for fast tests and
//! baselines, and a durable log-structured backend whose write path pays
//! for framing and file I/O, keeping ingest the bottleneck phase.

mod durable;
mod memory;

use std::io;
use std::path::{Path, PathBuf};

use thiserror::Error;

pub use durable::DurableStore;
pub use memory::MemoryStore;

/// One stored record. Ordering is by key bytes, then value, matching the
/// store's scan order for distinct keys.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct Record {
    pub key: Vec<u8>,
    pub value: Vec<u8>,
}

impl Record {
    pub fn new(key: impl Into<Vec<u8>>, value: impl Into<Vec<u8>>) -> Record {
        Record {
            key: key.into(),
            value: value.into(),
        }
    }
}

#[derive(Debug, Error)]
pub enum StoreError {
    #[error("{op} on {path}: {source}")]
    Io {
        op: &'static str,
        path: PathBuf,
        #[source]
        source: io::Error,
    },
    #[error("corrupt store file {path}: {detail}")]
    Corrupt { path: PathBuf, detail: String },
    #[error("store lock poisoned by a panicked writer")]
    Poisoned,
}

impl StoreError {
    fn io(op: &'static str, path: &Path, source: io::Error) -> StoreError {
        StoreError::Io {
            op,
            path: path.to_path_buf(),
            source,
        }
    }
}

/// A sorted key-value store accepting concurrent batched writes.
///
/// Semantics required of every implementation:
/// - keys are ordered lexicographically by bytes;
/// - `put_batch` is atomic: a concurrent reader sees all of a batch or
///   none of it, and batches from distinct threads are linearizable;
/// - re-putting a key replaces its value (last write wins);
/// - `scan_range` returns the half-open interval `[lo, hi)` in ascending
///   key order, one record per distinct key;
/// - `count` returns the number of distinct keys.
pub trait KvStore: Send + Sync {
    fn put_batch(&self, batch: &[Record]) -> Result<(), StoreError>;

    /// Records with `lo <= key`, and `key < hi` when `hi` is given, in
    /// ascending key order. The result is materialized; backends are sized
    /// for desk-scale scans (up to a few million records).
    fn scan_range(&self, lo: &[u8], hi: Option<&[u8]>) -> Result<Vec<Record>, StoreError>;

    /// Number of distinct keys stored.
    fn count(&self) -> Result<u64, StoreError>;
}

/// Everything currently stored, in key order.
pub fn scan_all(store: &dyn KvStore) -> Result<Vec<Record>, StoreError> {
    store.scan_range(&[], None)
}

/// The in-memory backend.
pub fn memory_store() -> MemoryStore {
    MemoryStore::new()
}

/// The durable backend rooted at `path` (created if absent).
pub fn durable_store(path: &Path) -> Result<DurableStore, StoreError> {
    DurableStore::open(path)
}
