//! In-memory store backend: a mutex-guarded ordered map.

use std::collections::BTreeMap;
use std::ops::Bound;
use std::sync::Mutex;

use super::{KvStore, Record, StoreError};

/// Ordered map behind a single lock. Batches are trivially atomic because
/// every operation holds the lock for its whole duration; concurrent
/// writers serialize, which is acceptable for a baseline backend.
#[derive(Debug, Default)]
pub struct MemoryStore {
    map: Mutex<BTreeMap<Vec<u8>, Vec<u8>>>,
}

impl MemoryStore {
    pub fn new() -> MemoryStore {
        MemoryStore::default()
    }
}

impl KvStore for MemoryStore {
    fn put_batch(&self, batch: &[Record]) -> Result<(), StoreError> {
        let mut map = self.map.lock().map_err(|_| StoreError::Poisoned)?;
        for record in batch {
            map.insert(record.key.clone(), record.value.clone());
        }
        Ok(())
    }

    fn scan_range(&self, lo: &[u8], hi: Option<&[u8]>) -> Result<Vec<Record>, StoreError> {
        let map = self.map.lock().map_err(|_| StoreError::Poisoned)?;
        let upper = match hi {
            Some(hi) => Bound::Excluded(hi.to_vec()),
            None => Bound::Unbounded,
        };
        Ok(map
            .range((Bound::Included(lo.to_vec()), upper))
            .map(|(key, value)| Record {
                key: key.clone(),
                value: value.clone(),
            })
            .collect())
    }

    fn count(&self) -> Result<u64, StoreError> {
        let map = self.map.lock().map_err(|_| StoreError::Poisoned)?;
        Ok(map.len() as u64)
    }
}
