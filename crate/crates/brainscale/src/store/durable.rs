//! Durable log-structured store backend.
//!
//! Layout: the root directory holds a `MANIFEST` naming the format version
//! and shard count, plus one `shard-NN/` directory per shard. Each shard
//! keeps a write-ahead log (`wal`), numbered sorted-run files
//! (`run-000001`, ...), and its own `MANIFEST` listing live runs. Records
//! in both the log and the runs use one framing:
//!
//! ```text
//! [key_len: u32 LE][value_len: u32 LE][seq: u64 LE][key bytes][value bytes]
//! ```
//!
//! A write appends framed records to the shard's log, flushes the buffer
//! to the OS, and mirrors the records into the shard's in-memory table.
//! When the table outgrows its budget it is written out as a sorted run
//! and the log is truncated; when runs pile up they are merged into one.
//! Every record carries a global sequence number, and every read path
//! resolves duplicate keys by highest sequence, so recovery and
//! cross-shard merges need no other coordination.
//!
//! Recovery replays each shard's log. A torn tail — a final frame cut
//! short by a crash — is detected by its truncated length and discarded;
//! anything before it is intact. There is no checksumming and no fsync:
//! durability here means "survives process exit", which is what a
//! benchmark backend needs while still paying a realistic write cost.
//!
//! Keys are assigned to shards by hash. Placement is only load balancing:
//! scans merge all shards and sequence numbers order duplicates, so
//! correctness never depends on which shard holds a key.

use std::collections::BTreeMap;
use std::fs::{self, File, OpenOptions};
use std::io::{self, BufReader, BufWriter, Read, Seek, SeekFrom, Write};
use std::ops::Bound;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{Mutex, RwLock};

use super::{KvStore, Record, StoreError};

/// Key to latest (sequence, value); the max-sequence entry wins reads.
type SeqMap = BTreeMap<Vec<u8>, (u64, Vec<u8>)>;

const FORMAT_VERSION: u32 = 1;
const FRAME_HEADER_LEN: usize = 16;
/// Upper bound on a single key or value, to keep corrupt length fields
/// from triggering absurd allocations.
const MAX_FIELD_LEN: u32 = 1 << 30;

/// Tuning knobs. Defaults suit desk-scale benchmarking; tests shrink them
/// to exercise rotation and compaction cheaply.
#[derive(Debug, Clone, Copy)]
pub struct DurableOptions {
    /// Number of shards created for a fresh store. Reopening adopts the
    /// shard count persisted in the root manifest.
    pub shards: u32,
    /// Memtable byte budget per shard before it is flushed to a run.
    pub flush_threshold: usize,
    /// Maximum live runs per shard before they are merged into one.
    pub max_runs: usize,
}

impl Default for DurableOptions {
    fn default() -> DurableOptions {
        DurableOptions {
            shards: 16,
            flush_threshold: 4 << 20,
            max_runs: 12,
        }
    }
}

/// The durable backend. See the module docs for the on-disk layout.
///
/// Concurrency: writers hash their records to shards and take only the
/// affected shard locks, so batches to different shards proceed in
/// parallel. Readers take the outer lock exclusively, which is what makes
/// every batch atomic from a reader's point of view.
pub struct DurableStore {
    /// Read side taken by writers (many at once), write side by readers.
    gate: RwLock<()>,
    shards: Vec<Mutex<Shard>>,
    next_seq: AtomicU64,
}

impl DurableStore {
    pub fn open(root: &Path) -> Result<DurableStore, StoreError> {
        DurableStore::open_with(root, DurableOptions::default())
    }

    pub fn open_with(root: &Path, options: DurableOptions) -> Result<DurableStore, StoreError> {
        if options.shards == 0 {
            return Err(StoreError::Corrupt {
                path: root.to_path_buf(),
                detail: "shard count must be positive".to_owned(),
            });
        }
        fs::create_dir_all(root).map_err(|e| StoreError::io("create store root", root, e))?;
        let shard_count = read_or_init_root_manifest(root, options.shards)?;

        let mut shards = Vec::with_capacity(shard_count as usize);
        let mut max_seq = 0u64;
        for i in 0..shard_count {
            let shard = Shard::open(root.join(format!("shard-{i:02}")), options)?;
            max_seq = max_seq.max(shard.last_seq);
            shards.push(Mutex::new(shard));
        }
        Ok(DurableStore {
            gate: RwLock::new(()),
            shards,
            next_seq: AtomicU64::new(max_seq + 1),
        })
    }

    fn shard_of(&self, key: &[u8]) -> usize {
        // FNV-1a: fast, stable across builds, and well mixed for the short
        // label keys this store sees.
        let mut hash = 0xcbf2_9ce4_8422_2325u64;
        for &byte in key {
            hash ^= u64::from(byte);
            hash = hash.wrapping_mul(0x0000_0100_0000_01b3);
        }
        (hash % self.shards.len() as u64) as usize
    }
}

impl KvStore for DurableStore {
    fn put_batch(&self, batch: &[Record]) -> Result<(), StoreError> {
        let _writing = self.gate.read().map_err(|_| StoreError::Poisoned)?;

        // Group records by shard, preserving batch order within a shard so
        // a later duplicate in the same batch wins.
        let mut groups: Vec<Vec<&Record>> = vec![Vec::new(); self.shards.len()];
        for record in batch {
            groups[self.shard_of(&record.key)].push(record);
        }

        for (index, group) in groups.iter().enumerate() {
            if group.is_empty() {
                continue;
            }
            let mut shard = self.shards[index]
                .lock()
                .map_err(|_| StoreError::Poisoned)?;
            shard.append_batch(group, &self.next_seq)?;
            shard.maybe_rotate()?;
        }
        Ok(())
    }

    fn scan_range(&self, lo: &[u8], hi: Option<&[u8]>) -> Result<Vec<Record>, StoreError> {
        let _reading = self.gate.write().map_err(|_| StoreError::Poisoned)?;
        let mut merged: SeqMap = BTreeMap::new();
        for shard in &self.shards {
            let shard = shard.lock().map_err(|_| StoreError::Poisoned)?;
            shard.fold_range(lo, hi, &mut |key, seq, value| match merged.get(&key) {
                Some(&(existing, _)) if existing > seq => {}
                _ => {
                    merged.insert(key, (seq, value));
                }
            })?;
        }
        Ok(merged
            .into_iter()
            .map(|(key, (_, value))| Record { key, value })
            .collect())
    }

    fn count(&self) -> Result<u64, StoreError> {
        let _reading = self.gate.write().map_err(|_| StoreError::Poisoned)?;
        let mut keys = std::collections::BTreeSet::new();
        for shard in &self.shards {
            let shard = shard.lock().map_err(|_| StoreError::Poisoned)?;
            shard.fold_range(&[], None, &mut |key, _, _| {
                keys.insert(key);
            })?;
        }
        Ok(keys.len() as u64)
    }
}

struct Shard {
    dir: PathBuf,
    wal_path: PathBuf,
    wal: BufWriter<File>,
    memtable: SeqMap,
    memtable_bytes: usize,
    /// Live run file names, oldest first.
    runs: Vec<String>,
    next_run_id: u64,
    /// Highest sequence number this shard has seen (log or runs).
    last_seq: u64,
    flush_threshold: usize,
    max_runs: usize,
}

impl Shard {
    fn open(dir: PathBuf, options: DurableOptions) -> Result<Shard, StoreError> {
        fs::create_dir_all(&dir).map_err(|e| StoreError::io("create shard dir", &dir, e))?;
        let (runs, next_run_id, mut last_seq) = read_shard_manifest(&dir)?;

        let wal_path = dir.join("wal");
        let mut memtable = BTreeMap::new();
        let mut memtable_bytes = 0usize;
        if wal_path.exists() {
            let replayed = replay_wal(&wal_path, &mut |key, seq, value| {
                memtable_bytes += key.len() + value.len();
                last_seq = last_seq.max(seq);
                memtable.insert(key, (seq, value));
            })?;
            if let Some(keep) = replayed.truncate_to {
                // Torn tail: cut the log back to the last intact frame.
                let file = OpenOptions::new()
                    .write(true)
                    .open(&wal_path)
                    .map_err(|e| StoreError::io("open log for repair", &wal_path, e))?;
                file.set_len(keep)
                    .map_err(|e| StoreError::io("truncate torn log tail", &wal_path, e))?;
            }
        }

        let wal = OpenOptions::new()
            .append(true)
            .create(true)
            .open(&wal_path)
            .map_err(|e| StoreError::io("open log", &wal_path, e))?;
        Ok(Shard {
            dir,
            wal_path,
            wal: BufWriter::new(wal),
            memtable,
            memtable_bytes,
            runs,
            next_run_id,
            last_seq,
            flush_threshold: options.flush_threshold,
            max_runs: options.max_runs,
        })
    }

    fn append_batch(
        &mut self,
        records: &[&Record],
        next_seq: &AtomicU64,
    ) -> Result<(), StoreError> {
        for record in records {
            let seq = next_seq.fetch_add(1, Ordering::Relaxed);
            write_frame(&mut self.wal, &record.key, seq, &record.value)
                .map_err(|e| StoreError::io("append to log", &self.wal_path, e))?;
            self.memtable_bytes += record.key.len() + record.value.len();
            self.memtable
                .insert(record.key.clone(), (seq, record.value.clone()));
            self.last_seq = seq;
        }
        // Push the batch to the OS before acknowledging it.
        self.wal
            .flush()
            .map_err(|e| StoreError::io("flush log", &self.wal_path, e))?;
        Ok(())
    }

    fn maybe_rotate(&mut self) -> Result<(), StoreError> {
        if self.memtable_bytes < self.flush_threshold || self.memtable.is_empty() {
            return Ok(());
        }
        self.write_run(None)?;
        self.memtable.clear();
        self.memtable_bytes = 0;
        let truncated = self
            .wal
            .get_mut()
            .set_len(0)
            .and_then(|()| self.wal.get_mut().seek(SeekFrom::Start(0)).map(|_| ()));
        truncated.map_err(|e| StoreError::io("truncate log after flush", &self.wal_path, e))?;

        if self.runs.len() > self.max_runs {
            self.compact()?;
        }
        Ok(())
    }

    /// Write records to a fresh numbered run and commit it to the
    /// manifest. `replacing == None` flushes the memtable and appends the
    /// run; `replacing == Some(records)` writes those records as the sole
    /// surviving run (compaction).
    fn write_run(&mut self, replacing: Option<SeqMap>) -> Result<(), StoreError> {
        let name = format!("run-{:06}", self.next_run_id);
        let tmp_path = self.dir.join("run.tmp");
        let final_path = self.dir.join(&name);
        {
            let file = File::create(&tmp_path)
                .map_err(|e| StoreError::io("create run file", &tmp_path, e))?;
            let mut writer = BufWriter::new(file);
            let records = replacing.as_ref().unwrap_or(&self.memtable);
            for (key, (seq, value)) in records {
                write_frame(&mut writer, key, *seq, value)
                    .map_err(|e| StoreError::io("write run file", &tmp_path, e))?;
            }
            writer
                .flush()
                .map_err(|e| StoreError::io("flush run file", &tmp_path, e))?;
        }
        fs::rename(&tmp_path, &final_path)
            .map_err(|e| StoreError::io("commit run file", &final_path, e))?;

        let old_runs = if replacing.is_some() {
            std::mem::replace(&mut self.runs, vec![name])
        } else {
            self.runs.push(name);
            Vec::new()
        };
        self.next_run_id += 1;
        self.write_manifest()?;
        // The manifest no longer references these; removal is best-effort.
        for run in old_runs {
            let _ = fs::remove_file(self.dir.join(run));
        }
        Ok(())
    }

    /// Merge every live run into one, resolving duplicates by sequence.
    /// Called right after a flush, so the memtable is empty.
    fn compact(&mut self) -> Result<(), StoreError> {
        let mut merged: SeqMap = BTreeMap::new();
        for run in &self.runs {
            let path = self.dir.join(run);
            read_run(&path, &mut |key, seq, value| match merged.get(&key) {
                Some(&(existing, _)) if existing > seq => {}
                _ => {
                    merged.insert(key, (seq, value));
                }
            })?;
        }
        self.write_run(Some(merged))
    }

    fn write_manifest(&self) -> Result<(), StoreError> {
        let tmp = self.dir.join("MANIFEST.tmp");
        let path = self.dir.join("MANIFEST");
        let mut text = format!(
            "version {FORMAT_VERSION}\nnext_run {}\nlast_seq {}\n",
            self.next_run_id, self.last_seq
        );
        for run in &self.runs {
            text.push_str("run ");
            text.push_str(run);
            text.push('\n');
        }
        fs::write(&tmp, text).map_err(|e| StoreError::io("write manifest", &tmp, e))?;
        fs::rename(&tmp, &path).map_err(|e| StoreError::io("commit manifest", &path, e))?;
        Ok(())
    }

    /// Feed every record in `[lo, hi)` — memtable and runs alike — to the
    /// sink as (key, seq, value). Duplicate keys are the caller's problem;
    /// the sequence number disambiguates.
    fn fold_range(
        &self,
        lo: &[u8],
        hi: Option<&[u8]>,
        sink: &mut dyn FnMut(Vec<u8>, u64, Vec<u8>),
    ) -> Result<(), StoreError> {
        let upper = match hi {
            Some(hi) => Bound::Excluded(hi.to_vec()),
            None => Bound::Unbounded,
        };
        for (key, (seq, value)) in self.memtable.range((Bound::Included(lo.to_vec()), upper)) {
            sink(key.clone(), *seq, value.clone());
        }
        for run in &self.runs {
            let path = self.dir.join(run);
            read_run(&path, &mut |key, seq, value| {
                // Runs are sorted; a range filter with early exit would be
                // possible, but whole-run streaming keeps this simple and
                // desk-scale scans read every run anyway.
                let in_range = key.as_slice() >= lo && hi.is_none_or(|hi| key.as_slice() < hi);
                if in_range {
                    sink(key, seq, value);
                }
            })?;
        }
        Ok(())
    }
}

fn read_or_init_root_manifest(root: &Path, shards: u32) -> Result<u32, StoreError> {
    let path = root.join("MANIFEST");
    if !path.exists() {
        let tmp = root.join("MANIFEST.tmp");
        fs::write(&tmp, format!("version {FORMAT_VERSION}\nshards {shards}\n"))
            .map_err(|e| StoreError::io("write manifest", &tmp, e))?;
        fs::rename(&tmp, &path).map_err(|e| StoreError::io("commit manifest", &path, e))?;
        return Ok(shards);
    }
    let text = fs::read_to_string(&path).map_err(|e| StoreError::io("read manifest", &path, e))?;
    let mut version = None;
    let mut count = None;
    for line in text.lines() {
        match line.split_once(' ') {
            Some(("version", v)) => version = v.parse::<u32>().ok(),
            Some(("shards", v)) => count = v.parse::<u32>().ok(),
            _ => {}
        }
    }
    if version != Some(FORMAT_VERSION) {
        return Err(StoreError::Corrupt {
            path,
            detail: format!("unsupported or missing version (want {FORMAT_VERSION})"),
        });
    }
    count.filter(|&c| c > 0).ok_or(StoreError::Corrupt {
        path,
        detail: "missing shard count".to_owned(),
    })
}

/// Returns (runs oldest-first, next_run_id, last flushed seq).
fn read_shard_manifest(dir: &Path) -> Result<(Vec<String>, u64, u64), StoreError> {
    let path = dir.join("MANIFEST");
    if !path.exists() {
        return Ok((Vec::new(), 1, 0));
    }
    let text = fs::read_to_string(&path).map_err(|e| StoreError::io("read manifest", &path, e))?;
    let mut version = None;
    let mut next_run = None;
    let mut last_seq = 0;
    let mut runs = Vec::new();
    for line in text.lines() {
        match line.split_once(' ') {
            Some(("version", v)) => version = v.parse::<u32>().ok(),
            Some(("next_run", v)) => next_run = v.parse::<u64>().ok(),
            Some(("last_seq", v)) => last_seq = v.parse::<u64>().unwrap_or(0),
            Some(("run", name)) => runs.push(name.to_owned()),
            _ => {}
        }
    }
    if version != Some(FORMAT_VERSION) {
        return Err(StoreError::Corrupt {
            path,
            detail: format!("unsupported or missing version (want {FORMAT_VERSION})"),
        });
    }
    let next_run = next_run.ok_or_else(|| StoreError::Corrupt {
        path: path.clone(),
        detail: "missing next_run".to_owned(),
    })?;
    Ok((runs, next_run, last_seq))
}

fn write_frame<W: Write>(w: &mut W, key: &[u8], seq: u64, value: &[u8]) -> io::Result<()> {
    w.write_all(&(key.len() as u32).to_le_bytes())?;
    w.write_all(&(value.len() as u32).to_le_bytes())?;
    w.write_all(&seq.to_le_bytes())?;
    w.write_all(key)?;
    w.write_all(value)
}

/// Fill `buf` or report how many bytes arrived before EOF.
fn read_full(r: &mut impl Read, buf: &mut [u8]) -> io::Result<usize> {
    let mut filled = 0;
    while filled < buf.len() {
        let n = r.read(&mut buf[filled..])?;
        if n == 0 {
            break;
        }
        filled += n;
    }
    Ok(filled)
}

enum FrameRead {
    Frame {
        key: Vec<u8>,
        seq: u64,
        value: Vec<u8>,
    },
    CleanEof,
    Torn,
}

fn read_frame(r: &mut impl Read) -> io::Result<FrameRead> {
    let mut header = [0u8; FRAME_HEADER_LEN];
    let got = read_full(r, &mut header)?;
    if got == 0 {
        return Ok(FrameRead::CleanEof);
    }
    if got < FRAME_HEADER_LEN {
        return Ok(FrameRead::Torn);
    }
    let key_len = u32::from_le_bytes(header[0..4].try_into().unwrap());
    let value_len = u32::from_le_bytes(header[4..8].try_into().unwrap());
    let seq = u64::from_le_bytes(header[8..16].try_into().unwrap());
    if key_len > MAX_FIELD_LEN || value_len > MAX_FIELD_LEN {
        // Garbage lengths are indistinguishable from a torn header.
        return Ok(FrameRead::Torn);
    }
    let mut key = vec![0u8; key_len as usize];
    if read_full(r, &mut key)? < key.len() {
        return Ok(FrameRead::Torn);
    }
    let mut value = vec![0u8; value_len as usize];
    if read_full(r, &mut value)? < value.len() {
        return Ok(FrameRead::Torn);
    }
    Ok(FrameRead::Frame { key, seq, value })
}

struct WalReplay {
    /// Set when a torn tail was found: byte offset the log should be cut
    /// back to.
    truncate_to: Option<u64>,
}

fn replay_wal(
    path: &Path,
    sink: &mut dyn FnMut(Vec<u8>, u64, Vec<u8>),
) -> Result<WalReplay, StoreError> {
    let file = File::open(path).map_err(|e| StoreError::io("open log", path, e))?;
    let mut reader = BufReader::new(file);
    let mut good_bytes = 0u64;
    loop {
        match read_frame(&mut reader).map_err(|e| StoreError::io("replay log", path, e))? {
            FrameRead::Frame { key, seq, value } => {
                good_bytes += (FRAME_HEADER_LEN + key.len() + value.len()) as u64;
                sink(key, seq, value);
            }
            FrameRead::CleanEof => return Ok(WalReplay { truncate_to: None }),
            FrameRead::Torn => {
                return Ok(WalReplay {
                    truncate_to: Some(good_bytes),
                })
            }
        }
    }
}

/// Stream a sorted run. Unlike the log, a run is written atomically, so a
/// short frame here is corruption, not a tolerable tail.
fn read_run(path: &Path, sink: &mut dyn FnMut(Vec<u8>, u64, Vec<u8>)) -> Result<(), StoreError> {
    let file = File::open(path).map_err(|e| StoreError::io("open run file", path, e))?;
    let mut reader = BufReader::new(file);
    loop {
        match read_frame(&mut reader).map_err(|e| StoreError::io("read run file", path, e))? {
            FrameRead::Frame { key, seq, value } => sink(key, seq, value),
            FrameRead::CleanEof => return Ok(()),
            FrameRead::Torn => {
                return Err(StoreError::Corrupt {
                    path: path.to_path_buf(),
                    detail: "truncated frame in sorted run".to_owned(),
                })
            }
        }
    }
}
