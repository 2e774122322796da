//! Three-phase parallel triple ingest with per-phase rate accounting.
//!
//! For every generated block, workers take contiguous slices of its
//! entries and push each slice through three timed phases, batch by
//! batch:
//!
//! 1. **for** — spell each entry's endpoints as qualified neuron names;
//! 2. **load** — assemble the batch into an in-memory associative array
//!    keyed by (row label, column label);
//! 3. **ingest** — encode records (`row + NUL + col` keys, big-endian
//!    weight bytes) and write them to the store in one batch.
//!
//! Block generation itself is untimed setup: the benchmark measures the
//! labeling, loading, and writing of entries, not the synthesis of the
//! random workload. Each worker runs its own stopwatch per phase; a
//! phase's reported duration is the slowest worker's time — the phase's
//! wall-clock critical path — so rate = entries / duration reflects
//! aggregate throughput.
//!
//! Batches are the unit of failure handling: a store error cancels the
//! run at the next batch boundary everywhere and reports how many entries
//! had landed; a worker panic is caught at join and reported the same
//! way, so nothing fails silently.

use std::collections::BTreeMap;
use std::sync::atomic::{AtomicBool, AtomicU64, Ordering};
use std::time::{Duration, Instant};

use thiserror::Error;

use crate::codec::{CodecError, Schema};
use crate::generator::{generate_block, label_entry, BlockSpec, GenError, RawEntry};
use crate::store::{KvStore, Record, StoreError};

/// Records per `put_batch` call unless the job says otherwise.
pub const DEFAULT_BATCH_SIZE: usize = 10_000;

#[derive(Debug, Error)]
pub enum IngestError {
    #[error("ingest job invalid: {message}")]
    InvalidJob { message: String },
    #[error(transparent)]
    Gen(#[from] GenError),
    #[error(transparent)]
    Codec(#[from] CodecError),
    #[error("store write failed after {completed_entries} entries: {source}")]
    Store {
        completed_entries: u64,
        #[source]
        source: StoreError,
    },
    #[error("worker panicked; run aborted after {completed_entries} entries")]
    WorkerPanic { completed_entries: u64 },
}

/// Throughput of one phase. Zero elapsed time with work done is reported
/// as unmeasurable rather than as an arbitrary number — it means the
/// clock could not resolve the phase, not that the phase was free.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Rate {
    PerSecond(f64),
    Unmeasurable,
}

impl Rate {
    /// Numeric projection: unmeasurable maps to +infinity (a vanishing
    /// duration bounds the true rate from below by any finite value).
    pub fn per_second(&self) -> f64 {
        match self {
            Rate::PerSecond(v) => *v,
            Rate::Unmeasurable => f64::INFINITY,
        }
    }
}

impl std::fmt::Display for Rate {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Rate::PerSecond(v) => write!(f, "{v:.0}/s"),
            Rate::Unmeasurable => f.write_str("unmeasurable"),
        }
    }
}

/// Timing and throughput of one ingest run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IngestMetrics {
    pub entries: u64,
    pub workers: usize,
    pub for_seconds: f64,
    pub load_seconds: f64,
    pub ingest_seconds: f64,
    pub for_rate: Rate,
    pub load_rate: Rate,
    pub ingest_rate: Rate,
}

/// Compute the three rates from raw entry and duration figures.
pub fn measure_rates(
    entries: u64,
    workers: usize,
    for_seconds: f64,
    load_seconds: f64,
    ingest_seconds: f64,
) -> IngestMetrics {
    let rate = |seconds: f64| {
        if entries == 0 {
            Rate::PerSecond(0.0)
        } else if seconds <= 0.0 {
            Rate::Unmeasurable
        } else {
            Rate::PerSecond(entries as f64 / seconds)
        }
    };
    IngestMetrics {
        entries,
        workers,
        for_seconds,
        load_seconds,
        ingest_seconds,
        for_rate: rate(for_seconds),
        load_rate: rate(load_seconds),
        ingest_rate: rate(ingest_seconds),
    }
}

/// Store key for one triple: row label, NUL, column label. NUL is barred
/// from labels, so keys sort row-major with columns nested — ranges of a
/// row stay contiguous.
pub fn triple_key(row: &str, col: &str) -> Vec<u8> {
    let mut key = Vec::with_capacity(row.len() + 1 + col.len());
    key.extend_from_slice(row.as_bytes());
    key.push(0);
    key.extend_from_slice(col.as_bytes());
    key
}

/// Store value for one weight: IEEE-754 bits, big-endian.
pub fn weight_bytes(weight: f64) -> [u8; 8] {
    weight.to_bits().to_be_bytes()
}

/// Inverse of [`weight_bytes`]; `None` if the value is not 8 bytes.
pub fn weight_from_bytes(bytes: &[u8]) -> Option<f64> {
    let bits: [u8; 8] = bytes.try_into().ok()?;
    Some(f64::from_bits(u64::from_be_bytes(bits)))
}

/// One ingest run: which blocks to push through which schema, how wide,
/// and in what batch size.
#[derive(Debug, Clone)]
pub struct IngestJob<'a> {
    pub schema: &'a Schema,
    pub blocks: &'a [BlockSpec],
    pub workers: usize,
    pub batch_size: usize,
}

impl<'a> IngestJob<'a> {
    pub fn new(schema: &'a Schema, blocks: &'a [BlockSpec]) -> IngestJob<'a> {
        IngestJob {
            schema,
            blocks,
            workers: 1,
            batch_size: DEFAULT_BATCH_SIZE,
        }
    }
}

/// Per-worker stopwatch totals.
#[derive(Debug, Default, Clone, Copy)]
struct PhaseTimes {
    labeling: Duration,
    loading: Duration,
    writing: Duration,
}

impl PhaseTimes {
    fn merge_max(&mut self, other: PhaseTimes) {
        self.labeling = self.labeling.max(other.labeling);
        self.loading = self.loading.max(other.loading);
        self.writing = self.writing.max(other.writing);
    }
}

/// Run the full pipeline over every block. On success the store holds one
/// record per distinct triple key and the metrics cover all entries.
pub fn run_ingest(job: &IngestJob<'_>, store: &dyn KvStore) -> Result<IngestMetrics, IngestError> {
    if job.workers == 0 {
        return Err(IngestError::InvalidJob {
            message: "workers must be at least 1".to_owned(),
        });
    }
    if job.batch_size == 0 {
        return Err(IngestError::InvalidJob {
            message: "batch_size must be at least 1".to_owned(),
        });
    }
    let neurons = job.schema.neuron_count();
    for block in job.blocks {
        if block.dim > neurons {
            return Err(GenError::BlockExceedsSchema {
                dim: block.dim,
                neurons,
            }
            .into());
        }
    }

    let cancel = AtomicBool::new(false);
    let completed = AtomicU64::new(0);
    let mut entries_total = 0u64;
    let mut phase_totals = PhaseTimes::default();

    for block in job.blocks {
        // Workload synthesis is setup, not a measured phase.
        let entries = generate_block(block)?;
        entries_total += entries.len() as u64;

        // Blocks run one after another, so per-block critical paths add.
        let block_phases = run_block(job, store, &entries, &cancel, &completed)?;
        phase_totals.labeling += block_phases.labeling;
        phase_totals.loading += block_phases.loading;
        phase_totals.writing += block_phases.writing;
    }

    Ok(measure_rates(
        entries_total,
        job.workers,
        phase_totals.labeling.as_secs_f64(),
        phase_totals.loading.as_secs_f64(),
        phase_totals.writing.as_secs_f64(),
    ))
}

/// Split one block's entries into contiguous per-worker slices, run the
/// worker loops, and fold their stopwatches into the phase-wise maximum.
fn run_block(
    job: &IngestJob<'_>,
    store: &dyn KvStore,
    entries: &[RawEntry],
    cancel: &AtomicBool,
    completed: &AtomicU64,
) -> Result<PhaseTimes, IngestError> {
    let workers = job.workers.min(entries.len()).max(1);
    let per_worker = entries.len() / workers;
    let extra = entries.len() % workers;

    let mut results: Vec<Result<Result<PhaseTimes, StoreError>, ()>> = Vec::new();
    std::thread::scope(|scope| {
        let mut handles = Vec::with_capacity(workers);
        let mut start = 0usize;
        for w in 0..workers {
            let len = per_worker + usize::from(w < extra);
            let slice = &entries[start..start + len];
            start += len;
            handles.push(scope.spawn(move || {
                worker_loop(job.schema, slice, job.batch_size, store, cancel, completed)
            }));
        }
        for handle in handles {
            results.push(handle.join().map_err(|_| ()));
        }
    });

    let mut phases = PhaseTimes::default();
    let mut first_error = None;
    for result in results {
        match result {
            Ok(Ok(times)) => phases.merge_max(times),
            Ok(Err(store_error)) => {
                first_error.get_or_insert(IngestError::Store {
                    completed_entries: completed.load(Ordering::Relaxed),
                    source: store_error,
                });
            }
            Err(()) => {
                cancel.store(true, Ordering::Relaxed);
                first_error.get_or_insert(IngestError::WorkerPanic {
                    completed_entries: completed.load(Ordering::Relaxed),
                });
            }
        }
    }
    match first_error {
        Some(error) => Err(error),
        None => Ok(phases),
    }
}

fn worker_loop(
    schema: &Schema,
    slice: &[RawEntry],
    batch_size: usize,
    store: &dyn KvStore,
    cancel: &AtomicBool,
    completed: &AtomicU64,
) -> Result<PhaseTimes, StoreError> {
    let mut times = PhaseTimes::default();
    for chunk in slice.chunks(batch_size) {
        if cancel.load(Ordering::Relaxed) {
            break;
        }

        // Phase 1 (for): label every entry of the batch.
        let started = Instant::now();
        let mut triples = Vec::with_capacity(chunk.len());
        for entry in chunk {
            // Bounds were checked against the schema before spawning.
            let triple = label_entry(schema, entry).expect("entry within schema bounds");
            triples.push(triple);
        }
        times.labeling += started.elapsed();

        // Phase 2 (load): build the batch's associative array.
        let started = Instant::now();
        let mut assoc: BTreeMap<(String, String), f64> = BTreeMap::new();
        for triple in triples {
            assoc.insert((triple.row, triple.col), triple.weight);
        }
        times.loading += started.elapsed();

        // Phase 3 (ingest): encode records and write them as one batch.
        let started = Instant::now();
        let records: Vec<Record> = assoc
            .iter()
            .map(|((row, col), weight)| Record {
                key: triple_key(row, col),
                value: weight_bytes(*weight).to_vec(),
            })
            .collect();
        if let Err(error) = store.put_batch(&records) {
            cancel.store(true, Ordering::Relaxed);
            return Err(error);
        }
        times.writing += started.elapsed();

        completed.fetch_add(chunk.len() as u64, Ordering::Relaxed);
    }
    Ok(times)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::schema::CortexConfig;
    use crate::store::{memory_store, scan_all, MemoryStore};

    fn test_schema() -> Schema {
        // Plenty of index space for dim-100 blocks.
        Schema::cortex(CortexConfig::canonical(1_000_000, 1_000)).unwrap()
    }

    #[test]
    fn single_block_lands_every_entry() {
        let schema = test_schema();
        let blocks = [BlockSpec::new(100, 0.1, 7)];
        let job = IngestJob::new(&schema, &blocks);
        let store = memory_store();
        let metrics = run_ingest(&job, &store).unwrap();

        assert_eq!(metrics.entries, 1_000);
        assert_eq!(store.count().unwrap(), 1_000);
        assert!(metrics.for_seconds > 0.0);
        assert!(metrics.load_seconds > 0.0);
        assert!(metrics.ingest_seconds > 0.0);
        for rate in [metrics.for_rate, metrics.load_rate, metrics.ingest_rate] {
            match rate {
                Rate::PerSecond(v) => assert!(v > 0.0),
                Rate::Unmeasurable => panic!("phase too fast to time"),
            }
        }
    }

    #[test]
    fn empty_run_reports_zero_rates_and_touches_nothing() {
        let schema = test_schema();
        let job = IngestJob::new(&schema, &[]);
        let store = memory_store();
        let metrics = run_ingest(&job, &store).unwrap();
        assert_eq!(metrics.entries, 0);
        assert_eq!(metrics.for_rate, Rate::PerSecond(0.0));
        assert_eq!(metrics.load_rate, Rate::PerSecond(0.0));
        assert_eq!(metrics.ingest_rate, Rate::PerSecond(0.0));
        assert_eq!(store.count().unwrap(), 0);
    }

    #[test]
    fn worker_count_does_not_change_store_contents() {
        let schema = test_schema();
        let blocks = [BlockSpec::new(200, 0.05, 11), BlockSpec::new(64, 0.5, 12)];

        let solo = memory_store();
        let mut job = IngestJob::new(&schema, &blocks);
        job.batch_size = 128;
        run_ingest(&job, &solo).unwrap();

        let quad = memory_store();
        job.workers = 4;
        run_ingest(&job, &quad).unwrap();

        assert_eq!(scan_all(&solo).unwrap(), scan_all(&quad).unwrap());
    }

    #[test]
    fn keys_arrive_in_lexicographic_order() {
        let schema = test_schema();
        let blocks = [BlockSpec::new(100, 0.1, 3)];
        let mut job = IngestJob::new(&schema, &blocks);
        job.workers = 2;
        let store = memory_store();
        run_ingest(&job, &store).unwrap();
        let records = scan_all(&store).unwrap();
        assert!(records.windows(2).all(|w| w[0].key < w[1].key));
        // Values decode back to weights in (0, 1].
        for record in &records {
            let weight = weight_from_bytes(&record.value).unwrap();
            assert!(weight > 0.0 && weight <= 1.0);
        }
    }

    #[test]
    fn invalid_jobs_are_rejected() {
        let schema = test_schema();
        let blocks = [BlockSpec::new(10, 0.1, 1)];
        let store = memory_store();

        let mut job = IngestJob::new(&schema, &blocks);
        job.workers = 0;
        assert!(matches!(
            run_ingest(&job, &store),
            Err(IngestError::InvalidJob { .. })
        ));

        let mut job = IngestJob::new(&schema, &blocks);
        job.batch_size = 0;
        assert!(matches!(
            run_ingest(&job, &store),
            Err(IngestError::InvalidJob { .. })
        ));
    }

    #[test]
    fn oversized_block_is_rejected_before_any_write() {
        let mut config = CortexConfig::canonical(160, 8);
        config.regions_per_hemisphere = 2;
        config.neurons_per_microcolumn = 10;
        let schema = Schema::cortex(config).unwrap();
        let blocks = [BlockSpec::new(1_000, 0.001, 1)];
        let store = memory_store();
        let job = IngestJob::new(&schema, &blocks);
        assert!(matches!(
            run_ingest(&job, &store),
            Err(IngestError::Gen(GenError::BlockExceedsSchema { .. }))
        ));
        assert_eq!(store.count().unwrap(), 0);
    }

    /// Store that fails every batch after the first few, for abort paths.
    struct FailingStore {
        inner: MemoryStore,
        remaining_ok: AtomicU64,
    }

    impl KvStore for FailingStore {
        fn put_batch(&self, batch: &[Record]) -> Result<(), StoreError> {
            if self.remaining_ok.load(Ordering::Relaxed) == 0 {
                return Err(StoreError::Poisoned);
            }
            self.remaining_ok.fetch_sub(1, Ordering::Relaxed);
            self.inner.put_batch(batch)
        }

        fn scan_range(&self, lo: &[u8], hi: Option<&[u8]>) -> Result<Vec<Record>, StoreError> {
            self.inner.scan_range(lo, hi)
        }

        fn count(&self) -> Result<u64, StoreError> {
            self.inner.count()
        }
    }

    #[test]
    fn store_failure_aborts_with_partial_progress() {
        let schema = test_schema();
        let blocks = [BlockSpec::new(100, 0.5, 21)]; // 5,000 entries
        let mut job = IngestJob::new(&schema, &blocks);
        job.batch_size = 500;
        let store = FailingStore {
            inner: memory_store(),
            remaining_ok: AtomicU64::new(3),
        };
        match run_ingest(&job, &store) {
            Err(IngestError::Store {
                completed_entries, ..
            }) => {
                assert_eq!(completed_entries, 1_500, "three batches of 500 landed");
            }
            other => panic!("expected store failure, got {other:?}"),
        }
    }

    /// Store whose writes panic, standing in for a worker bug.
    struct PanickingStore;

    impl KvStore for PanickingStore {
        fn put_batch(&self, _batch: &[Record]) -> Result<(), StoreError> {
            panic!("synthetic worker failure");
        }

        fn scan_range(&self, _lo: &[u8], _hi: Option<&[u8]>) -> Result<Vec<Record>, StoreError> {
            Ok(Vec::new())
        }

        fn count(&self) -> Result<u64, StoreError> {
            Ok(0)
        }
    }

    #[test]
    fn worker_panic_surfaces_as_an_error() {
        let schema = test_schema();
        let blocks = [BlockSpec::new(50, 0.5, 5)];
        let mut job = IngestJob::new(&schema, &blocks);
        job.workers = 2;
        job.batch_size = 100;
        assert!(matches!(
            run_ingest(&job, &PanickingStore),
            Err(IngestError::WorkerPanic {
                completed_entries: 0
            })
        ));
    }

    #[test]
    fn measure_rates_matches_definitions() {
        let m = measure_rates(500, 1, 0.5, 0.5, 0.5);
        assert_eq!(m.for_rate, Rate::PerSecond(1_000.0));

        let m = measure_rates(1_000, 1, 1.0, 2.0, 4.0);
        assert_eq!(m.for_rate, Rate::PerSecond(1_000.0));
        assert_eq!(m.load_rate, Rate::PerSecond(500.0));
        assert_eq!(m.ingest_rate, Rate::PerSecond(250.0));

        let m = measure_rates(0, 1, 0.0, 0.0, 0.0);
        assert_eq!(m.for_rate, Rate::PerSecond(0.0));

        // Work done in unmeasurably little time is not a zero rate.
        let m = measure_rates(10, 1, 0.0, 1.0, 1.0);
        assert_eq!(m.for_rate, Rate::Unmeasurable);
        assert!(m.for_rate.per_second().is_infinite());
    }

    #[test]
    fn triple_keys_group_rows_contiguously() {
        let a = triple_key("row_a", "col_z");
        let b = triple_key("row_a!", "col_a");
        // NUL sorts before every printable byte, so all of row_a's columns
        // precede any longer row label sharing the prefix.
        assert!(a < b);
        assert_eq!(weight_from_bytes(&weight_bytes(0.25)), Some(0.25));
        assert_eq!(weight_from_bytes(b"short"), None);
    }
}
