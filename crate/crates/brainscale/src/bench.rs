//! Benchmark sweeps over (entry count x worker count) grids.
//!
//! Each cell of a sweep ingests exactly `entries` triples: the block
//! dimension is derived as `ceil(sqrt(entries / 0.001))` and the sparsity
//! back-computed as `entries / dim^2`, so the rounded entry target equals
//! the requested count while density stays at roughly one entry per
//! thousand positions. The cell's seed mixes only the plan seed and entry
//! count — never the worker count or trial — so every cell at a given
//! entry count ingests the identical triple multiset and timing is the
//! only variable.
//!
//! A row's `total_seconds` is the wall-clock time of the whole cell,
//! including workload generation; the three rates come from the phase
//! stopwatches inside the run (see the ingest module for how per-worker
//! times aggregate).

use std::fmt::Write as _;
use std::path::PathBuf;
use std::time::Instant;

use thiserror::Error;

use crate::codec::Schema;
use crate::generator::{BlockSpec, GenError};
use crate::ingest::{run_ingest, IngestError, IngestJob, DEFAULT_BATCH_SIZE};
use crate::schema::{ConfigError, CortexConfig, SchemaConfig};
use crate::store::{durable_store, memory_store, KvStore, StoreError};

/// Nominal density of every benchmark block.
pub const CELL_SPARSITY: f64 = 1e-3;

/// Plan seed when nothing else is specified.
pub const DEFAULT_SEED: u64 = 42;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Backend {
    Memory,
    Durable,
}

#[derive(Debug, Error)]
pub enum BenchError {
    #[error("benchmark plan invalid: {message}")]
    InvalidPlan { message: String },
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Gen(#[from] GenError),
    #[error(transparent)]
    Ingest(#[from] IngestError),
    #[error(transparent)]
    Store(#[from] StoreError),
    #[error("{op}: {source}")]
    Io {
        op: String,
        #[source]
        source: std::io::Error,
    },
}

/// A sweep that failed part-way. Rows that finished before the failure
/// are preserved for emission.
#[derive(Debug, Error)]
#[error("sweep aborted after {} completed rows: {cause}", completed.len())]
pub struct SweepAborted {
    pub completed: Vec<BenchResultRow>,
    #[source]
    pub cause: BenchError,
}

/// What to sweep: the Cartesian product of entry counts and worker
/// counts, repeated `trials` times per cell.
#[derive(Debug, Clone)]
pub struct BenchPlan {
    pub entry_counts: Vec<u64>,
    pub worker_counts: Vec<usize>,
    pub trials: u32,
    pub backend: Backend,
    pub seed: u64,
    pub schema: SchemaConfig,
    pub batch_size: usize,
    /// Directory for durable-backend cell stores; the system temp
    /// directory when unset. Each cell gets a fresh store that is removed
    /// afterwards.
    pub durable_root: Option<PathBuf>,
}

impl Default for BenchPlan {
    fn default() -> BenchPlan {
        BenchPlan::desk_defaults()
    }
}

impl BenchPlan {
    /// Defaults sized to finish on a workstation in minutes.
    pub fn desk_defaults() -> BenchPlan {
        BenchPlan {
            entry_counts: vec![500_000, 1_000_000, 5_000_000],
            worker_counts: vec![1, 2, 4, 8],
            trials: 3,
            backend: Backend::Memory,
            seed: DEFAULT_SEED,
            schema: SchemaConfig::Cortex(CortexConfig::default()),
            batch_size: DEFAULT_BATCH_SIZE,
            durable_root: None,
        }
    }

    /// The full-size preset: 50M/100M/500M entries across 1..18 workers.
    /// Provided for parity; it needs server-class hardware and hours.
    pub fn paper_preset() -> BenchPlan {
        BenchPlan {
            entry_counts: vec![50_000_000, 100_000_000, 500_000_000],
            worker_counts: vec![1, 2, 4, 6, 8, 10, 12, 14, 16, 18],
            ..BenchPlan::desk_defaults()
        }
    }

    pub fn validate(&self) -> Result<(), BenchError> {
        let invalid = |message: String| BenchError::InvalidPlan { message };
        if self.entry_counts.is_empty() {
            return Err(invalid("entry_counts must not be empty".into()));
        }
        if self.worker_counts.is_empty() {
            return Err(invalid("worker_counts must not be empty".into()));
        }
        if self.entry_counts.contains(&0) {
            return Err(invalid("entry counts must be at least 1".into()));
        }
        if self.worker_counts.contains(&0) {
            return Err(invalid("worker counts must be at least 1".into()));
        }
        if self.trials == 0 {
            return Err(invalid("trials must be at least 1".into()));
        }
        if self.batch_size == 0 {
            return Err(invalid("batch_size must be at least 1".into()));
        }
        Ok(())
    }
}

/// One benchmark measurement. Rates are numeric projections of the run's
/// phase rates (an unmeasurably fast phase becomes +infinity).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BenchResultRow {
    pub entries: u64,
    pub workers: usize,
    pub trial: u32,
    pub for_rate: f64,
    pub load_rate: f64,
    pub ingest_rate: f64,
    pub total_seconds: f64,
}

/// 64-bit finalizer with full avalanche, so nearby entry counts yield
/// unrelated seeds.
fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Seed for all cells at one entry count. Deliberately independent of
/// worker count and trial: the workload must not vary across them.
pub fn cell_seed(plan_seed: u64, entries: u64) -> u64 {
    splitmix64(plan_seed ^ splitmix64(entries))
}

/// The block ingested by every cell at `entries`: sized so the rounded
/// entry target is exact while density stays near [`CELL_SPARSITY`].
pub fn block_for_entries(entries: u64, seed: u64) -> Result<BlockSpec, BenchError> {
    if entries == 0 {
        return Err(BenchError::InvalidPlan {
            message: "cell entry count must be at least 1".into(),
        });
    }
    let dim = ((entries as f64 / CELL_SPARSITY).sqrt().ceil() as u64).max(1);
    let positions = dim
        .checked_mul(dim)
        .ok_or_else(|| BenchError::InvalidPlan {
            message: format!("entry count {entries} is too large to size a block"),
        })?;
    let sparsity = entries as f64 / positions as f64;
    let spec = BlockSpec::new(dim, sparsity, seed);
    let derived = spec.target_entries()?;
    if derived != entries {
        // Unreachable for any u64 that fits the position space; kept as a
        // hard check because exact cell sizes are a published contract.
        return Err(BenchError::InvalidPlan {
            message: format!("cell derivation for {entries} entries produced {derived}"),
        });
    }
    Ok(spec)
}

fn cell_store(
    plan: &BenchPlan,
    entries: u64,
    workers: usize,
    trial: u32,
) -> Result<(Box<dyn KvStore>, Option<PathBuf>), BenchError> {
    match plan.backend {
        Backend::Memory => Ok((Box::new(memory_store()), None)),
        Backend::Durable => {
            let root = plan.durable_root.clone().unwrap_or_else(std::env::temp_dir);
            let dir = root.join(format!(
                "brainscale-bench-{}-{entries}-{workers}-{trial}",
                std::process::id()
            ));
            if dir.exists() {
                std::fs::remove_dir_all(&dir).map_err(|source| BenchError::Io {
                    op: format!("clear stale cell store {}", dir.display()),
                    source,
                })?;
            }
            let store = durable_store(&dir)?;
            Ok((Box::new(store), Some(dir)))
        }
    }
}

/// Execute the whole grid in deterministic order (entry counts outermost,
/// then workers, then trials 1..=N), calling `progress` after each row.
/// Completed rows survive an abort inside the error value.
pub fn run_sweep(
    plan: &BenchPlan,
    mut progress: impl FnMut(&BenchResultRow),
) -> Result<Vec<BenchResultRow>, SweepAborted> {
    let mut completed = Vec::new();
    let fail = |completed: &mut Vec<BenchResultRow>, cause: BenchError| SweepAborted {
        completed: std::mem::take(completed),
        cause,
    };

    if let Err(cause) = plan.validate() {
        return Err(fail(&mut completed, cause));
    }
    let schema = match Schema::new(plan.schema.clone()) {
        Ok(schema) => schema,
        Err(error) => return Err(fail(&mut completed, error.into())),
    };

    for &entries in &plan.entry_counts {
        let spec = match block_for_entries(entries, cell_seed(plan.seed, entries)) {
            Ok(spec) => spec,
            Err(error) => return Err(fail(&mut completed, error)),
        };
        for &workers in &plan.worker_counts {
            for trial in 1..=plan.trials {
                let row = run_cell(plan, &schema, spec, entries, workers, trial)
                    .map_err(|cause| fail(&mut completed, cause))?;
                progress(&row);
                completed.push(row);
            }
        }
    }
    Ok(completed)
}

fn run_cell(
    plan: &BenchPlan,
    schema: &Schema,
    spec: BlockSpec,
    entries: u64,
    workers: usize,
    trial: u32,
) -> Result<BenchResultRow, BenchError> {
    let (store, dir) = cell_store(plan, entries, workers, trial)?;
    let blocks = [spec];
    let job = IngestJob {
        schema,
        blocks: &blocks,
        workers,
        batch_size: plan.batch_size,
    };
    let started = Instant::now();
    let outcome = run_ingest(&job, store.as_ref());
    let total_seconds = started.elapsed().as_secs_f64();
    drop(store);
    if let Some(dir) = dir {
        // The cell is measured; its store is scratch.
        let _ = std::fs::remove_dir_all(dir);
    }
    let metrics = outcome?;

    Ok(BenchResultRow {
        entries,
        workers,
        trial,
        for_rate: metrics.for_rate.per_second(),
        load_rate: metrics.load_rate.per_second(),
        ingest_rate: metrics.ingest_rate.per_second(),
        total_seconds,
    })
}

/// Exact column order of emitted CSV.
pub const CSV_HEADER: &str = "entries,workers,trial,for_rate,load_rate,ingest_rate,total_seconds";

#[derive(Debug, Error)]
#[error("CSV line {line}: {message}")]
pub struct CsvError {
    pub line: usize,
    pub message: String,
}

/// Render rows as CSV. Floats print in the shortest form that parses back
/// to the same bits, so emit -> parse is lossless.
pub fn emit_csv(rows: &[BenchResultRow]) -> String {
    let mut out = String::with_capacity(64 * (rows.len() + 1));
    out.push_str(CSV_HEADER);
    out.push('\n');
    for row in rows {
        writeln!(
            out,
            "{},{},{},{},{},{},{}",
            row.entries,
            row.workers,
            row.trial,
            row.for_rate,
            row.load_rate,
            row.ingest_rate,
            row.total_seconds
        )
        .expect("write to String");
    }
    out
}

/// Parse CSV produced by [`emit_csv`]. The header must match exactly.
pub fn parse_csv(text: &str) -> Result<Vec<BenchResultRow>, CsvError> {
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, header)) if header == CSV_HEADER => {}
        Some((_, header)) => {
            return Err(CsvError {
                line: 1,
                message: format!("unexpected header `{header}`"),
            })
        }
        None => {
            return Err(CsvError {
                line: 1,
                message: "empty input".to_owned(),
            })
        }
    }

    let mut rows = Vec::new();
    for (index, text) in lines {
        let line = index + 1;
        let fields: Vec<&str> = text.split(',').collect();
        if fields.len() != 7 {
            return Err(CsvError {
                line,
                message: format!("expected 7 fields, found {}", fields.len()),
            });
        }
        let int = |field: &str, what: &str| {
            field.parse::<u64>().map_err(|_| CsvError {
                line,
                message: format!("{what} `{field}` is not a count"),
            })
        };
        let float = |field: &str, what: &str| {
            field.parse::<f64>().map_err(|_| CsvError {
                line,
                message: format!("{what} `{field}` is not a number"),
            })
        };
        rows.push(BenchResultRow {
            entries: int(fields[0], "entries")?,
            workers: int(fields[1], "workers")? as usize,
            trial: int(fields[2], "trial")? as u32,
            for_rate: float(fields[3], "for_rate")?,
            load_rate: float(fields[4], "load_rate")?,
            ingest_rate: float(fields[5], "ingest_rate")?,
            total_seconds: float(fields[6], "total_seconds")?,
        });
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small_plan() -> BenchPlan {
        BenchPlan {
            entry_counts: vec![1_000],
            worker_counts: vec![1, 2],
            trials: 1,
            ..BenchPlan::desk_defaults()
        }
    }

    #[test]
    fn cell_blocks_hit_requested_entry_counts_exactly() {
        let all = [
            1,
            10,
            1_000,
            500_000,
            1_000_000,
            5_000_000,
            50_000_000,
            100_000_000,
            500_000_000,
        ];
        for entries in all {
            let spec = block_for_entries(entries, cell_seed(DEFAULT_SEED, entries)).unwrap();
            assert_eq!(spec.target_entries().unwrap(), entries, "at {entries}");
            // Density stays within a factor of ~2 of nominal (small counts
            // round the dimension up harder).
            if entries >= 1_000 {
                assert!(spec.sparsity <= CELL_SPARSITY * 1.01);
                assert!(spec.sparsity >= CELL_SPARSITY / 2.0);
            }
        }
    }

    #[test]
    fn cell_seed_ignores_workers_and_trials_by_construction() {
        // Different entry counts and plan seeds move the seed...
        assert_ne!(cell_seed(1, 1_000), cell_seed(1, 2_000));
        assert_ne!(cell_seed(1, 1_000), cell_seed(2, 1_000));
        // ...and the derived spec is a pure function of (seed, entries).
        let a = block_for_entries(1_000, cell_seed(7, 1_000)).unwrap();
        let b = block_for_entries(1_000, cell_seed(7, 1_000)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn sweep_produces_one_row_per_cell_in_order() {
        let rows = run_sweep(&small_plan(), |_| {}).unwrap();
        assert_eq!(rows.len(), 2);
        assert!(rows.iter().all(|r| r.entries == 1_000));
        assert_eq!(rows[0].workers, 1);
        assert_eq!(rows[1].workers, 2);
        for row in &rows {
            assert!(row.total_seconds > 0.0);
            assert!(row.for_rate >= 0.0 && row.load_rate >= 0.0 && row.ingest_rate >= 0.0);
        }
    }

    #[test]
    fn trial_count_multiplies_rows() {
        let mut plan = small_plan();
        plan.trials = 3;
        let rows = run_sweep(&plan, |_| {}).unwrap();
        assert_eq!(rows.len(), 2 * 3);
        let trials: Vec<u32> = rows.iter().map(|r| r.trial).collect();
        assert_eq!(trials, [1, 2, 3, 1, 2, 3]);
    }

    #[test]
    fn paper_preset_lists_are_exact() {
        let plan = BenchPlan::paper_preset();
        assert_eq!(plan.entry_counts, [50_000_000, 100_000_000, 500_000_000]);
        assert_eq!(plan.worker_counts, [1, 2, 4, 6, 8, 10, 12, 14, 16, 18]);
        plan.validate().unwrap();
    }

    #[test]
    fn invalid_plans_are_rejected_before_any_work() {
        for broken in [
            BenchPlan {
                entry_counts: vec![],
                ..small_plan()
            },
            BenchPlan {
                worker_counts: vec![0],
                ..small_plan()
            },
            BenchPlan {
                trials: 0,
                ..small_plan()
            },
        ] {
            let aborted = run_sweep(&broken, |_| {}).unwrap_err();
            assert!(aborted.completed.is_empty());
            assert!(matches!(aborted.cause, BenchError::InvalidPlan { .. }));
        }
    }

    #[test]
    fn unusable_durable_root_aborts_with_rows_preserved() {
        let dir = tempfile::tempdir().unwrap();
        let blocker = dir.path().join("not-a-directory");
        std::fs::write(&blocker, b"file in the way").unwrap();
        let plan = BenchPlan {
            backend: Backend::Durable,
            durable_root: Some(blocker), // cells cannot nest under a file
            ..small_plan()
        };
        let aborted = run_sweep(&plan, |_| {}).unwrap_err();
        assert!(aborted.completed.is_empty());
    }

    #[test]
    fn durable_cells_run_and_clean_up() {
        let dir = tempfile::tempdir().unwrap();
        let plan = BenchPlan {
            backend: Backend::Durable,
            durable_root: Some(dir.path().to_path_buf()),
            worker_counts: vec![2],
            ..small_plan()
        };
        let rows = run_sweep(&plan, |_| {}).unwrap();
        assert_eq!(rows.len(), 1);
        let leftovers = std::fs::read_dir(dir.path()).unwrap().count();
        assert_eq!(leftovers, 0, "cell stores should be removed");
    }

    #[test]
    fn csv_round_trips_bit_for_bit() {
        let rows = vec![
            BenchResultRow {
                entries: 1_000,
                workers: 1,
                trial: 1,
                for_rate: 0.1 + 0.2,
                load_rate: 1e-17,
                ingest_rate: 123_456.789,
                total_seconds: 100.0,
            },
            BenchResultRow {
                entries: 5_000_000,
                workers: 18,
                trial: 3,
                for_rate: f64::INFINITY,
                load_rate: 0.0,
                ingest_rate: 2.5e9,
                total_seconds: 0.000_001,
            },
        ];
        let text = emit_csv(&rows);
        assert!(text.starts_with(CSV_HEADER));
        let parsed = parse_csv(&text).unwrap();
        assert_eq!(parsed.len(), rows.len());
        for (a, b) in parsed.iter().zip(&rows) {
            assert_eq!(a.for_rate.to_bits(), b.for_rate.to_bits());
            assert_eq!(a.load_rate.to_bits(), b.load_rate.to_bits());
            assert_eq!(a.ingest_rate.to_bits(), b.ingest_rate.to_bits());
            assert_eq!(a.total_seconds.to_bits(), b.total_seconds.to_bits());
        }
        // Emitting the parse reproduces the text, too.
        assert_eq!(emit_csv(&parsed), text);
    }

    #[test]
    fn empty_rows_emit_header_only() {
        let text = emit_csv(&[]);
        assert_eq!(text, format!("{CSV_HEADER}\n"));
        assert_eq!(parse_csv(&text).unwrap(), vec![]);
    }

    #[test]
    fn malformed_csv_reports_line_numbers() {
        let bad_header = "wrong,header\n1,2,3,4,5,6,7\n";
        assert_eq!(parse_csv(bad_header).unwrap_err().line, 1);

        let short_row = format!("{CSV_HEADER}\n1,2,3\n");
        assert_eq!(parse_csv(&short_row).unwrap_err().line, 2);

        let bad_number = format!("{CSV_HEADER}\n1,2,3,x,5,6,7\n");
        assert_eq!(parse_csv(&bad_number).unwrap_err().line, 2);
    }
}
