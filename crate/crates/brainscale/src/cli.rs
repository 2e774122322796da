//! Command-line entry point.
//!
//! Subcommands: `table1` (the canonical cortex configuration table, or one
//! derived row), `regions` (region counts per depth), `label` and `resolve`
//! (index ↔ label utilities), `gen` (deterministic sparse triples as TSV),
//! and `bench` (ingest sweeps with CSV and SVG output).
//!
//! Configuration comes from three layers, later ones winning: built-in
//! defaults, an optional `--config` file of flat `key = value` lines, and
//! command-line flags. All data goes to standard output or the requested
//! files; all diagnostics go to standard error. Exit codes: 0 success,
//! 1 usage error, 2 runtime failure.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context, Result};
use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::bench::{self, Backend, BenchPlan, BenchResultRow};
use crate::codec::Schema;
use crate::config_file::ConfigFile;
use crate::generator::{self, BlockSpec};
use crate::plot;
use crate::schema::{derive_cortex_row, reference, CerebellumConfig, CortexConfig, SchemaConfig};

#[derive(Debug, Parser)]
#[command(
    name = "brainscale",
    version,
    about = "Hierarchical neuron labels, sparse connectome triples, and ingest benchmarks"
)]
struct Cli {
    #[command(flatten)]
    global: GlobalArgs,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct GlobalArgs {
    /// Configuration file of flat `key = value` lines (`#` comments)
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Schema family to address neurons with
    #[arg(long, global = true, value_enum)]
    schema: Option<SchemaKindArg>,
    /// Seed for deterministic generation
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Write data output to this file instead of standard output
    #[arg(long, global = true, value_name = "PATH")]
    out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum SchemaKindArg {
    Cortex,
    Cerebellum,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Print the canonical configuration table, or derive one row
    Table1(Table1Args),
    /// Count labeled regions at a hierarchy depth
    Regions(RegionsArgs),
    /// Print the qualified label of a neuron index
    Label(LabelArgs),
    /// Resolve a label or label prefix to its neuron index range
    Resolve(ResolveArgs),
    /// Generate a deterministic sparse weight block as TSV triples
    Gen(GenArgs),
    /// Run ingest benchmark sweeps and emit CSV/SVG
    Bench(BenchArgs),
}

#[derive(Debug, Args)]
struct Table1Args {
    /// Derive a row for this neuron total (requires --columns)
    #[arg(long, requires = "columns")]
    neurons: Option<u64>,
    /// Derive a row for this column total (requires --neurons)
    #[arg(long, requires = "neurons")]
    columns: Option<u64>,
}

#[derive(Debug, Args)]
struct RegionsArgs {
    /// Hierarchy depth: 1 = hemispheres .. 5 = finest regions
    #[arg(long, default_value_t = 5)]
    depth: usize,
}

#[derive(Debug, Args)]
struct LabelArgs {
    /// Neuron index to label
    index: u64,
}

#[derive(Debug, Args)]
struct ResolveArgs {
    /// Full label (`left/region_01/1/1/II`) or any prefix of one
    label: String,
}

#[derive(Debug, Args)]
struct GenArgs {
    /// Square block dimension (rows = columns = dim)
    #[arg(long)]
    dim: u64,
    /// Fraction of the dim x dim positions that receive a weight
    #[arg(long)]
    sparsity: f64,
    /// Emit numeric indices instead of schema labels
    #[arg(long)]
    raw: bool,
}

#[derive(Debug, Args)]
struct BenchArgs {
    /// Comma-separated entry counts, one sweep column per count
    #[arg(long, value_delimiter = ',', conflicts_with = "paper_preset")]
    entries: Vec<u64>,
    /// Comma-separated worker counts, one sweep row per count
    #[arg(long, value_delimiter = ',', conflicts_with = "paper_preset")]
    workers: Vec<usize>,
    /// Trials per (entries, workers) cell
    #[arg(long)]
    trials: Option<u32>,
    /// Store backend to benchmark
    #[arg(long, value_enum)]
    backend: Option<BackendArg>,
    /// Write result rows as CSV to this path
    #[arg(long, value_name = "PATH")]
    csv: Option<PathBuf>,
    /// Write the mean-rates-by-workers chart as SVG to this path
    #[arg(long, value_name = "PATH")]
    plot: Option<PathBuf>,
    /// Write the per-entry-count chart as SVG to this path
    #[arg(long, value_name = "PATH")]
    plot_by_entries: Option<PathBuf>,
    /// Full-scale preset: entries 50M/100M/500M, workers 1-18
    #[arg(long)]
    paper_preset: bool,
    /// Records per store write batch
    #[arg(long)]
    batch_size: Option<usize>,
    /// Directory for durable-backend cell stores (default: system temp)
    #[arg(long, value_name = "PATH")]
    durable_root: Option<PathBuf>,
    /// Print the resolved plan without running it
    #[arg(long)]
    dry_run: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum BackendArg {
    /// In-memory sorted store
    #[value(alias = "memory")]
    Mem,
    /// Write-ahead-logged store with sorted runs on disk
    #[value(alias = "durable")]
    Disk,
}

impl From<BackendArg> for Backend {
    fn from(arg: BackendArg) -> Backend {
        match arg {
            BackendArg::Mem => Backend::Memory,
            BackendArg::Disk => Backend::Durable,
        }
    }
}

/// Parse arguments, dispatch, and map every outcome to an exit code.
pub fn cli_main<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(err) => {
            let code = match err.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            // clap routes help/version to stdout and errors to stderr.
            let _ = err.print();
            return code;
        }
    };
    match run(cli) {
        Ok(()) => 0,
        Err(err) => {
            eprintln!("error: {err:#}");
            2
        }
    }
}

fn run(cli: Cli) -> Result<()> {
    let file = load_config(cli.global.config.as_deref())?;
    match &cli.command {
        Command::Table1(args) => {
            let text = table1_text(args, &file, &cli.global)?;
            write_data(&cli.global, &text)
        }
        Command::Regions(args) => {
            let schema = build_schema(&file, &cli.global)?;
            let count = schema.region_count(args.depth)?;
            write_data(&cli.global, &format!("{count}\n"))
        }
        Command::Label(args) => {
            let schema = build_schema(&file, &cli.global)?;
            let name = schema.qualified_name(args.index)?;
            write_data(&cli.global, &format!("{name}\n"))
        }
        Command::Resolve(args) => {
            let schema = build_schema(&file, &cli.global)?;
            let range = schema.resolve_range(&args.label)?;
            write_data(&cli.global, &format!("[{},{})\n", range.start, range.end))
        }
        Command::Gen(args) => run_gen(args, &file, &cli.global),
        Command::Bench(args) => run_bench(args, &file, &cli.global),
    }
}

fn load_config(path: Option<&Path>) -> Result<ConfigFile> {
    let Some(path) = path else {
        return Ok(ConfigFile::default());
    };
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    ConfigFile::parse(&text).map_err(|e| anyhow!("{}: {e}", path.display()))
}

fn write_data(global: &GlobalArgs, text: &str) -> Result<()> {
    match &global.out {
        Some(path) => fs::write(path, text).with_context(|| format!("writing {}", path.display())),
        None => {
            print!("{text}");
            std::io::stdout().flush().context("writing standard output")
        }
    }
}

// ---------------------------------------------------------------------------
// Configuration resolution: defaults <- file <- flags.

/// Keys interpreted by `bench`; other subcommands accept and ignore them so
/// one file can drive the whole tool.
const BENCH_KEYS: [&str; 7] = [
    "entry_counts",
    "worker_counts",
    "trials",
    "backend",
    "seed",
    "batch_size",
    "durable_root",
];

const CORTEX_KEYS: [&str; 7] = [
    "hemisphere_names",
    "regions_per_hemisphere",
    "region_names",
    "total_neurons",
    "total_columns",
    "neurons_per_microcolumn",
    "layer_names",
];

const CEREBELLUM_KEYS: [&str; 8] = [
    "hemisphere_names",
    "functional_regions",
    "functional_region_names",
    "lobules",
    "microzones",
    "modules_per_microzone",
    "total_neurons",
    "layer_names",
];

fn key_error(file: &ConfigFile, key: &str, message: &str) -> anyhow::Error {
    match file.line_of(key) {
        Some(line) => anyhow!("config line {line}: key `{key}`: {message}"),
        None => anyhow!("key `{key}`: {message}"),
    }
}

fn parse_value<T>(file: &ConfigFile, key: &str) -> Result<Option<T>>
where
    T: std::str::FromStr,
    T::Err: std::fmt::Display,
{
    match file.get(key) {
        None => Ok(None),
        Some(raw) => raw
            .parse()
            .map(Some)
            .map_err(|e| key_error(file, key, &format!("{e}"))),
    }
}

fn parse_list<T>(file: &ConfigFile, key: &str) -> Result<Option<Vec<T>>>
where
    T: std::str::FromStr,
    T::Err: std::fmt::Display,
{
    let Some(raw) = file.get(key) else {
        return Ok(None);
    };
    raw.split(',')
        .map(|part| {
            part.trim()
                .parse()
                .map_err(|e| key_error(file, key, &format!("`{}`: {e}", part.trim())))
        })
        .collect::<Result<Vec<T>>>()
        .map(Some)
}

fn parse_names(file: &ConfigFile, key: &str) -> Result<Option<Vec<String>>> {
    let Some(raw) = file.get(key) else {
        return Ok(None);
    };
    let names: Vec<String> = raw.split(',').map(|part| part.trim().to_owned()).collect();
    if names.iter().any(String::is_empty) {
        return Err(key_error(file, key, "empty name in list"));
    }
    Ok(Some(names))
}

fn schema_kind(file: &ConfigFile, global: &GlobalArgs) -> Result<SchemaKindArg> {
    if let Some(kind) = global.schema {
        return Ok(kind);
    }
    match file.get("schema") {
        None => Ok(SchemaKindArg::Cortex),
        Some("cortex") => Ok(SchemaKindArg::Cortex),
        Some("cerebellum") => Ok(SchemaKindArg::Cerebellum),
        Some(other) => Err(key_error(
            file,
            "schema",
            &format!("`{other}` is not `cortex` or `cerebellum`"),
        )),
    }
}

/// Reject keys that belong to no recognized set, pointing at the likely
/// cause when a key from the inactive schema family shows up.
fn check_keys(file: &ConfigFile, kind: SchemaKindArg) -> Result<()> {
    let (active, other, other_name) = match kind {
        SchemaKindArg::Cortex => (&CORTEX_KEYS[..], &CEREBELLUM_KEYS[..], "cerebellum"),
        SchemaKindArg::Cerebellum => (&CEREBELLUM_KEYS[..], &CORTEX_KEYS[..], "cortex"),
    };
    for key in file.keys() {
        if key == "schema" || active.contains(&key) || BENCH_KEYS.contains(&key) {
            continue;
        }
        if other.contains(&key) {
            return Err(key_error(
                file,
                key,
                &format!("applies to the {other_name} schema only"),
            ));
        }
        return Err(key_error(file, key, "unknown key"));
    }
    Ok(())
}

fn resolve_cortex(file: &ConfigFile) -> Result<CortexConfig> {
    let mut cfg = CortexConfig::canonical(21_000_000_000, 210_000);
    if let Some(v) = parse_names(file, "hemisphere_names")? {
        cfg.hemisphere_names = v;
    }
    if let Some(v) = parse_value(file, "regions_per_hemisphere")? {
        cfg.regions_per_hemisphere = v;
    }
    if let Some(v) = parse_names(file, "region_names")? {
        cfg.region_names = Some(v);
    }
    if let Some(v) = parse_value(file, "total_neurons")? {
        cfg.total_neurons = v;
    }
    if let Some(v) = parse_value(file, "total_columns")? {
        cfg.total_columns = v;
    }
    if let Some(v) = parse_value(file, "neurons_per_microcolumn")? {
        cfg.neurons_per_microcolumn = v;
    }
    if let Some(v) = parse_names(file, "layer_names")? {
        cfg.layer_names = v;
    }
    Ok(cfg)
}

fn resolve_cerebellum(file: &ConfigFile) -> Result<CerebellumConfig> {
    let mut cfg = CerebellumConfig::default();
    if let Some(v) = parse_names(file, "hemisphere_names")? {
        cfg.hemisphere_names = v;
    }
    if let Some(v) = parse_value(file, "functional_regions")? {
        cfg.functional_regions = v;
    }
    if let Some(v) = parse_names(file, "functional_region_names")? {
        cfg.functional_region_names = Some(v);
    }
    if let Some(v) = parse_value(file, "lobules")? {
        cfg.lobules = v;
    }
    if let Some(v) = parse_value(file, "microzones")? {
        cfg.microzones = v;
    }
    if let Some(v) = parse_value(file, "modules_per_microzone")? {
        cfg.modules_per_microzone = v;
    }
    if let Some(v) = parse_value(file, "total_neurons")? {
        cfg.total_neurons = v;
    }
    if let Some(v) = parse_names(file, "layer_names")? {
        cfg.layer_names = v;
    }
    Ok(cfg)
}

fn resolve_schema_config(file: &ConfigFile, global: &GlobalArgs) -> Result<SchemaConfig> {
    let kind = schema_kind(file, global)?;
    check_keys(file, kind)?;
    Ok(match kind {
        SchemaKindArg::Cortex => SchemaConfig::Cortex(resolve_cortex(file)?),
        SchemaKindArg::Cerebellum => SchemaConfig::Cerebellum(resolve_cerebellum(file)?),
    })
}

fn build_schema(file: &ConfigFile, global: &GlobalArgs) -> Result<Schema> {
    let config = resolve_schema_config(file, global)?;
    Schema::new(config).context("invalid schema configuration")
}

fn resolve_seed(file: &ConfigFile, global: &GlobalArgs) -> Result<u64> {
    if let Some(seed) = global.seed {
        return Ok(seed);
    }
    Ok(parse_value(file, "seed")?.unwrap_or(bench::DEFAULT_SEED))
}

// ---------------------------------------------------------------------------
// table1

const TABLE_COLUMNS: [&str; 12] = [
    "cortex_regions",
    "columns",
    "columns_per_region",
    "microcolumns_per_column",
    "microcolumns",
    "layers",
    "microcolumns_per_region",
    "regions_at_column_granularity",
    "neurons_per_column_region",
    "regions_at_microcolumn_granularity",
    "neurons_per_final_region",
    "total_neurons",
];

fn table_cells(config: &CortexConfig) -> Result<[u64; 12]> {
    let derived = derive_cortex_row(config)?;
    Ok([
        config.hemispheres() * config.regions_per_hemisphere,
        config.total_columns,
        derived.columns_per_region,
        derived.microcolumns_per_column,
        derived.total_microcolumns,
        config.layers(),
        derived.microcolumns_per_region,
        derived.regions_at_column_granularity,
        derived.neurons_per_column_region,
        derived.regions_at_microcolumn_granularity,
        derived.neurons_per_final_region,
        config.total_neurons,
    ])
}

fn push_table_row(text: &mut String, label: &str, cells: &[u64; 12]) {
    let _ = write!(text, "{label}");
    for cell in cells {
        let _ = write!(text, " {cell}");
    }
    text.push('\n');
}

/// The eight canonical rows with exactly derived cells, or one derived row
/// for an explicit (neurons, columns) pair. Cells that contradict the
/// historically printed table are flagged after the rows.
fn table1_text(args: &Table1Args, file: &ConfigFile, global: &GlobalArgs) -> Result<String> {
    let mut text = String::new();
    let _ = writeln!(text, "row {}", TABLE_COLUMNS.join(" "));

    if let (Some(neurons), Some(columns)) = (args.neurons, args.columns) {
        let config = match resolve_schema_config(file, global)? {
            SchemaConfig::Cortex(mut cfg) => {
                cfg.total_neurons = neurons;
                cfg.total_columns = columns;
                cfg
            }
            SchemaConfig::Cerebellum(_) => {
                bail!("the configuration table applies to the cortex schema")
            }
        };
        let cells = table_cells(&config)?;
        push_table_row(&mut text, "-", &cells);
        return Ok(text);
    }

    for (i, config) in reference::configs().iter().enumerate() {
        let cells = table_cells(config)?;
        push_table_row(&mut text, &(i + 1).to_string(), &cells);
    }
    for m in reference::reference_mismatches()? {
        let _ = writeln!(
            text,
            "erratum: row {} {} derived {} but printed {}",
            m.row + 1,
            m.cell,
            m.derived,
            m.printed
        );
    }
    Ok(text)
}

// ---------------------------------------------------------------------------
// gen

fn run_gen(args: &GenArgs, file: &ConfigFile, global: &GlobalArgs) -> Result<()> {
    let seed = resolve_seed(file, global)?;
    let spec = BlockSpec::new(args.dim, args.sparsity, seed);
    let entries = generator::generate_block(&spec)?;

    let mut text = String::new();
    if args.raw {
        for e in &entries {
            let _ = writeln!(text, "{}\t{}\t{}", e.row, e.col, e.weight);
        }
    } else {
        let schema = build_schema(file, global)?;
        let triples = generator::label_triples(&schema, args.dim, &entries)?;
        let mut bytes = Vec::new();
        generator::write_tsv(&mut bytes, &triples).context("formatting triples")?;
        text = String::from_utf8(bytes).expect("labels and numbers are UTF-8");
    }
    write_data(global, &text)
}

// ---------------------------------------------------------------------------
// bench

fn resolve_plan(args: &BenchArgs, file: &ConfigFile, global: &GlobalArgs) -> Result<BenchPlan> {
    let mut plan = BenchPlan::desk_defaults();
    plan.schema = resolve_schema_config(file, global)?;
    plan.seed = resolve_seed(file, global)?;

    if let Some(v) = parse_list(file, "entry_counts")? {
        plan.entry_counts = v;
    }
    if let Some(v) = parse_list(file, "worker_counts")? {
        plan.worker_counts = v;
    }
    if let Some(v) = parse_value(file, "trials")? {
        plan.trials = v;
    }
    if let Some(raw) = file.get("backend") {
        plan.backend = match raw {
            "mem" | "memory" => Backend::Memory,
            "disk" | "durable" => Backend::Durable,
            other => {
                return Err(key_error(
                    file,
                    "backend",
                    &format!("`{other}` is not `mem` or `disk`"),
                ))
            }
        };
    }
    if let Some(v) = parse_value(file, "batch_size")? {
        plan.batch_size = v;
    }
    if let Some(raw) = file.get("durable_root") {
        plan.durable_root = Some(PathBuf::from(raw));
    }

    if args.paper_preset {
        let preset = BenchPlan::paper_preset();
        plan.entry_counts = preset.entry_counts;
        plan.worker_counts = preset.worker_counts;
    }
    if !args.entries.is_empty() {
        plan.entry_counts = args.entries.clone();
    }
    if !args.workers.is_empty() {
        plan.worker_counts = args.workers.clone();
    }
    if let Some(v) = args.trials {
        plan.trials = v;
    }
    if let Some(v) = args.backend {
        plan.backend = v.into();
    }
    if let Some(v) = args.batch_size {
        plan.batch_size = v;
    }
    if let Some(v) = &args.durable_root {
        plan.durable_root = Some(v.clone());
    }
    plan.validate().context("invalid benchmark plan")?;
    Ok(plan)
}

fn plan_text(plan: &BenchPlan) -> String {
    let join = |it: &mut dyn Iterator<Item = String>| it.collect::<Vec<_>>().join(",");
    let mut text = String::new();
    let _ = writeln!(
        text,
        "entries: {}",
        join(&mut plan.entry_counts.iter().map(u64::to_string))
    );
    let _ = writeln!(
        text,
        "workers: {}",
        join(&mut plan.worker_counts.iter().map(usize::to_string))
    );
    let _ = writeln!(text, "trials: {}", plan.trials);
    let _ = writeln!(
        text,
        "backend: {}",
        match plan.backend {
            Backend::Memory => "memory",
            Backend::Durable => "durable",
        }
    );
    let _ = writeln!(text, "seed: {}", plan.seed);
    let _ = writeln!(text, "batch_size: {}", plan.batch_size);
    if let Some(root) = &plan.durable_root {
        let _ = writeln!(text, "durable_root: {}", root.display());
    }
    text
}

fn write_file(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

fn run_bench(args: &BenchArgs, file: &ConfigFile, global: &GlobalArgs) -> Result<()> {
    let plan = resolve_plan(args, file, global)?;
    if args.dry_run {
        return write_data(global, &plan_text(&plan));
    }

    let progress = |row: &BenchResultRow| {
        eprintln!(
            "entries={} workers={} trial={}: ingest {:.0}/s, total {:.2}s",
            row.entries, row.workers, row.trial, row.ingest_rate, row.total_seconds
        );
    };
    let (rows, outcome) = match bench::run_sweep(&plan, progress) {
        Ok(rows) => (rows, Ok(())),
        Err(aborted) => (aborted.completed, Err(aborted.cause)),
    };

    // Persist whatever completed even when the sweep aborts midway.
    let csv = bench::emit_csv(&rows);
    match (&args.csv, outcome.is_ok()) {
        (Some(path), _) => write_file(path, &csv)?,
        (None, true) => write_data(global, &csv)?,
        (None, false) => {}
    }
    if !rows.is_empty() {
        if let Some(path) = &args.plot {
            write_file(path, &plot::emit_plot(&rows)?)?;
        }
        if let Some(path) = &args.plot_by_entries {
            write_file(path, &plot::emit_plot_by_entries(&rows)?)?;
        }
    }

    outcome.map_err(|cause| match &args.csv {
        Some(path) => anyhow!(cause).context(format!(
            "sweep aborted; {} completed rows written to {}",
            rows.len(),
            path.display()
        )),
        None => anyhow!(cause).context("sweep aborted"),
    })
}
