//! Exact integer arithmetic over schema parameters.
//!
//! A schema describes how a population of neurons is carved into a fixed
//! hierarchy of regions. The cortex hierarchy runs hemisphere, anatomical
//! region, cortical column, microcolumn, and cell layer; the cerebellum runs
//! hemisphere, functional region, lobule, microzone, and module. Everything
//! here is pure arithmetic on the configured counts: deriving per-level
//! sizes, counting labelable regions, and validating configurations.
//!
//! All quotients are floor divisions with the remainder carried explicitly.
//! Nothing is rounded silently.

use std::fmt;
use thiserror::Error;

/// Default neurons per cortical microcolumn.
pub const DEFAULT_NEURONS_PER_MICROCOLUMN: u64 = 100;

/// Default anatomical regions per cortical hemisphere.
pub const DEFAULT_REGIONS_PER_HEMISPHERE: u64 = 31;

/// Cortical layers spanned by a microcolumn. Layer I is excluded: it holds
/// too few neurons to label.
pub const DEFAULT_CORTEX_LAYERS: [&str; 5] = ["II", "III", "IV", "V", "VI"];

/// The three cerebellar cortical layers. Configurable; these defaults carry
/// no anatomical claim beyond the count.
pub const DEFAULT_CEREBELLUM_LAYERS: [&str; 3] = ["molecular", "Purkinje", "granular"];

/// Default modules per cerebellar microzone, chosen so the cerebellum yields
/// at least as many labelable regions as the largest cortex configuration
/// (2 x 3 x 10 x 5 x 4,333,334 = 1,300,000,200 >= 1.3e9). A pure default,
/// not a biological estimate.
pub const DEFAULT_MODULES_PER_MICROZONE: u64 = 4_333_334;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("configuration field `{field}` is invalid: {message}")]
    Invalid {
        field: &'static str,
        message: String,
    },
    #[error("count overflow computing {what}")]
    Overflow { what: &'static str },
}

impl ConfigError {
    fn invalid(field: &'static str, message: impl Into<String>) -> Self {
        ConfigError::Invalid {
            field,
            message: message.into(),
        }
    }
}

/// Cerebral cortex schema parameters.
///
/// `total_columns` and `total_neurons` are global counts; columns are
/// apportioned to the 62 (by default) regions by balanced partition, so the
/// printed per-region quotient is the floor and the remainder spreads one
/// extra column over the leading regions.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CortexConfig {
    /// Hemisphere names, outermost label component. Length fixes the count.
    pub hemisphere_names: Vec<String>,
    pub regions_per_hemisphere: u64,
    /// Anatomical region names, one list shared by every hemisphere.
    /// `None` generates `region_01 ..` placeholders; supplying a list (for
    /// example a 31-entry labeling protocol) replaces them.
    pub region_names: Option<Vec<String>>,
    pub total_neurons: u64,
    pub total_columns: u64,
    pub neurons_per_microcolumn: u64,
    /// Layer names, innermost label component, ordered superficial to deep.
    pub layer_names: Vec<String>,
}

impl Default for CortexConfig {
    /// The 21e9-neuron, 210,000-column configuration.
    fn default() -> Self {
        CortexConfig::canonical(21_000_000_000, 210_000)
    }
}

impl CortexConfig {
    /// A canonical configuration: two hemispheres, 31 regions each,
    /// 100-neuron microcolumns, layers II..VI.
    pub fn canonical(total_neurons: u64, total_columns: u64) -> Self {
        CortexConfig {
            hemisphere_names: vec!["left".to_owned(), "right".to_owned()],
            regions_per_hemisphere: DEFAULT_REGIONS_PER_HEMISPHERE,
            region_names: None,
            total_neurons,
            total_columns,
            neurons_per_microcolumn: DEFAULT_NEURONS_PER_MICROCOLUMN,
            layer_names: DEFAULT_CORTEX_LAYERS
                .iter()
                .map(|s| s.to_string())
                .collect(),
        }
    }

    pub fn hemispheres(&self) -> u64 {
        self.hemisphere_names.len() as u64
    }

    pub fn layers(&self) -> u64 {
        self.layer_names.len() as u64
    }

    /// Total regions across all hemispheres.
    pub fn region_count(&self) -> Result<u64, ConfigError> {
        self.hemispheres()
            .checked_mul(self.regions_per_hemisphere)
            .ok_or(ConfigError::Overflow {
                what: "hemispheres * regions_per_hemisphere",
            })
    }

    /// Region names for one hemisphere, generating placeholders if none
    /// were supplied.
    pub fn resolved_region_names(&self) -> Vec<String> {
        match &self.region_names {
            Some(names) => names.clone(),
            None => (1..=self.regions_per_hemisphere)
                .map(|i| format!("region_{i:02}"))
                .collect(),
        }
    }
}

/// Cerebellum schema parameters.
///
/// Every level has a uniform fan-out, so the label-path count is the plain
/// product of the level sizes. Layer names are carried for completeness but
/// never appear in labels; the printed label format stops at the module.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CerebellumConfig {
    pub hemisphere_names: Vec<String>,
    pub functional_regions: u64,
    /// Functional region names; `None` generates `region_01 ..` placeholders.
    pub functional_region_names: Option<Vec<String>>,
    pub lobules: u64,
    pub microzones: u64,
    pub modules_per_microzone: u64,
    pub total_neurons: u64,
    pub layer_names: Vec<String>,
}

impl Default for CerebellumConfig {
    fn default() -> Self {
        CerebellumConfig {
            hemisphere_names: vec!["left".to_owned(), "right".to_owned()],
            functional_regions: 3,
            functional_region_names: None,
            lobules: 10,
            microzones: 5,
            modules_per_microzone: DEFAULT_MODULES_PER_MICROZONE,
            total_neurons: 100_000_000_000,
            layer_names: DEFAULT_CEREBELLUM_LAYERS
                .iter()
                .map(|s| s.to_string())
                .collect(),
        }
    }
}

impl CerebellumConfig {
    pub fn hemispheres(&self) -> u64 {
        self.hemisphere_names.len() as u64
    }

    /// Total label paths: hemispheres x functional regions x lobules x
    /// microzones x modules per microzone.
    pub fn label_path_count(&self) -> Result<u64, ConfigError> {
        self.hemispheres()
            .checked_mul(self.functional_regions)
            .and_then(|n| n.checked_mul(self.lobules))
            .and_then(|n| n.checked_mul(self.microzones))
            .and_then(|n| n.checked_mul(self.modules_per_microzone))
            .ok_or(ConfigError::Overflow {
                what: "cerebellum label paths",
            })
    }

    pub fn resolved_region_names(&self) -> Vec<String> {
        match &self.functional_region_names {
            Some(names) => names.clone(),
            None => (1..=self.functional_regions)
                .map(|i| format!("region_{i:02}"))
                .collect(),
        }
    }
}

/// Either schema. Cortex and cerebellum index spaces are independent; a
/// config never spans both.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SchemaConfig {
    Cortex(CortexConfig),
    Cerebellum(CerebellumConfig),
}

impl From<CortexConfig> for SchemaConfig {
    fn from(c: CortexConfig) -> Self {
        SchemaConfig::Cortex(c)
    }
}

impl From<CerebellumConfig> for SchemaConfig {
    fn from(c: CerebellumConfig) -> Self {
        SchemaConfig::Cerebellum(c)
    }
}

/// One materialized row of the cortex range table.
///
/// Quotients are floors; each `*_remainder` field carries what floor
/// division dropped. A row is fully consistent with uniform region sizes
/// exactly when every remainder is zero.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CortexDerived {
    /// floor(total_columns / regions)
    pub columns_per_region: u64,
    pub columns_per_region_remainder: u64,
    /// floor(total_microcolumns / total_columns)
    pub microcolumns_per_column: u64,
    pub microcolumns_per_column_remainder: u64,
    /// floor(total_neurons / neurons_per_microcolumn)
    pub total_microcolumns: u64,
    /// total_neurons mod neurons_per_microcolumn
    pub microcolumn_division_remainder: u64,
    /// floor(total_microcolumns / regions)
    pub microcolumns_per_region: u64,
    pub microcolumns_per_region_remainder: u64,
    /// total_columns x layers
    pub regions_at_column_granularity: u64,
    /// floor(total_neurons / regions_at_column_granularity)
    pub neurons_per_column_region: u64,
    pub neurons_per_column_region_remainder: u64,
    /// total_microcolumns x layers
    pub regions_at_microcolumn_granularity: u64,
    /// floor(total_neurons / regions_at_microcolumn_granularity)
    pub neurons_per_final_region: u64,
    pub neurons_per_final_region_remainder: u64,
}

impl CortexDerived {
    /// True when every division in the row came out exact.
    pub fn is_exact(&self) -> bool {
        self.columns_per_region_remainder == 0
            && self.microcolumns_per_column_remainder == 0
            && self.microcolumn_division_remainder == 0
            && self.microcolumns_per_region_remainder == 0
            && self.neurons_per_column_region_remainder == 0
            && self.neurons_per_final_region_remainder == 0
    }
}

fn require_positive(value: u64, field: &'static str) -> Result<(), ConfigError> {
    if value == 0 {
        Err(ConfigError::invalid(field, "must be positive"))
    } else {
        Ok(())
    }
}

/// Derive every cell of the range table for one cortex configuration.
///
/// Per-region quotients use floor division; remainders are reported in the
/// result rather than dropped. Errors name the offending field.
pub fn derive_cortex_row(config: &CortexConfig) -> Result<CortexDerived, ConfigError> {
    require_positive(config.hemispheres(), "hemisphere_names")?;
    require_positive(config.regions_per_hemisphere, "regions_per_hemisphere")?;
    require_positive(config.total_neurons, "total_neurons")?;
    require_positive(config.total_columns, "total_columns")?;
    require_positive(config.neurons_per_microcolumn, "neurons_per_microcolumn")?;
    require_positive(config.layers(), "layer_names")?;

    let regions = config.region_count()?;
    let layers = config.layers();
    let neurons = config.total_neurons;

    let total_microcolumns = neurons / config.neurons_per_microcolumn;
    let microcolumn_division_remainder = neurons % config.neurons_per_microcolumn;
    // A population smaller than one microcolumn still forms one.
    let total_microcolumns = total_microcolumns.max(1);

    let regions_at_column_granularity =
        config
            .total_columns
            .checked_mul(layers)
            .ok_or(ConfigError::Overflow {
                what: "total_columns * layers",
            })?;
    let regions_at_microcolumn_granularity =
        total_microcolumns
            .checked_mul(layers)
            .ok_or(ConfigError::Overflow {
                what: "total_microcolumns * layers",
            })?;

    Ok(CortexDerived {
        columns_per_region: config.total_columns / regions,
        columns_per_region_remainder: config.total_columns % regions,
        microcolumns_per_column: total_microcolumns / config.total_columns,
        microcolumns_per_column_remainder: total_microcolumns % config.total_columns,
        total_microcolumns,
        microcolumn_division_remainder,
        microcolumns_per_region: total_microcolumns / regions,
        microcolumns_per_region_remainder: total_microcolumns % regions,
        regions_at_column_granularity,
        neurons_per_column_region: neurons / regions_at_column_granularity,
        neurons_per_column_region_remainder: neurons % regions_at_column_granularity,
        regions_at_microcolumn_granularity,
        neurons_per_final_region: neurons / regions_at_microcolumn_granularity,
        neurons_per_final_region_remainder: neurons % regions_at_microcolumn_granularity,
    })
}

/// Number of labelable regions at the finest depth.
///
/// Cortex: microcolumns x layers. Cerebellum: the full product down to
/// modules.
pub fn total_regions(config: &SchemaConfig) -> Result<u64, ConfigError> {
    match config {
        SchemaConfig::Cortex(c) => Ok(derive_cortex_row(c)?.regions_at_microcolumn_granularity),
        SchemaConfig::Cerebellum(c) => {
            validate_cerebellum(c).into_result()?;
            c.label_path_count()
        }
    }
}

/// One validation finding. Failures are data, not faults.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    pub field: &'static str,
    pub message: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.field, self.message)
    }
}

/// Validation outcome: hard errors plus advisory warnings (for example an
/// inexact division handled by balanced partition).
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ValidationReport {
    pub errors: Vec<Violation>,
    pub warnings: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.errors.is_empty()
    }

    pub fn is_empty(&self) -> bool {
        self.errors.is_empty() && self.warnings.is_empty()
    }

    fn error(&mut self, field: &'static str, message: impl Into<String>) {
        self.errors.push(Violation {
            field,
            message: message.into(),
        });
    }

    fn warn(&mut self, field: &'static str, message: impl Into<String>) {
        self.warnings.push(Violation {
            field,
            message: message.into(),
        });
    }

    /// Convert to a hard error on the first violation, for callers that
    /// need a valid config rather than a report.
    pub fn into_result(self) -> Result<(), ConfigError> {
        match self.errors.into_iter().next() {
            None => Ok(()),
            Some(v) => Err(ConfigError::Invalid {
                field: v.field,
                message: v.message,
            }),
        }
    }
}

/// Label components may not be empty or contain the path separator, the
/// slot separator, or NUL (NUL delimits store keys).
fn check_names(report: &mut ValidationReport, field: &'static str, names: &[String]) {
    if names.is_empty() {
        report.error(field, "must contain at least one name");
        return;
    }
    for (i, name) in names.iter().enumerate() {
        if name.is_empty() {
            report.error(field, format!("entry {} is empty", i + 1));
        } else if name.contains(['/', '#', '\0']) {
            report.error(
                field,
                format!("entry `{name}` contains a reserved character (`/`, `#`, or NUL)"),
            );
        }
    }
    for i in 1..names.len() {
        if names[..i].contains(&names[i]) {
            report.error(field, format!("duplicate entry `{}`", names[i]));
        }
    }
}

pub fn validate_cortex(config: &CortexConfig) -> ValidationReport {
    let mut report = ValidationReport::default();
    check_names(&mut report, "hemisphere_names", &config.hemisphere_names);
    check_names(&mut report, "layer_names", &config.layer_names);
    if config.regions_per_hemisphere == 0 {
        report.error("regions_per_hemisphere", "must be positive");
    }
    if config.total_neurons == 0 {
        report.error("total_neurons", "must be positive");
    }
    if config.total_columns == 0 {
        report.error("total_columns", "must be positive");
    }
    if config.neurons_per_microcolumn == 0 {
        report.error("neurons_per_microcolumn", "must be positive");
    }
    if let Some(names) = &config.region_names {
        check_names(&mut report, "region_names", names);
        if names.len() as u64 != config.regions_per_hemisphere {
            report.error(
                "region_names",
                format!(
                    "{} names supplied for {} regions per hemisphere",
                    names.len(),
                    config.regions_per_hemisphere
                ),
            );
        }
    }
    if !report.is_valid() {
        return report;
    }

    if config.region_count().is_err() {
        report.error("regions_per_hemisphere", "region count overflows");
        return report;
    }
    match derive_cortex_row(config) {
        Err(ConfigError::Invalid { field, message }) => report.error(field, message),
        Err(ConfigError::Overflow { what }) => report.error("total_columns", what.to_owned()),
        Ok(derived) => {
            if derived.microcolumn_division_remainder != 0 {
                report.warn(
                    "total_neurons",
                    format!(
                        "inexact division by neurons_per_microcolumn, remainder {}",
                        derived.microcolumn_division_remainder
                    ),
                );
            }
            if config.total_neurons < config.neurons_per_microcolumn {
                report.warn(
                    "neurons_per_microcolumn",
                    "exceeds total_neurons; a single undersized microcolumn is formed",
                );
            }
        }
    }
    report
}

pub fn validate_cerebellum(config: &CerebellumConfig) -> ValidationReport {
    let mut report = ValidationReport::default();
    check_names(&mut report, "hemisphere_names", &config.hemisphere_names);
    check_names(&mut report, "layer_names", &config.layer_names);
    if config.functional_regions == 0 {
        report.error("functional_regions", "must be positive");
    }
    if config.lobules == 0 {
        report.error("lobules", "must be positive");
    }
    if config.microzones == 0 {
        report.error("microzones", "must be positive");
    }
    if config.modules_per_microzone == 0 {
        report.error("modules_per_microzone", "must be positive");
    }
    if config.total_neurons == 0 {
        report.error("total_neurons", "must be positive");
    }
    if let Some(names) = &config.functional_region_names {
        check_names(&mut report, "functional_region_names", names);
        if names.len() as u64 != config.functional_regions {
            report.error(
                "functional_region_names",
                format!(
                    "{} names supplied for {} functional regions",
                    names.len(),
                    config.functional_regions
                ),
            );
        }
    }
    if !report.is_valid() {
        return report;
    }

    match config.label_path_count() {
        Err(_) => report.error("modules_per_microzone", "label path count overflows"),
        Ok(paths) => {
            if !config.total_neurons.is_multiple_of(paths) {
                report.warn(
                    "total_neurons",
                    format!(
                        "inexact division over {} label paths, remainder {}",
                        paths,
                        config.total_neurons % paths
                    ),
                );
            }
        }
    }
    report
}

/// Validate either schema kind. Never mutates the config.
pub fn validate_config(config: &SchemaConfig) -> ValidationReport {
    match config {
        SchemaConfig::Cortex(c) => validate_cortex(c),
        SchemaConfig::Cerebellum(c) => validate_cerebellum(c),
    }
}

/// Reference values for the eight canonical cortex configurations, as
/// historically printed. One cell is a known misprint; see
/// [`reference_mismatches`].
pub mod reference {
    use super::{derive_cortex_row, ConfigError, CortexConfig, CortexDerived};

    /// Printed cells of one reference row, in table column order.
    #[derive(Debug, Clone, Copy, PartialEq, Eq)]
    pub struct ReferenceRow {
        pub cortex_regions: u64,
        pub columns: u64,
        pub columns_per_region: u64,
        pub microcolumns_per_column: u64,
        pub microcolumns: u64,
        pub layers: u64,
        pub microcolumns_per_region: u64,
        pub regions_at_column_granularity: u64,
        pub neurons_per_column_region: u64,
        pub regions_at_microcolumn_granularity: u64,
        pub neurons_per_final_region: u64,
        pub total_neurons: u64,
    }

    /// The eight printed rows. Row 8 (index 7) carries the known
    /// `microcolumns_per_column` misprint: 2,100 alongside a microcolumn
    /// total of 260,000,000 over 100,000 columns, which forces 2,600.
    pub const ROWS: [ReferenceRow; 8] = [
        ReferenceRow {
            cortex_regions: 62,
            columns: 210_000,
            columns_per_region: 3_387,
            microcolumns_per_column: 1_000,
            microcolumns: 210_000_000,
            layers: 5,
            microcolumns_per_region: 3_387_096,
            regions_at_column_granularity: 1_050_000,
            neurons_per_column_region: 20_000,
            regions_at_microcolumn_granularity: 1_050_000_000,
            neurons_per_final_region: 20,
            total_neurons: 21_000_000_000,
        },
        ReferenceRow {
            cortex_regions: 62,
            columns: 21_000_000,
            columns_per_region: 338_709,
            microcolumns_per_column: 10,
            microcolumns: 210_000_000,
            layers: 5,
            microcolumns_per_region: 3_387_096,
            regions_at_column_granularity: 105_000_000,
            neurons_per_column_region: 200,
            regions_at_microcolumn_granularity: 1_050_000_000,
            neurons_per_final_region: 20,
            total_neurons: 21_000_000_000,
        },
        ReferenceRow {
            cortex_regions: 62,
            columns: 2_100_000,
            columns_per_region: 33_870,
            microcolumns_per_column: 100,
            microcolumns: 210_000_000,
            layers: 5,
            microcolumns_per_region: 3_387_096,
            regions_at_column_granularity: 10_500_000,
            neurons_per_column_region: 2_000,
            regions_at_microcolumn_granularity: 1_050_000_000,
            neurons_per_final_region: 20,
            total_neurons: 21_000_000_000,
        },
        ReferenceRow {
            cortex_regions: 62,
            columns: 100_000,
            columns_per_region: 1_612,
            microcolumns_per_column: 2_100,
            microcolumns: 210_000_000,
            layers: 5,
            microcolumns_per_region: 3_387_096,
            regions_at_column_granularity: 500_000,
            neurons_per_column_region: 42_000,
            regions_at_microcolumn_granularity: 1_050_000_000,
            neurons_per_final_region: 20,
            total_neurons: 21_000_000_000,
        },
        ReferenceRow {
            cortex_regions: 62,
            columns: 260_000,
            columns_per_region: 4_193,
            microcolumns_per_column: 1_000,
            microcolumns: 260_000_000,
            layers: 5,
            microcolumns_per_region: 4_193_548,
            regions_at_column_granularity: 1_300_000,
            neurons_per_column_region: 20_000,
            regions_at_microcolumn_granularity: 1_300_000_000,
            neurons_per_final_region: 20,
            total_neurons: 26_000_000_000,
        },
        ReferenceRow {
            cortex_regions: 62,
            columns: 26_000_000,
            columns_per_region: 419_354,
            microcolumns_per_column: 10,
            microcolumns: 260_000_000,
            layers: 5,
            microcolumns_per_region: 4_193_548,
            regions_at_column_granularity: 130_000_000,
            neurons_per_column_region: 200,
            regions_at_microcolumn_granularity: 1_300_000_000,
            neurons_per_final_region: 20,
            total_neurons: 26_000_000_000,
        },
        ReferenceRow {
            cortex_regions: 62,
            columns: 2_600_000,
            columns_per_region: 41_935,
            microcolumns_per_column: 100,
            microcolumns: 260_000_000,
            layers: 5,
            microcolumns_per_region: 4_193_548,
            regions_at_column_granularity: 13_000_000,
            neurons_per_column_region: 2_000,
            regions_at_microcolumn_granularity: 1_300_000_000,
            neurons_per_final_region: 20,
            total_neurons: 26_000_000_000,
        },
        ReferenceRow {
            cortex_regions: 62,
            columns: 100_000,
            columns_per_region: 1_612,
            microcolumns_per_column: 2_100, // known misprint; derivation gives 2,600
            microcolumns: 260_000_000,
            layers: 5,
            microcolumns_per_region: 4_193_548,
            regions_at_column_granularity: 500_000,
            neurons_per_column_region: 52_000,
            regions_at_microcolumn_granularity: 1_300_000_000,
            neurons_per_final_region: 20,
            total_neurons: 26_000_000_000,
        },
    ];

    /// The configurations behind [`ROWS`], in the same order.
    pub fn configs() -> [CortexConfig; 8] {
        ROWS.map(|row| CortexConfig::canonical(row.total_neurons, row.columns))
    }

    /// A printed cell that disagrees with exact derivation. The derived
    /// value wins; the printed one is retained as the erratum record.
    #[derive(Debug, Clone, PartialEq, Eq)]
    pub struct CellMismatch {
        pub row: usize,
        pub cell: &'static str,
        pub derived: u64,
        pub printed: u64,
    }

    /// Compare one derived row against its printed reference cells.
    pub fn mismatches(row_index: usize, derived: &CortexDerived) -> Vec<CellMismatch> {
        let printed = &ROWS[row_index];
        let pairs: [(&'static str, u64, u64); 8] = [
            (
                "columns_per_region",
                derived.columns_per_region,
                printed.columns_per_region,
            ),
            (
                "microcolumns_per_column",
                derived.microcolumns_per_column,
                printed.microcolumns_per_column,
            ),
            (
                "microcolumns",
                derived.total_microcolumns,
                printed.microcolumns,
            ),
            (
                "microcolumns_per_region",
                derived.microcolumns_per_region,
                printed.microcolumns_per_region,
            ),
            (
                "regions_at_column_granularity",
                derived.regions_at_column_granularity,
                printed.regions_at_column_granularity,
            ),
            (
                "neurons_per_column_region",
                derived.neurons_per_column_region,
                printed.neurons_per_column_region,
            ),
            (
                "regions_at_microcolumn_granularity",
                derived.regions_at_microcolumn_granularity,
                printed.regions_at_microcolumn_granularity,
            ),
            (
                "neurons_per_final_region",
                derived.neurons_per_final_region,
                printed.neurons_per_final_region,
            ),
        ];
        pairs
            .iter()
            .filter(|(_, d, p)| d != p)
            .map(|&(cell, derived, printed)| CellMismatch {
                row: row_index,
                cell,
                derived,
                printed,
            })
            .collect()
    }

    /// Derive all eight reference rows and collect every cell that
    /// disagrees with the printed table.
    pub fn reference_mismatches() -> Result<Vec<CellMismatch>, ConfigError> {
        let mut all = Vec::new();
        for (i, config) in configs().iter().enumerate() {
            let derived = derive_cortex_row(config)?;
            all.extend(mismatches(i, &derived));
        }
        Ok(all)
    }
}
