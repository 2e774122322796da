//! Bijective mapping between linear neuron indices and hierarchical labels.
//!
//! A validated [`Schema`] fixes six levels of units:
//!
//! ```text
//! level  cortex            cerebellum        label segment
//! 0      hemisphere        hemisphere        name
//! 1      region            functional region name
//! 2      cortical column   lobule            1-based number
//! 3      microcolumn       microzone         1-based number
//! 4      layer slice       module            layer name / 1-based number
//! 5      neuron            neuron            (slot, below label depth)
//! ```
//!
//! Linear ordering is hierarchy-major with the hemisphere outermost, so
//! every unit at every level owns one contiguous index range. Where a level
//! count does not divide evenly, children are spread by balanced partition:
//! of `k` parents sharing `n` children, the first `n mod k` parents hold
//! `ceil(n/k)` and the rest `floor(n/k)`. All level arithmetic is O(1).
//!
//! Labels are slash-joined paths of one to five components. Numeric
//! components are 1-based in text; all indices are 0-based internally. The
//! boundary between the two conventions is exactly the format/parse layer.

use std::fmt;
use std::ops::Range;

use thiserror::Error;

use crate::schema::{
    derive_cortex_row, validate_config, CerebellumConfig, ConfigError, CortexConfig, SchemaConfig,
};

/// Label depth of a full path (hemisphere through layer/module).
pub const FULL_DEPTH: usize = 5;

const LEVEL_NAMES: [&str; 6] = [
    "hemisphere",
    "region",
    "column",
    "microcolumn",
    "layer",
    "slot",
];

#[derive(Debug, Error)]
pub enum CodecError {
    #[error("neuron index {index} out of range for {total} neurons")]
    IndexOutOfRange { index: u64, total: u64 },
    #[error("address {level} index {index} out of range (bound {bound})")]
    AddressOutOfRange {
        level: &'static str,
        index: u64,
        bound: u64,
    },
    #[error("label component {position}: {message}")]
    Parse { position: usize, message: String },
    #[error("depth {depth} out of range (1..=5)")]
    DepthOutOfRange { depth: usize },
    #[error("label is for the {label} schema, not the {schema} schema")]
    SchemaMismatch {
        label: SchemaKind,
        schema: SchemaKind,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SchemaKind {
    Cortex,
    Cerebellum,
}

impl fmt::Display for SchemaKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SchemaKind::Cortex => f.write_str("cortex"),
            SchemaKind::Cerebellum => f.write_str("cerebellum"),
        }
    }
}

/// Structured coordinates of one neuron. For the cerebellum the `column`,
/// `microcolumn`, and `layer` fields hold the lobule, microzone, and module
/// indices. All fields are 0-based and bounded by the governing schema.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct NeuronAddress {
    pub hemisphere: u64,
    pub region: u64,
    pub column: u64,
    pub microcolumn: u64,
    pub layer: u64,
    pub slot: u64,
}

/// A slash-delimited hierarchical path at any depth of the schema. A prefix
/// addresses a coarser region.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct RegionLabel {
    kind: SchemaKind,
    segments: Vec<String>,
}

impl RegionLabel {
    pub fn kind(&self) -> SchemaKind {
        self.kind
    }

    pub fn depth(&self) -> usize {
        self.segments.len()
    }

    pub fn segments(&self) -> &[String] {
        &self.segments
    }
}

impl fmt::Display for RegionLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, segment) in self.segments.iter().enumerate() {
            if i > 0 {
                f.write_str("/")?;
            }
            f.write_str(segment)?;
        }
        Ok(())
    }
}

/// Balanced distribution of `children` over `parents`: parent `p` holds
/// `floor(children/parents)` children, plus one if `p < children mod
/// parents`. Parents are addressed by global index in hierarchy-major
/// order.
#[derive(Debug, Clone, Copy)]
struct Balanced {
    children: u64,
    parents: u64,
}

impl Balanced {
    fn count(self, parent: u64) -> u64 {
        let q = self.children / self.parents;
        let r = self.children % self.parents;
        q + u64::from(parent < r)
    }

    /// Global index of the first child of `parent`. Also valid for
    /// `parent == parents`, where it yields `children` (the one-past end).
    fn first_child(self, parent: u64) -> u64 {
        let q = self.children / self.parents;
        let r = self.children % self.parents;
        parent * q + parent.min(r)
    }

    fn parent_of(self, child: u64) -> u64 {
        debug_assert!(child < self.children);
        let q = self.children / self.parents;
        let r = self.children % self.parents;
        // The first r parents hold q+1 children each.
        let fat = r * (q + 1);
        if child < fat {
            child / (q + 1)
        } else {
            (child - fat) / q + r
        }
    }
}

/// A validated schema with materialized names and level totals. All codec
/// operations live here. Immutable after construction and safe to share
/// across threads.
#[derive(Debug, Clone)]
pub struct Schema {
    kind: SchemaKind,
    config: SchemaConfig,
    /// Units per level, hemisphere through neuron.
    totals: [u64; 6],
    hemisphere_names: Vec<String>,
    region_names: Vec<String>,
    layer_names: Vec<String>,
    regions_per_hemisphere: u64,
}

impl Schema {
    pub fn new(config: SchemaConfig) -> Result<Schema, ConfigError> {
        validate_config(&config).into_result()?;
        match config {
            SchemaConfig::Cortex(cortex) => Schema::from_cortex(cortex),
            SchemaConfig::Cerebellum(cerebellum) => Schema::from_cerebellum(cerebellum),
        }
    }

    pub fn cortex(config: CortexConfig) -> Result<Schema, ConfigError> {
        Schema::new(SchemaConfig::Cortex(config))
    }

    pub fn cerebellum(config: CerebellumConfig) -> Result<Schema, ConfigError> {
        Schema::new(SchemaConfig::Cerebellum(config))
    }

    fn from_cortex(config: CortexConfig) -> Result<Schema, ConfigError> {
        let derived = derive_cortex_row(&config)?;
        let hemispheres = config.hemispheres();
        let regions = config.region_count()?;
        let totals = [
            hemispheres,
            regions,
            config.total_columns,
            derived.total_microcolumns,
            derived.regions_at_microcolumn_granularity,
            config.total_neurons,
        ];
        Ok(Schema {
            kind: SchemaKind::Cortex,
            totals,
            hemisphere_names: config.hemisphere_names.clone(),
            region_names: config.resolved_region_names(),
            layer_names: config.layer_names.clone(),
            regions_per_hemisphere: config.regions_per_hemisphere,
            config: SchemaConfig::Cortex(config),
        })
    }

    fn from_cerebellum(config: CerebellumConfig) -> Result<Schema, ConfigError> {
        let hemispheres = config.hemispheres();
        let regions =
            hemispheres
                .checked_mul(config.functional_regions)
                .ok_or(ConfigError::Overflow {
                    what: "hemispheres * functional_regions",
                })?;
        let lobules = regions
            .checked_mul(config.lobules)
            .ok_or(ConfigError::Overflow { what: "lobules" })?;
        let microzones = lobules
            .checked_mul(config.microzones)
            .ok_or(ConfigError::Overflow { what: "microzones" })?;
        let modules = microzones
            .checked_mul(config.modules_per_microzone)
            .ok_or(ConfigError::Overflow { what: "modules" })?;
        let totals = [
            hemispheres,
            regions,
            lobules,
            microzones,
            modules,
            config.total_neurons,
        ];
        Ok(Schema {
            kind: SchemaKind::Cerebellum,
            totals,
            hemisphere_names: config.hemisphere_names.clone(),
            region_names: config.resolved_region_names(),
            layer_names: config.layer_names.clone(),
            regions_per_hemisphere: config.functional_regions,
            config: SchemaConfig::Cerebellum(config),
        })
    }

    pub fn kind(&self) -> SchemaKind {
        self.kind
    }

    pub fn config(&self) -> &SchemaConfig {
        &self.config
    }

    pub fn neuron_count(&self) -> u64 {
        self.totals[5]
    }

    /// Number of regions addressable at `depth` (1 through 5). At full
    /// depth this is the schema's total label-path count.
    pub fn region_count(&self, depth: usize) -> Result<u64, CodecError> {
        if !(1..=FULL_DEPTH).contains(&depth) {
            return Err(CodecError::DepthOutOfRange { depth });
        }
        Ok(self.totals[depth - 1])
    }

    /// The map distributing level `level + 1` units over level `level`
    /// units.
    fn map(&self, level: usize) -> Balanced {
        Balanced {
            children: self.totals[level + 1],
            parents: self.totals[level],
        }
    }

    /// Global unit index at every level for one neuron.
    fn units_of(&self, index: u64) -> [u64; 6] {
        let mut units = [0u64; 6];
        units[5] = index;
        for level in (0..5).rev() {
            units[level] = self.map(level).parent_of(units[level + 1]);
        }
        units
    }

    /// First neuron index owned by `unit` at `level`. `unit` may equal the
    /// level total, giving the one-past-the-end neuron index.
    fn first_neuron(&self, level: usize, unit: u64) -> u64 {
        let mut u = unit;
        for l in level..5 {
            u = self.map(l).first_child(u);
        }
        u
    }

    /// Decompose a linear index into structured coordinates.
    pub fn address_of(&self, index: u64) -> Result<NeuronAddress, CodecError> {
        if index >= self.totals[5] {
            return Err(CodecError::IndexOutOfRange {
                index,
                total: self.totals[5],
            });
        }
        let units = self.units_of(index);
        Ok(NeuronAddress {
            hemisphere: units[0],
            region: units[1] % self.regions_per_hemisphere,
            column: units[2] - self.map(1).first_child(units[1]),
            microcolumn: units[3] - self.map(2).first_child(units[2]),
            layer: units[4] - self.map(3).first_child(units[3]),
            slot: units[5] - self.map(4).first_child(units[4]),
        })
    }

    /// Exact inverse of [`Schema::address_of`].
    pub fn index_of(&self, address: &NeuronAddress) -> Result<u64, CodecError> {
        let check = |level: usize, index: u64, bound: u64| {
            if index < bound {
                Ok(())
            } else {
                Err(CodecError::AddressOutOfRange {
                    level: LEVEL_NAMES[level],
                    index,
                    bound,
                })
            }
        };
        check(0, address.hemisphere, self.totals[0])?;
        check(1, address.region, self.regions_per_hemisphere)?;
        let region = address.hemisphere * self.regions_per_hemisphere + address.region;
        check(2, address.column, self.map(1).count(region))?;
        let column = self.map(1).first_child(region) + address.column;
        check(3, address.microcolumn, self.map(2).count(column))?;
        let microcolumn = self.map(2).first_child(column) + address.microcolumn;
        check(4, address.layer, self.map(3).count(microcolumn))?;
        let slice = self.map(3).first_child(microcolumn) + address.layer;
        check(5, address.slot, self.map(4).count(slice))?;
        Ok(self.map(4).first_child(slice) + address.slot)
    }

    fn segment(&self, level: usize, offset: u64) -> String {
        match (level, self.kind) {
            (0, _) => self.hemisphere_names[offset as usize].clone(),
            (1, _) => self.region_names[offset as usize].clone(),
            (4, SchemaKind::Cortex) => self.layer_names[offset as usize].clone(),
            _ => (offset + 1).to_string(),
        }
    }

    /// Full-depth label and 0-based slot for one address.
    pub fn encode(&self, address: &NeuronAddress) -> Result<(RegionLabel, u64), CodecError> {
        self.index_of(address)?;
        let offsets = [
            address.hemisphere,
            address.region,
            address.column,
            address.microcolumn,
            address.layer,
        ];
        let segments = (0..FULL_DEPTH)
            .map(|level| self.segment(level, offsets[level]))
            .collect();
        Ok((
            RegionLabel {
                kind: self.kind,
                segments,
            },
            address.slot,
        ))
    }

    /// Label for a global unit at `level` (0-based level, unit in range).
    fn label_of_unit(&self, level: usize, unit: u64) -> RegionLabel {
        let mut units = [0u64; 5];
        units[level] = unit;
        for l in (1..=level).rev() {
            units[l - 1] = self.map(l - 1).parent_of(units[l]);
        }
        let mut segments = Vec::with_capacity(level + 1);
        for l in 0..=level {
            let offset = if l == 0 {
                units[0]
            } else {
                units[l] - self.map(l - 1).first_child(units[l - 1])
            };
            segments.push(self.segment(l, offset));
        }
        RegionLabel {
            kind: self.kind,
            segments,
        }
    }

    /// Write the fully qualified neuron name `label#slot` (slot 1-based)
    /// for a linear index. The buffer is not cleared first.
    pub fn write_qualified_name(&self, index: u64, out: &mut String) -> Result<(), CodecError> {
        use fmt::Write;
        if index >= self.totals[5] {
            return Err(CodecError::IndexOutOfRange {
                index,
                total: self.totals[5],
            });
        }
        let units = self.units_of(index);
        let slot = units[5] - self.map(4).first_child(units[4]);
        for level in 0..FULL_DEPTH {
            if level > 0 {
                out.push('/');
            }
            let offset = if level == 0 {
                units[0]
            } else {
                units[level] - self.map(level - 1).first_child(units[level - 1])
            };
            match (level, self.kind) {
                (0, _) => out.push_str(&self.hemisphere_names[offset as usize]),
                (1, _) => out.push_str(&self.region_names[offset as usize]),
                (4, SchemaKind::Cortex) => out.push_str(&self.layer_names[offset as usize]),
                _ => write!(out, "{}", offset + 1).expect("write to String"),
            }
        }
        write!(out, "#{}", slot + 1).expect("write to String");
        Ok(())
    }

    /// Fully qualified neuron name `label#slot` for a linear index.
    pub fn qualified_name(&self, index: u64) -> Result<String, CodecError> {
        let mut out = String::with_capacity(48);
        self.write_qualified_name(index, &mut out)?;
        Ok(out)
    }

    /// Parse a qualified name back to its linear index.
    pub fn parse_qualified(&self, text: &str) -> Result<u64, CodecError> {
        let (label_text, slot_text) = text.split_once('#').ok_or_else(|| CodecError::Parse {
            position: 1,
            message: "missing `#slot` suffix".to_owned(),
        })?;
        let (level, unit) = self.resolve(label_text)?;
        if level + 1 != FULL_DEPTH {
            return Err(CodecError::Parse {
                position: level + 1,
                message: "qualified names require a full-depth label".to_owned(),
            });
        }
        let slot = parse_component(slot_text, FULL_DEPTH + 1)?;
        let width = self.map(4).count(unit);
        if slot > width {
            return Err(CodecError::Parse {
                position: FULL_DEPTH + 1,
                message: format!("slot {slot} out of range (1..={width})"),
            });
        }
        Ok(self.map(4).first_child(unit) + slot - 1)
    }

    /// Resolve label text to (level, global unit index at that level).
    fn resolve(&self, text: &str) -> Result<(usize, u64), CodecError> {
        let mut unit = 0u64;
        let mut level = 0usize;
        for (i, segment) in text.split('/').enumerate() {
            let position = i + 1;
            if i >= FULL_DEPTH {
                return Err(CodecError::Parse {
                    position,
                    message: format!("label exceeds {FULL_DEPTH} components"),
                });
            }
            if segment.is_empty() {
                return Err(CodecError::Parse {
                    position,
                    message: "empty component".to_owned(),
                });
            }
            let offset = match (i, self.kind) {
                (0, _) => lookup_name(segment, &self.hemisphere_names, position, "hemisphere")?,
                (1, _) => lookup_name(segment, &self.region_names, position, "region")?,
                (4, SchemaKind::Cortex) => {
                    lookup_name(segment, &self.layer_names, position, "layer")?
                }
                _ => {
                    let number = parse_component(segment, position)?;
                    let bound = self.map(i - 1).count(unit);
                    if number > bound {
                        return Err(CodecError::Parse {
                            position,
                            message: format!("number {number} out of range (1..={bound})"),
                        });
                    }
                    number - 1
                }
            };
            unit = if i == 0 {
                offset
            } else {
                self.map(i - 1).first_child(unit) + offset
            };
            level = i;
        }
        Ok((level, unit))
    }

    /// Parse and validate a label of one to five components.
    pub fn parse_label(&self, text: &str) -> Result<RegionLabel, CodecError> {
        self.resolve(text)?;
        Ok(RegionLabel {
            kind: self.kind,
            segments: text.split('/').map(str::to_owned).collect(),
        })
    }

    /// Half-open range of linear neuron indices covered by a region label
    /// at any depth.
    pub fn neuron_range(&self, label: &RegionLabel) -> Result<Range<u64>, CodecError> {
        if label.kind != self.kind {
            return Err(CodecError::SchemaMismatch {
                label: label.kind,
                schema: self.kind,
            });
        }
        let text = label.to_string();
        let (level, unit) = self.resolve(&text)?;
        Ok(self.first_neuron(level, unit)..self.first_neuron(level, unit + 1))
    }

    /// Range of linear indices covered by label text.
    pub fn resolve_range(&self, text: &str) -> Result<Range<u64>, CodecError> {
        let (level, unit) = self.resolve(text)?;
        Ok(self.first_neuron(level, unit)..self.first_neuron(level, unit + 1))
    }

    /// All labels at `depth`, in hierarchy-major order, produced lazily.
    /// The stream agrees with [`Schema::neuron_range`] start order.
    pub fn enumerate_regions(&self, depth: usize) -> Result<RegionIter<'_>, CodecError> {
        if !(1..=FULL_DEPTH).contains(&depth) {
            return Err(CodecError::DepthOutOfRange { depth });
        }
        Ok(RegionIter {
            schema: self,
            level: depth - 1,
            next: 0,
            total: self.totals[depth - 1],
        })
    }
}

fn lookup_name(
    segment: &str,
    names: &[String],
    position: usize,
    what: &str,
) -> Result<u64, CodecError> {
    names
        .iter()
        .position(|n| n == segment)
        .map(|i| i as u64)
        .ok_or_else(|| CodecError::Parse {
            position,
            message: format!("unknown {what} name `{segment}`"),
        })
}

/// Numeric label components are nonzero decimals with no leading zeros, no
/// sign, and no padding.
fn parse_component(text: &str, position: usize) -> Result<u64, CodecError> {
    let well_formed =
        !text.is_empty() && text.bytes().all(|b| b.is_ascii_digit()) && !text.starts_with('0');
    if !well_formed {
        return Err(CodecError::Parse {
            position,
            message: format!("`{text}` is not a nonzero decimal without leading zeros"),
        });
    }
    text.parse::<u64>().map_err(|_| CodecError::Parse {
        position,
        message: format!("`{text}` exceeds the representable range"),
    })
}

/// Lazy hierarchy-major stream of region labels at a fixed depth.
pub struct RegionIter<'a> {
    schema: &'a Schema,
    level: usize,
    next: u64,
    total: u64,
}

impl RegionIter<'_> {
    /// Stream length, available without iterating.
    pub fn remaining(&self) -> u64 {
        self.total - self.next
    }
}

impl Iterator for RegionIter<'_> {
    type Item = RegionLabel;

    fn next(&mut self) -> Option<RegionLabel> {
        if self.next >= self.total {
            return None;
        }
        let label = self.schema.label_of_unit(self.level, self.next);
        self.next += 1;
        Some(label)
    }

    fn size_hint(&self) -> (usize, Option<usize>) {
        let n = usize::try_from(self.remaining()).ok();
        (n.unwrap_or(usize::MAX), n)
    }
}
