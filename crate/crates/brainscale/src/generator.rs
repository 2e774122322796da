//! Deterministic generation of sparse synaptic weight blocks.
//!
//! A block is a square `dim x dim` weight matrix over the first `dim`
//! neurons of a schema, populated at a target sparsity with uniformly
//! placed nonzero entries. Positions are drawn without replacement by
//! Floyd's subset-sampling algorithm, so the entry count is exact rather
//! than binomial, and the whole block is a pure function of its spec:
//! the same dimension, sparsity, and seed always reproduce byte-identical
//! entries, on any platform, at any worker count.
//!
//! Weights are uniform in (0, 1]. Zero never occurs: a sparse matrix
//! represents absent synapses by absent entries, so an explicit zero would
//! be indistinguishable from noise.

use std::io::{self, BufRead, Write};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::codec::{CodecError, Schema};

#[derive(Debug, Error)]
pub enum GenError {
    #[error("block dimension must be positive")]
    ZeroDimension,
    #[error("block dimension {dim} squared overflows the position space")]
    DimensionOverflow { dim: u64 },
    #[error("sparsity {value} is not a fraction in [0, 1]")]
    InvalidSparsity { value: f64 },
    #[error("block dimension {dim} exceeds the schema's {neurons} neurons")]
    BlockExceedsSchema { dim: u64, neurons: u64 },
    #[error(transparent)]
    Codec(#[from] CodecError),
    #[error("TSV line {line}: {message}")]
    Tsv { line: usize, message: String },
    #[error(transparent)]
    Io(#[from] io::Error),
}

/// Everything that determines a block's contents.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BlockSpec {
    /// Rows and columns of the square block.
    pub dim: u64,
    /// Fraction of the `dim * dim` positions occupied, in `[0, 1]`.
    pub sparsity: f64,
    pub seed: u64,
}

impl BlockSpec {
    pub fn new(dim: u64, sparsity: f64, seed: u64) -> BlockSpec {
        BlockSpec {
            dim,
            sparsity,
            seed,
        }
    }

    fn positions(&self) -> Result<u64, GenError> {
        if self.dim == 0 {
            return Err(GenError::ZeroDimension);
        }
        self.dim
            .checked_mul(self.dim)
            .ok_or(GenError::DimensionOverflow { dim: self.dim })
    }

    /// Exact number of entries the block will contain:
    /// `round(dim^2 * sparsity)`.
    pub fn target_entries(&self) -> Result<u64, GenError> {
        let positions = self.positions()?;
        if !(0.0..=1.0).contains(&self.sparsity) {
            return Err(GenError::InvalidSparsity {
                value: self.sparsity,
            });
        }
        // The cast saturates and `positions as f64` may round up near
        // 2^53, so clamp back into the position space.
        Ok(((positions as f64 * self.sparsity).round() as u64).min(positions))
    }
}

/// One nonzero entry in neuron-index space.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RawEntry {
    pub row: u64,
    pub col: u64,
    pub weight: f64,
}

/// One nonzero entry with both endpoints spelled as qualified neuron names.
#[derive(Debug, Clone, PartialEq)]
pub struct Triple {
    pub row: String,
    pub col: String,
    pub weight: f64,
}

/// Generate every entry of a block, in sampling order.
///
/// Floyd's algorithm draws an exact-size uniform subset of the `dim^2`
/// position space; each accepted position is paired with a weight from the
/// same stream, so entries and weights are reproducible together.
pub fn generate_block(spec: &BlockSpec) -> Result<Vec<RawEntry>, GenError> {
    let positions = spec.positions()?;
    let entries = spec.target_entries()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut chosen = std::collections::HashSet::with_capacity(entries as usize);
    let mut out = Vec::with_capacity(entries as usize);

    for j in (positions - entries)..positions {
        let candidate = rng.random_range(0..=j);
        let position = if chosen.insert(candidate) {
            candidate
        } else {
            // `candidate` was already taken; `j` itself is guaranteed free.
            chosen.insert(j);
            j
        };
        // random::<f64>() is uniform in [0, 1); flip to (0, 1] so no
        // explicit zero weight can appear.
        let weight = 1.0 - rng.random::<f64>();
        out.push(RawEntry {
            row: position / spec.dim,
            col: position % spec.dim,
            weight,
        });
    }
    Ok(out)
}

/// Spell one entry's endpoints as qualified neuron names.
pub fn label_entry(schema: &Schema, entry: &RawEntry) -> Result<Triple, CodecError> {
    Ok(Triple {
        row: schema.qualified_name(entry.row)?,
        col: schema.qualified_name(entry.col)?,
        weight: entry.weight,
    })
}

/// Label a whole block against a schema. The block must fit inside the
/// schema's index space.
pub fn label_triples(
    schema: &Schema,
    dim: u64,
    entries: &[RawEntry],
) -> Result<Vec<Triple>, GenError> {
    if dim > schema.neuron_count() {
        return Err(GenError::BlockExceedsSchema {
            dim,
            neurons: schema.neuron_count(),
        });
    }
    entries
        .iter()
        .map(|e| label_entry(schema, e).map_err(GenError::from))
        .collect()
}

/// Write triples as tab-separated `row<TAB>col<TAB>weight` lines. Weights
/// use the shortest representation that round-trips exactly.
pub fn write_tsv<W: Write>(mut w: W, triples: &[Triple]) -> io::Result<()> {
    for t in triples {
        writeln!(w, "{}\t{}\t{}", t.row, t.col, t.weight)?;
    }
    Ok(())
}

/// Read triples back from tab-separated lines. Blank lines are rejected:
/// the format has no comments or padding.
pub fn read_tsv<R: BufRead>(r: R) -> Result<Vec<Triple>, GenError> {
    let mut out = Vec::new();
    for (i, line) in r.lines().enumerate() {
        let line = line?;
        let number = i + 1;
        let mut fields = line.split('\t');
        let (row, col, weight) = match (fields.next(), fields.next(), fields.next(), fields.next())
        {
            (Some(row), Some(col), Some(weight), None) => (row, col, weight),
            _ => {
                return Err(GenError::Tsv {
                    line: number,
                    message: "expected exactly three tab-separated fields".to_owned(),
                })
            }
        };
        let weight: f64 = weight.parse().map_err(|_| GenError::Tsv {
            line: number,
            message: format!("`{weight}` is not a number"),
        })?;
        out.push(Triple {
            row: row.to_owned(),
            col: col.to_owned(),
            weight,
        });
    }
    Ok(out)
}
