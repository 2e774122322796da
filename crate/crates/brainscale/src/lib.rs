//! Hierarchical naming for brain-scale neuron populations, deterministic
//! sparse connectome generation, and ingest benchmarking against sorted
//! key-value stores.

pub mod bench;
pub mod cli;
pub mod codec;
pub mod config_file;
pub mod generator;
pub mod ingest;
pub mod plot;
pub mod schema;
pub mod store;
