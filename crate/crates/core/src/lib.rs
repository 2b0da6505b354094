//! Topological profiling of RDF datasets.
//!
//! The pipeline runs N-Triples through a hashing edgelist writer
//! ([`ingest`]), builds an immutable multigraph ([`graph`], persisted by
//! [`binary`]), and computes the measure catalogue ([`measures`], [`stats`],
//! [`powerlaw`]) into a [`MeasureReport`]. [`pipeline`] orchestrates many
//! datasets; [`correlation`] compares measures across reports.

pub mod acquire;
pub mod binary;
pub mod config;
pub mod correlation;
pub mod graph;
pub mod hash;
pub mod ingest;
pub mod measures;
pub mod ntriples;
pub mod pipeline;
pub mod powerlaw;
pub mod report;
pub mod stats;

pub use graph::{Graph, GraphError, VertexId};
pub use hash::{hash_term, TermHash, TermHasher};
pub use ingest::{EdgeListRecord, IngestStats, TermDictionary};
pub use measures::Undefined;
pub use ntriples::{Term, Triple};
pub use powerlaw::{FitOptions, PowerLawFit};
pub use config::Config;
pub use pipeline::{Manifest, RunLedger};
pub use report::{AnalysisOptions, MeasureReport};
pub use stats::{DegreeHistogram, DegreeMode};
