//! Batch orchestration over a dataset manifest.

pub mod batch;
pub mod manifest;
pub mod probe;
pub mod stages;

pub use batch::{run_batch, Batch, BatchError, BatchResult, LedgerEntry, Outcome, Progress, RunLedger, Stage};
pub use manifest::{map_media_type, Manifest, ManifestEntry, ManifestError, MediaType, Source};
pub use probe::{probe_availability, Availability};
