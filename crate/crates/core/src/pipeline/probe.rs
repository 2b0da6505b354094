//! Availability checks: `stat` for local dumps, HTTP HEAD for remote ones.

use std::time::Duration;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::manifest::{Manifest, Source};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Availability {
    pub id: String,
    pub available: bool,
    /// HTTP status, when a response was received.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub status: Option<u16>,
    pub detail: String,
}

pub(crate) fn http_agent(timeout: Duration) -> ureq::Agent {
    ureq::AgentBuilder::new().timeout(timeout).redirects(8).build()
}

/// Checks one source without fetching its body.
pub fn probe_source(source: &Source, agent: &ureq::Agent) -> (bool, Option<u16>, String) {
    match source {
        Source::Local(path) => match std::fs::metadata(path) {
            Ok(meta) if meta.is_file() => (true, None, format!("{} bytes", meta.len())),
            Ok(_) => (false, None, format!("{} is not a regular file", path.display())),
            Err(e) => (false, None, format!("{}: {e}", path.display())),
        },
        Source::Remote(url) => match agent.head(url).call() {
            Ok(resp) => {
                let len = resp.header("content-length").map(|l| format!(", {l} bytes")).unwrap_or_default();
                (true, Some(resp.status()), format!("HTTP {}{len}", resp.status()))
            }
            Err(ureq::Error::Status(code, _)) => (false, Some(code), format!("HTTP {code}")),
            Err(ureq::Error::Transport(t)) => (false, None, t.to_string()),
        },
    }
}

/// Probes every entry using at most `workers` concurrent requests. The result
/// is in manifest order with one row per entry.
pub fn probe_availability(manifest: &Manifest, timeout: Duration, workers: usize) -> Vec<Availability> {
    let agent = http_agent(timeout);
    let run = || {
        manifest
            .entries
            .par_iter()
            .map(|e| {
                let (available, status, detail) = probe_source(&manifest.source(e), &agent);
                Availability { id: e.id.clone(), available, status, detail }
            })
            .collect()
    };
    match rayon::ThreadPoolBuilder::new().num_threads(workers.max(1)).build() {
        Ok(pool) => pool.install(run),
        Err(_) => run(),
    }
}
