//! Manifest-driven batch runs under two bounded worker pools.

use std::collections::BTreeMap;
use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::panic::{self, AssertUnwindSafe};
use std::path::{Path, PathBuf};
use std::sync::mpsc;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use super::manifest::{map_media_type, Manifest, ManifestEntry, MediaType, Source};
use super::probe::{http_agent, probe_source};
use super::stages::{self, DICTIONARY_FILE, EDGELIST_FILE, GRAPH_FILE, PLOTS_DIR, REPORT_FILE};
use crate::acquire::RdfFormat;
use crate::config::Config;
use crate::ingest::IngestStats;
use crate::report::{self, MeasureReport};

pub const LEDGER_FILE: &str = "ledger.json";
pub const REPORTS_CSV: &str = "reports.csv";

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Stage {
    Probe,
    Download,
    Prepare,
    Build,
    Analyze,
}

impl std::fmt::Display for Stage {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Stage::Probe => "probe",
            Stage::Download => "download",
            Stage::Prepare => "prepare",
            Stage::Build => "build",
            Stage::Analyze => "analyze",
        })
    }
}

/// Terminal state of one manifest entry.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "state", rename_all = "lowercase")]
pub enum Outcome {
    Success,
    Failed { stage: Stage, reason: String },
    Skipped { reason: String },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LedgerEntry {
    pub id: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub domain: Option<String>,
    pub outcome: Outcome,
    /// Wall-clock seconds per completed or failed stage.
    pub timings: BTreeMap<Stage, f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub triples: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub malformed_lines: Option<u64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct RunLedger {
    pub entries: Vec<LedgerEntry>,
}

impl RunLedger {
    fn count(&self, pred: impl Fn(&Outcome) -> bool) -> usize {
        self.entries.iter().filter(|e| pred(&e.outcome)).count()
    }

    pub fn successes(&self) -> usize {
        self.count(|o| matches!(o, Outcome::Success))
    }

    pub fn failures(&self) -> usize {
        self.count(|o| matches!(o, Outcome::Failed { .. }))
    }

    pub fn skipped(&self) -> usize {
        self.count(|o| matches!(o, Outcome::Skipped { .. }))
    }

    /// True when no entry failed; skipped entries do not count as failures.
    pub fn succeeded(&self) -> bool {
        self.failures() == 0
    }

    pub fn get(&self, id: &str) -> Option<&LedgerEntry> {
        self.entries.iter().find(|e| e.id == id)
    }

    pub fn save(&self, path: &Path) -> io::Result<()> {
        let mut out = BufWriter::new(File::create(path)?);
        serde_json::to_writer_pretty(&mut out, self)?;
        out.write_all(b"\n")?;
        out.flush()
    }
}

/// Progress notifications, delivered in order from a single thread.
#[derive(Debug, Clone, Copy)]
pub enum Progress<'a> {
    Started { id: &'a str, stage: Stage },
    Finished { id: &'a str, stage: Stage, secs: f64 },
    Done { id: &'a str, outcome: &'a Outcome },
}

#[derive(Debug)]
pub struct BatchResult {
    pub ledger: RunLedger,
    /// Reports of successful entries, in manifest order.
    pub reports: Vec<MeasureReport>,
}

#[derive(Debug, thiserror::Error)]
pub enum BatchError {
    #[error("creating output directory {path}: {source}")]
    OutputDir { path: PathBuf, source: io::Error },
    #[error("starting worker pool: {0}")]
    Pool(#[from] rayon::ThreadPoolBuildError),
    #[error("writing {path}: {source}")]
    Summary { path: PathBuf, source: io::Error },
    #[error("invalid configuration: {0}")]
    Config(#[from] crate::config::ConfigError),
}

/// Runs [`run_batch`] with hooks for progress and failure injection.
pub struct Batch<'a> {
    manifest: &'a Manifest,
    config: &'a Config,
    out_dir: PathBuf,
    progress: Option<&'a (dyn Fn(&Progress<'_>) + Sync)>,
    fault: Option<(String, Stage)>,
}

impl<'a> Batch<'a> {
    pub fn new(manifest: &'a Manifest, config: &'a Config, out_dir: impl Into<PathBuf>) -> Self {
        Batch { manifest, config, out_dir: out_dir.into(), progress: None, fault: None }
    }

    pub fn on_progress(mut self, f: &'a (dyn Fn(&Progress<'_>) + Sync)) -> Self {
        self.progress = Some(f);
        self
    }

    /// Testing aid: forces `stage` of dataset `id` to fail.
    pub fn inject_failure(mut self, id: impl Into<String>, stage: Stage) -> Self {
        self.fault = Some((id.into(), stage));
        self
    }

    pub fn run(self) -> Result<BatchResult, BatchError> {
        self.config.validate()?;
        fs::create_dir_all(&self.out_dir)
            .map_err(|source| BatchError::OutputDir { path: self.out_dir.clone(), source })?;
        let prepare_pool = rayon::ThreadPoolBuilder::new()
            .num_threads(self.config.workers_prepare)
            .thread_name(|i| format!("prepare-{i}"))
            .build()?;
        let analyze_pool = rayon::ThreadPoolBuilder::new()
            .num_threads(self.config.workers_analyze)
            .thread_name(|i| format!("analyze-{i}"))
            .build()?;

        let entries = &self.manifest.entries;
        let (tx, rx) = mpsc::channel::<Msg>();
        let ctx = Ctx { batch: &self, agent: http_agent(self.config.http_timeout()) };
        let (ledger, reports) = std::thread::scope(|s| {
            let collector = s.spawn(|| collect(rx, entries, self.progress));
            analyze_pool.in_place_scope(|analyze_scope| {
                prepare_pool.in_place_scope(|prepare_scope| {
                    for (idx, entry) in entries.iter().enumerate() {
                        let tx = tx.clone();
                        let ctx = &ctx;
                        prepare_scope.spawn(move |_| {
                            let job = Job { idx, entry, tx, ctx };
                            if let Some(prepared) = job.front() {
                                analyze_scope.spawn(move |_| job.back(prepared));
                            }
                        });
                    }
                });
            });
            drop(tx);
            collector.join().expect("ledger collector panicked")
        });

        let summary = |name: &str, write: &dyn Fn(&Path) -> io::Result<()>| {
            let path = self.out_dir.join(name);
            write(&path).map_err(|source| BatchError::Summary { path, source })
        };
        summary(LEDGER_FILE, &|p| ledger.save(p))?;
        summary(REPORTS_CSV, &|p| report::write_reports_csv(&reports, File::create(p)?))?;
        Ok(BatchResult { ledger, reports })
    }
}

/// Runs every manifest entry through acquire, prepare, build and analyze.
///
/// Outputs go to `out_dir/<id>/` plus `ledger.json` and `reports.csv` at the
/// top level. One dataset's failure never stops the others.
pub fn run_batch(manifest: &Manifest, config: &Config, out_dir: &Path) -> Result<BatchResult, BatchError> {
    Batch::new(manifest, config, out_dir).run()
}

enum Msg {
    Started(usize, Stage),
    Finished(usize, Stage, f64),
    Ingested(usize, IngestStats),
    Note(usize, String),
    Done(usize, Outcome, Option<Box<MeasureReport>>),
}

fn collect(
    rx: mpsc::Receiver<Msg>,
    entries: &[ManifestEntry],
    progress: Option<&(dyn Fn(&Progress<'_>) + Sync)>,
) -> (RunLedger, Vec<MeasureReport>) {
    let mut rows: Vec<LedgerEntry> = entries
        .iter()
        .map(|e| LedgerEntry {
            id: e.id.clone(),
            domain: e.domain.clone(),
            outcome: Outcome::Skipped { reason: "not processed".into() },
            timings: BTreeMap::new(),
            triples: None,
            malformed_lines: None,
            notes: Vec::new(),
        })
        .collect();
    let mut reports: Vec<Option<MeasureReport>> = vec![None; entries.len()];
    let emit = |p: Progress<'_>| {
        if let Some(f) = progress {
            f(&p);
        }
    };
    for msg in rx {
        match msg {
            Msg::Started(i, stage) => emit(Progress::Started { id: &entries[i].id, stage }),
            Msg::Finished(i, stage, secs) => {
                rows[i].timings.insert(stage, secs);
                emit(Progress::Finished { id: &entries[i].id, stage, secs });
            }
            Msg::Ingested(i, stats) => {
                rows[i].triples = Some(stats.triples);
                rows[i].malformed_lines = Some(stats.parse.malformed);
            }
            Msg::Note(i, note) => rows[i].notes.push(note),
            Msg::Done(i, outcome, report) => {
                rows[i].outcome = outcome;
                reports[i] = report.map(|r| *r);
                emit(Progress::Done { id: &entries[i].id, outcome: &rows[i].outcome });
            }
        }
    }
    (RunLedger { entries: rows }, reports.into_iter().flatten().collect())
}

struct Ctx<'b, 'a> {
    batch: &'b Batch<'a>,
    agent: ureq::Agent,
}

struct Job<'c, 'b, 'a> {
    idx: usize,
    entry: &'c ManifestEntry,
    tx: mpsc::Sender<Msg>,
    ctx: &'c Ctx<'b, 'a>,
}

struct Prepared {
    dir: PathBuf,
}

type StageResult<T> = Result<T, (Stage, String)>;

impl Job<'_, '_, '_> {
    fn send(&self, msg: Msg) {
        // the collector outlives every job
        let _ = self.tx.send(msg);
    }

    fn finish(&self, outcome: Outcome, report: Option<MeasureReport>) {
        self.send(Msg::Done(self.idx, outcome, report.map(Box::new)));
    }

    /// Runs `f` as `stage`, timing it and turning errors and panics into a
    /// stage failure.
    fn stage<T>(&self, stage: Stage, f: impl FnOnce() -> Result<T, String>) -> StageResult<T> {
        self.send(Msg::Started(self.idx, stage));
        let start = Instant::now();
        let injected = self.ctx.batch.fault.as_ref().is_some_and(|(id, s)| *id == self.entry.id && *s == stage);
        let result = if injected {
            Err("injected failure".to_owned())
        } else {
            panic::catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|payload| Err(panic_message(payload)))
        };
        self.send(Msg::Finished(self.idx, stage, start.elapsed().as_secs_f64()));
        result.map_err(|reason| (stage, reason))
    }

    /// Probe, download and prepare. Returns `None` once a terminal state was sent.
    fn front(&self) -> Option<Prepared> {
        match self.try_front() {
            Ok(Some(p)) => Some(p),
            Ok(None) => None,
            Err((stage, reason)) => {
                self.finish(Outcome::Failed { stage, reason }, None);
                None
            }
        }
    }

    fn try_front(&self) -> StageResult<Option<Prepared>> {
        let e = self.entry;
        let config = self.ctx.batch.config;
        let hint = match self.format_hint() {
            Ok(h) => h,
            Err(reason) => {
                self.finish(Outcome::Skipped { reason }, None);
                return Ok(None);
            }
        };

        let source = self.ctx.batch.manifest.source(e);
        let (available, _, detail) = self.stage(Stage::Probe, || Ok(probe_source(&source, &self.ctx.agent)))?;
        if !available {
            self.finish(Outcome::Skipped { reason: format!("unavailable: {detail}") }, None);
            return Ok(None);
        }

        let dir = self.ctx.batch.out_dir.join(&e.id);
        // stale outputs from an earlier run must not survive a failure
        let reset = || -> io::Result<()> {
            if dir.exists() {
                fs::remove_dir_all(&dir)?;
            }
            fs::create_dir_all(&dir)
        };
        reset().map_err(|err| (Stage::Prepare, format!("output directory {}: {err}", dir.display())))?;

        let scratch;
        let input = match source {
            Source::Local(path) => path,
            Source::Remote(url) => {
                scratch = tempfile::Builder::new()
                    .prefix(".download")
                    .tempdir_in(&dir)
                    .map_err(|err| (Stage::Download, err.to_string()))?;
                let dest = scratch.path().join(file_name_from_url(&url));
                self.stage(Stage::Download, || download(&url, &dest, config))?;
                dest
            }
        };

        let stats = self.stage(Stage::Prepare, || {
            stages::prepare_dataset(&input, hint, config, &dir.join(EDGELIST_FILE), &dir.join(DICTIONARY_FILE))
                .map_err(|err| err.to_string())
        })?;
        if stats.parse.malformed > 0 {
            self.send(Msg::Note(self.idx, format!("{} malformed lines skipped", stats.parse.malformed)));
        }
        if stats.triples == 0 {
            self.send(Msg::Note(self.idx, "no statements".into()));
        }
        self.send(Msg::Ingested(self.idx, stats));
        Ok(Some(Prepared { dir }))
    }

    /// Build and analyze.
    fn back(self, prepared: Prepared) {
        match self.try_back(&prepared) {
            Ok(report) => self.finish(Outcome::Success, Some(report)),
            Err((stage, reason)) => self.finish(Outcome::Failed { stage, reason }, None),
        }
    }

    fn try_back(&self, prepared: &Prepared) -> StageResult<MeasureReport> {
        let dir = &prepared.dir;
        let config = self.ctx.batch.config;
        let g = self.stage(Stage::Build, || {
            stages::build_graph(&dir.join(EDGELIST_FILE), &dir.join(GRAPH_FILE)).map_err(|err| err.to_string())
        })?;
        self.stage(Stage::Analyze, || {
            let plots = dir.join(PLOTS_DIR);
            let plots = config.plots.then_some(plots.as_path());
            stages::analyze_dataset(&g, &self.entry.id, self.entry.domain.as_deref(), config, &dir.join(REPORT_FILE), plots)
                .map_err(|err| err.to_string())
        })
    }

    /// An explicit format wins over the media type. Ambiguous or unrecognized
    /// media types skip the entry; an empty one defers to file names.
    fn format_hint(&self) -> Result<Option<RdfFormat>, String> {
        let e = self.entry;
        if let Some(hint) = &e.format {
            return RdfFormat::from_hint(hint).map(Some).ok_or_else(|| format!("unknown format {hint:?}"));
        }
        if e.media_type.trim().is_empty() {
            return Ok(None);
        }
        match map_media_type(&e.media_type) {
            MediaType::Rdf(f) => Ok(Some(f)),
            MediaType::Archive(_) => Ok(None),
            MediaType::Ambiguous => Err(format!("ambiguous media type {:?}", e.media_type)),
            MediaType::Unknown => Err(format!("unrecognized media type {:?}", e.media_type)),
        }
    }
}

fn panic_message(payload: Box<dyn std::any::Any + Send>) -> String {
    let msg = payload
        .downcast_ref::<&str>()
        .map(|s| s.to_string())
        .or_else(|| payload.downcast_ref::<String>().cloned())
        .unwrap_or_else(|| "unknown panic".into());
    format!("panic: {msg}")
}

/// Last path segment of `url`, reduced to file-name-safe characters.
fn file_name_from_url(url: &str) -> String {
    let path = url.split(['?', '#']).next().unwrap_or("");
    let path = path.split_once("://").map_or(path, |(_, rest)| rest);
    let last = path.split_once('/').map_or("", |(_, p)| p).rsplit('/').next().unwrap_or("");
    let safe: String = last
        .chars()
        .map(|c| if c.is_ascii_alphanumeric() || matches!(c, '.' | '_' | '-') { c } else { '_' })
        .collect();
    if safe.trim_matches('.').is_empty() {
        "download".into()
    } else {
        safe
    }
}

/// Streams `url` into `dest`. Only connecting and each read are time-limited,
/// so large dumps are not cut off.
fn download(url: &str, dest: &Path, config: &Config) -> Result<(), String> {
    let timeout = config.http_timeout();
    let agent = ureq::AgentBuilder::new()
        .timeout_connect(timeout)
        .timeout_read(timeout)
        .redirects(8)
        .build();
    let resp = agent.get(url).call().map_err(|err| err.to_string())?;
    let mut out = BufWriter::new(File::create(dest).map_err(|e| e.to_string())?);
    io::copy(&mut resp.into_reader(), &mut out).map_err(|e| e.to_string())?;
    out.flush().map_err(|e| e.to_string())
}
