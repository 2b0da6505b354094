//! Single-dataset stages. The batch runner and the individual CLI commands
//! share these so both produce identical artifacts.

use std::fs;
use std::io::{self, Read};
use std::path::{Path, PathBuf};

use crate::acquire::{self, AcquireError, RdfFormat};
use crate::binary;
use crate::config::Config;
use crate::graph::{Graph, GraphError};
use crate::ingest::{self, IngestError, IngestStats};
use crate::report::{self, Analysis, MeasureReport, ReportError};
use crate::stats;

pub const EDGELIST_FILE: &str = "edgelist.txt";
pub const DICTIONARY_FILE: &str = "dictionary.tsv";
pub const GRAPH_FILE: &str = "graph.bin";
pub const REPORT_FILE: &str = "report.json";
pub const PLOTS_DIR: &str = "plots";

#[derive(Debug, thiserror::Error)]
pub enum PrepareError {
    #[error(transparent)]
    Acquire(#[from] AcquireError),
    #[error("ingest: {0}")]
    Ingest(#[from] IngestError),
    #[error("no valid statements ({malformed} malformed lines)")]
    NoStatements { malformed: u64 },
}

#[derive(Debug, thiserror::Error)]
pub enum AnalyzeError {
    #[error("writing report: {0}")]
    Report(#[from] ReportError),
    #[error("writing plot data: {0}")]
    Plots(#[from] io::Error),
}

/// Acquires `input` and writes the edgelist and dictionary. Partial outputs
/// are removed on failure.
pub fn prepare_dataset(
    input: &Path,
    hint: Option<RdfFormat>,
    config: &Config,
    edgelist: &Path,
    dictionary: &Path,
) -> Result<IngestStats, PrepareError> {
    let run = || -> Result<IngestStats, PrepareError> {
        let acquired = acquire::acquire_input(input, hint, &config.tools)?;
        let stats = ingest::prepare_files(acquired.reader, acquired.syntax, config.hash, edgelist, dictionary)?;
        if stats.triples == 0 && stats.parse.malformed > 0 {
            return Err(PrepareError::NoStatements { malformed: stats.parse.malformed });
        }
        Ok(stats)
    };
    let result = run();
    if result.is_err() {
        let _ = fs::remove_file(edgelist);
        let _ = fs::remove_file(dictionary);
    }
    result
}

/// Loads an edgelist and persists the binary graph next to it.
pub fn build_graph(edgelist: &Path, graph_file: &Path) -> Result<Graph, GraphError> {
    let g = Graph::load_edgelist(edgelist)?;
    binary::save_binary(&g, graph_file)?;
    Ok(g)
}

/// Loads a binary graph file, or an edgelist when the magic bytes are absent.
pub fn load_graph(path: &Path) -> Result<Graph, GraphError> {
    let mut head = Vec::with_capacity(8);
    fs::File::open(path)?.take(8).read_to_end(&mut head)?;
    if head == binary::MAGIC {
        binary::load_binary(path)
    } else {
        Graph::load_edgelist(path)
    }
}

pub fn plot_file(dir: &Path, mode: stats::DegreeMode) -> PathBuf {
    dir.join(format!("{mode}_degree.tsv"))
}

/// Writes one plot data file per non-empty distribution.
pub fn write_plots(analysis: &Analysis, dir: &Path) -> io::Result<Vec<PathBuf>> {
    fs::create_dir_all(dir)?;
    let mut written = Vec::new();
    for (hist, fit) in &analysis.distributions {
        if hist.is_empty() {
            continue;
        }
        let path = plot_file(dir, hist.mode);
        stats::export_plotdata(hist, fit.as_ref(), &path)?;
        written.push(path);
    }
    Ok(written)
}

/// Computes the report and writes it, plus plot data when `plots_dir` is given.
pub fn analyze_dataset(
    g: &Graph,
    id: &str,
    domain: Option<&str>,
    config: &Config,
    report_path: &Path,
    plots_dir: Option<&Path>,
) -> Result<MeasureReport, AnalyzeError> {
    let analysis = report::analyze(id, domain, g, &config.analysis());
    report::save_report(&analysis.report, report_path)?;
    if let Some(dir) = plots_dir {
        write_plots(&analysis, dir)?;
    }
    Ok(analysis.report)
}
