use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{anyhow, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use rdftopo_core::acquire::RdfFormat;
use rdftopo_core::correlation;
use rdftopo_core::ingest::{resolve_hash, TermDictionary};
use rdftopo_core::pipeline::{self, stages, Batch, Outcome, Progress};
use rdftopo_core::stats::{self, DegreeMode};
use rdftopo_core::{Config, Manifest, MeasureReport, TermHash};

#[derive(Debug, Parser)]
#[command(name = "rdftopo", version, about = "Graph topology profiles of RDF datasets")]
struct Cli {
    #[command(flatten)]
    global: Global,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct Global {
    /// TOML configuration file; RDFTOPO_* variables override it, flags override both
    #[arg(long, global = true, value_name = "FILE", env = "RDFTOPO_CONFIG")]
    config: Option<PathBuf>,

    /// Seed for term hashing
    #[arg(long, global = true, value_name = "N")]
    hash_seed: Option<u64>,

    /// PageRank damping factor
    #[arg(long, global = true, value_name = "D")]
    damping: Option<f64>,

    /// Concurrent preparation jobs in `batch`
    #[arg(long, global = true, value_name = "N")]
    workers_prepare: Option<usize>,

    /// Concurrent analysis jobs in `batch`
    #[arg(long, global = true, value_name = "N")]
    workers_analyze: Option<usize>,

    /// Suppress progress lines on stderr
    #[arg(long, short, global = true)]
    quiet: bool,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Convert an RDF dump into an edgelist and a term dictionary
    Prepare {
        /// RDF file or archive (.nt, .nq, .gz, .bz2, .tar, ...)
        input: PathBuf,
        /// Output directory for edgelist.txt and dictionary.tsv
        #[arg(long, value_name = "DIR", default_value = ".")]
        out: PathBuf,
        /// RDF format when the file name does not tell (nt, nq, ttl, rdf, n3 or a media type)
        #[arg(long, value_name = "FORMAT")]
        format: Option<String>,
    },
    /// Build a binary graph file from an edgelist
    Build {
        edgelist: PathBuf,
        /// Output file [default: graph.bin next to the edgelist]
        #[arg(long, value_name = "FILE")]
        out: Option<PathBuf>,
    },
    /// Compute the measure report of a graph (binary file or edgelist)
    Analyze {
        graph: PathBuf,
        /// Report file [default: stdout]
        #[arg(long, value_name = "FILE")]
        out: Option<PathBuf>,
        /// Also write degree distribution plot data into DIR
        #[arg(long, value_name = "DIR")]
        plots: Option<PathBuf>,
        /// Dataset id recorded in the report [default: the graph's directory or file name]
        #[arg(long)]
        id: Option<String>,
        /// Domain label recorded in the report
        #[arg(long)]
        domain: Option<String>,
    },
    /// Run every dataset of a manifest through the whole pipeline
    Batch {
        /// JSON array or TSV with columns id, domain, url, media_type [, format]
        manifest: PathBuf,
        #[arg(long, value_name = "DIR")]
        out: PathBuf,
        /// Skip plot data files
        #[arg(long)]
        no_plots: bool,
    },
    /// Check which manifest entries can be fetched, without downloading
    Probe {
        manifest: PathBuf,
        /// Seconds per request [default: from configuration]
        #[arg(long, value_name = "SECS")]
        timeout: Option<u64>,
    },
    /// Print degree histograms of a graph
    Hist {
        graph: PathBuf,
        #[arg(long, value_enum, default_value = "total")]
        mode: ModeArg,
        #[arg(long, value_enum, default_value = "tsv")]
        format: HistFormat,
        #[arg(long, value_name = "FILE")]
        out: Option<PathBuf>,
    },
    /// Correlate measures across the reports found under a directory
    Correlate {
        reports: PathBuf,
        /// Comma-separated measure names [default: n,m,d_max,z,p,y,delta,alpha]
        #[arg(long, value_delimiter = ',')]
        measures: Vec<String>,
        /// Only use reports with this domain label
        #[arg(long)]
        domain: Option<String>,
        /// CSV matrix [default: stdout]
        #[arg(long, value_name = "FILE")]
        out: Option<PathBuf>,
        /// Long-format heatmap data
        #[arg(long, value_name = "FILE")]
        heatmap: Option<PathBuf>,
    },
    /// Look up the terms behind hashes in a dictionary
    Resolve {
        dictionary: PathBuf,
        #[arg(required = true)]
        hashes: Vec<String>,
    },
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum ModeArg {
    In,
    Out,
    Total,
    All,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum HistFormat {
    Tsv,
    Json,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(err) => {
            eprintln!("rdftopo: {err:#}");
            ExitCode::FAILURE
        }
    }
}

fn load_config(g: &Global) -> Result<Config> {
    let mut config = Config::load(g.config.as_deref()).context("config")?;
    if let Some(seed) = g.hash_seed {
        config.hash.seed = seed;
    }
    if let Some(d) = g.damping {
        config.pagerank.damping = d;
    }
    if let Some(n) = g.workers_prepare {
        config.workers_prepare = n;
    }
    if let Some(n) = g.workers_analyze {
        config.workers_analyze = n;
    }
    config.validate().context("config")?;
    Ok(config)
}

/// Machine-readable progress line: `progress<TAB>key=value...`.
fn progress(quiet: bool, fields: &[(&str, &dyn std::fmt::Display)]) {
    if quiet {
        return;
    }
    let mut line = String::from("progress");
    for (k, v) in fields {
        line.push_str(&format!("\t{k}={v}"));
    }
    eprintln!("{line}");
}

fn timed<T>(quiet: bool, stage: &str, id: &str, f: impl FnOnce() -> Result<T>) -> Result<T> {
    let start = Instant::now();
    let out = f().with_context(|| stage.to_owned())?;
    let secs = format!("{:.6}", start.elapsed().as_secs_f64());
    progress(quiet, &[("stage", &stage), ("id", &id), ("event", &"finish"), ("secs", &secs)]);
    Ok(out)
}

fn output(path: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p).with_context(|| format!("creating {}", p.display()))?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn run(cli: Cli) -> Result<ExitCode> {
    let quiet = cli.global.quiet;
    let config = load_config(&cli.global)?;
    match cli.command {
        Command::Prepare { input, out, format } => {
            let hint = match format {
                Some(f) => Some(RdfFormat::from_hint(&f).ok_or_else(|| anyhow!("prepare: unknown format {f:?}"))?),
                None => None,
            };
            let id = input.display().to_string();
            let stats = timed(quiet, "prepare", &id, || {
                fs::create_dir_all(&out).with_context(|| format!("creating {}", out.display()))?;
                Ok(stages::prepare_dataset(
                    &input,
                    hint,
                    &config,
                    &out.join(stages::EDGELIST_FILE),
                    &out.join(stages::DICTIONARY_FILE),
                )?)
            })?;
            progress(
                quiet,
                &[
                    ("stage", &"prepare"),
                    ("id", &id),
                    ("triples", &stats.triples),
                    ("terms", &stats.distinct_terms),
                    ("malformed", &stats.parse.malformed),
                ],
            );
        }
        Command::Build { edgelist, out } => {
            let out = out.unwrap_or_else(|| edgelist.with_file_name(stages::GRAPH_FILE));
            timed(quiet, "build", &edgelist.display().to_string(), || Ok(stages::build_graph(&edgelist, &out)?))?;
        }
        Command::Analyze { graph, out, plots, id, domain } => {
            let id = id.unwrap_or_else(|| default_id(&graph));
            let g = timed(quiet, "load", &id, || Ok(stages::load_graph(&graph)?))?;
            timed(quiet, "analyze", &id, || {
                let analysis = rdftopo_core::report::analyze(&id, domain.as_deref(), &g, &config.analysis());
                let mut w = output(out.as_deref())?;
                rdftopo_core::report::write_report(&analysis.report, &mut w)?;
                w.flush()?;
                if let Some(dir) = &plots {
                    stages::write_plots(&analysis, dir).with_context(|| format!("writing plot data to {}", dir.display()))?;
                }
                Ok(())
            })?;
        }
        Command::Batch { manifest, out, no_plots } => {
            let mut config = config;
            if no_plots {
                config.plots = false;
            }
            let manifest = Manifest::load(&manifest).with_context(|| format!("batch: manifest {}", manifest.display()))?;
            let report = |p: &Progress<'_>| match *p {
                Progress::Started { id, stage } => {
                    progress(quiet, &[("stage", &stage), ("id", &id), ("event", &"start")])
                }
                Progress::Finished { id, stage, secs } => {
                    let secs = format!("{secs:.6}");
                    progress(quiet, &[("stage", &stage), ("id", &id), ("event", &"finish"), ("secs", &secs)])
                }
                Progress::Done { id, outcome } => {
                    let (state, detail) = match outcome {
                        Outcome::Success => ("success", String::new()),
                        Outcome::Failed { stage, reason } => ("failed", format!("{stage}: {reason}")),
                        Outcome::Skipped { reason } => ("skipped", reason.clone()),
                    };
                    progress(quiet, &[("id", &id), ("outcome", &state), ("detail", &detail)])
                }
            };
            let result = Batch::new(&manifest, &config, &out).on_progress(&report).run().context("batch")?;
            let ledger = &result.ledger;
            eprintln!(
                "batch: {} succeeded, {} failed, {} skipped; ledger in {}",
                ledger.successes(),
                ledger.failures(),
                ledger.skipped(),
                out.join(pipeline::batch::LEDGER_FILE).display()
            );
            for e in &ledger.entries {
                if let Outcome::Failed { stage, reason } = &e.outcome {
                    eprintln!("rdftopo: {}: {stage}: {reason}", e.id);
                }
            }
            if !ledger.succeeded() {
                return Ok(ExitCode::FAILURE);
            }
        }
        Command::Probe { manifest, timeout } => {
            let manifest = Manifest::load(&manifest).with_context(|| format!("probe: manifest {}", manifest.display()))?;
            let timeout = timeout.map_or(config.http_timeout(), std::time::Duration::from_secs);
            let rows = pipeline::probe_availability(&manifest, timeout, config.workers_prepare);
            let mut w = output(None)?;
            writeln!(w, "id\tavailable\tstatus\tdetail")?;
            for r in rows {
                let status = r.status.map(|s| s.to_string()).unwrap_or_default();
                writeln!(w, "{}\t{}\t{status}\t{}", r.id, r.available, r.detail)?;
            }
            w.flush()?;
        }
        Command::Hist { graph, mode, format, out } => {
            let g = stages::load_graph(&graph).context("hist")?;
            let modes: Vec<DegreeMode> = match mode {
                ModeArg::In => vec![DegreeMode::In],
                ModeArg::Out => vec![DegreeMode::Out],
                ModeArg::Total => vec![DegreeMode::Total],
                ModeArg::All => DegreeMode::ALL.to_vec(),
            };
            let hists: Vec<_> = modes.into_iter().map(|m| stats::degree_distribution(&g, m)).collect();
            let mut w = output(out.as_deref())?;
            match format {
                HistFormat::Json => {
                    serde_json::to_writer_pretty(&mut w, &hists)?;
                    writeln!(w)?;
                }
                HistFormat::Tsv => {
                    writeln!(w, "mode\tdegree\tcount")?;
                    for h in &hists {
                        for (k, c) in &h.pairs {
                            writeln!(w, "{}\t{k}\t{c}", h.mode)?;
                        }
                    }
                }
            }
            w.flush()?;
        }
        Command::Correlate { reports, measures, domain, out, heatmap } => {
            let all = correlation::load_reports(&reports).context("correlate")?;
            let measures: Vec<String> = if measures.is_empty() {
                MeasureReport::MINIMAL_SET.iter().map(|s| s.to_string()).collect()
            } else {
                measures
            };
            let matrix = correlation::correlate(&all, &measures, domain.as_deref()).context("correlate")?;
            matrix.write_csv(output(out.as_deref())?)?;
            if let Some(path) = heatmap {
                matrix.write_heatmap(output(Some(&path))?)?;
            }
        }
        Command::Resolve { dictionary, hashes } => {
            let parsed: Vec<TermHash> = hashes
                .iter()
                .map(|h| h.parse().map_err(|_| anyhow!("resolve: {h:?} is not a 16-digit hex hash")))
                .collect::<Result<_>>()?;
            let mut w = output(None)?;
            if let [one] = parsed[..] {
                let term = resolve_hash(&dictionary, one).context("resolve")?;
                writeln!(w, "{term}")?;
            } else {
                let dict = TermDictionary::load(&dictionary).context("resolve")?;
                for h in parsed {
                    writeln!(w, "{h}\t{}", dict.resolve(h).context("resolve")?)?;
                }
            }
            w.flush()?;
        }
    }
    Ok(ExitCode::SUCCESS)
}

/// `out/<id>/graph.bin` gives `<id>`; any other file gives its stem.
fn default_id(graph: &Path) -> String {
    let name = graph.file_name().and_then(|n| n.to_str()).unwrap_or("");
    if name == stages::GRAPH_FILE || name == stages::EDGELIST_FILE {
        if let Some(dir) = graph.parent().and_then(|p| p.file_name()).and_then(|n| n.to_str()) {
            return dir.to_owned();
        }
    }
    graph.file_stem().and_then(|s| s.to_str()).unwrap_or("dataset").to_owned()
}
