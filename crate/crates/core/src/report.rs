//! The per-dataset measure record and its computation.
//!
//! Measures that have no value on a graph (averages over zero vertices, C_D
//! below three vertices, a power-law fit without enough samples, ...) are
//! `None` and serialize as JSON `null`.

use std::fs::File;
use std::io::{self, BufReader, BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::graph::Graph;
use crate::hash::TermHash;
use crate::measures::{self, HIndexMode, PageRankParams, UniqueAdjacency};
use crate::powerlaw::{self, FitOptions, PowerLawFit};
use crate::stats::{self, DegreeHistogram, DegreeMode};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeasureReport {
    pub schema_version: u32,
    pub dataset: String,
    pub domain: Option<String>,

    pub n: u64,
    pub m: u64,
    pub m_u: u64,
    pub m_p: u64,

    pub d_max: Option<u64>,
    pub d_max_in: Option<u64>,
    pub d_max_out: Option<u64>,
    pub d_max_vertex: Option<TermHash>,
    pub z: Option<f64>,
    pub z_in: Option<f64>,
    pub z_out: Option<f64>,
    pub mean_total_degree: Option<f64>,
    pub h_d: u64,
    pub h_u: u64,

    #[serde(rename = "C_D_max")]
    pub c_d_max: Option<u64>,
    #[serde(rename = "PR_max")]
    pub pr_max: Option<f64>,
    #[serde(rename = "PR_max_vertex")]
    pub pr_max_vertex: Option<TermHash>,
    pub pagerank_converged: Option<bool>,
    #[serde(rename = "C_D")]
    pub c_d: Option<f64>,

    pub p: Option<f64>,
    pub p_u: Option<f64>,
    pub y: Option<f64>,
    pub m_bi: u64,
    pub delta: Option<u64>,

    pub sigma2_in: Option<f64>,
    pub sigma2_out: Option<f64>,
    pub sigma_in: Option<f64>,
    pub sigma_out: Option<f64>,
    pub cv_in: Option<f64>,
    pub cv_out: Option<f64>,

    pub alpha: Option<f64>,
    pub d_min: Option<u64>,
    pub alpha_in: Option<f64>,
    pub d_min_in: Option<u64>,
}

impl MeasureReport {
    /// Names of the numeric fields, in serialization order.
    pub const MEASURES: &'static [&'static str] = &[
        "n", "m", "m_u", "m_p", "d_max", "d_max_in", "d_max_out", "z", "z_in", "z_out",
        "mean_total_degree", "h_d", "h_u", "C_D_max", "PR_max", "C_D", "p", "p_u", "y", "m_bi",
        "delta", "sigma2_in", "sigma2_out", "sigma_in", "sigma_out", "cv_in", "cv_out", "alpha",
        "d_min", "alpha_in", "d_min_in",
    ];

    /// Minimal characterising set.
    pub const MINIMAL_SET: &'static [&'static str] = &["n", "m", "d_max", "z", "p", "y", "delta", "alpha"];

    /// Numeric value of a named measure, `None` when undefined or unknown.
    pub fn measure(&self, name: &str) -> Option<f64> {
        macro_rules! num {
            ($v:expr) => {
                Some($v as f64)
            };
        }
        match name {
            "n" => num!(self.n),
            "m" => num!(self.m),
            "m_u" => num!(self.m_u),
            "m_p" => num!(self.m_p),
            "d_max" => self.d_max.map(|v| v as f64),
            "d_max_in" => self.d_max_in.map(|v| v as f64),
            "d_max_out" => self.d_max_out.map(|v| v as f64),
            "z" => self.z,
            "z_in" => self.z_in,
            "z_out" => self.z_out,
            "mean_total_degree" => self.mean_total_degree,
            "h_d" => num!(self.h_d),
            "h_u" => num!(self.h_u),
            "C_D_max" => self.c_d_max.map(|v| v as f64),
            "PR_max" => self.pr_max,
            "C_D" => self.c_d,
            "p" => self.p,
            "p_u" => self.p_u,
            "y" => self.y,
            "m_bi" => num!(self.m_bi),
            "delta" => self.delta.map(|v| v as f64),
            "sigma2_in" => self.sigma2_in,
            "sigma2_out" => self.sigma2_out,
            "sigma_in" => self.sigma_in,
            "sigma_out" => self.sigma_out,
            "cv_in" => self.cv_in,
            "cv_out" => self.cv_out,
            "alpha" => self.alpha,
            "d_min" => self.d_min.map(|v| v as f64),
            "alpha_in" => self.alpha_in,
            "d_min_in" => self.d_min_in.map(|v| v as f64),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct AnalysisOptions {
    pub pagerank: PageRankParams,
    pub fit: FitOptions,
}

/// A report plus the in- and total-degree histograms with their fits, for
/// plot export.
#[derive(Debug, Clone)]
pub struct Analysis {
    pub report: MeasureReport,
    pub distributions: Vec<(DegreeHistogram, Option<PowerLawFit>)>,
}

pub fn analyze(dataset: &str, domain: Option<&str>, g: &Graph, options: &AnalysisOptions) -> Analysis {
    let unique = UniqueAdjacency::new(g);
    let basic = measures::basic_counts_with(g, &unique);
    let degrees = measures::degree_stats(g).ok();
    let pagerank = measures::pagerank(g, &options.pagerank).ok();
    let pr_max = pagerank.as_ref().and_then(|pr| pr.max());
    let fill = measures::fill_with(g, &unique).ok();
    let recip = measures::reciprocity_with(g, &unique).ok();

    let in_hist = stats::degree_distribution(g, DegreeMode::In);
    let out_hist = stats::degree_distribution(g, DegreeMode::Out);
    let total_hist = stats::degree_distribution(g, DegreeMode::Total);
    let disp_in = stats::dispersion(&in_hist).ok();
    let disp_out = stats::dispersion(&out_hist).ok();

    let fit_of = |h: &DegreeHistogram| powerlaw::fit_powerlaw(&h.degrees().collect::<Vec<_>>(), &options.fit).ok();
    let fit_total = fit_of(&total_hist);
    let fit_in = fit_of(&in_hist);

    let report = MeasureReport {
        schema_version: SCHEMA_VERSION,
        dataset: dataset.to_owned(),
        domain: domain.map(str::to_owned),
        n: basic.n,
        m: basic.m,
        m_u: basic.m_u,
        m_p: basic.m_p,
        d_max: degrees.map(|d| d.d_max),
        d_max_in: degrees.map(|d| d.d_max_in),
        d_max_out: degrees.map(|d| d.d_max_out),
        d_max_vertex: degrees.map(|d| g.vertex_hash(d.d_max_vertex)),
        z: degrees.map(|d| d.z),
        z_in: degrees.map(|d| d.z_in),
        z_out: degrees.map(|d| d.z_out),
        mean_total_degree: degrees.map(|d| d.mean_total_degree),
        h_d: measures::h_index(g, HIndexMode::DirectedIn),
        h_u: measures::h_index(g, HIndexMode::UndirectedTotal),
        c_d_max: degrees.map(|d| d.d_max),
        pr_max: pr_max.map(|(_, s)| s),
        pr_max_vertex: pr_max.map(|(v, _)| g.vertex_hash(v)),
        pagerank_converged: pagerank.as_ref().map(|pr| pr.converged),
        c_d: measures::centralization_with(g, &unique).ok(),
        p: fill.map(|f| f.p),
        p_u: fill.map(|f| f.p_u),
        y: recip.map(|r| r.y),
        m_bi: recip.map_or(0, |r| r.m_bi),
        delta: measures::pseudo_diameter(g).ok(),
        sigma2_in: disp_in.map(|d| d.variance),
        sigma2_out: disp_out.map(|d| d.variance),
        sigma_in: disp_in.map(|d| d.std_dev),
        sigma_out: disp_out.map(|d| d.std_dev),
        cv_in: disp_in.and_then(|d| d.cv),
        cv_out: disp_out.and_then(|d| d.cv),
        alpha: fit_total.map(|f| f.alpha),
        d_min: fit_total.map(|f| f.d_min),
        alpha_in: fit_in.map(|f| f.alpha),
        d_min_in: fit_in.map(|f| f.d_min),
    };
    Analysis { report, distributions: vec![(total_hist, fit_total), (in_hist, fit_in)] }
}

#[derive(Debug, thiserror::Error)]
pub enum ReportError {
    #[error("I/O error: {0}")]
    Io(#[from] io::Error),
    #[error("invalid report JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("report schema version {found} is not supported (expected {expected})")]
    SchemaVersion { found: u64, expected: u32 },
}

pub fn write_report<W: Write>(report: &MeasureReport, out: W) -> Result<(), ReportError> {
    let mut out = BufWriter::new(out);
    serde_json::to_writer_pretty(&mut out, report)?;
    out.write_all(b"\n")?;
    out.flush()?;
    Ok(())
}

pub fn read_report<R: io::Read>(input: R) -> Result<MeasureReport, ReportError> {
    let value: serde_json::Value = serde_json::from_reader(BufReader::new(input))?;
    let found = value.get("schema_version").and_then(|v| v.as_u64()).unwrap_or(0);
    if found != u64::from(SCHEMA_VERSION) {
        return Err(ReportError::SchemaVersion { found, expected: SCHEMA_VERSION });
    }
    Ok(serde_json::from_value(value)?)
}

pub fn save_report(report: &MeasureReport, path: &Path) -> Result<(), ReportError> {
    write_report(report, File::create(path)?)
}

pub fn load_report(path: &Path) -> Result<MeasureReport, ReportError> {
    read_report(File::open(path)?)
}

/// One CSV row per report; undefined cells are left empty.
pub fn write_reports_csv<W: Write>(reports: &[MeasureReport], out: W) -> io::Result<()> {
    let mut out = BufWriter::new(out);
    write!(out, "dataset,domain")?;
    for name in MeasureReport::MEASURES {
        write!(out, ",{name}")?;
    }
    writeln!(out)?;
    for r in reports {
        write!(out, "{},{}", csv_field(&r.dataset), csv_field(r.domain.as_deref().unwrap_or("")))?;
        for name in MeasureReport::MEASURES {
            match r.measure(name) {
                Some(v) => write!(out, ",{v}")?,
                None => write!(out, ",")?,
            }
        }
        writeln!(out)?;
    }
    out.flush()
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_owned()
    }
}
