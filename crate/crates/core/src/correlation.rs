//! Pearson correlation of measures across datasets.

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use crate::measures::Undefined;
use crate::report::{self, MeasureReport, ReportError};

/// Fewest paired observations for which a coefficient is reported.
pub const MIN_PAIRS: usize = 3;

/// Pearson's r from a single pass of co-moment updates.
pub fn pearson(x: &[f64], y: &[f64]) -> Result<f64, Undefined> {
    if x.len() != y.len() {
        return Err(Undefined::new("pearson", "vectors differ in length"));
    }
    if x.len() < MIN_PAIRS {
        return Err(Undefined::new("pearson", "fewer than three pairs"));
    }
    let (mut mx, mut my) = (0.0, 0.0);
    let (mut sxx, mut syy, mut sxy) = (0.0, 0.0, 0.0);
    for (i, (&a, &b)) in x.iter().zip(y).enumerate() {
        let k = (i + 1) as f64;
        let dx = a - mx;
        let dy = b - my;
        mx += dx / k;
        my += dy / k;
        sxx += dx * (a - mx);
        syy += dy * (b - my);
        sxy += dx * (b - my);
    }
    if sxx <= 0.0 || syy <= 0.0 {
        return Err(Undefined::new("pearson", "zero variance"));
    }
    Ok((sxy / (sxx.sqrt() * syy.sqrt())).clamp(-1.0, 1.0))
}

#[derive(Debug, thiserror::Error)]
pub enum CorrelationError {
    #[error("unknown measure {0:?}")]
    UnknownMeasure(String),
    #[error("measure {0:?} selected twice")]
    DuplicateMeasure(String),
    #[error("need at least {MIN_PAIRS} reports, got {0}")]
    TooFewReports(usize),
    #[error("reading {path}: {source}")]
    Report { path: PathBuf, source: ReportError },
    #[error("I/O error: {0}")]
    Io(#[from] io::Error),
}

/// Datasets × measures, with undefined entries masked.
#[derive(Debug, Clone, PartialEq)]
pub struct MeasureMatrix {
    pub measures: Vec<String>,
    pub datasets: Vec<String>,
    pub values: Vec<Vec<Option<f64>>>,
}

impl MeasureMatrix {
    pub fn from_reports<S: AsRef<str>>(reports: &[MeasureReport], measures: &[S]) -> Result<Self, CorrelationError> {
        let mut names: Vec<String> = Vec::with_capacity(measures.len());
        for m in measures {
            let m = m.as_ref();
            if !MeasureReport::MEASURES.contains(&m) {
                return Err(CorrelationError::UnknownMeasure(m.to_owned()));
            }
            if names.iter().any(|n| n == m) {
                return Err(CorrelationError::DuplicateMeasure(m.to_owned()));
            }
            names.push(m.to_owned());
        }
        let values = reports
            .iter()
            .map(|r| names.iter().map(|n| r.measure(n).filter(|v| v.is_finite())).collect())
            .collect();
        Ok(MeasureMatrix { measures: names, datasets: reports.iter().map(|r| r.dataset.clone()).collect(), values })
    }

    pub fn column(&self, j: usize) -> impl Iterator<Item = Option<f64>> + '_ {
        self.values.iter().map(move |row| row[j])
    }

    /// Rows where both columns are defined.
    pub fn paired(&self, a: usize, b: usize) -> (Vec<f64>, Vec<f64>) {
        self.column(a).zip(self.column(b)).filter_map(|(x, y)| Some((x?, y?))).unzip()
    }
}

/// Symmetric matrix of coefficients; `None` marks a masked cell.
#[derive(Debug, Clone, PartialEq)]
pub struct CorrelationMatrix {
    pub measures: Vec<String>,
    pub cells: Vec<Vec<Option<f64>>>,
}

impl CorrelationMatrix {
    pub fn get(&self, a: &str, b: &str) -> Option<f64> {
        let i = self.measures.iter().position(|m| m == a)?;
        let j = self.measures.iter().position(|m| m == b)?;
        self.cells[i][j]
    }

    /// CSV with a header row of measure names; masked cells are empty.
    pub fn write_csv<W: Write>(&self, mut out: W) -> io::Result<()> {
        write!(out, "measure")?;
        for m in &self.measures {
            write!(out, ",{m}")?;
        }
        writeln!(out)?;
        for (m, row) in self.measures.iter().zip(&self.cells) {
            write!(out, "{m}")?;
            for cell in row {
                match cell {
                    Some(r) => write!(out, ",{r}")?,
                    None => write!(out, ",")?,
                }
            }
            writeln!(out)?;
        }
        out.flush()
    }

    /// Long-format `row<TAB>col<TAB>r` lines for heatmap tools; masked cells are `NA`.
    pub fn write_heatmap<W: Write>(&self, mut out: W) -> io::Result<()> {
        writeln!(out, "row\tcol\tr")?;
        for (a, row) in self.measures.iter().zip(&self.cells) {
            for (b, cell) in self.measures.iter().zip(row) {
                match cell {
                    Some(r) => writeln!(out, "{a}\t{b}\t{r}")?,
                    None => writeln!(out, "{a}\t{b}\tNA")?,
                }
            }
        }
        out.flush()
    }
}

/// Pairwise-masked correlations. The diagonal is 1 by definition.
pub fn correlation_matrix(matrix: &MeasureMatrix) -> CorrelationMatrix {
    let k = matrix.measures.len();
    let mut cells = vec![vec![None; k]; k];
    for i in 0..k {
        cells[i][i] = Some(1.0);
        for j in i + 1..k {
            let (x, y) = matrix.paired(i, j);
            let r = pearson(&x, &y).ok();
            cells[i][j] = r;
            cells[j][i] = r;
        }
    }
    CorrelationMatrix { measures: matrix.measures.clone(), cells }
}

/// Builds the matrix for `measures` over `reports`, optionally restricted to one domain.
pub fn correlate<S: AsRef<str>>(
    reports: &[MeasureReport],
    measures: &[S],
    domain: Option<&str>,
) -> Result<CorrelationMatrix, CorrelationError> {
    let selected: Vec<MeasureReport> = match domain {
        Some(d) => reports.iter().filter(|r| r.domain.as_deref() == Some(d)).cloned().collect(),
        None => reports.to_vec(),
    };
    if selected.len() < MIN_PAIRS {
        return Err(CorrelationError::TooFewReports(selected.len()));
    }
    Ok(correlation_matrix(&MeasureMatrix::from_reports(&selected, measures)?))
}

/// Loads every `*.json` report below `dir`, sorted by dataset id. JSON files
/// that are not reports (such as a run ledger) are skipped.
pub fn load_reports(dir: &Path) -> Result<Vec<MeasureReport>, CorrelationError> {
    fn walk(dir: &Path, out: &mut Vec<PathBuf>) -> io::Result<()> {
        for entry in fs::read_dir(dir)? {
            let path = entry?.path();
            if path.is_dir() {
                walk(&path, out)?;
            } else if path.extension().is_some_and(|e| e == "json") {
                out.push(path);
            }
        }
        Ok(())
    }
    let mut paths = Vec::new();
    walk(dir, &mut paths)?;
    paths.sort();
    let mut reports = Vec::new();
    for path in paths {
        let text = fs::read(&path)?;
        let is_report = serde_json::from_slice::<serde_json::Value>(&text)
            .ok()
            .is_some_and(|v| v.get("schema_version").is_some() && v.get("dataset").is_some());
        if !is_report {
            continue;
        }
        let r = report::read_report(&text[..]).map_err(|source| CorrelationError::Report { path, source })?;
        reports.push(r);
    }
    reports.sort_by(|a, b| a.dataset.cmp(&b.dataset));
    Ok(reports)
}
