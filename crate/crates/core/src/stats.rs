//! Degree histograms, dispersion, and log-log plot data.

use std::collections::BTreeMap;
use std::fmt;
use std::io::{self, Write};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::graph::Graph;
use crate::measures::Undefined;
use crate::powerlaw::PowerLawFit;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DegreeMode {
    In,
    Out,
    Total,
}

impl DegreeMode {
    pub const ALL: [DegreeMode; 3] = [DegreeMode::In, DegreeMode::Out, DegreeMode::Total];

    pub fn degrees(self, g: &Graph) -> impl Iterator<Item = u64> + '_ {
        g.vertices().map(move |v| match self {
            DegreeMode::In => g.in_degree(v),
            DegreeMode::Out => g.out_degree(v),
            DegreeMode::Total => g.degree(v),
        } as u64)
    }
}

impl fmt::Display for DegreeMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            DegreeMode::In => "in",
            DegreeMode::Out => "out",
            DegreeMode::Total => "total",
        })
    }
}

impl FromStr for DegreeMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "in" => Ok(DegreeMode::In),
            "out" => Ok(DegreeMode::Out),
            "total" => Ok(DegreeMode::Total),
            other => Err(format!("unknown degree mode {other:?} (expected in, out or total)")),
        }
    }
}

/// Frequency table `(degree, number of vertices)`, ascending by degree.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DegreeHistogram {
    pub mode: DegreeMode,
    pub pairs: Vec<(u64, u64)>,
}

impl DegreeHistogram {
    pub fn from_degrees(mode: DegreeMode, degrees: impl IntoIterator<Item = u64>) -> Self {
        let mut counts = BTreeMap::new();
        for d in degrees {
            *counts.entry(d).or_insert(0u64) += 1;
        }
        DegreeHistogram { mode, pairs: counts.into_iter().collect() }
    }

    pub fn vertex_count(&self) -> u64 {
        self.pairs.iter().map(|&(_, c)| c).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    /// Expands back into a degree sequence (ascending).
    pub fn degrees(&self) -> impl Iterator<Item = u64> + '_ {
        self.pairs.iter().flat_map(|&(k, c)| std::iter::repeat(k).take(c as usize))
    }
}

pub fn degree_distribution(g: &Graph, mode: DegreeMode) -> DegreeHistogram {
    DegreeHistogram::from_degrees(mode, mode.degrees(g))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Dispersion {
    pub mean: f64,
    /// Population variance.
    pub variance: f64,
    pub std_dev: f64,
    /// `100 · σ / mean`; `None` when the mean is zero.
    pub cv: Option<f64>,
}

pub fn dispersion(hist: &DegreeHistogram) -> Result<Dispersion, Undefined> {
    let n = hist.vertex_count();
    if n == 0 {
        return Err(Undefined::new("dispersion", "empty distribution"));
    }
    let n = n as f64;
    let mean = hist.pairs.iter().map(|&(k, c)| k as f64 * c as f64).sum::<f64>() / n;
    let variance = hist
        .pairs
        .iter()
        .map(|&(k, c)| {
            let d = k as f64 - mean;
            c as f64 * d * d
        })
        .sum::<f64>()
        / n;
    let std_dev = variance.sqrt();
    let cv = (mean != 0.0).then(|| 100.0 * std_dev / mean);
    Ok(Dispersion { mean, variance, std_dev, cv })
}

/// Writes `# alpha=.. dmin=.. mode=..` followed by `k\tcount\ttail_prob`
/// rows, where `tail_prob` is the fraction of vertices with degree `>= k`.
pub fn write_plotdata<W: Write>(hist: &DegreeHistogram, fit: Option<&PowerLawFit>, mut out: W) -> io::Result<()> {
    if hist.is_empty() {
        return Err(io::Error::new(io::ErrorKind::InvalidInput, "empty degree histogram"));
    }
    match fit {
        Some(f) => writeln!(out, "# alpha={:?} dmin={} mode={}", f.alpha, f.d_min, hist.mode)?,
        None => writeln!(out, "# alpha=undefined dmin=undefined mode={}", hist.mode)?,
    }
    let n = hist.vertex_count() as f64;
    let mut remaining = hist.vertex_count();
    for &(k, c) in &hist.pairs {
        writeln!(out, "{k}\t{c}\t{:?}", remaining as f64 / n)?;
        remaining -= c;
    }
    out.flush()
}

pub fn export_plotdata(hist: &DegreeHistogram, fit: Option<&PowerLawFit>, path: &std::path::Path) -> io::Result<()> {
    if hist.is_empty() {
        return Err(io::Error::new(io::ErrorKind::InvalidInput, "empty degree histogram"));
    }
    write_plotdata(hist, fit, io::BufWriter::new(std::fs::File::create(path)?))
}
