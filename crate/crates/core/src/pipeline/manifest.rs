//! Dataset manifests and declared media types.

use std::collections::HashSet;
use std::fs;
use std::io::{self, BufRead, BufReader, Read};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::acquire::RdfFormat;

/// Result of normalizing a declared media type.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MediaType {
    Rdf(RdfFormat),
    /// A compressed or archived dump; the RDF format comes from member names.
    Archive(&'static str),
    /// Several serializations named at once.
    Ambiguous,
    Unknown,
}

impl MediaType {
    pub fn canonical(self) -> Option<&'static str> {
        match self {
            MediaType::Rdf(f) => Some(match f {
                RdfFormat::NTriples => "application/n-triples",
                RdfFormat::NQuads => "application/n-quads",
                RdfFormat::Turtle => "text/turtle",
                RdfFormat::RdfXml => "application/rdf+xml",
                RdfFormat::N3 => "text/n3",
            }),
            MediaType::Archive(m) => Some(m),
            MediaType::Ambiguous | MediaType::Unknown => None,
        }
    }
}

const ALIASES: &[(&str, MediaType)] = &[
    ("application/n-triples", MediaType::Rdf(RdfFormat::NTriples)),
    ("application/x-ntriples", MediaType::Rdf(RdfFormat::NTriples)),
    ("text/ntriples", MediaType::Rdf(RdfFormat::NTriples)),
    ("text/plain+ntriples", MediaType::Rdf(RdfFormat::NTriples)),
    ("rdf/n-triples", MediaType::Rdf(RdfFormat::NTriples)),
    ("n-triples", MediaType::Rdf(RdfFormat::NTriples)),
    ("n_triples", MediaType::Rdf(RdfFormat::NTriples)),
    ("ntriples", MediaType::Rdf(RdfFormat::NTriples)),
    ("rdf_n_triples", MediaType::Rdf(RdfFormat::NTriples)),
    ("nt", MediaType::Rdf(RdfFormat::NTriples)),
    ("application/n-quads", MediaType::Rdf(RdfFormat::NQuads)),
    ("application/x-nquads", MediaType::Rdf(RdfFormat::NQuads)),
    ("text/x-nquads", MediaType::Rdf(RdfFormat::NQuads)),
    ("n-quads", MediaType::Rdf(RdfFormat::NQuads)),
    ("nquads", MediaType::Rdf(RdfFormat::NQuads)),
    ("nq", MediaType::Rdf(RdfFormat::NQuads)),
    ("text/turtle", MediaType::Rdf(RdfFormat::Turtle)),
    ("application/x-turtle", MediaType::Rdf(RdfFormat::Turtle)),
    ("application/turtle", MediaType::Rdf(RdfFormat::Turtle)),
    ("text/rdf+ttl", MediaType::Rdf(RdfFormat::Turtle)),
    ("rdf/turtle", MediaType::Rdf(RdfFormat::Turtle)),
    ("turtle", MediaType::Rdf(RdfFormat::Turtle)),
    ("ttl", MediaType::Rdf(RdfFormat::Turtle)),
    ("application/rdf+xml", MediaType::Rdf(RdfFormat::RdfXml)),
    ("application/x-rdf+xml", MediaType::Rdf(RdfFormat::RdfXml)),
    ("text/rdf+xml", MediaType::Rdf(RdfFormat::RdfXml)),
    ("rdf/xml", MediaType::Rdf(RdfFormat::RdfXml)),
    ("rdf+xml", MediaType::Rdf(RdfFormat::RdfXml)),
    ("rdf-xml", MediaType::Rdf(RdfFormat::RdfXml)),
    ("rdf_xml", MediaType::Rdf(RdfFormat::RdfXml)),
    ("xml_rdf", MediaType::Rdf(RdfFormat::RdfXml)),
    ("rdfxml", MediaType::Rdf(RdfFormat::RdfXml)),
    ("rdf", MediaType::Rdf(RdfFormat::RdfXml)),
    ("owl", MediaType::Rdf(RdfFormat::RdfXml)),
    ("text/n3", MediaType::Rdf(RdfFormat::N3)),
    ("text/rdf+n3", MediaType::Rdf(RdfFormat::N3)),
    ("rdf/n3", MediaType::Rdf(RdfFormat::N3)),
    ("n3", MediaType::Rdf(RdfFormat::N3)),
    ("application/gzip", MediaType::Archive("application/gzip")),
    ("application/x-gzip", MediaType::Archive("application/gzip")),
    ("gzip", MediaType::Archive("application/gzip")),
    ("gz", MediaType::Archive("application/gzip")),
    ("application/x-bzip2", MediaType::Archive("application/x-bzip2")),
    ("application/x-bzip", MediaType::Archive("application/x-bzip2")),
    ("bzip2", MediaType::Archive("application/x-bzip2")),
    ("bz2", MediaType::Archive("application/x-bzip2")),
    ("application/x-tar", MediaType::Archive("application/x-tar")),
    ("application/x-gtar", MediaType::Archive("application/x-tar")),
    ("tar", MediaType::Archive("application/x-tar")),
    ("tgz", MediaType::Archive("application/x-tar")),
    ("application/zip", MediaType::Archive("application/zip")),
    ("application/x-zip-compressed", MediaType::Archive("application/zip")),
    ("zip", MediaType::Archive("application/zip")),
];

/// Serialization families used to spot compound declarations.
fn family(token: &str) -> Option<&'static str> {
    Some(match token {
        "xml" | "rdf" | "rdfxml" | "owl" => "rdfxml",
        "ttl" | "turtle" => "turtle",
        "nt" | "ntriples" | "triples" => "ntriples",
        "nq" | "nquads" | "quads" => "nquads",
        "n3" => "n3",
        "json" | "ld" | "jsonld" => "jsonld",
        "html" | "xhtml" | "rdfa" => "html",
        "csv" | "tsv" => "tabular",
        _ => return None,
    })
}

/// Normalizes a declared media type. Compound declarations naming several
/// serializations are reported as [`MediaType::Ambiguous`].
pub fn map_media_type(declared: &str) -> MediaType {
    let norm = declared.trim().to_ascii_lowercase();
    let norm = norm.split(';').next().unwrap_or("").trim();
    if let Some(&(_, m)) = ALIASES.iter().find(|(alias, _)| *alias == norm) {
        return m;
    }
    let families: HashSet<&str> = norm
        .split(|c: char| !c.is_ascii_alphanumeric())
        .filter_map(family)
        .collect();
    if families.len() >= 2 {
        MediaType::Ambiguous
    } else {
        MediaType::Unknown
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub id: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub domain: Option<String>,
    /// HTTP(S) URL, `file://` URL, or filesystem path.
    pub url: String,
    #[serde(default)]
    pub media_type: String,
    /// Explicit RDF format; overrides the media type.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub format: Option<String>,
}

/// Where an entry's dump lives.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Source {
    Local(PathBuf),
    Remote(String),
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Manifest {
    pub entries: Vec<ManifestEntry>,
    /// Relative local paths are resolved against this directory.
    pub base_dir: Option<PathBuf>,
}

#[derive(Debug, thiserror::Error)]
pub enum ManifestError {
    #[error("reading manifest: {0}")]
    Io(#[from] io::Error),
    #[error("invalid JSON manifest: {0}")]
    Json(#[from] serde_json::Error),
    #[error("manifest line {line}: {reason}")]
    Tsv { line: usize, reason: String },
    #[error("duplicate dataset id {0:?}")]
    DuplicateId(String),
    #[error("dataset id {0:?} is not usable as a file name (use letters, digits, '.', '_' or '-')")]
    BadId(String),
    #[error("dataset {0:?} has no URL")]
    MissingUrl(String),
    #[error("dataset {id:?}: unknown format hint {hint:?}")]
    BadFormat { id: String, hint: String },
}

impl Manifest {
    pub fn new(entries: Vec<ManifestEntry>) -> Result<Manifest, ManifestError> {
        let manifest = Manifest { entries, base_dir: None };
        manifest.validate()?;
        Ok(manifest)
    }

    /// A JSON array of entries.
    pub fn from_json<R: Read>(input: R) -> Result<Manifest, ManifestError> {
        Manifest::new(serde_json::from_reader(input)?)
    }

    /// Tab-separated with a header row naming at least `id`, `domain`, `url`
    /// and `media_type`; a `format` column is optional. Blank lines and lines
    /// starting with `#` are skipped.
    pub fn from_tsv<R: BufRead>(input: R) -> Result<Manifest, ManifestError> {
        let mut columns: Option<Vec<String>> = None;
        let mut entries = Vec::new();
        for (i, line) in input.lines().enumerate() {
            let line = line?;
            let lineno = i + 1;
            if line.trim().is_empty() || line.starts_with('#') {
                continue;
            }
            let fields: Vec<&str> = line.split('\t').map(str::trim).collect();
            let Some(cols) = &columns else {
                let cols: Vec<String> = fields.iter().map(|f| f.to_ascii_lowercase()).collect();
                for required in ["id", "domain", "url", "media_type"] {
                    if !cols.iter().any(|c| c == required) {
                        return Err(ManifestError::Tsv { line: lineno, reason: format!("header lacks column {required:?}") });
                    }
                }
                columns = Some(cols);
                continue;
            };
            if fields.len() > cols.len() {
                return Err(ManifestError::Tsv {
                    line: lineno,
                    reason: format!("{} fields, header has {}", fields.len(), cols.len()),
                });
            }
            let get = |name: &str| {
                cols.iter()
                    .position(|c| c == name)
                    .and_then(|j| fields.get(j))
                    .filter(|v| !v.is_empty())
                    .map(|v| v.to_string())
            };
            entries.push(ManifestEntry {
                id: get("id").ok_or_else(|| ManifestError::Tsv { line: lineno, reason: "missing id".into() })?,
                domain: get("domain"),
                url: get("url").unwrap_or_default(),
                media_type: get("media_type").unwrap_or_default(),
                format: get("format"),
            });
        }
        Manifest::new(entries)
    }

    /// Loads JSON when the file's first non-blank byte is `[`, TSV otherwise.
    pub fn load(path: &Path) -> Result<Manifest, ManifestError> {
        let bytes = fs::read(path)?;
        let mut manifest = if bytes.iter().find(|b| !b.is_ascii_whitespace()) == Some(&b'[') {
            Manifest::from_json(&bytes[..])?
        } else {
            Manifest::from_tsv(BufReader::new(&bytes[..]))?
        };
        manifest.base_dir = path.parent().map(Path::to_owned);
        Ok(manifest)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn source(&self, entry: &ManifestEntry) -> Source {
        let url = entry.url.trim();
        let lower = url.to_ascii_lowercase();
        if lower.starts_with("http://") || lower.starts_with("https://") {
            return Source::Remote(url.to_owned());
        }
        let path = PathBuf::from(url.strip_prefix("file://").unwrap_or(url));
        match &self.base_dir {
            Some(base) if path.is_relative() => Source::Local(base.join(path)),
            _ => Source::Local(path),
        }
    }

    fn validate(&self) -> Result<(), ManifestError> {
        let mut seen = HashSet::new();
        for e in &self.entries {
            if !is_safe_id(&e.id) {
                return Err(ManifestError::BadId(e.id.clone()));
            }
            if !seen.insert(e.id.as_str()) {
                return Err(ManifestError::DuplicateId(e.id.clone()));
            }
            if e.url.trim().is_empty() {
                return Err(ManifestError::MissingUrl(e.id.clone()));
            }
            if let Some(hint) = &e.format {
                if RdfFormat::from_hint(hint).is_none() {
                    return Err(ManifestError::BadFormat { id: e.id.clone(), hint: hint.clone() });
                }
            }
        }
        Ok(())
    }
}

fn is_safe_id(id: &str) -> bool {
    !id.is_empty()
        && id != "."
        && id != ".."
        && id.len() <= 200
        && id.bytes().all(|b| b.is_ascii_alphanumeric() || matches!(b, b'.' | b'_' | b'-'))
}
