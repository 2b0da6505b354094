//! Turning a downloaded dump into an N-Triples byte stream.
//!
//! gzip, bzip2 and tar (optionally compressed) are handled natively. Other
//! archive formats go through an external extractor command, and non
//! N-Triples serializations through an external converter command. Both
//! hooks follow one contract: read the input path given in place of
//! `{input}`, write N-Triples to stdout, exit with status 0.

use std::fmt;
use std::fs::File;
use std::io::{self, BufRead, BufReader, Read, Write};
use std::path::{Path, PathBuf};
use std::process::{Command, Stdio};

use serde::{Deserialize, Serialize};
use tempfile::TempDir;

use crate::ntriples::Syntax;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RdfFormat {
    NTriples,
    NQuads,
    Turtle,
    RdfXml,
    N3,
}

impl RdfFormat {
    pub fn from_extension(ext: &str) -> Option<RdfFormat> {
        Some(match ext.to_ascii_lowercase().as_str() {
            "nt" | "ntriples" => RdfFormat::NTriples,
            "nq" | "nquads" => RdfFormat::NQuads,
            "ttl" | "turtle" => RdfFormat::Turtle,
            "rdf" | "owl" | "xml" | "rdfxml" => RdfFormat::RdfXml,
            "n3" => RdfFormat::N3,
            _ => return None,
        })
    }

    pub fn from_media_type(media_type: &str) -> Option<RdfFormat> {
        Some(match media_type {
            "application/n-triples" => RdfFormat::NTriples,
            "application/n-quads" => RdfFormat::NQuads,
            "text/turtle" => RdfFormat::Turtle,
            "application/rdf+xml" => RdfFormat::RdfXml,
            "text/n3" => RdfFormat::N3,
            _ => return None,
        })
    }

    /// Parses a user-facing hint: an extension-like name or a media type.
    pub fn from_hint(hint: &str) -> Option<RdfFormat> {
        let hint = hint.trim().to_ascii_lowercase();
        Self::from_media_type(&hint)
            .or_else(|| Self::from_extension(&hint))
            .or(match hint.as_str() {
                "n-triples" => Some(RdfFormat::NTriples),
                "n-quads" => Some(RdfFormat::NQuads),
                "rdf/xml" | "rdf+xml" => Some(RdfFormat::RdfXml),
                "notation3" => Some(RdfFormat::N3),
                _ => None,
            })
    }

    pub fn is_native(self) -> bool {
        matches!(self, RdfFormat::NTriples | RdfFormat::NQuads)
    }

    fn syntax(self) -> Syntax {
        match self {
            RdfFormat::NQuads => Syntax::NQuads,
            _ => Syntax::NTriples,
        }
    }
}

/// Shell-free command template; `{input}` in any argument is replaced by the
/// input path.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct CommandTemplate(pub String);

impl CommandTemplate {
    pub fn new(template: impl Into<String>) -> Self {
        CommandTemplate(template.into())
    }

    fn command(&self, input: &Path) -> Option<Command> {
        let input = input.to_string_lossy();
        let mut parts = self.0.split_whitespace().map(|p| p.replace("{input}", &input));
        let mut cmd = Command::new(parts.next()?);
        cmd.args(parts);
        Some(cmd)
    }

    /// Runs the command, streaming its stdout into `out`.
    pub fn run_into(&self, input: &Path, out: &mut File) -> Result<(), AcquireError> {
        let failed = |detail: String| AcquireError::Hook { command: self.0.clone(), detail };
        let mut cmd = self.command(input).ok_or_else(|| failed("empty command template".into()))?;
        let mut child = cmd
            .stdin(Stdio::null())
            .stdout(Stdio::piped())
            .stderr(Stdio::piped())
            .spawn()
            .map_err(|e| failed(format!("spawn failed: {e}")))?;
        let mut stdout = child.stdout.take().expect("piped");
        let mut stderr = child.stderr.take().expect("piped");
        let err_thread = std::thread::spawn(move || {
            let mut s = String::new();
            let _ = stderr.read_to_string(&mut s);
            s
        });
        io::copy(&mut stdout, out).map_err(|e| failed(format!("reading output: {e}")))?;
        let status = child.wait().map_err(|e| failed(e.to_string()))?;
        let stderr = err_thread.join().unwrap_or_default();
        if !status.success() {
            return Err(failed(format!("{status}: {}", stderr.trim())));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct ExternalTools {
    /// Converts RDF/XML, Turtle or N3 into N-Triples, e.g. `rapper -q -o ntriples {input}`.
    pub converter: Option<CommandTemplate>,
    /// Unpacks archives not handled natively, e.g. `unzip -p {input}`.
    pub extractor: Option<CommandTemplate>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AcquireStage {
    Open,
    Decompress,
    Extract,
    Convert,
    Scan,
}

impl fmt::Display for AcquireStage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            AcquireStage::Open => "open",
            AcquireStage::Decompress => "decompress",
            AcquireStage::Extract => "extract",
            AcquireStage::Convert => "convert",
            AcquireStage::Scan => "scan",
        })
    }
}

#[derive(Debug, thiserror::Error)]
pub enum AcquireError {
    #[error("{stage}: {source}")]
    Io { stage: AcquireStage, source: io::Error },
    #[error("decompress: corrupt {kind} data in {path}")]
    Corrupt { kind: &'static str, path: PathBuf },
    #[error("external command `{command}` failed: {detail}")]
    Hook { command: String, detail: String },
    #[error("{stage}: no tool configured for {what}")]
    MissingHook { stage: AcquireStage, what: String },
    #[error("scan: no RDF member found in {0}")]
    NoRdfMember(PathBuf),
    #[error("scan: cannot determine RDF format of {0}")]
    UnknownFormat(PathBuf),
}

impl AcquireError {
    pub fn stage(&self) -> AcquireStage {
        match self {
            AcquireError::Io { stage, .. } | AcquireError::MissingHook { stage, .. } => *stage,
            AcquireError::Corrupt { .. } => AcquireStage::Decompress,
            AcquireError::Hook { .. } => AcquireStage::Convert,
            AcquireError::NoRdfMember(_) | AcquireError::UnknownFormat(_) => AcquireStage::Scan,
        }
    }
}

fn io_at(stage: AcquireStage) -> impl FnOnce(io::Error) -> AcquireError {
    move |source| AcquireError::Io { stage, source }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Compression {
    None,
    Gzip,
    Bzip2,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Layout {
    Single(Compression),
    Tar(Compression),
    Foreign,
}

/// Splits a file name into its layout and the remaining stem's extension.
fn classify(name: &str) -> (Layout, Option<String>) {
    let lower = name.to_ascii_lowercase();
    let mut stem = lower.as_str();
    let mut compression = Compression::None;
    for (suffix, c) in [(".gz", Compression::Gzip), (".gzip", Compression::Gzip), (".bz2", Compression::Bzip2)] {
        if let Some(s) = stem.strip_suffix(suffix) {
            stem = s;
            compression = c;
            break;
        }
    }
    if let Some(s) = stem.strip_suffix(".tgz").or_else(|| stem.strip_suffix(".tbz2")) {
        let c = if lower.ends_with(".tgz") { Compression::Gzip } else { Compression::Bzip2 };
        return (Layout::Tar(c), Path::new(s).extension().map(|e| e.to_string_lossy().into_owned()));
    }
    if stem.ends_with(".tar") {
        return (Layout::Tar(compression), None);
    }
    for foreign in [".zip", ".7z", ".rar", ".xz", ".lzma", ".zst"] {
        if lower.ends_with(foreign) {
            return (Layout::Foreign, None);
        }
    }
    let ext = Path::new(stem).extension().map(|e| e.to_string_lossy().into_owned());
    (Layout::Single(compression), ext)
}

fn open_decompressed(path: &Path, compression: Compression) -> Result<Box<dyn Read + Send>, AcquireError> {
    let mut file = BufReader::new(File::open(path).map_err(io_at(AcquireStage::Open))?);
    let magic: &[u8] = match compression {
        Compression::None => return Ok(Box::new(file)),
        Compression::Gzip => &[0x1f, 0x8b],
        Compression::Bzip2 => b"BZh",
    };
    let head = file.fill_buf().map_err(io_at(AcquireStage::Open))?;
    if !head.starts_with(magic) {
        let kind = if compression == Compression::Gzip { "gzip" } else { "bzip2" };
        return Err(AcquireError::Corrupt { kind, path: path.to_owned() });
    }
    Ok(match compression {
        Compression::Gzip => Box::new(Labeled { inner: flate2::read::MultiGzDecoder::new(file), kind: "gzip" }),
        Compression::Bzip2 => Box::new(Labeled { inner: bzip2::read::MultiBzDecoder::new(file), kind: "bzip2" }),
        Compression::None => unreachable!(),
    })
}

/// Tags errors raised while streaming through a decompressor, which only
/// notices damage once it reaches it.
struct Labeled<R> {
    inner: R,
    kind: &'static str,
}

impl<R: Read> Read for Labeled<R> {
    fn read(&mut self, buf: &mut [u8]) -> io::Result<usize> {
        self.inner
            .read(buf)
            .map_err(|e| io::Error::new(e.kind(), format!("decompress: corrupt {} data: {e}", self.kind)))
    }
}

/// N-Triples stream produced by [`acquire_input`].
pub struct Acquired {
    pub reader: Box<dyn BufRead + Send>,
    pub syntax: Syntax,
    /// RDF files that contributed to the stream.
    pub members: Vec<String>,
    /// Archive members skipped because they are not RDF.
    pub ignored: Vec<String>,
    _scratch: Option<TempDir>,
}

impl fmt::Debug for Acquired {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Acquired")
            .field("syntax", &self.syntax)
            .field("members", &self.members)
            .field("ignored", &self.ignored)
            .finish_non_exhaustive()
    }
}

struct Part {
    path: PathBuf,
    compression: Compression,
    format: RdfFormat,
}

/// Opens `path` and yields an N-Triples/N-Quads stream.
///
/// `hint` overrides the format inferred from a single file's extension; archive
/// members are always classified by their own names.
pub fn acquire_input(path: &Path, hint: Option<RdfFormat>, tools: &ExternalTools) -> Result<Acquired, AcquireError> {
    let name = path.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
    let (layout, ext) = classify(&name);
    let mut scratch: Option<TempDir> = None;
    let mut scratch_dir = || -> Result<PathBuf, AcquireError> {
        if scratch.is_none() {
            scratch = Some(tempfile::tempdir().map_err(io_at(AcquireStage::Extract))?);
        }
        Ok(scratch.as_ref().unwrap().path().to_owned())
    };

    let mut parts = Vec::new();
    let mut ignored = Vec::new();
    match layout {
        Layout::Single(compression) => {
            let format = hint
                .or_else(|| ext.as_deref().and_then(RdfFormat::from_extension))
                .ok_or_else(|| AcquireError::UnknownFormat(path.to_owned()))?;
            parts.push(Part { path: path.to_owned(), compression, format });
        }
        Layout::Tar(compression) => {
            let dir = scratch_dir()?;
            let mut archive = tar::Archive::new(open_decompressed(path, compression)?);
            let corrupt = |_| AcquireError::Corrupt { kind: "tar", path: path.to_owned() };
            for (i, entry) in archive.entries().map_err(corrupt)?.enumerate() {
                let mut entry = entry.map_err(corrupt)?;
                if !entry.header().entry_type().is_file() {
                    continue;
                }
                let member = entry.path().map_err(corrupt)?.to_string_lossy().into_owned();
                let member_name = Path::new(&member).file_name().map(|n| n.to_string_lossy().into_owned());
                let (member_layout, member_ext) = classify(member_name.as_deref().unwrap_or(""));
                let format = member_ext.as_deref().and_then(RdfFormat::from_extension);
                match (member_layout, format) {
                    (Layout::Single(c), Some(format)) => {
                        let dest = dir.join(format!("member-{i}"));
                        let mut out = File::create(&dest).map_err(io_at(AcquireStage::Extract))?;
                        io::copy(&mut entry, &mut out).map_err(corrupt)?;
                        parts.push(Part { path: dest, compression: c, format });
                    }
                    _ => ignored.push(member),
                }
            }
        }
        Layout::Foreign => {
            let hook = tools.extractor.as_ref().ok_or_else(|| AcquireError::MissingHook {
                stage: AcquireStage::Extract,
                what: name.clone(),
            })?;
            let dest = scratch_dir()?.join("extracted.nt");
            let mut out = File::create(&dest).map_err(io_at(AcquireStage::Extract))?;
            hook.run_into(path, &mut out)?;
            parts.push(Part { path: dest, compression: Compression::None, format: RdfFormat::NTriples });
        }
    }

    if parts.is_empty() {
        return Err(AcquireError::NoRdfMember(path.to_owned()));
    }

    let mut syntax = Syntax::NTriples;
    let mut members = Vec::with_capacity(parts.len());
    let mut readers: Vec<Box<dyn Read + Send>> = Vec::with_capacity(parts.len() * 2);
    for (i, part) in parts.into_iter().enumerate() {
        members.push(part.path.to_string_lossy().into_owned());
        if part.format.syntax() == Syntax::NQuads {
            syntax = Syntax::NQuads;
        }
        let reader: Box<dyn Read + Send> = if part.format.is_native() {
            open_decompressed(&part.path, part.compression)?
        } else {
            let hook = tools.converter.as_ref().ok_or_else(|| AcquireError::MissingHook {
                stage: AcquireStage::Convert,
                what: format!("{:?} input", part.format),
            })?;
            let dir = scratch_dir()?;
            let source = if part.compression == Compression::None {
                part.path
            } else {
                let raw = dir.join(format!("raw-{i}"));
                let mut out = File::create(&raw).map_err(io_at(AcquireStage::Decompress))?;
                io::copy(&mut open_decompressed(&part.path, part.compression)?, &mut out)
                    .map_err(io_at(AcquireStage::Decompress))?;
                raw
            };
            let converted = dir.join(format!("converted-{i}.nt"));
            let mut out = File::create(&converted).map_err(io_at(AcquireStage::Convert))?;
            hook.run_into(&source, &mut out)?;
            out.flush().map_err(io_at(AcquireStage::Convert))?;
            Box::new(File::open(&converted).map_err(io_at(AcquireStage::Convert))?)
        };
        if !readers.is_empty() {
            // Keep a missing final newline in one member from gluing lines together.
            readers.push(Box::new(io::Cursor::new(b"\n")));
        }
        readers.push(reader);
    }
    let chained = readers
        .into_iter()
        .reduce(|a, b| Box::new(a.chain(b)))
        .expect("at least one part");
    Ok(Acquired {
        reader: Box::new(BufReader::with_capacity(1 << 20, chained)),
        syntax,
        members,
        ignored,
        _scratch: scratch,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    const NT: &str = "<http://a> <http://p> <http://b> .\n<http://b> <http://p> \"x\" .\n";

    fn read_all(mut a: Acquired) -> String {
        let mut s = String::new();
        a.reader.read_to_string(&mut s).unwrap();
        s
    }

    fn gz(data: &[u8]) -> Vec<u8> {
        let mut e = flate2::write::GzEncoder::new(Vec::new(), flate2::Compression::default());
        e.write_all(data).unwrap();
        e.finish().unwrap()
    }

    #[test]
    fn classify_names() {
        assert_eq!(classify("x.nt"), (Layout::Single(Compression::None), Some("nt".into())));
        assert_eq!(classify("x.nt.gz"), (Layout::Single(Compression::Gzip), Some("nt".into())));
        assert_eq!(classify("x.ttl.bz2"), (Layout::Single(Compression::Bzip2), Some("ttl".into())));
        assert_eq!(classify("dump.tar.gz").0, Layout::Tar(Compression::Gzip));
        assert_eq!(classify("dump.tgz").0, Layout::Tar(Compression::Gzip));
        assert_eq!(classify("dump.tar").0, Layout::Tar(Compression::None));
        assert_eq!(classify("dump.zip").0, Layout::Foreign);
    }

    #[test]
    fn plain_and_gzip_are_identical() {
        let dir = tempfile::tempdir().unwrap();
        let plain = dir.path().join("d.nt");
        std::fs::write(&plain, NT).unwrap();
        let packed = dir.path().join("d.nt.gz");
        std::fs::write(&packed, gz(NT.as_bytes())).unwrap();
        let tools = ExternalTools::default();
        assert_eq!(read_all(acquire_input(&plain, None, &tools).unwrap()), NT);
        assert_eq!(read_all(acquire_input(&packed, None, &tools).unwrap()), NT);
    }

    #[test]
    fn bzip2_stream() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("d.nt.bz2");
        let mut e = bzip2::write::BzEncoder::new(Vec::new(), bzip2::Compression::default());
        e.write_all(NT.as_bytes()).unwrap();
        std::fs::write(&path, e.finish().unwrap()).unwrap();
        assert_eq!(read_all(acquire_input(&path, None, &ExternalTools::default()).unwrap()), NT);
    }

    #[test]
    fn corrupt_gzip_is_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("d.nt.gz");
        std::fs::write(&path, b"definitely not gzip").unwrap();
        let err = acquire_input(&path, None, &ExternalTools::default()).unwrap_err();
        assert_eq!(err.stage(), AcquireStage::Decompress);
    }

    #[test]
    fn truncated_gzip_fails_while_streaming() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("d.nt.gz");
        let mut e = flate2::write::GzEncoder::new(Vec::new(), flate2::Compression::default());
        e.write_all(NT.as_bytes()).unwrap();
        let bytes = e.finish().unwrap();
        std::fs::write(&path, &bytes[..bytes.len() / 2]).unwrap();
        let mut acquired = acquire_input(&path, None, &ExternalTools::default()).unwrap();
        let err = io::copy(&mut acquired.reader, &mut io::sink()).unwrap_err();
        assert!(err.to_string().starts_with("decompress: corrupt gzip data"), "{err}");
    }

    #[test]
    fn tar_members_filtered() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bundle.tar.gz");
        let mut builder = tar::Builder::new(Vec::new());
        for (name, body) in [("data/readme.txt", "not rdf"), ("data/part.nt", NT)] {
            let mut h = tar::Header::new_gnu();
            h.set_size(body.len() as u64);
            h.set_mode(0o644);
            h.set_cksum();
            builder.append_data(&mut h, name, body.as_bytes()).unwrap();
        }
        std::fs::write(&path, gz(&builder.into_inner().unwrap())).unwrap();
        let a = acquire_input(&path, None, &ExternalTools::default()).unwrap();
        assert_eq!(a.ignored, vec!["data/readme.txt".to_string()]);
        assert_eq!(a.members.len(), 1);
        assert_eq!(read_all(a), NT);
    }

    #[test]
    fn tar_without_rdf() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bundle.tar");
        let mut builder = tar::Builder::new(Vec::new());
        let mut h = tar::Header::new_gnu();
        h.set_size(3);
        h.set_cksum();
        builder.append_data(&mut h, "a.xls", &b"abc"[..]).unwrap();
        std::fs::write(&path, builder.into_inner().unwrap()).unwrap();
        let err = acquire_input(&path, None, &ExternalTools::default()).unwrap_err();
        assert!(matches!(err, AcquireError::NoRdfMember(_)));
    }

    #[test]
    fn converter_hook() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("d.ttl");
        std::fs::write(&path, NT).unwrap();
        let none = acquire_input(&path, None, &ExternalTools::default()).unwrap_err();
        assert!(matches!(none, AcquireError::MissingHook { stage: AcquireStage::Convert, .. }));

        let tools = ExternalTools { converter: Some(CommandTemplate::new("cat {input}")), extractor: None };
        assert_eq!(read_all(acquire_input(&path, None, &tools).unwrap()), NT);

        let failing = ExternalTools { converter: Some(CommandTemplate::new("false {input}")), extractor: None };
        let err = acquire_input(&path, None, &failing).unwrap_err();
        assert_eq!(err.stage(), AcquireStage::Convert);
    }

    #[test]
    fn hint_overrides_extension() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("download");
        std::fs::write(&path, NT).unwrap();
        assert!(matches!(
            acquire_input(&path, None, &ExternalTools::default()),
            Err(AcquireError::UnknownFormat(_))
        ));
        let a = acquire_input(&path, Some(RdfFormat::NTriples), &ExternalTools::default()).unwrap();
        assert_eq!(read_all(a), NT);
    }

    #[test]
    fn format_hints() {
        assert_eq!(RdfFormat::from_hint("application/rdf+xml"), Some(RdfFormat::RdfXml));
        assert_eq!(RdfFormat::from_hint("NT"), Some(RdfFormat::NTriples));
        assert_eq!(RdfFormat::from_hint("n-quads"), Some(RdfFormat::NQuads));
        assert_eq!(RdfFormat::from_hint("csv"), None);
    }
}
