//! Line-oriented N-Triples / N-Quads parsing.
//!
//! Terms are kept in their surface form (delimiters and escapes included)
//! because that is exactly the byte string that gets hashed. Validation is
//! limited to line well-formedness: malformed lines are counted and skipped.

use std::fmt;
use std::io::{self, BufRead};

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum TermKind {
    Iri,
    BlankNode,
    Literal,
}

/// A term borrowed from an input line.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct TermRef<'a> {
    pub kind: TermKind,
    pub surface: &'a str,
}

impl TermRef<'_> {
    pub fn to_owned(self) -> Term {
        Term { kind: self.kind, surface: self.surface.to_owned() }
    }
}

/// An RDF term in N-Triples surface syntax.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Term {
    kind: TermKind,
    surface: String,
}

impl Term {
    pub fn iri(iri: &str) -> Term {
        Term { kind: TermKind::Iri, surface: format!("<{iri}>") }
    }

    pub fn blank(label: &str) -> Term {
        Term { kind: TermKind::BlankNode, surface: format!("_:{label}") }
    }

    /// A plain literal; `lexical` must already be N-Triples escaped.
    pub fn literal(lexical: &str) -> Term {
        Term { kind: TermKind::Literal, surface: format!("\"{lexical}\"") }
    }

    pub fn lang_literal(lexical: &str, lang: &str) -> Term {
        Term { kind: TermKind::Literal, surface: format!("\"{lexical}\"@{lang}") }
    }

    pub fn typed_literal(lexical: &str, datatype: &str) -> Term {
        Term { kind: TermKind::Literal, surface: format!("\"{lexical}\"^^<{datatype}>") }
    }

    /// Parses a single term from its surface form.
    pub fn parse(surface: &str) -> Option<Term> {
        let mut cur = Cursor::new(surface);
        let t = cur.term()?;
        cur.skip_ws();
        cur.at_end().then(|| t.to_owned())
    }

    pub fn kind(&self) -> TermKind {
        self.kind
    }

    pub fn surface(&self) -> &str {
        &self.surface
    }

    pub fn as_ref(&self) -> TermRef<'_> {
        TermRef { kind: self.kind, surface: &self.surface }
    }

    pub fn is_literal(&self) -> bool {
        self.kind == TermKind::Literal
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.surface)
    }
}

/// One RDF statement. Subject and predicate are never literals.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Triple {
    pub subject: Term,
    pub predicate: Term,
    pub object: Term,
}

impl fmt::Display for Triple {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {} {} .", self.subject, self.predicate, self.object)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TripleRef<'a> {
    pub subject: TermRef<'a>,
    pub predicate: TermRef<'a>,
    pub object: TermRef<'a>,
}

impl TripleRef<'_> {
    pub fn to_owned(self) -> Triple {
        Triple {
            subject: self.subject.to_owned(),
            predicate: self.predicate.to_owned(),
            object: self.object.to_owned(),
        }
    }
}

/// Whether a fourth (graph label) term is accepted and dropped.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Syntax {
    #[default]
    NTriples,
    NQuads,
}

/// Outcome of classifying one input line.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Line<'a> {
    Statement(TripleRef<'a>),
    /// Comment-only or whitespace-only line.
    Skipped,
    Malformed,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ParseStats {
    pub valid: u64,
    pub skipped: u64,
    pub malformed: u64,
}

impl ParseStats {
    pub fn lines(&self) -> u64 {
        self.valid + self.skipped + self.malformed
    }
}

pub fn parse_line(line: &str, syntax: Syntax) -> Line<'_> {
    let mut cur = Cursor::new(line);
    cur.skip_ws();
    if cur.at_end() || cur.peek() == Some(b'#') {
        return Line::Skipped;
    }
    match statement(&mut cur, syntax) {
        Some(t) => Line::Statement(t),
        None => Line::Malformed,
    }
}

fn statement<'a>(cur: &mut Cursor<'a>, syntax: Syntax) -> Option<TripleRef<'a>> {
    let subject = cur.term()?;
    if subject.kind == TermKind::Literal {
        return None;
    }
    cur.require_ws()?;
    let predicate = cur.term()?;
    if predicate.kind != TermKind::Iri {
        return None;
    }
    cur.require_ws()?;
    let object = cur.term()?;
    cur.skip_ws();
    if syntax == Syntax::NQuads && cur.peek() != Some(b'.') {
        let graph = cur.term()?;
        if graph.kind == TermKind::Literal {
            return None;
        }
        cur.skip_ws();
    }
    if cur.bump() != Some(b'.') {
        return None;
    }
    cur.skip_ws();
    if !(cur.at_end() || cur.peek() == Some(b'#')) {
        return None;
    }
    Some(TripleRef { subject, predicate, object })
}

struct Cursor<'a> {
    src: &'a str,
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn new(src: &'a str) -> Self {
        Cursor { src, pos: 0 }
    }

    fn bytes(&self) -> &'a [u8] {
        self.src.as_bytes()
    }

    fn peek(&self) -> Option<u8> {
        self.bytes().get(self.pos).copied()
    }

    fn bump(&mut self) -> Option<u8> {
        let b = self.peek()?;
        self.pos += 1;
        Some(b)
    }

    fn at_end(&self) -> bool {
        self.pos >= self.src.len()
    }

    fn skip_ws(&mut self) {
        while matches!(self.peek(), Some(b' ' | b'\t' | b'\r' | b'\n')) {
            self.pos += 1;
        }
    }

    fn require_ws(&mut self) -> Option<()> {
        let start = self.pos;
        self.skip_ws();
        (self.pos > start).then_some(())
    }

    fn term(&mut self) -> Option<TermRef<'a>> {
        let start = self.pos;
        let kind = match self.peek()? {
            b'<' => {
                self.iri()?;
                TermKind::Iri
            }
            b'_' => {
                self.blank()?;
                TermKind::BlankNode
            }
            b'"' => {
                self.literal()?;
                TermKind::Literal
            }
            _ => return None,
        };
        Some(TermRef { kind, surface: &self.src[start..self.pos] })
    }

    fn iri(&mut self) -> Option<()> {
        self.bump(); // '<'
        let start = self.pos;
        loop {
            match self.bump()? {
                b'>' => break,
                b' ' | b'\t' | b'\r' | b'\n' | b'<' | b'"' => return None,
                _ => {}
            }
        }
        (self.pos - start > 1).then_some(())
    }

    fn blank(&mut self) -> Option<()> {
        self.bump(); // '_'
        if self.bump()? != b':' {
            return None;
        }
        let start = self.pos;
        while let Some(b) = self.peek() {
            if b.is_ascii_whitespace() || b == b'<' || b == b'"' {
                break;
            }
            self.pos += 1;
        }
        // A trailing '.' belongs to the statement terminator.
        while self.pos > start && self.bytes()[self.pos - 1] == b'.' {
            self.pos -= 1;
        }
        (self.pos > start).then_some(())
    }

    fn literal(&mut self) -> Option<()> {
        self.bump(); // '"'
        loop {
            match self.bump()? {
                b'"' => break,
                b'\\' => {
                    self.bump()?;
                }
                b'\n' | b'\r' => return None,
                _ => {}
            }
        }
        match self.peek() {
            Some(b'@') => {
                self.pos += 1;
                let start = self.pos;
                while matches!(self.peek(), Some(b) if b.is_ascii_alphanumeric() || b == b'-') {
                    self.pos += 1;
                }
                let tag = &self.src[start..self.pos];
                let ok = !tag.is_empty()
                    && tag.as_bytes()[0].is_ascii_alphabetic()
                    && !tag.ends_with('-');
                ok.then_some(())
            }
            Some(b'^') => {
                self.pos += 1;
                if self.bump()? != b'^' || self.peek()? != b'<' {
                    return None;
                }
                self.iri()
            }
            _ => Some(()),
        }
    }
}

/// Streaming reader over a line-oriented byte source.
///
/// Invalid UTF-8 is treated as a malformed line; I/O failures are returned.
pub struct NTriplesReader<R> {
    reader: R,
    buf: Vec<u8>,
    syntax: Syntax,
    stats: ParseStats,
}

impl<R: BufRead> NTriplesReader<R> {
    pub fn new(reader: R) -> Self {
        Self::with_syntax(reader, Syntax::NTriples)
    }

    pub fn with_syntax(reader: R, syntax: Syntax) -> Self {
        NTriplesReader { reader, buf: Vec::with_capacity(256), syntax, stats: ParseStats::default() }
    }

    pub fn stats(&self) -> ParseStats {
        self.stats
    }

    /// Returns the next statement borrowed from the internal line buffer.
    pub fn next_ref(&mut self) -> io::Result<Option<TripleRef<'_>>> {
        let spans = loop {
            self.buf.clear();
            if self.reader.read_until(b'\n', &mut self.buf)? == 0 {
                return Ok(None);
            }
            let Ok(line) = std::str::from_utf8(&self.buf) else {
                self.stats.malformed += 1;
                continue;
            };
            match parse_line(line, self.syntax) {
                Line::Statement(t) => {
                    self.stats.valid += 1;
                    let span = |term: TermRef<'_>| {
                        let start = term.surface.as_ptr() as usize - line.as_ptr() as usize;
                        (term.kind, start..start + term.surface.len())
                    };
                    break [span(t.subject), span(t.predicate), span(t.object)];
                }
                Line::Skipped => self.stats.skipped += 1,
                Line::Malformed => self.stats.malformed += 1,
            }
        };
        let line = std::str::from_utf8(&self.buf).expect("validated above");
        let [s, p, o] = spans.map(|(kind, range)| TermRef { kind, surface: &line[range] });
        Ok(Some(TripleRef { subject: s, predicate: p, object: o }))
    }
}

impl<R: BufRead> Iterator for NTriplesReader<R> {
    type Item = io::Result<Triple>;

    fn next(&mut self) -> Option<Self::Item> {
        self.next_ref().map(|t| t.map(TripleRef::to_owned)).transpose()
    }
}

/// Parses a whole stream into owned triples.
pub fn parse_ntriples<R: BufRead>(reader: R) -> io::Result<(Vec<Triple>, ParseStats)> {
    let mut r = NTriplesReader::new(reader);
    let triples = r.by_ref().collect::<io::Result<Vec<_>>>()?;
    Ok((triples, r.stats()))
}
