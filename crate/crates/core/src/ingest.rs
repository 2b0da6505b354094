//! Hash-encoded edgelist preparation and the reverse term dictionary.
//!
//! Each statement `s p o` becomes one edgelist line `h(s) h(o) h(p)`.
//! Every distinct term is appended once to the dictionary sink as
//! `hash<TAB>surface`, in order of first appearance.

use std::collections::hash_map::Entry;
use std::collections::HashMap;
use std::fs::File;
use std::io::{self, BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::hash::{TermHash, TermHasher};
use crate::ntriples::{NTriplesReader, ParseStats, Syntax, TermRef, TripleRef};

#[derive(Debug, thiserror::Error)]
pub enum IngestError {
    #[error("I/O error during ingestion: {0}")]
    Io(#[from] io::Error),
    #[error("hash collision on {hash}: {first:?} and {second:?}")]
    HashCollision { hash: TermHash, first: String, second: String },
}

#[derive(Debug, thiserror::Error)]
pub enum DictionaryError {
    #[error("I/O error reading dictionary: {0}")]
    Io(#[from] io::Error),
    #[error("dictionary line {line}: {reason}")]
    Malformed { line: u64, reason: String },
    #[error("hash {0} not found in dictionary")]
    NotFound(TermHash),
}

/// One edge: subject → object, labelled with the predicate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct EdgeListRecord {
    pub source: TermHash,
    pub target: TermHash,
    pub attribute: TermHash,
}

impl EdgeListRecord {
    pub const LINE_LEN: usize = 51;

    pub fn to_line(&self) -> [u8; Self::LINE_LEN] {
        let mut line = [b' '; Self::LINE_LEN];
        let mut field = [0u8; 16];
        for (i, h) in [self.source, self.target, self.attribute].into_iter().enumerate() {
            h.write_hex(&mut field);
            line[i * 17..i * 17 + 16].copy_from_slice(&field);
        }
        line[50] = b'\n';
        line
    }

    /// Parses `src tgt attr` with single-space separators; surrounding
    /// whitespace and a trailing newline are tolerated.
    pub fn parse(line: &[u8]) -> Option<EdgeListRecord> {
        let line = line.trim_ascii();
        if line.len() != Self::LINE_LEN - 1 || line[16] != b' ' || line[33] != b' ' {
            return None;
        }
        Some(EdgeListRecord {
            source: TermHash::from_hex(&line[0..16])?,
            target: TermHash::from_hex(&line[17..33])?,
            attribute: TermHash::from_hex(&line[34..50])?,
        })
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct IngestStats {
    pub triples: u64,
    pub distinct_terms: u64,
    pub parse: ParseStats,
}

/// Streams triples into an edgelist sink and a dictionary sink.
pub struct EdgeListWriter<E: Write, D: Write> {
    hasher: TermHasher,
    edges: E,
    dictionary: D,
    seen: HashMap<TermHash, Box<str>>,
    triples: u64,
}

impl<E: Write, D: Write> EdgeListWriter<E, D> {
    pub fn new(hasher: TermHasher, edges: E, dictionary: D) -> Self {
        EdgeListWriter { hasher, edges, dictionary, seen: HashMap::new(), triples: 0 }
    }

    fn term(&mut self, term: TermRef<'_>) -> Result<TermHash, IngestError> {
        let hash = self.hasher.hash(term.surface);
        match self.seen.entry(hash) {
            Entry::Occupied(e) => {
                if &**e.get() != term.surface {
                    return Err(IngestError::HashCollision {
                        hash,
                        first: e.get().to_string(),
                        second: term.surface.to_owned(),
                    });
                }
            }
            Entry::Vacant(e) => {
                writeln!(self.dictionary, "{hash}\t{}", term.surface)?;
                e.insert(term.surface.into());
            }
        }
        Ok(hash)
    }

    pub fn push(&mut self, triple: TripleRef<'_>) -> Result<EdgeListRecord, IngestError> {
        let record = EdgeListRecord {
            source: self.term(triple.subject)?,
            target: self.term(triple.object)?,
            attribute: self.term(triple.predicate)?,
        };
        self.edges.write_all(&record.to_line())?;
        self.triples += 1;
        Ok(record)
    }

    pub fn finish(mut self) -> Result<(u64, u64), IngestError> {
        self.edges.flush()?;
        self.dictionary.flush()?;
        Ok((self.triples, self.seen.len() as u64))
    }
}

/// Parses an N-Triples (or N-Quads) stream and writes edgelist and dictionary.
pub fn triples_to_edgelist<R: BufRead, E: Write, D: Write>(
    input: R,
    syntax: Syntax,
    hasher: TermHasher,
    edges: E,
    dictionary: D,
) -> Result<IngestStats, IngestError> {
    let mut reader = NTriplesReader::with_syntax(input, syntax);
    let mut writer = EdgeListWriter::new(hasher, edges, dictionary);
    while let Some(t) = reader.next_ref()? {
        writer.push(t)?;
    }
    let (triples, distinct_terms) = writer.finish()?;
    Ok(IngestStats { triples, distinct_terms, parse: reader.stats() })
}

/// File-to-file convenience wrapper around [`triples_to_edgelist`].
pub fn prepare_files<R: BufRead>(
    input: R,
    syntax: Syntax,
    hasher: TermHasher,
    edgelist_path: &Path,
    dictionary_path: &Path,
) -> Result<IngestStats, IngestError> {
    let edges = BufWriter::with_capacity(1 << 20, File::create(edgelist_path)?);
    let dict = BufWriter::with_capacity(1 << 20, File::create(dictionary_path)?);
    triples_to_edgelist(input, syntax, hasher, edges, dict)
}

/// In-memory reverse map from term hash to surface string.
#[derive(Debug, Clone, Default)]
pub struct TermDictionary {
    entries: HashMap<TermHash, String>,
}

impl TermDictionary {
    pub fn read_tsv<R: BufRead>(reader: R) -> Result<TermDictionary, DictionaryError> {
        let mut entries = HashMap::new();
        for (i, line) in reader.lines().enumerate() {
            let line = line?;
            let line_no = i as u64 + 1;
            if line.is_empty() {
                continue;
            }
            let malformed = |reason: &str| DictionaryError::Malformed { line: line_no, reason: reason.into() };
            let (hash, term) = line.split_once('\t').ok_or_else(|| malformed("missing tab"))?;
            let hash: TermHash = hash.parse().map_err(|_| malformed("bad hash field"))?;
            if let Some(prev) = entries.insert(hash, term.to_owned()) {
                if prev != term {
                    return Err(malformed("conflicting entries for one hash"));
                }
            }
        }
        Ok(TermDictionary { entries })
    }

    pub fn load(path: &Path) -> Result<TermDictionary, DictionaryError> {
        Self::read_tsv(BufReader::new(File::open(path)?))
    }

    pub fn resolve(&self, hash: TermHash) -> Result<&str, DictionaryError> {
        self.entries.get(&hash).map(String::as_str).ok_or(DictionaryError::NotFound(hash))
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn contains(&self, hash: TermHash) -> bool {
        self.entries.contains_key(&hash)
    }

    pub fn hashes(&self) -> impl Iterator<Item = TermHash> + '_ {
        self.entries.keys().copied()
    }
}

/// Looks up a single hash by scanning a dictionary file, without loading it.
pub fn resolve_hash(dictionary_path: &Path, hash: TermHash) -> Result<String, DictionaryError> {
    let reader = BufReader::new(File::open(dictionary_path)?);
    let key = hash.to_string();
    for line in reader.lines() {
        let line = line?;
        if let Some((h, term)) = line.split_once('\t') {
            if h == key {
                return Ok(term.to_owned());
            }
        }
    }
    Err(DictionaryError::NotFound(hash))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hash::hash_term;
    use std::collections::HashSet;

    const ROMA: &str = "<http://data.linkedopendata.it/musei/resource/Roma> \
                        <http://www.w3.org/2000/01/rdf-schema#label> \"Roma\" .\n";

    fn ingest(input: &str) -> (String, String, IngestStats) {
        let mut edges = Vec::new();
        let mut dict = Vec::new();
        let stats = triples_to_edgelist(input.as_bytes(), Syntax::NTriples, TermHasher::default(), &mut edges, &mut dict)
            .unwrap();
        (String::from_utf8(edges).unwrap(), String::from_utf8(dict).unwrap(), stats)
    }

    #[test]
    fn roma_listing_line() {
        let (edges, dict, stats) = ingest(ROMA);
        assert_eq!(edges, "43f2f4f2e41ae099 c9643559faeed68e 02325f53aeba2f02\n");
        assert_eq!(stats.triples, 1);
        assert_eq!(stats.distinct_terms, 3);
        let d = TermDictionary::read_tsv(dict.as_bytes()).unwrap();
        assert_eq!(
            d.resolve("02325f53aeba2f02".parse().unwrap()).unwrap(),
            "<http://www.w3.org/2000/01/rdf-schema#label>"
        );
    }

    #[test]
    fn parallel_predicates_share_endpoints() {
        let (edges, _, stats) = ingest("<http://s> <http://p1> <http://o> .\n<http://s> <http://p2> <http://o> .\n");
        let lines: Vec<EdgeListRecord> = edges.lines().map(|l| EdgeListRecord::parse(l.as_bytes()).unwrap()).collect();
        assert_eq!(lines.len(), 2);
        assert_eq!(lines[0].source, lines[1].source);
        assert_eq!(lines[0].target, lines[1].target);
        assert_ne!(lines[0].attribute, lines[1].attribute);
        assert_eq!(stats.distinct_terms, 4);
    }

    #[test]
    fn duplicates_preserved_and_empty_input() {
        let line = "<http://s> <http://p> <http://o> .\n";
        let (edges, dict, _) = ingest(&line.repeat(3));
        assert_eq!(edges.lines().count(), 3);
        assert_eq!(dict.lines().count(), 3);
        let (edges, dict, stats) = ingest("");
        assert!(edges.is_empty() && dict.is_empty());
        assert_eq!(stats, IngestStats::default());
    }

    #[test]
    fn resolve_round_trip_and_not_found() {
        let (_, dict, _) = ingest("<http://a> <http://p> \"x\"@en .\n");
        let d = TermDictionary::read_tsv(dict.as_bytes()).unwrap();
        assert_eq!(d.resolve(hash_term("<http://a>")).unwrap(), "<http://a>");
        assert_eq!(d.resolve(hash_term("\"x\"@en")).unwrap(), "\"x\"@en");
        assert!(matches!(d.resolve(hash_term("<http://never>")), Err(DictionaryError::NotFound(_))));
    }

    #[test]
    fn collision_detected() {
        let mut w = EdgeListWriter::new(TermHasher::default(), io::sink(), io::sink());
        // Plant a different string under the hash of `<http://a>`.
        w.seen.insert(hash_term("<http://a>"), "<http://impostor>".into());
        let line = "<http://a> <http://p> <http://b> .";
        let crate::ntriples::Line::Statement(t) = crate::ntriples::parse_line(line, Syntax::NTriples) else {
            panic!()
        };
        assert!(matches!(w.push(t), Err(IngestError::HashCollision { .. })));
    }

    #[test]
    fn dictionary_completeness() {
        let input = "_:b <http://p> <http://o> .\n<http://o> <http://q> \"lit\" .\n<http://o> <http://p> _:b .\n";
        let (edges, dict, _) = ingest(input);
        let d = TermDictionary::read_tsv(dict.as_bytes()).unwrap();
        let mut in_edges = HashSet::new();
        for l in edges.lines() {
            let r = EdgeListRecord::parse(l.as_bytes()).unwrap();
            in_edges.extend([r.source, r.target, r.attribute]);
        }
        let keys: HashSet<_> = d.hashes().collect();
        assert_eq!(in_edges, keys);
    }

    #[test]
    fn record_parse_rejects_garbage() {
        assert!(EdgeListRecord::parse(b"0000000000000001 0000000000000002").is_none());
        assert!(EdgeListRecord::parse(b"000000000000000g 0000000000000002 0000000000000003").is_none());
        assert!(EdgeListRecord::parse(b"0000000000000001  000000000000002 0000000000000003").is_none());
        let r = EdgeListRecord::parse(b"0000000000000001 0000000000000002 0000000000000003\r\n").unwrap();
        assert_eq!(r.attribute, TermHash(3));
    }
}
