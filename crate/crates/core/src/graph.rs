//! Immutable directed multigraph over hashed RDF terms.
//!
//! Edges keep their edgelist order and carry the predicate hash. Out- and
//! in-adjacency are both stored in compressed sparse row form; the neighbour
//! lists hold edge ids, so parallel edges and self-loops are preserved.

use std::collections::HashMap;
use std::fs::File;
use std::io::{self, BufRead, BufReader};
use std::path::Path;

use crate::hash::TermHash;
use crate::ingest::EdgeListRecord;

pub type VertexId = u32;

#[derive(Debug, thiserror::Error)]
pub enum GraphError {
    #[error("I/O error: {0}")]
    Io(#[from] io::Error),
    #[error("edgelist line {line}: malformed record")]
    MalformedLine { line: u64 },
    #[error("graph too large: more than {} vertices", u32::MAX)]
    TooManyVertices,
    #[error("not a graph file (bad magic)")]
    BadMagic,
    #[error("unsupported graph file version {found} (expected {expected})")]
    VersionMismatch { found: u64, expected: u64 },
    #[error("graph file truncated or corrupt: {0}")]
    Corrupt(String),
}

#[derive(Debug, Clone, PartialEq, Eq)]
struct Csr {
    offsets: Vec<usize>,
    edges: Vec<u32>,
}

impl Csr {
    /// Stable counting sort of edge ids by `key`.
    fn build(n: usize, keys: &[VertexId]) -> Csr {
        let mut offsets = vec![0usize; n + 1];
        for &k in keys {
            offsets[k as usize + 1] += 1;
        }
        for i in 0..n {
            offsets[i + 1] += offsets[i];
        }
        let mut cursor = offsets.clone();
        let mut edges = vec![0u32; keys.len()];
        for (e, &k) in keys.iter().enumerate() {
            let slot = &mut cursor[k as usize];
            edges[*slot] = e as u32;
            *slot += 1;
        }
        Csr { offsets, edges }
    }

    fn row(&self, v: VertexId) -> &[u32] {
        let v = v as usize;
        &self.edges[self.offsets[v]..self.offsets[v + 1]]
    }

    fn len(&self, v: VertexId) -> usize {
        let v = v as usize;
        self.offsets[v + 1] - self.offsets[v]
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Graph {
    vertex_hashes: Vec<TermHash>,
    sources: Vec<VertexId>,
    targets: Vec<VertexId>,
    attributes: Vec<TermHash>,
    out: Csr,
    inc: Csr,
}

impl Graph {
    /// Builds the graph from parallel edge arrays. Vertex ids must be `< n`.
    pub fn from_parts(
        vertex_hashes: Vec<TermHash>,
        sources: Vec<VertexId>,
        targets: Vec<VertexId>,
        attributes: Vec<TermHash>,
    ) -> Graph {
        assert_eq!(sources.len(), targets.len());
        assert_eq!(sources.len(), attributes.len());
        assert!(sources.len() <= u32::MAX as usize, "edge ids are 32-bit");
        let n = vertex_hashes.len();
        let out = Csr::build(n, &sources);
        let inc = Csr::build(n, &targets);
        Graph { vertex_hashes, sources, targets, attributes, out, inc }
    }

    /// Builds a graph from plain `(source, target)` index pairs, with a zero
    /// attribute and synthetic vertex hashes equal to the index.
    pub fn from_edges(n: usize, edges: &[(VertexId, VertexId)]) -> Graph {
        let hashes = (0..n as u64).map(TermHash).collect();
        let (s, t) = edges.iter().copied().unzip();
        Graph::from_parts(hashes, s, t, vec![TermHash(0); edges.len()])
    }

    pub fn from_records<I: IntoIterator<Item = EdgeListRecord>>(records: I) -> Result<Graph, GraphError> {
        let mut builder = GraphBuilder::default();
        for r in records {
            builder.push(r)?;
        }
        Ok(builder.finish())
    }

    /// Reads an edgelist; vertices are numbered by first appearance.
    pub fn read_edgelist<R: BufRead>(mut reader: R) -> Result<Graph, GraphError> {
        let mut builder = GraphBuilder::default();
        let mut line = Vec::with_capacity(64);
        let mut line_no = 0u64;
        loop {
            line.clear();
            if reader.read_until(b'\n', &mut line)? == 0 {
                break;
            }
            line_no += 1;
            if line.trim_ascii().is_empty() {
                continue;
            }
            let record = EdgeListRecord::parse(&line).ok_or(GraphError::MalformedLine { line: line_no })?;
            builder.push(record)?;
        }
        Ok(builder.finish())
    }

    pub fn load_edgelist(path: &Path) -> Result<Graph, GraphError> {
        Self::read_edgelist(BufReader::with_capacity(1 << 20, File::open(path)?))
    }

    pub fn vertex_count(&self) -> usize {
        self.vertex_hashes.len()
    }

    pub fn edge_count(&self) -> usize {
        self.sources.len()
    }

    pub fn vertex_hash(&self, v: VertexId) -> TermHash {
        self.vertex_hashes[v as usize]
    }

    pub fn vertex_hashes(&self) -> &[TermHash] {
        &self.vertex_hashes
    }

    pub fn sources(&self) -> &[VertexId] {
        &self.sources
    }

    pub fn targets(&self) -> &[VertexId] {
        &self.targets
    }

    pub fn attributes(&self) -> &[TermHash] {
        &self.attributes
    }

    pub fn edge(&self, e: u32) -> (VertexId, VertexId) {
        (self.sources[e as usize], self.targets[e as usize])
    }

    pub fn vertices(&self) -> impl Iterator<Item = VertexId> {
        0..self.vertex_count() as VertexId
    }

    pub fn out_degree(&self, v: VertexId) -> usize {
        self.out.len(v)
    }

    pub fn in_degree(&self, v: VertexId) -> usize {
        self.inc.len(v)
    }

    /// In plus out; a self-loop counts twice.
    pub fn degree(&self, v: VertexId) -> usize {
        self.out.len(v) + self.inc.len(v)
    }

    /// Ids of edges leaving `v`, in edgelist order.
    pub fn out_edges(&self, v: VertexId) -> &[u32] {
        self.out.row(v)
    }

    /// Ids of edges entering `v`, in edgelist order.
    pub fn in_edges(&self, v: VertexId) -> &[u32] {
        self.inc.row(v)
    }

    pub fn out_neighbors(&self, v: VertexId) -> impl Iterator<Item = VertexId> + '_ {
        self.out.row(v).iter().map(|&e| self.targets[e as usize])
    }

    pub fn in_neighbors(&self, v: VertexId) -> impl Iterator<Item = VertexId> + '_ {
        self.inc.row(v).iter().map(|&e| self.sources[e as usize])
    }

    /// Neighbours in the undirected view (with multiplicity).
    pub fn neighbors(&self, v: VertexId) -> impl Iterator<Item = VertexId> + '_ {
        self.out_neighbors(v).chain(self.in_neighbors(v))
    }

    pub fn vertex_of(&self, hash: TermHash) -> Option<VertexId> {
        self.vertex_hashes.iter().position(|&h| h == hash).map(|i| i as VertexId)
    }
}

/// Incremental edgelist → graph construction.
#[derive(Debug, Default)]
pub struct GraphBuilder {
    index: HashMap<TermHash, VertexId>,
    vertex_hashes: Vec<TermHash>,
    sources: Vec<VertexId>,
    targets: Vec<VertexId>,
    attributes: Vec<TermHash>,
}

impl GraphBuilder {
    fn vertex(&mut self, h: TermHash) -> Result<VertexId, GraphError> {
        if let Some(&v) = self.index.get(&h) {
            return Ok(v);
        }
        let v = VertexId::try_from(self.vertex_hashes.len()).map_err(|_| GraphError::TooManyVertices)?;
        self.index.insert(h, v);
        self.vertex_hashes.push(h);
        Ok(v)
    }

    pub fn push(&mut self, r: EdgeListRecord) -> Result<(), GraphError> {
        let s = self.vertex(r.source)?;
        let t = self.vertex(r.target)?;
        self.sources.push(s);
        self.targets.push(t);
        self.attributes.push(r.attribute);
        Ok(())
    }

    pub fn finish(self) -> Graph {
        Graph::from_parts(self.vertex_hashes, self.sources, self.targets, self.attributes)
    }
}
