//! Basic, degree-based, centrality and edge-based graph measures.
//!
//! Conventions: a self-loop adds one to the in- and one to the out-degree of
//! its vertex; "unique" variants collapse parallel edges to one per ordered
//! `(source, target)` pair.

use std::collections::VecDeque;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::graph::{Graph, VertexId};

/// A measure that has no value on the given graph (e.g. an average over
/// zero vertices).
#[derive(Debug, Clone, Copy, PartialEq, Eq, thiserror::Error)]
#[error("{measure} is undefined: {reason}")]
pub struct Undefined {
    pub measure: &'static str,
    pub reason: &'static str,
}

impl Undefined {
    pub const fn new(measure: &'static str, reason: &'static str) -> Self {
        Undefined { measure, reason }
    }
}

/// Adjacency with parallel edges collapsed; rows are sorted.
#[derive(Debug, Clone)]
pub struct UniqueAdjacency {
    out_offsets: Vec<usize>,
    out: Vec<VertexId>,
    in_degree: Vec<u32>,
}

impl UniqueAdjacency {
    pub fn new(g: &Graph) -> Self {
        let n = g.vertex_count();
        let mut out_offsets = Vec::with_capacity(n + 1);
        let mut out = Vec::with_capacity(g.edge_count());
        let mut in_degree = vec![0u32; n];
        let mut row = Vec::new();
        out_offsets.push(0);
        for v in g.vertices() {
            row.clear();
            row.extend(g.out_neighbors(v));
            row.sort_unstable();
            row.dedup();
            for &t in &row {
                in_degree[t as usize] += 1;
            }
            out.extend_from_slice(&row);
            out_offsets.push(out.len());
        }
        UniqueAdjacency { out_offsets, out, in_degree }
    }

    pub fn edge_count(&self) -> usize {
        self.out.len()
    }

    pub fn out_neighbors(&self, v: VertexId) -> &[VertexId] {
        &self.out[self.out_offsets[v as usize]..self.out_offsets[v as usize + 1]]
    }

    pub fn has_edge(&self, u: VertexId, v: VertexId) -> bool {
        self.out_neighbors(u).binary_search(&v).is_ok()
    }

    /// Total degree in the collapsed graph.
    pub fn degree(&self, v: VertexId) -> usize {
        self.out_neighbors(v).len() + self.in_degree[v as usize] as usize
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct BasicCounts {
    pub n: u64,
    pub m: u64,
    pub m_u: u64,
    pub m_p: u64,
}

pub fn basic_counts(g: &Graph) -> BasicCounts {
    basic_counts_with(g, &UniqueAdjacency::new(g))
}

pub fn basic_counts_with(g: &Graph, unique: &UniqueAdjacency) -> BasicCounts {
    let m = g.edge_count() as u64;
    let m_u = unique.edge_count() as u64;
    BasicCounts { n: g.vertex_count() as u64, m, m_u, m_p: m - m_u }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DegreeStats {
    pub d_max: u64,
    pub d_max_in: u64,
    pub d_max_out: u64,
    /// Edges per vertex, m/n.
    pub z: f64,
    pub z_in: f64,
    pub z_out: f64,
    /// Mean total degree, 2m/n.
    pub mean_total_degree: f64,
    /// Lowest-index vertex attaining `d_max`.
    pub d_max_vertex: VertexId,
}

pub fn degree_stats(g: &Graph) -> Result<DegreeStats, Undefined> {
    let n = g.vertex_count();
    if n == 0 {
        return Err(Undefined::new("degree statistics", "graph has no vertices"));
    }
    let mut s = DegreeStats {
        d_max: 0,
        d_max_in: 0,
        d_max_out: 0,
        z: 0.0,
        z_in: 0.0,
        z_out: 0.0,
        mean_total_degree: 0.0,
        d_max_vertex: 0,
    };
    for v in g.vertices() {
        let d = g.degree(v) as u64;
        if d > s.d_max {
            s.d_max = d;
            s.d_max_vertex = v;
        }
        s.d_max_in = s.d_max_in.max(g.in_degree(v) as u64);
        s.d_max_out = s.d_max_out.max(g.out_degree(v) as u64);
    }
    let z = g.edge_count() as f64 / n as f64;
    s.z = z;
    s.z_in = z;
    s.z_out = z;
    s.mean_total_degree = 2.0 * z;
    Ok(s)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum HIndexMode {
    /// In-degrees of the directed graph (`h_d`).
    DirectedIn,
    /// Total degrees (`h_u`).
    UndirectedTotal,
}

/// Largest `h` such that at least `h` vertices have degree `>= h`.
pub fn h_index(g: &Graph, mode: HIndexMode) -> u64 {
    let degrees = g.vertices().map(|v| match mode {
        HIndexMode::DirectedIn => g.in_degree(v),
        HIndexMode::UndirectedTotal => g.degree(v),
    });
    h_index_of(degrees, g.vertex_count())
}

/// h-index of a degree sequence of length `len`.
pub fn h_index_of(degrees: impl Iterator<Item = usize>, len: usize) -> u64 {
    // The answer is at most `len`; bucket everything above it together.
    let mut buckets = vec![0usize; len + 1];
    for d in degrees {
        buckets[d.min(len)] += 1;
    }
    let mut at_least = 0;
    for h in (1..=len).rev() {
        at_least += buckets[h];
        if at_least >= h {
            return h as u64;
        }
    }
    0
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PageRankParams {
    pub damping: f64,
    /// L1 change between iterations below which iteration stops.
    pub tolerance: f64,
    pub max_iterations: u32,
}

impl Default for PageRankParams {
    fn default() -> Self {
        PageRankParams { damping: 0.85, tolerance: 1e-8, max_iterations: 200 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PageRank {
    pub scores: Vec<f64>,
    pub iterations: u32,
    pub converged: bool,
}

impl PageRank {
    /// Highest score and the lowest-index vertex holding it.
    pub fn max(&self) -> Option<(VertexId, f64)> {
        let mut best: Option<(VertexId, f64)> = None;
        for (v, &s) in self.scores.iter().enumerate() {
            if best.map_or(true, |(_, b)| s > b) {
                best = Some((v as VertexId, s));
            }
        }
        best
    }
}

/// Power iteration with uniform teleport and uniform redistribution of
/// dangling mass. Edge multiplicity weights the transition.
pub fn pagerank(g: &Graph, params: &PageRankParams) -> Result<PageRank, Undefined> {
    let n = g.vertex_count();
    if n == 0 {
        return Err(Undefined::new("PageRank", "graph has no vertices"));
    }
    if !(params.damping > 0.0 && params.damping < 1.0) {
        return Err(Undefined::new("PageRank", "damping must lie in (0, 1)"));
    }
    let d = params.damping;
    let nf = n as f64;
    let out_degree: Vec<f64> = g.vertices().map(|v| g.out_degree(v) as f64).collect();
    let mut scores = vec![1.0 / nf; n];
    let mut contrib = vec![0.0; n];
    let mut next = vec![0.0; n];
    let mut iterations = 0;
    let mut converged = false;
    while iterations < params.max_iterations {
        iterations += 1;
        let mut dangling = 0.0;
        for v in 0..n {
            if out_degree[v] == 0.0 {
                dangling += scores[v];
                contrib[v] = 0.0;
            } else {
                contrib[v] = scores[v] / out_degree[v];
            }
        }
        let base = (1.0 - d) / nf + d * dangling / nf;
        let sources = g.sources();
        next.par_iter_mut().with_min_len(4096).enumerate().for_each(|(v, slot)| {
            let incoming: f64 = g.in_edges(v as VertexId).iter().map(|&e| contrib[sources[e as usize] as usize]).sum();
            *slot = base + d * incoming;
        });
        let delta: f64 = scores.iter().zip(&next).map(|(a, b)| (a - b).abs()).sum();
        std::mem::swap(&mut scores, &mut next);
        if delta < params.tolerance {
            converged = true;
            break;
        }
    }
    Ok(PageRank { scores, iterations, converged })
}

/// Degree centralization over collapsed-edge degrees:
/// `Σ (d'_max − d'(v)) / ((n − 1)(n − 2))`.
pub fn centralization(g: &Graph) -> Result<f64, Undefined> {
    centralization_with(g, &UniqueAdjacency::new(g))
}

pub fn centralization_with(g: &Graph, unique: &UniqueAdjacency) -> Result<f64, Undefined> {
    let n = g.vertex_count();
    if n < 3 {
        return Err(Undefined::new("C_D", "needs at least 3 vertices"));
    }
    let degrees: Vec<usize> = g.vertices().map(|v| unique.degree(v)).collect();
    let max = *degrees.iter().max().expect("n >= 3");
    let numerator: usize = degrees.iter().map(|&d| max - d).sum();
    Ok(numerator as f64 / ((n - 1) as f64 * (n - 2) as f64))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Fill {
    pub p: f64,
    pub p_u: f64,
}

/// Density for a directed graph with loops: `m/n²` and `m_u/n²`.
pub fn fill(g: &Graph) -> Result<Fill, Undefined> {
    fill_with(g, &UniqueAdjacency::new(g))
}

pub fn fill_with(g: &Graph, unique: &UniqueAdjacency) -> Result<Fill, Undefined> {
    let n = g.vertex_count() as f64;
    if n == 0.0 {
        return Err(Undefined::new("fill", "graph has no vertices"));
    }
    Ok(Fill { p: g.edge_count() as f64 / (n * n), p_u: unique.edge_count() as f64 / (n * n) })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Reciprocity {
    pub y: f64,
    /// Edge instances `(u, v)` for which some edge `(v, u)` exists.
    pub m_bi: u64,
}

pub fn reciprocity(g: &Graph) -> Result<Reciprocity, Undefined> {
    reciprocity_with(g, &UniqueAdjacency::new(g))
}

pub fn reciprocity_with(g: &Graph, unique: &UniqueAdjacency) -> Result<Reciprocity, Undefined> {
    let m = g.edge_count();
    if m == 0 {
        return Err(Undefined::new("reciprocity", "graph has no edges"));
    }
    let m_bi = g
        .sources()
        .iter()
        .zip(g.targets())
        .filter(|&(&u, &v)| unique.has_edge(v, u))
        .count() as u64;
    Ok(Reciprocity { y: m_bi as f64 / m as f64, m_bi })
}

/// Weakly connected components; returns a component label per vertex and the
/// size of each component, labels numbered by lowest member index.
pub fn weak_components(g: &Graph) -> (Vec<u32>, Vec<usize>) {
    const UNSEEN: u32 = u32::MAX;
    let mut label = vec![UNSEEN; g.vertex_count()];
    let mut sizes = Vec::new();
    let mut queue = VecDeque::new();
    for root in g.vertices() {
        if label[root as usize] != UNSEEN {
            continue;
        }
        let c = sizes.len() as u32;
        label[root as usize] = c;
        queue.push_back(root);
        let mut size = 0;
        while let Some(v) = queue.pop_front() {
            size += 1;
            for w in g.neighbors(v) {
                if label[w as usize] == UNSEEN {
                    label[w as usize] = c;
                    queue.push_back(w);
                }
            }
        }
        sizes.push(size);
    }
    (label, sizes)
}

/// Undirected BFS from `source`; returns distances (u32::MAX = unreachable).
pub fn bfs_distances(g: &Graph, source: VertexId) -> Vec<u32> {
    let mut dist = vec![u32::MAX; g.vertex_count()];
    let mut queue = VecDeque::new();
    dist[source as usize] = 0;
    queue.push_back(source);
    while let Some(v) = queue.pop_front() {
        let next = dist[v as usize] + 1;
        for w in g.neighbors(v) {
            if dist[w as usize] == u32::MAX {
                dist[w as usize] = next;
                queue.push_back(w);
            }
        }
    }
    dist
}

/// Iterated double-sweep lower bound on the diameter of the undirected view,
/// restricted to the largest weakly connected component (ties broken by
/// lowest vertex index). Each sweep restarts from the farthest vertex,
/// preferring low degree then low index, until the eccentricity stops
/// growing.
pub fn pseudo_diameter(g: &Graph) -> Result<u64, Undefined> {
    if g.vertex_count() == 0 {
        return Err(Undefined::new("pseudo-diameter", "graph has no vertices"));
    }
    let (label, sizes) = weak_components(g);
    let largest = sizes
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.cmp(b.1).then(b.0.cmp(&a.0)))
        .map(|(c, _)| c as u32)
        .expect("non-empty");
    let mut source = label.iter().position(|&c| c == largest).expect("component has a member") as VertexId;
    let mut best = 0u32;
    loop {
        let dist = bfs_distances(g, source);
        let mut far: Option<(u32, usize, VertexId)> = None;
        for (v, &d) in dist.iter().enumerate() {
            if d == u32::MAX {
                continue;
            }
            let cand = (d, g.degree(v as VertexId), v as VertexId);
            far = match far {
                Some(f) if (f.0 > cand.0) || (f.0 == cand.0 && (f.1, f.2) <= (cand.1, cand.2)) => Some(f),
                _ => Some(cand),
            };
        }
        let (ecc, _, target) = far.expect("source is reachable");
        if ecc > best {
            best = ecc;
            source = target;
        } else {
            break;
        }
    }
    Ok(u64::from(best))
}
