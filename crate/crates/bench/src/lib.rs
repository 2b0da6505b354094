//! Synthetic inputs shared by the benchmarks.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Directed edges whose targets are drawn with preferential attachment, so
/// in-degrees are heavy tailed.
pub fn scale_free_edges(seed: u64, n: u32, m: usize) -> Vec<(u32, u32)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut edges = Vec::with_capacity(m);
    let mut targets: Vec<u32> = Vec::with_capacity(m);
    for _ in 0..m {
        let src = rng.gen_range(0..n);
        let dst = if targets.is_empty() || rng.gen_bool(0.2) {
            rng.gen_range(0..n)
        } else {
            targets[rng.gen_range(0..targets.len())]
        };
        targets.push(dst);
        edges.push((src, dst));
    }
    edges
}

/// N-Triples document over the same edge model, with a share of literal
/// objects and a handful of predicates.
pub fn ntriples(seed: u64, statements: usize) -> String {
    let n = (statements / 4).max(2) as u32;
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed);
    let mut out = String::with_capacity(statements * 90);
    for (s, o) in scale_free_edges(seed, n, statements) {
        let p = rng.gen_range(0..12);
        if rng.gen_bool(0.25) {
            out.push_str(&format!("<http://example.org/r/{s}> <http://example.org/p/{p}> \"value {o}\"@en .\n"));
        } else {
            out.push_str(&format!("<http://example.org/r/{s}> <http://example.org/p/{p}> <http://example.org/r/{o}> .\n"));
        }
    }
    out
}

/// Degree sample for fitting, drawn from the in-degrees of a synthetic graph.
pub fn degree_sample(seed: u64, n: u32, m: usize) -> Vec<u64> {
    let mut deg = vec![0u64; n as usize];
    for (_, t) in scale_free_edges(seed, n, m) {
        deg[t as usize] += 1;
    }
    deg.retain(|&d| d > 0);
    deg
}
