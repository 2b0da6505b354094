//! Independent reference implementations and fixtures shared by the
//! integration tests. Everything here is deliberately naive.
#![allow(dead_code)]

use std::collections::{BTreeSet, VecDeque};
use std::io::{BufRead, BufReader, Write};
use std::net::{SocketAddr, TcpListener};
use std::path::{Path, PathBuf};
use std::time::Duration;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub type Edges = Vec<(u32, u32)>;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Directed multigraph with `n <= max_n`, `m <= max_m`, including loops and
/// parallel edges.
pub fn random_multigraph(rng: &mut impl Rng, max_n: usize, max_m: usize) -> (usize, Edges) {
    let n = rng.gen_range(1..=max_n);
    let m = rng.gen_range(0..=max_m);
    let mut edges = Edges::with_capacity(m);
    while edges.len() < m {
        let roll: f64 = rng.gen();
        if roll < 0.1 && !edges.is_empty() {
            let e = edges[rng.gen_range(0..edges.len())];
            edges.push(e);
        } else if roll < 0.15 {
            let v = rng.gen_range(0..n as u32);
            edges.push((v, v));
        } else {
            edges.push((rng.gen_range(0..n as u32), rng.gen_range(0..n as u32)));
        }
    }
    (n, edges)
}

pub struct Naive {
    pub n: usize,
    pub edges: Edges,
}

impl Naive {
    pub fn new(n: usize, edges: &[(u32, u32)]) -> Self {
        Naive { n, edges: edges.to_vec() }
    }

    pub fn m(&self) -> u64 {
        self.edges.len() as u64
    }

    pub fn pairs(&self) -> BTreeSet<(u32, u32)> {
        self.edges.iter().copied().collect()
    }

    pub fn m_u(&self) -> u64 {
        self.pairs().len() as u64
    }

    pub fn in_degrees(&self) -> Vec<u64> {
        (0..self.n as u32).map(|v| self.edges.iter().filter(|e| e.1 == v).count() as u64).collect()
    }

    pub fn out_degrees(&self) -> Vec<u64> {
        (0..self.n as u32).map(|v| self.edges.iter().filter(|e| e.0 == v).count() as u64).collect()
    }

    pub fn total_degrees(&self) -> Vec<u64> {
        self.in_degrees().iter().zip(self.out_degrees()).map(|(a, b)| a + b).collect()
    }

    pub fn dedup_degrees(&self) -> Vec<u64> {
        let mut d = vec![0; self.n];
        for (u, v) in self.pairs() {
            d[u as usize] += 1;
            d[v as usize] += 1;
        }
        d
    }

    /// Straight scan of the definition.
    pub fn h_index(seq: &[u64]) -> u64 {
        (0..=seq.len() as u64).rev().find(|&h| seq.iter().filter(|&&d| d >= h).count() as u64 >= h).unwrap()
    }

    pub fn centralization(&self) -> f64 {
        let d = self.dedup_degrees();
        let max = *d.iter().max().unwrap();
        let num: u64 = d.iter().map(|x| max - x).sum();
        num as f64 / ((self.n - 1) as f64 * (self.n - 2) as f64)
    }

    pub fn m_bi(&self) -> u64 {
        self.edges.iter().filter(|&&(u, v)| self.edges.iter().any(|&(a, b)| a == v && b == u)).count() as u64
    }

    fn undirected(&self) -> Vec<Vec<u32>> {
        let mut adj = vec![Vec::new(); self.n];
        for &(u, v) in &self.edges {
            adj[u as usize].push(v);
            adj[v as usize].push(u);
        }
        adj
    }

    fn bfs(adj: &[Vec<u32>], s: usize) -> Vec<Option<u64>> {
        let mut dist = vec![None; adj.len()];
        dist[s] = Some(0);
        let mut q = VecDeque::from([s]);
        while let Some(u) = q.pop_front() {
            for &w in &adj[u] {
                if dist[w as usize].is_none() {
                    dist[w as usize] = Some(dist[u].unwrap() + 1);
                    q.push_back(w as usize);
                }
            }
        }
        dist
    }

    /// Members of the largest weak component, lowest index winning ties.
    pub fn largest_component(&self) -> Vec<usize> {
        let adj = self.undirected();
        let mut best: Vec<usize> = Vec::new();
        let mut seen = vec![false; self.n];
        for s in 0..self.n {
            if seen[s] {
                continue;
            }
            let comp: Vec<usize> = Self::bfs(&adj, s).iter().enumerate().filter(|(_, d)| d.is_some()).map(|(v, _)| v).collect();
            for &v in &comp {
                seen[v] = true;
            }
            if comp.len() > best.len() {
                best = comp;
            }
        }
        best
    }

    /// Exact diameter of the undirected view of the largest weak component.
    pub fn exact_diameter(&self) -> u64 {
        let adj = self.undirected();
        self.largest_component()
            .into_iter()
            .map(|s| Self::bfs(&adj, s).into_iter().flatten().max().unwrap())
            .max()
            .unwrap_or(0)
    }

    /// Dense power iteration with uniform teleport and dangling redistribution.
    pub fn pagerank(&self, damping: f64) -> Vec<f64> {
        let n = self.n;
        let out = self.out_degrees();
        let mut w = vec![vec![0.0; n]; n];
        for &(u, v) in &self.edges {
            w[v as usize][u as usize] += 1.0 / out[u as usize] as f64;
        }
        let mut x = vec![1.0 / n as f64; n];
        for _ in 0..10_000 {
            let dangling: f64 = (0..n).filter(|&u| out[u] == 0).map(|u| x[u]).sum();
            let next: Vec<f64> = (0..n)
                .map(|v| {
                    let inflow: f64 = (0..n).map(|u| w[v][u] * x[u]).sum();
                    (1.0 - damping) / n as f64 + damping * (inflow + dangling / n as f64)
                })
                .collect();
            let delta: f64 = next.iter().zip(&x).map(|(a, b)| (a - b).abs()).sum();
            x = next;
            if delta < 1e-15 {
                break;
            }
        }
        x
    }

    /// Population variance and mean by two passes.
    pub fn moments(seq: &[u64]) -> (f64, f64) {
        let n = seq.len() as f64;
        let mean = seq.iter().sum::<u64>() as f64 / n;
        let var = seq.iter().map(|&d| (d as f64 - mean).powi(2)).sum::<f64>() / n;
        (mean, var)
    }
}

/// Discrete power law `P(k) ∝ k^-alpha` on `k >= 1`, sampled by inverse CDF
/// over an explicit table; the remote tail falls back to a continuous inverse.
pub struct PowerLawSampler {
    cdf: Vec<f64>,
    alpha: f64,
    total: f64,
}

impl PowerLawSampler {
    pub fn new(alpha: f64, table: usize) -> Self {
        let mut cdf = Vec::with_capacity(table);
        let mut acc = 0.0;
        for k in 1..=table {
            acc += (k as f64).powf(-alpha);
            cdf.push(acc);
        }
        let tail = (table as f64 + 0.5).powf(1.0 - alpha) / (alpha - 1.0);
        PowerLawSampler { cdf, alpha, total: acc + tail }
    }

    pub fn sample(&self, rng: &mut impl Rng) -> u64 {
        let u = rng.gen::<f64>() * self.total;
        let i = self.cdf.partition_point(|&c| c < u);
        if i < self.cdf.len() {
            return i as u64 + 1;
        }
        let k0 = self.cdf.len() as f64 + 0.5;
        let rest = (u - self.cdf[self.cdf.len() - 1]) / (self.total - self.cdf[self.cdf.len() - 1]);
        (k0 * (1.0 - rest).max(1e-300).powf(-1.0 / (self.alpha - 1.0))).round() as u64
    }

    pub fn draws(&self, count: usize, seed: u64) -> Vec<u64> {
        let mut r = rng(seed);
        (0..count).map(|_| self.sample(&mut r)).collect()
    }
}

/// Small N-Triples document with IRIs, blank nodes and assorted literals.
pub fn ntriples_fixture(seed: u64, statements: usize) -> String {
    let mut r = rng(seed);
    let mut out = String::new();
    let subjects = (statements / 3).max(2);
    for _ in 0..statements {
        let s = r.gen_range(0..subjects);
        let subject = if r.gen_bool(0.1) { format!("_:b{s}") } else { format!("<http://example.org/r/{s}>") };
        let predicate = format!("<http://example.org/p/{}>", r.gen_range(0..6));
        let object = match r.gen_range(0..6) {
            0 => format!("\"label {}\"", r.gen_range(0..50)),
            1 => format!("\"{}\"^^<http://www.w3.org/2001/XMLSchema#integer>", r.gen_range(0..100)),
            2 => format!("\"caf\\u00E9 {}\"@fr", r.gen_range(0..10)),
            3 => format!("_:b{}", r.gen_range(0..subjects)),
            _ => format!("<http://example.org/r/{}>", r.gen_range(0..subjects)),
        };
        out.push_str(&format!("{subject} {predicate} {object} .\n"));
    }
    out
}

pub fn write_fixture(dir: &Path, name: &str, seed: u64, statements: usize) -> PathBuf {
    let path = dir.join(name);
    std::fs::write(&path, ntriples_fixture(seed, statements)).unwrap();
    path
}

pub fn gzip(data: &[u8]) -> Vec<u8> {
    let mut enc = flate2::write::GzEncoder::new(Vec::new(), flate2::Compression::default());
    enc.write_all(data).unwrap();
    enc.finish().unwrap()
}

/// Minimal HTTP/1.1 server for probe and download tests. Paths listed in
/// `files` answer 200 with the body (HEAD: headers only), `/slow` never
/// answers, anything else is 404.
pub fn serve(files: Vec<(&'static str, Vec<u8>)>) -> SocketAddr {
    let listener = TcpListener::bind("127.0.0.1:0").unwrap();
    let addr = listener.local_addr().unwrap();
    std::thread::spawn(move || {
        for stream in listener.incoming() {
            let Ok(mut stream) = stream else { continue };
            let files = files.clone();
            std::thread::spawn(move || {
                let mut reader = BufReader::new(stream.try_clone().unwrap());
                let mut request = String::new();
                if reader.read_line(&mut request).is_err() {
                    return;
                }
                loop {
                    let mut header = String::new();
                    if reader.read_line(&mut header).unwrap_or(0) == 0 || header == "\r\n" {
                        break;
                    }
                }
                let mut parts = request.split_whitespace();
                let method = parts.next().unwrap_or("");
                let path = parts.next().unwrap_or("");
                if path == "/slow" {
                    std::thread::sleep(Duration::from_secs(10));
                    return;
                }
                let response = match files.iter().find(|(p, _)| *p == path) {
                    Some((_, body)) => {
                        let mut r = format!(
                            "HTTP/1.1 200 OK\r\nContent-Length: {}\r\nConnection: close\r\n\r\n",
                            body.len()
                        )
                        .into_bytes();
                        if method != "HEAD" {
                            r.extend_from_slice(body);
                        }
                        r
                    }
                    None => b"HTTP/1.1 404 Not Found\r\nContent-Length: 0\r\nConnection: close\r\n\r\n".to_vec(),
                };
                let _ = stream.write_all(&response);
            });
        }
    });
    addr
}

fn close(name: &str, got: f64, want: f64, tol: f64) -> Result<(), String> {
    if (got - want).abs() <= tol {
        Ok(())
    } else {
        Err(format!("{name}: got {got}, oracle {want}"))
    }
}

fn same<T: PartialEq + std::fmt::Debug>(name: &str, got: T, want: T) -> Result<(), String> {
    if got == want {
        Ok(())
    } else {
        Err(format!("{name}: got {got:?}, oracle {want:?}"))
    }
}

/// Compares every measure of the library report with the naive oracles:
/// counts exactly, reals to 1e-9, PageRank to 1e-6.
pub fn check_measures(n: usize, edges: &[(u32, u32)]) -> Result<(), String> {
    use rdftopo_core::measures::{self, PageRankParams};
    use rdftopo_core::report::{analyze, AnalysisOptions};
    use rdftopo_core::Graph;

    let g = Graph::from_edges(n, edges);
    let o = Naive::new(n, edges);
    let r = analyze("oracle", None, &g, &AnalysisOptions::default()).report;

    same("n", r.n, n as u64)?;
    same("m", r.m, o.m())?;
    same("m_u", r.m_u, o.m_u())?;
    same("m_p", r.m_p, o.m() - o.m_u())?;
    let (ind, outd, tot) = (o.in_degrees(), o.out_degrees(), o.total_degrees());
    same("d_max", r.d_max, tot.iter().max().copied())?;
    same("d_max_in", r.d_max_in, ind.iter().max().copied())?;
    same("d_max_out", r.d_max_out, outd.iter().max().copied())?;
    same("C_D_max", r.c_d_max, r.d_max)?;
    same("h_d", r.h_d, Naive::h_index(&ind))?;
    same("h_u", r.h_u, Naive::h_index(&tot))?;
    let z = o.m() as f64 / n as f64;
    for (name, v) in [("z", r.z), ("z_in", r.z_in), ("z_out", r.z_out)] {
        close(name, v.ok_or(name)?, z, 1e-9)?;
    }
    close("p", r.p.unwrap(), o.m() as f64 / (n * n) as f64, 1e-9)?;
    close("p_u", r.p_u.unwrap(), o.m_u() as f64 / (n * n) as f64, 1e-9)?;
    if edges.is_empty() {
        same("y", r.y, None)?;
        same("m_bi", r.m_bi, 0)?;
    } else {
        same("m_bi", r.m_bi, o.m_bi())?;
        close("y", r.y.unwrap(), o.m_bi() as f64 / o.m() as f64, 1e-9)?;
    }
    if n >= 3 {
        close("C_D", r.c_d.unwrap(), o.centralization(), 1e-9)?;
    } else {
        same("C_D", r.c_d, None)?;
    }
    for (label, seq, var, sd, cv) in [
        ("in", &ind, r.sigma2_in, r.sigma_in, r.cv_in),
        ("out", &outd, r.sigma2_out, r.sigma_out, r.cv_out),
    ] {
        let (mean, v) = Naive::moments(seq);
        close(&format!("sigma2_{label}"), var.unwrap(), v, 1e-9)?;
        close(&format!("sigma_{label}"), sd.unwrap(), v.sqrt(), 1e-9)?;
        if mean == 0.0 {
            same(&format!("cv_{label}"), cv, None)?;
        } else {
            close(&format!("cv_{label}"), cv.unwrap(), 100.0 * v.sqrt() / mean, 1e-9)?;
        }
    }
    let delta = r.delta.ok_or("delta undefined")?;
    let exact = o.exact_diameter();
    if delta > exact {
        return Err(format!("delta {delta} exceeds exact diameter {exact}"));
    }
    // the estimate is a real eccentricity, so at least half the diameter
    if 2 * delta < exact {
        return Err(format!("delta {delta} below half the exact diameter {exact}"));
    }

    let pr = measures::pagerank(&g, &PageRankParams::default()).map_err(|e| e.to_string())?;
    let dense = o.pagerank(0.85);
    for (v, (a, b)) in pr.scores.iter().zip(&dense).enumerate() {
        close(&format!("pagerank[{v}]"), *a, *b, 1e-6)?;
    }
    let best = dense.iter().cloned().fold(f64::MIN, f64::max);
    close("PR_max", r.pr_max.unwrap(), best, 1e-6)?;
    Ok(())
}
