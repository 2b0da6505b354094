//! Compressed binary graph files.
//!
//! Layout: 8-byte magic `RDFTOPOG`, u64 version, u64 uncompressed payload
//! length, then a zlib stream of little-endian u64 words:
//! `n, m, vertex_hash[n], source[m], target[m], attribute[m]`.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use flate2::read::ZlibDecoder;
use flate2::write::ZlibEncoder;
use flate2::Compression;

use crate::graph::{Graph, GraphError, VertexId};
use crate::hash::TermHash;

pub const MAGIC: &[u8; 8] = b"RDFTOPOG";
pub const VERSION: u64 = 1;

pub fn write_graph<W: Write>(graph: &Graph, out: W) -> Result<(), GraphError> {
    let n = graph.vertex_count();
    let m = graph.edge_count();
    let payload_len = 8 * (2 + n + 3 * m) as u64;
    let mut out = BufWriter::new(out);
    out.write_all(MAGIC)?;
    out.write_all(&VERSION.to_le_bytes())?;
    out.write_all(&payload_len.to_le_bytes())?;

    let mut z = ZlibEncoder::new(out, Compression::fast());
    let mut buf = Vec::with_capacity(1 << 16);
    let mut put = |z: &mut ZlibEncoder<_>, words: &mut dyn Iterator<Item = u64>| -> std::io::Result<()> {
        for w in words {
            buf.extend_from_slice(&w.to_le_bytes());
            if buf.len() >= 1 << 16 {
                z.write_all(&buf)?;
                buf.clear();
            }
        }
        z.write_all(&buf)?;
        buf.clear();
        Ok(())
    };
    put(&mut z, &mut [n as u64, m as u64].into_iter())?;
    put(&mut z, &mut graph.vertex_hashes().iter().map(|h| h.0))?;
    put(&mut z, &mut graph.sources().iter().map(|&v| u64::from(v)))?;
    put(&mut z, &mut graph.targets().iter().map(|&v| u64::from(v)))?;
    put(&mut z, &mut graph.attributes().iter().map(|h| h.0))?;
    z.finish()?.flush()?;
    Ok(())
}

pub fn read_graph<R: Read>(mut input: R) -> Result<Graph, GraphError> {
    let mut header = [0u8; 24];
    input.read_exact(&mut header).map_err(|_| GraphError::Corrupt("short header".into()))?;
    if &header[0..8] != MAGIC {
        return Err(GraphError::BadMagic);
    }
    let word = |i: usize| u64::from_le_bytes(header[i..i + 8].try_into().unwrap());
    let version = word(8);
    if version != VERSION {
        return Err(GraphError::VersionMismatch { found: version, expected: VERSION });
    }
    let payload_len = word(16);
    if payload_len < 16 || payload_len % 8 != 0 {
        return Err(GraphError::Corrupt(format!("bad payload length {payload_len}")));
    }

    let mut payload = Vec::new();
    payload
        .try_reserve_exact(payload_len as usize)
        .map_err(|_| GraphError::Corrupt(format!("payload length {payload_len} too large")))?;
    ZlibDecoder::new(input)
        .take(payload_len + 1)
        .read_to_end(&mut payload)
        .map_err(|e| GraphError::Corrupt(e.to_string()))?;
    if payload.len() as u64 != payload_len {
        return Err(GraphError::Corrupt(format!(
            "payload is {} bytes, header says {payload_len}",
            payload.len()
        )));
    }

    let mut words = payload.chunks_exact(8).map(|c| u64::from_le_bytes(c.try_into().unwrap()));
    let n = words.next().unwrap() as usize;
    let m = words.next().unwrap() as usize;
    if 8 * (2 + n as u128 + 3 * m as u128) != payload_len as u128 {
        return Err(GraphError::Corrupt(format!("counts n={n} m={m} disagree with payload length")));
    }
    if n > u32::MAX as usize || m > u32::MAX as usize {
        return Err(GraphError::TooManyVertices);
    }
    let hashes: Vec<TermHash> = words.by_ref().take(n).map(TermHash).collect();
    let ids = |words: &mut dyn Iterator<Item = u64>| -> Result<Vec<VertexId>, GraphError> {
        words
            .take(m)
            .map(|w| {
                if (w as usize) < n {
                    Ok(w as VertexId)
                } else {
                    Err(GraphError::Corrupt(format!("vertex id {w} out of range")))
                }
            })
            .collect()
    };
    let sources = ids(&mut words)?;
    let targets = ids(&mut words)?;
    let attributes = words.take(m).map(TermHash).collect();
    Ok(Graph::from_parts(hashes, sources, targets, attributes))
}

pub fn save_binary(graph: &Graph, path: &Path) -> Result<(), GraphError> {
    write_graph(graph, File::create(path)?)
}

pub fn load_binary(path: &Path) -> Result<Graph, GraphError> {
    read_graph(BufReader::with_capacity(1 << 20, File::open(path)?))
}
