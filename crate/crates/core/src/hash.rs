//! 64-bit term digests.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use xxhash_rust::xxh64::xxh64;

/// Digest of one RDF term, rendered as 16 lowercase hex characters.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct TermHash(pub u64);

impl TermHash {
    pub const fn value(self) -> u64 {
        self.0
    }

    /// Parses exactly 16 hex characters. Faster than going through `FromStr`
    /// and used on the edgelist hot path.
    pub fn from_hex(bytes: &[u8]) -> Option<TermHash> {
        if bytes.len() != 16 {
            return None;
        }
        let mut v = 0u64;
        for &b in bytes {
            let nibble = match b {
                b'0'..=b'9' => b - b'0',
                b'a'..=b'f' => b - b'a' + 10,
                b'A'..=b'F' => b - b'A' + 10,
                _ => return None,
            };
            v = (v << 4) | u64::from(nibble);
        }
        Some(TermHash(v))
    }

    /// Writes the 16-character rendering into `out`.
    pub fn write_hex(self, out: &mut [u8; 16]) {
        const DIGITS: &[u8; 16] = b"0123456789abcdef";
        for (i, slot) in out.iter_mut().enumerate() {
            let shift = 60 - 4 * i;
            *slot = DIGITS[((self.0 >> shift) & 0xf) as usize];
        }
    }
}

impl fmt::Display for TermHash {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:016x}", self.0)
    }
}

impl fmt::Debug for TermHash {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "TermHash({:016x})", self.0)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("invalid term hash {0:?}: expected 16 hex characters")]
pub struct ParseTermHashError(pub String);

impl FromStr for TermHash {
    type Err = ParseTermHashError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        TermHash::from_hex(s.as_bytes()).ok_or_else(|| ParseTermHashError(s.to_owned()))
    }
}

impl Serialize for TermHash {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for TermHash {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Non-cryptographic hash used for term encoding.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum HashAlgorithm {
    Xxh64,
}

/// Which hash function and seed to apply to term surface strings.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct TermHasher {
    pub algorithm: HashAlgorithm,
    pub seed: u64,
}

impl Default for TermHasher {
    fn default() -> Self {
        TermHasher { algorithm: HashAlgorithm::Xxh64, seed: 0 }
    }
}

impl TermHasher {
    pub fn with_seed(seed: u64) -> Self {
        TermHasher { seed, ..Self::default() }
    }

    /// Hashes the N-Triples surface form of a term, delimiters included
    /// (`<iri>`, `_:label`, `"lexical"@lang`).
    #[inline]
    pub fn hash(&self, surface: &str) -> TermHash {
        match self.algorithm {
            HashAlgorithm::Xxh64 => TermHash(xxh64(surface.as_bytes(), self.seed)),
        }
    }
}

/// Hashes with the default XXH64/seed 0 configuration.
pub fn hash_term(surface: &str) -> TermHash {
    TermHasher::default().hash(surface)
}
