//! Perceptual identities for images and text.
//!
//! Images get a 64-bit difference hash over a 9x8 luma grid; text gets a
//! 64-bit SimHash over token shingles plus a MinHash signature for Jaccard
//! estimation. All of it is deterministic: fixed seeds, documented mixing,
//! no library hash functions.

pub mod index;
pub mod pgm;
pub mod suite;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::hashing::{mix, shingle_hash};

pub use index::FingerprintIndex;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum FingerprintError {
    /// Grid or image dimensions do not match what the operation requires.
    #[error("dimension error: {0}")]
    Dimension(String),
    /// Not enough tokens (or shingles) to fingerprint.
    #[error("insufficient text: need at least {need} tokens, got {got}")]
    InsufficientText { need: usize, got: usize },
    /// Malformed PGM input.
    #[error("pgm format error: {0}")]
    PgmFormat(String),
}

/// 64-bit difference hash of an image. `kind` is always `DHASH`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ImageHash64 {
    pub bits: u64,
}

impl ImageHash64 {
    pub const KIND: &'static str = "DHASH";

    pub fn hex(&self) -> String {
        format!("{:016x}", self.bits)
    }
}

/// 64-bit SimHash of a token sequence, tagged with the shingle width it was
/// computed at.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct TextSimHash64 {
    pub bits: u64,
    pub shingle_width: usize,
}

impl TextSimHash64 {
    pub const KIND: &'static str = "SIMHASH";

    pub fn hex(&self) -> String {
        format!("{:016x}", self.bits)
    }
}

/// MinHash signature: element i is the minimum of mixer i over the shingle
/// set. Length is exactly k.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MinHashSignature {
    pub mins: Vec<u64>,
}

impl MinHashSignature {
    pub fn k(&self) -> usize {
        self.mins.len()
    }
}

/// Exact 9-column by 8-row luma grid consumed by [`dhash`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LumaGrid([[u8; 9]; 8]);

impl LumaGrid {
    pub const COLS: usize = 9;
    pub const ROWS: usize = 8;

    pub fn new(cells: [[u8; 9]; 8]) -> Self {
        LumaGrid(cells)
    }

    /// Build from row vectors, checking dimensions.
    pub fn from_rows(rows: &[Vec<u8>]) -> Result<Self, FingerprintError> {
        if rows.len() != Self::ROWS {
            return Err(FingerprintError::Dimension(format!(
                "expected {} rows, got {}",
                Self::ROWS,
                rows.len()
            )));
        }
        let mut cells = [[0u8; 9]; 8];
        for (r, row) in rows.iter().enumerate() {
            if row.len() != Self::COLS {
                return Err(FingerprintError::Dimension(format!(
                    "row {} has {} columns, expected {}",
                    r,
                    row.len(),
                    Self::COLS
                )));
            }
            cells[r].copy_from_slice(row);
        }
        Ok(LumaGrid(cells))
    }

    pub fn cell(&self, row: usize, col: usize) -> u8 {
        self.0[row][col]
    }
}

/// Difference hash of a 9x8 luma grid.
///
/// Bit `row*8 + col` (bit 0 = most significant) is set iff the cell is
/// strictly darker than its right neighbour.
pub fn dhash(grid: &LumaGrid) -> ImageHash64 {
    let mut bits = 0u64;
    for row in 0..LumaGrid::ROWS {
        for col in 0..LumaGrid::COLS - 1 {
            if grid.cell(row, col) < grid.cell(row, col + 1) {
                let bit_index = row * 8 + col;
                bits |= 1u64 << (63 - bit_index);
            }
        }
    }
    ImageHash64 { bits }
}

/// Hamming distance between two 64-bit values.
pub fn hamming(a: u64, b: u64) -> u32 {
    (a ^ b).count_ones()
}

/// Hash every `width`-token shingle of the sequence (bag semantics: one
/// hash per occurrence, order preserved only as far as windowing goes).
pub fn shingle_hashes<S: AsRef<str>>(
    tokens: &[S],
    width: usize,
) -> Result<Vec<u64>, FingerprintError> {
    assert!(width > 0, "shingle width must be positive");
    if tokens.len() < width {
        return Err(FingerprintError::InsufficientText {
            need: width,
            got: tokens.len(),
        });
    }
    Ok(tokens.windows(width).map(shingle_hash).collect())
}

/// SimHash over the shingle bag: per-bit vote of +1 when the shingle hash
/// has the bit set, -1 otherwise; output bit is 1 iff the vote is positive.
pub fn simhash<S: AsRef<str>>(
    tokens: &[S],
    shingle_width: usize,
) -> Result<TextSimHash64, FingerprintError> {
    let hashes = shingle_hashes(tokens, shingle_width)?;
    let mut votes = [0i64; 64];
    for h in &hashes {
        for (bit, vote) in votes.iter_mut().enumerate() {
            if h & (1u64 << bit) != 0 {
                *vote += 1;
            } else {
                *vote -= 1;
            }
        }
    }
    let mut bits = 0u64;
    for (bit, vote) in votes.iter().enumerate() {
        if *vote > 0 {
            bits |= 1u64 << bit;
        }
    }
    Ok(TextSimHash64 {
        bits,
        shingle_width,
    })
}

/// MinHash signature of a shingle hash set: `mins[i]` is the minimum of
/// mixer i over the set.
pub fn minhash_signature(
    shingles: &std::collections::HashSet<u64>,
    k: usize,
) -> Result<MinHashSignature, FingerprintError> {
    assert!(k > 0, "k must be positive");
    if shingles.is_empty() {
        return Err(FingerprintError::InsufficientText { need: 1, got: 0 });
    }
    let mut mins = vec![u64::MAX; k];
    for &s in shingles {
        for (i, slot) in mins.iter_mut().enumerate() {
            let v = mix(s, i);
            if v < *slot {
                *slot = v;
            }
        }
    }
    Ok(MinHashSignature { mins })
}

/// Convenience: MinHash signature straight from tokens.
pub fn minhash_from_tokens<S: AsRef<str>>(
    tokens: &[S],
    shingle_width: usize,
    k: usize,
) -> Result<MinHashSignature, FingerprintError> {
    let set: std::collections::HashSet<u64> =
        shingle_hashes(tokens, shingle_width)?.into_iter().collect();
    minhash_signature(&set, k)
}

/// Estimated Jaccard similarity: fraction of signature positions that agree.
pub fn estimate_jaccard(a: &MinHashSignature, b: &MinHashSignature) -> f64 {
    assert_eq!(a.k(), b.k(), "signatures must share k");
    if a.k() == 0 {
        return 0.0;
    }
    let agree = a
        .mins
        .iter()
        .zip(&b.mins)
        .filter(|(x, y)| x == y)
        .count();
    agree as f64 / a.k() as f64
}
