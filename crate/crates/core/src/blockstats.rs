//! Non-overlapping block counting and the admissible Borel level.
//!
//! A sequence of `n` bits is cut into `floor(n/i)` consecutive blocks of `i`
//! bits starting at offset 0; a trailing partial block is discarded. Each
//! block is read as a big-endian `i`-bit integer `j`, so `"10"` counts
//! towards index 2.

use std::io::Read;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bitstream::{BitFormat, BitSequence, ChunkedBitReader};
use crate::error::{Error, Result};

/// Largest block length accepted by the counters (`2^24` counters).
pub const MAX_BLOCK_LEVEL: u32 = 24;

/// Occurrence counts of all `2^level` substrings of length `level`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BlockCounts {
    pub level: u32,
    pub total: u64,
    pub counts: Vec<u64>,
}

impl BlockCounts {
    /// The all-zero counts at `level`, identity of [`merge_counts`].
    pub fn zero(level: u32) -> Result<Self> {
        check_level(level)?;
        Ok(Self {
            level,
            total: 0,
            counts: vec![0; 1usize << level],
        })
    }

    /// Builds counts from a raw vector; its length must be a power of two.
    pub fn from_counts(counts: Vec<u64>) -> Result<Self> {
        let len = counts.len();
        if len < 2 || !len.is_power_of_two() {
            return Err(Error::Contract(format!(
                "counts vector of length {len} is not 2^i for i >= 1"
            )));
        }
        let level = len.trailing_zeros();
        check_level(level)?;
        let total = counts
            .iter()
            .try_fold(0u64, |acc, &c| acc.checked_add(c))
            .ok_or_else(|| Error::Numeric("block count total overflows u64".into()))?;
        Ok(Self {
            level,
            total,
            counts,
        })
    }

    /// Checks the internal invariants, e.g. after deserialization.
    pub fn validate(&self) -> Result<()> {
        check_level(self.level)?;
        if self.counts.len() != 1usize << self.level {
            return Err(Error::Contract(format!(
                "level {} requires {} counts, found {}",
                self.level,
                1u64 << self.level,
                self.counts.len()
            )));
        }
        let sum = self
            .counts
            .iter()
            .try_fold(0u64, |acc, &c| acc.checked_add(c));
        if sum != Some(self.total) {
            return Err(Error::Contract(format!(
                "counts sum to {sum:?}, total says {}",
                self.total
            )));
        }
        Ok(())
    }

    /// Number of distinct substrings, `2^level`.
    pub fn alphabet_size(&self) -> usize {
        self.counts.len()
    }

    fn add_assign(&mut self, other: &BlockCounts) {
        for (a, b) in self.counts.iter_mut().zip(&other.counts) {
            *a += b;
        }
        self.total += other.total;
    }
}

/// Renders substring index `j` at `level` as its bit string, e.g. `(2, 2) -> "10"`.
pub fn substring_bits(j: u64, level: u32) -> String {
    (0..level)
        .rev()
        .map(|s| if (j >> s) & 1 == 1 { '1' } else { '0' })
        .collect()
}

fn check_level(level: u32) -> Result<()> {
    if level == 0 || level > MAX_BLOCK_LEVEL {
        return Err(Error::Domain(format!(
            "block level {level} outside supported range 1..={MAX_BLOCK_LEVEL}"
        )));
    }
    Ok(())
}

/// Smallest sequence length admitting Borel level `level`, `2^(2^level)`.
///
/// Returns `None` when the length does not fit in `u128` (level > 6).
pub fn min_length_for_level(level: u32) -> Option<u128> {
    if level > 6 {
        return None;
    }
    let exp = 1u32 << level;
    1u128.checked_shl(exp)
}

/// `floor(log2(log2(n)))`, computed exactly as the largest `i` with
/// `2^(2^i) <= n`.
pub fn max_borel_level(n: u64) -> Result<u32> {
    if n < 4 {
        return Err(Error::Domain(format!(
            "no admissible Borel level for n = {n} (need n >= 4)"
        )));
    }
    let n = u128::from(n);
    let mut level = 1;
    while let Some(min) = min_length_for_level(level + 1) {
        if min > n {
            break;
        }
        level += 1;
    }
    Ok(level)
}

/// Counts blocks of `level` bits in `seq`.
pub fn count_blocks(seq: &BitSequence, level: u32) -> Result<BlockCounts> {
    let mut counts = BlockCounts::zero(level)?;
    if seq.len() < u64::from(level) {
        return Err(Error::EmptyInput(format!(
            "sequence of {} bits holds no block of length {level}",
            seq.len()
        )));
    }
    let end = seq.len() - seq.len() % u64::from(level);
    count_range(seq, 0, end, &mut counts);
    Ok(counts)
}

/// Parallel variant of [`count_blocks`]; the result is bit-identical.
///
/// The sequence is split at offsets that are multiples of both 8 and
/// `level`, counted independently, and merged.
pub fn count_blocks_par(seq: &BitSequence, level: u32) -> Result<BlockCounts> {
    const MIN_CHUNK_BITS: u64 = 1 << 20;
    let zero = BlockCounts::zero(level)?;
    if seq.len() < u64::from(level) {
        return Err(Error::EmptyInput(format!(
            "sequence of {} bits holds no block of length {level}",
            seq.len()
        )));
    }
    let l = u64::from(level);
    let end = seq.len() - seq.len() % l;
    let align = lcm(8, l);
    let threads = rayon::current_num_threads().max(1) as u64;
    let chunk = (end / (4 * threads)).max(MIN_CHUNK_BITS);
    let chunk = chunk.div_ceil(align) * align;
    let starts: Vec<u64> = (0..end).step_by(chunk as usize).collect();
    let merged = starts
        .into_par_iter()
        .map(|start| {
            let mut part = zero.clone();
            count_range(seq, start, (start + chunk).min(end), &mut part);
            part
        })
        .reduce(
            || zero.clone(),
            |mut a, b| {
                a.add_assign(&b);
                a
            },
        );
    Ok(merged)
}

fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

fn lcm(a: u64, b: u64) -> u64 {
    a / gcd(a, b) * b
}

/// Counts the blocks in `[start, end)`. `start` is a multiple of 8 and of
/// the level, `end - start` a multiple of the level.
fn count_range(seq: &BitSequence, start: u64, end: u64, out: &mut BlockCounts) {
    let level = out.level;
    let l = u64::from(level);
    debug_assert!(start % 8 == 0 && start % l == 0 && (end - start) % l == 0);
    let blocks = (end - start) / l;
    out.total += blocks;

    let bytes = seq.as_bytes();
    let mut k = start;
    match level {
        1 => {
            // Whole bytes by popcount, the tail bit by bit.
            let full = ((end - start) / 8) as usize;
            let first = (start / 8) as usize;
            let ones: u64 = bytes[first..first + full]
                .iter()
                .map(|b| u64::from(b.count_ones()))
                .sum();
            out.counts[1] += ones;
            out.counts[0] += full as u64 * 8 - ones;
            k = start + full as u64 * 8;
        }
        2 | 4 | 8 => {
            // Byte histogram, then split each byte value into its blocks.
            let full = ((end - start) / 8) as usize;
            let first = (start / 8) as usize;
            let mut hist = [0u64; 256];
            for &b in &bytes[first..first + full] {
                hist[b as usize] += 1;
            }
            let mask = (1u32 << level) - 1;
            for (value, &c) in hist.iter().enumerate() {
                if c == 0 {
                    continue;
                }
                let mut s = 8;
                while s > 0 {
                    s -= level;
                    out.counts[((value as u32 >> s) & mask) as usize] += c;
                }
            }
            k = start + full as u64 * 8;
        }
        _ => {}
    }
    while k < end {
        let j = seq.bits_at(k, level);
        out.counts[j as usize] += 1;
        k += l;
    }
}

/// Element-wise sum of two count vectors at the same level.
pub fn merge_counts(a: &BlockCounts, b: &BlockCounts) -> Result<BlockCounts> {
    if a.level != b.level || a.counts.len() != b.counts.len() {
        return Err(Error::Contract(format!(
            "cannot merge counts at level {} with counts at level {}",
            a.level, b.level
        )));
    }
    let mut out = a.clone();
    out.add_assign(b);
    Ok(out)
}

/// Counts blocks while streaming a file, without loading it whole.
///
/// For packed input `n` restricts the sequence to its first `n` bits.
pub fn count_blocks_streaming<R: Read>(
    reader: R,
    format: BitFormat,
    n: Option<u64>,
    level: u32,
) -> Result<BlockCounts> {
    let mut counts = BlockCounts::zero(level)?;
    let mut chunks = ChunkedBitReader::new(reader, format, level);
    if let (BitFormat::Packed, Some(n)) = (format, n) {
        chunks = chunks.with_bit_limit(n);
    }
    let mut seen = 0u64;
    for chunk in chunks {
        let chunk = chunk?;
        seen += chunk.len();
        let end = chunk.len() - chunk.len() % u64::from(level);
        count_range(&chunk, 0, end, &mut counts);
    }
    if seen < u64::from(level) {
        return Err(Error::EmptyInput(format!(
            "sequence of {seen} bits holds no block of length {level}"
        )));
    }
    Ok(counts)
}
