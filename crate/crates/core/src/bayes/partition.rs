//! Set partitions of the substring alphabet as restricted-growth strings.
//!
//! A partition of `{0, .., N-1}` is stored as `rgs[t]` = block id of element
//! `t`, with ids numbered in order of first appearance: `rgs[0] = 0` and
//! `rgs[t] <= 1 + max(rgs[..t])`. Each partition of the `2^i` substrings of
//! length `i` is one generative model at Borel level `i`: substrings in the
//! same block share a probability.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// Largest set size for which [`bell_number`] is exact in `u128`.
pub const MAX_BELL_INDEX: u32 = 26;

/// Largest set size [`enumerate_partitions`] will walk.
pub const MAX_ENUMERATION_SIZE: usize = 16;

/// A partition model, identified by its canonical restricted-growth string.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct PartitionModel {
    rgs: Vec<u32>,
    block_sizes: Vec<u64>,
}

impl PartitionModel {
    /// Validates and wraps a restricted-growth string.
    pub fn new(rgs: Vec<u32>) -> Result<Self> {
        if rgs.is_empty() {
            return Err(Error::Contract(
                "a partition needs at least one element".into(),
            ));
        }
        let mut block_sizes: Vec<u64> = Vec::new();
        for (t, &b) in rgs.iter().enumerate() {
            let b = b as usize;
            if b > block_sizes.len() {
                return Err(Error::Contract(format!(
                    "not a restricted-growth string: position {t} uses block {b} before block {}",
                    block_sizes.len()
                )));
            }
            if b == block_sizes.len() {
                block_sizes.push(0);
            }
            block_sizes[b] += 1;
        }
        Ok(Self { rgs, block_sizes })
    }

    /// The single-block (maximally random) model over `size` elements.
    pub fn one_block(size: usize) -> Result<Self> {
        Self::new(vec![0; size])
    }

    /// The fully distinct model: every element in its own block.
    pub fn fully_distinct(size: usize) -> Result<Self> {
        Self::new((0..size as u32).collect())
    }

    pub fn rgs(&self) -> &[u32] {
        &self.rgs
    }

    /// Number of elements `N` (substrings) being partitioned.
    pub fn size(&self) -> usize {
        self.rgs.len()
    }

    pub fn num_blocks(&self) -> usize {
        self.block_sizes.len()
    }

    pub fn block_sizes(&self) -> &[u64] {
        &self.block_sizes
    }

    /// Borel level `i` when `size = 2^i`, `None` otherwise.
    pub fn level(&self) -> Option<u32> {
        let n = self.rgs.len();
        (n >= 2 && n.is_power_of_two()).then(|| n.trailing_zeros())
    }

    pub fn is_one_block(&self) -> bool {
        self.block_sizes.len() == 1
    }

    /// The blocks as explicit element lists.
    pub fn blocks(&self) -> Vec<Vec<usize>> {
        let mut blocks = vec![Vec::new(); self.num_blocks()];
        for (t, &b) in self.rgs.iter().enumerate() {
            blocks[b as usize].push(t);
        }
        blocks
    }
}

/// Compact identifier: one base-36 digit per element when every block id is
/// below 36 (`"0112"`), otherwise dot-separated decimals (`"0.1.2"`).
impl fmt::Display for PartitionModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.num_blocks() <= 36 {
            for &b in &self.rgs {
                let c = char::from_digit(b, 36).expect("block id below 36");
                write!(f, "{c}")?;
            }
            Ok(())
        } else {
            for (t, b) in self.rgs.iter().enumerate() {
                if t > 0 {
                    f.write_str(".")?;
                }
                write!(f, "{b}")?;
            }
            Ok(())
        }
    }
}

impl FromStr for PartitionModel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = |offset: usize, what: &str| Error::Format {
            offset: offset as u64,
            message: format!("invalid partition identifier: {what}"),
        };
        let rgs = if s.contains('.') {
            let mut rgs = Vec::new();
            let mut offset = 0;
            for part in s.split('.') {
                let b = part
                    .parse::<u32>()
                    .map_err(|_| bad(offset, "expected decimal block id"))?;
                rgs.push(b);
                offset += part.len() + 1;
            }
            rgs
        } else {
            s.char_indices()
                .map(|(k, c)| {
                    c.to_digit(36)
                        .filter(|_| !c.is_ascii_uppercase())
                        .ok_or_else(|| bad(k, "expected base-36 digit"))
                })
                .collect::<Result<Vec<_>>>()?
        };
        PartitionModel::new(rgs)
    }
}

impl Serialize for PartitionModel {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for PartitionModel {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// The `n`-th Bell number via the Bell triangle, exact for `n <= 26`.
pub fn bell_number(n: u32) -> Result<u128> {
    if n > MAX_BELL_INDEX {
        return Err(Error::Domain(format!(
            "Bell number B_{n} exceeds 128-bit range (max index {MAX_BELL_INDEX})"
        )));
    }
    if n == 0 {
        return Ok(1);
    }
    let mut row = vec![1u128];
    for _ in 1..n {
        let mut next = Vec::with_capacity(row.len() + 1);
        next.push(*row.last().expect("rows are nonempty"));
        for &v in &row {
            let prev = *next.last().expect("seeded above");
            next.push(prev + v);
        }
        row = next;
    }
    Ok(*row.last().expect("rows are nonempty"))
}

/// Number of partitions of `n` elements into at most `max_blocks` blocks
/// (partial sums of Stirling numbers of the second kind).
pub fn partition_count(n: usize, max_blocks: Option<usize>) -> u128 {
    if n == 0 {
        return 1;
    }
    let cap = max_blocks.unwrap_or(n).min(n);
    // stirling[k] = S(m, k) for the current m.
    let mut stirling = vec![0u128; n + 1];
    stirling[0] = 1;
    for m in 1..=n {
        for k in (1..=m.min(n)).rev() {
            stirling[k] = (k as u128) * stirling[k] + stirling[k - 1];
        }
        stirling[0] = 0;
    }
    stirling[1..=cap].iter().sum()
}

/// Lexicographic iterator over canonical restricted-growth strings.
#[derive(Debug, Clone)]
pub struct Partitions {
    rgs: Vec<u32>,
    /// `prefix_max[t] = max(rgs[..=t])`.
    prefix_max: Vec<u32>,
    cap: u32,
    started: bool,
    done: bool,
}

impl Partitions {
    fn advance(&mut self) -> bool {
        let n = self.rgs.len();
        for t in (1..n).rev() {
            let limit = self.prefix_max[t - 1] + 1;
            if self.rgs[t] < limit && self.rgs[t] + 1 < self.cap {
                self.rgs[t] += 1;
                self.prefix_max[t] = self.prefix_max[t - 1].max(self.rgs[t]);
                for u in t + 1..n {
                    self.rgs[u] = 0;
                    self.prefix_max[u] = self.prefix_max[t];
                }
                return true;
            }
        }
        false
    }
}

impl Iterator for Partitions {
    type Item = PartitionModel;

    fn next(&mut self) -> Option<PartitionModel> {
        if self.done {
            return None;
        }
        if self.started && !self.advance() {
            self.done = true;
            return None;
        }
        self.started = true;
        Some(PartitionModel::new(self.rgs.clone()).expect("enumerator keeps strings canonical"))
    }
}

/// Enumerates every partition of `{0, .., n-1}` with at most `max_blocks`
/// blocks, in lexicographic order of the restricted-growth string. The
/// one-block partition always comes first.
pub fn enumerate_partitions(n: usize, max_blocks: Option<usize>) -> Result<Partitions> {
    if n == 0 {
        return Err(Error::Domain("cannot partition an empty set".into()));
    }
    if n > MAX_ENUMERATION_SIZE {
        return Err(Error::Domain(format!(
            "refusing to enumerate partitions of {n} elements (limit {MAX_ENUMERATION_SIZE})"
        )));
    }
    let cap = match max_blocks {
        Some(k) if k == 0 || k > n => {
            return Err(Error::Domain(format!(
                "max_blocks must lie in 1..={n}, got {k}"
            )))
        }
        Some(k) => k as u32,
        None => n as u32,
    };
    Ok(Partitions {
        rgs: vec![0; n],
        prefix_max: vec![0; n],
        cap,
        started: false,
        done: false,
    })
}
