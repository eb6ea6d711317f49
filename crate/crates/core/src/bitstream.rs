//! Packed bit sequences and their on-disk formats.
//!
//! Two formats are supported and always selected explicitly by the caller:
//!
//! - **ASCII**: the characters `'0'` and `'1'`, with spaces, tabs, carriage
//!   returns and newlines ignored anywhere in the file.
//! - **Packed**: raw bytes, 8 bits per byte, most significant bit first.
//!   Bit `k` of the sequence is bit `7 - (k % 8)` of byte `k / 8`.

use std::fmt;
use std::fs;
use std::io::{self, Read, Write};
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// On-disk bit sequence encoding.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BitFormat {
    Ascii,
    Packed,
}

impl fmt::Display for BitFormat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            BitFormat::Ascii => "ascii",
            BitFormat::Packed => "packed",
        })
    }
}

impl FromStr for BitFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "ascii" => Ok(BitFormat::Ascii),
            "packed" | "binary" => Ok(BitFormat::Packed),
            other => Err(Error::Domain(format!("unknown bit format '{other}'"))),
        }
    }
}

/// An immutable sequence of `n` bits stored 8 per byte, MSB first.
///
/// Pad bits in the final byte are always zero.
#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct BitSequence {
    bytes: Vec<u8>,
    len: u64,
}

impl fmt::Debug for BitSequence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        const PREVIEW: u64 = 64;
        let shown: String = self
            .iter()
            .take(PREVIEW as usize)
            .map(|b| if b { '1' } else { '0' })
            .collect();
        let ellipsis = if self.len > PREVIEW { "..." } else { "" };
        write!(f, "BitSequence(n={}, {shown}{ellipsis})", self.len)
    }
}

impl BitSequence {
    pub fn new() -> Self {
        Self::default()
    }

    /// Wraps packed MSB-first bytes. With `n = None` every bit of every byte
    /// belongs to the sequence.
    pub fn from_packed(mut bytes: Vec<u8>, n: Option<u64>) -> Result<Self> {
        let available = bytes.len() as u64 * 8;
        let len = n.unwrap_or(available);
        if len > available {
            return Err(Error::Length {
                requested: len,
                available,
            });
        }
        bytes.truncate(len.div_ceil(8) as usize);
        let pad = (bytes.len() as u64 * 8 - len) as u32;
        if pad > 0 {
            if let Some(last) = bytes.last_mut() {
                *last &= 0xFFu8 << pad;
            }
        }
        Ok(Self { bytes, len })
    }

    /// Builds a sequence from `0`/`1` (or `false`/`true`) values.
    pub fn from_bits<I, B>(bits: I) -> Self
    where
        I: IntoIterator<Item = B>,
        B: Into<Bit>,
    {
        let mut builder = BitSequenceBuilder::new();
        for b in bits {
            builder.push(b.into().0);
        }
        builder.finish()
    }

    pub fn len(&self) -> u64 {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    /// Packed storage, `ceil(n/8)` bytes.
    pub fn as_bytes(&self) -> &[u8] {
        &self.bytes
    }

    pub fn into_bytes(self) -> Vec<u8> {
        self.bytes
    }

    /// Returns bit `k` as 0 or 1.
    pub fn bit_at(&self, k: u64) -> Result<u8> {
        if k >= self.len {
            return Err(Error::Range {
                index: k,
                len: self.len,
            });
        }
        Ok(self.bit_unchecked(k))
    }

    #[inline]
    fn bit_unchecked(&self, k: u64) -> u8 {
        (self.bytes[(k / 8) as usize] >> (7 - (k % 8))) & 1
    }

    pub fn iter(&self) -> impl Iterator<Item = bool> + '_ {
        (0..self.len).map(move |k| self.bit_unchecked(k) == 1)
    }

    pub fn count_ones(&self) -> u64 {
        self.bytes.iter().map(|b| u64::from(b.count_ones())).sum()
    }

    /// Reads `width <= 64` bits starting at bit `start` as a big-endian integer.
    ///
    /// Callers guarantee `start + width <= len`.
    #[inline]
    pub(crate) fn bits_at(&self, start: u64, width: u32) -> u64 {
        debug_assert!((1..=64).contains(&width));
        debug_assert!(start + u64::from(width) <= self.len);
        let first = (start / 8) as usize;
        let off = (start % 8) as u32;
        let needed = (off + width).div_ceil(8) as usize;
        let mut acc: u128 = 0;
        for &b in &self.bytes[first..first + needed] {
            acc = (acc << 8) | u128::from(b);
        }
        acc >>= needed as u32 * 8 - off - width;
        let mask = if width == 64 {
            u64::MAX
        } else {
            (1u64 << width) - 1
        };
        (acc as u64) & mask
    }

    /// Renders the sequence as `'0'`/`'1'` characters, optionally wrapping
    /// lines every `wrap` characters. Always ends with a newline unless empty.
    pub fn to_ascii(&self, wrap: Option<usize>) -> String {
        let mut out = Vec::with_capacity(self.len as usize + 1);
        self.write_ascii(&mut out, wrap)
            .expect("writing to a Vec cannot fail");
        String::from_utf8(out).expect("ASCII output")
    }

    pub fn write_ascii<W: Write>(&self, w: &mut W, wrap: Option<usize>) -> io::Result<()> {
        let wrap = wrap.filter(|&w| w > 0);
        let mut line = Vec::with_capacity(wrap.unwrap_or(4096).min(1 << 16));
        for (k, bit) in self.iter().enumerate() {
            line.push(if bit { b'1' } else { b'0' });
            let full = match wrap {
                Some(width) => (k + 1) % width == 0,
                None => line.len() >= 1 << 16,
            };
            if full {
                w.write_all(&line)?;
                if wrap.is_some() {
                    w.write_all(b"\n")?;
                }
                line.clear();
            }
        }
        w.write_all(&line)?;
        if self.len > 0 && (wrap.is_none() || !line.is_empty()) {
            w.write_all(b"\n")?;
        }
        Ok(())
    }

    pub fn write_packed<W: Write>(&self, w: &mut W) -> io::Result<()> {
        w.write_all(&self.bytes)
    }

    /// Copies bits `[start, end)` into a new sequence.
    pub fn slice(&self, start: u64, end: u64) -> Result<Self> {
        if start > end || end > self.len {
            return Err(Error::Range {
                index: end.max(start),
                len: self.len,
            });
        }
        let mut builder = BitSequenceBuilder::with_capacity(end - start);
        let mut k = start;
        while k < end {
            let width = (end - k).min(64) as u32;
            builder.push_bits(self.bits_at(k, width), width);
            k += u64::from(width);
        }
        Ok(builder.finish())
    }
}

/// A single bit, convertible from `bool` and from integer 0/1.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Bit(pub bool);

impl From<bool> for Bit {
    fn from(b: bool) -> Self {
        Bit(b)
    }
}

macro_rules! bit_from_int {
    ($($t:ty),*) => {$(
        impl From<$t> for Bit {
            fn from(b: $t) -> Self {
                Bit(b != 0)
            }
        }
    )*};
}

bit_from_int!(u8, u16, u32, u64, i32, usize);

/// Incremental construction of a [`BitSequence`].
#[derive(Debug, Default, Clone)]
pub struct BitSequenceBuilder {
    bytes: Vec<u8>,
    len: u64,
}

impl BitSequenceBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_capacity(bits: u64) -> Self {
        Self {
            bytes: Vec::with_capacity(bits.div_ceil(8) as usize),
            len: 0,
        }
    }

    pub fn len(&self) -> u64 {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    #[inline]
    pub fn push(&mut self, bit: bool) {
        let off = (self.len % 8) as u32;
        if off == 0 {
            self.bytes.push(0);
        }
        if bit {
            *self.bytes.last_mut().expect("byte pushed above") |= 0x80 >> off;
        }
        self.len += 1;
    }

    /// Appends the low `width` bits of `value`, most significant first.
    pub fn push_bits(&mut self, value: u64, width: u32) {
        for s in (0..width).rev() {
            self.push((value >> s) & 1 == 1);
        }
    }

    pub fn finish(self) -> BitSequence {
        BitSequence {
            bytes: self.bytes,
            len: self.len,
        }
    }
}

fn is_ascii_space(b: u8) -> bool {
    matches!(b, b' ' | b'\t' | b'\n' | b'\r')
}

/// Parses the ASCII format from an in-memory buffer.
pub fn parse_ascii(data: &[u8]) -> Result<BitSequence> {
    let mut builder = BitSequenceBuilder::with_capacity(data.len() as u64);
    for (offset, &b) in data.iter().enumerate() {
        match b {
            b'0' => builder.push(false),
            b'1' => builder.push(true),
            b if is_ascii_space(b) => {}
            other => {
                return Err(Error::Format {
                    offset: offset as u64,
                    message: format!(
                        "unexpected byte 0x{other:02x}, expected '0', '1' or whitespace"
                    ),
                })
            }
        }
    }
    Ok(builder.finish())
}

pub fn load_ascii<P: AsRef<Path>>(path: P) -> Result<BitSequence> {
    parse_ascii(&fs::read(path)?)
}

/// Loads a packed file. With `n = None` the sequence spans every byte.
pub fn load_packed<P: AsRef<Path>>(path: P, n: Option<u64>) -> Result<BitSequence> {
    BitSequence::from_packed(fs::read(path)?, n)
}

/// Loads `path` in the given format. `n` only applies to packed input.
pub fn load<P: AsRef<Path>>(path: P, format: BitFormat, n: Option<u64>) -> Result<BitSequence> {
    match format {
        BitFormat::Ascii => load_ascii(path),
        BitFormat::Packed => load_packed(path, n),
    }
}

/// Default number of blocks per streamed chunk.
const BLOCKS_PER_CHUNK: u64 = 1 << 16;

/// Streams a bit file in chunks whose bit length is a multiple of both 8 and
/// the consumer's block length, so that no block straddles two chunks. Only
/// the final chunk may be shorter.
pub struct ChunkedBitReader<R> {
    inner: R,
    format: BitFormat,
    chunk_bits: u64,
    limit: Option<u64>,
    emitted: u64,
    offset: u64,
    buf: Vec<u8>,
    pos: usize,
    filled: usize,
    eof: bool,
    done: bool,
}

impl<R: Read> ChunkedBitReader<R> {
    pub fn new(inner: R, format: BitFormat, block_len: u32) -> Self {
        Self::with_chunk_blocks(inner, format, block_len, BLOCKS_PER_CHUNK)
    }

    /// `blocks_per_chunk` is rounded so that chunks stay byte aligned.
    pub fn with_chunk_blocks(
        inner: R,
        format: BitFormat,
        block_len: u32,
        blocks_per_chunk: u64,
    ) -> Self {
        let block_len = u64::from(block_len.max(1));
        let chunk_bits = block_len * 8 * blocks_per_chunk.max(1).div_ceil(8);
        Self {
            inner,
            format,
            chunk_bits,
            limit: None,
            emitted: 0,
            offset: 0,
            buf: vec![0; 1 << 16],
            pos: 0,
            filled: 0,
            eof: false,
            done: false,
        }
    }

    /// Restricts packed input to its first `n` bits; reading fails with a
    /// length error if the input is shorter.
    pub fn with_bit_limit(mut self, n: u64) -> Self {
        self.limit = Some(n);
        self
    }

    pub fn chunk_bits(&self) -> u64 {
        self.chunk_bits
    }

    fn refill(&mut self) -> io::Result<()> {
        if self.pos < self.filled || self.eof {
            return Ok(());
        }
        loop {
            match self.inner.read(&mut self.buf) {
                Ok(0) => {
                    self.eof = true;
                    self.pos = 0;
                    self.filled = 0;
                    return Ok(());
                }
                Ok(k) => {
                    self.pos = 0;
                    self.filled = k;
                    return Ok(());
                }
                Err(e) if e.kind() == io::ErrorKind::Interrupted => continue,
                Err(e) => return Err(e),
            }
        }
    }

    fn next_packed(&mut self) -> Result<Option<BitSequence>> {
        let want_bits = match self.limit {
            Some(limit) => (limit - self.emitted).min(self.chunk_bits),
            None => self.chunk_bits,
        };
        if self.limit.is_some() && want_bits == 0 {
            return Ok(None);
        }
        let want_bytes = want_bits.div_ceil(8) as usize;
        let mut bytes = Vec::with_capacity(want_bytes);
        while bytes.len() < want_bytes {
            self.refill()?;
            if self.eof {
                break;
            }
            let take = (want_bytes - bytes.len()).min(self.filled - self.pos);
            bytes.extend_from_slice(&self.buf[self.pos..self.pos + take]);
            self.pos += take;
        }
        self.offset += bytes.len() as u64;
        if let Some(limit) = self.limit {
            if (bytes.len() as u64) < want_bytes as u64 {
                return Err(Error::Length {
                    requested: limit,
                    available: self.emitted + bytes.len() as u64 * 8,
                });
            }
            let seq = BitSequence::from_packed(bytes, Some(want_bits))?;
            self.emitted += want_bits;
            return Ok(Some(seq));
        }
        if bytes.is_empty() {
            return Ok(None);
        }
        let seq = BitSequence::from_packed(bytes, None)?;
        self.emitted += seq.len();
        Ok(Some(seq))
    }

    fn next_ascii(&mut self) -> Result<Option<BitSequence>> {
        let mut builder = BitSequenceBuilder::with_capacity(self.chunk_bits);
        while builder.len() < self.chunk_bits {
            self.refill()?;
            if self.eof {
                break;
            }
            while self.pos < self.filled && builder.len() < self.chunk_bits {
                match self.buf[self.pos] {
                    b'0' => builder.push(false),
                    b'1' => builder.push(true),
                    b if is_ascii_space(b) => {}
                    other => {
                        return Err(Error::Format {
                            offset: self.offset,
                            message: format!(
                                "unexpected byte 0x{other:02x}, expected '0', '1' or whitespace"
                            ),
                        })
                    }
                }
                self.pos += 1;
                self.offset += 1;
            }
        }
        if builder.is_empty() {
            return Ok(None);
        }
        self.emitted += builder.len();
        Ok(Some(builder.finish()))
    }
}

impl<R: Read> Iterator for ChunkedBitReader<R> {
    type Item = Result<BitSequence>;

    fn next(&mut self) -> Option<Self::Item> {
        if self.done {
            return None;
        }
        let next = match self.format {
            BitFormat::Packed => self.next_packed(),
            BitFormat::Ascii => self.next_ascii(),
        };
        match next {
            Ok(Some(seq)) => Some(Ok(seq)),
            Ok(None) => {
                self.done = true;
                None
            }
            Err(e) => {
                self.done = true;
                Some(Err(e))
            }
        }
    }
}
