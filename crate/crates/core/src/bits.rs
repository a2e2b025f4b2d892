//! Packed bit strings.
//!
//! Bit `i` of a [`BitString`] lives in word `i / 64` at bit position `i % 64`
//! (least significant first). All unused high bits of the final word are kept
//! at zero so that equality and hashing can compare the words directly.

use std::fmt;

use rand::Rng;
use serde::{Deserialize, Serialize};

#[derive(Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct BitString {
    words: Vec<u64>,
    len: usize,
}

impl BitString {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_capacity(bits: usize) -> Self {
        Self {
            words: Vec::with_capacity(bits.div_ceil(64)),
            len: 0,
        }
    }

    pub fn zeros(len: usize) -> Self {
        Self {
            words: vec![0; len.div_ceil(64)],
            len,
        }
    }

    pub fn constant(bit: bool, len: usize) -> Self {
        if !bit {
            return Self::zeros(len);
        }
        let mut s = Self {
            words: vec![u64::MAX; len.div_ceil(64)],
            len,
        };
        s.clear_tail();
        s
    }

    pub fn random<R: Rng + ?Sized>(len: usize, rng: &mut R) -> Self {
        let mut s = Self {
            words: (0..len.div_ceil(64)).map(|_| rng.gen()).collect(),
            len,
        };
        s.clear_tail();
        s
    }

    pub fn from_bools<I: IntoIterator<Item = bool>>(bits: I) -> Self {
        let mut s = Self::new();
        for b in bits {
            s.push(b);
        }
        s
    }

    /// Parses a string of `'0'`/`'1'` characters; whitespace and `_` are ignored.
    pub fn parse(text: &str) -> Option<Self> {
        let mut s = Self::new();
        for c in text.chars() {
            match c {
                '0' => s.push(false),
                '1' => s.push(true),
                c if c.is_whitespace() || c == '_' => {}
                _ => return None,
            }
        }
        Some(s)
    }

    /// The low `width` bits of `value`, most significant bit first.
    pub fn from_uint(value: u64, width: usize) -> Self {
        let mut s = Self::with_capacity(width);
        s.push_uint(value, width);
        s
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn get(&self, i: usize) -> bool {
        assert!(i < self.len, "bit index {i} out of range for length {}", self.len);
        (self.words[i / 64] >> (i % 64)) & 1 == 1
    }

    pub fn set(&mut self, i: usize, bit: bool) {
        assert!(i < self.len, "bit index {i} out of range for length {}", self.len);
        let mask = 1u64 << (i % 64);
        if bit {
            self.words[i / 64] |= mask;
        } else {
            self.words[i / 64] &= !mask;
        }
    }

    pub fn flip(&mut self, i: usize) {
        assert!(i < self.len, "bit index {i} out of range for length {}", self.len);
        self.words[i / 64] ^= 1u64 << (i % 64);
    }

    pub fn push(&mut self, bit: bool) {
        if self.len.is_multiple_of(64) {
            self.words.push(0);
        }
        if bit {
            self.words[self.len / 64] |= 1u64 << (self.len % 64);
        }
        self.len += 1;
    }

    /// Appends the low `width` bits of `value`, most significant bit first.
    pub fn push_uint(&mut self, value: u64, width: usize) {
        debug_assert!(width <= 64);
        for k in (0..width).rev() {
            self.push((value >> k) & 1 == 1);
        }
    }

    /// Reads `width` bits starting at `start` as an unsigned integer, most significant bit first.
    pub fn read_uint(&self, start: usize, width: usize) -> u64 {
        debug_assert!(width <= 64);
        (start..start + width).fold(0u64, |acc, i| (acc << 1) | self.get(i) as u64)
    }

    pub fn extend_from(&mut self, other: &BitString) {
        if self.len.is_multiple_of(64) {
            self.words.truncate(self.len / 64);
            self.words.extend_from_slice(&other.words);
            self.len += other.len;
            return;
        }
        for b in other.iter() {
            self.push(b);
        }
    }

    pub fn concat(&self, other: &BitString) -> BitString {
        let mut out = self.clone();
        out.extend_from(other);
        out
    }

    /// `s[start, end]` with the convention that an `end` past the string is clamped.
    pub fn slice(&self, start: usize, end: usize) -> BitString {
        let end = end.min(self.len);
        if start >= end {
            return BitString::new();
        }
        let mut out = BitString::with_capacity(end - start);
        if start.is_multiple_of(64) {
            out.words
                .extend_from_slice(&self.words[start / 64..end.div_ceil(64)]);
            out.len = end - start;
            out.clear_tail();
            return out;
        }
        for i in start..end {
            out.push(self.get(i));
        }
        out
    }

    pub fn truncate(&mut self, len: usize) {
        if len >= self.len {
            return;
        }
        self.len = len;
        self.words.truncate(len.div_ceil(64));
        self.clear_tail();
    }

    pub fn iter(&self) -> impl Iterator<Item = bool> + '_ {
        (0..self.len).map(move |i| self.get(i))
    }

    pub fn count_ones(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn is_zero(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    /// In-place XOR with a string of the same length.
    pub fn xor_assign(&mut self, other: &BitString) {
        assert_eq!(self.len, other.len, "xor of unequal lengths");
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a ^= b;
        }
    }

    pub fn xor(&self, other: &BitString) -> BitString {
        let mut out = self.clone();
        out.xor_assign(other);
        out
    }

    pub fn hamming_distance(&self, other: &BitString) -> usize {
        assert_eq!(self.len, other.len, "distance of unequal lengths");
        self.words
            .iter()
            .zip(&other.words)
            .map(|(a, b)| (a ^ b).count_ones() as usize)
            .sum()
    }

    /// Number of indices `i` with `s[i] != s[i+1]`.
    pub fn alternations(&self) -> usize {
        if self.len < 2 {
            return 0;
        }
        let mut total = 0usize;
        let last_word = (self.len - 1) / 64;
        for (k, &w) in self.words.iter().enumerate() {
            // bit j of `diff` compares positions 64k+j and 64k+j+1
            let next = if k + 1 < self.words.len() {
                self.words[k + 1] & 1
            } else {
                0
            };
            let shifted = (w >> 1) | (next << 63);
            let mut diff = w ^ shifted;
            if k == last_word {
                let valid = (self.len - 1) - 64 * k; // comparisons starting in this word
                diff &= if valid >= 64 { u64::MAX } else { (1u64 << valid) - 1 };
            }
            total += diff.count_ones() as usize;
            if k == last_word {
                break;
            }
        }
        total
    }

    /// Packs bits into bytes, eight at a time, most significant bit first; the
    /// final byte is zero-filled.
    pub fn to_bytes_msb(&self) -> Vec<u8> {
        (0..self.len.div_ceil(8))
            .map(|k| {
                let mut byte = 0u8;
                for j in 0..8 {
                    let i = 8 * k + j;
                    byte = (byte << 1) | (i < self.len && self.get(i)) as u8;
                }
                byte
            })
            .collect()
    }

    /// Inverse of [`to_bytes_msb`](Self::to_bytes_msb), keeping the first `len` bits.
    pub fn from_bytes_msb(bytes: &[u8], len: usize) -> BitString {
        let mut s = BitString::with_capacity(len);
        for i in 0..len {
            s.push((bytes[i / 8] >> (7 - i % 8)) & 1 == 1);
        }
        s
    }

    fn clear_tail(&mut self) {
        let r = self.len % 64;
        if r != 0 {
            if let Some(last) = self.words.last_mut() {
                *last &= (1u64 << r) - 1;
            }
        }
    }
}

impl fmt::Debug for BitString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "BitString(\"{self}\")")
    }
}

impl fmt::Display for BitString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for b in self.iter() {
            f.write_str(if b { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl FromIterator<bool> for BitString {
    fn from_iter<I: IntoIterator<Item = bool>>(iter: I) -> Self {
        Self::from_bools(iter)
    }
}
