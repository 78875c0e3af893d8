use std::fmt;

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::BitError;

/// Fixed-length bit string, packed LSB-first into 64-bit words.
///
/// Length is part of the value: `0` and `00` are different strings and
/// binary operations never zero-extend.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct BitString {
    len: usize,
    words: Vec<u64>,
}

fn word_count(len: usize) -> usize {
    len.div_ceil(64)
}

impl BitString {
    pub fn zeros(len: usize) -> Self {
        Self { len, words: vec![0; word_count(len)] }
    }

    pub fn ones(len: usize) -> Self {
        let mut b = Self { len, words: vec![u64::MAX; word_count(len)] };
        b.clear_tail();
        b
    }

    pub fn random<R: Rng + ?Sized>(len: usize, rng: &mut R) -> Self {
        let mut b = Self { len, words: (0..word_count(len)).map(|_| rng.random()).collect() };
        b.clear_tail();
        b
    }

    pub(crate) fn from_words(len: usize, mut words: Vec<u64>) -> Self {
        words.resize(word_count(len), 0);
        let mut b = Self { len, words };
        b.clear_tail();
        b
    }

    pub fn from_bits(bits: &[bool]) -> Self {
        let mut b = Self::zeros(bits.len());
        for (i, &v) in bits.iter().enumerate() {
            b.set(i, v);
        }
        b
    }

    /// Parses a string of `0`/`1` characters, e.g. `"1011"`.
    pub fn parse(s: &str) -> Result<Self, BitError> {
        let bits = s
            .chars()
            .map(|c| match c {
                '0' => Ok(false),
                '1' => Ok(true),
                other => Err(BitError::Parse(format!("unexpected character {other:?}"))),
            })
            .collect::<Result<Vec<_>, _>>()?;
        Ok(Self::from_bits(&bits))
    }

    /// Low `len` bits of `value`, bit `i` of the string being bit `i` of the integer.
    pub fn from_u64(value: u64, len: usize) -> Self {
        assert!(len <= 64, "from_u64 supports at most 64 bits");
        let mut b = Self { len, words: vec![value; word_count(len)] };
        b.clear_tail();
        b
    }

    /// Inverse of [`BitString::from_u64`]; panics above 64 bits.
    pub fn to_u64(&self) -> u64 {
        assert!(self.len <= 64, "to_u64 supports at most 64 bits");
        self.words.first().copied().unwrap_or(0)
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

    pub fn set(&mut self, i: usize, v: bool) {
        assert!(i < self.len, "bit index {i} out of range for length {}", self.len);
        let mask = 1u64 << (i % 64);
        if v {
            self.words[i / 64] |= mask;
        } else {
            self.words[i / 64] &= !mask;
        }
    }

    pub fn flip(&mut self, i: usize) {
        assert!(i < self.len, "bit index {i} out of range for length {}", self.len);
        self.words[i / 64] ^= 1u64 << (i % 64);
    }

    pub fn iter(&self) -> impl Iterator<Item = bool> + '_ {
        (0..self.len).map(move |i| self.get(i))
    }

    /// Indices of the set bits, ascending.
    pub fn positions(&self) -> impl Iterator<Item = usize> + '_ {
        self.words.iter().enumerate().flat_map(|(wi, &w)| {
            let mut bits = w;
            std::iter::from_fn(move || {
                (bits != 0).then(|| {
                    let p = 64 * wi + bits.trailing_zeros() as usize;
                    bits &= bits - 1;
                    p
                })
            })
        })
    }

    pub fn count_ones(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn words(&self) -> &[u64] {
        &self.words
    }

    pub fn xor(&self, other: &Self) -> Result<Self, BitError> {
        self.check_len(other)?;
        Ok(self.zip_words(other, |a, b| a ^ b))
    }

    pub fn and(&self, other: &Self) -> Result<Self, BitError> {
        self.check_len(other)?;
        Ok(self.zip_words(other, |a, b| a & b))
    }

    pub fn not(&self) -> Self {
        let mut b = Self { len: self.len, words: self.words.iter().map(|w| !w).collect() };
        b.clear_tail();
        b
    }

    /// In-place XOR; lengths must match.
    pub fn xor_assign(&mut self, other: &Self) -> Result<(), BitError> {
        self.check_len(other)?;
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a ^= b;
        }
        Ok(())
    }

    pub fn concat(&self, other: &Self) -> Self {
        let mut out = Self::zeros(self.len + other.len);
        out.words[..self.words.len()].copy_from_slice(&self.words);
        for (i, v) in other.iter().enumerate() {
            if v {
                out.set(self.len + i, true);
            }
        }
        out
    }

    pub fn concat_all<'a, I: IntoIterator<Item = &'a BitString>>(parts: I) -> Self {
        let parts: Vec<&BitString> = parts.into_iter().collect();
        let total = parts.iter().map(|p| p.len).sum();
        let mut out = Self::zeros(total);
        let mut at = 0;
        for p in parts {
            for (i, v) in p.iter().enumerate() {
                if v {
                    out.set(at + i, true);
                }
            }
            at += p.len;
        }
        out
    }

    /// Bits `start..start + len`.
    pub fn slice(&self, start: usize, len: usize) -> Self {
        assert!(start + len <= self.len, "slice {start}+{len} out of range for length {}", self.len);
        let mut out = Self::zeros(len);
        if start.is_multiple_of(64) {
            let w0 = start / 64;
            let n = out.words.len();
            out.words.copy_from_slice(&self.words[w0..w0 + n]);
            out.clear_tail();
            return out;
        }
        for wi in 0..out.words.len() {
            out.words[wi] = self.word_at(start + 64 * wi);
        }
        out.clear_tail();
        out
    }

    /// The 64 bits starting at bit offset `bit` (bits past the end read as zero).
    pub(crate) fn word_at(&self, bit: usize) -> u64 {
        let w = bit / 64;
        let off = bit % 64;
        let lo = self.words.get(w).copied().unwrap_or(0);
        if off == 0 {
            return lo;
        }
        let hi = self.words.get(w + 1).copied().unwrap_or(0);
        (lo >> off) | (hi << (64 - off))
    }

    /// Compact hexadecimal form `len:hex`, bytes taken little-endian from the packed words.
    pub fn to_hex(&self) -> String {
        let nbytes = self.len.div_ceil(8);
        let bytes: Vec<u8> = self.words.iter().flat_map(|w| w.to_le_bytes()).take(nbytes).collect();
        format!("{}:{}", self.len, hex::encode(bytes))
    }

    pub fn from_hex(s: &str) -> Result<Self, BitError> {
        let (len, body) = s.split_once(':').ok_or_else(|| BitError::Parse("missing length prefix".into()))?;
        let len: usize = len.parse().map_err(|_| BitError::Parse(format!("bad length {len:?}")))?;
        let bytes = hex::decode(body).map_err(|e| BitError::Parse(e.to_string()))?;
        if bytes.len() != len.div_ceil(8) {
            return Err(BitError::Parse("hex body does not match length".into()));
        }
        let mut out = Self::zeros(len);
        for (i, chunk) in bytes.chunks(8).enumerate() {
            let mut buf = [0u8; 8];
            buf[..chunk.len()].copy_from_slice(chunk);
            out.words[i] = u64::from_le_bytes(buf);
        }
        let before = out.clone();
        out.clear_tail();
        if out != before {
            return Err(BitError::Parse("bits set past declared length".into()));
        }
        Ok(out)
    }

    /// Bytes for hashing: length prefix then packed words.
    pub(crate) fn feed_bytes(&self) -> Vec<u8> {
        let mut v = Vec::with_capacity(8 + self.words.len() * 8);
        v.extend_from_slice(&(self.len as u64).to_le_bytes());
        for w in &self.words {
            v.extend_from_slice(&w.to_le_bytes());
        }
        v
    }

    fn check_len(&self, other: &Self) -> Result<(), BitError> {
        if self.len != other.len {
            return Err(BitError::LenMismatch { left: self.len, right: other.len });
        }
        Ok(())
    }

    fn zip_words(&self, other: &Self, f: impl Fn(u64, u64) -> u64) -> Self {
        Self { len: self.len, words: self.words.iter().zip(&other.words).map(|(a, b)| f(*a, *b)).collect() }
    }

    fn clear_tail(&mut self) {
        let rem = self.len % 64;
        if rem != 0 {
            if let Some(last) = self.words.last_mut() {
                *last &= (1u64 << rem) - 1;
            }
        }
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

impl fmt::Debug for BitString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.len <= 64 {
            write!(f, "BitString({self})")
        } else {
            write!(f, "BitString({})", self.to_hex())
        }
    }
}

impl Serialize for BitString {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_hex())
    }
}

impl<'de> Deserialize<'de> for BitString {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        BitString::from_hex(&s).map_err(serde::de::Error::custom)
    }
}

/// Number of positions where `a` and `b` differ.
pub fn hamming_distance(a: &BitString, b: &BitString) -> Result<usize, BitError> {
    a.check_len(b)?;
    Ok(a.words.iter().zip(&b.words).map(|(x, y)| (x ^ y).count_ones() as usize).sum())
}
