//! Fixed-length bit strings and their Hamming geometry.
//!
//! Bit index 0 is the leftmost (most significant) bit in every rendering,
//! both the binary `Display` form and the hexadecimal key-file form.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use rand::RngCore;
use thiserror::Error;

/// Largest token width accepted by the ciphers. Pads and analysis inputs
/// are plain `BitString`s and may be longer.
pub const L_MAX: usize = 4096;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum BitError {
    #[error("length mismatch: {left} bits vs {right} bits")]
    LengthMismatch { left: usize, right: usize },
    #[error("radius {radius} out of range for length {length}")]
    RadiusOutOfRange { radius: usize, length: usize },
    #[error("invalid hex digit {found:?} at position {position}")]
    InvalidHexDigit { position: usize, found: char },
    #[error("{length} bits do not fit in {digits} hex digits")]
    LengthOverflow { length: usize, digits: usize },
    #[error("invalid binary digit {found:?} at position {position}")]
    InvalidBinaryDigit { position: usize, found: char },
}

/// An ordered, fixed-length sequence of bits.
///
/// Stored packed, most significant bit first; bits past `len` in the last
/// word are always zero so derived equality is bit equality.
#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct BitString {
    len: usize,
    words: Vec<u64>,
}

#[inline]
fn mask_of(i: usize) -> u64 {
    1u64 << (63 - (i % 64))
}

impl BitString {
    pub fn zeros(len: usize) -> Self {
        BitString {
            len,
            words: vec![0; len.div_ceil(64)],
        }
    }

    pub fn ones(len: usize) -> Self {
        let mut b = BitString {
            len,
            words: vec![u64::MAX; len.div_ceil(64)],
        };
        b.clear_tail();
        b
    }

    pub fn from_bits<I: IntoIterator<Item = bool>>(bits: I) -> Self {
        let mut out = BitString::zeros(0);
        for bit in bits {
            if out.len.is_multiple_of(64) {
                out.words.push(0);
            }
            out.len += 1;
            if bit {
                out.words[(out.len - 1) / 64] |= mask_of(out.len - 1);
            }
        }
        out
    }

    /// The low `len` bits of `value`, rendered most significant first.
    pub fn from_u64(value: u64, len: usize) -> Self {
        assert!(len <= 64, "from_u64 supports at most 64 bits");
        if len == 0 {
            return BitString::zeros(0);
        }
        let masked = if len == 64 {
            value
        } else {
            value & ((1u64 << len) - 1)
        };
        BitString {
            len,
            words: vec![masked << (64 - len)],
        }
    }

    /// Inverse of [`BitString::from_u64`]; `None` when longer than 64 bits.
    pub fn to_u64(&self) -> Option<u64> {
        match self.len {
            0 => Some(0),
            1..=64 => Some(self.words[0] >> (64 - self.len)),
            _ => None,
        }
    }

    pub fn from_bytes(bytes: &[u8]) -> Self {
        let mut out = BitString::zeros(bytes.len() * 8);
        for (i, chunk) in bytes.chunks(8).enumerate() {
            let mut w = [0u8; 8];
            w[..chunk.len()].copy_from_slice(chunk);
            out.words[i] = u64::from_be_bytes(w);
        }
        out
    }

    /// Packs bits into bytes; a trailing partial byte is zero-padded on the right.
    pub fn to_bytes(&self) -> Vec<u8> {
        let n = self.len.div_ceil(8);
        self.words
            .iter()
            .flat_map(|w| w.to_be_bytes())
            .take(n)
            .collect()
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn get(&self, i: usize) -> bool {
        assert!(
            i < self.len,
            "bit index {i} out of range for length {}",
            self.len
        );
        self.words[i / 64] & mask_of(i) != 0
    }

    pub fn set(&mut self, i: usize, value: bool) {
        assert!(
            i < self.len,
            "bit index {i} out of range for length {}",
            self.len
        );
        if value {
            self.words[i / 64] |= mask_of(i);
        } else {
            self.words[i / 64] &= !mask_of(i);
        }
    }

    pub fn flip(&mut self, i: usize) {
        assert!(
            i < self.len,
            "bit index {i} out of range for length {}",
            self.len
        );
        self.words[i / 64] ^= mask_of(i);
    }

    pub fn iter(&self) -> impl Iterator<Item = bool> + '_ {
        (0..self.len).map(move |i| self.get(i))
    }

    pub fn count_ones(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn xor(&self, other: &BitString) -> Result<BitString, BitError> {
        self.check_len(other)?;
        Ok(BitString {
            len: self.len,
            words: self
                .words
                .iter()
                .zip(&other.words)
                .map(|(a, b)| a ^ b)
                .collect(),
        })
    }

    /// Concatenation, preserving bit order.
    pub fn concat<'a, I: IntoIterator<Item = &'a BitString>>(parts: I) -> BitString {
        BitString::from_bits(parts.into_iter().flat_map(|p| p.iter().collect::<Vec<_>>()))
    }

    /// Lowercase hex, most significant first, `ceil(len / 4)` digits.
    ///
    /// When `len` is not a multiple of four the string is read as a number,
    /// so the leading digit carries the implicit zero padding.
    pub fn to_hex(&self) -> String {
        let digits = self.len.div_ceil(4);
        let pad = digits * 4 - self.len;
        let mut out = String::with_capacity(digits);
        let mut acc = 0u8;
        let mut filled = pad;
        for bit in self.iter() {
            acc = (acc << 1) | bit as u8;
            filled += 1;
            if filled == 4 {
                out.push(char::from_digit(acc as u32, 16).unwrap());
                acc = 0;
                filled = 0;
            }
        }
        out
    }

    /// Parses `text` as hex and keeps the low `length` bits.
    ///
    /// Fails with [`BitError::LengthOverflow`] when `length` exceeds the digits
    /// supplied or when a dropped high bit is set.
    pub fn from_hex(text: &str, length: usize) -> Result<BitString, BitError> {
        let mut bits = Vec::with_capacity(text.len() * 4);
        for (position, found) in text.chars().enumerate() {
            let v = found
                .to_digit(16)
                .ok_or(BitError::InvalidHexDigit { position, found })?;
            for k in (0..4).rev() {
                bits.push((v >> k) & 1 == 1);
            }
        }
        let digits = text.chars().count();
        if length > bits.len() {
            return Err(BitError::LengthOverflow { length, digits });
        }
        let drop = bits.len() - length;
        if bits[..drop].iter().any(|&b| b) {
            return Err(BitError::LengthOverflow { length, digits });
        }
        Ok(BitString::from_bits(bits[drop..].iter().copied()))
    }

    fn check_len(&self, other: &BitString) -> Result<(), BitError> {
        if self.len != other.len {
            return Err(BitError::LengthMismatch {
                left: self.len,
                right: other.len,
            });
        }
        Ok(())
    }

    fn clear_tail(&mut self) {
        let rem = self.len % 64;
        if rem != 0 {
            if let Some(last) = self.words.last_mut() {
                *last &= !(u64::MAX >> rem);
            }
        }
    }
}

impl Ord for BitString {
    /// Lexicographic by bit, shorter-is-smaller on a common prefix.
    fn cmp(&self, other: &Self) -> Ordering {
        let common = self.len.min(other.len);
        let full = common / 64;
        for i in 0..full {
            match self.words[i].cmp(&other.words[i]) {
                Ordering::Equal => {}
                o => return o,
            }
        }
        for i in full * 64..common {
            match self.get(i).cmp(&other.get(i)) {
                Ordering::Equal => {}
                o => return o,
            }
        }
        self.len.cmp(&other.len)
    }
}

impl PartialOrd for BitString {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for BitString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for bit in self.iter() {
            f.write_str(if bit { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl fmt::Debug for BitString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "BitString({self})")
    }
}

impl FromStr for BitString {
    type Err = BitError;

    /// Parses a string of `0`/`1` characters.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        s.chars()
            .enumerate()
            .map(|(position, found)| match found {
                '0' => Ok(false),
                '1' => Ok(true),
                _ => Err(BitError::InvalidBinaryDigit { position, found }),
            })
            .collect::<Result<Vec<_>, _>>()
            .map(BitString::from_bits)
    }
}

/// Number of positions where `a` and `b` differ.
pub fn hamming(a: &BitString, b: &BitString) -> Result<usize, BitError> {
    a.check_len(b)?;
    Ok(a.words
        .iter()
        .zip(&b.words)
        .map(|(x, y)| (x ^ y).count_ones() as usize)
        .sum())
}

pub fn random_bits<R: RngCore + ?Sized>(length: usize, rng: &mut R) -> BitString {
    let mut out = BitString::zeros(length);
    for w in out.words.iter_mut() {
        *w = rng.next_u64();
    }
    out.clear_tail();
    out
}

/// `C(n, k)`, saturating at `u128::MAX`.
pub fn binomial(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        // acc * (n - i) / (i + 1) stays integral at every step
        acc = match acc.checked_mul((n - i) as u128) {
            Some(v) => v / (i as u128 + 1),
            None => return u128::MAX,
        };
    }
    acc
}

/// All strings at exactly `radius` from `center`.
///
/// Flip positions are enumerated as combinations in lexicographic order;
/// the iterator yields `C(center.len(), radius)` distinct strings.
pub fn sphere(center: &BitString, radius: usize) -> Result<Sphere, BitError> {
    if radius > center.len() {
        return Err(BitError::RadiusOutOfRange {
            radius,
            length: center.len(),
        });
    }
    Ok(Sphere {
        center: center.clone(),
        positions: (0..radius).collect(),
        done: false,
    })
}

pub struct Sphere {
    center: BitString,
    positions: Vec<usize>,
    done: bool,
}

impl Iterator for Sphere {
    type Item = BitString;

    fn next(&mut self) -> Option<BitString> {
        if self.done {
            return None;
        }
        let mut out = self.center.clone();
        for &p in &self.positions {
            out.flip(p);
        }
        // advance to the next combination
        let n = self.center.len();
        let k = self.positions.len();
        let mut i = k;
        loop {
            if i == 0 {
                self.done = true;
                break;
            }
            i -= 1;
            if self.positions[i] < n - k + i {
                self.positions[i] += 1;
                for j in i + 1..k {
                    self.positions[j] = self.positions[j - 1] + 1;
                }
                break;
            }
        }
        Some(out)
    }
}

/// Uniform draw from the sphere of `radius` around `center`.
pub fn random_on_sphere<R: RngCore + ?Sized>(
    center: &BitString,
    radius: usize,
    rng: &mut R,
) -> Result<BitString, BitError> {
    if radius > center.len() {
        return Err(BitError::RadiusOutOfRange {
            radius,
            length: center.len(),
        });
    }
    let mut out = center.clone();
    for p in rand::seq::index::sample(rng, center.len(), radius) {
        out.flip(p);
    }
    Ok(out)
}
