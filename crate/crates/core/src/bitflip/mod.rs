//! BitFlip: a Hamming-distance keyed polyalphabetic substitution.
//!
//! Each letter `i` owns a reference string `s_i` and a radius `h_i`. A token
//! `t` carries letter `i` when `H(s_i, t) == h_i` and no other letter's
//! relation holds for `t`. Every other token is chaff: it either matches no
//! letter or matches several, and the receiver drops it.

mod keyfile;

pub use keyfile::{format_key, format_tokens, parse_key, parse_tokens};

use std::collections::HashSet;

use rand::seq::SliceRandom;
use rand::{Rng, RngCore};
use thiserror::Error;

use crate::bitstring::{self, binomial, random_on_sphere, BitString, L_MAX};

/// Widest token space scanned exhaustively.
pub const EXHAUSTIVE_MAX_L: usize = 20;
/// Sphere sizes up to this are enumerated; larger ones are sampled.
const ENUMERATE_LIMIT: u128 = 1 << 16;
/// Hard ceiling for anything that must visit a whole sphere.
const SCAN_LIMIT: u128 = 1 << 24;
const REJECTION_ATTEMPTS: usize = 1 << 20;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum BitFlipError {
    #[error("alphabet has no letters")]
    EmptyAlphabet,
    #[error("token length must be in 1..={max}, got {l}")]
    BadLength { l: usize, max: usize },
    #[error("symbol {0:?} appears more than once")]
    DuplicateSymbol(char),
    #[error("letters {first} and {second} share the same reference string")]
    DuplicateString { first: usize, second: usize },
    #[error("letter {index} has {found} bits, expected {expected}")]
    WrongLength {
        index: usize,
        expected: usize,
        found: usize,
    },
    #[error("letter {index} has radius {h} outside 0..={l}")]
    RadiusOutOfRange { index: usize, h: usize, l: usize },
    #[error("{n} letters cannot have distinct {l}-bit strings")]
    TooManyLetters { n: usize, l: usize },
    #[error("letter index {index} out of range for {n} letters")]
    IndexOutOfRange { index: usize, n: usize },
    #[error("letter {index} has no unambiguous transmitter")]
    EmptyTransmitterSet { index: usize },
    #[error("alphabet has no chaff tokens")]
    EmptyChaffSet,
    #[error("token {position} has {found} bits, expected {expected}")]
    TokenLength {
        position: usize,
        expected: usize,
        found: usize,
    },
    #[error("symbol {symbol:?} at position {position} is not in the alphabet")]
    UnknownSymbol { position: usize, symbol: char },
    #[error("chaff rate must lie in [0, 1), got {0}")]
    ChaffRate(f64),
    #[error("token space of {l} bits is too large to enumerate")]
    TooLargeToEnumerate { l: usize },
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Letter {
    pub symbol: char,
    pub s: BitString,
    pub h: usize,
}

impl Letter {
    pub fn new(symbol: char, s: BitString, h: usize) -> Self {
        Letter { symbol, s, h }
    }

    fn relates(&self, t: &BitString) -> bool {
        bitstring::hamming(&self.s, t) == Ok(self.h)
    }
}

/// The BitFlip key: token width `l` and the letters.
///
/// Construction enforces the structural rules (distinct symbols, distinct
/// reference strings, radii within `0..=l`). Whether every letter can actually
/// be sent is a separate question answered by [`BitFlipAlphabet::validate`].
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct BitFlipAlphabet {
    l: usize,
    letters: Vec<Letter>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DecodeOutcome {
    Letter(usize),
    ChaffNone,
    /// Number of letters whose relation held.
    ChaffAmbiguous(usize),
}

impl DecodeOutcome {
    pub fn is_chaff(&self) -> bool {
        !matches!(self, DecodeOutcome::Letter(_))
    }
}

/// Exact token-space accounting for an alphabet.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ValidationReport {
    pub transmitter_counts: Vec<u128>,
    /// Tokens that decode to no letter or to several.
    pub chaff_count: u128,
    /// The subset of chaff matching two or more letters.
    pub ambiguous_count: u128,
    pub token_space: u128,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.transmitter_counts.iter().all(|&c| c >= 1)
    }

    pub fn min_transmitters(&self) -> u128 {
        self.transmitter_counts.iter().copied().min().unwrap_or(0)
    }

    pub fn chaff_fraction(&self) -> f64 {
        self.chaff_count as f64 / self.token_space as f64
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum EncodeMode {
    #[default]
    Randomized,
    /// Always sends the lexicographically smallest transmitter. A weak
    /// baseline for the analysis bench, not a usable cipher mode.
    Degenerate,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct DecodedStream {
    pub text: String,
    pub discarded: usize,
}

impl BitFlipAlphabet {
    pub fn new(l: usize, letters: Vec<Letter>) -> Result<Self, BitFlipError> {
        if l == 0 || l > L_MAX {
            return Err(BitFlipError::BadLength { l, max: L_MAX });
        }
        if letters.is_empty() {
            return Err(BitFlipError::EmptyAlphabet);
        }
        let mut symbols = HashSet::new();
        for (index, letter) in letters.iter().enumerate() {
            if !symbols.insert(letter.symbol) {
                return Err(BitFlipError::DuplicateSymbol(letter.symbol));
            }
            if letter.s.len() != l {
                return Err(BitFlipError::WrongLength {
                    index,
                    expected: l,
                    found: letter.s.len(),
                });
            }
            if letter.h > l {
                return Err(BitFlipError::RadiusOutOfRange {
                    index,
                    h: letter.h,
                    l,
                });
            }
        }
        for i in 0..letters.len() {
            for j in i + 1..letters.len() {
                if letters[i].s == letters[j].s {
                    return Err(BitFlipError::DuplicateString {
                        first: i,
                        second: j,
                    });
                }
            }
        }
        Ok(BitFlipAlphabet { l, letters })
    }

    /// Random structurally well-formed alphabet: distinct uniform strings,
    /// radii uniform in `0..=l`. Validity is not guaranteed.
    pub fn random<R: RngCore + ?Sized>(
        symbols: &[char],
        l: usize,
        rng: &mut R,
    ) -> Result<Self, BitFlipError> {
        if l == 0 || l > L_MAX {
            return Err(BitFlipError::BadLength { l, max: L_MAX });
        }
        if l < 64 && symbols.len() as u128 > 1u128 << l {
            return Err(BitFlipError::TooManyLetters {
                n: symbols.len(),
                l,
            });
        }
        let mut seen = HashSet::new();
        let mut letters = Vec::with_capacity(symbols.len());
        for &symbol in symbols {
            let s = loop {
                let s = bitstring::random_bits(l, rng);
                if seen.insert(s.clone()) {
                    break s;
                }
            };
            letters.push(Letter::new(symbol, s, rng.gen_range(0..=l)));
        }
        BitFlipAlphabet::new(l, letters)
    }

    /// Draws random alphabets until one passes [`BitFlipAlphabet::is_valid`].
    pub fn random_valid<R: RngCore + ?Sized>(
        symbols: &[char],
        l: usize,
        rng: &mut R,
        attempts: usize,
    ) -> Option<Self> {
        (0..attempts).find_map(|_| {
            let a = BitFlipAlphabet::random(symbols, l, rng).ok()?;
            a.is_valid(rng).then_some(a)
        })
    }

    pub fn l(&self) -> usize {
        self.l
    }

    pub fn letters(&self) -> &[Letter] {
        &self.letters
    }

    pub fn len(&self) -> usize {
        self.letters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.letters.is_empty()
    }

    pub fn symbols(&self) -> Vec<char> {
        self.letters.iter().map(|l| l.symbol).collect()
    }

    pub fn index_of(&self, symbol: char) -> Option<usize> {
        self.letters.iter().position(|l| l.symbol == symbol)
    }

    fn check_index(&self, index: usize) -> Result<(), BitFlipError> {
        if index >= self.letters.len() {
            return Err(BitFlipError::IndexOutOfRange {
                index,
                n: self.letters.len(),
            });
        }
        Ok(())
    }

    fn match_count(&self, t: &BitString) -> (usize, usize) {
        let mut count = 0;
        let mut first = 0;
        for (i, letter) in self.letters.iter().enumerate() {
            if letter.relates(t) {
                if count == 0 {
                    first = i;
                }
                count += 1;
            }
        }
        (count, first)
    }

    pub fn decode_token(&self, t: &BitString) -> Result<DecodeOutcome, BitFlipError> {
        if t.len() != self.l {
            return Err(BitFlipError::TokenLength {
                position: 0,
                expected: self.l,
                found: t.len(),
            });
        }
        Ok(match self.match_count(t) {
            (0, _) => DecodeOutcome::ChaffNone,
            (1, i) => DecodeOutcome::Letter(i),
            (k, _) => DecodeOutcome::ChaffAmbiguous(k),
        })
    }

    fn is_transmitter_of(&self, index: usize, t: &BitString) -> bool {
        matches!(self.match_count(t), (1, i) if i == index)
    }

    /// Transmitters of letter `index`, lazily, in sphere enumeration order.
    pub fn transmitters(
        &self,
        index: usize,
    ) -> Result<impl Iterator<Item = BitString> + '_, BitFlipError> {
        self.check_index(index)?;
        let letter = &self.letters[index];
        let sphere =
            bitstring::sphere(&letter.s, letter.h).expect("radius checked at construction");
        Ok(sphere.filter(move |t| self.is_transmitter_of(index, t)))
    }

    /// Exact counts of transmitters, chaff and ambiguous tokens.
    ///
    /// Scans all `2^l` tokens for `l <= 20`; for `l <= 64` walks each
    /// letter's sphere instead when the spheres are small enough.
    pub fn validate(&self) -> Result<ValidationReport, BitFlipError> {
        if self.l <= EXHAUSTIVE_MAX_L {
            return Ok(self.validate_exhaustive());
        }
        let sphere_total: u128 = self
            .letters
            .iter()
            .map(|x| binomial(self.l, x.h))
            .fold(0u128, |a, b| a.saturating_add(b));
        if self.l > 64 || sphere_total > SCAN_LIMIT {
            return Err(BitFlipError::TooLargeToEnumerate { l: self.l });
        }
        let mut counts = vec![0u128; self.letters.len()];
        let mut ambiguous = 0u128;
        for (i, letter) in self.letters.iter().enumerate() {
            for t in bitstring::sphere(&letter.s, letter.h).expect("radius checked") {
                match self.match_count(&t) {
                    (1, _) => counts[i] += 1,
                    // count each ambiguous token once, at its first matching letter
                    (_, first) if first == i => ambiguous += 1,
                    _ => {}
                }
            }
        }
        let space = 1u128 << self.l;
        let tx: u128 = counts.iter().sum();
        Ok(ValidationReport {
            transmitter_counts: counts,
            chaff_count: space - tx,
            ambiguous_count: ambiguous,
            token_space: space,
        })
    }

    fn validate_exhaustive(&self) -> ValidationReport {
        let refs: Vec<(u64, u32)> = self
            .letters
            .iter()
            .map(|x| (x.s.to_u64().expect("l <= 20"), x.h as u32))
            .collect();
        let mut counts = vec![0u128; refs.len()];
        let mut ambiguous = 0u128;
        for t in 0..1u64 << self.l {
            let mut hits = 0;
            let mut which = 0;
            for (i, &(s, h)) in refs.iter().enumerate() {
                if (s ^ t).count_ones() == h {
                    hits += 1;
                    which = i;
                }
            }
            match hits {
                0 => {}
                1 => counts[which] += 1,
                _ => ambiguous += 1,
            }
        }
        let space = 1u128 << self.l;
        let tx: u128 = counts.iter().sum();
        ValidationReport {
            transmitter_counts: counts,
            chaff_count: space - tx,
            ambiguous_count: ambiguous,
            token_space: space,
        }
    }

    /// True when every letter has at least one transmitter.
    ///
    /// Exact for small spheres. For spheres too large to walk, a sampled
    /// transmitter serves as the witness; failing to find one within the
    /// sampling budget counts as invalid.
    pub fn is_valid<R: RngCore + ?Sized>(&self, rng: &mut R) -> bool {
        (0..self.letters.len()).all(|i| self.find_transmitter(i, rng).is_some())
    }

    fn find_transmitter<R: RngCore + ?Sized>(
        &self,
        index: usize,
        rng: &mut R,
    ) -> Option<BitString> {
        let letter = &self.letters[index];
        if binomial(self.l, letter.h) <= 1 << 20 {
            self.transmitters(index).ok()?.next()
        } else {
            (0..4096)
                .map(|_| random_on_sphere(&letter.s, letter.h, rng).expect("radius checked"))
                .find(|t| self.is_transmitter_of(index, t))
        }
    }

    /// All chaff tokens in ascending order. Only for `l <= 20`.
    pub fn chaff_tokens(&self) -> Result<Vec<BitString>, BitFlipError> {
        if self.l > EXHAUSTIVE_MAX_L {
            return Err(BitFlipError::TooLargeToEnumerate { l: self.l });
        }
        Ok((0..1u64 << self.l)
            .map(|v| BitString::from_u64(v, self.l))
            .filter(|t| self.match_count(t).0 != 1)
            .collect())
    }

    /// Uniform draw from the transmitters of letter `index`.
    pub fn encode_letter<R: RngCore + ?Sized>(
        &self,
        index: usize,
        rng: &mut R,
    ) -> Result<BitString, BitFlipError> {
        self.check_index(index)?;
        Encoder::new(self).wheat(index, EncodeMode::Randomized, rng)
    }

    /// Uniform draw from the chaff set.
    pub fn chaff_token<R: RngCore + ?Sized>(&self, rng: &mut R) -> Result<BitString, BitFlipError> {
        Encoder::new(self).chaff(rng)
    }

    /// Encodes `msg` letter by letter, mixing in chaff.
    ///
    /// Every stream position is independently chaff with probability
    /// `chaff_rate`; wheat tokens keep message order.
    pub fn encode_message<R: RngCore + ?Sized>(
        &self,
        msg: &str,
        chaff_rate: f64,
        mode: EncodeMode,
        rng: &mut R,
    ) -> Result<Vec<BitString>, BitFlipError> {
        if !(0.0..1.0).contains(&chaff_rate) {
            return Err(BitFlipError::ChaffRate(chaff_rate));
        }
        let indices = msg
            .chars()
            .enumerate()
            .map(|(position, symbol)| {
                self.index_of(symbol)
                    .ok_or(BitFlipError::UnknownSymbol { position, symbol })
            })
            .collect::<Result<Vec<_>, _>>()?;
        let mut enc = Encoder::new(self);
        let mut out = Vec::with_capacity(indices.len());
        for &i in &indices {
            while chaff_rate > 0.0 && rng.gen::<f64>() < chaff_rate {
                out.push(enc.chaff(rng)?);
            }
            out.push(enc.wheat(i, mode, rng)?);
        }
        while chaff_rate > 0.0 && rng.gen::<f64>() < chaff_rate {
            out.push(enc.chaff(rng)?);
        }
        Ok(out)
    }

    /// Keeps the letters, drops the chaff.
    pub fn decode_stream(&self, tokens: &[BitString]) -> Result<DecodedStream, BitFlipError> {
        let mut out = DecodedStream::default();
        for (position, t) in tokens.iter().enumerate() {
            if t.len() != self.l {
                return Err(BitFlipError::TokenLength {
                    position,
                    expected: self.l,
                    found: t.len(),
                });
            }
            match self.match_count(t) {
                (1, i) => out.text.push(self.letters[i].symbol),
                _ => out.discarded += 1,
            }
        }
        Ok(out)
    }
}

/// Caches per-letter transmitter tables across one message.
struct Encoder<'a> {
    alphabet: &'a BitFlipAlphabet,
    tables: Vec<Option<Vec<BitString>>>,
    smallest: Vec<Option<BitString>>,
    chaff: Option<Vec<BitString>>,
}

impl<'a> Encoder<'a> {
    fn new(alphabet: &'a BitFlipAlphabet) -> Self {
        Encoder {
            alphabet,
            tables: vec![None; alphabet.len()],
            smallest: vec![None; alphabet.len()],
            chaff: None,
        }
    }

    fn wheat<R: RngCore + ?Sized>(
        &mut self,
        index: usize,
        mode: EncodeMode,
        rng: &mut R,
    ) -> Result<BitString, BitFlipError> {
        let a = self.alphabet;
        let letter = &a.letters[index];
        let sphere_size = binomial(a.l, letter.h);
        match mode {
            EncodeMode::Degenerate => {
                if self.smallest[index].is_none() {
                    if sphere_size > SCAN_LIMIT {
                        return Err(BitFlipError::TooLargeToEnumerate { l: a.l });
                    }
                    let min = a
                        .transmitters(index)?
                        .min()
                        .ok_or(BitFlipError::EmptyTransmitterSet { index })?;
                    self.smallest[index] = Some(min);
                }
                Ok(self.smallest[index].clone().unwrap())
            }
            EncodeMode::Randomized if sphere_size <= ENUMERATE_LIMIT => {
                let table = self.tables[index]
                    .get_or_insert_with(|| a.transmitters(index).expect("index checked").collect());
                table
                    .choose(rng)
                    .cloned()
                    .ok_or(BitFlipError::EmptyTransmitterSet { index })
            }
            EncodeMode::Randomized => {
                // uniform on the sphere, conditioned on being unambiguous,
                // is uniform on the transmitter set
                for _ in 0..REJECTION_ATTEMPTS {
                    let t = random_on_sphere(&letter.s, letter.h, rng).expect("radius checked");
                    if a.is_transmitter_of(index, &t) {
                        return Ok(t);
                    }
                }
                Err(BitFlipError::EmptyTransmitterSet { index })
            }
        }
    }

    fn chaff<R: RngCore + ?Sized>(&mut self, rng: &mut R) -> Result<BitString, BitFlipError> {
        let a = self.alphabet;
        if a.l <= 16 {
            let table = match &self.chaff {
                Some(t) => t,
                None => self.chaff.insert(a.chaff_tokens()?),
            };
            return table
                .choose(rng)
                .cloned()
                .ok_or(BitFlipError::EmptyChaffSet);
        }
        for _ in 0..REJECTION_ATTEMPTS {
            let t = bitstring::random_bits(a.l, rng);
            if a.match_count(&t).0 != 1 {
                return Ok(t);
            }
        }
        Err(BitFlipError::EmptyChaffSet)
    }
}

#[cfg(test)]
mod tests;
