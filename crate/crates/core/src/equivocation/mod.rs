//! One-time pads, forged keys and terminal lists.
//!
//! Under a one-time pad every equal-length plaintext is consistent with the
//! ciphertext: for any decoy there is a key that decrypts to it. The terminal
//! list packages a set of such (candidate, key) pairs.

mod forge;
mod mimic;

pub use forge::{forge_bitflip_alphabet, FORGE_MAX_L, FORGE_MAX_N};
pub use mimic::mimic_candidates;

use std::fmt::Write;

use rand::RngCore;
use thiserror::Error;

use crate::bitstring::{random_bits, BitString};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EquivocationError {
    #[error("pad has {have} bits, {needed} needed")]
    KeyTooShort { needed: usize, have: usize },
    #[error("pads must be non-empty")]
    EmptyPad,
    #[error("length mismatch: expected {expected} bytes, found {found}")]
    LengthMismatch { expected: usize, found: usize },
    #[error("candidate {index} has {found} bytes, ciphertext has {expected}")]
    CandidateLength {
        index: usize,
        expected: usize,
        found: usize,
    },
    #[error("{found} weights for {expected} candidates")]
    WeightCount { expected: usize, found: usize },
    #[error("weight {index} is negative or not finite")]
    BadWeight { index: usize },
    #[error("weights sum to {0}, not 1")]
    WeightSum(f64),
    #[error("threshold {0} must lie in [0, 1)")]
    BadThreshold(f64),
    #[error("threshold filtering needs weights")]
    NoWeights,
    #[error("no entry has weight at or above {0}")]
    EverythingFiltered(f64),
    #[error("only {available} mimics exist, {requested} requested")]
    MimicSpaceExhausted { requested: usize, available: usize },
    #[error("max_edits must be at least 1")]
    ZeroEdits,
    #[error("redundancy must be positive, got {0}")]
    NonPositiveRedundancy(f64),
    #[error("key entropy must be non-negative, got {0}")]
    NegativeEntropy(f64),
    #[error("parameter out of range: {0}")]
    OutOfRange(String),
}

pub const WEIGHT_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PadOrigin {
    Generated(Option<u64>),
    Forged,
}

/// One-time pad key material.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Pad {
    bits: BitString,
    origin: PadOrigin,
}

impl Pad {
    pub fn new(bits: BitString, origin: PadOrigin) -> Result<Self, EquivocationError> {
        if bits.is_empty() {
            return Err(EquivocationError::EmptyPad);
        }
        Ok(Pad { bits, origin })
    }

    pub fn generate<R: RngCore + ?Sized>(
        bytes: usize,
        seed: Option<u64>,
        rng: &mut R,
    ) -> Result<Self, EquivocationError> {
        Pad::new(random_bits(8 * bytes, rng), PadOrigin::Generated(seed))
    }

    pub fn from_bytes(bytes: &[u8], origin: PadOrigin) -> Result<Self, EquivocationError> {
        Pad::new(BitString::from_bytes(bytes), origin)
    }

    pub fn bits(&self) -> &BitString {
        &self.bits
    }

    pub fn origin(&self) -> PadOrigin {
        self.origin
    }

    pub fn len_bits(&self) -> usize {
        self.bits.len()
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        self.bits.to_bytes()
    }

    pub fn to_hex(&self) -> String {
        self.bits.to_hex()
    }
}

pub fn otp_encrypt(p: &[u8], k: &Pad) -> Result<Vec<u8>, EquivocationError> {
    if k.len_bits() < 8 * p.len() {
        return Err(EquivocationError::KeyTooShort {
            needed: 8 * p.len(),
            have: k.len_bits(),
        });
    }
    Ok(p.iter().zip(k.to_bytes()).map(|(a, b)| a ^ b).collect())
}

pub fn otp_decrypt(c: &[u8], k: &Pad) -> Result<Vec<u8>, EquivocationError> {
    otp_encrypt(c, k)
}

/// The pad under which `c` decrypts to `decoy`.
pub fn forge_key(c: &[u8], decoy: &[u8]) -> Result<Pad, EquivocationError> {
    if decoy.len() != c.len() {
        return Err(EquivocationError::LengthMismatch {
            expected: c.len(),
            found: decoy.len(),
        });
    }
    let bytes: Vec<u8> = c.iter().zip(decoy).map(|(a, b)| a ^ b).collect();
    Pad::from_bytes(&bytes, PadOrigin::Forged)
}

#[derive(Debug, Clone, PartialEq)]
pub struct TerminalEntry {
    pub candidate: Vec<u8>,
    pub key: Pad,
    pub weight: Option<f64>,
    pub verified: bool,
}

/// Candidates for one ciphertext, each with the key that produces it.
#[derive(Debug, Clone, PartialEq)]
pub struct TerminalList {
    ciphertext: Vec<u8>,
    entries: Vec<TerminalEntry>,
}

fn check_weights(weights: &[f64], n: usize) -> Result<(), EquivocationError> {
    if weights.len() != n {
        return Err(EquivocationError::WeightCount {
            expected: n,
            found: weights.len(),
        });
    }
    if let Some(index) = weights.iter().position(|w| !w.is_finite() || *w < 0.0) {
        return Err(EquivocationError::BadWeight { index });
    }
    let sum: f64 = weights.iter().sum();
    if (sum - 1.0).abs() > WEIGHT_TOLERANCE {
        return Err(EquivocationError::WeightSum(sum));
    }
    Ok(())
}

impl TerminalList {
    /// Forges a key per candidate and re-checks every entry.
    pub fn build<C: AsRef<[u8]>>(
        c: &[u8],
        candidates: &[C],
        weights: Option<&[f64]>,
    ) -> Result<Self, EquivocationError> {
        if let Some(w) = weights {
            check_weights(w, candidates.len())?;
        }
        let mut entries = Vec::with_capacity(candidates.len());
        for (index, cand) in candidates.iter().enumerate() {
            let cand = cand.as_ref();
            if cand.len() != c.len() {
                return Err(EquivocationError::CandidateLength {
                    index,
                    expected: c.len(),
                    found: cand.len(),
                });
            }
            entries.push(TerminalEntry {
                candidate: cand.to_vec(),
                key: forge_key(c, cand)?,
                weight: weights.map(|w| w[index]),
                verified: false,
            });
        }
        let mut list = TerminalList {
            ciphertext: c.to_vec(),
            entries,
        };
        list.reverify();
        Ok(list)
    }

    fn reverify(&mut self) {
        for e in &mut self.entries {
            e.verified = otp_decrypt(&self.ciphertext, &e.key).is_ok_and(|p| p == e.candidate);
        }
    }

    pub fn ciphertext(&self) -> &[u8] {
        &self.ciphertext
    }

    pub fn entries(&self) -> &[TerminalEntry] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn all_verified(&self) -> bool {
        self.entries.iter().all(|e| e.verified)
    }

    /// Drops entries weighing less than `threshold` and renormalizes.
    pub fn filter_threshold(&self, threshold: f64) -> Result<TerminalList, EquivocationError> {
        if !(0.0..1.0).contains(&threshold) {
            return Err(EquivocationError::BadThreshold(threshold));
        }
        let mut entries: Vec<TerminalEntry> = Vec::new();
        for e in &self.entries {
            let w = e.weight.ok_or(EquivocationError::NoWeights)?;
            if w >= threshold {
                entries.push(e.clone());
            }
        }
        let total: f64 = entries.iter().filter_map(|e| e.weight).sum();
        if entries.is_empty() || total <= 0.0 {
            return Err(EquivocationError::EverythingFiltered(threshold));
        }
        for e in &mut entries {
            e.weight = e.weight.map(|w| w / total);
        }
        let mut out = TerminalList {
            ciphertext: self.ciphertext.clone(),
            entries,
        };
        out.reverify();
        Ok(out)
    }

    /// One line per entry:
    /// `candidate="..." key=<hex> weight=<decimal|none> verified=<bool>`.
    pub fn report(&self) -> String {
        let mut out = String::new();
        for e in &self.entries {
            let weight = e
                .weight
                .map_or_else(|| "none".to_string(), |w| w.to_string());
            writeln!(
                out,
                "candidate={:?} key={} weight={} verified={}",
                String::from_utf8_lossy(&e.candidate),
                e.key.to_hex(),
                weight,
                e.verified
            )
            .unwrap();
        }
        out
    }
}

/// Shannon unicity distance `H(K) / D` in symbols.
pub fn unicity_distance(
    key_entropy_bits: f64,
    redundancy_bits_per_symbol: f64,
) -> Result<f64, EquivocationError> {
    if !(redundancy_bits_per_symbol > 0.0) {
        return Err(EquivocationError::NonPositiveRedundancy(
            redundancy_bits_per_symbol,
        ));
    }
    if !(key_entropy_bits >= 0.0) {
        return Err(EquivocationError::NegativeEntropy(key_entropy_bits));
    }
    Ok(key_entropy_bits / redundancy_bits_per_symbol)
}
