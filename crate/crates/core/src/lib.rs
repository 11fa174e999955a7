//! Decoy-tolerant cipher toolkit.
//!
//! BitFlip and BitMap ciphers, chaffing-and-winnowing transport, one-time
//! pad equivocation, evolutionary alphabet search and an adversarial
//! analysis bench.

pub mod analysis;
pub mod bitflip;
pub mod bitmap;
pub mod bitstring;
pub mod cli;
pub mod equivocation;
pub mod evolve;
pub mod format;
pub mod rng;
pub mod scheme;
pub mod winnow;

pub use bitstring::{hamming, BitString};
pub use rng::RandomSource;
