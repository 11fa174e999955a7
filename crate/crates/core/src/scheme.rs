//! Cipher schemes behind one interface, selected by name.
//!
//! A scheme turns options into key text, and bytes into ciphertext text and
//! back, using the file formats of its module.

use std::collections::BTreeMap;

use base64::engine::general_purpose::STANDARD_NO_PAD;
use base64::Engine;
use rand::RngCore;
use thiserror::Error;

use crate::bitflip::{self, BitFlipAlphabet, BitFlipError, EncodeMode};
use crate::bitmap::{self, MapError, MapParams, DEFAULT_L_MAX};
use crate::evolve::default_symbols;
use crate::format::FormatError;

#[derive(Debug, Error)]
pub enum SchemeError {
    #[error("key: {0}")]
    Key(FormatError),
    #[error("input: {0}")]
    Input(FormatError),
    #[error(transparent)]
    BitFlip(#[from] BitFlipError),
    #[error(transparent)]
    Map(#[from] MapError),
    #[error("input is not UTF-8 text")]
    NotText,
    #[error("decoded text is not valid Base64: {0}")]
    Base64(#[from] base64::DecodeError),
    #[error("{0}")]
    Other(String),
    #[error("unknown scheme `{0}`")]
    UnknownScheme(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct KeygenOptions {
    /// Number of letters when `symbols` is not given.
    pub n: usize,
    pub l: usize,
    pub symbols: Option<String>,
    pub attempts: usize,
    pub l_max: usize,
    pub stations: Option<usize>,
    pub junctions: Option<usize>,
    pub labels: Option<usize>,
}

impl Default for KeygenOptions {
    fn default() -> Self {
        KeygenOptions {
            n: 4,
            l: 8,
            symbols: None,
            attempts: 10_000,
            l_max: DEFAULT_L_MAX,
            stations: None,
            junctions: None,
            labels: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CodecOptions {
    pub chaff_rate: f64,
    pub mode: EncodeMode,
    /// BitMap only: take the input as map symbols instead of Base64-wrapping
    /// arbitrary bytes.
    pub raw: bool,
    pub l_max: usize,
}

impl Default for CodecOptions {
    fn default() -> Self {
        CodecOptions {
            chaff_rate: 0.0,
            mode: EncodeMode::Randomized,
            raw: false,
            l_max: DEFAULT_L_MAX,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Decoded {
    pub plaintext: Vec<u8>,
    /// Tokens dropped as chaff.
    pub discarded: usize,
}

pub trait CipherScheme: Send + Sync {
    fn name(&self) -> &'static str;
    fn keygen(&self, opts: &KeygenOptions, rng: &mut dyn RngCore) -> Result<String, SchemeError>;
    fn encode(
        &self,
        key: &str,
        input: &[u8],
        opts: &CodecOptions,
        rng: &mut dyn RngCore,
    ) -> Result<Vec<u8>, SchemeError>;
    fn decode(&self, key: &str, input: &[u8], opts: &CodecOptions) -> Result<Decoded, SchemeError>;
}

fn text(input: &[u8]) -> Result<&str, SchemeError> {
    std::str::from_utf8(input).map_err(|_| SchemeError::NotText)
}

/// Drops one trailing line break so `echo`-style input encodes as typed.
fn strip_newline(s: &str) -> &str {
    s.strip_suffix('\n')
        .map(|s| s.strip_suffix('\r').unwrap_or(s))
        .unwrap_or(s)
}

/// Text input, one token file line per token; decoded text ends in a newline.
pub struct BitFlipScheme;

impl CipherScheme for BitFlipScheme {
    fn name(&self) -> &'static str {
        "bitflip"
    }

    fn keygen(&self, opts: &KeygenOptions, rng: &mut dyn RngCore) -> Result<String, SchemeError> {
        let symbols: Vec<char> = match &opts.symbols {
            Some(s) => s.chars().collect(),
            None => default_symbols(opts.n),
        };
        let alphabet = BitFlipAlphabet::random_valid(&symbols, opts.l, rng, opts.attempts)
            .ok_or_else(|| {
                SchemeError::Other(format!("no valid alphabet in {} attempts", opts.attempts))
            })?;
        Ok(bitflip::format_key(&alphabet))
    }

    fn encode(
        &self,
        key: &str,
        input: &[u8],
        opts: &CodecOptions,
        rng: &mut dyn RngCore,
    ) -> Result<Vec<u8>, SchemeError> {
        let alphabet = bitflip::parse_key(key).map_err(SchemeError::Key)?;
        let msg = strip_newline(text(input)?);
        let tokens = alphabet.encode_message(msg, opts.chaff_rate, opts.mode, rng)?;
        Ok(bitflip::format_tokens(&tokens).into_bytes())
    }

    fn decode(&self, key: &str, input: &[u8], _: &CodecOptions) -> Result<Decoded, SchemeError> {
        let alphabet = bitflip::parse_key(key).map_err(SchemeError::Key)?;
        let tokens =
            bitflip::parse_tokens(text(input)?, alphabet.l()).map_err(SchemeError::Input)?;
        let out = alphabet.decode_stream(&tokens)?;
        let mut plaintext = out.text.into_bytes();
        plaintext.push(b'\n');
        Ok(Decoded {
            plaintext,
            discarded: out.discarded,
        })
    }
}

/// Bytes are Base64-wrapped (no padding) unless `raw`; one line of labels.
pub struct BitMapScheme;

impl CipherScheme for BitMapScheme {
    fn name(&self) -> &'static str {
        "bitmap"
    }

    fn keygen(&self, opts: &KeygenOptions, rng: &mut dyn RngCore) -> Result<String, SchemeError> {
        let mut params = match &opts.symbols {
            None => MapParams::base64(),
            Some(s) => {
                let payload: Vec<char> = s.chars().collect();
                let mut p = MapParams::with_symbols(payload.len() + 1);
                p.payload = payload;
                p
            }
        };
        params.l_max = opts.l_max;
        if let Some(s) = opts.stations {
            params.stations = s;
        }
        if let Some(j) = opts.junctions {
            params.junctions = j;
        }
        if let Some(k) = opts.labels {
            params.labels = k;
        }
        if params.payload.contains(&params.separator) {
            return Err(SchemeError::Other(format!(
                "symbols may not contain the separator {:?}",
                params.separator
            )));
        }
        Ok(bitmap::format_key(&bitmap::generate_map(&params, rng)?))
    }

    fn encode(
        &self,
        key: &str,
        input: &[u8],
        opts: &CodecOptions,
        rng: &mut dyn RngCore,
    ) -> Result<Vec<u8>, SchemeError> {
        let key = bitmap::parse_key(key).map_err(SchemeError::Key)?;
        let msg = if opts.raw {
            strip_newline(text(input)?).to_string()
        } else {
            STANDARD_NO_PAD.encode(input)
        };
        let normalized = bitmap::normalize_plaintext(&msg, key.separator())?;
        let labels = bitmap::encode(&key, &normalized, rng, opts.l_max)?;
        Ok(bitmap::format_labels(&labels).into_bytes())
    }

    fn decode(&self, key: &str, input: &[u8], opts: &CodecOptions) -> Result<Decoded, SchemeError> {
        let key = bitmap::parse_key(key).map_err(SchemeError::Key)?;
        let labels = bitmap::parse_labels(text(input)?);
        let msg = bitmap::denormalize(&bitmap::decode(&key, &labels)?, key.separator());
        let plaintext = if opts.raw {
            let mut p = msg.into_bytes();
            p.push(b'\n');
            p
        } else {
            STANDARD_NO_PAD.decode(msg)?
        };
        Ok(Decoded {
            plaintext,
            discarded: 0,
        })
    }
}

/// Cipher schemes by name.
pub struct SchemeRegistry {
    schemes: BTreeMap<&'static str, Box<dyn CipherScheme>>,
}

impl SchemeRegistry {
    pub fn empty() -> Self {
        SchemeRegistry {
            schemes: BTreeMap::new(),
        }
    }

    pub fn builtin() -> Self {
        let mut r = Self::empty();
        r.register(Box::new(BitFlipScheme));
        r.register(Box::new(BitMapScheme));
        r
    }

    pub fn register(&mut self, scheme: Box<dyn CipherScheme>) {
        self.schemes.insert(scheme.name(), scheme);
    }

    pub fn names(&self) -> impl Iterator<Item = &'static str> + '_ {
        self.schemes.keys().copied()
    }

    pub fn get(&self, name: &str) -> Result<&dyn CipherScheme, SchemeError> {
        self.schemes
            .get(name)
            .map(|s| s.as_ref())
            .ok_or_else(|| SchemeError::UnknownScheme(name.to_string()))
    }
}

impl Default for SchemeRegistry {
    fn default() -> Self {
        Self::builtin()
    }
}
