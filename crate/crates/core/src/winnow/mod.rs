//! Chaffing and winnowing.
//!
//! Wheat packets carry a valid truncated HMAC-SHA1 tag over
//! `serial ‖ payload`; chaff packets carry uniformly random tags. The
//! receiver keeps what authenticates and drops the rest. Payloads travel in
//! the clear: nothing here encrypts.

mod strategy;
mod wire;

pub use strategy::StrategyCtor;
pub use strategy::{
    BitComplement, ChaffStrategy, DecoyText, RandomPayload, StrategyConfig, StrategyRegistry,
};
pub use wire::{decode_stream, encode_packet, encode_stream, format_key, parse_key, WireError};

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use hmac::{Hmac, Mac};
use rand::seq::SliceRandom;
use rand::RngCore;
use sha1::Sha1;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum WinnowError {
    #[error("tag width must be one of 16, 32, 64, 160 bits, got {0}")]
    BadTagWidth(u32),
    #[error("message needs {0} packets, more than the serial space allows")]
    MessageTooLong(usize),
    #[error("block size must be in 1..=65535, got {0}")]
    BadBlock(usize),
    #[error("unknown granularity `{0}`")]
    BadGranularity(String),
    #[error("payload {index} is not a valid {granularity} unit")]
    BadUnit {
        index: usize,
        granularity: Granularity,
    },
    #[error("{0} bits do not fill whole bytes")]
    PartialByte(usize),
    #[error("chaff per wheat must be positive")]
    ZeroChaff,
    #[error("decoy-text needs at least one candidate")]
    NoCandidates,
    #[error("unknown chaff strategy `{0}`")]
    UnknownStrategy(String),
    #[error("forgery probability needs a positive tag width")]
    ZeroTau,
}

pub const MAX_PAYLOAD: usize = u16::MAX as usize;

/// Tag width τ in bits.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct TagBits(u32);

impl TagBits {
    pub const ALLOWED: [u32; 4] = [16, 32, 64, 160];

    pub fn new(bits: u32) -> Result<Self, WinnowError> {
        if Self::ALLOWED.contains(&bits) {
            Ok(TagBits(bits))
        } else {
            Err(WinnowError::BadTagWidth(bits))
        }
    }

    pub fn bits(self) -> u32 {
        self.0
    }

    pub fn bytes(self) -> usize {
        self.0 as usize / 8
    }
}

#[derive(Clone, PartialEq, Eq)]
pub struct WinnowKey {
    pub secret: [u8; 32],
    pub tau: TagBits,
}

impl fmt::Debug for WinnowKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("WinnowKey")
            .field("secret", &"<redacted>")
            .field("tau", &self.tau)
            .finish()
    }
}

impl WinnowKey {
    pub fn new(secret: [u8; 32], tau: TagBits) -> Self {
        WinnowKey { secret, tau }
    }

    pub fn generate<R: RngCore + ?Sized>(tau: TagBits, rng: &mut R) -> Self {
        let mut secret = [0u8; 32];
        rng.fill_bytes(&mut secret);
        WinnowKey { secret, tau }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Packet {
    pub serial: u32,
    pub payload: Vec<u8>,
    pub tag: Vec<u8>,
}

pub fn hmac_sha1(key: &[u8], data: &[u8]) -> [u8; 20] {
    let mut mac = <Hmac<Sha1> as Mac>::new_from_slice(key).expect("HMAC takes keys of any length");
    mac.update(data);
    mac.finalize().into_bytes().into()
}

/// Leftmost `tau` bits of HMAC-SHA1(secret, serial_be32 ‖ payload).
pub fn mac_tag(key: &WinnowKey, serial: u32, payload: &[u8]) -> Vec<u8> {
    let mut data = Vec::with_capacity(4 + payload.len());
    data.extend_from_slice(&serial.to_be_bytes());
    data.extend_from_slice(payload);
    hmac_sha1(&key.secret, &data)[..key.tau.bytes()].to_vec()
}

pub fn verify(key: &WinnowKey, packet: &Packet) -> bool {
    packet.tag.len() == key.tau.bytes()
        && packet.tag == mac_tag(key, packet.serial, &packet.payload)
}

/// Chance that a random tag authenticates: `2^-tau`.
pub fn forgery_probability(tau: u32) -> Result<f64, WinnowError> {
    if tau == 0 {
        return Err(WinnowError::ZeroTau);
    }
    Ok(0.5f64.powi(tau as i32))
}

/// How a message is cut into packet payloads.
///
/// Sub-byte units travel as one byte holding the unit's value, so a nibble
/// `0110` is the payload byte `0x06`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Granularity {
    Bit,
    Nibble,
    Byte,
    Block(usize),
}

impl Granularity {
    /// Mask of meaningful bits in a sub-byte payload.
    pub fn unit_mask(self) -> u8 {
        match self {
            Granularity::Bit => 0x01,
            Granularity::Nibble => 0x0f,
            _ => 0xff,
        }
    }
}

impl fmt::Display for Granularity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Granularity::Bit => f.write_str("bit"),
            Granularity::Nibble => f.write_str("nibble"),
            Granularity::Byte => f.write_str("byte"),
            Granularity::Block(k) => write!(f, "block:{k}"),
        }
    }
}

impl FromStr for Granularity {
    type Err = WinnowError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "bit" => Ok(Granularity::Bit),
            "nibble" => Ok(Granularity::Nibble),
            "byte" => Ok(Granularity::Byte),
            _ => match s.strip_prefix("block:").map(str::parse::<usize>) {
                Some(Ok(k)) if k == 0 || k > MAX_PAYLOAD => Err(WinnowError::BadBlock(k)),
                Some(Ok(k)) => Ok(Granularity::Block(k)),
                _ => Err(WinnowError::BadGranularity(s.to_string())),
            },
        }
    }
}

/// Cuts `msg` into `(serial, payload)` pairs with serials `1, 2, ...`.
pub fn split_message(
    msg: &[u8],
    granularity: Granularity,
) -> Result<Vec<(u32, Vec<u8>)>, WinnowError> {
    let units: Vec<Vec<u8>> = match granularity {
        Granularity::Bit => msg
            .iter()
            .flat_map(|b| (0..8).rev().map(move |k| vec![(b >> k) & 1]))
            .collect(),
        Granularity::Nibble => msg
            .iter()
            .flat_map(|b| [vec![b >> 4], vec![b & 0x0f]])
            .collect(),
        Granularity::Byte => msg.iter().map(|&b| vec![b]).collect(),
        Granularity::Block(k) if k == 0 || k > MAX_PAYLOAD => return Err(WinnowError::BadBlock(k)),
        Granularity::Block(k) => msg.chunks(k).map(<[u8]>::to_vec).collect(),
    };
    if units.len() > u32::MAX as usize {
        return Err(WinnowError::MessageTooLong(units.len()));
    }
    Ok(units
        .into_iter()
        .enumerate()
        .map(|(i, p)| (i as u32 + 1, p))
        .collect())
}

/// Inverse of [`split_message`] over payloads in serial order.
pub fn join_payloads<P: AsRef<[u8]>>(
    payloads: &[P],
    granularity: Granularity,
) -> Result<Vec<u8>, WinnowError> {
    let check_unit = |index: usize, p: &[u8]| {
        if p.len() == 1 && p[0] & !granularity.unit_mask() == 0 {
            Ok(p[0])
        } else {
            Err(WinnowError::BadUnit { index, granularity })
        }
    };
    match granularity {
        Granularity::Bit | Granularity::Nibble => {
            let width = if granularity == Granularity::Bit {
                1
            } else {
                4
            };
            let units = payloads
                .iter()
                .enumerate()
                .map(|(i, p)| check_unit(i, p.as_ref()))
                .collect::<Result<Vec<u8>, _>>()?;
            if (units.len() * width) % 8 != 0 {
                return Err(WinnowError::PartialByte(units.len() * width));
            }
            Ok(pack_units(&units, width))
        }
        Granularity::Byte => payloads
            .iter()
            .enumerate()
            .map(|(i, p)| check_unit(i, p.as_ref()))
            .collect(),
        Granularity::Block(_) => Ok(payloads.iter().flat_map(|p| p.as_ref().to_vec()).collect()),
    }
}

fn pack_units(units: &[u8], width: usize) -> Vec<u8> {
    let per_byte = 8 / width;
    units
        .chunks_exact(per_byte)
        .map(|c| c.iter().fold(0u8, |acc, &u| (acc << width) | u))
        .collect()
}

/// A strategy plus how much chaff it adds and at what granularity.
pub struct ChaffPlan {
    pub strategy: Box<dyn ChaffStrategy>,
    pub per_wheat: usize,
    pub granularity: Granularity,
}

impl ChaffPlan {
    pub fn new(
        strategy: Box<dyn ChaffStrategy>,
        per_wheat: usize,
        granularity: Granularity,
    ) -> Result<Self, WinnowError> {
        if per_wheat == 0 {
            return Err(WinnowError::ZeroChaff);
        }
        Ok(ChaffPlan {
            strategy,
            per_wheat,
            granularity,
        })
    }
}

/// Tags every wheat pair and surrounds it with `per_wheat` chaff packets in
/// random order.
///
/// Chaff normally repeats its wheat's serial. Strategies asking for distinct
/// serials get the whole stream renumbered `1, 2, ...` in emission order.
pub fn chaff_stream<R: RngCore + ?Sized>(
    key: &WinnowKey,
    wheat: &[(u32, Vec<u8>)],
    plan: &ChaffPlan,
    rng: &mut R,
) -> Vec<Packet> {
    // (serial, payload, is_wheat)
    let mut slots: Vec<(u32, Vec<u8>, bool)> =
        Vec::with_capacity(wheat.len() * (plan.per_wheat + 1));
    for (serial, payload) in wheat {
        let start = slots.len();
        slots.push((*serial, payload.clone(), true));
        for j in 0..plan.per_wheat {
            let chaff = plan.strategy.chaff_payload(
                *serial,
                payload,
                plan.granularity,
                j,
                &mut RngRef(rng),
            );
            slots.push((*serial, chaff, false));
        }
        slots[start..].shuffle(&mut RngRef(rng));
    }
    if plan.strategy.distinct_serials() {
        for (i, slot) in slots.iter_mut().enumerate() {
            slot.0 = i as u32 + 1;
        }
    }
    slots
        .into_iter()
        .map(|(serial, payload, is_wheat)| {
            let tag = if is_wheat {
                mac_tag(key, serial, &payload)
            } else {
                let mut t = vec![0u8; key.tau.bytes()];
                rng.fill_bytes(&mut t);
                t
            };
            Packet {
                serial,
                payload,
                tag,
            }
        })
        .collect()
}

/// Adapter so `?Sized` generators can be handed to `dyn` and slice APIs.
struct RngRef<'a, R: ?Sized>(&'a mut R);

impl<R: RngCore + ?Sized> RngCore for RngRef<'_, R> {
    fn next_u32(&mut self) -> u32 {
        self.0.next_u32()
    }
    fn next_u64(&mut self) -> u64 {
        self.0.next_u64()
    }
    fn fill_bytes(&mut self, dest: &mut [u8]) {
        self.0.fill_bytes(dest)
    }
    fn try_fill_bytes(&mut self, dest: &mut [u8]) -> Result<(), rand::Error> {
        self.0.try_fill_bytes(dest)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct WinnowReport {
    /// Packets whose tag verified.
    pub kept: usize,
    pub discarded: usize,
    /// Serials in `1..=max kept serial` with no valid packet.
    pub gaps: usize,
    /// Serials that authenticated two different payloads; the first wins.
    pub conflicts: usize,
    /// Trailing sub-byte units that could not fill a byte.
    pub partial_bits: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Winnowed {
    pub message: Vec<u8>,
    pub report: WinnowReport,
}

/// Keeps authenticated packets and reassembles them in serial order.
/// Never fails: anomalies are counted in the report.
pub fn winnow(key: &WinnowKey, stream: &[Packet], granularity: Granularity) -> Winnowed {
    let mut report = WinnowReport::default();
    let mut by_serial: BTreeMap<u32, &[u8]> = BTreeMap::new();
    for p in stream {
        if !verify(key, p) {
            report.discarded += 1;
            continue;
        }
        report.kept += 1;
        match by_serial.get(&p.serial) {
            Some(existing) if *existing != p.payload.as_slice() => report.conflicts += 1,
            Some(_) => {}
            None => {
                by_serial.insert(p.serial, &p.payload);
            }
        }
    }
    if let Some((&max, _)) = by_serial.last_key_value() {
        let present = by_serial.range(1..).count();
        report.gaps = max as usize - present;
    }
    let payloads: Vec<&[u8]> = by_serial.into_values().collect();
    let message = match granularity {
        Granularity::Bit | Granularity::Nibble => {
            let width = if granularity == Granularity::Bit {
                1
            } else {
                4
            };
            let units: Vec<u8> = payloads
                .iter()
                .map(|p| p.first().copied().unwrap_or(0) & granularity.unit_mask())
                .collect();
            let usable = units.len() - units.len() % (8 / width);
            report.partial_bits = (units.len() - usable) * width;
            pack_units(&units[..usable], width)
        }
        Granularity::Byte | Granularity::Block(_) => payloads.concat(),
    };
    Winnowed { message, report }
}
