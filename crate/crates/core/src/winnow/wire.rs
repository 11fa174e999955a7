//! Binary packet streams and `winnow v1` key files.
//!
//! Packet layout: `43 57 01`, serial (u32 BE), payload length (u16 BE),
//! payload, tag length in bytes (u8), tag.

use thiserror::Error;

use super::{Packet, TagBits, WinnowKey};
use crate::format::{field, lines, parse_num, FormatError};

const MAGIC: [u8; 2] = [0x43, 0x57];
const VERSION: u8 = 0x01;
const KEY_HEADER: &str = "winnow v1";

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum WireError {
    #[error("bad magic at offset {offset}")]
    BadMagic { offset: usize },
    #[error("unsupported version {version} at offset {offset}")]
    Version { offset: usize, version: u8 },
    #[error("stream truncated inside the packet at offset {offset}")]
    Truncated { offset: usize },
    #[error("payload of {0} bytes exceeds 65535")]
    PayloadTooLong(usize),
    #[error("tag of {length} bytes at offset {offset} is not a supported width")]
    BadTagLength { offset: usize, length: usize },
    #[error("tag width changes at offset {offset}")]
    MixedTagWidths { offset: usize },
}

pub fn encode_packet(packet: &Packet, out: &mut Vec<u8>) -> Result<(), WireError> {
    let len = u16::try_from(packet.payload.len())
        .map_err(|_| WireError::PayloadTooLong(packet.payload.len()))?;
    let tag_len = u8::try_from(packet.tag.len())
        .ok()
        .filter(|&n| TagBits::new(8 * n as u32).is_ok())
        .ok_or(WireError::BadTagLength {
            offset: out.len(),
            length: packet.tag.len(),
        })?;
    out.extend_from_slice(&MAGIC);
    out.push(VERSION);
    out.extend_from_slice(&packet.serial.to_be_bytes());
    out.extend_from_slice(&len.to_be_bytes());
    out.extend_from_slice(&packet.payload);
    out.push(tag_len);
    out.extend_from_slice(&packet.tag);
    Ok(())
}

pub fn encode_stream(packets: &[Packet]) -> Result<Vec<u8>, WireError> {
    let mut out = Vec::new();
    let mut width = None;
    for p in packets {
        let offset = out.len();
        if *width.get_or_insert(p.tag.len()) != p.tag.len() {
            return Err(WireError::MixedTagWidths { offset });
        }
        encode_packet(p, &mut out)?;
    }
    Ok(out)
}

struct Cursor<'a> {
    bytes: &'a [u8],
    pos: usize,
    packet_start: usize,
}

impl<'a> Cursor<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8], WireError> {
        let end = self
            .pos
            .checked_add(n)
            .filter(|&e| e <= self.bytes.len())
            .ok_or(WireError::Truncated {
                offset: self.packet_start,
            })?;
        let out = &self.bytes[self.pos..end];
        self.pos = end;
        Ok(out)
    }
}

pub fn decode_stream(bytes: &[u8]) -> Result<Vec<Packet>, WireError> {
    let mut c = Cursor {
        bytes,
        pos: 0,
        packet_start: 0,
    };
    let mut out = Vec::new();
    let mut width = None;
    while c.pos < bytes.len() {
        let offset = c.pos;
        c.packet_start = offset;
        if c.take(2)? != MAGIC {
            return Err(WireError::BadMagic { offset });
        }
        let version = c.take(1)?[0];
        if version != VERSION {
            return Err(WireError::Version { offset, version });
        }
        let serial = u32::from_be_bytes(c.take(4)?.try_into().unwrap());
        let len = u16::from_be_bytes(c.take(2)?.try_into().unwrap()) as usize;
        let payload = c.take(len)?.to_vec();
        let tag_len = c.take(1)?[0] as usize;
        if TagBits::new(8 * tag_len as u32).is_err() {
            return Err(WireError::BadTagLength {
                offset,
                length: tag_len,
            });
        }
        if *width.get_or_insert(tag_len) != tag_len {
            return Err(WireError::MixedTagWidths { offset });
        }
        let tag = c.take(tag_len)?.to_vec();
        out.push(Packet {
            serial,
            payload,
            tag,
        });
    }
    Ok(out)
}

pub fn format_key(key: &WinnowKey) -> String {
    format!(
        "{KEY_HEADER}\nsecret={}\ntau={}\n",
        hex::encode(key.secret),
        key.tau.bits()
    )
}

pub fn parse_key(text: &str) -> Result<WinnowKey, FormatError> {
    let mut it = lines(text);
    match it.next() {
        Some((_, KEY_HEADER)) => {}
        Some((n, other)) => {
            return Err(FormatError::new(
                n,
                format!("expected `{KEY_HEADER}`, found `{other}`"),
            ))
        }
        None => return Err(FormatError::new(0, "empty key file")),
    }
    let (n, line) = it
        .next()
        .ok_or_else(|| FormatError::new(0, "missing `secret=` line"))?;
    let digits = field(n, line, "secret")?;
    let mut secret = [0u8; 32];
    hex::decode_to_slice(digits, &mut secret)
        .map_err(|_| FormatError::new(n, "secret must be exactly 64 hex digits"))?;
    let (n, line) = it
        .next()
        .ok_or_else(|| FormatError::new(0, "missing `tau=` line"))?;
    let tau = TagBits::new(parse_num(n, "tau", field(n, line, "tau")?)?)
        .map_err(|e| FormatError::new(n, e.to_string()))?;
    if let Some((n, extra)) = it.next() {
        return Err(FormatError::new(n, format!("unexpected `{extra}`")));
    }
    Ok(WinnowKey::new(secret, tau))
}
