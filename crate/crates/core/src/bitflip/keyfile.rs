//! `bitflip v1` key files and hex token streams.

use std::fmt::Write;

use super::{BitFlipAlphabet, Letter};
use crate::bitstring::BitString;
use crate::format::{field, lines, parse_num, single_char, FormatError};

const HEADER: &str = "bitflip v1";

/// Symbols print as themselves; whitespace and control characters as `U+XXXX`.
fn format_symbol(c: char) -> String {
    if c.is_whitespace() || c.is_control() {
        format!("U+{:04X}", c as u32)
    } else {
        c.to_string()
    }
}

fn parse_symbol(n: usize, text: &str) -> Result<char, FormatError> {
    match text.strip_prefix("U+") {
        Some(code) if !code.is_empty() => u32::from_str_radix(code, 16)
            .ok()
            .and_then(char::from_u32)
            .ok_or_else(|| FormatError::new(n, format!("bad code point `{text}`"))),
        _ => single_char(n, text),
    }
}

pub fn format_key(a: &BitFlipAlphabet) -> String {
    let mut out = format!("{HEADER}\nl={}\n", a.l());
    for letter in a.letters() {
        writeln!(
            out,
            "letter {} s={} h={}",
            format_symbol(letter.symbol),
            letter.s.to_hex(),
            letter.h
        )
        .unwrap();
    }
    out
}

pub fn parse_key(text: &str) -> Result<BitFlipAlphabet, FormatError> {
    let mut it = lines(text);
    match it.next() {
        Some((_, HEADER)) => {}
        Some((n, other)) => {
            return Err(FormatError::new(
                n,
                format!("expected `{HEADER}`, found `{other}`"),
            ))
        }
        None => return Err(FormatError::new(0, "empty key file")),
    }
    let (n, l_line) = it
        .next()
        .ok_or_else(|| FormatError::new(0, "missing `l=` line"))?;
    let l: usize = parse_num(n, "length", field(n, l_line, "l")?)?;
    let mut letters = Vec::new();
    for (n, line) in it {
        let parts: Vec<&str> = line.split_whitespace().collect();
        let [kw, sym, s, h] = parts[..] else {
            return Err(FormatError::new(
                n,
                format!("malformed letter line `{line}`"),
            ));
        };
        if kw != "letter" {
            return Err(FormatError::new(n, format!("unknown record `{kw}`")));
        }
        let symbol = parse_symbol(n, sym)?;
        let s_hex = field(n, s, "s")?;
        if s_hex.len() != l.div_ceil(4) {
            return Err(FormatError::new(
                n,
                format!(
                    "reference string needs {} hex digits, found {}",
                    l.div_ceil(4),
                    s_hex.len()
                ),
            ));
        }
        let s = BitString::from_hex(s_hex, l).map_err(|e| FormatError::new(n, e.to_string()))?;
        let h = parse_num(n, "radius", field(n, h, "h")?)?;
        letters.push(Letter::new(symbol, s, h));
    }
    BitFlipAlphabet::new(l, letters).map_err(|e| FormatError::new(0, e.to_string()))
}

/// One lowercase hex token per line.
pub fn format_tokens(tokens: &[BitString]) -> String {
    let mut out = String::with_capacity(tokens.len() * 4);
    for t in tokens {
        out.push_str(&t.to_hex());
        out.push('\n');
    }
    out
}

/// Parses a token stream for width `l`; every token must use exactly
/// `ceil(l / 4)` digits.
pub fn parse_tokens(text: &str, l: usize) -> Result<Vec<BitString>, FormatError> {
    let digits = l.div_ceil(4);
    lines(text)
        .map(|(n, line)| {
            if line.len() != digits {
                return Err(FormatError::new(
                    n,
                    format!(
                        "token `{line}` has {} digits, key expects {digits}",
                        line.len()
                    ),
                ));
            }
            BitString::from_hex(line, l).map_err(|e| FormatError::new(n, e.to_string()))
        })
        .collect()
}
