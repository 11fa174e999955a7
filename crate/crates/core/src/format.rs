//! Shared error type for the line-oriented text formats.

use thiserror::Error;

/// A parse failure; `line` is 1-based, 0 when it concerns the whole input.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("line {line}: {reason}")]
pub struct FormatError {
    pub line: usize,
    pub reason: String,
}

impl FormatError {
    pub fn new(line: usize, reason: impl Into<String>) -> Self {
        FormatError {
            line,
            reason: reason.into(),
        }
    }
}

/// Splits `key=value`, checking the key.
pub(crate) fn field<'a>(line: usize, token: &'a str, key: &str) -> Result<&'a str, FormatError> {
    token
        .strip_prefix(key)
        .and_then(|rest| rest.strip_prefix('='))
        .ok_or_else(|| FormatError::new(line, format!("expected `{key}=...`, found `{token}`")))
}

pub(crate) fn parse_num<T: std::str::FromStr>(
    line: usize,
    what: &str,
    text: &str,
) -> Result<T, FormatError> {
    text.parse()
        .map_err(|_| FormatError::new(line, format!("invalid {what} `{text}`")))
}

/// Yields `(line_number, trimmed_line)` for non-blank lines.
pub(crate) fn lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty())
}

pub(crate) fn single_char(line: usize, text: &str) -> Result<char, FormatError> {
    let mut it = text.chars();
    match (it.next(), it.next()) {
        (Some(c), None) => Ok(c),
        _ => Err(FormatError::new(
            line,
            format!("expected one symbol, found `{text}`"),
        )),
    }
}
