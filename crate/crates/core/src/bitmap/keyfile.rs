//! `bitmap v1` key files and whitespace-separated label ciphertexts.

use std::collections::BTreeMap;
use std::fmt::Write;

use super::{MapKey, Vertex};
use crate::format::{field, lines, parse_num, single_char, FormatError};

const HEADER: &str = "bitmap v1";

pub fn format_key(key: &MapKey) -> String {
    let mut out = format!("{HEADER}\nstart={}\nsep={}\n", key.start(), key.separator());
    for (id, v) in key.vertices().iter().enumerate() {
        match v {
            Vertex::Station(c) => writeln!(out, "vertex {id} station {c}").unwrap(),
            Vertex::Junction => writeln!(out, "vertex {id} junction").unwrap(),
        }
    }
    for (from, label, to) in key.edges() {
        writeln!(out, "edge {from} {label} {to}").unwrap();
    }
    out
}

/// Vertex ids must be exactly `0..n` in any order.
pub fn parse_key(text: &str) -> Result<MapKey, FormatError> {
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
    let (n, line) = it
        .next()
        .ok_or_else(|| FormatError::new(0, "missing `start=` line"))?;
    let start: usize = parse_num(n, "start id", field(n, line, "start")?)?;
    let (n, line) = it
        .next()
        .ok_or_else(|| FormatError::new(0, "missing `sep=` line"))?;
    let separator = single_char(n, field(n, line, "sep")?)?;

    let mut vertices = BTreeMap::new();
    let mut edges = Vec::new();
    for (n, line) in it {
        let parts: Vec<&str> = line.split_whitespace().collect();
        match parts[..] {
            ["vertex", id, "station", sym] => {
                let id: usize = parse_num(n, "vertex id", id)?;
                let c = single_char(n, sym)?;
                if vertices.insert(id, Vertex::Station(c)).is_some() {
                    return Err(FormatError::new(n, format!("vertex {id} declared twice")));
                }
            }
            ["vertex", id, "junction"] => {
                let id: usize = parse_num(n, "vertex id", id)?;
                if vertices.insert(id, Vertex::Junction).is_some() {
                    return Err(FormatError::new(n, format!("vertex {id} declared twice")));
                }
            }
            ["edge", from, label, to] => {
                edges.push((
                    parse_num(n, "vertex id", from)?,
                    label.to_string(),
                    parse_num(n, "vertex id", to)?,
                ));
            }
            _ => return Err(FormatError::new(n, format!("malformed record `{line}`"))),
        }
    }
    if let Some((pos, (&id, _))) = vertices.iter().enumerate().find(|(i, (&id, _))| *i != id) {
        return Err(FormatError::new(
            0,
            format!("vertex ids are not dense: expected {pos}, found {id}"),
        ));
    }
    MapKey::new(vertices.into_values().collect(), edges, start, separator)
        .map_err(|e| FormatError::new(0, e.to_string()))
}

pub fn format_labels<S: AsRef<str>>(labels: &[S]) -> String {
    let mut out = labels
        .iter()
        .map(AsRef::as_ref)
        .collect::<Vec<_>>()
        .join(" ");
    out.push('\n');
    out
}

pub fn parse_labels(text: &str) -> Vec<String> {
    text.split_whitespace().map(str::to_string).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bitmap::{generate_map, MapParams};
    use crate::rng::RandomSource;

    #[test]
    fn exact_text() {
        let key = MapKey::new(
            vec![Vertex::Junction, Vertex::Station('k'), Vertex::Station('.')],
            [
                (0, "r1".into(), 1),
                (1, "r2".into(), 2),
                (2, "r3".into(), 1),
            ],
            0,
            '.',
        )
        .unwrap();
        let text = format_key(&key);
        assert_eq!(
            text,
            "bitmap v1\nstart=0\nsep=.\nvertex 0 junction\nvertex 1 station k\nvertex 2 station .\n\
             edge 0 r1 1\nedge 1 r2 2\nedge 2 r3 1\n"
        );
        assert_eq!(parse_key(&text).unwrap(), key);
    }

    #[test]
    fn generated_key_roundtrip() {
        let key = generate_map(&MapParams::with_symbols(7), &mut RandomSource::seeded(2)).unwrap();
        assert_eq!(parse_key(&format_key(&key)).unwrap(), key);
    }

    #[test]
    fn parse_errors() {
        assert_eq!(parse_key("").unwrap_err().line, 0);
        assert_eq!(parse_key("bitmap v1\nstart=x\n").unwrap_err().line, 2);
        let sparse = "bitmap v1\nstart=0\nsep=.\nvertex 0 junction\nvertex 2 station .\n";
        assert!(parse_key(sparse).unwrap_err().reason.contains("dense"));
        let dup = "bitmap v1\nstart=0\nsep=.\nvertex 0 junction\nvertex 1 station .\nedge 0 r 1\nedge 0 r 0\n";
        assert!(parse_key(dup).is_err());
        let junk = "bitmap v1\nstart=0\nsep=.\nvertex 0 junction\nroad 0 1\n";
        assert_eq!(parse_key(junk).unwrap_err().line, 5);
    }

    #[test]
    fn labels_roundtrip() {
        let labels = vec!["r0".to_string(), "r3".into(), "r1".into()];
        assert_eq!(parse_labels(&format_labels(&labels)), labels);
        assert!(parse_labels("  \n").is_empty());
    }
}
