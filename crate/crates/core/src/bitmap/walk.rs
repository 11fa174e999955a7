use std::collections::BTreeMap;

use rand::{Rng, RngCore};

use super::{normalize_plaintext, MapError, MapKey, Vertex};

pub const DEFAULT_L_MAX: usize = 8;

/// Reservoir-samples one candidate segment from `from` to a station carrying
/// `target`. Candidates are simple paths (the end may coincide with `from`)
/// of at most `l_max` roads whose inner vertices are junctions.
fn pick_segment<R: RngCore + ?Sized>(
    key: &MapKey,
    from: usize,
    target: char,
    l_max: usize,
    rng: &mut R,
) -> Option<(Vec<String>, usize)> {
    struct Search<'a, R: ?Sized> {
        key: &'a MapKey,
        target: char,
        l_max: usize,
        origin: usize,
        on_path: Vec<bool>,
        labels: Vec<&'a str>,
        seen: u64,
        chosen: Option<(Vec<String>, usize)>,
        rng: &'a mut R,
    }

    impl<'a, R: RngCore + ?Sized> Search<'a, R> {
        fn visit(&mut self, v: usize) {
            if self.labels.len() == self.l_max {
                return;
            }
            let key = self.key;
            for (label, &to) in key.roads_from(v) {
                match key.vertices()[to] {
                    Vertex::Station(c) => {
                        if c == self.target && (to == self.origin || !self.on_path[to]) {
                            self.seen += 1;
                            if self.rng.gen_range(0..self.seen) == 0 {
                                let mut path: Vec<String> =
                                    self.labels.iter().map(|s| s.to_string()).collect();
                                path.push(label.clone());
                                self.chosen = Some((path, to));
                            }
                        }
                    }
                    Vertex::Junction => {
                        if !self.on_path[to] {
                            self.on_path[to] = true;
                            self.labels.push(label);
                            self.visit(to);
                            self.labels.pop();
                            self.on_path[to] = false;
                        }
                    }
                }
            }
        }
    }

    let mut search = Search {
        key,
        target,
        l_max,
        origin: from,
        on_path: vec![false; key.vertices().len()],
        labels: Vec::new(),
        seen: 0,
        chosen: None,
        rng,
    };
    search.on_path[from] = true;
    search.visit(from);
    search.chosen
}

/// Encodes a normalized message as a road-label walk.
pub fn encode<R: RngCore + ?Sized>(
    key: &MapKey,
    msg: &str,
    rng: &mut R,
    l_max: usize,
) -> Result<Vec<String>, MapError> {
    let alphabet = key.alphabet();
    let mut out = Vec::new();
    let mut current = key.start();
    let mut prev = None;
    for (position, symbol) in msg.chars().enumerate() {
        if !alphabet.contains(&symbol) {
            return Err(MapError::UnknownSymbol { position, symbol });
        }
        if prev == Some(symbol) {
            return Err(MapError::NotNormalized { position });
        }
        let (labels, end) =
            pick_segment(key, current, symbol, l_max, rng).ok_or(MapError::NoPath {
                position,
                symbol,
                l_max,
            })?;
        out.extend(labels);
        current = end;
        prev = Some(symbol);
    }
    Ok(out)
}

/// Station ids arrived at while replaying `labels` from the start.
pub fn station_visits<S: AsRef<str>>(key: &MapKey, labels: &[S]) -> Result<Vec<usize>, MapError> {
    let mut current = key.start();
    let mut visits = Vec::new();
    for (position, label) in labels.iter().enumerate() {
        let label = label.as_ref();
        current = key
            .next_vertex(current, label)
            .ok_or_else(|| MapError::UndefinedTransition {
                position,
                label: label.to_string(),
            })?;
        if let Vertex::Station(_) = key.vertices()[current] {
            visits.push(current);
        }
    }
    Ok(visits)
}

pub fn decode<S: AsRef<str>>(key: &MapKey, labels: &[S]) -> Result<String, MapError> {
    Ok(station_visits(key, labels)?
        .into_iter()
        .filter_map(|v| key.vertices()[v].symbol())
        .collect())
}

/// Relabels the stations visited by `labels` so that the same walk decodes
/// to `decoy` (normalized with the key's separator).
///
/// Only station symbols change. Fails when the walk revisits a station at
/// two positions where the decoy wants different symbols.
pub fn forge_decoy_map<S: AsRef<str>>(
    key: &MapKey,
    labels: &[S],
    decoy: &str,
) -> Result<MapKey, MapError> {
    let visits = station_visits(key, labels)?;
    let target: Vec<char> = normalize_plaintext(decoy, key.separator())?
        .chars()
        .collect();
    if target.len() != visits.len() {
        return Err(MapError::DecoyLength {
            expected: visits.len(),
            found: target.len(),
        });
    }
    let mut assigned: BTreeMap<usize, (char, usize)> = BTreeMap::new();
    for (position, (&station, &symbol)) in visits.iter().zip(&target).enumerate() {
        match assigned.get(&station) {
            Some(&(c, first)) if c != symbol => {
                return Err(MapError::InconsistentDecoy {
                    first,
                    second: position,
                })
            }
            Some(_) => {}
            None => {
                assigned.insert(station, (symbol, position));
            }
        }
    }
    let symbols = assigned.into_iter().map(|(v, (c, _))| (v, c)).collect();
    Ok(key.with_symbols(&symbols))
}
