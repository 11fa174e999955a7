//! BitMap: plaintext as a walk over a secret road map.
//!
//! The key is a directed graph of stations (each carrying a symbol) and
//! junctions, with labeled roads. A ciphertext is a sequence of road labels;
//! the receiver replays the walk from the start vertex and reads off the
//! symbol of every station it arrives at.

mod generate;
mod keyfile;
mod walk;

pub use generate::{generate_map, MapParams, BASE64_PAYLOAD};
pub use keyfile::{format_key, format_labels, parse_key, parse_labels};
pub use walk::{decode, encode, forge_decoy_map, station_visits, DEFAULT_L_MAX};

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use thiserror::Error;

/// Default separator: outside both the Base64 and alphanumeric payloads.
pub const DEFAULT_SEPARATOR: char = '.';

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MapError {
    #[error("vertex id {0} out of range")]
    BadVertex(usize),
    #[error("vertex {vertex} has two roads labeled `{label}`")]
    DuplicateLabel { vertex: usize, label: String },
    #[error("invalid road label `{0}`")]
    BadLabel(String),
    #[error("separator {0:?} is not carried by any station")]
    SeparatorNotCarried(char),
    #[error("symbol {symbol:?} unreachable from vertex {from}")]
    Unreachable { from: usize, symbol: char },
    #[error("symbol {symbol:?} at position {position} is not on the map")]
    UnknownSymbol { position: usize, symbol: char },
    #[error("repeated symbol at position {position}; normalize first")]
    NotNormalized { position: usize },
    #[error("no road of length <= {l_max} reaches {symbol:?} (position {position})")]
    NoPath {
        position: usize,
        symbol: char,
        l_max: usize,
    },
    #[error("no road `{label}` at position {position}")]
    UndefinedTransition { position: usize, label: String },
    #[error("separator found in input at position {position}")]
    SeparatorInInput { position: usize },
    #[error("no valid map after {attempts} attempts")]
    GenerationFailed { attempts: usize },
    #[error("{stations} stations cannot carry {symbols} symbols")]
    TooFewStations { stations: usize, symbols: usize },
    #[error("need at least 2 road labels, got {0}")]
    TooFewLabels(usize),
    #[error("decoy positions {first} and {second} revisit one station with different symbols")]
    InconsistentDecoy { first: usize, second: usize },
    #[error("decoy normalizes to {found} symbols but the walk visits {expected} stations")]
    DecoyLength { expected: usize, found: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Vertex {
    Station(char),
    Junction,
}

impl Vertex {
    pub fn symbol(&self) -> Option<char> {
        match self {
            Vertex::Station(c) => Some(*c),
            Vertex::Junction => None,
        }
    }
}

/// The BitMap key. Vertex ids are indices into `vertices`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MapKey {
    vertices: Vec<Vertex>,
    roads: Vec<BTreeMap<String, usize>>,
    start: usize,
    separator: char,
}

fn valid_label(label: &str) -> bool {
    !label.is_empty() && !label.chars().any(char::is_whitespace)
}

impl MapKey {
    /// Builds a key, enforcing id ranges, label syntax and deterministic
    /// transitions. Reachability is checked by [`MapKey::validate`].
    pub fn new(
        vertices: Vec<Vertex>,
        edges: impl IntoIterator<Item = (usize, String, usize)>,
        start: usize,
        separator: char,
    ) -> Result<Self, MapError> {
        let n = vertices.len();
        if start >= n {
            return Err(MapError::BadVertex(start));
        }
        let mut roads = vec![BTreeMap::new(); n];
        for (from, label, to) in edges {
            if from >= n {
                return Err(MapError::BadVertex(from));
            }
            if to >= n {
                return Err(MapError::BadVertex(to));
            }
            if !valid_label(&label) {
                return Err(MapError::BadLabel(label));
            }
            if roads[from].contains_key(&label) {
                return Err(MapError::DuplicateLabel {
                    vertex: from,
                    label,
                });
            }
            roads[from].insert(label, to);
        }
        Ok(MapKey {
            vertices,
            roads,
            start,
            separator,
        })
    }

    pub fn vertices(&self) -> &[Vertex] {
        &self.vertices
    }

    pub fn start(&self) -> usize {
        self.start
    }

    pub fn separator(&self) -> char {
        self.separator
    }

    pub fn roads_from(&self, vertex: usize) -> &BTreeMap<String, usize> {
        &self.roads[vertex]
    }

    pub fn edges(&self) -> impl Iterator<Item = (usize, &str, usize)> + '_ {
        self.roads
            .iter()
            .enumerate()
            .flat_map(|(from, m)| m.iter().map(move |(l, &to)| (from, l.as_str(), to)))
    }

    pub fn next_vertex(&self, from: usize, label: &str) -> Option<usize> {
        self.roads[from].get(label).copied()
    }

    /// Station symbols plus the separator.
    pub fn alphabet(&self) -> BTreeSet<char> {
        let mut out: BTreeSet<char> = self.vertices.iter().filter_map(Vertex::symbol).collect();
        out.insert(self.separator);
        out
    }

    pub fn carries(&self, symbol: char) -> bool {
        self.vertices.contains(&Vertex::Station(symbol))
    }

    /// Replaces station symbols; everything else is kept.
    pub(crate) fn with_symbols(&self, symbols: &BTreeMap<usize, char>) -> MapKey {
        let mut out = self.clone();
        for (&v, &c) in symbols {
            out.vertices[v] = Vertex::Station(c);
        }
        out
    }

    /// Symbols reachable from `from` along roads whose intermediate vertices
    /// are all junctions, within `l_max` roads.
    pub fn reachable_symbols(&self, from: usize, l_max: usize) -> BTreeSet<char> {
        let mut out = BTreeSet::new();
        let mut depth = vec![usize::MAX; self.vertices.len()];
        let mut queue = VecDeque::new();
        depth[from] = 0;
        queue.push_back(from);
        while let Some(v) = queue.pop_front() {
            if depth[v] == l_max {
                continue;
            }
            for &to in self.roads[v].values() {
                match self.vertices[to] {
                    Vertex::Station(c) => {
                        out.insert(c);
                    }
                    Vertex::Junction if depth[to] == usize::MAX => {
                        depth[to] = depth[v] + 1;
                        queue.push_back(to);
                    }
                    Vertex::Junction => {}
                }
            }
        }
        out
    }

    /// First reachability gap, or `None` when every symbol can be reached
    /// from the start and from every station within `l_max` roads.
    pub fn first_gap(&self, l_max: usize) -> Option<(usize, char)> {
        let alphabet = self.alphabet();
        let sources = std::iter::once(self.start).chain(
            (0..self.vertices.len()).filter(|&v| matches!(self.vertices[v], Vertex::Station(_))),
        );
        for v in sources {
            let reach = self.reachable_symbols(v, l_max);
            if let Some(&missing) = alphabet.iter().find(|c| !reach.contains(c)) {
                return Some((v, missing));
            }
        }
        None
    }

    /// Full invariant check: separator carried and every symbol reachable.
    pub fn validate(&self, l_max: usize) -> Result<(), MapError> {
        if !self.carries(self.separator) {
            return Err(MapError::SeparatorNotCarried(self.separator));
        }
        match self.first_gap(l_max) {
            Some((from, symbol)) => Err(MapError::Unreachable { from, symbol }),
            None => Ok(()),
        }
    }
}

/// Inserts the separator between equal adjacent symbols.
pub fn normalize_plaintext(msg: &str, separator: char) -> Result<String, MapError> {
    let mut out = String::with_capacity(msg.len());
    let mut prev = None;
    for (position, c) in msg.chars().enumerate() {
        if c == separator {
            return Err(MapError::SeparatorInInput { position });
        }
        if prev == Some(c) {
            out.push(separator);
        }
        out.push(c);
        prev = Some(c);
    }
    Ok(out)
}

pub fn denormalize(msg: &str, separator: char) -> String {
    msg.chars().filter(|&c| c != separator).collect()
}
