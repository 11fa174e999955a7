use rand::seq::SliceRandom;
use rand::{Rng, RngCore};

use super::{MapError, MapKey, Vertex, DEFAULT_L_MAX, DEFAULT_SEPARATOR};

pub const BASE64_PAYLOAD: &str = "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789+/";

const MAX_ATTEMPTS: usize = 10_000;

/// Shape of a generated map.
#[derive(Debug, Clone, PartialEq)]
pub struct MapParams {
    /// Payload symbols, separator excluded.
    pub payload: Vec<char>,
    pub separator: char,
    pub stations: usize,
    pub junctions: usize,
    pub labels: usize,
    /// Every symbol must be reachable within this many roads.
    pub l_max: usize,
}

impl MapParams {
    /// 64 Base64 payload symbols plus the separator.
    pub fn base64() -> Self {
        let payload: Vec<char> = BASE64_PAYLOAD.chars().collect();
        let n = payload.len() + 1;
        MapParams {
            payload,
            separator: DEFAULT_SEPARATOR,
            stations: 2 * n,
            junctions: 96,
            labels: 4,
            l_max: DEFAULT_L_MAX,
        }
    }

    /// `n_symbols` symbols counting the separator: the first `n_symbols - 1`
    /// Base64 characters and `.`.
    pub fn with_symbols(n_symbols: usize) -> Self {
        let payload: Vec<char> = BASE64_PAYLOAD
            .chars()
            .take(n_symbols.saturating_sub(1))
            .collect();
        MapParams {
            payload,
            separator: DEFAULT_SEPARATOR,
            stations: 2 * n_symbols,
            junctions: n_symbols,
            labels: 3,
            l_max: DEFAULT_L_MAX,
        }
    }

    pub fn symbols(&self) -> Vec<char> {
        let mut s = self.payload.clone();
        s.push(self.separator);
        s
    }
}

/// Random map satisfying every [`MapKey`] invariant at `params.l_max`.
///
/// Each attempt wires every vertex with one road per label to random
/// targets, then repeatedly rewires a road reachable from a deficient vertex
/// toward a station carrying the missing symbol.
pub fn generate_map<R: RngCore + ?Sized>(
    params: &MapParams,
    rng: &mut R,
) -> Result<MapKey, MapError> {
    let symbols = params.symbols();
    if params.stations < symbols.len() {
        return Err(MapError::TooFewStations {
            stations: params.stations,
            symbols: symbols.len(),
        });
    }
    if params.labels < 2 {
        return Err(MapError::TooFewLabels(params.labels));
    }
    let labels: Vec<String> = (0..params.labels).map(|i| format!("r{i}")).collect();
    let n = params.stations + params.junctions;
    let repairs = 8 * n * symbols.len();

    for _ in 0..MAX_ATTEMPTS {
        let mut vertices: Vec<Vertex> = symbols.iter().map(|&c| Vertex::Station(c)).collect();
        while vertices.len() < params.stations {
            vertices.push(Vertex::Station(*symbols.choose(rng).unwrap()));
        }
        vertices.extend(std::iter::repeat_n(Vertex::Junction, params.junctions));
        vertices.shuffle(rng);

        // targets[v][k]: where road `labels[k]` from v leads
        let mut targets: Vec<Vec<usize>> = (0..n)
            .map(|v| {
                (0..params.labels)
                    .map(|_| random_target(v, &vertices, rng))
                    .collect()
            })
            .collect();
        let start = rng.gen_range(0..n);

        for _ in 0..repairs {
            let key = assemble(&vertices, &targets, &labels, start, params.separator);
            let Some((from, missing)) = key.first_gap(params.l_max) else {
                return Ok(key);
            };
            let (v, k, to) = repair_move(&key, from, missing, params.l_max, params.labels, rng);
            targets[v][k] = to;
        }
    }
    Err(MapError::GenerationFailed {
        attempts: MAX_ATTEMPTS,
    })
}

fn random_target<R: RngCore + ?Sized>(from: usize, vertices: &[Vertex], rng: &mut R) -> usize {
    loop {
        let to = rng.gen_range(0..vertices.len());
        // junction self-loops can never lie on a simple path
        if to != from || vertices[from] != Vertex::Junction {
            return to;
        }
    }
}

fn assemble(
    vertices: &[Vertex],
    targets: &[Vec<usize>],
    labels: &[String],
    start: usize,
    sep: char,
) -> MapKey {
    let edges = targets.iter().enumerate().flat_map(|(v, ts)| {
        ts.iter()
            .enumerate()
            .map(move |(k, &to)| (v, labels[k].clone(), to))
    });
    MapKey::new(vertices.to_vec(), edges, start, sep).expect("generated ids are in range")
}

/// Picks a rewiring `(vertex, label index, new target)` that makes
/// `missing` reachable from `from`: either a road straight to a carrier, or
/// a road into a junction that already reaches the symbol in the remaining
/// budget. Junction moves are preferred since they keep the fan-out.
fn repair_move<R: RngCore + ?Sized>(
    key: &MapKey,
    from: usize,
    missing: char,
    l_max: usize,
    n_labels: usize,
    rng: &mut R,
) -> (usize, usize, usize) {
    let slots = reachable_slots(key, from, l_max, n_labels);
    let carriers: Vec<usize> = (0..key.vertices().len())
        .filter(|&v| key.vertices()[v] == Vertex::Station(missing))
        .collect();
    let to_missing = distance_to_symbol(key, missing);
    let mut junction_moves = Vec::new();
    for &(v, k, depth) in &slots {
        let budget = l_max - depth - 1;
        for (j, &d) in to_missing.iter().enumerate() {
            if d <= budget && j != v && j != from {
                junction_moves.push((v, k, j));
            }
        }
    }
    if !junction_moves.is_empty() && rng.gen_bool(0.7) {
        return *junction_moves.choose(rng).unwrap();
    }
    let &(v, k, _) = slots.choose(rng).expect("every vertex has roads");
    (
        v,
        k,
        *carriers.choose(rng).expect("every symbol has a station"),
    )
}

/// For each junction, the fewest roads to a station carrying `symbol` along
/// junction-only paths; `usize::MAX` for stations and unreachable junctions.
fn distance_to_symbol(key: &MapKey, symbol: char) -> Vec<usize> {
    let n = key.vertices().len();
    let mut incoming: Vec<Vec<usize>> = vec![Vec::new(); n];
    for (from, _, to) in key.edges() {
        if key.vertices()[from] == Vertex::Junction {
            incoming[to].push(from);
        }
    }
    let mut dist = vec![usize::MAX; n];
    let mut queue = std::collections::VecDeque::new();
    for v in 0..n {
        if key.vertices()[v] == Vertex::Station(symbol) {
            for &j in &incoming[v] {
                if dist[j] == usize::MAX {
                    dist[j] = 1;
                    queue.push_back(j);
                }
            }
        }
    }
    while let Some(v) = queue.pop_front() {
        for &j in &incoming[v] {
            if dist[j] == usize::MAX {
                dist[j] = dist[v] + 1;
                queue.push_back(j);
            }
        }
    }
    dist
}

/// Road slots `(vertex, label index, depth)` usable by a segment from `from`: the
/// roads of `from` itself and of junctions it reaches in under `l_max` roads.
fn reachable_slots(
    key: &MapKey,
    from: usize,
    l_max: usize,
    n_labels: usize,
) -> Vec<(usize, usize, usize)> {
    let mut depth = vec![usize::MAX; key.vertices().len()];
    depth[from] = 0;
    let mut order = vec![from];
    let mut i = 0;
    while i < order.len() {
        let v = order[i];
        i += 1;
        if depth[v] + 1 >= l_max {
            continue;
        }
        for &to in key.roads_from(v).values() {
            if key.vertices()[to] == Vertex::Junction && depth[to] == usize::MAX {
                depth[to] = depth[v] + 1;
                order.push(to);
            }
        }
    }
    order
        .into_iter()
        .flat_map(|v| {
            let d = depth[v];
            (0..n_labels).map(move |k| (v, k, d))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::RandomSource;

    #[test]
    fn smallest_configuration() {
        let params = MapParams {
            payload: vec!['a'],
            separator: '.',
            stations: 2,
            junctions: 0,
            labels: 2,
            l_max: DEFAULT_L_MAX,
        };
        let key = generate_map(&params, &mut RandomSource::seeded(5)).unwrap();
        assert_eq!(key.vertices().len(), 2);
        key.validate(params.l_max).unwrap();
    }

    #[test]
    fn hundred_seeds_all_valid() {
        let params = MapParams::with_symbols(8);
        for seed in 0..100 {
            let key = generate_map(&params, &mut RandomSource::seeded(seed)).unwrap();
            key.validate(params.l_max).unwrap();
            for v in 0..key.vertices().len() {
                assert_eq!(key.roads_from(v).len(), params.labels);
            }
        }
    }

    #[test]
    fn deterministic_per_seed() {
        let params = MapParams::with_symbols(6);
        let a = generate_map(&params, &mut RandomSource::seeded(12)).unwrap();
        let b = generate_map(&params, &mut RandomSource::seeded(12)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn default_base64_map_is_valid() {
        let params = MapParams::base64();
        let key = generate_map(&params, &mut RandomSource::seeded(1)).unwrap();
        key.validate(params.l_max).unwrap();
        assert_eq!(key.alphabet().len(), 65);
    }

    #[test]
    fn precondition_errors() {
        let mut params = MapParams::with_symbols(4);
        params.stations = 3;
        assert_eq!(
            generate_map(&params, &mut RandomSource::seeded(1)),
            Err(MapError::TooFewStations {
                stations: 3,
                symbols: 4
            })
        );
        let mut params = MapParams::with_symbols(4);
        params.labels = 1;
        assert_eq!(
            generate_map(&params, &mut RandomSource::seeded(1)),
            Err(MapError::TooFewLabels(1))
        );
    }

    #[test]
    fn infeasible_shape_fails_cleanly() {
        // two labels and no junctions cannot reach five symbols from a station
        let params = MapParams {
            payload: "abcd".chars().collect(),
            separator: '.',
            stations: 5,
            junctions: 0,
            labels: 2,
            l_max: 8,
        };
        assert_eq!(
            generate_map(&params, &mut RandomSource::seeded(1)),
            Err(MapError::GenerationFailed {
                attempts: MAX_ATTEMPTS
            })
        );
    }
}
