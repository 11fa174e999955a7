use std::collections::{BTreeSet, HashSet};

use rand::seq::{IteratorRandom, SliceRandom};
use rand::{Rng, RngCore};

use super::EquivocationError;
use crate::bitstring::binomial;

/// Below this many raw neighbors the neighborhood is enumerated exactly.
const ENUMERATE_LIMIT: u128 = 1 << 20;

/// Length-preserving near-copies of the a-priori entries.
///
/// Each mimic differs from some entry in 1 to `max_edits` character
/// substitutions drawn from the characters appearing in the entries, and is
/// not itself an entry.
pub fn mimic_candidates<S: AsRef<str>, R: RngCore + ?Sized>(
    apriori: &[S],
    n_mimics: usize,
    max_edits: usize,
    rng: &mut R,
) -> Result<Vec<String>, EquivocationError> {
    if max_edits == 0 {
        return Err(EquivocationError::ZeroEdits);
    }
    if n_mimics == 0 {
        return Ok(Vec::new());
    }
    let entries: Vec<Vec<char>> = apriori
        .iter()
        .map(|s| s.as_ref().chars().collect())
        .collect();
    let alphabet: Vec<char> = entries
        .iter()
        .flatten()
        .copied()
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    let known: HashSet<&Vec<char>> = entries.iter().collect();

    let bound = neighborhood_bound(&entries, alphabet.len(), max_edits);
    if bound <= ENUMERATE_LIMIT {
        let mut all = BTreeSet::new();
        for e in &entries {
            enumerate(e, &alphabet, max_edits, 0, &mut e.clone(), &mut all);
        }
        all.retain(|m| !known.contains(m));
        if all.len() < n_mimics {
            return Err(EquivocationError::MimicSpaceExhausted {
                requested: n_mimics,
                available: all.len(),
            });
        }
        let mut picked = all.into_iter().choose_multiple(rng, n_mimics);
        picked.shuffle(rng);
        return Ok(picked
            .into_iter()
            .map(|m| m.into_iter().collect())
            .collect());
    }

    let mut seen = HashSet::new();
    let mut out = Vec::with_capacity(n_mimics);
    let mut misses = 0usize;
    while out.len() < n_mimics {
        let m = sample(entries.choose(rng).unwrap(), &alphabet, max_edits, rng);
        if !known.contains(&m) && seen.insert(m.clone()) {
            out.push(m.into_iter().collect());
            misses = 0;
        } else {
            misses += 1;
            if misses > 1_000_000 {
                return Err(EquivocationError::MimicSpaceExhausted {
                    requested: n_mimics,
                    available: out.len(),
                });
            }
        }
    }
    Ok(out)
}

/// Upper bound on neighbors: sum over entries of C(len, k) (|A|-1)^k.
fn neighborhood_bound(entries: &[Vec<char>], alphabet: usize, max_edits: usize) -> u128 {
    let others = alphabet.saturating_sub(1) as u128;
    entries
        .iter()
        .map(|e| {
            (1..=max_edits.min(e.len())).fold(0u128, |acc, k| {
                let ways = others.checked_pow(k as u32).unwrap_or(u128::MAX);
                acc.saturating_add(binomial(e.len(), k).saturating_mul(ways))
            })
        })
        .fold(0u128, u128::saturating_add)
}

fn enumerate(
    origin: &[char],
    alphabet: &[char],
    edits_left: usize,
    from: usize,
    current: &mut Vec<char>,
    out: &mut BTreeSet<Vec<char>>,
) {
    if edits_left == 0 {
        return;
    }
    for i in from..origin.len() {
        for &c in alphabet {
            if c == origin[i] {
                continue;
            }
            current[i] = c;
            out.insert(current.clone());
            enumerate(origin, alphabet, edits_left - 1, i + 1, current, out);
        }
        current[i] = origin[i];
    }
}

fn sample<R: RngCore + ?Sized>(
    origin: &[char],
    alphabet: &[char],
    max_edits: usize,
    rng: &mut R,
) -> Vec<char> {
    let mut m = origin.to_vec();
    let k = rng.gen_range(1..=max_edits.min(origin.len()).max(1));
    for i in rand::seq::index::sample(rng, origin.len(), k.min(origin.len())) {
        let c = loop {
            let c = *alphabet.choose(rng).unwrap();
            if c != origin[i] {
                break c;
            }
        };
        m[i] = c;
    }
    m
}
