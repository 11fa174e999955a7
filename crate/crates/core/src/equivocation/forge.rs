use std::collections::BTreeSet;

use rand::seq::SliceRandom;
use rand::{Rng, RngCore};

use super::EquivocationError;
use crate::bitflip::{BitFlipAlphabet, Letter};
use crate::bitstring::BitString;

pub const FORGE_MAX_L: usize = 10;
pub const FORGE_MAX_N: usize = 4;

/// Symbols tried, in order, for letters the decoy does not use.
const FILLER: &str = "~^`|#@$%";

#[derive(Clone)]
struct Candidate {
    s: Vec<u16>,
    h: Vec<u32>,
}

/// `(tokens decoding to the wrong thing, letters without a transmitter)`.
type Score = (usize, usize);

struct Search<'a> {
    tokens: &'a [u16],
    target: &'a [usize],
    l: usize,
    n: usize,
    /// Per letter, every `(s, h)` at distance `h` from all tokens it must decode.
    choices: Vec<Vec<(u16, u32)>>,
}

impl<'a> Search<'a> {
    fn new(tokens: &'a [u16], target: &'a [usize], l: usize, n: usize) -> Self {
        let choices = (0..n)
            .map(|i| {
                let mine: Vec<u16> = tokens
                    .iter()
                    .zip(target)
                    .filter(|(_, &w)| w == i)
                    .map(|(&t, _)| t)
                    .collect();
                let mut out = Vec::new();
                for s in 0..1u32 << l {
                    let s = s as u16;
                    match mine.first() {
                        None => out.extend((0..=l as u32).map(|h| (s, h))),
                        Some(&t0) => {
                            let h = (s ^ t0).count_ones();
                            if mine.iter().all(|&t| (s ^ t).count_ones() == h) {
                                out.push((s, h));
                            }
                        }
                    }
                }
                out
            })
            .collect();
        Search {
            tokens,
            target,
            l,
            n,
            choices,
        }
    }

    fn feasible(&self) -> bool {
        self.choices.iter().all(|c| !c.is_empty())
    }

    fn decode(&self, c: &Candidate, t: u16) -> Option<usize> {
        let mut hit = None;
        for i in 0..self.n {
            if (c.s[i] ^ t).count_ones() == c.h[i] {
                if hit.is_some() {
                    return None;
                }
                hit = Some(i);
            }
        }
        hit
    }

    fn score(&self, c: &Candidate) -> Score {
        let wrong = self
            .tokens
            .iter()
            .zip(self.target)
            .filter(|(&t, &want)| self.decode(c, t) != Some(want))
            .count();
        if wrong > 0 {
            return (wrong, self.n);
        }
        let mut has = vec![false; self.n];
        for t in 0..1u32 << self.l {
            if let Some(i) = self.decode(c, t as u16) {
                has[i] = true;
            }
        }
        (0, has.iter().filter(|&&x| !x).count())
    }

    fn random<R: RngCore + ?Sized>(&self, rng: &mut R) -> Candidate {
        let mut c = Candidate {
            s: vec![0; self.n],
            h: vec![0; self.n],
        };
        for i in 0..self.n {
            self.resample(&mut c, i, rng);
        }
        c
    }

    /// Redraws letter `i`, allowing a clash with another letter's string only
    /// when nothing else fits; such candidates are rejected at the end.
    fn resample<R: RngCore + ?Sized>(&self, c: &mut Candidate, i: usize, rng: &mut R) {
        for _ in 0..16 {
            let &(s, h) = self.choices[i].choose(rng).unwrap();
            c.s[i] = s;
            c.h[i] = h;
            if !c.s[..i].contains(&s) && !c.s[i + 1..].contains(&s) {
                return;
            }
        }
    }

    fn neighbor<R: RngCore + ?Sized>(&self, c: &Candidate, rng: &mut R) -> Candidate {
        let mut m = c.clone();
        self.resample(&mut m, rng.gen_range(0..self.n), rng);
        m
    }

    fn distinct(c: &Candidate) -> bool {
        c.s.iter().collect::<BTreeSet<_>>().len() == c.s.len()
    }
}

/// Searches for a valid BitFlip alphabet under which `tokens` decode to
/// `decoy`, one letter per token.
///
/// Randomized hill-climbing with restarts over the reference strings and
/// radii, spending at most `budget` candidate evaluations. Each letter only
/// ranges over `(s, h)` pairs that relate every token it must decode, which
/// also exposes decoys no alphabet can produce. `Ok(None)` means no alphabet
/// was found. Letters beyond those the decoy uses get filler
/// symbols. Any result is re-checked with the BitFlip decoder and validator.
pub fn forge_bitflip_alphabet<R: RngCore + ?Sized>(
    tokens: &[BitString],
    decoy: &str,
    n: usize,
    l: usize,
    budget: usize,
    rng: &mut R,
) -> Result<Option<BitFlipAlphabet>, EquivocationError> {
    let out_of_range = |what: String| Err(EquivocationError::OutOfRange(what));
    if l == 0 || l > FORGE_MAX_L {
        return out_of_range(format!("l = {l}, must be in 1..={FORGE_MAX_L}"));
    }
    if n == 0 || n > FORGE_MAX_N {
        return out_of_range(format!("n = {n}, must be in 1..={FORGE_MAX_N}"));
    }
    if n > 1 << l {
        return out_of_range(format!("{n} letters need distinct {l}-bit strings"));
    }
    let decoy: Vec<char> = decoy.chars().collect();
    if decoy.len() != tokens.len() {
        return out_of_range(format!(
            "decoy has {} symbols for {} tokens",
            decoy.len(),
            tokens.len()
        ));
    }
    if let Some(t) = tokens.iter().find(|t| t.len() != l) {
        return out_of_range(format!("token of {} bits, expected {l}", t.len()));
    }
    let used: Vec<char> = decoy
        .iter()
        .copied()
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    if used.len() > n {
        return out_of_range(format!(
            "decoy uses {} symbols, alphabet has {n}",
            used.len()
        ));
    }
    let mut symbols = used.clone();
    symbols.extend(
        FILLER
            .chars()
            .filter(|c| !used.contains(c))
            .take(n - used.len()),
    );

    let raw: Vec<u16> = tokens.iter().map(|t| t.to_u64().unwrap() as u16).collect();
    let target: Vec<usize> = decoy
        .iter()
        .map(|c| symbols.iter().position(|s| s == c).unwrap())
        .collect();
    let search = Search::new(&raw, &target, l, n);
    if !search.feasible() {
        return Ok(None);
    }

    let stall_limit = 64 * l * n;
    let mut spent = 0;
    while spent < budget {
        let mut current = search.random(rng);
        let mut score = search.score(&current);
        if !Search::distinct(&current) {
            score = (tokens.len() + 1, n);
        }
        spent += 1;
        let mut stall = 0;
        while score != (0, 0) && spent < budget && stall < stall_limit {
            let next = search.neighbor(&current, rng);
            let s = if Search::distinct(&next) {
                search.score(&next)
            } else {
                (tokens.len() + 1, n)
            };
            spent += 1;
            if s < score {
                stall = 0;
            } else {
                stall += 1;
            }
            if s <= score {
                current = next;
                score = s;
            }
        }
        if score == (0, 0) && Search::distinct(&current) {
            let alphabet = to_alphabet(&current, &symbols, l);
            if certify(&alphabet, tokens, &decoy) {
                return Ok(Some(alphabet));
            }
        }
    }
    Ok(None)
}

fn to_alphabet(c: &Candidate, symbols: &[char], l: usize) -> BitFlipAlphabet {
    let letters = (0..symbols.len())
        .map(|i| {
            Letter::new(
                symbols[i],
                BitString::from_u64(c.s[i] as u64, l),
                c.h[i] as usize,
            )
        })
        .collect();
    BitFlipAlphabet::new(l, letters).expect("search keeps strings distinct and radii in range")
}

fn certify(alphabet: &BitFlipAlphabet, tokens: &[BitString], decoy: &[char]) -> bool {
    let valid = alphabet.validate().is_ok_and(|r| r.is_valid());
    let decoded = alphabet.decode_stream(tokens);
    valid && decoded.is_ok_and(|d| d.discarded == 0 && d.text.chars().eq(decoy.iter().copied()))
}
