//! Evolutionary search over BitFlip alphabets.
//!
//! Mutation-only generational loop: the top tenth survives unchanged, the
//! rest of each generation are mutated winners of size-2 tournaments.

use rand::{Rng, RngCore};
use thiserror::Error;

use crate::bitflip::{BitFlipAlphabet, BitFlipError, Letter};
use crate::bitmap::BASE64_PAYLOAD;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EvolveError {
    #[error("fitness weights must be non-negative and not all zero")]
    BadWeights,
    #[error("target chaff fraction must lie in (0, 1), got {0}")]
    BadTarget(f64),
    #[error("invalid parameter: {0}")]
    BadParameter(String),
    #[error("no valid alphabet among {evaluations} candidates")]
    NoValidAlphabet { evaluations: usize },
    #[error(transparent)]
    BitFlip(#[from] BitFlipError),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FitnessConfig {
    w_capacity: f64,
    w_chaff: f64,
    w_balance: f64,
    target_chaff_fraction: f64,
}

impl FitnessConfig {
    pub fn new(
        w_capacity: f64,
        w_chaff: f64,
        w_balance: f64,
        target_chaff_fraction: f64,
    ) -> Result<Self, EvolveError> {
        let weights = [w_capacity, w_chaff, w_balance];
        if weights.iter().any(|w| !w.is_finite() || *w < 0.0) || weights.iter().all(|&w| w == 0.0) {
            return Err(EvolveError::BadWeights);
        }
        if !(target_chaff_fraction > 0.0 && target_chaff_fraction < 1.0) {
            return Err(EvolveError::BadTarget(target_chaff_fraction));
        }
        Ok(FitnessConfig {
            w_capacity,
            w_chaff,
            w_balance,
            target_chaff_fraction,
        })
    }

    pub fn w_capacity(&self) -> f64 {
        self.w_capacity
    }

    pub fn w_chaff(&self) -> f64 {
        self.w_chaff
    }

    pub fn w_balance(&self) -> f64 {
        self.w_balance
    }

    pub fn target_chaff_fraction(&self) -> f64 {
        self.target_chaff_fraction
    }
}

impl Default for FitnessConfig {
    /// Capacity only: maximize the smallest transmitter set.
    fn default() -> Self {
        FitnessConfig::new(1.0, 0.0, 0.0, 0.5).unwrap()
    }
}

/// `-inf` for alphabets with an empty transmitter set, or too wide to count.
pub fn fitness(a: &BitFlipAlphabet, cfg: &FitnessConfig) -> f64 {
    let Ok(report) = a.validate() else {
        return f64::NEG_INFINITY;
    };
    if !report.is_valid() {
        return f64::NEG_INFINITY;
    }
    let counts: Vec<f64> = report
        .transmitter_counts
        .iter()
        .map(|&c| c as f64)
        .collect();
    let mean = counts.iter().sum::<f64>() / counts.len() as f64;
    let variance = counts.iter().map(|c| (c - mean).powi(2)).sum::<f64>() / counts.len() as f64;
    cfg.w_capacity * report.min_transmitters() as f64
        + cfg.w_chaff * (1.0 - (report.chaff_fraction() - cfg.target_chaff_fraction).abs())
        - cfg.w_balance * variance
}

/// One bit of one reference string flipped, or one radius moved by one.
pub fn mutate<R: RngCore + ?Sized>(a: &BitFlipAlphabet, rng: &mut R) -> BitFlipAlphabet {
    let l = a.l();
    loop {
        let mut letters: Vec<Letter> = a.letters().to_vec();
        let i = rng.gen_range(0..letters.len());
        if rng.gen_bool(0.5) {
            letters[i].s.flip(rng.gen_range(0..l));
            if letters
                .iter()
                .enumerate()
                .any(|(j, x)| j != i && x.s == letters[i].s)
            {
                continue;
            }
        } else {
            let h = letters[i].h;
            letters[i].h = match (h, rng.gen_bool(0.5)) {
                (0, _) => 1.min(l),
                (h, _) if h == l => h - 1,
                (h, true) => h + 1,
                (h, false) => h - 1,
            };
            if letters[i].h == h {
                continue;
            }
        }
        return BitFlipAlphabet::new(l, letters).expect("mutation keeps the alphabet well-formed");
    }
}

/// First `n` symbols of the default ordering (lowercase, uppercase, digits, `+/`).
pub fn default_symbols(n: usize) -> Vec<char> {
    let (upper, rest) = BASE64_PAYLOAD.split_at(26);
    let (lower, tail) = rest.split_at(26);
    lower
        .chars()
        .chain(upper.chars())
        .chain(tail.chars())
        .take(n)
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvolutionReport {
    /// Best fitness seen so far, after each generation.
    pub best_per_generation: Vec<f64>,
    pub final_alphabet: BitFlipAlphabet,
    pub final_fitness: f64,
    pub evaluations: usize,
}

impl EvolutionReport {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("generation,best_fitness\n");
        for (g, f) in self.best_per_generation.iter().enumerate() {
            out.push_str(&format!("{},{}\n", g + 1, f));
        }
        out
    }
}

pub fn evolve_alphabet<R: RngCore + ?Sized>(
    n: usize,
    l: usize,
    population: usize,
    generations: usize,
    cfg: &FitnessConfig,
    rng: &mut R,
) -> Result<EvolutionReport, EvolveError> {
    if population < 2 {
        return Err(EvolveError::BadParameter(format!(
            "population {population} < 2"
        )));
    }
    if generations == 0 {
        return Err(EvolveError::BadParameter(
            "generations must be positive".into(),
        ));
    }
    if n == 0 || n > BASE64_PAYLOAD.len() {
        return Err(EvolveError::BadParameter(format!("n = {n} outside 1..=64")));
    }
    let symbols = default_symbols(n);
    let mut pop: Vec<BitFlipAlphabet> = (0..population)
        .map(|_| BitFlipAlphabet::random(&symbols, l, rng))
        .collect::<Result<_, _>>()?;
    let elite = population.div_ceil(10);

    let mut best: Option<(f64, BitFlipAlphabet)> = None;
    let mut curve = Vec::with_capacity(generations);
    let mut evaluations = 0;
    for _ in 0..generations {
        let mut scored: Vec<(f64, BitFlipAlphabet)> =
            pop.drain(..).map(|a| (fitness(&a, cfg), a)).collect();
        evaluations += scored.len();
        // stable sort keeps earlier candidates first among equals
        scored.sort_by(|x, y| y.0.total_cmp(&x.0));
        if best.as_ref().is_none_or(|(f, _)| scored[0].0 > *f) {
            best = Some(scored[0].clone());
        }
        curve.push(best.as_ref().unwrap().0);

        pop.extend(scored[..elite].iter().map(|(_, a)| a.clone()));
        while pop.len() < population {
            let x = &scored[rng.gen_range(0..scored.len())];
            let y = &scored[rng.gen_range(0..scored.len())];
            let winner = if y.0 > x.0 { &y.1 } else { &x.1 };
            pop.push(mutate(winner, rng));
        }
    }
    let (final_fitness, final_alphabet) = best.unwrap();
    if final_fitness == f64::NEG_INFINITY {
        return Err(EvolveError::NoValidAlphabet { evaluations });
    }
    Ok(EvolutionReport {
        best_per_generation: curve,
        final_alphabet,
        final_fitness,
        evaluations,
    })
}
