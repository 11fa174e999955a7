use std::collections::HashMap;
use std::fmt;

use rand::{Rng, RngCore};

use super::AnalysisError;
use crate::bitflip::{BitFlipAlphabet, EncodeMode};
use crate::bitstring::BitString;
use crate::rng::RandomSource;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DistinguisherConfig {
    /// Encodings of the secret message the adversary sees per trial.
    pub samples_per_trial: usize,
    pub trials: usize,
    pub mode: EncodeMode,
    /// Labeled observations per message used to train each centroid, each
    /// the same size as a trial observation.
    pub training_observations: usize,
    pub chaff_rate: f64,
}

impl Default for DistinguisherConfig {
    fn default() -> Self {
        DistinguisherConfig {
            samples_per_trial: 4,
            trials: 2000,
            mode: EncodeMode::Randomized,
            training_observations: 1,
            chaff_rate: 0.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdvantageReport {
    pub trials: usize,
    pub correct: usize,
    /// `max(0, 2 correct / trials - 1)`.
    pub advantage: f64,
}

impl AdvantageReport {
    pub fn new(trials: usize, correct: usize) -> Self {
        assert!(correct <= trials);
        let advantage = if trials == 0 {
            0.0
        } else {
            (2.0 * correct as f64 / trials as f64 - 1.0).max(0.0)
        };
        AdvantageReport {
            trials,
            correct,
            advantage,
        }
    }
}

/// `trials correct advantage`
impl fmt::Display for AdvantageReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {} {:.6}", self.trials, self.correct, self.advantage)
    }
}

/// Token frequencies keyed by stream position.
type Features = HashMap<(usize, BitString), f64>;

fn observe<R: RngCore + ?Sized>(
    alphabet: &BitFlipAlphabet,
    msg: &str,
    encodings: usize,
    cfg: &DistinguisherConfig,
    rng: &mut R,
) -> Result<Features, AnalysisError> {
    let mut f = Features::new();
    let w = 1.0 / encodings as f64;
    for _ in 0..encodings {
        let tokens = alphabet.encode_message(msg, cfg.chaff_rate, cfg.mode, rng)?;
        for (pos, t) in tokens.into_iter().enumerate() {
            *f.entry((pos, t)).or_insert(0.0) += w;
        }
    }
    Ok(f)
}

fn distance(x: &Features, c: &Features) -> f64 {
    let mut d: f64 = x
        .iter()
        .map(|(k, v)| (v - c.get(k).unwrap_or(&0.0)).powi(2))
        .sum();
    d += c
        .iter()
        .filter(|(k, _)| !x.contains_key(k))
        .map(|(_, v)| v * v)
        .sum::<f64>();
    d
}

/// Left-or-right game against a key-knowing nearest-centroid adversary.
///
/// Trial `i` runs on `rng.split(i)`. A fair coin picks `msg_a` or `msg_b`,
/// which is encoded `samples_per_trial` times. The adversary trains one
/// centroid per message from fresh labeled encodings (drawn from a stream
/// seeded off the trial stream), then guesses the nearer centroid; ties are
/// broken by a coin.
pub fn distinguisher_experiment(
    alphabet: &BitFlipAlphabet,
    msg_a: &str,
    msg_b: &str,
    cfg: &DistinguisherConfig,
    rng: &RandomSource,
) -> Result<AdvantageReport, AnalysisError> {
    if msg_a == msg_b {
        return Err(AnalysisError::SameMessages);
    }
    let (la, lb) = (msg_a.chars().count(), msg_b.chars().count());
    if la != lb {
        return Err(AnalysisError::LengthMismatch(la, lb));
    }
    if cfg.samples_per_trial == 0 || cfg.trials == 0 || cfg.training_observations == 0 {
        return Err(AnalysisError::BadParameter(
            "samples, trials and training observations must be positive".into(),
        ));
    }
    if let Some((position, symbol)) = msg_a
        .chars()
        .chain(msg_b.chars())
        .enumerate()
        .find(|(_, c)| alphabet.index_of(*c).is_none())
    {
        return Err(crate::bitflip::BitFlipError::UnknownSymbol {
            position: position % la,
            symbol,
        }
        .into());
    }

    let mut correct = 0;
    for i in 0..cfg.trials {
        let mut trial = rng.split(i as u64);
        let mut train = RandomSource::seeded(trial.next_u64());
        let n_train = cfg.training_observations * cfg.samples_per_trial;
        let ca = observe(alphabet, msg_a, n_train, cfg, &mut train)?;
        let cb = observe(alphabet, msg_b, n_train, cfg, &mut train)?;

        let secret_is_a = trial.gen_bool(0.5);
        let msg = if secret_is_a { msg_a } else { msg_b };
        let x = observe(alphabet, msg, cfg.samples_per_trial, cfg, &mut trial)?;
        let (da, db) = (distance(&x, &ca), distance(&x, &cb));
        let guess_a = if da == db {
            trial.gen_bool(0.5)
        } else {
            da < db
        };
        if guess_a == secret_is_a {
            correct += 1;
        }
    }
    Ok(AdvantageReport::new(cfg.trials, correct))
}
