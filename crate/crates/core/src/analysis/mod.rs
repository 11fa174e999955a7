//! The adversary's bench: randomness tests, token frequencies and a
//! distinguishing experiment.

mod distinguish;

pub use distinguish::{distinguisher_experiment, AdvantageReport, DistinguisherConfig};

use std::collections::BTreeMap;
use std::fmt;

use statrs::function::erf::erfc;
use statrs::function::gamma::gamma_ur;
use thiserror::Error;

use crate::bitflip::BitFlipError;
use crate::bitstring::BitString;

pub const DEFAULT_ALPHA: f64 = 0.001;
pub const MIN_TEST_BITS: usize = 100;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AnalysisError {
    #[error("need at least {needed} bits, got {found}")]
    TooShort { needed: usize, found: usize },
    #[error("chi-square needs at least {needed} observations, got {found}")]
    InsufficientSample { needed: u64, found: u64 },
    #[error("chi-square needs at least 2 buckets")]
    TooFewBuckets,
    #[error("significance level {0} outside (0, 1)")]
    BadAlpha(f64),
    #[error("unknown randomness test `{0}`")]
    UnknownTest(String),
    #[error("the two messages must differ")]
    SameMessages,
    #[error("messages have {0} and {1} symbols")]
    LengthMismatch(usize, usize),
    #[error("invalid parameter: {0}")]
    BadParameter(String),
    #[error(transparent)]
    BitFlip(#[from] BitFlipError),
}

#[derive(Debug, Clone, PartialEq)]
pub struct TestResult {
    pub name: String,
    pub statistic: f64,
    pub p_value: f64,
    pub pass: bool,
}

impl TestResult {
    fn new(name: &str, statistic: f64, p_value: f64, alpha: f64) -> Self {
        let p_value = p_value.clamp(0.0, 1.0);
        TestResult {
            name: name.to_string(),
            statistic,
            p_value,
            pass: p_value >= alpha,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum TestOutcome {
    Applicable(TestResult),
    NotApplicable { name: String, reason: String },
}

impl TestOutcome {
    pub fn name(&self) -> &str {
        match self {
            TestOutcome::Applicable(r) => &r.name,
            TestOutcome::NotApplicable { name, .. } => name,
        }
    }

    pub fn result(&self) -> Option<&TestResult> {
        match self {
            TestOutcome::Applicable(r) => Some(r),
            TestOutcome::NotApplicable { .. } => None,
        }
    }
}

/// `name statistic p_value pass`, with `- - not-applicable` for gated tests.
impl fmt::Display for TestOutcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TestOutcome::Applicable(r) => write!(
                f,
                "{} {:.6} {:.6} {}",
                r.name,
                r.statistic,
                r.p_value,
                if r.pass { "pass" } else { "fail" }
            ),
            TestOutcome::NotApplicable { name, .. } => write!(f, "{name} - - not-applicable"),
        }
    }
}

fn check_alpha(alpha: f64) -> Result<(), AnalysisError> {
    if alpha > 0.0 && alpha < 1.0 {
        Ok(())
    } else {
        Err(AnalysisError::BadAlpha(alpha))
    }
}

fn check_length(bits: &BitString) -> Result<(), AnalysisError> {
    if bits.len() < MIN_TEST_BITS {
        return Err(AnalysisError::TooShort {
            needed: MIN_TEST_BITS,
            found: bits.len(),
        });
    }
    Ok(())
}

/// Frequency test: `|#1 - #0| / sqrt(n)` against the normal distribution.
pub fn monobit_test(bits: &BitString, alpha: f64) -> Result<TestResult, AnalysisError> {
    check_alpha(alpha)?;
    check_length(bits)?;
    let n = bits.len() as f64;
    let sum = 2.0 * bits.count_ones() as f64 - n;
    let s_obs = sum.abs() / n.sqrt();
    Ok(TestResult::new(
        "monobit",
        s_obs,
        erfc(s_obs / 2f64.sqrt()),
        alpha,
    ))
}

/// Runs test. Not applicable unless the ones proportion lies in [0.4, 0.6].
pub fn runs_test(bits: &BitString, alpha: f64) -> Result<TestOutcome, AnalysisError> {
    check_alpha(alpha)?;
    check_length(bits)?;
    let n = bits.len() as f64;
    let pi = bits.count_ones() as f64 / n;
    if !(0.4..=0.6).contains(&pi) {
        return Ok(TestOutcome::NotApplicable {
            name: "runs".into(),
            reason: format!("ones proportion {pi:.4} outside [0.4, 0.6]"),
        });
    }
    let mut runs = 1u64;
    let mut prev = bits.get(0);
    for b in bits.iter().skip(1) {
        if b != prev {
            runs += 1;
        }
        prev = b;
    }
    let q = pi * (1.0 - pi);
    let expected = 2.0 * n * q;
    let p = erfc((runs as f64 - expected).abs() / (2.0 * (2.0 * n).sqrt() * q));
    Ok(TestOutcome::Applicable(TestResult::new(
        "runs",
        runs as f64,
        p,
        alpha,
    )))
}

/// Pearson chi-square against the uniform distribution over the buckets.
pub fn chi_square_uniformity(observed: &[u64], alpha: f64) -> Result<TestResult, AnalysisError> {
    check_alpha(alpha)?;
    let k = observed.len();
    if k < 2 {
        return Err(AnalysisError::TooFewBuckets);
    }
    let total: u64 = observed.iter().sum();
    if total < 5 * k as u64 {
        return Err(AnalysisError::InsufficientSample {
            needed: 5 * k as u64,
            found: total,
        });
    }
    let e = total as f64 / k as f64;
    let stat: f64 = observed.iter().map(|&o| (o as f64 - e).powi(2) / e).sum();
    let p = if stat <= 0.0 {
        1.0
    } else {
        gamma_ur((k - 1) as f64 / 2.0, stat / 2.0)
    };
    Ok(TestResult::new("chi-square", stat, p, alpha))
}

/// A named randomness test over a bit sequence.
pub trait RandomnessTest: Send + Sync {
    fn name(&self) -> &'static str;
    fn run(&self, bits: &BitString, alpha: f64) -> Result<TestOutcome, AnalysisError>;
}

pub struct Monobit;

impl RandomnessTest for Monobit {
    fn name(&self) -> &'static str {
        "monobit"
    }

    fn run(&self, bits: &BitString, alpha: f64) -> Result<TestOutcome, AnalysisError> {
        monobit_test(bits, alpha).map(TestOutcome::Applicable)
    }
}

pub struct Runs;

impl RandomnessTest for Runs {
    fn name(&self) -> &'static str {
        "runs"
    }

    fn run(&self, bits: &BitString, alpha: f64) -> Result<TestOutcome, AnalysisError> {
        runs_test(bits, alpha)
    }
}

/// Chi-square over the 256 byte values of the sequence (whole bytes only).
/// Not applicable below five bytes per bucket.
pub struct ByteChiSquare;

impl RandomnessTest for ByteChiSquare {
    fn name(&self) -> &'static str {
        "byte-chi-square"
    }

    fn run(&self, bits: &BitString, alpha: f64) -> Result<TestOutcome, AnalysisError> {
        let mut counts = [0u64; 256];
        let bytes = bits.to_bytes();
        for &b in &bytes[..bits.len() / 8] {
            counts[b as usize] += 1;
        }
        match chi_square_uniformity(&counts, alpha) {
            Ok(mut r) => {
                r.name = self.name().to_string();
                Ok(TestOutcome::Applicable(r))
            }
            Err(e @ AnalysisError::InsufficientSample { .. }) => Ok(TestOutcome::NotApplicable {
                name: self.name().to_string(),
                reason: e.to_string(),
            }),
            Err(e) => Err(e),
        }
    }
}

/// Randomness tests by name, run in name order.
pub struct TestRegistry {
    tests: BTreeMap<String, Box<dyn RandomnessTest>>,
}

impl TestRegistry {
    pub fn empty() -> Self {
        TestRegistry {
            tests: BTreeMap::new(),
        }
    }

    pub fn builtin() -> Self {
        let mut r = Self::empty();
        r.register(Box::new(Monobit));
        r.register(Box::new(Runs));
        r.register(Box::new(ByteChiSquare));
        r
    }

    pub fn register(&mut self, test: Box<dyn RandomnessTest>) {
        self.tests.insert(test.name().to_string(), test);
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.tests.keys().map(String::as_str)
    }

    pub fn get(&self, name: &str) -> Result<&dyn RandomnessTest, AnalysisError> {
        self.tests
            .get(name)
            .map(|t| t.as_ref())
            .ok_or_else(|| AnalysisError::UnknownTest(name.to_string()))
    }

    pub fn run_all(&self, bits: &BitString, alpha: f64) -> Result<Vec<TestOutcome>, AnalysisError> {
        self.tests.values().map(|t| t.run(bits, alpha)).collect()
    }
}

impl Default for TestRegistry {
    fn default() -> Self {
        Self::builtin()
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct FrequencyReport {
    pub histogram: BTreeMap<BitString, usize>,
    /// Fraction of adjacent token pairs that are equal.
    pub repeat_index: f64,
}

pub fn frequency_analysis(tokens: &[BitString]) -> FrequencyReport {
    let mut histogram = BTreeMap::new();
    for t in tokens {
        *histogram.entry(t.clone()).or_insert(0) += 1;
    }
    let repeat_index = if tokens.len() < 2 {
        0.0
    } else {
        tokens.windows(2).filter(|w| w[0] == w[1]).count() as f64 / (tokens.len() - 1) as f64
    };
    FrequencyReport {
        histogram,
        repeat_index,
    }
}
