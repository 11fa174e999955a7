use std::collections::BTreeMap;

use rand::{Rng, RngCore};

use super::{split_message, Granularity, WinnowError};

/// Produces chaff payloads for one wheat packet.
pub trait ChaffStrategy: Send + Sync {
    fn name(&self) -> &'static str;

    /// Payload of the `index`-th chaff packet accompanying `wheat` at `serial`.
    fn chaff_payload(
        &self,
        serial: u32,
        wheat: &[u8],
        granularity: Granularity,
        index: usize,
        rng: &mut dyn RngCore,
    ) -> Vec<u8>;

    /// Renumber the whole stream so chaff no longer shares wheat serials.
    fn distinct_serials(&self) -> bool {
        false
    }
}

fn complement(wheat: &[u8], granularity: Granularity) -> Vec<u8> {
    let mask = granularity.unit_mask();
    wheat.iter().map(|b| !b & mask).collect()
}

fn random_like(wheat: &[u8], granularity: Granularity, rng: &mut dyn RngCore) -> Vec<u8> {
    let mask = granularity.unit_mask();
    (0..wheat.len()).map(|_| rng.gen::<u8>() & mask).collect()
}

/// The wheat with every meaningful bit inverted.
#[derive(Debug, Clone, Copy, Default)]
pub struct BitComplement;

impl ChaffStrategy for BitComplement {
    fn name(&self) -> &'static str {
        "bit-complement"
    }

    fn chaff_payload(
        &self,
        _: u32,
        wheat: &[u8],
        g: Granularity,
        _: usize,
        _: &mut dyn RngCore,
    ) -> Vec<u8> {
        complement(wheat, g)
    }
}

/// Uniform payload of the wheat's length.
#[derive(Debug, Clone, Copy, Default)]
pub struct RandomPayload;

impl ChaffStrategy for RandomPayload {
    fn name(&self) -> &'static str {
        "random-payload"
    }

    fn chaff_payload(
        &self,
        _: u32,
        wheat: &[u8],
        g: Granularity,
        _: usize,
        rng: &mut dyn RngCore,
    ) -> Vec<u8> {
        random_like(wheat, g, rng)
    }
}

/// Chaff spelling out whole decoy messages.
///
/// The `i`-th chaff packet of serial `s` carries unit `s` of candidate
/// `i mod k`, so an eavesdropper can assemble every candidate as readily as
/// the real message. Past the end of a candidate the payload is random.
#[derive(Debug, Clone)]
pub struct DecoyText {
    units: Vec<Vec<Vec<u8>>>,
    distinct: bool,
}

impl DecoyText {
    pub fn new<M: AsRef<[u8]>>(
        candidates: &[M],
        granularity: Granularity,
        distinct_serials: bool,
    ) -> Result<Self, WinnowError> {
        if candidates.is_empty() {
            return Err(WinnowError::NoCandidates);
        }
        let units = candidates
            .iter()
            .map(|c| {
                Ok(split_message(c.as_ref(), granularity)?
                    .into_iter()
                    .map(|(_, p)| p)
                    .collect())
            })
            .collect::<Result<_, WinnowError>>()?;
        Ok(DecoyText {
            units,
            distinct: distinct_serials,
        })
    }
}

impl ChaffStrategy for DecoyText {
    fn name(&self) -> &'static str {
        "decoy-text"
    }

    fn chaff_payload(
        &self,
        serial: u32,
        wheat: &[u8],
        g: Granularity,
        index: usize,
        rng: &mut dyn RngCore,
    ) -> Vec<u8> {
        let candidate = &self.units[index % self.units.len()];
        match (serial as usize)
            .checked_sub(1)
            .and_then(|i| candidate.get(i))
        {
            Some(unit) => unit.clone(),
            None => random_like(wheat, g, rng),
        }
    }

    fn distinct_serials(&self) -> bool {
        self.distinct
    }
}

/// Settings a strategy constructor may read.
#[derive(Debug, Clone)]
pub struct StrategyConfig {
    pub granularity: Granularity,
    pub candidates: Vec<Vec<u8>>,
    pub distinct_serials: bool,
}

impl Default for StrategyConfig {
    fn default() -> Self {
        StrategyConfig {
            granularity: Granularity::Byte,
            candidates: Vec::new(),
            distinct_serials: false,
        }
    }
}

pub type StrategyCtor = fn(&StrategyConfig) -> Result<Box<dyn ChaffStrategy>, WinnowError>;

/// Chaff strategies by name.
#[derive(Clone)]
pub struct StrategyRegistry {
    ctors: BTreeMap<String, StrategyCtor>,
}

impl StrategyRegistry {
    pub fn empty() -> Self {
        StrategyRegistry {
            ctors: BTreeMap::new(),
        }
    }

    pub fn builtin() -> Self {
        let mut r = Self::empty();
        r.register("bit-complement", |_| Ok(Box::new(BitComplement)));
        r.register("random-payload", |_| Ok(Box::new(RandomPayload)));
        r.register("decoy-text", |cfg| {
            Ok(Box::new(DecoyText::new(
                &cfg.candidates,
                cfg.granularity,
                cfg.distinct_serials,
            )?))
        });
        r
    }

    pub fn register(&mut self, name: &str, ctor: StrategyCtor) {
        self.ctors.insert(name.to_string(), ctor);
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.ctors.keys().map(String::as_str)
    }

    pub fn create(
        &self,
        name: &str,
        cfg: &StrategyConfig,
    ) -> Result<Box<dyn ChaffStrategy>, WinnowError> {
        let ctor = self
            .ctors
            .get(name)
            .ok_or_else(|| WinnowError::UnknownStrategy(name.to_string()))?;
        ctor(cfg)
    }
}

impl Default for StrategyRegistry {
    fn default() -> Self {
        Self::builtin()
    }
}
