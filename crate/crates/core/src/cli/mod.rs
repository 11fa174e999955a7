//! The `decoykit` command line.
//!
//! Exit codes: 0 success, 1 usage error, 2 data or format error,
//! 3 verification failure. Data goes to the output, diagnostics to stderr.

use std::ffi::OsString;
use std::fmt::{self, Display};
use std::fs;
use std::io::{self, Read, Write};
use std::net::{TcpListener, TcpStream};
use std::path::Path;

use clap::error::ErrorKind;
use clap::Parser;
use rand::RngCore;

use crate::analysis::{
    distinguisher_experiment, AnalysisError, DistinguisherConfig, TestOutcome, TestRegistry,
};
use crate::bitflip;
use crate::bitstring::BitString;
use crate::equivocation::{
    forge_key, mimic_candidates, otp_encrypt, unicity_distance, EquivocationError, Pad, PadOrigin,
    TerminalList,
};
use crate::evolve::{evolve_alphabet, EvolveError, FitnessConfig};
use crate::rng::RandomSource;
use crate::scheme::{CodecOptions, KeygenOptions, SchemeRegistry};
use crate::winnow::{
    self, chaff_stream, split_message, ChaffPlan, StrategyConfig, StrategyRegistry, TagBits,
    WinnowKey,
};

mod args;

pub use args::*;


pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_DATA: i32 = 2;
pub const EXIT_VERIFY: i32 = 3;

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Data(String),
    Verify(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Data(_) => EXIT_DATA,
            CliError::Verify(_) => EXIT_VERIFY,
        }
    }
}

impl Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m) | CliError::Data(m) | CliError::Verify(m) => f.write_str(m),
        }
    }
}

fn usage(e: impl Display) -> CliError {
    CliError::Usage(e.to_string())
}

fn data(e: impl Display) -> CliError {
    CliError::Data(e.to_string())
}

fn equivocation(e: EquivocationError) -> CliError {
    use EquivocationError::*;
    match e {
        WeightCount { .. }
        | BadWeight { .. }
        | WeightSum(_)
        | BadThreshold(_)
        | NoWeights
        | ZeroEdits
        | NonPositiveRedundancy(_)
        | NegativeEntropy(_)
        | OutOfRange(_) => usage(e),
        _ => data(e),
    }
}

fn analysis(e: AnalysisError) -> CliError {
    use AnalysisError::*;
    match e {
        BadAlpha(_) | UnknownTest(_) | SameMessages | LengthMismatch(..) | BadParameter(_) => {
            usage(e)
        }
        _ => data(e),
    }
}

fn evolve_err(e: EvolveError) -> CliError {
    match e {
        EvolveError::NoValidAlphabet { .. } => data(e),
        _ => usage(e),
    }
}

/// Parses a full argument vector, program name first.
pub fn parse_args<I, T>(argv: I) -> Result<CliConfig, clap::Error>
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    CliConfig::try_parse_from(argv)
}

/// Parses and runs, printing clap's own messages; returns the exit code.
pub fn main_with_args<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    match parse_args(argv) {
        Ok(config) => run(config),
        Err(e) => {
            let _ = e.print();
            match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => EXIT_OK,
                _ => EXIT_USAGE,
            }
        }
    }
}

pub fn run(config: CliConfig) -> i32 {
    match execute(config) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("decoykit: {e}");
            e.exit_code()
        }
    }
}

fn read_file(path: &Path) -> Result<Vec<u8>, CliError> {
    fs::read(path).map_err(|e| data(format!("cannot read {}: {e}", path.display())))
}

fn read_text(path: &Path) -> Result<String, CliError> {
    String::from_utf8(read_file(path)?)
        .map_err(|_| data(format!("{} is not UTF-8 text", path.display())))
}

fn read_input(io: &Io) -> Result<Vec<u8>, CliError> {
    match io.input_path() {
        Some(p) => read_file(p),
        None => {
            let mut buf = Vec::new();
            io::stdin()
                .read_to_end(&mut buf)
                .map_err(|e| data(format!("cannot read standard input: {e}")))?;
            Ok(buf)
        }
    }
}

fn read_input_text(io: &Io) -> Result<String, CliError> {
    String::from_utf8(read_input(io)?).map_err(|_| data("input is not UTF-8 text"))
}

fn write_output(out: Option<&Path>, bytes: &[u8]) -> Result<(), CliError> {
    match out {
        Some(p) => {
            fs::write(p, bytes).map_err(|e| data(format!("cannot write {}: {e}", p.display())))
        }
        None => {
            let mut stdout = io::stdout().lock();
            stdout
                .write_all(bytes)
                .and_then(|_| stdout.flush())
                .map_err(|e| data(format!("cannot write standard output: {e}")))
        }
    }
}

fn execute(config: CliConfig) -> Result<(), CliError> {
    let mut rng = RandomSource::from_option(config.seed);
    match config.command {
        Command::Keygen { kind } => keygen(kind, config.seed, &mut rng),
        Command::Encode(c) => encode(c, &mut rng),
        Command::Decode(c) => decode(c),
        Command::Chaff(c) => chaff(c, &mut rng),
        Command::Winnow(c) => winnow_cmd(c),
        Command::ForgeKey(c) => {
            let ciphertext = read_input(&c.io)?;
            let decoy = match (c.decoy, c.decoy_file) {
                (Some(d), _) => d.into_bytes(),
                (None, Some(p)) => read_file(&p)?,
                (None, None) => unreachable!("clap requires a decoy"),
            };
            let pad = forge_key(&ciphertext, &decoy).map_err(equivocation)?;
            write_output(c.io.out.as_deref(), &pad.to_bytes())
        }
        Command::Otp(c) => {
            let pad = Pad::from_bytes(&read_file(&c.key)?, PadOrigin::Generated(None))
                .map_err(equivocation)?;
            let out = otp_encrypt(&read_input(&c.io)?, &pad).map_err(equivocation)?;
            write_output(c.io.out.as_deref(), &out)
        }
        Command::TerminalList(c) => terminal_list(c),
        Command::Mimic(c) => {
            let text = read_input_text(&c.io)?;
            let apriori: Vec<&str> = text.lines().filter(|l| !l.is_empty()).collect();
            let mimics =
                mimic_candidates(&apriori, c.n, c.max_edits, &mut rng).map_err(equivocation)?;
            let mut out = String::new();
            for m in mimics {
                out.push_str(&m);
                out.push('\n');
            }
            write_output(c.io.out.as_deref(), out.as_bytes())
        }
        Command::Unicity(c) => {
            let u = unicity_distance(c.key_entropy, c.redundancy).map_err(equivocation)?;
            write_output(c.out.out.as_deref(), format!("{u}\n").as_bytes())
        }
        Command::Evolve(c) => evolve(c, &mut rng),
        Command::Analyze(c) => analyze(c),
        Command::Distinguish(c) => distinguish(c, &rng),
    }
}

fn keygen(kind: KeygenKind, seed: Option<u64>, rng: &mut dyn RngCore) -> Result<(), CliError> {
    let registry = SchemeRegistry::builtin();
    let (text, out) = match kind {
        KeygenKind::Bitflip {
            n,
            l,
            symbols,
            attempts,
            out,
        } => {
            let opts = KeygenOptions {
                n,
                l,
                symbols,
                attempts,
                ..KeygenOptions::default()
            };
            let key = registry.get("bitflip").map_err(data)?.keygen(&opts, rng);
            (key.map_err(data)?.into_bytes(), out)
        }
        KeygenKind::Bitmap {
            symbols,
            l_max,
            stations,
            junctions,
            labels,
            out,
        } => {
            let opts = KeygenOptions {
                symbols,
                l_max,
                stations,
                junctions,
                labels,
                ..KeygenOptions::default()
            };
            let key = registry.get("bitmap").map_err(data)?.keygen(&opts, rng);
            (key.map_err(data)?.into_bytes(), out)
        }
        KeygenKind::Winnow { tau, out } => {
            let tau = TagBits::new(tau).map_err(usage)?;
            let key = WinnowKey::generate(tau, rng);
            (winnow::format_key(&key).into_bytes(), out)
        }
        KeygenKind::Pad { bytes, out } => {
            if bytes == 0 {
                return Err(usage("--bytes must be positive"));
            }
            let pad = Pad::generate(bytes, seed, rng).map_err(equivocation)?;
            (pad.to_bytes(), out)
        }
    };
    write_output(out.out.as_deref(), &text)
}

fn codec_options(c: &Codec) -> Result<CodecOptions, CliError> {
    if !(0.0..1.0).contains(&c.chaff_rate) {
        return Err(usage(format!(
            "--chaff-rate must lie in [0, 1), got {}",
            c.chaff_rate
        )));
    }
    Ok(CodecOptions {
        chaff_rate: c.chaff_rate,
        mode: c.mode.into(),
        raw: c.raw,
        l_max: c.l_max,
    })
}

fn encode(c: Codec, rng: &mut dyn RngCore) -> Result<(), CliError> {
    let registry = SchemeRegistry::builtin();
    let scheme = registry.get(c.scheme.as_str()).map_err(data)?;
    let opts = codec_options(&c)?;
    let key = read_text(&c.key)?;
    let input = read_input(&c.io)?;
    let out = scheme.encode(&key, &input, &opts, rng).map_err(data)?;
    write_output(c.io.out.as_deref(), &out)
}

fn decode(c: Codec) -> Result<(), CliError> {
    let registry = SchemeRegistry::builtin();
    let scheme = registry.get(c.scheme.as_str()).map_err(data)?;
    let opts = codec_options(&c)?;
    let key = read_text(&c.key)?;
    let input = read_input(&c.io)?;
    let decoded = scheme.decode(&key, &input, &opts).map_err(data)?;
    if decoded.discarded > 0 {
        eprintln!("discarded {} chaff tokens", decoded.discarded);
    }
    write_output(c.io.out.as_deref(), &decoded.plaintext)
}

fn read_winnow_key(path: &Path) -> Result<WinnowKey, CliError> {
    winnow::parse_key(&read_text(path)?).map_err(|e| data(format!("{}: {e}", path.display())))
}

fn chaff(c: ChaffArgs, rng: &mut dyn RngCore) -> Result<(), CliError> {
    let key = read_winnow_key(&c.key)?;
    let message = read_input(&c.io)?;
    let cfg = StrategyConfig {
        granularity: c.granularity,
        candidates: c.candidates.into_iter().map(String::into_bytes).collect(),
        distinct_serials: c.distinct_serials,
    };
    let strategy = StrategyRegistry::builtin()
        .create(&c.strategy, &cfg)
        .map_err(usage)?;
    let plan = ChaffPlan::new(strategy, c.per_wheat, c.granularity).map_err(usage)?;
    let wheat = split_message(&message, c.granularity).map_err(data)?;
    let packets = chaff_stream(&key, &wheat, &plan, rng);
    let bytes = winnow::encode_stream(&packets).map_err(data)?;
    match c.connect {
        Some(addr) => TcpStream::connect(&addr)
            .and_then(|mut s| s.write_all(&bytes))
            .map_err(|e| data(format!("cannot send to {addr}: {e}"))),
        None => write_output(c.io.out.as_deref(), &bytes),
    }
}

fn winnow_cmd(c: WinnowArgs) -> Result<(), CliError> {
    let key = read_winnow_key(&c.key)?;
    let bytes = match &c.listen {
        Some(addr) => {
            let listener = TcpListener::bind(addr)
                .map_err(|e| data(format!("cannot listen on {addr}: {e}")))?;
            let local = listener.local_addr().map_err(data)?;
            eprintln!("listening on {local}");
            let mut buf = Vec::new();
            listener
                .accept()
                .and_then(|(mut s, _)| s.read_to_end(&mut buf))
                .map_err(|e| data(format!("cannot receive on {local}: {e}")))?;
            buf
        }
        None => read_input(&c.io)?,
    };
    let packets = winnow::decode_stream(&bytes).map_err(data)?;
    let result = winnow::winnow(&key, &packets, c.granularity);
    let r = result.report;
    eprintln!(
        "kept={} discarded={} gaps={} conflicts={} partial_bits={}",
        r.kept, r.discarded, r.gaps, r.conflicts, r.partial_bits
    );
    write_output(c.io.out.as_deref(), &result.message)?;
    if r.conflicts > 0 {
        return Err(CliError::Verify(format!(
            "{} serials authenticated conflicting payloads",
            r.conflicts
        )));
    }
    Ok(())
}

fn terminal_list(c: TerminalListArgs) -> Result<(), CliError> {
    let ciphertext = read_input(&c.io)?;
    let text = read_text(&c.candidates)?;
    let candidates: Vec<&str> = text.lines().collect();
    let mut list = TerminalList::build(&ciphertext, &candidates, c.weights.as_deref())
        .map_err(equivocation)?;
    if let Some(t) = c.threshold {
        list = list.filter_threshold(t).map_err(equivocation)?;
    }
    write_output(c.io.out.as_deref(), list.report().as_bytes())?;
    let failed = list.entries().iter().filter(|e| !e.verified).count();
    if failed > 0 {
        return Err(CliError::Verify(format!(
            "{failed} entries failed re-verification"
        )));
    }
    Ok(())
}

fn evolve(c: EvolveArgs, rng: &mut dyn RngCore) -> Result<(), CliError> {
    let cfg =
        FitnessConfig::new(c.w_capacity, c.w_chaff, c.w_balance, c.target_chaff).map_err(usage)?;
    let report =
        evolve_alphabet(c.n, c.l, c.population, c.generations, &cfg, rng).map_err(evolve_err)?;
    if let Some(p) = &c.csv {
        fs::write(p, report.to_csv())
            .map_err(|e| data(format!("cannot write {}: {e}", p.display())))?;
    }
    eprintln!(
        "fitness={} evaluations={}",
        report.final_fitness, report.evaluations
    );
    write_output(
        c.out.out.as_deref(),
        bitflip::format_key(&report.final_alphabet).as_bytes(),
    )
}

fn parse_ascii_bits(text: &[u8]) -> Result<BitString, CliError> {
    let mut bits = Vec::new();
    for (i, &b) in text.iter().enumerate() {
        match b {
            b'0' => bits.push(false),
            b'1' => bits.push(true),
            b if b.is_ascii_whitespace() => {}
            other => {
                return Err(data(format!(
                    "byte {i}: expected `0` or `1`, found {:?}",
                    other as char
                )))
            }
        }
    }
    Ok(BitString::from_bits(bits))
}

fn analyze(c: AnalyzeArgs) -> Result<(), CliError> {
    let input = read_input(&c.io)?;
    let bits = if c.bits {
        parse_ascii_bits(&input)?
    } else {
        BitString::from_bytes(&input)
    };
    let registry = TestRegistry::builtin();
    let outcomes: Vec<TestOutcome> = match &c.tests {
        None => registry.run_all(&bits, c.alpha).map_err(analysis)?,
        Some(names) => names
            .iter()
            .map(|n| registry.get(n)?.run(&bits, c.alpha))
            .collect::<Result<_, _>>()
            .map_err(analysis)?,
    };
    let mut out = String::new();
    for o in outcomes {
        out.push_str(&format!("{o}\n"));
    }
    write_output(c.io.out.as_deref(), out.as_bytes())
}

fn distinguish(c: DistinguishArgs, rng: &RandomSource) -> Result<(), CliError> {
    let key = read_text(&c.key)?;
    let alphabet =
        bitflip::parse_key(&key).map_err(|e| data(format!("{}: {e}", c.key.display())))?;
    if !(0.0..1.0).contains(&c.chaff_rate) {
        return Err(usage(format!(
            "--chaff-rate must lie in [0, 1), got {}",
            c.chaff_rate
        )));
    }
    let cfg = DistinguisherConfig {
        samples_per_trial: c.samples,
        trials: c.trials,
        mode: c.mode.into(),
        training_observations: c.training,
        chaff_rate: c.chaff_rate,
    };
    let report =
        distinguisher_experiment(&alphabet, &c.msg_a, &c.msg_b, &cfg, rng).map_err(analysis)?;
    write_output(c.out.out.as_deref(), format!("{report}\n").as_bytes())
}
