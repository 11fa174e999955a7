use std::path::{Path, PathBuf};

use clap::{ArgGroup, Args, Parser, Subcommand, ValueEnum};

use crate::bitflip::EncodeMode;
use crate::winnow::Granularity;

#[derive(Debug, Parser, PartialEq)]
#[command(
    name = "decoykit",
    version,
    about = "Decoy-tolerant ciphers, chaffing and winnowing, and an adversarial bench",
    arg_required_else_help = true
)]
pub struct CliConfig {
    /// Seed for every random choice; omit for system entropy.
    #[arg(long, global = true, env = "DECOYKIT_SEED")]
    pub seed: Option<u64>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args, PartialEq, Default)]
#[command(group(ArgGroup::new("input_source").args(["input", "in_path"])))]
pub struct Io {
    /// Input file (`-` for standard input).
    pub input: Option<PathBuf>,
    /// Input file, as a flag.
    #[arg(long = "in", value_name = "PATH")]
    pub in_path: Option<PathBuf>,
    /// Output file; standard output when omitted.
    #[arg(long = "out", value_name = "PATH")]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args, PartialEq, Default)]
pub struct OutOnly {
    /// Output file; standard output when omitted.
    #[arg(long = "out", value_name = "PATH")]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Subcommand, PartialEq)]
pub enum Command {
    /// Generate a key.
    Keygen {
        #[command(subcommand)]
        kind: KeygenKind,
    },
    /// Encrypt with a BitFlip or BitMap key.
    Encode(Codec),
    /// Decrypt with a BitFlip or BitMap key.
    Decode(Codec),
    /// Split a message into MAC-tagged packets and add chaff.
    Chaff(ChaffArgs),
    /// Keep the packets that authenticate and reassemble the message.
    Winnow(WinnowArgs),
    /// Forge the one-time pad that decrypts a ciphertext to a decoy.
    ForgeKey(ForgeKeyArgs),
    /// XOR input with a one-time pad (encrypts and decrypts).
    Otp(OtpArgs),
    /// Forge keys for a list of candidates and report them.
    TerminalList(TerminalListArgs),
    /// Near-copies of an a-priori list, one per line.
    Mimic(MimicArgs),
    /// Shannon unicity distance H(K) / D.
    Unicity(UnicityArgs),
    /// Evolve a BitFlip alphabet.
    Evolve(EvolveArgs),
    /// Run the randomness battery over the input.
    Analyze(AnalyzeArgs),
    /// Measure a nearest-centroid adversary's advantage.
    Distinguish(DistinguishArgs),
}

#[derive(Debug, Subcommand, PartialEq)]
pub enum KeygenKind {
    /// BitFlip alphabet (`bitflip v1`).
    Bitflip {
        /// Number of letters.
        #[arg(long, default_value_t = 4)]
        n: usize,
        /// Token width in bits.
        #[arg(long, default_value_t = 8)]
        l: usize,
        /// Letter symbols; overrides --n.
        #[arg(long)]
        symbols: Option<String>,
        #[arg(long, default_value_t = 10_000)]
        attempts: usize,
        #[command(flatten)]
        out: OutOnly,
    },
    /// BitMap road map (`bitmap v1`); Base64 payload by default.
    Bitmap {
        /// Payload symbols; the separator `.` is added.
        #[arg(long)]
        symbols: Option<String>,
        #[arg(long, default_value_t = crate::bitmap::DEFAULT_L_MAX)]
        l_max: usize,
        #[arg(long)]
        stations: Option<usize>,
        #[arg(long)]
        junctions: Option<usize>,
        #[arg(long)]
        labels: Option<usize>,
        #[command(flatten)]
        out: OutOnly,
    },
    /// Winnowing MAC key (`winnow v1`).
    Winnow {
        /// Tag width in bits: 16, 32, 64 or 160.
        #[arg(long, default_value_t = 64)]
        tau: u32,
        #[command(flatten)]
        out: OutOnly,
    },
    /// Raw one-time pad bytes.
    Pad {
        #[arg(long)]
        bytes: usize,
        #[command(flatten)]
        out: OutOnly,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SchemeName {
    Bitflip,
    Bitmap,
}

impl Io {
    /// The input path, `None` meaning standard input.
    pub fn input_path(&self) -> Option<&Path> {
        self.input
            .as_deref()
            .or(self.in_path.as_deref())
            .filter(|p| p.as_os_str() != "-")
    }
}

impl SchemeName {
    pub fn as_str(self) -> &'static str {
        match self {
            SchemeName::Bitflip => "bitflip",
            SchemeName::Bitmap => "bitmap",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Default)]
pub enum ModeName {
    #[default]
    Randomized,
    Degenerate,
}

impl From<ModeName> for EncodeMode {
    fn from(m: ModeName) -> Self {
        match m {
            ModeName::Randomized => EncodeMode::Randomized,
            ModeName::Degenerate => EncodeMode::Degenerate,
        }
    }
}

#[derive(Debug, Args, PartialEq)]
pub struct Codec {
    #[arg(value_enum)]
    pub scheme: SchemeName,
    #[arg(long)]
    pub key: PathBuf,
    /// BitFlip: probability of chaff before each letter.
    #[arg(long, default_value_t = 0.0)]
    pub chaff_rate: f64,
    /// BitFlip: encoding mode.
    #[arg(long, value_enum, default_value_t)]
    pub mode: ModeName,
    /// BitMap: treat input as map symbols instead of bytes.
    #[arg(long)]
    pub raw: bool,
    /// BitMap: longest segment between stations.
    #[arg(long, default_value_t = crate::bitmap::DEFAULT_L_MAX)]
    pub l_max: usize,
    #[command(flatten)]
    pub io: Io,
}

#[derive(Debug, Args, PartialEq)]
pub struct ChaffArgs {
    #[arg(long)]
    pub key: PathBuf,
    /// bit, nibble, byte or block:K.
    #[arg(long, default_value = "byte")]
    pub granularity: Granularity,
    /// bit-complement, decoy-text or random-payload.
    #[arg(long, default_value = "random-payload")]
    pub strategy: String,
    #[arg(long, default_value_t = 1)]
    pub per_wheat: usize,
    /// Decoy message for decoy-text; repeat for several.
    #[arg(long = "candidate")]
    pub candidates: Vec<String>,
    /// Renumber serials so chaff does not share wheat serials.
    #[arg(long)]
    pub distinct_serials: bool,
    /// Send the stream to this TCP address instead of the output.
    #[arg(long, conflicts_with = "out")]
    pub connect: Option<String>,
    #[command(flatten)]
    pub io: Io,
}

#[derive(Debug, Args, PartialEq)]
pub struct WinnowArgs {
    #[arg(long)]
    pub key: PathBuf,
    #[arg(long, default_value = "byte")]
    pub granularity: Granularity,
    /// Read the stream from one TCP connection on this address.
    #[arg(long, conflicts_with_all = ["input", "in_path"])]
    pub listen: Option<String>,
    #[command(flatten)]
    pub io: Io,
}

#[derive(Debug, Args, PartialEq)]
#[command(group(ArgGroup::new("decoy_source").args(["decoy", "decoy_file"]).required(true)))]
pub struct ForgeKeyArgs {
    /// Decoy plaintext.
    #[arg(long)]
    pub decoy: Option<String>,
    #[arg(long)]
    pub decoy_file: Option<PathBuf>,
    #[command(flatten)]
    pub io: Io,
}

#[derive(Debug, Args, PartialEq)]
pub struct OtpArgs {
    /// Pad file (raw bytes).
    #[arg(long)]
    pub key: PathBuf,
    #[command(flatten)]
    pub io: Io,
}

#[derive(Debug, Args, PartialEq)]
pub struct TerminalListArgs {
    /// One candidate per line.
    #[arg(long)]
    pub candidates: PathBuf,
    /// Comma-separated weights, one per candidate.
    #[arg(long, value_delimiter = ',')]
    pub weights: Option<Vec<f64>>,
    /// Drop entries below this weight and renormalize.
    #[arg(long, requires = "weights")]
    pub threshold: Option<f64>,
    #[command(flatten)]
    pub io: Io,
}

#[derive(Debug, Args, PartialEq)]
pub struct MimicArgs {
    #[arg(long, default_value_t = 5)]
    pub n: usize,
    #[arg(long, default_value_t = 1)]
    pub max_edits: usize,
    #[command(flatten)]
    pub io: Io,
}

#[derive(Debug, Args, PartialEq)]
pub struct UnicityArgs {
    /// Key entropy in bits.
    #[arg(long)]
    pub key_entropy: f64,
    /// Redundancy in bits per symbol.
    #[arg(long)]
    pub redundancy: f64,
    #[command(flatten)]
    pub out: OutOnly,
}

#[derive(Debug, Args, PartialEq)]
pub struct EvolveArgs {
    #[arg(long, default_value_t = 4)]
    pub n: usize,
    #[arg(long, default_value_t = 8)]
    pub l: usize,
    #[arg(long, default_value_t = 50)]
    pub population: usize,
    #[arg(long, default_value_t = 100)]
    pub generations: usize,
    #[arg(long, default_value_t = 1.0)]
    pub w_capacity: f64,
    #[arg(long, default_value_t = 0.0)]
    pub w_chaff: f64,
    #[arg(long, default_value_t = 0.0)]
    pub w_balance: f64,
    #[arg(long, default_value_t = 0.5)]
    pub target_chaff: f64,
    /// Where to write the best-per-generation CSV.
    #[arg(long)]
    pub csv: Option<PathBuf>,
    #[command(flatten)]
    pub out: OutOnly,
}

#[derive(Debug, Args, PartialEq)]
pub struct AnalyzeArgs {
    #[arg(long, default_value_t = crate::analysis::DEFAULT_ALPHA)]
    pub alpha: f64,
    /// Comma-separated test names; all when omitted.
    #[arg(long, value_delimiter = ',')]
    pub tests: Option<Vec<String>>,
    /// Input is ASCII `0`/`1` text rather than raw bytes.
    #[arg(long)]
    pub bits: bool,
    #[command(flatten)]
    pub io: Io,
}

#[derive(Debug, Args, PartialEq)]
pub struct DistinguishArgs {
    /// BitFlip key.
    #[arg(long)]
    pub key: PathBuf,
    #[arg(long)]
    pub msg_a: String,
    #[arg(long)]
    pub msg_b: String,
    #[arg(long, default_value_t = 4)]
    pub samples: usize,
    #[arg(long, default_value_t = 2000)]
    pub trials: usize,
    #[arg(long, value_enum, default_value_t)]
    pub mode: ModeName,
    /// Labeled observations per message for training.
    #[arg(long, default_value_t = 1)]
    pub training: usize,
    #[arg(long, default_value_t = 0.0)]
    pub chaff_rate: f64,
    #[command(flatten)]
    pub out: OutOnly,
}
