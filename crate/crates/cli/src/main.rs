use std::fs;
use std::io::{self, BufRead, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use polar_rlld::latency::{rlld_cycles, ArchParams};
use polar_rlld::sim::{
    emit, frame_rng, simulate, Algorithm, DecoderSpec, OutputFormat, RunSpec, StopRule,
};
use polar_rlld::tree::DEFAULT_W_ML;
use polar_rlld::{build_tree, construct_code, CodeTree, ConstructionMethod, CrcConfig, PolarCode};
use rand::Rng;
use serde::{Deserialize, Serialize};

#[derive(Parser)]
#[command(
    name = "polar",
    version,
    about = "Polar code construction, decoding, simulation and latency model"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build a frozen set and write it as a code file.
    Construct(ConstructArgs),
    /// Encode payloads into codewords.
    Encode(EncodeArgs),
    /// Decode channel LLR frames, one frame per line.
    Decode(DecodeArgs),
    /// Run a Monte-Carlo FER/BER simulation.
    Simulate(SimulateArgs),
    /// Report the cycle-count model for a code and thresholds.
    Latency(LatencyArgs),
    /// Dump the pruned code tree or its schedule.
    Tree(TreeArgs),
}

#[derive(Args)]
struct ConstructArgs {
    /// Block length (power of two).
    #[arg(long)]
    n: usize,
    /// Information length, CRC bits included.
    #[arg(long)]
    k: usize,
    #[arg(long, default_value = "ga")]
    method: ConstructionMethod,
    /// Design Eb/N0 in dB. For the Bhattacharyya method the channel parameter
    /// is exp(-R * Eb/N0) unless --z0 is given.
    #[arg(long, default_value_t = polar_rlld::DEFAULT_DESIGN_SNR_DB)]
    design_snr: f64,
    /// Bhattacharyya parameter of the channel, overriding --design-snr.
    #[arg(long)]
    z0: Option<f64>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Clone)]
struct CodeArgs {
    /// Code file: a line `N K` followed by the frozen indices.
    #[arg(long)]
    code: PathBuf,
    /// CRC width appended to the payload (0 for none; 8, 16, 24 or 32).
    #[arg(long, default_value_t = 0)]
    crc: u32,
}

impl CodeArgs {
    fn load(&self) -> Result<PolarCode> {
        load_code(&self.code, self.crc)
    }
}

fn load_code(path: &Path, crc: u32) -> Result<PolarCode> {
    let code =
        PolarCode::read_frozen_file(path).with_context(|| format!("reading {}", path.display()))?;
    Ok(if crc == 0 {
        code
    } else {
        code.with_crc(CrcConfig::from_width(crc)?)?
    })
}

#[derive(Args)]
struct EncodeArgs {
    #[command(flatten)]
    code: CodeArgs,
    /// Payload bits as a 0/1 string; several may be given.
    #[arg(long = "payload")]
    payloads: Vec<String>,
    /// Encode this many random payloads instead.
    #[arg(long)]
    random: Option<u64>,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Clone)]
struct DecoderArgs {
    #[arg(long, default_value = "rlld-lmld")]
    algo: String,
    /// Selection rule for `--algo rlld`: lmld or slmld.
    #[arg(long)]
    mode: Option<String>,
    #[arg(long, default_value_t = 4)]
    list_size: usize,
    #[arg(long, default_value_t = 32)]
    wt: usize,
    #[arg(long, default_value_t = DEFAULT_W_ML)]
    wml: usize,
}

impl DecoderArgs {
    fn spec(&self) -> Result<DecoderSpec> {
        decoder_spec(
            &self.algo,
            self.mode.as_deref(),
            self.list_size,
            self.wt,
            self.wml,
        )
    }
}

fn decoder_spec(
    algo: &str,
    mode: Option<&str>,
    list_size: usize,
    w_t: usize,
    w_ml: usize,
) -> Result<DecoderSpec> {
    let algorithm: Algorithm = match (algo, mode) {
        ("rlld", Some(m)) => format!("rlld-{m}").parse()?,
        (_, Some(_)) => bail!("--mode only applies to --algo rlld"),
        (a, None) => a.parse()?,
    };
    Ok(DecoderSpec {
        algorithm,
        list_size,
        w_t,
        w_ml,
    })
}

#[derive(Args)]
struct DecodeArgs {
    #[command(flatten)]
    code: CodeArgs,
    #[command(flatten)]
    decoder: DecoderArgs,
    /// LLR file, whitespace separated, one frame per line; `-` for stdin.
    #[arg(long)]
    llr: PathBuf,
    #[arg(long)]
    out: Option<PathBuf>,
}

/// Simulation settings. Every field can also come from `--config`, a TOML
/// file of `key = value` pairs using the flag names with underscores.
#[derive(Args, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct SimulateArgs {
    #[arg(long)]
    #[serde(skip)]
    config: Option<PathBuf>,
    #[arg(long)]
    code: Option<PathBuf>,
    #[arg(long)]
    crc: Option<u32>,
    #[arg(long)]
    algo: Option<String>,
    #[arg(long)]
    mode: Option<String>,
    #[arg(long)]
    list_size: Option<usize>,
    #[arg(long)]
    wt: Option<usize>,
    #[arg(long)]
    wml: Option<usize>,
    /// Eb/N0 grid in dB, comma separated.
    #[arg(long, value_delimiter = ',')]
    snr: Option<Vec<f64>>,
    #[arg(long)]
    max_frames: Option<u64>,
    #[arg(long)]
    max_errors: Option<u64>,
    #[arg(long)]
    min_frames: Option<u64>,
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads (0 for all cores).
    #[arg(long)]
    workers: Option<usize>,
    #[arg(long)]
    noiseless: Option<bool>,
    #[arg(long)]
    format: Option<Format>,
    #[arg(long)]
    out: Option<PathBuf>,
}

impl SimulateArgs {
    /// Flags win over the config file.
    fn merged(self) -> Result<Self> {
        let Some(path) = &self.config else {
            return Ok(self);
        };
        let text =
            fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        let file: SimulateArgs =
            toml::from_str(&text).with_context(|| format!("parsing {}", path.display()))?;
        Ok(Self {
            config: None,
            code: self.code.or(file.code),
            crc: self.crc.or(file.crc),
            algo: self.algo.or(file.algo),
            mode: self.mode.or(file.mode),
            list_size: self.list_size.or(file.list_size),
            wt: self.wt.or(file.wt),
            wml: self.wml.or(file.wml),
            snr: self.snr.or(file.snr),
            max_frames: self.max_frames.or(file.max_frames),
            max_errors: self.max_errors.or(file.max_errors),
            min_frames: self.min_frames.or(file.min_frames),
            seed: self.seed.or(file.seed),
            workers: self.workers.or(file.workers),
            noiseless: self.noiseless.or(file.noiseless),
            format: self.format.or(file.format),
            out: self.out.or(file.out),
        })
    }
}

#[derive(Clone, Copy, ValueEnum, Deserialize)]
#[serde(rename_all = "lowercase")]
enum Format {
    Csv,
    Json,
    Text,
    Dot,
}

#[derive(Args)]
struct LatencyArgs {
    #[arg(long)]
    code: PathBuf,
    #[arg(long, default_value_t = 32)]
    wt: usize,
    #[arg(long, default_value_t = DEFAULT_W_ML)]
    wml: usize,
    /// Reported only; the cycle model is shared by all paths.
    #[arg(long, default_value_t = 4)]
    list_size: usize,
    #[arg(long, default_value_t = 128)]
    p: usize,
    #[arg(long, default_value_t = 4)]
    ns: usize,
    #[arg(long, value_enum, default_value = "json")]
    format: Format,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct TreeArgs {
    #[arg(long)]
    code: PathBuf,
    #[arg(long, default_value_t = 32)]
    wt: usize,
    #[arg(long, default_value_t = DEFAULT_W_ML)]
    wml: usize,
    /// What to print: the labeled tree or the decoding schedule.
    #[arg(long, value_enum, default_value = "tree")]
    dump: Dump,
    #[arg(long, value_enum, default_value = "text")]
    format: Format,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Dump {
    Tree,
    Schedule,
}

fn writer(out: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match out {
        Some(p) => Box::new(io::BufWriter::new(
            fs::File::create(p).with_context(|| format!("creating {}", p.display()))?,
        )),
        None => Box::new(io::stdout().lock()),
    })
}

fn parse_bits(s: &str) -> Result<Vec<u8>> {
    s.chars()
        .map(|c| match c {
            '0' => Ok(0),
            '1' => Ok(1),
            other => bail!("invalid bit `{other}`"),
        })
        .collect()
}

fn bits_string(bits: &[u8]) -> String {
    bits.iter()
        .map(|b| if *b == 0 { '0' } else { '1' })
        .collect()
}

fn construct(args: ConstructArgs) -> Result<()> {
    if !args.n.is_power_of_two() {
        bail!("--n must be a power of two, got {}", args.n);
    }
    let depth = args.n.trailing_zeros() as usize;
    let param = match args.method {
        ConstructionMethod::GaussianApproximation => args.design_snr,
        ConstructionMethod::Bhattacharyya => args.z0.unwrap_or_else(|| {
            let rate = args.k as f64 / args.n as f64;
            (-rate * 10f64.powf(args.design_snr / 10.0)).exp()
        }),
    };
    let code = construct_code(depth, args.k, args.method, param)?;
    let mut w = writer(args.out.as_deref())?;
    w.write_all(code.to_frozen_file_string().as_bytes())?;
    w.flush()?;
    Ok(())
}

#[derive(Serialize)]
struct EncodedFrame {
    payload: String,
    u: String,
    codeword: String,
}

fn encode(args: EncodeArgs) -> Result<()> {
    let code = args.code.load()?;
    let mut payloads = args
        .payloads
        .iter()
        .map(|p| parse_bits(p))
        .collect::<Result<Vec<_>>>()?;
    if let Some(count) = args.random {
        for f in 0..count {
            let mut rng = frame_rng(args.seed, 0, f);
            payloads.push(
                (0..code.payload_len())
                    .map(|_| rng.random::<bool>() as u8)
                    .collect(),
            );
        }
    }
    if payloads.is_empty() {
        bail!("nothing to encode: give --payload or --random");
    }
    let mut w = writer(args.out.as_deref())?;
    for payload in payloads {
        let u = code.map_payload(&payload)?;
        let x = code.encode(&u)?;
        let rec = EncodedFrame {
            payload: bits_string(&payload),
            u: bits_string(&u),
            codeword: bits_string(&x),
        };
        writeln!(w, "{}", serde_json::to_string(&rec)?)?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Serialize)]
struct DecodedFrame {
    frame: usize,
    decoder: String,
    payload: String,
    u_hat: String,
    codeword: String,
    crc: polar_rlld::CrcStatus,
}

fn decode(args: DecodeArgs) -> Result<()> {
    let code = args.code.load()?;
    let spec = args.decoder.spec()?;
    let mut dec = spec.build(&code)?;
    let input: Box<dyn BufRead> = if args.llr.as_os_str() == "-" {
        Box::new(io::stdin().lock())
    } else {
        Box::new(io::BufReader::new(
            fs::File::open(&args.llr).with_context(|| format!("opening {}", args.llr.display()))?,
        ))
    };
    let mut w = writer(args.out.as_deref())?;
    let mut frame = 0;
    for (lineno, line) in input.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let llrs = line
            .split_whitespace()
            .map(|t| {
                t.parse::<f64>()
                    .with_context(|| format!("line {}: bad LLR `{t}`", lineno + 1))
            })
            .collect::<Result<Vec<_>>>()?;
        let out = dec
            .decode_frame(&llrs)
            .with_context(|| format!("line {}", lineno + 1))?;
        let rec = DecodedFrame {
            frame,
            decoder: spec.label(),
            payload: bits_string(&code.payload_of(&out.u_hat)),
            u_hat: bits_string(&out.u_hat),
            codeword: bits_string(&out.codeword),
            crc: out.crc,
        };
        writeln!(w, "{}", serde_json::to_string(&rec)?)?;
        frame += 1;
    }
    w.flush()?;
    Ok(())
}

fn simulate_cmd(args: SimulateArgs) -> Result<()> {
    let a = args.merged()?;
    let Some(code_path) = &a.code else {
        bail!("--code is required (flag or config file)")
    };
    let code = load_code(code_path, a.crc.unwrap_or(0))?;
    let decoder = decoder_spec(
        a.algo.as_deref().unwrap_or("rlld-lmld"),
        a.mode.as_deref(),
        a.list_size.unwrap_or(4),
        a.wt.unwrap_or(32),
        a.wml.unwrap_or(DEFAULT_W_ML),
    )?;
    let defaults = StopRule::default();
    let spec = RunSpec {
        code,
        decoder,
        ebn0_db: a.snr.unwrap_or_default(),
        stop: StopRule {
            max_frames: a.max_frames.unwrap_or(defaults.max_frames),
            max_errors: a.max_errors.unwrap_or(defaults.max_errors),
            min_frames: a.min_frames.unwrap_or(defaults.min_frames),
        },
        seed: a.seed.unwrap_or(1),
        workers: a.workers.unwrap_or(0),
        noiseless: a.noiseless.unwrap_or(false),
    };
    let result = simulate(&spec)?;
    let format = match a.format.unwrap_or(Format::Csv) {
        Format::Csv => OutputFormat::Csv,
        Format::Json => OutputFormat::Json,
        _ => bail!("simulate writes csv or json"),
    };
    let mut w = writer(a.out.as_deref())?;
    emit(&result, format, &mut w)?;
    w.flush()?;
    Ok(())
}

#[derive(Serialize)]
struct LatencyOutput {
    w_t: usize,
    w_ml: usize,
    list_size: usize,
    processing_units: usize,
    #[serde(flatten)]
    report: polar_rlld::latency::CycleReport,
}

fn latency(args: LatencyArgs) -> Result<()> {
    let code = load_code(&args.code, 0)?;
    let tree = CodeTree::prune_and_label(&build_tree(&code), args.wt, args.wml)?;
    let params = ArchParams {
        processing_units: args.p,
        pipeline_stages: args.ns,
        ..ArchParams::default()
    };
    let report = rlld_cycles(&tree, &params)?;
    let mut w = writer(args.out.as_deref())?;
    match args.format {
        Format::Json => {
            let out = LatencyOutput {
                w_t: args.wt,
                w_ml: args.wml,
                list_size: args.list_size,
                processing_units: args.p,
                report,
            };
            writeln!(w, "{}", serde_json::to_string_pretty(&out)?)?;
        }
        Format::Text => write!(w, "{}", report.to_text())?,
        _ => bail!("latency writes json or text"),
    }
    w.flush()?;
    Ok(())
}

fn tree(args: TreeArgs) -> Result<()> {
    let code = load_code(&args.code, 0)?;
    let tree = CodeTree::prune_and_label(&build_tree(&code), args.wt, args.wml)?;
    let mut w = writer(args.out.as_deref())?;
    match (args.dump, args.format) {
        (Dump::Tree, Format::Text) => write!(w, "{}", tree.dump_text())?,
        (Dump::Tree, Format::Dot) => write!(w, "{}", tree.to_dot())?,
        (Dump::Schedule, Format::Text) => write!(w, "{}", tree.schedule())?,
        (Dump::Schedule, Format::Json) => {
            writeln!(w, "{}", serde_json::to_string_pretty(&tree.schedule())?)?
        }
        _ => bail!("unsupported dump/format combination"),
    }
    w.flush()?;
    Ok(())
}

fn main() -> ExitCode {
    let result = match Cli::parse().command {
        Command::Construct(a) => construct(a),
        Command::Encode(a) => encode(a),
        Command::Decode(a) => decode(a),
        Command::Simulate(a) => simulate_cmd(a),
        Command::Latency(a) => latency(a),
        Command::Tree(a) => tree(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e)
            if e.downcast_ref::<io::Error>()
                .is_some_and(|e| e.kind() == io::ErrorKind::BrokenPipe) =>
        {
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
