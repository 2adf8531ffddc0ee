//! AWGN/BPSK Monte-Carlo FER/BER simulation.
//!
//! Every frame draws its payload and noise from a ChaCha8 stream selected by
//! `(seed, SNR point, frame index)`, so results do not depend on the worker
//! count and decoders compared on one run see identical LLRs. Frames are
//! decoded in parallel batches and then accumulated in frame order; the stop
//! rule is evaluated after every frame.

use std::fmt;
use std::io::Write;
use std::path::Path;
use std::str::FromStr;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::code::PolarCode;
use crate::error::{PolarError, Result};
use crate::rlld::{CrcStatus, RlldDecoder, Selection};
use crate::sc::{sc_decode, TreeDecoder};
use crate::scl::CaSclDecoder;
use crate::tree::DEFAULT_W_ML;

/// Eb/N0 and the resulting noise level for BPSK over AWGN. The rate counts
/// CRC bits as information.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChannelConfig {
    pub ebn0_db: f64,
    pub rate: f64,
}

impl ChannelConfig {
    pub fn new(ebn0_db: f64, rate: f64) -> Self {
        Self { ebn0_db, rate }
    }

    /// `σ² = 1 / (2·R·10^(Eb/N0 / 10))`.
    pub fn sigma2(&self) -> f64 {
        1.0 / (2.0 * self.rate * 10f64.powf(self.ebn0_db / 10.0))
    }

    /// BPSK symbol: bit 0 → +1, bit 1 → −1.
    pub fn modulate(bit: u8) -> f64 {
        1.0 - 2.0 * bit as f64
    }

    /// Channel LLR `2y/σ²`.
    pub fn llr(&self, y: f64) -> f64 {
        2.0 * y / self.sigma2()
    }
}

/// RNG of one frame at one SNR point.
pub fn frame_rng(seed: u64, point: usize, frame: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(((point as u64) << 48) ^ frame);
    rng
}

/// Adds `N(0, σ²)` noise in place.
pub fn add_awgn<R: Rng>(rng: &mut R, sigma: f64, symbols: &mut [f64]) {
    for s in symbols {
        let z: f64 = rng.sample(StandardNormal);
        *s += sigma * z;
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Frame {
    pub payload: Vec<u8>,
    pub u: Vec<u8>,
    pub codeword: Vec<u8>,
    pub llrs: Vec<f64>,
}

/// Draws a payload, encodes, modulates, adds noise (unless `noiseless`) and
/// returns the channel LLRs.
pub fn generate_frame(
    code: &PolarCode,
    channel: &ChannelConfig,
    rng: &mut ChaCha8Rng,
    noiseless: bool,
) -> Result<Frame> {
    let payload: Vec<u8> = (0..code.payload_len())
        .map(|_| rng.random::<bool>() as u8)
        .collect();
    let u = code.map_payload(&payload)?;
    let codeword = code.encode(&u)?;
    let mut y: Vec<f64> = codeword
        .iter()
        .map(|&b| ChannelConfig::modulate(b))
        .collect();
    if !noiseless {
        add_awgn(rng, channel.sigma2().sqrt(), &mut y);
    }
    let llrs = y.iter().map(|&v| channel.llr(v)).collect();
    Ok(Frame {
        payload,
        u,
        codeword,
        llrs,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Algorithm {
    Sc,
    Ssc,
    MlSsc,
    CaScl,
    Rlld(Selection),
}

impl FromStr for Algorithm {
    type Err = PolarError;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "sc" => Ok(Self::Sc),
            "ssc" => Ok(Self::Ssc),
            "mlssc" | "ml-ssc" => Ok(Self::MlSsc),
            "cascl" | "ca-scl" | "scl" => Ok(Self::CaScl),
            "rlld" | "rlld-lmld" => Ok(Self::Rlld(Selection::Lmld)),
            "rlld-slmld" => Ok(Self::Rlld(Selection::Slmld)),
            other => Err(PolarError::UnknownAlgorithm(other.to_string())),
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Sc => f.write_str("sc"),
            Self::Ssc => f.write_str("ssc"),
            Self::MlSsc => f.write_str("mlssc"),
            Self::CaScl => f.write_str("cascl"),
            Self::Rlld(sel) => write!(f, "rlld-{sel}"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct DecoderSpec {
    pub algorithm: Algorithm,
    pub list_size: usize,
    pub w_t: usize,
    pub w_ml: usize,
}

impl DecoderSpec {
    pub fn sc() -> Self {
        Self {
            algorithm: Algorithm::Sc,
            list_size: 1,
            w_t: 0,
            w_ml: DEFAULT_W_ML,
        }
    }

    pub fn ca_scl(list_size: usize) -> Self {
        Self {
            algorithm: Algorithm::CaScl,
            list_size,
            w_t: 0,
            w_ml: DEFAULT_W_ML,
        }
    }

    pub fn rlld(selection: Selection, list_size: usize, w_t: usize) -> Self {
        Self {
            algorithm: Algorithm::Rlld(selection),
            list_size,
            w_t,
            w_ml: DEFAULT_W_ML,
        }
    }

    pub fn label(&self) -> String {
        match self.algorithm {
            Algorithm::Sc | Algorithm::Ssc => self.algorithm.to_string(),
            Algorithm::MlSsc => format!("mlssc(wml={})", self.w_ml),
            Algorithm::CaScl => format!("cascl(L={})", self.list_size),
            Algorithm::Rlld(_) => {
                format!("{}(L={},wt={})", self.algorithm, self.list_size, self.w_t)
            }
        }
    }

    pub fn build(&self, code: &PolarCode) -> Result<Box<dyn FrameDecoder>> {
        Ok(match self.algorithm {
            Algorithm::Sc => Box::new(ScFrameDecoder(code.clone())),
            Algorithm::Ssc => Box::new(TreeFrameDecoder(code.clone(), TreeDecoder::ssc(code))),
            Algorithm::MlSsc => Box::new(TreeFrameDecoder(
                code.clone(),
                TreeDecoder::ml_ssc(code, self.w_ml)?,
            )),
            Algorithm::CaScl => Box::new(CaSclDecoder::new(code, self.list_size)?),
            Algorithm::Rlld(sel) => Box::new(RlldDecoder::new(
                code,
                self.list_size,
                sel,
                self.w_t,
                self.w_ml,
            )?),
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FrameDecision {
    pub u_hat: Vec<u8>,
    pub codeword: Vec<u8>,
    pub crc: CrcStatus,
}

/// Common interface of every decoder used by the harness.
pub trait FrameDecoder: Send {
    fn decode_frame(&mut self, llrs: &[f64]) -> Result<FrameDecision>;
}

fn crc_status(code: &PolarCode, u: &[u8]) -> CrcStatus {
    match code.crc_passes(u) {
        None => CrcStatus::Absent,
        Some(true) => CrcStatus::Passed,
        Some(false) => CrcStatus::Failed,
    }
}

struct ScFrameDecoder(PolarCode);

impl FrameDecoder for ScFrameDecoder {
    fn decode_frame(&mut self, llrs: &[f64]) -> Result<FrameDecision> {
        let out = sc_decode(&self.0, llrs)?;
        let crc = crc_status(&self.0, &out.u_hat);
        Ok(FrameDecision {
            u_hat: out.u_hat,
            codeword: out.codeword,
            crc,
        })
    }
}

struct TreeFrameDecoder(PolarCode, TreeDecoder);

impl FrameDecoder for TreeFrameDecoder {
    fn decode_frame(&mut self, llrs: &[f64]) -> Result<FrameDecision> {
        let out = self.1.decode(llrs)?;
        let crc = crc_status(&self.0, &out.u_hat);
        Ok(FrameDecision {
            u_hat: out.u_hat,
            codeword: out.codeword,
            crc,
        })
    }
}

impl FrameDecoder for CaSclDecoder {
    fn decode_frame(&mut self, llrs: &[f64]) -> Result<FrameDecision> {
        let out = self.decode(llrs)?;
        Ok(FrameDecision {
            u_hat: out.u_hat,
            codeword: out.codeword,
            crc: out.crc,
        })
    }
}

impl FrameDecoder for RlldDecoder {
    fn decode_frame(&mut self, llrs: &[f64]) -> Result<FrameDecision> {
        let out = self.decode(llrs)?;
        Ok(FrameDecision {
            u_hat: out.u_hat,
            codeword: out.codeword,
            crc: out.crc,
        })
    }
}

/// When to stop simulating one SNR point.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct StopRule {
    pub max_frames: u64,
    /// Stop once every decoder has this many frame errors...
    pub max_errors: u64,
    /// ...and at least this many frames were simulated.
    pub min_frames: u64,
}

impl Default for StopRule {
    fn default() -> Self {
        Self {
            max_frames: 1_000_000,
            max_errors: 200,
            min_frames: 0,
        }
    }
}

impl StopRule {
    /// Exactly `frames` frames per point.
    pub fn fixed(frames: u64) -> Self {
        Self {
            max_frames: frames,
            max_errors: u64::MAX,
            min_frames: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunSpec {
    pub code: PolarCode,
    pub decoder: DecoderSpec,
    pub ebn0_db: Vec<f64>,
    pub stop: StopRule,
    pub seed: u64,
    /// Worker threads; 0 uses the global pool.
    pub workers: usize,
    /// Transmit without noise (the σ → 0 limit) while keeping the LLR scale.
    pub noiseless: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointResult {
    pub ebn0_db: f64,
    pub frames: u64,
    pub frame_errors: u64,
    pub bit_errors: u64,
    pub fer: f64,
    pub ber: f64,
    /// Half-width of the 95% Wilson interval on the FER.
    pub fer_ci95: f64,
    pub fer_ci_low: f64,
    pub fer_ci_high: f64,
    /// Frames whose CRC check failed on the decoder output.
    pub crc_failures: u64,
    pub wall_time_s: f64,
}

impl PointResult {
    fn from_counts(
        ebn0_db: f64,
        frames: u64,
        frame_errors: u64,
        bit_errors: u64,
        crc_failures: u64,
        bits_per_frame: usize,
    ) -> Self {
        let fer = if frames == 0 {
            0.0
        } else {
            frame_errors as f64 / frames as f64
        };
        let ber = if frames == 0 || bits_per_frame == 0 {
            0.0
        } else {
            bit_errors as f64 / (frames as f64 * bits_per_frame as f64)
        };
        let (lo, hi) = wilson_interval(frame_errors, frames);
        Self {
            ebn0_db,
            frames,
            frame_errors,
            bit_errors,
            fer,
            ber,
            fer_ci95: (hi - lo) / 2.0,
            fer_ci_low: lo,
            fer_ci_high: hi,
            crc_failures,
            wall_time_s: 0.0,
        }
    }

    /// Whether `fer` lies inside this point's 95% interval.
    pub fn ci_contains(&self, fer: f64) -> bool {
        fer >= self.fer_ci_low && fer <= self.fer_ci_high
    }

    pub fn ci_overlaps(&self, other: &PointResult) -> bool {
        self.fer_ci_low <= other.fer_ci_high && other.fer_ci_low <= self.fer_ci_high
    }
}

/// 95% Wilson score interval for `k` successes out of `n`.
pub fn wilson_interval(k: u64, n: u64) -> (f64, f64) {
    if n == 0 {
        return (0.0, 1.0);
    }
    let z = 1.959_963_984_540_054f64;
    let n = n as f64;
    let p = k as f64 / n;
    let denom = 1.0 + z * z / n;
    let center = (p + z * z / (2.0 * n)) / denom;
    let half = z * (p * (1.0 - p) / n + z * z / (4.0 * n * n)).sqrt() / denom;
    let lo = if k == 0 {
        0.0
    } else {
        (center - half).max(0.0)
    };
    let hi = if p == 1.0 {
        1.0
    } else {
        (center + half).min(1.0)
    };
    (lo, hi)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunResult {
    pub decoder: String,
    pub seed: u64,
    pub points: Vec<PointResult>,
}

impl RunResult {
    /// Copy with wall-clock fields zeroed, for reproducibility comparisons.
    pub fn without_timing(&self) -> Self {
        let mut r = self.clone();
        for p in &mut r.points {
            p.wall_time_s = 0.0;
        }
        r
    }
}

/// Simulates one decoder.
pub fn simulate(spec: &RunSpec) -> Result<RunResult> {
    let mut results = simulate_many(
        &spec.code,
        &[spec.decoder],
        &spec.ebn0_db,
        spec.stop,
        spec.seed,
        spec.workers,
        spec.noiseless,
    )?;
    Ok(results.remove(0))
}

/// Paired comparison: both decoders decode the same frames.
pub fn compare_paired(a: &RunSpec, b: &RunSpec) -> Result<(RunResult, RunResult)> {
    if a.code != b.code || a.ebn0_db != b.ebn0_db || a.seed != b.seed || a.noiseless != b.noiseless
    {
        return Err(PolarError::Arch(
            "paired runs must share code, SNR grid, seed and channel mode".into(),
        ));
    }
    let mut r = simulate_many(
        &a.code,
        &[a.decoder, b.decoder],
        &a.ebn0_db,
        a.stop,
        a.seed,
        a.workers,
        a.noiseless,
    )?;
    let rb = r.pop().expect("two results");
    let ra = r.pop().expect("two results");
    Ok((ra, rb))
}

const BATCH: u64 = 256;

/// Runs several decoders on identical frames. A point stops at
/// `stop.max_frames`, or once every decoder has `stop.max_errors` errors and
/// at least `stop.min_frames` frames were run.
pub fn simulate_many(
    code: &PolarCode,
    decoders: &[DecoderSpec],
    ebn0_db: &[f64],
    stop: StopRule,
    seed: u64,
    workers: usize,
    noiseless: bool,
) -> Result<Vec<RunResult>> {
    if ebn0_db.is_empty() {
        return Err(PolarError::EmptySnrGrid);
    }
    for d in decoders {
        d.build(code)?;
    }
    let body = || -> Result<Vec<RunResult>> {
        let mut results: Vec<RunResult> = decoders
            .iter()
            .map(|d| RunResult {
                decoder: d.label(),
                seed,
                points: Vec::new(),
            })
            .collect();
        for (point, &snr) in ebn0_db.iter().enumerate() {
            let points = simulate_point(code, decoders, point, snr, stop, seed, noiseless)?;
            for (r, p) in results.iter_mut().zip(points) {
                r.points.push(p);
            }
        }
        Ok(results)
    };
    if workers == 0 {
        body()
    } else {
        rayon::ThreadPoolBuilder::new()
            .num_threads(workers)
            .build()
            .map_err(|e| PolarError::Arch(e.to_string()))?
            .install(body)
    }
}

#[derive(Debug, Clone, Copy)]
struct Outcome {
    frame_error: bool,
    bit_errors: u64,
    crc_failed: bool,
}

fn simulate_point(
    code: &PolarCode,
    decoders: &[DecoderSpec],
    point: usize,
    ebn0_db: f64,
    stop: StopRule,
    seed: u64,
    noiseless: bool,
) -> Result<Vec<PointResult>> {
    let channel = ChannelConfig::new(ebn0_db, code.rate());
    let started = Instant::now();
    let m = decoders.len();
    let mut frames = 0u64;
    let mut frame_errors = vec![0u64; m];
    let mut bit_errors = vec![0u64; m];
    let mut crc_failures = vec![0u64; m];
    let done = |frames: u64, errs: &[u64]| {
        frames >= stop.max_frames
            || (frames >= stop.min_frames && errs.iter().all(|&e| e >= stop.max_errors))
    };
    'outer: while !done(frames, &frame_errors) {
        let end = (frames + BATCH).min(stop.max_frames);
        let batch: Vec<Vec<Outcome>> = (frames..end)
            .into_par_iter()
            .map_init(
                || {
                    decoders
                        .iter()
                        .map(|d| d.build(code).expect("validated"))
                        .collect::<Vec<_>>()
                },
                |decs, f| -> Result<Vec<Outcome>> {
                    let mut rng = frame_rng(seed, point, f);
                    let frame = generate_frame(code, &channel, &mut rng, noiseless)?;
                    decs.iter_mut()
                        .map(|d| {
                            let dec = d.decode_frame(&frame.llrs)?;
                            let est = code.payload_of(&dec.u_hat);
                            let bit_errors = est
                                .iter()
                                .zip(&frame.payload)
                                .filter(|(a, b)| a != b)
                                .count() as u64;
                            Ok(Outcome {
                                frame_error: bit_errors > 0,
                                bit_errors,
                                crc_failed: dec.crc == CrcStatus::Failed,
                            })
                        })
                        .collect()
                },
            )
            .collect::<Result<_>>()?;
        for outcomes in batch {
            frames += 1;
            for (i, o) in outcomes.iter().enumerate() {
                frame_errors[i] += o.frame_error as u64;
                bit_errors[i] += o.bit_errors;
                crc_failures[i] += o.crc_failed as u64;
            }
            if done(frames, &frame_errors) {
                break 'outer;
            }
        }
    }
    let elapsed = started.elapsed().as_secs_f64();
    Ok((0..m)
        .map(|i| {
            let mut p = PointResult::from_counts(
                ebn0_db,
                frames,
                frame_errors[i],
                bit_errors[i],
                crc_failures[i],
                code.payload_len(),
            );
            p.wall_time_s = elapsed;
            p
        })
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OutputFormat {
    Csv,
    Json,
}

impl FromStr for OutputFormat {
    type Err = PolarError;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "csv" => Ok(Self::Csv),
            "json" => Ok(Self::Json),
            other => Err(PolarError::Parse(format!(
                "unknown output format `{other}`"
            ))),
        }
    }
}

#[derive(Serialize)]
struct CsvRow {
    ebn0_db: f64,
    frames: u64,
    frame_errors: u64,
    fer: f64,
    fer_ci95: f64,
    ber: f64,
    seed: u64,
}

/// Writes a result as CSV (`ebn0_db, frames, frame_errors, fer, fer_ci95,
/// ber, seed`) or JSON.
pub fn emit<W: Write>(result: &RunResult, format: OutputFormat, out: W) -> Result<()> {
    match format {
        OutputFormat::Csv => {
            let mut w = csv::Writer::from_writer(out);
            for p in &result.points {
                w.serialize(CsvRow {
                    ebn0_db: p.ebn0_db,
                    frames: p.frames,
                    frame_errors: p.frame_errors,
                    fer: p.fer,
                    fer_ci95: p.fer_ci95,
                    ber: p.ber,
                    seed: result.seed,
                })
                .map_err(|e| PolarError::Io(e.to_string()))?;
            }
            w.flush()?;
        }
        OutputFormat::Json => {
            let mut out = out;
            serde_json::to_writer_pretty(&mut out, result)
                .map_err(|e| PolarError::Io(e.to_string()))?;
            writeln!(out)?;
        }
    }
    Ok(())
}

pub fn emit_to_path(result: &RunResult, format: OutputFormat, path: &Path) -> Result<()> {
    emit(result, format, std::fs::File::create(path)?)
}
