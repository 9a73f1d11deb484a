//! `dtk` command-line tool: image/sequence encoder and decoder plus the
//! offline tools (predictor trainer, entropy-coder benchmark, rate-control
//! simulator, basis renderer).
//!
//! Exit codes: 0 success, 1 usage error, 2 decode/parse error on an input
//! file or bitstream, 3 I/O error, 4 internal invariant violation.

use std::collections::HashMap;
use std::fs;
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use dtk::codec::{
    decode, encode, encode_two_pass, first_pass_log, psnr, render_dc_basis, EncoderConfig,
    RateMode, Tools, SB_SIZE,
};
use dtk::dering::inloop::PipelineOrder;
use dtk::entropy::{bench_throughput, BenchModel};
use dtk::fdip::{
    train_predictors, write_predictors, SparsifyStrategy, TrainOptions, TrainingCorpus,
};
use dtk::io::{read_pgm, write_pgm, Frame, Y4mHeader, Y4mReader, Y4mWriter};
use dtk::rc::{
    gop_types, run_first_pass, simulate_one_pass, simulate_two_pass, RcConfig, SimReport,
    SyntheticEncoder, TwoPassLog,
};
use dtk::transform::partition::PartitionTree;
use dtk::{Error, Result};

const AFTER_HELP: &str = "Exit codes:\n  \
    0  success\n  \
    1  usage error (bad flags, conflicting options, bad config file)\n  \
    2  decode error (malformed/truncated bitstream or input file)\n  \
    3  I/O error (missing paths, unwritable output)\n  \
    4  internal invariant violation\n\n\
    Environment:\n  \
    DTK_THREADS  caps the worker-thread count for batch work (default: all cores)\n\n\
    A --config FILE of key=value lines mirrors every flag of the chosen\n\
    subcommand; command-line flags win on conflict.";

#[derive(Parser)]
#[command(name = "dtk", version, about = "Lapped-transform intra codec toolkit", after_help = AFTER_HELP)]
struct Cli {
    /// key=value config file mirroring the subcommand's flags; flags win.
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Encode a PGM image or Y4M sequence to a .dtk bitstream.
    Encode(EncodeArgs),
    /// Decode a .dtk bitstream to a PGM image or Y4M sequence.
    Decode(DecodeArgs),
    /// Print per-plane PSNR between two PGM images or Y4M sequences.
    Metrics(MetricsArgs),
    /// Train sparse frequency-domain 4x4 intra predictors on a PGM corpus.
    TrainFdip(TrainFdipArgs),
    /// Benchmark entropy-coder throughput on a synthetic symbol stream.
    BenchEc(BenchEcArgs),
    /// Simulate one- and two-pass rate control with a synthetic encoder.
    RcSim(RcSimArgs),
    /// Render the post-filtered DC basis functions of random partitions.
    Basis(BasisArgs),
}

// ------------------------------------------------------------- config --

/// Parsed key=value config file; `#` starts a comment line.
struct Config(HashMap<String, String>);

impl Config {
    fn load(path: Option<&Path>) -> Result<Self> {
        let mut map = HashMap::new();
        if let Some(path) = path {
            for (lineno, line) in fs::read_to_string(path)?.lines().enumerate() {
                let line = line.trim();
                if line.is_empty() || line.starts_with('#') {
                    continue;
                }
                let (k, v) = line.split_once('=').ok_or_else(|| {
                    Error::InvalidArgument(format!(
                        "config line {}: expected key=value, got '{line}'",
                        lineno + 1
                    ))
                })?;
                map.insert(k.trim().to_string(), v.trim().to_string());
            }
        }
        Ok(Self(map))
    }

    fn check_keys(&self, known: &[&str]) -> Result<()> {
        for k in self.0.keys() {
            if !known.contains(&k.as_str()) {
                return Err(Error::InvalidArgument(format!(
                    "unknown config key '{k}' (expected one of: {})",
                    known.join(", ")
                )));
            }
        }
        Ok(())
    }

    fn fill<T: std::str::FromStr>(&self, slot: &mut Option<T>, key: &str) -> Result<()> {
        if slot.is_none() {
            if let Some(v) = self.0.get(key) {
                *slot = Some(v.parse().map_err(|_| {
                    Error::InvalidArgument(format!("config key '{key}': bad value '{v}'"))
                })?);
            }
        }
        Ok(())
    }

    /// A boolean flag given on the command line always wins; otherwise the
    /// config value applies.
    fn fill_flag(&self, slot: &mut bool, key: &str) -> Result<()> {
        if !*slot {
            if let Some(v) = self.0.get(key) {
                *slot = match v.as_str() {
                    "true" | "1" | "yes" => true,
                    "false" | "0" | "no" => false,
                    _ => {
                        return Err(Error::InvalidArgument(format!(
                            "config key '{key}': bad boolean '{v}'"
                        )))
                    }
                };
            }
        }
        Ok(())
    }
}

// ------------------------------------------------------------- encode --

#[derive(Args)]
struct EncodeArgs {
    /// Input image (.pgm) or sequence (.y4m).
    input: PathBuf,
    /// Output bitstream (.dtk).
    output: PathBuf,
    /// Constant quantizer index, 0..=254 (conflicts with --target-bitrate).
    #[arg(long)]
    qp: Option<u8>,
    /// Rate-control target in bits per frame.
    #[arg(long, conflicts_with = "qp")]
    target_bitrate: Option<f64>,
    /// Rate-control buffer interval in frames [default: 12].
    #[arg(long)]
    buffer_frames: Option<usize>,
    /// Frame-type pattern cycled over the sequence (K/G/P/B) [default: KPPPPPPP].
    #[arg(long)]
    gop: Option<String>,
    /// Two-pass rate control: 1 measures, 2 encodes from the log.
    #[arg(long, value_parser = clap::value_parser!(u8).range(1..=2))]
    pass: Option<u8>,
    /// First-pass log file (written by --pass 1, read by --pass 2).
    #[arg(long, value_name = "FILE")]
    log: Option<PathBuf>,
    /// In-loop filter: off, dd, clpf, clpf-dd or dd-clpf [default: off].
    #[arg(long)]
    dering: Option<String>,
    /// Disable the lapped pre-/post-filters.
    #[arg(long)]
    no_lapping: bool,
    /// Disable the hierarchical DC prediction.
    #[arg(long)]
    no_haar_dc: bool,
    /// Disable AC coefficient prediction from coded neighbors.
    #[arg(long)]
    no_ac_copy: bool,
    /// Disable chroma-from-luma prediction.
    #[arg(long)]
    no_cfl: bool,
}

const ENCODE_KEYS: &[&str] = &[
    "qp", "target-bitrate", "buffer-frames", "gop", "pass", "log", "dering", "no-lapping",
    "no-haar-dc", "no-ac-copy", "no-cfl",
];

fn run_encode(mut a: EncodeArgs, cfg: &Config) -> Result<()> {
    cfg.check_keys(ENCODE_KEYS)?;
    cfg.fill(&mut a.qp, "qp")?;
    cfg.fill(&mut a.target_bitrate, "target-bitrate")?;
    cfg.fill(&mut a.buffer_frames, "buffer-frames")?;
    cfg.fill(&mut a.gop, "gop")?;
    cfg.fill(&mut a.pass, "pass")?;
    cfg.fill(&mut a.log, "log")?;
    cfg.fill(&mut a.dering, "dering")?;
    cfg.fill_flag(&mut a.no_lapping, "no-lapping")?;
    cfg.fill_flag(&mut a.no_haar_dc, "no-haar-dc")?;
    cfg.fill_flag(&mut a.no_ac_copy, "no-ac-copy")?;
    cfg.fill_flag(&mut a.no_cfl, "no-cfl")?;

    if a.qp.is_some() && a.target_bitrate.is_some() {
        return Err(Error::InvalidArgument(
            "--qp conflicts with --target-bitrate".into(),
        ));
    }
    if a.pass.is_some() && a.target_bitrate.is_none() {
        return Err(Error::InvalidArgument("--pass requires --target-bitrate".into()));
    }
    if a.pass.is_some() && a.log.is_none() {
        return Err(Error::InvalidArgument("--pass requires --log FILE".into()));
    }

    let tools = Tools {
        lapping: !a.no_lapping,
        haar_dc: !a.no_haar_dc,
        ac_copy: !a.no_ac_copy,
        cfl: !a.no_cfl,
        dering: PipelineOrder::parse(a.dering.as_deref().unwrap_or("off"))?,
    };
    let buffer_frames = a.buffer_frames.unwrap_or(12);
    let gop = a.gop.unwrap_or_else(|| "KPPPPPPP".into());
    let frames = read_frames(&a.input)?;

    let out = match (a.target_bitrate, a.pass) {
        (None, _) => {
            let rate = RateMode::ConstantQp(a.qp.unwrap_or(36));
            encode(&frames, &EncoderConfig { tools, rate })?
        }
        (Some(bits_per_frame), None | Some(1)) => {
            let rate = RateMode::TargetBitrate { bits_per_frame, buffer_frames, gop };
            let out = encode(&frames, &EncoderConfig { tools, rate })?;
            if a.pass == Some(1) {
                let log = first_pass_log(&out, 0);
                let mut w = BufWriter::new(fs::File::create(a.log.as_ref().unwrap())?);
                log.write(&mut w)?;
                w.flush()?;
            }
            out
        }
        (Some(bits_per_frame), Some(_)) => {
            let mut r = BufReader::new(fs::File::open(a.log.as_ref().unwrap())?);
            let log = TwoPassLog::read(&mut r)?;
            encode_two_pass(&frames, &tools, RcConfig::new(bits_per_frame, buffer_frames), log)?
        }
    };

    fs::write(&a.output, &out.bitstream)?;
    let total_bits: u64 = out.frame_bits.iter().sum();
    println!(
        "encoded {} frame(s), {} bytes, {:.1} bits/frame, qp {}..{}",
        frames.len(),
        out.bitstream.len(),
        total_bits as f64 / frames.len() as f64,
        out.frame_qps.iter().min().unwrap(),
        out.frame_qps.iter().max().unwrap(),
    );
    Ok(())
}

// ------------------------------------------------------------- decode --

#[derive(Args)]
struct DecodeArgs {
    /// Input bitstream (.dtk).
    input: PathBuf,
    /// Output image (.pgm, single mono frame) or sequence (.y4m).
    output: PathBuf,
}

fn run_decode(a: DecodeArgs, cfg: &Config) -> Result<()> {
    cfg.check_keys(&[])?;
    let bytes = fs::read(&a.input)?;
    let frames = decode(&bytes)?;
    write_frames(&a.output, &frames)?;
    println!("decoded {} frame(s) to {}", frames.len(), a.output.display());
    Ok(())
}

// ------------------------------------------------------------ metrics --

#[derive(Args)]
struct MetricsArgs {
    /// Reference image or sequence.
    reference: PathBuf,
    /// Image or sequence under test (same format and geometry).
    test: PathBuf,
}

fn run_metrics(a: MetricsArgs, cfg: &Config) -> Result<()> {
    cfg.check_keys(&[])?;
    let refs = read_frames(&a.reference)?;
    let tests = read_frames(&a.test)?;
    if refs.len() != tests.len() {
        return Err(Error::DimensionMismatch(format!(
            "{} reference frame(s) vs {} test frame(s)",
            refs.len(),
            tests.len()
        )));
    }
    let mut totals = [0.0f64; 3];
    let mut planes = 1;
    for (i, (r, t)) in refs.iter().zip(&tests).enumerate() {
        if (r.y.width, r.y.height, r.chroma.is_some())
            != (t.y.width, t.y.height, t.chroma.is_some())
        {
            return Err(Error::DimensionMismatch(format!("frame {i} geometry differs")));
        }
        let py = psnr(&r.y, &t.y);
        totals[0] += py;
        match (&r.chroma, &t.chroma) {
            (Some((ru, rv)), Some((tu, tv))) => {
                planes = 3;
                let (pu, pv) = (psnr(ru, tu), psnr(rv, tv));
                totals[1] += pu;
                totals[2] += pv;
                println!("frame {i}: Y {py:.4} dB  U {pu:.4} dB  V {pv:.4} dB");
            }
            _ => println!("frame {i}: Y {py:.4} dB"),
        }
    }
    let n = refs.len() as f64;
    match planes {
        3 => println!(
            "average: Y {:.4} dB  U {:.4} dB  V {:.4} dB",
            totals[0] / n,
            totals[1] / n,
            totals[2] / n
        ),
        _ => println!("average: Y {:.4} dB", totals[0] / n),
    }
    Ok(())
}

// --------------------------------------------------------- train-fdip --

#[derive(Args)]
struct TrainFdipArgs {
    /// Directory of training images (.pgm), read in sorted order.
    #[arg(long, value_name = "DIR")]
    images: PathBuf,
    /// Classify/train rounds before sparsification [default: 30].
    #[arg(long)]
    iters: Option<usize>,
    /// Maximum nonzero weights per predicted coefficient [default: 4].
    #[arg(long)]
    budget: Option<usize>,
    /// Sparsification order: magnitude or gain_impact [default: gain_impact].
    #[arg(long)]
    strategy: Option<String>,
    /// Output predictor file.
    #[arg(long, value_name = "FILE")]
    out: PathBuf,
}

const TRAIN_KEYS: &[&str] = &["iters", "budget", "strategy"];

fn run_train_fdip(mut a: TrainFdipArgs, cfg: &Config) -> Result<()> {
    cfg.check_keys(TRAIN_KEYS)?;
    cfg.fill(&mut a.iters, "iters")?;
    cfg.fill(&mut a.budget, "budget")?;
    cfg.fill(&mut a.strategy, "strategy")?;

    let opts = TrainOptions {
        iters: a.iters.unwrap_or(30),
        budget: a.budget.unwrap_or(4),
        strategy: SparsifyStrategy::parse(a.strategy.as_deref().unwrap_or("gain_impact"))?,
    };
    let mut paths: Vec<PathBuf> = fs::read_dir(&a.images)?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|e| e == "pgm"))
        .collect();
    paths.sort();
    if paths.is_empty() {
        return Err(Error::InvalidArgument(format!(
            "no .pgm images found in {}",
            a.images.display()
        )));
    }
    let images = load_images_parallel(&paths)?;
    println!(
        "training on {} image(s), iters {}, budget {}, strategy {:?}",
        images.len(),
        opts.iters,
        opts.budget,
        opts.strategy
    );
    let corpus = TrainingCorpus::from_images(&images)?;
    let outcome = train_predictors(&corpus, opts)?;
    let mut w = BufWriter::new(fs::File::create(&a.out)?);
    write_predictors(&mut w, &outcome.predictors)?;
    w.flush()?;
    let nnz: usize = outcome.predictors.modes.iter().map(|m| m.nonzeros()).sum();
    println!(
        "coding gain {:.3} dB, prediction gain {:.3} dB, total {:.3} dB",
        outcome.report.coding_gain_db,
        outcome.report.prediction_gain_db,
        outcome.report.total_db()
    );
    println!("{} nonzero weights across {} modes -> {}", nnz, outcome.predictors.modes.len(), a.out.display());
    Ok(())
}

/// Reads PGM files with up to `worker_cap()` threads, preserving order.
fn load_images_parallel(paths: &[PathBuf]) -> Result<Vec<(Vec<f64>, usize, usize)>> {
    let workers = worker_cap().min(paths.len()).max(1);
    let mut results: Vec<Option<Result<(Vec<f64>, usize, usize)>>> = Vec::new();
    results.resize_with(paths.len(), || None);
    let chunk = paths.len().div_ceil(workers);
    std::thread::scope(|s| {
        for (slot, chunk_paths) in results.chunks_mut(chunk).zip(paths.chunks(chunk)) {
            s.spawn(move || {
                for (out, path) in slot.iter_mut().zip(chunk_paths) {
                    *out = Some(load_image(path));
                }
            });
        }
    });
    results.into_iter().map(|r| r.expect("worker filled every slot")).collect()
}

fn load_image(path: &Path) -> Result<(Vec<f64>, usize, usize)> {
    let plane = read_pgm(&mut fs::File::open(path)?)?;
    let data = plane.samples.iter().map(|&s| s as f64).collect();
    Ok((data, plane.width, plane.height))
}

// ------------------------------------------------------------ bench-ec --

#[derive(Args)]
struct BenchEcArgs {
    /// Decoder model: tree, cdf15 or freq.
    #[arg(long)]
    model: Option<String>,
    /// Symbols in the benchmark stream [default: 1000000].
    #[arg(long)]
    symbols: Option<usize>,
    /// RNG seed for the symbol stream [default: 0].
    #[arg(long)]
    seed: Option<u64>,
}

const BENCH_KEYS: &[&str] = &["model", "symbols", "seed"];

fn run_bench_ec(mut a: BenchEcArgs, cfg: &Config) -> Result<()> {
    cfg.check_keys(BENCH_KEYS)?;
    cfg.fill(&mut a.model, "model")?;
    cfg.fill(&mut a.symbols, "symbols")?;
    cfg.fill(&mut a.seed, "seed")?;

    let models: Vec<BenchModel> = match a.model.as_deref() {
        None | Some("all") => vec![BenchModel::Tree, BenchModel::Cdf15, BenchModel::Freq],
        Some("tree") => vec![BenchModel::Tree],
        Some("cdf15") => vec![BenchModel::Cdf15],
        Some("freq") => vec![BenchModel::Freq],
        Some(other) => {
            return Err(Error::InvalidArgument(format!(
                "unknown benchmark model '{other}' (tree|cdf15|freq|all)"
            )))
        }
    };
    let n = a.symbols.unwrap_or(1_000_000);
    let seed = a.seed.unwrap_or(0);
    println!(
        "{:<6} {:>10} {:>12} {:>10} {:>10} {:>12} {:>12} {:>9}",
        "model", "symbols", "bytes", "enc Mb/s", "dec Mb/s", "enc calls", "dec calls", "bits/val"
    );
    for model in models {
        let r = bench_throughput(model, n, seed);
        println!(
            "{:<6} {:>10} {:>12} {:>10.2} {:>10.2} {:>12} {:>12} {:>9.4}",
            r.model.name(),
            r.n_symbols,
            r.payload_bytes,
            r.encode_mbps,
            r.decode_mbps,
            r.encoder_calls,
            r.decoder_calls,
            r.bits_per_value
        );
    }
    Ok(())
}

// -------------------------------------------------------------- rc-sim --

#[derive(Args)]
struct RcSimArgs {
    /// Number of frames to simulate [default: 1000].
    #[arg(long)]
    frames: Option<usize>,
    /// Target bits per frame [default: 3000].
    #[arg(long)]
    target_bitrate: Option<f64>,
    /// Buffer interval in frames [default: 30].
    #[arg(long)]
    buffer_frames: Option<usize>,
    /// Frame-type pattern (K/G/P/B) [default: KPPBPPBPPGPPBPPB].
    #[arg(long)]
    gop: Option<String>,
    /// Synthetic encoder seed [default: 0].
    #[arg(long)]
    seed: Option<u64>,
    /// Relative log-normal noise on synthetic frame sizes [default: 0].
    #[arg(long)]
    noise: Option<f64>,
    /// Also run a two-pass simulation from a first-pass measurement run.
    #[arg(long)]
    two_pass: bool,
}

const RCSIM_KEYS: &[&str] =
    &["frames", "target-bitrate", "buffer-frames", "gop", "seed", "noise", "two-pass"];

/// Per-type scale of the synthetic encoder: keyframes largest, B smallest.
const SIM_SCALES: [f64; 4] = [40_000.0, 8_000.0, 4_000.0, 2_000.0];
const SIM_ALPHA: [f64; 4] = [1.5, 1.0, 1.0, 1.0];

fn run_rc_sim(mut a: RcSimArgs, cfg: &Config) -> Result<()> {
    cfg.check_keys(RCSIM_KEYS)?;
    cfg.fill(&mut a.frames, "frames")?;
    cfg.fill(&mut a.target_bitrate, "target-bitrate")?;
    cfg.fill(&mut a.buffer_frames, "buffer-frames")?;
    cfg.fill(&mut a.gop, "gop")?;
    cfg.fill(&mut a.seed, "seed")?;
    cfg.fill(&mut a.noise, "noise")?;
    cfg.fill_flag(&mut a.two_pass, "two-pass")?;

    let frames = a.frames.unwrap_or(1000);
    let target = a.target_bitrate.unwrap_or(3000.0);
    let buffer = a.buffer_frames.unwrap_or(30);
    let gop = a.gop.unwrap_or_else(|| "KPPBPPBPPGPPBPPB".into());
    let seed = a.seed.unwrap_or(0);
    let noise = a.noise.unwrap_or(0.0);

    let types = gop_types(&gop, frames)?;
    let mut rc_cfg = RcConfig::new(target, buffer);
    rc_cfg.alpha = SIM_ALPHA;

    let mut enc = SyntheticEncoder::new(SIM_SCALES, SIM_ALPHA, seed).with_noise(noise);
    let one = simulate_one_pass(rc_cfg.clone(), &types, &mut enc)?;
    print_sim_report("one-pass", &one);

    if a.two_pass {
        let mut enc1 = SyntheticEncoder::new(SIM_SCALES, SIM_ALPHA, seed).with_noise(noise);
        let log = run_first_pass(rc_cfg.clone(), &types, &mut enc1, 0)?;
        let mut enc2 = SyntheticEncoder::new(SIM_SCALES, SIM_ALPHA, seed).with_noise(noise);
        let two = simulate_two_pass(rc_cfg, log, &mut enc2)?;
        print_sim_report("two-pass", &two);
    }
    Ok(())
}

fn print_sim_report(label: &str, r: &SimReport) {
    println!(
        "{label}: {} frames, {:.0} bits (target {:.0}), rate error {:+.3}%, qp {}..{}{}{}",
        r.frames,
        r.total_bits,
        r.target_bits,
        r.rate_error() * 100.0,
        r.qps.iter().min().unwrap(),
        r.qps.iter().max().unwrap(),
        if r.underflowed { ", buffer underflow" } else { "" },
        if r.overflowed { ", buffer overflow" } else { "" },
    );
}

// --------------------------------------------------------------- basis --

#[derive(Args)]
struct BasisArgs {
    /// Output image (.pgm).
    output: PathBuf,
    /// RNG seed for the random partitions [default: 7].
    #[arg(long)]
    seed: Option<u64>,
    /// DC amplitude fed to each leaf [default: 1000].
    #[arg(long)]
    amplitude: Option<f64>,
    /// Rendered image width, a multiple of 32 [default: 256].
    #[arg(long)]
    width: Option<usize>,
    /// Rendered image height, a multiple of 32 [default: 256].
    #[arg(long)]
    height: Option<usize>,
    /// Probability of splitting at each partition level [default: 0.5].
    #[arg(long)]
    split_prob: Option<f64>,
}

const BASIS_KEYS: &[&str] = &["seed", "amplitude", "width", "height", "split-prob"];

fn run_basis(mut a: BasisArgs, cfg: &Config) -> Result<()> {
    cfg.check_keys(BASIS_KEYS)?;
    cfg.fill(&mut a.seed, "seed")?;
    cfg.fill(&mut a.amplitude, "amplitude")?;
    cfg.fill(&mut a.width, "width")?;
    cfg.fill(&mut a.height, "height")?;
    cfg.fill(&mut a.split_prob, "split-prob")?;

    let (w, h) = (a.width.unwrap_or(256), a.height.unwrap_or(256));
    if w == 0 || h == 0 || w % SB_SIZE != 0 || h % SB_SIZE != 0 {
        return Err(Error::InvalidArgument(format!(
            "basis dimensions must be nonzero multiples of {SB_SIZE}"
        )));
    }
    let p = a.split_prob.unwrap_or(0.5);
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::InvalidArgument("--split-prob must be in [0, 1]".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(a.seed.unwrap_or(7));
    let trees: Vec<PartitionTree> = (0..(w / SB_SIZE) * (h / SB_SIZE))
        .map(|_| PartitionTree::random(SB_SIZE, p, &mut rng))
        .collect();
    let plane = render_dc_basis(w, h, &trees, a.amplitude.unwrap_or(1000.0), true)?;
    let mut out = BufWriter::new(fs::File::create(&a.output)?);
    write_pgm(&mut out, &plane)?;
    out.flush()?;
    println!("rendered {w}x{h} basis image to {}", a.output.display());
    Ok(())
}

// ----------------------------------------------------------- frame I/O --

#[derive(PartialEq)]
enum Format {
    Pgm,
    Y4m,
}

fn format_of(path: &Path) -> Result<Format> {
    match path.extension().and_then(|e| e.to_str()) {
        Some("pgm") => Ok(Format::Pgm),
        Some("y4m") => Ok(Format::Y4m),
        _ => Err(Error::InvalidArgument(format!(
            "cannot tell the format of '{}' (use a .pgm or .y4m extension)",
            path.display()
        ))),
    }
}

fn read_frames(path: &Path) -> Result<Vec<Frame>> {
    match format_of(path)? {
        Format::Pgm => {
            let plane = read_pgm(&mut fs::File::open(path)?)?;
            Ok(vec![Frame::mono(plane)])
        }
        Format::Y4m => {
            let mut r = Y4mReader::new(BufReader::new(fs::File::open(path)?))?;
            let mut frames = Vec::new();
            while let Some(f) = r.next_frame()? {
                frames.push(f);
            }
            if frames.is_empty() {
                return Err(Error::MalformedInput("Y4M stream has no frames".into()));
            }
            Ok(frames)
        }
    }
}

fn write_frames(path: &Path, frames: &[Frame]) -> Result<()> {
    match format_of(path)? {
        Format::Pgm => {
            if frames.len() != 1 || frames[0].chroma.is_some() {
                return Err(Error::InvalidArgument(
                    "PGM output needs a single mono frame; use a .y4m output".into(),
                ));
            }
            let mut w = BufWriter::new(fs::File::create(path)?);
            write_pgm(&mut w, &frames[0].y)?;
            w.flush()?;
        }
        Format::Y4m => {
            let first = &frames[0];
            let header = Y4mHeader {
                width: first.y.width,
                height: first.y.height,
                mono: first.chroma.is_none(),
                fps: (25, 1),
            };
            let mut w = Y4mWriter::new(BufWriter::new(fs::File::create(path)?), header)?;
            for f in frames {
                w.write_frame(f)?;
            }
        }
    }
    Ok(())
}

// ------------------------------------------------------------- plumbing --

/// Worker-thread cap for batch work, from DTK_THREADS (>= 1).
fn worker_cap() -> usize {
    match std::env::var("DTK_THREADS") {
        Ok(v) => v.parse::<usize>().ok().filter(|&n| n >= 1).unwrap_or(1),
        Err(_) => std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1),
    }
}

fn validate_threads_env() -> Result<()> {
    if let Ok(v) = std::env::var("DTK_THREADS") {
        if v.parse::<usize>().map(|n| n >= 1) != Ok(true) {
            return Err(Error::InvalidArgument(format!(
                "DTK_THREADS must be a positive integer, got '{v}'"
            )));
        }
    }
    Ok(())
}

fn exit_code(e: &Error) -> i32 {
    match e {
        Error::InvalidArgument(_) => 1,
        Error::MalformedStream(_)
        | Error::VersionMismatch(_)
        | Error::Truncated(_)
        | Error::MalformedInput(_)
        | Error::TwoPassLog(_) => 2,
        Error::Io(_) => 3,
        Error::UnsupportedSize(_) | Error::DimensionMismatch(_) => 4,
    }
}

fn dispatch(cli: Cli) -> Result<()> {
    validate_threads_env()?;
    let cfg = Config::load(cli.config.as_deref())?;
    match cli.cmd {
        Cmd::Encode(a) => run_encode(a, &cfg),
        Cmd::Decode(a) => run_decode(a, &cfg),
        Cmd::Metrics(a) => run_metrics(a, &cfg),
        Cmd::TrainFdip(a) => run_train_fdip(a, &cfg),
        Cmd::BenchEc(a) => run_bench_ec(a, &cfg),
        Cmd::RcSim(a) => run_rc_sim(a, &cfg),
        Cmd::Basis(a) => run_basis(a, &cfg),
    }
}

fn main() {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            std::process::exit(code);
        }
    };
    match dispatch(cli) {
        Ok(()) => {}
        Err(e) => {
            eprintln!("dtk: {e}");
            std::process::exit(exit_code(&e));
        }
    }
}
