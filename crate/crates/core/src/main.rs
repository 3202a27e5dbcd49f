//! Command-line front end: BER sweeps, distance tables, delay optimization,
//! Doppler comparisons, and sample dumps, all reproducible from a seed.
//!
//! Every value can come from a flag or from an optional flat `key = value`
//! config file (`--config`); flags win. CSV goes to `--out` or stdout;
//! human-readable run summaries go to stderr so piped CSV stays clean.

use std::collections::HashMap;
use std::ops::RangeInclusive;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;

use diffcpm::distance::{dmin_sweep, optimize_delay};
use diffcpm::report::{ber_csv, ber_svg, dmin_csv, samples_csv, save_text};
use diffcpm::sim::{run_ber, run_doppler_compare, BerResult, Detector, ExperimentConfig, PsiMode};
use diffcpm::waveform::{modulate, CpmFormat, PulseShape, SymbolSequence};
use diffcpm::{Error, Result};

/// Symbol period in seconds. All published operating points are set by the
/// normalized quantities (h, Eb/N0, fd·Ts); this only fixes absolute scale.
const SYMBOL_PERIOD: f64 = 1e-4;

#[derive(Parser)]
#[command(
    name = "diffcpm",
    version,
    about = "CPM link simulator: delay-product (noncoherent) and coherent \
             Viterbi receivers, minimum-distance delay optimization, and \
             Monte Carlo BER measurement"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Monte Carlo BER sweep over an Eb/N0 grid
    Ber(BerArgs),
    /// Minimum squared distance between delay-product signals, per delay K
    Dmin(DminArgs),
    /// Sweep K and report the delay with the largest minimum distance
    #[command(name = "optimize-k")]
    OptimizeK(OptimizeArgs),
    /// Paired BER runs (both receivers, with/without a frequency offset)
    Doppler(DopplerArgs),
    /// Dump modulated complex baseband samples
    Modulate(ModulateArgs),
}

#[derive(Args)]
struct Shared {
    /// Frequency pulse shape: rec, rc, or gauss
    #[arg(long, value_name = "SHAPE")]
    pulse: Option<String>,
    /// Alphabet size (even; power of two for BER runs)
    #[arg(long = "M", value_name = "INT")]
    m: Option<u32>,
    /// Modulation index as a reduced fraction, e.g. 1/2
    #[arg(long = "h", value_name = "NUM/DEN")]
    h: Option<String>,
    /// Frequency pulse length in symbol periods
    #[arg(long = "L", value_name = "INT")]
    l: Option<u32>,
    /// Bandwidth-time product of the gauss pulse
    #[arg(long, value_name = "REAL")]
    bt: Option<f64>,
    /// Samples per symbol period (>= 4)
    #[arg(long, value_name = "INT")]
    sps: Option<u32>,
    /// Master seed; reruns with the same seed are bit-identical
    #[arg(long, value_name = "U64")]
    seed: Option<u64>,
    /// Write CSV to this file instead of stdout
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,
    /// Flat `key = value` config file mirroring flag names; flags override it
    #[arg(long, value_name = "PATH")]
    config: Option<PathBuf>,
}

#[derive(Args)]
struct BerArgs {
    #[command(flatten)]
    shared: Shared,
    /// Receiver under test: diff or coherent
    #[arg(long, value_name = "NAME")]
    detector: Option<String>,
    /// Delay of the delay-product receiver, in symbol periods
    #[arg(long = "K", value_name = "INT")]
    k: Option<u32>,
    /// Eb/N0 grid in dB as start:step:stop (required)
    #[arg(long, value_name = "GRID")]
    ebn0: Option<String>,
    /// Information symbols per frame
    #[arg(long, value_name = "INT")]
    payload: Option<usize>,
    /// Frame budget per Eb/N0 point
    #[arg(long = "max-frames", value_name = "INT")]
    max_frames: Option<u64>,
    /// Stop each point once this many bit errors accumulate
    #[arg(long = "target-errors", value_name = "INT")]
    target_errors: Option<u64>,
    /// Carrier phase offset: "random" (per frame) or a value in radians
    #[arg(long, value_name = "MODE")]
    phase: Option<String>,
    /// Carrier frequency offset in Hz
    #[arg(long = "doppler-hz", value_name = "REAL")]
    doppler_hz: Option<f64>,
    /// Also render the curves to this SVG file
    #[arg(long, value_name = "PATH")]
    plot: Option<PathBuf>,
}

#[derive(Args)]
struct DopplerArgs {
    #[command(flatten)]
    shared: Shared,
    /// Delay of the delay-product receiver, in symbol periods
    #[arg(long = "K", value_name = "INT")]
    k: Option<u32>,
    /// Eb/N0 grid in dB as start:step:stop (required)
    #[arg(long, value_name = "GRID")]
    ebn0: Option<String>,
    /// Information symbols per frame
    #[arg(long, value_name = "INT")]
    payload: Option<usize>,
    /// Frame budget per Eb/N0 point
    #[arg(long = "max-frames", value_name = "INT")]
    max_frames: Option<u64>,
    /// Stop each point once this many bit errors accumulate
    #[arg(long = "target-errors", value_name = "INT")]
    target_errors: Option<u64>,
    /// Carrier phase offset: "random" (per frame) or a value in radians
    #[arg(long, value_name = "MODE")]
    phase: Option<String>,
    /// Carrier frequency offset in Hz for the offset curves (nonzero)
    #[arg(long = "doppler-hz", value_name = "REAL")]
    doppler_hz: Option<f64>,
    /// Also render the curves to this SVG file
    #[arg(long, value_name = "PATH")]
    plot: Option<PathBuf>,
}

#[derive(Args)]
struct DminArgs {
    #[command(flatten)]
    shared: Shared,
    /// Single delay or inclusive range: 3 or 1..6
    #[arg(long = "K", value_name = "INT|A..B")]
    k: Option<String>,
    /// Difference-event length in symbols (default grows with K and L)
    #[arg(long, value_name = "INT")]
    depth: Option<usize>,
    /// Observation window in symbol periods (default covers every merge)
    #[arg(long, value_name = "INT")]
    nobs: Option<usize>,
}

#[derive(Args)]
struct OptimizeArgs {
    #[command(flatten)]
    shared: Shared,
    /// Largest delay to consider
    #[arg(long = "k-max", value_name = "INT")]
    k_max: Option<u32>,
    /// Difference-event length in symbols (default grows with K and L)
    #[arg(long, value_name = "INT")]
    depth: Option<usize>,
    /// Observation window in symbol periods (default covers every merge)
    #[arg(long, value_name = "INT")]
    nobs: Option<usize>,
}

#[derive(Args)]
struct ModulateArgs {
    #[command(flatten)]
    shared: Shared,
    /// Number of random symbols to modulate (ignored with --symbols)
    #[arg(long, value_name = "INT")]
    payload: Option<usize>,
    /// Explicit comma-separated symbols from the alphabet, e.g. 1,-1,3
    #[arg(long, value_name = "LIST")]
    symbols: Option<String>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(err.exit_code() as u8)
        }
    }
}

fn run(command: Command) -> Result<()> {
    match command {
        Command::Ber(args) => run_ber_command(args),
        Command::Dmin(args) => run_dmin_command(args),
        Command::OptimizeK(args) => run_optimize_command(args),
        Command::Doppler(args) => run_doppler_command(args),
        Command::Modulate(args) => run_modulate_command(args),
    }
}

// ---------------------------------------------------------------------------
// Value parsers. They return plain messages; callers add flag or file:line
// context so diagnostics always name the offending field.

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum PulseArg {
    Rec,
    Rc,
    Gauss,
}

impl PulseArg {
    fn to_shape(self, bt: f64) -> std::result::Result<PulseShape, String> {
        match self {
            PulseArg::Rec => Ok(PulseShape::Rec),
            PulseArg::Rc => Ok(PulseShape::Rc),
            PulseArg::Gauss => {
                if bt.is_finite() && bt > 0.0 {
                    Ok(PulseShape::Gaussian { bt })
                } else {
                    Err(format!("gauss pulse needs bt > 0, got {bt}"))
                }
            }
        }
    }
}

fn parse_pulse(s: &str) -> std::result::Result<PulseArg, String> {
    match s {
        "rec" => Ok(PulseArg::Rec),
        "rc" => Ok(PulseArg::Rc),
        "gauss" => Ok(PulseArg::Gauss),
        other => Err(format!("expected rec, rc, or gauss, got '{other}'")),
    }
}

fn parse_detector(s: &str) -> std::result::Result<Detector, String> {
    match s {
        "diff" => Ok(Detector::Differential),
        "coherent" => Ok(Detector::Coherent),
        other => Err(format!("expected diff or coherent, got '{other}'")),
    }
}

fn parse_h(s: &str) -> std::result::Result<(u32, u32), String> {
    let (num, den) = s
        .split_once('/')
        .ok_or_else(|| format!("expected a fraction like 1/2, got '{s}'"))?;
    let num: u32 = num
        .trim()
        .parse()
        .map_err(|_| format!("numerator '{num}' is not a positive integer"))?;
    let den: u32 = den
        .trim()
        .parse()
        .map_err(|_| format!("denominator '{den}' is not a positive integer"))?;
    Ok((num, den))
}

/// Parses "start:step:stop" (inclusive, positive step) or a single value.
fn parse_ebn0_grid(s: &str) -> std::result::Result<Vec<f64>, String> {
    let parts: Vec<&str> = s.split(':').collect();
    let number = |text: &str| -> std::result::Result<f64, String> {
        text.trim()
            .parse::<f64>()
            .ok()
            .filter(|v| v.is_finite())
            .ok_or_else(|| format!("'{text}' is not a finite number"))
    };
    match parts.as_slice() {
        [single] => Ok(vec![number(single)?]),
        [start, step, stop] => {
            let (start, step, stop) = (number(start)?, number(step)?, number(stop)?);
            if step <= 0.0 {
                return Err(format!("step must be > 0, got {step}"));
            }
            if stop < start {
                return Err(format!("stop {stop} is below start {start}"));
            }
            let count = ((stop - start) / step + 1e-9).floor() as usize + 1;
            if count > 10_000 {
                return Err(format!("grid would have {count} points; cap is 10000"));
            }
            Ok((0..count).map(|i| start + i as f64 * step).collect())
        }
        _ => Err(format!("expected start:step:stop or a single value, got '{s}'")),
    }
}

fn parse_phase(s: &str) -> std::result::Result<PsiMode, String> {
    if s == "random" {
        return Ok(PsiMode::Random);
    }
    s.parse::<f64>()
        .ok()
        .filter(|v| v.is_finite())
        .map(PsiMode::Fixed)
        .ok_or_else(|| format!("expected 'random' or a value in radians, got '{s}'"))
}

/// Parses "3" or "1..6" into an inclusive delay range.
fn parse_k_range(s: &str) -> std::result::Result<RangeInclusive<u32>, String> {
    let bound = |text: &str| -> std::result::Result<u32, String> {
        text.trim()
            .parse::<u32>()
            .ok()
            .filter(|&k| k >= 1)
            .ok_or_else(|| format!("'{text}' is not an integer >= 1"))
    };
    match s.split_once("..") {
        None => {
            let k = bound(s)?;
            Ok(k..=k)
        }
        Some((a, b)) => {
            let (a, b) = (bound(a)?, bound(b)?);
            if a > b {
                return Err(format!("range {a}..{b} is empty"));
            }
            Ok(a..=b)
        }
    }
}

fn parse_symbols(s: &str) -> std::result::Result<Vec<i32>, String> {
    s.split(',')
        .map(|tok| {
            tok.trim()
                .parse::<i32>()
                .map_err(|_| format!("'{tok}' is not an integer symbol"))
        })
        .collect()
}

fn parse_u32(s: &str) -> std::result::Result<u32, String> {
    s.parse().map_err(|_| format!("'{s}' is not an unsigned integer"))
}

fn parse_u64(s: &str) -> std::result::Result<u64, String> {
    s.parse().map_err(|_| format!("'{s}' is not an unsigned integer"))
}

fn parse_usize(s: &str) -> std::result::Result<usize, String> {
    s.parse().map_err(|_| format!("'{s}' is not an unsigned integer"))
}

fn parse_f64(s: &str) -> std::result::Result<f64, String> {
    s.parse::<f64>()
        .ok()
        .filter(|v| v.is_finite())
        .ok_or_else(|| format!("'{s}' is not a finite number"))
}

fn parse_path(s: &str) -> std::result::Result<PathBuf, String> {
    Ok(PathBuf::from(s))
}

/// Adds `--flag` context to a parser error on a command-line value.
fn parse_flag<T>(
    value: Option<&str>,
    flag: &str,
    parse: impl Fn(&str) -> std::result::Result<T, String>,
) -> Result<Option<T>> {
    value
        .map(|s| parse(s).map_err(|msg| Error::config(format!("invalid --{flag}: {msg}"))))
        .transpose()
}

// ---------------------------------------------------------------------------
// Config file: flat `key = value` lines, `#` comments, every key mirroring a
// flag name. Flags override file values; unknown keys are rejected unless
// they belong to another subcommand.

/// Every key any subcommand accepts; a leftover key outside this set is a
/// typo worth failing on.
const KNOWN_KEYS: &[&str] = &[
    "pulse", "M", "h", "L", "bt", "sps", "seed", "out", "plot", "detector", "K", "ebn0",
    "payload", "max-frames", "target-errors", "phase", "doppler-hz", "depth", "nobs", "k-max",
    "symbols",
];

#[derive(Debug)]
struct FileConfig {
    label: String,
    entries: HashMap<String, (String, usize)>,
}

impl FileConfig {
    fn empty() -> FileConfig {
        FileConfig {
            label: String::new(),
            entries: HashMap::new(),
        }
    }

    fn load(path: Option<&PathBuf>) -> Result<FileConfig> {
        let Some(path) = path else {
            return Ok(FileConfig::empty());
        };
        let text = std::fs::read_to_string(path)
            .map_err(|source| Error::io(path.display().to_string(), source))?;
        FileConfig::parse(&text, &path.display().to_string())
    }

    fn parse(text: &str, label: &str) -> Result<FileConfig> {
        let mut entries = HashMap::new();
        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(Error::config(format!(
                    "{label}:{line_no}: expected 'key = value', got '{line}'"
                )));
            };
            let (key, value) = (key.trim(), value.trim());
            if key.is_empty() {
                return Err(Error::config(format!("{label}:{line_no}: missing key")));
            }
            if value.is_empty() {
                return Err(Error::config(format!(
                    "{label}:{line_no}: field '{key}': missing value"
                )));
            }
            if let Some((_, first)) =
                entries.insert(key.to_string(), (value.to_string(), line_no))
            {
                return Err(Error::config(format!(
                    "{label}:{line_no}: field '{key}' already set on line {first}"
                )));
            }
        }
        Ok(FileConfig {
            label: label.to_string(),
            entries,
        })
    }

    /// Removes and parses `key`, adding file:line:field context on failure.
    fn take<T>(
        &mut self,
        key: &str,
        parse: impl Fn(&str) -> std::result::Result<T, String>,
    ) -> Result<Option<T>> {
        match self.entries.remove(key) {
            None => Ok(None),
            Some((value, line)) => parse(&value).map(Some).map_err(|msg| {
                Error::config(format!("{}:{line}: field '{key}': {msg}", self.label))
            }),
        }
    }

    /// Rejects leftover keys that no subcommand understands.
    fn finish(self) -> Result<()> {
        let mut leftovers: Vec<(String, usize)> = self
            .entries
            .into_iter()
            .filter(|(key, _)| !KNOWN_KEYS.contains(&key.as_str()))
            .map(|(key, (_, line))| (key, line))
            .collect();
        leftovers.sort_by_key(|(_, line)| *line);
        match leftovers.first() {
            Some((key, line)) => Err(Error::config(format!(
                "{}:{line}: unknown field '{key}'",
                self.label
            ))),
            None => Ok(()),
        }
    }
}

// ---------------------------------------------------------------------------
// Flag/file/default resolution.

fn build_format(shared: &Shared, file: &mut FileConfig) -> Result<CpmFormat> {
    let pulse = parse_flag(shared.pulse.as_deref(), "pulse", parse_pulse)?
        .or(file.take("pulse", parse_pulse)?)
        .unwrap_or(PulseArg::Rec);
    let m = shared.m.or(file.take("M", parse_u32)?).unwrap_or(2);
    let (h_num, h_den) = parse_flag(shared.h.as_deref(), "h", parse_h)?
        .or(file.take("h", parse_h)?)
        .unwrap_or((1, 2));
    let l = shared.l.or(file.take("L", parse_u32)?).unwrap_or(1);
    let bt = shared.bt.or(file.take("bt", parse_f64)?).unwrap_or(0.3);
    let sps = shared.sps.or(file.take("sps", parse_u32)?).unwrap_or(8);
    let shape = pulse.to_shape(bt).map_err(Error::config)?;
    CpmFormat::new(shape, m, h_num, h_den, l, SYMBOL_PERIOD, sps)
}

fn resolve_seed(shared: &Shared, file: &mut FileConfig) -> Result<u64> {
    Ok(shared.seed.or(file.take("seed", parse_u64)?).unwrap_or(1))
}

fn resolve_out(shared: &Shared, file: &mut FileConfig) -> Result<Option<PathBuf>> {
    Ok(shared.out.clone().or(file.take("out", parse_path)?))
}

fn emit(out: &Option<PathBuf>, text: &str) -> Result<()> {
    match out {
        Some(path) => save_text(path, text),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn format_summary(format: &CpmFormat) -> String {
    let pulse = match format.pulse() {
        PulseShape::Gaussian { bt } => format!("gauss(bt={bt})"),
        PulseShape::Rec => "rec".to_string(),
        PulseShape::Rc => "rc".to_string(),
    };
    format!(
        "{pulse} M={} h={}/{} L={}",
        format.m(),
        format.h_num(),
        format.h_den(),
        format.l()
    )
}

fn print_ber_summaries(results: &[BerResult]) {
    for r in results {
        let flag = if r.low_confidence() {
            " (low confidence)"
        } else {
            ""
        };
        eprintln!(
            "# {} K={} Eb/N0={} dB: ber={:.4e} ({} errors / {} bits, {} frames){}",
            r.detector_label,
            r.k,
            r.ebn0_db,
            r.ber(),
            r.bit_errors,
            r.bits_sent,
            r.frames,
            flag
        );
    }
}

struct BerOptions {
    detector: Detector,
    config: ExperimentConfig,
    out: Option<PathBuf>,
    plot: Option<PathBuf>,
}

#[allow(clippy::too_many_arguments)]
fn resolve_ber_options(
    shared: &Shared,
    detector: Option<&str>,
    k: Option<u32>,
    ebn0: Option<&str>,
    payload: Option<usize>,
    max_frames: Option<u64>,
    target_errors: Option<u64>,
    phase: Option<&str>,
    doppler_hz: Option<f64>,
    plot: Option<PathBuf>,
    default_fd: f64,
) -> Result<BerOptions> {
    let mut file = FileConfig::load(shared.config.as_ref())?;
    let format = build_format(shared, &mut file)?;
    let detector = parse_flag(detector, "detector", parse_detector)?
        .or(file.take("detector", parse_detector)?)
        .unwrap_or(Detector::Differential);
    let k = k.or(file.take("K", parse_u32)?).unwrap_or(1);
    let ebn0_grid = parse_flag(ebn0, "ebn0", parse_ebn0_grid)?
        .or(file.take("ebn0", parse_ebn0_grid)?)
        .ok_or_else(|| {
            Error::config("missing Eb/N0 grid: pass --ebn0 start:step:stop or set it in the config file")
        })?;
    let payload_len = payload.or(file.take("payload", parse_usize)?).unwrap_or(120);
    let max_frames = max_frames
        .or(file.take("max-frames", parse_u64)?)
        .unwrap_or(2_000_000);
    let target_errors = target_errors
        .or(file.take("target-errors", parse_u64)?)
        .unwrap_or(200);
    let psi_mode = parse_flag(phase, "phase", parse_phase)?
        .or(file.take("phase", parse_phase)?)
        .unwrap_or(PsiMode::Random);
    let fd = doppler_hz
        .or(file.take("doppler-hz", parse_f64)?)
        .unwrap_or(default_fd);
    let master_seed = resolve_seed(shared, &mut file)?;
    let out = resolve_out(shared, &mut file)?;
    let plot = match plot {
        Some(path) => Some(path),
        None => file.take("plot", parse_path)?,
    };
    file.finish()?;
    let config = ExperimentConfig {
        format,
        detector,
        k,
        ebn0_grid,
        payload_len,
        max_frames,
        target_errors,
        psi_mode,
        fd,
        master_seed,
    };
    Ok(BerOptions {
        detector,
        config,
        out,
        plot,
    })
}

// ---------------------------------------------------------------------------
// Subcommand drivers.

fn run_ber_command(args: BerArgs) -> Result<()> {
    let options = resolve_ber_options(
        &args.shared,
        args.detector.as_deref(),
        args.k,
        args.ebn0.as_deref(),
        args.payload,
        args.max_frames,
        args.target_errors,
        args.phase.as_deref(),
        args.doppler_hz,
        args.plot,
        0.0,
    )?;
    let results = run_ber(&options.config)?;
    print_ber_summaries(&results);
    emit(&options.out, &ber_csv(&results))?;
    if let Some(plot) = &options.plot {
        let title = format!(
            "BER — {} — {} K={}",
            format_summary(&options.config.format),
            options.detector.label(),
            options.config.k
        );
        save_text(plot, &ber_svg(&results, &title))?;
    }
    Ok(())
}

fn run_doppler_command(args: DopplerArgs) -> Result<()> {
    let options = resolve_ber_options(
        &args.shared,
        None,
        args.k,
        args.ebn0.as_deref(),
        args.payload,
        args.max_frames,
        args.target_errors,
        args.phase.as_deref(),
        args.doppler_hz,
        args.plot,
        100.0,
    )?;
    let results = run_doppler_compare(&options.config)?;
    print_ber_summaries(&results);
    emit(&options.out, &ber_csv(&results))?;
    if let Some(plot) = &options.plot {
        let title = format!(
            "Doppler comparison — {} — fd={} Hz",
            format_summary(&options.config.format),
            options.config.fd
        );
        save_text(plot, &ber_svg(&results, &title))?;
    }
    Ok(())
}

fn run_dmin_command(args: DminArgs) -> Result<()> {
    let mut file = FileConfig::load(args.shared.config.as_ref())?;
    let format = build_format(&args.shared, &mut file)?;
    let k_range = parse_flag(args.k.as_deref(), "K", parse_k_range)?
        .or(file.take("K", parse_k_range)?)
        .unwrap_or(1..=6);
    let depth = match args.depth {
        Some(d) => Some(d),
        None => file.take("depth", parse_usize)?,
    };
    let n_obs = match args.nobs {
        Some(n) => Some(n),
        None => file.take("nobs", parse_usize)?,
    };
    let out = resolve_out(&args.shared, &mut file)?;
    file.finish()?;
    let reports = dmin_sweep(&format, k_range, depth, n_obs)?;
    for r in &reports {
        eprintln!(
            "# K={}: d2_min={:.6} at e={} (depth {}, nobs {})",
            r.k, r.d2_min, r.argmin_e, r.depth, r.n_obs
        );
    }
    emit(&out, &dmin_csv(&reports))
}

fn run_optimize_command(args: OptimizeArgs) -> Result<()> {
    let mut file = FileConfig::load(args.shared.config.as_ref())?;
    let format = build_format(&args.shared, &mut file)?;
    let k_max = args.k_max.or(file.take("k-max", parse_u32)?).unwrap_or(6);
    let depth = match args.depth {
        Some(d) => Some(d),
        None => file.take("depth", parse_usize)?,
    };
    let n_obs = match args.nobs {
        Some(n) => Some(n),
        None => file.take("nobs", parse_usize)?,
    };
    let out = resolve_out(&args.shared, &mut file)?;
    file.finish()?;
    let (k_star, reports) = optimize_delay(&format, k_max, depth, n_obs)?;
    eprintln!("# optimal delay K = {k_star} for {}", format_summary(&format));
    emit(&out, &dmin_csv(&reports))
}

fn run_modulate_command(args: ModulateArgs) -> Result<()> {
    let mut file = FileConfig::load(args.shared.config.as_ref())?;
    let format = build_format(&args.shared, &mut file)?;
    let explicit = parse_flag(args.symbols.as_deref(), "symbols", parse_symbols)?
        .or(file.take("symbols", parse_symbols)?);
    let payload = args.payload.or(file.take("payload", parse_usize)?).unwrap_or(16);
    let seed = resolve_seed(&args.shared, &mut file)?;
    let out = resolve_out(&args.shared, &mut file)?;
    file.finish()?;
    let symbols = match explicit {
        Some(values) => SymbolSequence::new(values, format.m())?,
        None => {
            if payload == 0 {
                return Err(Error::config("payload length must be >= 1"));
            }
            let mut rng = ChaCha12Rng::seed_from_u64(seed);
            let values = (0..payload)
                .map(|_| format.symbol_from_digit(rng.random_range(0..format.m())))
                .collect();
            SymbolSequence::new(values, format.m())?
        }
    };
    let signal = modulate(&format, &symbols);
    emit(&out, &samples_csv(&signal))
}
