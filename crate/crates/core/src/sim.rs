//! Monte Carlo BER experiments: frame generation, channel, detection, and
//! bit-error accounting, reproducible from a single master seed.
//!
//! Every frame's randomness (payload, carrier phase, noise) derives from
//! `(master_seed, point_index, frame_index)`, so error counts are independent
//! of how frames are scheduled: parallel batches sum the same per-frame
//! counts a serial run would. The stop rule (target errors reached, checked
//! at fixed batch boundaries) therefore yields bit-identical results across
//! worker counts and repeated runs.

use std::f64::consts::TAU;

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha12Rng;
use rayon::prelude::*;

use crate::channel::{apply_channel, noise_level_from_ebn0, ChannelParams};
use crate::coherent::{build_coherent_trellis, coherent_detect, CoherentTrellis};
use crate::differential::{
    build_diff_trellis, differential_preprocess, doppler_rotation, viterbi_detect, DiffTrellis,
};
use crate::error::{Error, Result};
use crate::viterbi::FrameLayout;
use crate::waveform::{modulate, BasebandSignal, CpmFormat, SymbolSequence};

/// Frames simulated between stop-rule checks; fixed so that parallel and
/// serial schedules stop at identical frame counts.
const FRAME_BATCH: u64 = 64;

/// Which receiver an experiment exercises.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Detector {
    /// Delay-product Viterbi receiver (no carrier phase knowledge).
    Differential,
    /// MLSD with genie carrier phase — the performance baseline.
    Coherent,
}

impl Detector {
    /// Token used in CSV output and CLI flags.
    pub fn label(self) -> &'static str {
        match self {
            Detector::Differential => "diff",
            Detector::Coherent => "coherent",
        }
    }
}

/// Carrier phase offset policy, per frame.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PsiMode {
    /// Independent uniform draw on [0, 2π) each frame.
    Random,
    /// The same fixed offset (radians) every frame.
    Fixed(f64),
}

/// Full description of a BER experiment.
#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub format: CpmFormat,
    pub detector: Detector,
    /// Differential delay in symbol periods; also sets the frame's
    /// preamble/postamble length (K+L−1) for both detectors so compared
    /// runs share identical frame structure.
    pub k: u32,
    /// Eb/N0 grid in dB.
    pub ebn0_grid: Vec<f64>,
    pub payload_len: usize,
    pub max_frames: u64,
    /// Stop a point once this many bit errors have accumulated.
    pub target_errors: u64,
    pub psi_mode: PsiMode,
    /// Carrier frequency offset in Hz (0 = none).
    pub fd: f64,
    pub master_seed: u64,
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        if self.k == 0 {
            return Err(Error::config("differential delay K must be >= 1"));
        }
        if self.ebn0_grid.is_empty() {
            return Err(Error::config("Eb/N0 grid must contain at least one point"));
        }
        if let Some(bad) = self.ebn0_grid.iter().find(|v| !v.is_finite()) {
            return Err(Error::config(format!("Eb/N0 point {bad} is not finite")));
        }
        if self.payload_len == 0 {
            return Err(Error::config("payload length must be >= 1"));
        }
        if self.max_frames == 0 {
            return Err(Error::config("max_frames must be >= 1"));
        }
        if self.target_errors == 0 {
            return Err(Error::config("target_errors must be >= 1"));
        }
        if !self.fd.is_finite() {
            return Err(Error::config(format!(
                "frequency offset {} Hz is not finite",
                self.fd
            )));
        }
        if let PsiMode::Fixed(psi) = self.psi_mode {
            if !psi.is_finite() {
                return Err(Error::config(format!(
                    "phase offset {psi} rad is not finite"
                )));
            }
        }
        if !self.format.m().is_power_of_two() {
            return Err(Error::config(format!(
                "BER accounting maps symbols to Gray-coded bits, which needs M \
                 to be a power of two, got M = {}",
                self.format.m()
            )));
        }
        Ok(())
    }

    fn layout(&self) -> Result<FrameLayout> {
        FrameLayout::for_delay(self.k, self.format.l(), self.payload_len)
    }

    fn bits_per_frame(&self) -> u64 {
        self.payload_len as u64 * self.format.m().trailing_zeros() as u64
    }
}

/// Measured error rate at one Eb/N0 point.
#[derive(Debug, Clone, PartialEq)]
pub struct BerResult {
    pub ebn0_db: f64,
    /// CSV detector token: "diff", "coherent", or a "_doppler" variant.
    pub detector_label: String,
    /// Differential delay (0 on coherent rows, where no delay applies).
    pub k: u32,
    pub bits_sent: u64,
    pub bit_errors: u64,
    pub frames: u64,
    /// Master seed the experiment derived its frames from.
    pub seed: u64,
}

impl BerResult {
    pub fn ber(&self) -> f64 {
        self.bit_errors as f64 / self.bits_sent as f64
    }

    /// True when the 95% binomial interval half-width exceeds half the
    /// estimate (or no errors were seen at all).
    pub fn low_confidence(&self) -> bool {
        if self.bit_errors == 0 {
            return true;
        }
        let p = self.ber();
        let half_width = 1.96 * (p * (1.0 - p) / self.bits_sent as f64).sqrt();
        half_width > 0.5 * p
    }
}

/// Gray code of a radix-M digit: adjacent alphabet symbols differ in one bit.
pub fn gray_code(digit: u32) -> u32 {
    digit ^ (digit >> 1)
}

/// Deterministic per-frame seed from (master seed, grid point, frame index).
pub fn derive_frame_seed(master: u64, point_idx: u64, frame_idx: u64) -> u64 {
    fn splitmix64(mut z: u64) -> u64 {
        z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
        z ^ (z >> 31)
    }
    let a = splitmix64(master ^ splitmix64(point_idx.wrapping_add(1)));
    splitmix64(a ^ splitmix64(frame_idx.wrapping_add(0x5851_f42d_4c95_7f2d)))
}

enum Engine {
    Differential(DiffTrellis),
    Coherent(CoherentTrellis),
}

impl Engine {
    fn build(config: &ExperimentConfig, detector: Detector) -> Result<Engine> {
        match detector {
            Detector::Differential => Ok(Engine::Differential(build_diff_trellis(
                &config.format,
                config.k,
            )?)),
            Detector::Coherent => Ok(Engine::Coherent(build_coherent_trellis(&config.format)?)),
        }
    }

    fn detect(
        &self,
        rx: &BasebandSignal,
        psi: f64,
        fd: f64,
        format: &CpmFormat,
        layout: &FrameLayout,
    ) -> Result<Vec<i32>> {
        match self {
            Engine::Differential(trellis) => {
                let mut rk = differential_preprocess(rx, trellis.k(), format)?;
                if fd != 0.0 {
                    // A known frequency offset leaves only a constant rotation
                    // on R_K; divide it out so the trellis references apply.
                    let back = doppler_rotation(format, trellis.k(), fd).conj();
                    for sample in &mut rk.samples {
                        *sample *= back;
                    }
                }
                Ok(viterbi_detect(&rk, trellis, layout)?.detected.symbols().to_vec())
            }
            Engine::Coherent(trellis) => {
                // Genie carrier phase: derotate by the exact offset the
                // channel applied (frequency offset, if any, stays in).
                let derotation = num_complex::Complex64::from_polar(1.0, -psi);
                let derotated = BasebandSignal {
                    samples: rx.samples.iter().map(|s| s * derotation).collect(),
                    sample_period: rx.sample_period,
                    start_time: rx.start_time,
                };
                Ok(coherent_detect(&derotated, trellis, layout)?
                    .detected
                    .symbols()
                    .to_vec())
            }
        }
    }
}

/// Simulates one frame end to end and returns its payload bit-error count.
fn simulate_frame(
    engine: &Engine,
    config: &ExperimentConfig,
    layout: &FrameLayout,
    n0: f64,
    fd: f64,
    frame_seed: u64,
) -> Result<u64> {
    let format = &config.format;
    let m = format.m();
    let mut rng = ChaCha12Rng::seed_from_u64(frame_seed);
    let tx_digits: Vec<u32> = (0..config.payload_len)
        .map(|_| rng.random_range(0..m))
        .collect();
    let psi = match config.psi_mode {
        PsiMode::Random => rng.random_range(0.0..TAU),
        PsiMode::Fixed(value) => value,
    };
    let noise_seed = rng.next_u64();

    let payload: Vec<i32> = tx_digits.iter().map(|&d| format.symbol_from_digit(d)).collect();
    let frame = SymbolSequence::new(layout.frame_symbols(&payload)?, m)?;
    let tx = modulate(format, &frame);
    let channel = ChannelParams::new(psi, fd, n0, noise_seed)?;
    let rx = apply_channel(&tx, &channel);

    let detected = engine.detect(&rx, psi, fd, format, layout)?;
    let errors = tx_digits
        .iter()
        .zip(&detected)
        .map(|(&tx_digit, &rx_symbol)| {
            let rx_digit = format.digit_from_symbol(rx_symbol);
            (gray_code(tx_digit) ^ gray_code(rx_digit)).count_ones() as u64
        })
        .sum();
    Ok(errors)
}

/// Runs one Eb/N0 point until `target_errors` bit errors accumulate or
/// `max_frames` frames have been simulated, whichever comes first.
fn run_point(
    engine: &Engine,
    config: &ExperimentConfig,
    layout: &FrameLayout,
    ebn0_db: f64,
    point_idx: u64,
    fd: f64,
    label: &str,
    k_column: u32,
) -> Result<BerResult> {
    let n0 = noise_level_from_ebn0(&config.format, ebn0_db);
    let mut errors: u64 = 0;
    let mut frames: u64 = 0;
    while frames < config.max_frames && errors < config.target_errors {
        let batch = FRAME_BATCH.min(config.max_frames - frames);
        let batch_errors: Result<u64> = (frames..frames + batch)
            .into_par_iter()
            .map(|frame_idx| {
                let seed = derive_frame_seed(config.master_seed, point_idx, frame_idx);
                simulate_frame(engine, config, layout, n0, fd, seed)
            })
            .try_reduce(|| 0, |a, b| Ok(a + b));
        errors += batch_errors?;
        frames += batch;
    }
    Ok(BerResult {
        ebn0_db,
        detector_label: label.to_string(),
        k: k_column,
        bits_sent: frames * config.bits_per_frame(),
        bit_errors: errors,
        frames,
        seed: config.master_seed,
    })
}

/// Monte Carlo BER sweep over the configured Eb/N0 grid.
pub fn run_ber(config: &ExperimentConfig) -> Result<Vec<BerResult>> {
    config.validate()?;
    let layout = config.layout()?;
    let engine = Engine::build(config, config.detector)?;
    let k_column = match config.detector {
        Detector::Differential => config.k,
        Detector::Coherent => 0,
    };
    config
        .ebn0_grid
        .iter()
        .enumerate()
        .map(|(idx, &ebn0)| {
            run_point(
                &engine,
                config,
                &layout,
                ebn0,
                idx as u64,
                config.fd,
                config.detector.label(),
                k_column,
            )
        })
        .collect()
}

/// Paired Doppler experiment: both detectors, with and without the
/// configured frequency offset, on identical per-frame randomness (same
/// payloads, phases, and noise), so curve pairs differ only in the offset.
pub fn run_doppler_compare(config: &ExperimentConfig) -> Result<Vec<BerResult>> {
    config.validate()?;
    if config.fd == 0.0 {
        return Err(Error::config(
            "Doppler comparison needs a nonzero frequency offset",
        ));
    }
    let layout = config.layout()?;
    let diff = Engine::build(config, Detector::Differential)?;
    let coherent = Engine::build(config, Detector::Coherent)?;
    let passes: [(&Engine, f64, &str, u32); 4] = [
        (&diff, 0.0, "diff", config.k),
        (&diff, config.fd, "diff_doppler", config.k),
        (&coherent, 0.0, "coherent", 0),
        (&coherent, config.fd, "coherent_doppler", 0),
    ];
    let mut results = Vec::new();
    for (engine, fd, label, k_column) in passes {
        for (idx, &ebn0) in config.ebn0_grid.iter().enumerate() {
            results.push(run_point(
                engine, config, &layout, ebn0, idx as u64, fd, label, k_column,
            )?);
        }
    }
    Ok(results)
}
