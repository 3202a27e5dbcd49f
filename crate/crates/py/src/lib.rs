//! Python bindings for the CPM differential-detection library.
//!
//! The module mirrors the Rust API at frame granularity: build a `CpmFormat`,
//! modulate symbol sequences, push them through the channel, and run either
//! detector — plus the delay-product distance tooling (`dmin`,
//! `optimize_delay`) and the Monte Carlo drivers (`run_ber`,
//! `run_doppler_compare`). Complex samples cross the boundary as ordinary
//! Python `complex` lists.

use num_complex::Complex64;
use pyo3::exceptions::{PyOSError, PyValueError};
use pyo3::prelude::*;

use diffcpm::channel::{self, ChannelParams};
use diffcpm::coherent::{build_coherent_trellis, coherent_detect};
use diffcpm::differential::{
    self, build_diff_trellis, differential_preprocess, viterbi_detect,
};
use diffcpm::distance;
use diffcpm::sim::{self, Detector, ExperimentConfig, PsiMode};
use diffcpm::viterbi::FrameLayout;
use diffcpm::waveform::{self, BasebandSignal, PulseShape, SymbolSequence};

/// Symbol period in seconds; every published operating point is normalized
/// (h, fd·Ts, Eb/N0), so the absolute scale is fixed rather than exposed.
const SYMBOL_PERIOD: f64 = 1e-4;

fn py_err(e: diffcpm::Error) -> PyErr {
    match e {
        diffcpm::Error::Io { .. } => PyOSError::new_err(e.to_string()),
        other => PyValueError::new_err(other.to_string()),
    }
}

/// A CPM format: pulse family, alphabet size M, modulation index h, pulse
/// length L, and samples per symbol.
#[pyclass(name = "CpmFormat", frozen, skip_from_py_object)]
#[derive(Clone)]
struct PyCpmFormat {
    inner: waveform::CpmFormat,
}

#[pymethods]
impl PyCpmFormat {
    /// CpmFormat(pulse, m, h_num, h_den, l, bt=0.3, sps=8)
    ///
    /// `pulse` is one of "rec", "rc", "gauss"; `bt` applies to "gauss" only.
    #[new]
    #[pyo3(signature = (pulse, m, h_num, h_den, l, bt = 0.3, sps = 8))]
    fn new(pulse: &str, m: u32, h_num: u32, h_den: u32, l: u32, bt: f64, sps: u32) -> PyResult<Self> {
        let shape = match pulse.to_ascii_lowercase().as_str() {
            "rec" => PulseShape::Rec,
            "rc" => PulseShape::Rc,
            "gauss" | "gaussian" => {
                if !(bt > 0.0) {
                    return Err(PyValueError::new_err(format!(
                        "gaussian bandwidth-time product must be positive, got {bt}"
                    )));
                }
                PulseShape::Gaussian { bt }
            }
            other => {
                return Err(PyValueError::new_err(format!(
                    "unknown pulse shape '{other}' (expected rec, rc, or gauss)"
                )))
            }
        };
        let inner = waveform::CpmFormat::new(shape, m, h_num, h_den, l, SYMBOL_PERIOD, sps)
            .map_err(py_err)?;
        Ok(PyCpmFormat { inner })
    }

    #[getter]
    fn m(&self) -> u32 {
        self.inner.m()
    }

    #[getter]
    fn h(&self) -> f64 {
        self.inner.h()
    }

    #[getter]
    fn l(&self) -> u32 {
        self.inner.l()
    }

    #[getter]
    fn sps(&self) -> u32 {
        self.inner.sps()
    }

    #[getter]
    fn symbol_period(&self) -> f64 {
        self.inner.ts()
    }

    #[getter]
    fn amplitude(&self) -> f64 {
        self.inner.amplitude()
    }

    /// The M-ary symbol alphabet {±1, ±3, …, ±(M−1)}.
    #[getter]
    fn alphabet(&self) -> Vec<i32> {
        self.inner.alphabet()
    }

    fn __repr__(&self) -> String {
        format!(
            "CpmFormat(pulse={}, M={}, h={}/{}, L={}, sps={})",
            self.inner.pulse().name(),
            self.inner.m(),
            self.inner.h_num(),
            self.inner.h_den(),
            self.inner.l(),
            self.inner.sps()
        )
    }
}

/// A complex baseband signal on the format's sample grid.
#[pyclass(name = "Signal", frozen, skip_from_py_object)]
#[derive(Clone)]
struct PySignal {
    inner: BasebandSignal,
}

#[pymethods]
impl PySignal {
    /// Signal(samples, sample_period, start_time=0.0)
    #[new]
    #[pyo3(signature = (samples, sample_period, start_time = 0.0))]
    fn new(samples: Vec<Complex64>, sample_period: f64, start_time: f64) -> PyResult<Self> {
        if !(sample_period > 0.0) {
            return Err(PyValueError::new_err(format!(
                "sample period must be positive, got {sample_period}"
            )));
        }
        Ok(PySignal {
            inner: BasebandSignal {
                samples,
                sample_period,
                start_time,
            },
        })
    }

    #[getter]
    fn samples(&self) -> Vec<Complex64> {
        self.inner.samples.clone()
    }

    #[getter]
    fn sample_period(&self) -> f64 {
        self.inner.sample_period
    }

    #[getter]
    fn start_time(&self) -> f64 {
        self.inner.start_time
    }

    fn __len__(&self) -> usize {
        self.inner.samples.len()
    }

    fn __repr__(&self) -> String {
        format!(
            "Signal({} samples, dt={:.3e}, t0={:.3e})",
            self.inner.samples.len(),
            self.inner.sample_period,
            self.inner.start_time
        )
    }
}

/// Minimum-distance search outcome at one delay.
#[pyclass(name = "DelayReport", frozen)]
struct PyDelayReport {
    #[pyo3(get)]
    k: u32,
    #[pyo3(get)]
    d2_min: f64,
    #[pyo3(get)]
    delta2_min: f64,
    #[pyo3(get)]
    argmin_e: Vec<i32>,
    #[pyo3(get)]
    depth: usize,
    #[pyo3(get)]
    n_obs: usize,
}

#[pymethods]
impl PyDelayReport {
    fn __repr__(&self) -> String {
        format!(
            "DelayReport(K={}, d2_min={:.6}, argmin_e={:?}, depth={}, n_obs={})",
            self.k, self.d2_min, self.argmin_e, self.depth, self.n_obs
        )
    }
}

impl From<distance::DistanceReport> for PyDelayReport {
    fn from(r: distance::DistanceReport) -> Self {
        PyDelayReport {
            k: r.k,
            d2_min: r.d2_min,
            delta2_min: r.delta2_min,
            argmin_e: r.argmin_e.entries().to_vec(),
            depth: r.depth,
            n_obs: r.n_obs,
        }
    }
}

/// Measured error rate at one Eb/N0 point.
#[pyclass(name = "BerPoint", frozen)]
struct PyBerPoint {
    #[pyo3(get)]
    ebn0_db: f64,
    #[pyo3(get)]
    detector: String,
    #[pyo3(get)]
    k: u32,
    #[pyo3(get)]
    bits: u64,
    #[pyo3(get)]
    errors: u64,
    #[pyo3(get)]
    frames: u64,
    #[pyo3(get)]
    ber: f64,
    #[pyo3(get)]
    low_confidence: bool,
}

#[pymethods]
impl PyBerPoint {
    fn __repr__(&self) -> String {
        format!(
            "BerPoint({} K={} at {} dB: ber={:.4e}, {} errors / {} bits)",
            self.detector, self.k, self.ebn0_db, self.ber, self.errors, self.bits
        )
    }
}

impl From<sim::BerResult> for PyBerPoint {
    fn from(r: sim::BerResult) -> Self {
        PyBerPoint {
            ebn0_db: r.ebn0_db,
            detector: r.detector_label.clone(),
            k: r.k,
            bits: r.bits_sent,
            errors: r.bit_errors,
            frames: r.frames,
            ber: r.ber(),
            low_confidence: r.low_confidence(),
        }
    }
}

fn symbol_sequence(format: &PyCpmFormat, symbols: Vec<i32>) -> PyResult<SymbolSequence> {
    SymbolSequence::new(symbols, format.inner.m()).map_err(py_err)
}

/// Synthesizes the constant-envelope baseband signal for a symbol sequence.
#[pyfunction]
fn modulate(format: &PyCpmFormat, symbols: Vec<i32>) -> PyResult<PySignal> {
    let seq = symbol_sequence(format, symbols)?;
    Ok(PySignal {
        inner: waveform::modulate(&format.inner, &seq),
    })
}

/// Phase trajectory θ(t) of a symbol sequence on the sample grid.
#[pyfunction]
fn phase_trajectory(format: &PyCpmFormat, symbols: Vec<i32>) -> PyResult<Vec<f64>> {
    let seq = symbol_sequence(format, symbols)?;
    Ok(waveform::phase_trajectory(&format.inner, &seq))
}

/// Wraps a payload in the detector frame: K+L−1 leading and trailing +1
/// symbols around the payload.
#[pyfunction]
fn frame_symbols(format: &PyCpmFormat, k: u32, payload: Vec<i32>) -> PyResult<Vec<i32>> {
    let layout = FrameLayout::for_delay(k, format.inner.l(), payload.len()).map_err(py_err)?;
    layout.frame_symbols(&payload).map_err(py_err)
}

/// Noise PSD N0 for an Eb/N0 operating point (dB).
#[pyfunction]
fn noise_level_from_ebn0(format: &PyCpmFormat, ebn0_db: f64) -> f64 {
    channel::noise_level_from_ebn0(&format.inner, ebn0_db)
}

/// Channel: phase offset ψ, frequency offset fd (Hz), AWGN with PSD n0,
/// deterministic noise seed.
#[pyfunction]
#[pyo3(signature = (signal, psi = 0.0, fd = 0.0, n0 = 0.0, seed = 1))]
fn apply_channel(signal: &PySignal, psi: f64, fd: f64, n0: f64, seed: u64) -> PyResult<PySignal> {
    let params = ChannelParams::new(psi, fd, n0, seed).map_err(py_err)?;
    Ok(PySignal {
        inner: channel::apply_channel(&signal.inner, &params),
    })
}

/// Delay-product signal R_K(t) = ½·r(t)·r*(t − K·Ts).
#[pyfunction]
fn delay_product(signal: &PySignal, format: &PyCpmFormat, k: u32) -> PyResult<PySignal> {
    Ok(PySignal {
        inner: differential_preprocess(&signal.inner, k, &format.inner).map_err(py_err)?,
    })
}

/// Constant rotation e^{j2π·fd·K·Ts} the delay product picks up under a
/// frequency offset of fd Hz.
#[pyfunction]
fn doppler_rotation(format: &PyCpmFormat, k: u32, fd: f64) -> Complex64 {
    differential::doppler_rotation(&format.inner, k, fd)
}

/// Differential Viterbi detection of a payload from the delay-product
/// signal. Returns (payload_symbols, final_metric).
#[pyfunction]
fn detect_differential(
    rk: &PySignal,
    format: &PyCpmFormat,
    k: u32,
    payload_len: usize,
) -> PyResult<(Vec<i32>, f64)> {
    let layout = FrameLayout::for_delay(k, format.inner.l(), payload_len).map_err(py_err)?;
    let trellis = build_diff_trellis(&format.inner, k).map_err(py_err)?;
    let result = viterbi_detect(&rk.inner, &trellis, &layout).map_err(py_err)?;
    Ok((result.detected.symbols().to_vec(), result.final_metric))
}

/// Coherent Viterbi detection (known carrier phase) of a payload from the
/// received signal. The frame must have been laid out for delay `k` so both
/// detectors see identical frames. Returns (payload_symbols, final_metric).
#[pyfunction]
fn detect_coherent(
    signal: &PySignal,
    format: &PyCpmFormat,
    k: u32,
    payload_len: usize,
) -> PyResult<(Vec<i32>, f64)> {
    let layout = FrameLayout::for_delay(k, format.inner.l(), payload_len).map_err(py_err)?;
    let trellis = build_coherent_trellis(&format.inner).map_err(py_err)?;
    let result = coherent_detect(&signal.inner, &trellis, &layout).map_err(py_err)?;
    Ok((result.detected.symbols().to_vec(), result.final_metric))
}

/// Minimum squared distance between delay-K differential signals.
#[pyfunction]
#[pyo3(signature = (format, k, depth = None, n_obs = None))]
fn dmin(format: &PyCpmFormat, k: u32, depth: Option<usize>, n_obs: Option<usize>) -> PyResult<PyDelayReport> {
    let mut reports = distance::dmin_sweep(&format.inner, k..=k, depth, n_obs).map_err(py_err)?;
    Ok(reports.remove(0).into())
}

/// Distance table for K = 1..=k_max.
#[pyfunction]
#[pyo3(signature = (format, k_max, depth = None, n_obs = None))]
fn dmin_table(
    format: &PyCpmFormat,
    k_max: u32,
    depth: Option<usize>,
    n_obs: Option<usize>,
) -> PyResult<Vec<PyDelayReport>> {
    let reports = distance::dmin_sweep(&format.inner, 1..=k_max, depth, n_obs).map_err(py_err)?;
    Ok(reports.into_iter().map(Into::into).collect())
}

/// Sweeps K = 1..=k_max and returns (K*, table): the smallest delay whose
/// d²_min ties the maximum within the library's tie tolerance.
#[pyfunction]
#[pyo3(signature = (format, k_max = 6, depth = None, n_obs = None))]
fn optimize_delay(
    format: &PyCpmFormat,
    k_max: u32,
    depth: Option<usize>,
    n_obs: Option<usize>,
) -> PyResult<(u32, Vec<PyDelayReport>)> {
    let (k_star, reports) =
        distance::optimize_delay(&format.inner, k_max, depth, n_obs).map_err(py_err)?;
    Ok((k_star, reports.into_iter().map(Into::into).collect()))
}

/// Distance-based error probability prediction for the differential
/// detector at one Eb/N0 point (dB). Useful for ranking delays; measured
/// curves sit to the right of it for this receiver class.
#[pyfunction]
fn predict_pe(format: &PyCpmFormat, k: u32, d2_min: f64, ebn0_db: f64) -> PyResult<f64> {
    distance::predict_pe(&format.inner, k, d2_min, ebn0_db).map_err(py_err)
}

#[allow(clippy::too_many_arguments)]
fn experiment(
    format: &PyCpmFormat,
    detector: &str,
    k: u32,
    ebn0_grid: Vec<f64>,
    payload_len: usize,
    max_frames: u64,
    target_errors: u64,
    psi: Option<f64>,
    fd: f64,
    seed: u64,
) -> PyResult<ExperimentConfig> {
    let detector = match detector.to_ascii_lowercase().as_str() {
        "diff" | "differential" => Detector::Differential,
        "coherent" => Detector::Coherent,
        other => {
            return Err(PyValueError::new_err(format!(
                "unknown detector '{other}' (expected diff or coherent)"
            )))
        }
    };
    Ok(ExperimentConfig {
        format: format.inner.clone(),
        detector,
        k,
        ebn0_grid,
        payload_len,
        max_frames,
        target_errors,
        psi_mode: psi.map_or(PsiMode::Random, PsiMode::Fixed),
        fd,
        master_seed: seed,
    })
}

/// Monte Carlo BER sweep. `psi=None` draws a fresh channel phase per frame.
#[pyfunction]
#[pyo3(signature = (format, detector, k, ebn0_grid, payload_len = 120, max_frames = 2_000_000,
                    target_errors = 200, psi = None, fd = 0.0, seed = 1))]
#[allow(clippy::too_many_arguments)]
fn run_ber(
    format: &PyCpmFormat,
    detector: &str,
    k: u32,
    ebn0_grid: Vec<f64>,
    payload_len: usize,
    max_frames: u64,
    target_errors: u64,
    psi: Option<f64>,
    fd: f64,
    seed: u64,
) -> PyResult<Vec<PyBerPoint>> {
    let config = experiment(
        format, detector, k, ebn0_grid, payload_len, max_frames, target_errors, psi, fd, seed,
    )?;
    let results = sim::run_ber(&config).map_err(py_err)?;
    Ok(results.into_iter().map(Into::into).collect())
}

/// Four paired sweeps under a frequency offset: differential and coherent,
/// each with and without the offset, sharing per-frame randomness.
#[pyfunction]
#[pyo3(signature = (format, k, ebn0_grid, fd, payload_len = 120, max_frames = 2_000_000,
                    target_errors = 200, psi = None, seed = 1))]
#[allow(clippy::too_many_arguments)]
fn run_doppler_compare(
    format: &PyCpmFormat,
    k: u32,
    ebn0_grid: Vec<f64>,
    fd: f64,
    payload_len: usize,
    max_frames: u64,
    target_errors: u64,
    psi: Option<f64>,
    seed: u64,
) -> PyResult<Vec<PyBerPoint>> {
    let config = experiment(
        format, "diff", k, ebn0_grid, payload_len, max_frames, target_errors, psi, fd, seed,
    )?;
    let results = sim::run_doppler_compare(&config).map_err(py_err)?;
    Ok(results.into_iter().map(Into::into).collect())
}

#[pymodule]
fn diffcpm_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyCpmFormat>()?;
    m.add_class::<PySignal>()?;
    m.add_class::<PyDelayReport>()?;
    m.add_class::<PyBerPoint>()?;
    m.add_function(wrap_pyfunction!(modulate, m)?)?;
    m.add_function(wrap_pyfunction!(phase_trajectory, m)?)?;
    m.add_function(wrap_pyfunction!(frame_symbols, m)?)?;
    m.add_function(wrap_pyfunction!(noise_level_from_ebn0, m)?)?;
    m.add_function(wrap_pyfunction!(apply_channel, m)?)?;
    m.add_function(wrap_pyfunction!(delay_product, m)?)?;
    m.add_function(wrap_pyfunction!(doppler_rotation, m)?)?;
    m.add_function(wrap_pyfunction!(detect_differential, m)?)?;
    m.add_function(wrap_pyfunction!(detect_coherent, m)?)?;
    m.add_function(wrap_pyfunction!(dmin, m)?)?;
    m.add_function(wrap_pyfunction!(dmin_table, m)?)?;
    m.add_function(wrap_pyfunction!(optimize_delay, m)?)?;
    m.add_function(wrap_pyfunction!(predict_pe, m)?)?;
    m.add_function(wrap_pyfunction!(run_ber, m)?)?;
    m.add_function(wrap_pyfunction!(run_doppler_compare, m)?)?;
    m.add("SYMBOL_PERIOD", SYMBOL_PERIOD)?;
    Ok(())
}
