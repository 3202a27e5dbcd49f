//! Non-coherent differential detection: the delayed-conjugate product signal
//! R_K, its (K, L)-dependent trellis, and Viterbi decoding with the
//! correlation metric.
//!
//! R_K(t) = ½·r(t)·r*(t − K·Ts) removes any constant phase offset and turns a
//! frequency offset fd into the fixed rotation e^{j2π·fd·K·Ts}. Its noiseless
//! signal part is S_K(t) = (Es/2Ts)·e^{jΘ_K(t)} with
//! Θ_K(t) = θ(t) − θ(t − K·Ts), so over the symbol interval n at offset τ:
//!
//!   Θ_K(τ + n·Ts) = φ_n + 2πh·a_n·q(τ) + ϕ_n(τ)
//!   φ_n    = πh·Σ_{i=0}^{K−1} a_{n−L−i}                 (accumulated term)
//!   ϕ_n(τ) = 2πh·[Σ_{j=1}^{L−1}(a_{n−j} − a_{n−K−j})·q(τ + j·Ts)
//!                 − a_{n−K}·q(τ)]                       (transient term)
//!
//! which depends on the K+L−1 most recent symbols — the trellis state.

use num_complex::Complex64;
use std::f64::consts::{PI, TAU};

use crate::error::{Error, Result};
use crate::viterbi::{run_viterbi, DetectionResult, FrameLayout, TrellisCore};
use crate::waveform::{BasebandSignal, CpmFormat, SymbolSequence};

/// Default cap on the trellis state count M^(K+L−1).
pub const DEFAULT_STATE_BUDGET: u64 = 1 << 20;

/// Magnitude of the noiseless differential signal, |S_K| = Es/(2·Ts).
pub fn differential_signal_level(format: &CpmFormat) -> f64 {
    format.es() / (2.0 * format.ts())
}

/// Constant rotation e^{j2π·fd·K·Ts} picked up by the differential signal when
/// the received signal carries a frequency offset of `fd` Hz.
///
/// A frequency offset multiplies r(t) by e^{j2πfd·t}; forming
/// r(t)·r*(t−K·Ts) collapses that time-varying ramp into this single
/// constant, which a receiver that knows (or has estimated) the offset
/// divides out before running the trellis search. This is the asymmetry that
/// makes differential detection robust to frequency offsets: the coherent
/// detector faces the full ramp, which no scalar correction can remove.
pub fn doppler_rotation(format: &CpmFormat, k: u32, fd: f64) -> Complex64 {
    Complex64::from_polar(1.0, TAU * fd * k as f64 * format.ts())
}

/// Trellis state: the K+L−1 most recent symbols and their mixed-radix index
/// (most recent symbol in the lowest digit).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DiffState {
    /// Symbols [a_{n−K−L+1}, …, a_{n−1}], oldest first.
    pub history: Vec<i32>,
    pub index: usize,
}

impl DiffState {
    /// Decodes a state index for an M-ary trellis over `len` symbols.
    pub fn from_index(index: usize, m: u32, len: usize) -> Self {
        let mut history = vec![0i32; len];
        let mut rem = index;
        // Lowest digit is the most recent symbol, i.e. the *last* entry.
        for slot in history.iter_mut().rev() {
            let digit = (rem % m as usize) as u32;
            *slot = 2 * digit as i32 - (m as i32 - 1);
            rem /= m as usize;
        }
        DiffState { history, index }
    }

    /// Encodes a symbol history (oldest first) into its state index.
    pub fn from_history(history: Vec<i32>, m: u32) -> Result<Self> {
        let mut index = 0usize;
        for &a in &history {
            // Most recent symbol (last entry) must land in digit 0.
            if a.rem_euclid(2) != 1 || a.unsigned_abs() > m - 1 {
                return Err(Error::input(format!("symbol {a} not in the {m}-ary alphabet")));
            }
            let digit = ((a + m as i32 - 1) / 2) as usize;
            index = index * m as usize + digit;
        }
        Ok(DiffState { history, index })
    }
}

/// Differential-detection trellis for delay K: M^(K+L−1) states, M
/// transitions per state, per-branch reference phase samples of Θ_K and
/// precomputed correlation weights.
#[derive(Debug, Clone)]
pub struct DiffTrellis {
    k: u32,
    format: CpmFormat,
    core: TrellisCore,
    /// Θ_K reference samples, flat [(state·M + input)·sps + m].
    branch_phases: Vec<f64>,
}

impl DiffTrellis {
    pub fn k(&self) -> u32 {
        self.k
    }

    pub fn format(&self) -> &CpmFormat {
        &self.format
    }

    pub fn n_states(&self) -> usize {
        self.core.n_states
    }

    /// Symbols of history tracked per state, K+L−1.
    pub fn history_len(&self) -> usize {
        (self.k + self.format.l() - 1) as usize
    }

    pub fn state(&self, index: usize) -> DiffState {
        DiffState::from_index(index, self.format.m(), self.history_len())
    }

    pub fn successor(&self, state: usize, input_digit: u32) -> usize {
        self.core.successor(state, input_digit as usize)
    }

    /// Reference phase samples Θ_K for one branch over one symbol interval.
    pub fn branch_phase_samples(&self, state: usize, input_digit: u32) -> &[f64] {
        let sps = self.format.sps() as usize;
        let base = (state * self.format.m() as usize + input_digit as usize) * sps;
        &self.branch_phases[base..base + sps]
    }

    pub(crate) fn core(&self) -> &TrellisCore {
        &self.core
    }

    /// State index of the all-(+1) history, the initial state after an
    /// all-ones preamble.
    pub fn all_ones_state(&self) -> usize {
        let m = self.format.m() as usize;
        let digit = m / 2; // digit of symbol +1
        (0..self.history_len()).fold(0usize, |idx, _| idx * m + digit)
    }
}

/// Builds the delay-K differential trellis with the default state budget.
pub fn build_diff_trellis(format: &CpmFormat, k: u32) -> Result<DiffTrellis> {
    build_diff_trellis_with_budget(format, k, DEFAULT_STATE_BUDGET)
}

/// Builds the delay-K differential trellis, failing with a capacity error if
/// M^(K+L−1) exceeds `state_budget`.
pub fn build_diff_trellis_with_budget(
    format: &CpmFormat,
    k: u32,
    state_budget: u64,
) -> Result<DiffTrellis> {
    if k == 0 {
        return Err(Error::config("differential delay K must be >= 1"));
    }
    let p = (k + format.l() - 1) as usize;
    let required = (format.m() as u64)
        .checked_pow(p as u32)
        .unwrap_or(u64::MAX);
    if required > state_budget {
        return Err(Error::Capacity {
            required,
            budget: state_budget,
        });
    }
    let n_states = required as usize;
    let m = format.m() as usize;
    let sps = format.sps() as usize;
    let l = format.l() as usize;
    let kk = k as usize;
    let h = format.h();
    let q = format.q_grid();
    let dt = format.sample_period();
    let level = differential_signal_level(format);

    let mut successors = Vec::with_capacity(n_states * m);
    let mut branch_phases = Vec::with_capacity(n_states * m * sps);
    let mut weights = Vec::with_capacity(n_states * m * sps);
    let chop = n_states / m; // m^(p−1)

    for state in 0..n_states {
        // past[j] = a_{n−j−1}: digit j of the state index.
        let past: Vec<f64> = (0..p)
            .map(|j| {
                let digit = (state / m.pow(j as u32)) % m;
                (2 * digit as i32 - (m as i32 - 1)) as f64
            })
            .collect();
        // Accumulated phase φ_n = πh·Σ_{i=0}^{K−1} a_{n−L−i}, reduced mod 2π.
        let phi: f64 = (PI * h * (0..kk).map(|i| past[l + i - 1]).sum::<f64>()).rem_euclid(TAU);
        for input in 0..m {
            let a_n = (2 * input as i32 - (m as i32 - 1)) as f64;
            successors.push((input + m * (state % chop)) as u32);
            for mm in 0..sps {
                // Transient term ϕ_n(τ) at τ = mm·Δt.
                let mut trans = -past[kk - 1] * q[mm];
                for j in 1..l {
                    trans += (past[j - 1] - past[kk + j - 1]) * q[mm + j * sps];
                }
                let theta = phi + TAU * h * (a_n * q[mm] + trans);
                branch_phases.push(theta);
                weights.push(Complex64::from_polar(level, theta).conj() * dt);
            }
        }
    }

    Ok(DiffTrellis {
        k,
        format: format.clone(),
        core: TrellisCore {
            n_states,
            n_inputs: m,
            sps,
            successors,
            weights,
        },
        branch_phases,
    })
}

/// Forms the differential signal R_K(t) = ½·r(t)·r*(t − K·Ts). The output
/// starts K·Ts after the input and is K·sps samples shorter.
pub fn differential_preprocess(
    r: &BasebandSignal,
    k: u32,
    format: &CpmFormat,
) -> Result<BasebandSignal> {
    if k == 0 {
        return Err(Error::config("differential delay K must be >= 1"));
    }
    let expected_dt = format.sample_period();
    if (r.sample_period - expected_dt).abs() > 1e-9 * expected_dt {
        return Err(Error::input(format!(
            "signal sample period {} does not match format grid {}",
            r.sample_period, expected_dt
        )));
    }
    let shift = (k * format.sps()) as usize;
    if r.samples.len() <= shift {
        return Err(Error::input(format!(
            "signal covers {} samples, differential delay needs more than {shift}",
            r.samples.len()
        )));
    }
    let samples = r.samples[shift..]
        .iter()
        .zip(&r.samples)
        .map(|(now, delayed)| 0.5 * now * delayed.conj())
        .collect();
    Ok(BasebandSignal {
        samples,
        sample_period: r.sample_period,
        start_time: r.start_time + k as f64 * format.ts(),
    })
}

/// Correlation metric of a differential-signal segment against a reference
/// phase trajectory: Re[Σ_m R_K[m]·conj((Es/2Ts)·e^{jΘ[m]})]·Δt.
pub fn branch_metric(
    rk_segment: &[Complex64],
    branch_phase: &[f64],
    format: &CpmFormat,
) -> Result<f64> {
    let sps = format.sps() as usize;
    if rk_segment.len() != sps || branch_phase.len() != sps {
        return Err(Error::input(format!(
            "segment lengths ({}, {}) do not match sps = {sps}",
            rk_segment.len(),
            branch_phase.len()
        )));
    }
    let level = differential_signal_level(format);
    let dt = format.sample_period();
    Ok(rk_segment
        .iter()
        .zip(branch_phase)
        .map(|(r, &theta)| (r * Complex64::from_polar(level, theta).conj()).re)
        .sum::<f64>()
        * dt)
}

/// Viterbi detection on the differential trellis. `rk` must be the output of
/// [`differential_preprocess`] for a frame laid out per `frame`; the payload
/// decision sequence is returned (postamble decisions are discarded).
pub fn viterbi_detect(
    rk: &BasebandSignal,
    trellis: &DiffTrellis,
    frame: &FrameLayout,
) -> Result<DetectionResult> {
    let format = &trellis.format;
    let p = trellis.history_len();
    if frame.preamble_len < p {
        return Err(Error::input(format!(
            "preamble of {} symbols cannot seed {p} symbols of trellis history",
            frame.preamble_len
        )));
    }
    let sps = format.sps() as usize;
    let first_sample = (frame.preamble_len - trellis.k as usize) * sps;
    let path = run_viterbi(
        trellis.core(),
        &rk.samples,
        first_sample,
        frame.n_sections(),
        trellis.all_ones_state(),
    )?;
    let payload: Vec<i32> = path.digits[..frame.payload_len]
        .iter()
        .map(|&d| format.symbol_from_digit(d))
        .collect();
    Ok(DetectionResult {
        detected: SymbolSequence::new(payload, format.m())?,
        final_metric: path.final_metric,
        per_section_metrics: Some(path.section_metrics),
    })
}
