//! Coherent maximum-likelihood sequence detection: the phase-state ×
//! correlative-state trellis and Viterbi decoding on the received signal
//! itself (phase reference assumed known).
//!
//! Over symbol interval n at offset τ, with all pulses older than L symbols
//! saturated at q = ½,
//!
//!   θ(τ + n·Ts) = σ_n·π·h_num/h_den + 2πh·Σ_{j=0}^{L−1} a_{n−j}·q(τ + j·Ts)
//!   σ_n = Σ_{i=0}^{n−L} a_i   (mod the phase-state modulus)
//!
//! The modulus is 2·h_den when h_num is odd and h_den when it is even; the
//! trellis has modulus·M^(L−1) states.

use num_complex::Complex64;
use std::f64::consts::{PI, TAU};

use crate::differential::DEFAULT_STATE_BUDGET;
use crate::error::{Error, Result};
use crate::viterbi::{run_viterbi, DetectionResult, FrameLayout, TrellisCore};
use crate::waveform::{BasebandSignal, CpmFormat, SymbolSequence};

/// Number of distinct accumulated-phase states for a modulation index
/// h_num/h_den in lowest terms.
pub fn phase_state_modulus(format: &CpmFormat) -> u32 {
    if format.h_num() % 2 == 1 {
        2 * format.h_den()
    } else {
        format.h_den()
    }
}

/// Coherent-detection trellis: modulus·M^(L−1) states (accumulated phase ×
/// the L−1 most recent symbols), M transitions per state.
#[derive(Debug, Clone)]
pub struct CoherentTrellis {
    format: CpmFormat,
    modulus: u32,
    core: TrellisCore,
    /// Reference phase samples θ per branch, flat [(state·M + input)·sps + m].
    branch_phases: Vec<f64>,
}

impl CoherentTrellis {
    pub fn format(&self) -> &CpmFormat {
        &self.format
    }

    pub fn modulus(&self) -> u32 {
        self.modulus
    }

    pub fn n_states(&self) -> usize {
        self.core.n_states
    }

    pub fn successor(&self, state: usize, input_digit: u32) -> usize {
        self.core.successor(state, input_digit as usize)
    }

    /// Reference phase samples for one branch over one symbol interval.
    pub fn branch_phase_samples(&self, state: usize, input_digit: u32) -> &[f64] {
        let sps = self.format.sps() as usize;
        let base = (state * self.format.m() as usize + input_digit as usize) * sps;
        &self.branch_phases[base..base + sps]
    }

    pub(crate) fn core(&self) -> &TrellisCore {
        &self.core
    }

    /// Splits a state index into (σ, correlative index).
    pub fn split_state(&self, state: usize) -> (u32, usize) {
        let corr_span = (self.format.m() as usize).pow(self.format.l() - 1);
        ((state / corr_span) as u32, state % corr_span)
    }

    /// State seeded by a preamble of `preamble_len` +1 symbols.
    pub fn initial_state(&self, preamble_len: usize) -> Result<usize> {
        let l = self.format.l() as usize;
        if preamble_len < l - 1 {
            return Err(Error::input(format!(
                "preamble of {preamble_len} symbols cannot seed {} symbols of correlative history",
                l - 1
            )));
        }
        let m = self.format.m() as usize;
        let sigma0 = (preamble_len + 1 - l) as u32 % self.modulus;
        let ones_digit = m / 2;
        let corr = (0..l - 1).fold(0usize, |idx, _| idx * m + ones_digit);
        Ok(sigma0 as usize * m.pow(self.format.l() - 1) + corr)
    }
}

/// Builds the coherent trellis with the default state budget.
pub fn build_coherent_trellis(format: &CpmFormat) -> Result<CoherentTrellis> {
    build_coherent_trellis_with_budget(format, DEFAULT_STATE_BUDGET)
}

/// Builds the coherent trellis, failing with a capacity error if
/// modulus·M^(L−1) exceeds `state_budget`.
pub fn build_coherent_trellis_with_budget(
    format: &CpmFormat,
    state_budget: u64,
) -> Result<CoherentTrellis> {
    let modulus = phase_state_modulus(format);
    let m = format.m() as usize;
    let l = format.l() as usize;
    let corr_span = (m as u64)
        .checked_pow(format.l() - 1)
        .unwrap_or(u64::MAX);
    let required = corr_span.saturating_mul(modulus as u64);
    if required > state_budget {
        return Err(Error::Capacity {
            required,
            budget: state_budget,
        });
    }
    let n_states = required as usize;
    let corr_span = corr_span as usize;
    let sps = format.sps() as usize;
    let h = format.h();
    let q = format.q_grid();
    let dt = format.sample_period();
    let amp = format.amplitude();
    let phase_step = PI * format.h_num() as f64 / format.h_den() as f64;

    let mut successors = Vec::with_capacity(n_states * m);
    let mut branch_phases = Vec::with_capacity(n_states * m * sps);
    let mut weights = Vec::with_capacity(n_states * m * sps);

    for state in 0..n_states {
        let sigma = (state / corr_span) as i64;
        let corr = state % corr_span;
        // corr digit j holds a_{n−1−j}; the oldest, a_{n−L+1}, is digit L−2.
        let past: Vec<i32> = (0..l.saturating_sub(1))
            .map(|j| {
                let digit = (corr / m.pow(j as u32)) % m;
                2 * digit as i32 - (m as i32 - 1)
            })
            .collect();
        let base_phase = (sigma as f64 * phase_step).rem_euclid(TAU);
        for input in 0..m {
            let a_n = 2 * input as i32 - (m as i32 - 1);
            let leaving = if l == 1 { a_n } else { past[l - 2] };
            let sigma_next = (sigma + leaving as i64).rem_euclid(modulus as i64) as usize;
            let corr_next = if l == 1 {
                0
            } else {
                input + m * (corr % m.pow(l as u32 - 2))
            };
            successors.push((sigma_next * corr_span + corr_next) as u32);
            for mm in 0..sps {
                let mut active = a_n as f64 * q[mm];
                for j in 1..l {
                    active += past[j - 1] as f64 * q[mm + j * sps];
                }
                let theta = base_phase + TAU * h * active;
                branch_phases.push(theta);
                weights.push(Complex64::from_polar(amp, theta).conj() * dt);
            }
        }
    }

    Ok(CoherentTrellis {
        format: format.clone(),
        modulus,
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

/// Coherent Viterbi detection on the received signal `r` (phase reference
/// already removed). Returns the payload decision sequence.
pub fn coherent_detect(
    r: &BasebandSignal,
    trellis: &CoherentTrellis,
    frame: &FrameLayout,
) -> Result<DetectionResult> {
    let format = &trellis.format;
    let expected_dt = format.sample_period();
    if (r.sample_period - expected_dt).abs() > 1e-9 * expected_dt {
        return Err(Error::input(format!(
            "signal sample period {} does not match format grid {}",
            r.sample_period, expected_dt
        )));
    }
    let sps = format.sps() as usize;
    let first_sample = frame.preamble_len * sps;
    let path = run_viterbi(
        trellis.core(),
        &r.samples,
        first_sample,
        frame.n_sections(),
        trellis.initial_state(frame.preamble_len)?,
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
