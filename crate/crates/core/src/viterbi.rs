//! Frame layout, detection results, and the Viterbi dynamic program shared
//! by the differential and coherent detectors.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::waveform::SymbolSequence;

/// Known-symbol framing around a payload: `preamble_len` all-(+1) symbols
/// establish trellis history, the payload carries data, and `postamble_len`
/// all-(+1) symbols keep the final payload sections reliable (the detector
/// does not force termination; late sections are protected statistically).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FrameLayout {
    pub preamble_len: usize,
    pub payload_len: usize,
    pub postamble_len: usize,
}

impl FrameLayout {
    pub fn new(preamble_len: usize, payload_len: usize, postamble_len: usize) -> Result<Self> {
        if payload_len == 0 {
            return Err(Error::config("payload length must be >= 1"));
        }
        Ok(FrameLayout {
            preamble_len,
            payload_len,
            postamble_len,
        })
    }

    /// Standard layout for a detector needing `K+L−1` symbols of history:
    /// preamble and postamble of that length wrap the payload.
    pub fn for_delay(k: u32, l: u32, payload_len: usize) -> Result<Self> {
        let p = (k + l - 1) as usize;
        FrameLayout::new(p, payload_len, p)
    }

    /// Total frame length in symbols.
    pub fn total_len(&self) -> usize {
        self.preamble_len + self.payload_len + self.postamble_len
    }

    /// Trellis sections processed by the detector (payload + postamble).
    pub fn n_sections(&self) -> usize {
        self.payload_len + self.postamble_len
    }

    /// Builds the transmitted frame: +1 preamble, payload, +1 postamble.
    pub fn frame_symbols(&self, payload: &[i32]) -> Result<Vec<i32>> {
        if payload.len() != self.payload_len {
            return Err(Error::input(format!(
                "payload has {} symbols, layout expects {}",
                payload.len(),
                self.payload_len
            )));
        }
        let mut frame = Vec::with_capacity(self.total_len());
        frame.extend(std::iter::repeat_n(1, self.preamble_len));
        frame.extend_from_slice(payload);
        frame.extend(std::iter::repeat_n(1, self.postamble_len));
        Ok(frame)
    }
}

/// Output of a sequence detector.
#[derive(Debug, Clone)]
pub struct DetectionResult {
    /// Decided payload symbols (postamble decisions are discarded).
    pub detected: SymbolSequence,
    /// Cumulative correlation metric of the winning path.
    pub final_metric: f64,
    /// Per-section branch metrics along the winning path, if requested.
    pub per_section_metrics: Option<Vec<f64>>,
}

/// Enumerated trellis shared by both detectors: `successor` and per-branch
/// integration weights (conjugated reference samples × sample period), laid
/// out flat as `[(state·n_inputs + input)·sps + m]`.
#[derive(Debug, Clone)]
pub(crate) struct TrellisCore {
    pub n_states: usize,
    pub n_inputs: usize,
    pub sps: usize,
    pub successors: Vec<u32>,
    pub weights: Vec<Complex64>,
}

impl TrellisCore {
    pub fn successor(&self, state: usize, input: usize) -> usize {
        self.successors[state * self.n_inputs + input] as usize
    }

    pub fn weight_slice(&self, state: usize, input: usize) -> &[Complex64] {
        let base = (state * self.n_inputs + input) * self.sps;
        &self.weights[base..base + self.sps]
    }

    /// Correlation metric of one branch against a signal segment:
    /// Re[Σ segment·weight] (weights already carry the Δt factor).
    pub fn branch_metric(&self, segment: &[Complex64], state: usize, input: usize) -> f64 {
        let w = self.weight_slice(state, input);
        segment
            .iter()
            .zip(w)
            .map(|(r, w)| r.re * w.re - r.im * w.im)
            .sum()
    }
}

/// Winning path of the dynamic program, as input digits per section.
pub(crate) struct ViterbiPath {
    pub digits: Vec<u32>,
    pub final_metric: f64,
    pub section_metrics: Vec<f64>,
}

/// Runs the Viterbi recursion over `n_sections` symbol intervals.
///
/// `samples[first_sample ..]` must hold `n_sections·sps` samples; section `i`
/// integrates the slice starting at `first_sample + i·sps`. Survivors keep
/// the per-state maximum of (previous metric + branch metric); on exact ties
/// the predecessor with the smaller state index (then smaller input digit)
/// wins, giving deterministic output. Traceback starts from the best
/// end-state metric.
pub(crate) fn run_viterbi(
    core: &TrellisCore,
    samples: &[Complex64],
    first_sample: usize,
    n_sections: usize,
    initial_state: usize,
) -> Result<ViterbiPath> {
    let needed = first_sample + n_sections * core.sps;
    if samples.len() < needed {
        return Err(Error::input(format!(
            "signal has {} samples, detection needs {needed}",
            samples.len()
        )));
    }
    debug_assert!(core.n_states < 1 << 24, "state index must fit 24 bits");

    let mut metrics = vec![f64::NEG_INFINITY; core.n_states];
    metrics[initial_state] = 0.0;
    let mut next = vec![f64::NEG_INFINITY; core.n_states];
    // Packed traceback entry: predecessor state in the low 24 bits, input
    // digit above.
    let mut backptr = vec![0u32; n_sections * core.n_states];

    for sec in 0..n_sections {
        let seg_start = first_sample + sec * core.sps;
        let segment = &samples[seg_start..seg_start + core.sps];
        next.fill(f64::NEG_INFINITY);
        let bp = &mut backptr[sec * core.n_states..(sec + 1) * core.n_states];
        for state in 0..core.n_states {
            let gamma = metrics[state];
            if gamma == f64::NEG_INFINITY {
                continue;
            }
            for input in 0..core.n_inputs {
                let cand = gamma + core.branch_metric(segment, state, input);
                let succ = core.successor(state, input);
                if cand > next[succ] {
                    next[succ] = cand;
                    bp[succ] = state as u32 | (input as u32) << 24;
                }
            }
        }
        std::mem::swap(&mut metrics, &mut next);
    }

    // Best end state; ascending scan with strict `>` keeps the smallest
    // index on ties.
    let (mut state, final_metric) = metrics
        .iter()
        .copied()
        .enumerate()
        .fold((0usize, f64::NEG_INFINITY), |best, (i, g)| {
            if g > best.1 {
                (i, g)
            } else {
                best
            }
        });
    if final_metric == f64::NEG_INFINITY {
        return Err(Error::input("no trellis path survived; empty section range"));
    }

    let mut digits = vec![0u32; n_sections];
    let mut states = vec![0usize; n_sections]; // predecessor of each section
    for sec in (0..n_sections).rev() {
        let packed = backptr[sec * core.n_states + state];
        digits[sec] = packed >> 24;
        state = (packed & 0x00ff_ffff) as usize;
        states[sec] = state;
    }

    let section_metrics = (0..n_sections)
        .map(|sec| {
            let seg_start = first_sample + sec * core.sps;
            let segment = &samples[seg_start..seg_start + core.sps];
            core.branch_metric(segment, states[sec], digits[sec] as usize)
        })
        .collect();

    Ok(ViterbiPath {
        digits,
        final_metric,
        section_metrics,
    })
}
