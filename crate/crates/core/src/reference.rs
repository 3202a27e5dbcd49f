//! Brute-force maximum-likelihood detectors used as test oracles.
//!
//! Both functions enumerate every hypothesis for the unknown symbols — the
//! payload *and* the postamble, since the Viterbi detectors leave the
//! postamble unconstrained — and score each candidate by correlating the
//! received signal against a reference rebuilt from the hypothesis's full
//! phase trajectory. This shares no code with the trellis construction, so
//! agreement with the Viterbi detectors checks the entire decision chain.

use num_complex::Complex64;

use crate::differential::differential_signal_level;
use crate::error::{Error, Result};
use crate::viterbi::{DetectionResult, FrameLayout};
use crate::waveform::{phase_at_grid, BasebandSignal, CpmFormat, SymbolSequence};

/// Largest hypothesis count the exhaustive search will attempt.
pub const EXHAUSTIVE_BUDGET: u64 = 1 << 24;

/// Decodes hypothesis `idx` into the symbols of a full frame: all-ones
/// preamble followed by `n_sections` hypothesized symbols (payload, then
/// postamble), section 0 in the lowest base-M digit.
fn hypothesis_frame(format: &CpmFormat, frame: &FrameLayout, idx: u64) -> Vec<i32> {
    let m = format.m() as u64;
    let mut symbols = vec![1i32; frame.total_len()];
    let mut rest = idx;
    for slot in symbols
        .iter_mut()
        .skip(frame.preamble_len)
        .take(frame.n_sections())
    {
        *slot = format.symbol_from_digit((rest % m) as u32);
        rest /= m;
    }
    symbols
}

fn hypothesis_count(format: &CpmFormat, frame: &FrameLayout) -> Result<u64> {
    let n = u32::try_from(frame.n_sections())
        .ok()
        .and_then(|sections| (format.m() as u64).checked_pow(sections))
        .filter(|&n| n <= EXHAUSTIVE_BUDGET)
        .ok_or(Error::Capacity {
            required: u64::MAX,
            budget: EXHAUSTIVE_BUDGET,
        })?;
    Ok(n)
}

fn best_payload<F>(
    format: &CpmFormat,
    frame: &FrameLayout,
    mut metric: F,
) -> Result<DetectionResult>
where
    F: FnMut(&[f64]) -> f64,
{
    let n_hypotheses = hypothesis_count(format, frame)?;
    let n_samples = frame.total_len() * format.sps() as usize;
    let mut best = f64::NEG_INFINITY;
    let mut best_symbols = Vec::new();
    for idx in 0..n_hypotheses {
        let symbols = hypothesis_frame(format, frame, idx);
        let theta = phase_at_grid(format, &symbols, n_samples);
        let score = metric(&theta);
        if score > best {
            best = score;
            best_symbols = symbols;
        }
    }
    let payload: Vec<i32> = best_symbols
        [frame.preamble_len..frame.preamble_len + frame.payload_len]
        .to_vec();
    Ok(DetectionResult {
        detected: SymbolSequence::new(payload, format.m())?,
        final_metric: best,
        per_section_metrics: None,
    })
}

/// Exhaustive ML detection on the delay-product signal. `rk` must come from
/// [`crate::differential::differential_preprocess`] with delay `k` applied to
/// a frame laid out per `frame` (so `rk` sample `j` sits at absolute sample
/// `j + k·sps`). Scores the same window the Viterbi detector does: trellis
/// sections `preamble_len..total_len`.
pub fn exhaustive_differential(
    rk: &BasebandSignal,
    format: &CpmFormat,
    k: u32,
    frame: &FrameLayout,
) -> Result<DetectionResult> {
    if k == 0 {
        return Err(Error::config("differential delay K must be >= 1"));
    }
    let sps = format.sps() as usize;
    let shift = k as usize * sps;
    if frame.preamble_len < k as usize {
        return Err(Error::input(format!(
            "preamble of {} symbols is shorter than the delay K = {k}",
            frame.preamble_len
        )));
    }
    let needed = frame.total_len() * sps - shift;
    if rk.samples.len() < needed {
        return Err(Error::input(format!(
            "delay-product signal covers {} samples, frame needs {needed}",
            rk.samples.len()
        )));
    }
    let level = differential_signal_level(format);
    let dt = format.sample_period();
    let first = frame.preamble_len * sps;
    let last = frame.total_len() * sps;
    best_payload(format, frame, |theta| {
        (first..last)
            .map(|t| {
                let reference = Complex64::from_polar(level, theta[t] - theta[t - shift]);
                (rk.samples[t - shift] * reference.conj()).re
            })
            .sum::<f64>()
            * dt
    })
}

/// Exhaustive ML detection on the received signal itself (known carrier
/// phase). Scores trellis sections `preamble_len..total_len`, matching the
/// coherent Viterbi detector's window.
pub fn exhaustive_coherent(
    r: &BasebandSignal,
    format: &CpmFormat,
    frame: &FrameLayout,
) -> Result<DetectionResult> {
    let sps = format.sps() as usize;
    let needed = frame.total_len() * sps;
    if r.samples.len() < needed {
        return Err(Error::input(format!(
            "signal covers {} samples, frame needs {needed}",
            r.samples.len()
        )));
    }
    let amplitude = format.amplitude();
    let dt = format.sample_period();
    let first = frame.preamble_len * sps;
    best_payload(format, frame, |theta| {
        (first..needed)
            .map(|t| {
                let reference = Complex64::from_polar(amplitude, theta[t]);
                (r.samples[t] * reference.conj()).re
            })
            .sum::<f64>()
            * dt
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::{apply_channel, noise_level_from_ebn0, ChannelParams};
    use crate::coherent::{build_coherent_trellis, coherent_detect};
    use crate::differential::{build_diff_trellis, differential_preprocess, viterbi_detect};
    use crate::waveform::{modulate, PulseShape};

    const TS: f64 = 1e-4;

    fn fmt(pulse: PulseShape, m: u32, h_num: u32, h_den: u32, l: u32) -> CpmFormat {
        CpmFormat::new(pulse, m, h_num, h_den, l, TS, 8).unwrap()
    }

    fn payload_from_seed(m: u32, n: usize, seed: u64) -> Vec<i32> {
        (0..n)
            .map(|i| {
                let mix = seed
                    .wrapping_mul(0x9e37_79b9_7f4a_7c15)
                    .wrapping_add((i as u64).wrapping_mul(0xbf58_476d_1ce4_e5b9));
                let digit = ((mix >> 32) % m as u64) as u32;
                2 * digit as i32 - (m as i32 - 1)
            })
            .collect()
    }

    fn transmit(format: &CpmFormat, frame: &FrameLayout, payload: &[i32]) -> BasebandSignal {
        let symbols =
            SymbolSequence::new(frame.frame_symbols(payload).unwrap(), format.m()).unwrap();
        modulate(format, &symbols)
    }

    #[test]
    fn hypothesis_frame_decodes_little_endian() {
        let format = fmt(PulseShape::Rec, 4, 1, 2, 1);
        let frame = FrameLayout::new(2, 2, 1).unwrap();
        // idx = 1 + 2·4 + 3·16 → digits (1, 2, 3) → symbols (−1, 1, 3).
        let symbols = hypothesis_frame(&format, &frame, 1 + 2 * 4 + 3 * 16);
        assert_eq!(symbols, vec![1, 1, -1, 1, 3]);
    }

    #[test]
    fn budget_guard_rejects_huge_searches() {
        let format = fmt(PulseShape::Rec, 4, 1, 2, 1);
        let frame = FrameLayout::new(2, 40, 2).unwrap();
        let err = hypothesis_count(&format, &frame).unwrap_err();
        assert!(matches!(err, Error::Capacity { .. }));
    }

    #[test]
    fn noiseless_oracles_recover_payload() {
        for (format, k) in [
            (fmt(PulseShape::Rec, 2, 1, 2, 1), 2),
            (fmt(PulseShape::Rc, 2, 3, 4, 2), 1),
            (fmt(PulseShape::Rec, 4, 1, 4, 1), 1),
        ] {
            let frame = FrameLayout::for_delay(k, format.l(), 4).unwrap();
            let payload = payload_from_seed(format.m(), 4, 77);
            let tx = transmit(&format, &frame, &payload);

            let rk = differential_preprocess(&tx, k, &format).unwrap();
            let diff = exhaustive_differential(&rk, &format, k, &frame).unwrap();
            assert_eq!(diff.detected.symbols(), payload.as_slice());

            let coh = exhaustive_coherent(&tx, &format, &frame).unwrap();
            assert_eq!(coh.detected.symbols(), payload.as_slice());
        }
    }

    #[test]
    fn oracle_matches_differential_viterbi_on_noisy_frames() {
        let format = fmt(PulseShape::Rec, 2, 1, 2, 1);
        let k = 2;
        let trellis = build_diff_trellis(&format, k).unwrap();
        let frame = FrameLayout::for_delay(k, format.l(), 5).unwrap();
        let n0 = noise_level_from_ebn0(&format, 3.0);
        for trial in 0..25u64 {
            let payload = payload_from_seed(2, 5, trial);
            let tx = transmit(&format, &frame, &payload);
            let channel = ChannelParams::new(1.1 + trial as f64, 0.0, n0, 9000 + trial).unwrap();
            let rx = apply_channel(&tx, &channel);
            let rk = differential_preprocess(&rx, k, &format).unwrap();

            let oracle = exhaustive_differential(&rk, &format, k, &frame).unwrap();
            let viterbi = viterbi_detect(&rk, &trellis, &frame).unwrap();
            assert_eq!(
                oracle.detected.symbols(),
                viterbi.detected.symbols(),
                "trial {trial}"
            );
            let scale = oracle.final_metric.abs().max(1e-30);
            assert!(
                (oracle.final_metric - viterbi.final_metric).abs() / scale < 1e-6,
                "metrics diverge on trial {trial}: {} vs {}",
                oracle.final_metric,
                viterbi.final_metric
            );
        }
    }

    #[test]
    fn oracle_matches_coherent_viterbi_on_noisy_frames() {
        let format = fmt(PulseShape::Rc, 2, 1, 2, 2);
        let trellis = build_coherent_trellis(&format).unwrap();
        let frame = FrameLayout::for_delay(1, format.l(), 5).unwrap();
        let n0 = noise_level_from_ebn0(&format, 2.0);
        for trial in 0..25u64 {
            let payload = payload_from_seed(2, 5, trial);
            let tx = transmit(&format, &frame, &payload);
            let channel = ChannelParams::new(0.0, 0.0, n0, 1234 + trial).unwrap();
            let rx = apply_channel(&tx, &channel);

            let oracle = exhaustive_coherent(&rx, &format, &frame).unwrap();
            let viterbi = coherent_detect(&rx, &trellis, &frame).unwrap();
            assert_eq!(
                oracle.detected.symbols(),
                viterbi.detected.symbols(),
                "trial {trial}"
            );
            let scale = oracle.final_metric.abs().max(1e-30);
            assert!(
                (oracle.final_metric - viterbi.final_metric).abs() / scale < 1e-6,
                "metrics diverge on trial {trial}: {} vs {}",
                oracle.final_metric,
                viterbi.final_metric
            );
        }
    }
}
