//! AWGN channel with phase offset and Doppler (frequency) offset.
//!
//! The received signal is r(t) = s(t)·e^{j(2π·fd·t + ψ)} + n(t) with n
//! circularly symmetric white Gaussian noise of double-sided PSD N0/2.
//! Discrete-time calibration: a complex sample carries total variance
//! N0/sample_period (N0/(2·sample_period) per real dimension) so that sampled
//! correlation-metric statistics match the continuous-time model.

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use rand_distr::{Distribution, StandardNormal};
use std::f64::consts::TAU;

use crate::error::{Error, Result};
use crate::waveform::{BasebandSignal, CpmFormat};

/// Channel configuration: deterministic given the seed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChannelParams {
    psi: f64,
    fd: f64,
    n0: f64,
    seed: u64,
}

impl ChannelParams {
    /// `psi` is normalized into [0, 2π); `n0` must be non-negative.
    pub fn new(psi: f64, fd: f64, n0: f64, seed: u64) -> Result<Self> {
        if !(n0 >= 0.0) || !n0.is_finite() {
            return Err(Error::config(format!(
                "noise level N0 must be non-negative, got {n0}"
            )));
        }
        if !psi.is_finite() || !fd.is_finite() {
            return Err(Error::config("phase and Doppler offsets must be finite"));
        }
        Ok(ChannelParams {
            psi: psi.rem_euclid(TAU),
            fd,
            n0,
            seed,
        })
    }

    pub fn psi(&self) -> f64 {
        self.psi
    }

    pub fn fd(&self) -> f64 {
        self.fd
    }

    pub fn n0(&self) -> f64 {
        self.n0
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }
}

/// Noise level from the SNR-per-bit operating point:
/// N0 = Es / (log2(M) · 10^(ebn0_db/10)).
pub fn noise_level_from_ebn0(format: &CpmFormat, ebn0_db: f64) -> f64 {
    format.es() / (format.bits_per_symbol() * 10f64.powf(ebn0_db / 10.0))
}

/// Applies phase offset, additive noise, and frequency offset:
/// sample k at time t_k ↦ (s_k·e^{jψ} + n_k)·e^{j2π·fd·t_k}.
///
/// The frequency offset acts at the receiver's downconverter, so it rotates
/// the front-end noise along with the signal. Because the noise is circularly
/// symmetric, white, and stationary, this is statistically identical to
/// shifting the incoming signal alone — but it keeps the delayed-conjugate
/// product's e^{j2π·fd·K·Ts} factorization exact even on noisy samples.
pub fn apply_channel(s: &BasebandSignal, p: &ChannelParams) -> BasebandSignal {
    let mut rng = ChaCha12Rng::seed_from_u64(p.seed);
    // Per-real-dimension standard deviation of the discrete noise.
    let sigma = (p.n0 / (2.0 * s.sample_period)).sqrt();
    let phase_offset = Complex64::from_polar(1.0, p.psi);
    let samples = s
        .samples
        .iter()
        .enumerate()
        .map(|(k, &z)| {
            let noisy = if p.n0 > 0.0 {
                let re: f64 = StandardNormal.sample(&mut rng);
                let im: f64 = StandardNormal.sample(&mut rng);
                z * phase_offset + Complex64::new(sigma * re, sigma * im)
            } else {
                z * phase_offset
            };
            let t = s.start_time + k as f64 * s.sample_period;
            noisy * Complex64::from_polar(1.0, TAU * p.fd * t)
        })
        .collect();
    BasebandSignal {
        samples,
        sample_period: s.sample_period,
        start_time: s.start_time,
    }
}
