//! Sum-of-sinusoids Rayleigh fading.
//!
//! `h(t) = N^{-1/2} Σ_n exp(j(2π f_d t cos α_n + φ_n))` with arrival angles
//! `α_n` and phases `φ_n` drawn i.i.d. uniform on `[0, 2π)`. Over the ensemble
//! `E|h|² = 1`, `E[h(t) h*(t+τ)] = J₀(2π f_d τ)` and the normalized
//! autocovariance of `|h|²` is `J₀(2π f_d τ)²`, for any `N ≥ 2`.

use num_complex::Complex64;
use rand::Rng;
use std::f64::consts::TAU;

pub const OSCILLATORS: usize = 8;

#[derive(Debug, Clone, PartialEq)]
pub struct JakesBank {
    cos_alpha: [f64; OSCILLATORS],
    phase: [f64; OSCILLATORS],
}

impl JakesBank {
    pub fn random<R: Rng + ?Sized>(rng: &mut R) -> Self {
        let mut cos_alpha = [0.0; OSCILLATORS];
        let mut phase = [0.0; OSCILLATORS];
        for n in 0..OSCILLATORS {
            cos_alpha[n] = (TAU * rng.gen::<f64>()).cos();
            phase[n] = TAU * rng.gen::<f64>();
        }
        JakesBank { cos_alpha, phase }
    }

    /// Complex gain at time `t` seconds.
    pub fn gain(&self, doppler_hz: f64, t: f64) -> Complex64 {
        let omega = TAU * doppler_hz * t;
        let sum: Complex64 = self
            .cos_alpha
            .iter()
            .zip(&self.phase)
            .map(|(&c, &p)| Complex64::from_polar(1.0, omega * c + p))
            .sum();
        sum / (OSCILLATORS as f64).sqrt()
    }

    pub fn power(&self, doppler_hz: f64, t: f64) -> f64 {
        self.gain(doppler_hz, t).norm_sqr()
    }
}
