//! Time-orthonormal Hermite-Gaussian pulse set.
//!
//! Each transmit antenna radiates a distinct Hermite-Gaussian pulse;
//! orthonormality of the set is what licenses the discrete matched-filter
//! model used by the detector and the Monte Carlo engine. This module
//! builds the pulses and certifies the Gram matrix numerically.

use num_complex::Complex64;
use thiserror::Error;

/// Numerical-stability cap on the Hermite order.
pub const MAX_ORDER: u32 = 64;

/// Tail margin (in scale units) added past the order-n turning point
/// `sqrt(2n+1)` so that truncation keeps >= 99.9999% of the pulse energy.
const TAIL_MARGIN: f64 = 6.0;

/// Default sampling density per scale unit of the underlying Gaussian.
const SAMPLES_PER_SCALE: f64 = 64.0;

/// Fraction of pulse energy that must be captured by the sampling grid.
const COVERAGE_TOL: f64 = 1e-6;

#[derive(Debug, Error, PartialEq)]
pub enum WaveformError {
    #[error("Hermite order {0} exceeds the supported maximum {MAX_ORDER}")]
    UnsupportedOrder(u32),
    #[error("pulse duration must be positive and finite, got {0}")]
    InvalidDuration(f64),
    #[error("scale must be positive and finite, got {0}")]
    InvalidScale(f64),
    #[error("need at least one pulse")]
    Empty,
    #[error(
        "sampling grid covers only {energy:.9} of pulse {pulse}'s unit energy \
         (required within {COVERAGE_TOL:e} of 1)"
    )]
    InsufficientCoverage { pulse: usize, energy: f64 },
}

/// Unit-energy Hermite-Gaussian function of the given order, evaluated at
/// time `t` with the given time scale: `psi_n(t/scale) / sqrt(scale)`.
///
/// Uses the normalized three-term recurrence, which stays bounded for all
/// supported orders.
pub fn hermite_pulse(order: u32, t: f64, scale: f64) -> Result<f64, WaveformError> {
    if order > MAX_ORDER {
        return Err(WaveformError::UnsupportedOrder(order));
    }
    if scale.is_nan() || scale <= 0.0 || scale.is_infinite() {
        return Err(WaveformError::InvalidScale(scale));
    }
    let x = t / scale;
    let mut prev = 0.0;
    let mut cur = std::f64::consts::PI.powf(-0.25) * (-0.5 * x * x).exp();
    for n in 0..order {
        let n = f64::from(n);
        let next = x * (2.0 / (n + 1.0)).sqrt() * cur - (n / (n + 1.0)).sqrt() * prev;
        prev = cur;
        cur = next;
    }
    Ok(cur / scale.sqrt())
}

/// Sampled set of orthonormal pulses, one per transmit antenna, with
/// orders `0..n_pulses` over a symmetric window of length `duration`.
#[derive(Debug, Clone)]
pub struct PulseSet {
    orders: Vec<u32>,
    duration: f64,
    scale: f64,
    dt: f64,
    samples_per_pulse: usize,
    /// Pulse-major sample grid.
    amplitudes: Vec<f64>,
}

impl PulseSet {
    /// Build the set with the default sampling density (64 samples per
    /// scale unit). The time scale is chosen so the highest-order pulse
    /// keeps at least 99.9999% of its energy inside the window.
    pub fn hermite(n_pulses: usize, duration: f64) -> Result<Self, WaveformError> {
        Self::build(n_pulses, duration, None)
    }

    /// Same as [`PulseSet::hermite`] but with an explicit total sample
    /// count per pulse, for grid-sensitivity experiments.
    pub fn with_sampling(
        n_pulses: usize,
        duration: f64,
        samples_per_pulse: usize,
    ) -> Result<Self, WaveformError> {
        Self::build(n_pulses, duration, Some(samples_per_pulse))
    }

    fn build(
        n_pulses: usize,
        duration: f64,
        samples_override: Option<usize>,
    ) -> Result<Self, WaveformError> {
        if n_pulses == 0 {
            return Err(WaveformError::Empty);
        }
        let max_order = (n_pulses - 1) as u32;
        if max_order > MAX_ORDER {
            return Err(WaveformError::UnsupportedOrder(max_order));
        }
        if duration.is_nan() || duration <= 0.0 || duration.is_infinite() {
            return Err(WaveformError::InvalidDuration(duration));
        }
        let turning_point = (2.0 * f64::from(max_order) + 1.0).sqrt();
        let scale = 0.5 * duration / (turning_point + TAIL_MARGIN);
        let samples_per_pulse = samples_override
            .unwrap_or_else(|| (SAMPLES_PER_SCALE * duration / scale).ceil() as usize)
            .max(2);
        let dt = duration / samples_per_pulse as f64;

        let orders: Vec<u32> = (0..=max_order).collect();
        let mut amplitudes = Vec::with_capacity(n_pulses * samples_per_pulse);
        for &order in &orders {
            for k in 0..samples_per_pulse {
                let t = -0.5 * duration + (k as f64 + 0.5) * dt;
                amplitudes.push(hermite_pulse(order, t, scale)?);
            }
        }
        Ok(PulseSet {
            orders,
            duration,
            scale,
            dt,
            samples_per_pulse,
            amplitudes,
        })
    }

    pub fn n_pulses(&self) -> usize {
        self.orders.len()
    }

    pub fn duration(&self) -> f64 {
        self.duration
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn samples_per_pulse(&self) -> usize {
        self.samples_per_pulse
    }

    pub fn samples(&self, pulse: usize) -> &[f64] {
        let n = self.samples_per_pulse;
        &self.amplitudes[pulse * n..(pulse + 1) * n]
    }

    /// Discretized Gram matrix, row-major `n_pulses x n_pulses`.
    ///
    /// Fails if the grid captures less than the required share of any
    /// pulse's unit energy (too-short window or too-coarse sampling).
    pub fn gram_matrix(&self) -> Result<Vec<f64>, WaveformError> {
        let n = self.n_pulses();
        let mut gram = vec![0.0; n * n];
        for i in 0..n {
            for j in i..n {
                let dot: f64 = self
                    .samples(i)
                    .iter()
                    .zip(self.samples(j))
                    .map(|(a, b)| a * b)
                    .sum::<f64>()
                    * self.dt;
                gram[i * n + j] = dot;
                gram[j * n + i] = dot;
            }
        }
        for i in 0..n {
            let energy = gram[i * n + i];
            if (energy - 1.0).abs() > COVERAGE_TOL {
                return Err(WaveformError::InsufficientCoverage { pulse: i, energy });
            }
        }
        Ok(gram)
    }

    /// Largest entrywise deviation of the Gram matrix from the identity.
    pub fn max_gram_deviation(&self) -> Result<f64, WaveformError> {
        let n = self.n_pulses();
        let gram = self.gram_matrix()?;
        let mut worst = 0.0f64;
        for i in 0..n {
            for j in 0..n {
                let target = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((gram[i * n + j] - target).abs());
            }
        }
        Ok(worst)
    }

    /// Project a sampled complex signal onto every pulse of the set.
    pub fn project(&self, signal: &[Complex64]) -> Vec<Complex64> {
        assert_eq!(signal.len(), self.samples_per_pulse, "sample grid mismatch");
        (0..self.n_pulses())
            .map(|i| {
                self.samples(i)
                    .iter()
                    .zip(signal)
                    .map(|(&w, &s)| s * w)
                    .sum::<Complex64>()
                    * self.dt
            })
            .collect()
    }
}
