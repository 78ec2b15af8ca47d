//! Block-fading channel generation, pilot-based channel estimation and the
//! per-link fading MGF used by the closed-form ABEP engine.

use crate::config::SystemConfig;
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use thiserror::Error;

/// Complex gain of one transmit-to-receive link.
pub type ComplexGain = Complex64;

/// Draw a circularly-symmetric complex Gaussian with the given *total*
/// variance (split evenly between the real and imaginary parts).
pub(crate) fn complex_gaussian<R: Rng + ?Sized>(rng: &mut R, total_var: f64) -> Complex64 {
    let s = (0.5 * total_var).sqrt();
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(s * re, s * im)
}

/// One block-fading realization: an `Nt x Nr` grid of complex gains.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelMatrix {
    n_tx: usize,
    n_rx: usize,
    gains: Vec<ComplexGain>,
}

impl ChannelMatrix {
    pub fn from_gains(n_tx: usize, n_rx: usize, gains: Vec<ComplexGain>) -> Self {
        assert_eq!(gains.len(), n_tx * n_rx, "gain grid must be Nt x Nr");
        ChannelMatrix { n_tx, n_rx, gains }
    }

    pub(crate) fn zeroed(n_tx: usize, n_rx: usize) -> Self {
        ChannelMatrix {
            n_tx,
            n_rx,
            gains: vec![Complex64::ZERO; n_tx * n_rx],
        }
    }

    pub fn n_tx(&self) -> usize {
        self.n_tx
    }

    pub fn n_rx(&self) -> usize {
        self.n_rx
    }

    /// Gain of the link from transmit antenna `tx` to receive antenna `rx`.
    #[inline]
    pub fn gain(&self, tx: usize, rx: usize) -> ComplexGain {
        self.gains[tx * self.n_rx + rx]
    }

    pub fn gains(&self) -> &[ComplexGain] {
        &self.gains
    }

    /// Sum of squared envelopes over receive antennas for one transmit antenna.
    pub fn row_power(&self, tx: usize) -> f64 {
        (0..self.n_rx).map(|rx| self.gain(tx, rx).norm_sqr()).sum()
    }
}

/// Pilot-based estimate of a [`ChannelMatrix`], entrywise `est = true + eps`.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelEstimate {
    n_tx: usize,
    n_rx: usize,
    gains: Vec<ComplexGain>,
    err_var_total: f64,
}

impl ChannelEstimate {
    pub(crate) fn zeroed(n_tx: usize, n_rx: usize) -> Self {
        ChannelEstimate {
            n_tx,
            n_rx,
            gains: vec![Complex64::ZERO; n_tx * n_rx],
            err_var_total: 0.0,
        }
    }

    pub fn n_tx(&self) -> usize {
        self.n_tx
    }

    pub fn n_rx(&self) -> usize {
        self.n_rx
    }

    #[inline]
    pub fn gain(&self, tx: usize, rx: usize) -> ComplexGain {
        self.gains[tx * self.n_rx + rx]
    }

    pub fn gains(&self) -> &[ComplexGain] {
        &self.gains
    }

    /// Total complex variance of the additive estimation error.
    pub fn err_var_total(&self) -> f64 {
        self.err_var_total
    }
}

/// Fading model tag. Only unit-power Rayleigh is implemented; the tag keeps
/// the MGF seam open for other models.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Fading {
    /// Rayleigh fading with mean link power `omega = E{|alpha|^2}`.
    Rayleigh { omega: f64 },
}

impl Default for Fading {
    fn default() -> Self {
        Fading::Rayleigh { omega: 1.0 }
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum FadingError {
    #[error("MGF argument outside domain: Re{{s*omega}} = {0} >= 1")]
    MgfDomain(f64),
}

/// Draw one block-fading channel realization.
///
/// Each entry is independent circularly-symmetric complex Gaussian with
/// `E{|alpha|^2} = omega` (unit power by default).
pub fn sample_channel<R: Rng + ?Sized>(cfg: &SystemConfig, rng: &mut R) -> ChannelMatrix {
    let mut m = ChannelMatrix {
        n_tx: cfg.n_tx(),
        n_rx: cfg.n_rx(),
        gains: vec![Complex64::ZERO; cfg.n_tx() * cfg.n_rx()],
    };
    sample_channel_into(&mut m, cfg, rng);
    m
}

pub(crate) fn sample_channel_into<R: Rng + ?Sized>(
    m: &mut ChannelMatrix,
    cfg: &SystemConfig,
    rng: &mut R,
) {
    let Fading::Rayleigh { omega } = cfg.fading();
    debug_assert_eq!(m.gains.len(), cfg.n_tx() * cfg.n_rx());
    for g in &mut m.gains {
        *g = complex_gaussian(rng, omega);
    }
}

/// ML pilot-based estimate of `truth`: `est = truth + eps`, with `eps`
/// i.i.d. circularly-symmetric complex Gaussian of total variance
/// `2*N0 / (Np * Ep)`, independent of the channel and of the receiver
/// noise. Under P-CSI the estimate equals the truth exactly.
pub fn estimate_channel<R: Rng + ?Sized>(
    truth: &ChannelMatrix,
    cfg: &SystemConfig,
    rng: &mut R,
) -> ChannelEstimate {
    let mut est = ChannelEstimate {
        n_tx: truth.n_tx,
        n_rx: truth.n_rx,
        gains: vec![Complex64::ZERO; truth.gains.len()],
        err_var_total: 0.0,
    };
    estimate_channel_into(&mut est, truth, cfg, rng);
    est
}

pub(crate) fn estimate_channel_into<R: Rng + ?Sized>(
    est: &mut ChannelEstimate,
    truth: &ChannelMatrix,
    cfg: &SystemConfig,
    rng: &mut R,
) {
    debug_assert_eq!(est.gains.len(), truth.gains.len());
    let var = cfg.estimation_error_variance();
    est.err_var_total = var;
    if var == 0.0 {
        est.gains.copy_from_slice(&truth.gains);
    } else {
        for (e, t) in est.gains.iter_mut().zip(&truth.gains) {
            *e = t + complex_gaussian(rng, var);
        }
    }
}

/// MGF of the squared envelope, `E{exp(s * |alpha|^2)}`.
///
/// For Rayleigh fading with power `omega` this is `1 / (1 - s*omega)`,
/// valid for `Re{s * omega} < 1`.
pub fn mgf_abs2(fading: Fading, s: Complex64) -> Result<Complex64, FadingError> {
    let Fading::Rayleigh { omega } = fading;
    let so = s * omega;
    if so.re >= 1.0 {
        return Err(FadingError::MgfDomain(so.re));
    }
    Ok(Complex64::ONE / (Complex64::ONE - so))
}
