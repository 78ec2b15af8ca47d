//! Experiment configuration: antenna counts, pilot setup, SNR and the
//! energy/noise conventions shared by the analytic and Monte Carlo engines.

use crate::fading::Fading;
use thiserror::Error;

/// Default pilot-to-data energy ratio `r_pm = Ep / Em`.
pub const DEFAULT_PILOT_RATIO: f64 = 1.0;

/// Pilot configuration of the channel estimator.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Pilots {
    /// Perfect channel state information (no estimation error).
    Perfect,
    /// Maximum-likelihood estimation from `Np >= 1` pilot pulses.
    Count(u32),
}

impl Pilots {
    pub fn is_perfect(self) -> bool {
        matches!(self, Pilots::Perfect)
    }

    /// Human-readable tag used in CSV output and CLI arguments.
    pub fn label(self) -> String {
        match self {
            Pilots::Perfect => "pcsi".to_string(),
            Pilots::Count(n) => n.to_string(),
        }
    }
}

impl std::str::FromStr for Pilots {
    type Err = ConfigError;

    fn from_str(s: &str) -> Result<Self, ConfigError> {
        let s = s.trim();
        if s.eq_ignore_ascii_case("pcsi") || s.eq_ignore_ascii_case("perfect") {
            return Ok(Pilots::Perfect);
        }
        match s.parse::<u32>() {
            Ok(n) if n >= 1 => Ok(Pilots::Count(n)),
            _ => Err(ConfigError::InvalidPilots(s.to_string())),
        }
    }
}

/// Transmission scheme selector.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scheme {
    TosdSsk,
    Alamouti,
}

impl Scheme {
    pub fn label(self) -> &'static str {
        match self {
            Scheme::TosdSsk => "tosd_ssk",
            Scheme::Alamouti => "alamouti",
        }
    }
}

impl std::str::FromStr for Scheme {
    type Err = ConfigError;

    fn from_str(s: &str) -> Result<Self, ConfigError> {
        match s.trim().to_ascii_lowercase().as_str() {
            "tosd_ssk" | "tosd-ssk" | "ssk" => Ok(Scheme::TosdSsk),
            "alamouti" => Ok(Scheme::Alamouti),
            other => Err(ConfigError::InvalidScheme(other.to_string())),
        }
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum ConfigError {
    #[error("Nt must be a power of two >= 2, got {0}")]
    InvalidTxCount(usize),
    #[error("Nr must be >= 1")]
    InvalidRxCount,
    #[error("pilot count must be a positive integer or \"pcsi\", got {0:?}")]
    InvalidPilots(String),
    #[error("pilot energy ratio must be positive and finite, got {0}")]
    InvalidPilotRatio(f64),
    #[error("SNR (dB) must not be NaN or -inf")]
    InvalidSnr,
    #[error("unknown scheme {0:?} (expected tosd_ssk or alamouti)")]
    InvalidScheme(String),
}

/// One experiment point.
///
/// The transmit energy is normalized to `Em = 1`; the noise level follows
/// from the configured SNR as `N0 = Em / snr_linear`. Error rates depend
/// only on the ratios `Em/N0` and `Ep/Em`, so this loses no generality.
///
/// `N0` is the noise spectral density per real dimension: the projected
/// receiver noise carries total complex variance `2*N0`, and the channel
/// estimation error carries total complex variance `2*N0 / (Np * Ep)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SystemConfig {
    n_tx: usize,
    n_rx: usize,
    pilots: Pilots,
    pilot_ratio: f64,
    snr_db: f64,
    fading: Fading,
}

impl SystemConfig {
    pub fn new(
        n_tx: usize,
        n_rx: usize,
        pilots: Pilots,
        pilot_ratio: f64,
        snr_db: f64,
    ) -> Result<Self, ConfigError> {
        if n_tx < 2 || !n_tx.is_power_of_two() {
            return Err(ConfigError::InvalidTxCount(n_tx));
        }
        if n_rx < 1 {
            return Err(ConfigError::InvalidRxCount);
        }
        if let Pilots::Count(0) = pilots {
            return Err(ConfigError::InvalidPilots("0".to_string()));
        }
        if pilot_ratio.is_nan() || pilot_ratio <= 0.0 || pilot_ratio.is_infinite() {
            return Err(ConfigError::InvalidPilotRatio(pilot_ratio));
        }
        // +inf is allowed (noiseless limit); NaN and -inf are not.
        if snr_db.is_nan() || snr_db == f64::NEG_INFINITY {
            return Err(ConfigError::InvalidSnr);
        }
        Ok(SystemConfig {
            n_tx,
            n_rx,
            pilots,
            pilot_ratio,
            snr_db,
            fading: Fading::default(),
        })
    }

    pub fn n_tx(&self) -> usize {
        self.n_tx
    }

    pub fn n_rx(&self) -> usize {
        self.n_rx
    }

    pub fn pilots(&self) -> Pilots {
        self.pilots
    }

    pub fn pilot_ratio(&self) -> f64 {
        self.pilot_ratio
    }

    pub fn snr_db(&self) -> f64 {
        self.snr_db
    }

    pub fn fading(&self) -> Fading {
        self.fading
    }

    /// Bits carried per TOSD-SSK symbol, `R = log2(Nt)`.
    pub fn rate_bits(&self) -> u32 {
        self.n_tx.trailing_zeros()
    }

    pub fn snr_linear(&self) -> f64 {
        10f64.powf(self.snr_db / 10.0)
    }

    /// Average symbol energy `Em` (unity by convention).
    pub fn energy(&self) -> f64 {
        1.0
    }

    /// Noise spectral density per real dimension, `N0 = Em / snr`.
    pub fn noise_n0(&self) -> f64 {
        self.energy() / self.snr_linear()
    }

    /// Pilot pulse energy `Ep = r_pm * Em`.
    pub fn pilot_energy(&self) -> f64 {
        self.pilot_ratio * self.energy()
    }

    /// `Np * r_pm`, the quantity the CF kernel depends on. `None` for P-CSI.
    pub fn np_rpm(&self) -> Option<f64> {
        match self.pilots {
            Pilots::Perfect => None,
            Pilots::Count(np) => Some(f64::from(np) * self.pilot_ratio),
        }
    }

    /// Total complex variance of the channel estimation error,
    /// `2*N0 / (Np * Ep)` (i.e. `N0 / (Np * Ep)` per real dimension).
    /// Zero under P-CSI.
    pub fn estimation_error_variance(&self) -> f64 {
        match self.pilots {
            Pilots::Perfect => 0.0,
            Pilots::Count(np) => 2.0 * self.noise_n0() / (f64::from(np) * self.pilot_energy()),
        }
    }

    /// Same configuration at a different SNR.
    pub fn with_snr_db(&self, snr_db: f64) -> Self {
        SystemConfig { snr_db, ..*self }
    }

    /// Same configuration with a different pilot setup.
    pub fn with_pilots(&self, pilots: Pilots) -> Self {
        SystemConfig { pilots, ..*self }
    }
}
