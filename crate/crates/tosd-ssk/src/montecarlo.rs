//! Monte Carlo trial harness: per-SNR-point simulation with deterministic
//! splittable seeding, early stopping and Wilson confidence intervals.
//!
//! Trials are partitioned into fixed-size batches, each owning a counter
//! RNG seeded from `(point seed, batch index)`. Batches run in waves of a
//! fixed count; the stopping rule is evaluated only at wave boundaries and
//! results merge by summing counts, so output is bit-identical for any
//! worker count.

use crate::alamouti::{CodewordSim, PskConstellation};
use crate::config::{Scheme, SystemConfig};
use crate::fading::{estimate_channel_into, sample_channel_into, ChannelEstimate, ChannelMatrix};
use crate::ssk;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use thiserror::Error;

/// Trials per RNG batch.
const BATCH_TRIALS: u64 = 4096;
/// Batches launched between two stopping-rule checks.
const WAVE_BATCHES: u64 = 64;

/// 97.5% standard normal quantile (two-sided 95%).
const Z95: f64 = 1.959963984540054;

#[derive(Debug, Error, PartialEq)]
pub enum McError {
    #[error("target BER {target} not bracketed on [{lo_db}, {hi_db}] dB")]
    TargetNotBracketed { target: f64, lo_db: f64, hi_db: f64 },
    #[error("invalid search setup: {0}")]
    InvalidSearch(String),
}

/// Early-stopping policy for one SNR point.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StoppingRule {
    /// Stop once at least this many bit errors have been counted.
    pub min_errors: u64,
    /// Hard cap on simulated trials (symbols or codewords).
    pub max_trials: u64,
}

impl Default for StoppingRule {
    fn default() -> Self {
        StoppingRule {
            min_errors: 200,
            max_trials: 100_000_000,
        }
    }
}

/// Measured (and optionally analytic) error rate at one SNR point.
#[derive(Debug, Clone, PartialEq)]
pub struct BerPoint {
    pub snr_db: f64,
    pub scheme: Scheme,
    pub abep_mc: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub trials: u64,
    pub bit_errors: u64,
    pub total_bits: u64,
    pub abep_analytic: Option<f64>,
    /// Set when the trial cap was reached with zero errors: the point only
    /// upper-bounds the true error rate (see `ci_high`).
    pub upper_bound_only: bool,
    /// Seed this point was run with (batch seeds derive from it).
    pub seed: u64,
}

/// One step of the splitmix64 output function.
fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Deterministic seed stream: `hash(base, stream, index)`.
pub fn derive_seed(base: u64, stream: u64, index: u64) -> u64 {
    let a = mix64(base.wrapping_add(0x9e37_79b9_7f4a_7c15));
    let b = mix64(a ^ stream.wrapping_add(0x9e37_79b9_7f4a_7c15));
    mix64(b ^ index.wrapping_add(0x9e37_79b9_7f4a_7c15))
}

/// 95% Wilson score interval for an error proportion.
pub fn wilson_ci(errors: u64, total_bits: u64) -> (f64, f64) {
    assert!(total_bits >= 1, "need at least one bit");
    assert!(errors <= total_bits, "errors cannot exceed bits");
    let n = total_bits as f64;
    let p = errors as f64 / n;
    let z2 = Z95 * Z95;
    let denom = 1.0 + z2 / n;
    let center = (p + z2 / (2.0 * n)) / denom;
    let half = Z95 * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt() / denom;
    // boundary cases are exact; the formula only leaves rounding dust there
    let lo = if errors == 0 {
        0.0
    } else {
        (center - half).max(0.0)
    };
    let hi = if errors == total_bits {
        1.0
    } else {
        (center + half).min(1.0)
    };
    (lo, hi)
}

/// Per-batch accumulator.
#[derive(Debug, Default, Clone, Copy)]
struct Counts {
    trials: u64,
    bits: u64,
    errors: u64,
}

impl Counts {
    fn add(&mut self, other: Counts) {
        self.trials += other.trials;
        self.bits += other.bits;
        self.errors += other.errors;
    }
}

fn run_batch(cfg: &SystemConfig, scheme: Scheme, seed: u64, trials: u64) -> Counts {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    match scheme {
        Scheme::TosdSsk => run_batch_tosd(cfg, &mut rng, trials),
        Scheme::Alamouti => run_batch_alamouti(cfg, &mut rng, trials),
    }
}

/// One TOSD-SSK symbol per trial: fresh channel block, fresh pilot
/// estimate, random message, mismatched detection.
fn run_batch_tosd(cfg: &SystemConfig, rng: &mut ChaCha8Rng, trials: u64) -> Counts {
    let n_tx = cfg.n_tx();
    let n_rx = cfg.n_rx();
    let bits_per_symbol = cfg.rate_bits();
    let mut truth = ChannelMatrix::zeroed(n_tx, n_rx);
    let mut est = ChannelEstimate::zeroed(n_tx, n_rx);
    let mut rx = ssk::RxProjection::zeroed(n_tx, n_rx);
    let mut metrics = ssk::MetricVector::zeroed(n_tx);
    let mut errors = 0u64;
    for _ in 0..trials {
        sample_channel_into(&mut truth, cfg, rng);
        estimate_channel_into(&mut est, &truth, cfg, rng);
        let sent = rng.random_range(0..n_tx);
        ssk::observe_into(&mut rx, sent, &truth, cfg, rng);
        ssk::decision_metrics_into(&mut metrics, &rx, &est, cfg);
        let detected = ssk::detect(&metrics);
        errors += u64::from(((sent ^ detected) as u32).count_ones());
    }
    Counts {
        trials,
        bits: trials * u64::from(bits_per_symbol),
        errors,
    }
}

/// One Alamouti codeword per trial (`2 log2 M` bits). The configured
/// `n_tx = 2^R` selects the constellation size at equal rate.
fn run_batch_alamouti(cfg: &SystemConfig, rng: &mut ChaCha8Rng, trials: u64) -> Counts {
    let constellation =
        PskConstellation::natural(cfg.n_tx()).expect("rate 1..4 maps to M in {2,4,8,16}");
    let bits_per_codeword = u64::from(2 * constellation.bits_per_symbol());
    let mut sim = CodewordSim::new(cfg);
    let mut errors = 0u64;
    for _ in 0..trials {
        errors += u64::from(sim.step(&constellation, rng));
    }
    Counts {
        trials,
        bits: trials * bits_per_codeword,
        errors,
    }
}

/// Estimate the bit error rate at one SNR point.
///
/// Deterministic for fixed `(cfg, scheme, rule, seed)` regardless of the
/// rayon worker count.
pub fn run_point(cfg: &SystemConfig, scheme: Scheme, rule: &StoppingRule, seed: u64) -> BerPoint {
    let mut total = Counts::default();
    let mut wave = 0u64;
    loop {
        let first = wave * WAVE_BATCHES;
        let wave_counts: Vec<Counts> = (first..first + WAVE_BATCHES)
            .into_par_iter()
            .map(|batch| run_batch(cfg, scheme, derive_seed(seed, batch, 0), BATCH_TRIALS))
            .collect();
        for c in wave_counts {
            total.add(c);
        }
        wave += 1;
        if total.errors >= rule.min_errors || total.trials >= rule.max_trials {
            break;
        }
    }
    let (ci_low, ci_high) = wilson_ci(total.errors, total.bits);
    BerPoint {
        snr_db: cfg.snr_db(),
        scheme,
        abep_mc: total.errors as f64 / total.bits as f64,
        ci_low,
        ci_high,
        trials: total.trials,
        bit_errors: total.errors,
        total_bits: total.bits,
        abep_analytic: None,
        upper_bound_only: total.errors == 0,
        seed,
    }
}

/// Run one point per SNR value with per-point derived seeds; TOSD-SSK
/// points get the analytic ABEP attached (left `None` if the closed form
/// fails, without aborting the sweep).
pub fn sweep(
    cfg: &SystemConfig,
    scheme: Scheme,
    snr_db_list: &[f64],
    rule: &StoppingRule,
    base_seed: u64,
) -> Vec<BerPoint> {
    snr_db_list
        .iter()
        .enumerate()
        .map(|(idx, &db)| {
            let point_cfg = cfg.with_snr_db(db);
            let mut point = run_point(
                &point_cfg,
                scheme,
                rule,
                derive_seed(base_seed, idx as u64, 1),
            );
            if scheme == Scheme::TosdSsk {
                point.abep_analytic = crate::analytic::abep(&point_cfg).ok();
            }
            point
        })
        .collect()
}

/// Bisection search for the SNR at which the simulated BER crosses
/// `target`.
#[derive(Debug, Clone, Copy)]
pub struct ThresholdSearch {
    pub target: f64,
    pub lo_db: f64,
    pub hi_db: f64,
    /// Errors to accumulate per evaluation when the interval estimate
    /// still straddles the target.
    pub min_errors: u64,
    pub max_trials_per_eval: u64,
    /// Bisection stops once the bracket is this narrow (dB).
    pub tol_db: f64,
}

impl Default for ThresholdSearch {
    fn default() -> Self {
        ThresholdSearch {
            target: 1e-4,
            lo_db: -10.0,
            hi_db: 60.0,
            min_errors: 600,
            max_trials_per_eval: 400_000_000,
            tol_db: 0.08,
        }
    }
}

/// Adaptive BER measurement for the threshold search: stops as soon as the
/// 95% CI excludes the target, or once `min_errors` have been seen.
fn measure_vs_target(
    cfg: &SystemConfig,
    scheme: Scheme,
    search: &ThresholdSearch,
    seed: u64,
) -> f64 {
    let mut total = Counts::default();
    let mut wave = 0u64;
    loop {
        let first = wave * WAVE_BATCHES;
        let wave_counts: Vec<Counts> = (first..first + WAVE_BATCHES)
            .into_par_iter()
            .map(|batch| run_batch(cfg, scheme, derive_seed(seed, batch, 0), BATCH_TRIALS))
            .collect();
        for c in wave_counts {
            total.add(c);
        }
        wave += 1;
        if total.errors >= search.min_errors || total.trials >= search.max_trials_per_eval {
            break;
        }
        let (lo, hi) = wilson_ci(total.errors, total.bits);
        if search.target < lo || search.target > hi {
            break;
        }
    }
    total.errors as f64 / total.bits as f64
}

/// MC bisection on the SNR axis; used for the Alamouti scheme, which has
/// no closed-form ABEP under estimation errors. Deterministic given the
/// seed (evaluation seeds derive from it).
pub fn snr_for_target_ber(
    cfg: &SystemConfig,
    scheme: Scheme,
    search: &ThresholdSearch,
    seed: u64,
) -> Result<f64, McError> {
    if search.target.is_nan() || search.target <= 0.0 || search.target >= 0.5 {
        return Err(McError::InvalidSearch(format!(
            "target must lie in (0, 0.5), got {}",
            search.target
        )));
    }
    if search.lo_db >= search.hi_db || search.tol_db <= 0.0 || search.tol_db.is_nan() {
        return Err(McError::InvalidSearch("bad bracket or tolerance".into()));
    }
    let mut eval_index = 0u64;
    let eval = |db: f64, eval_index: &mut u64| {
        let ber = measure_vs_target(
            &cfg.with_snr_db(db),
            scheme,
            search,
            derive_seed(seed, *eval_index, 2),
        );
        *eval_index += 1;
        ber
    };
    if eval(search.lo_db, &mut eval_index) < search.target
        || eval(search.hi_db, &mut eval_index) > search.target
    {
        return Err(McError::TargetNotBracketed {
            target: search.target,
            lo_db: search.lo_db,
            hi_db: search.hi_db,
        });
    }
    let (mut lo, mut hi) = (search.lo_db, search.hi_db);
    while hi - lo > search.tol_db {
        let mid = 0.5 * (lo + hi);
        if eval(mid, &mut eval_index) > search.target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}
