//! TOSD-SSK encoder, equivalent discrete received-signal model and the
//! mismatched maximum-likelihood detector.
//!
//! Antenna indices are 0-based throughout: bit word value `v` activates
//! antenna slot `v`. Because the per-antenna waveforms are orthonormal
//! (see [`crate::waveform`]), the matched-filter bank reduces the received
//! waveform to one complex projection per (antenna, receive-antenna) pair,
//! with i.i.d. noise of total variance `2*N0` across projections.

use crate::config::SystemConfig;
use crate::fading::{complex_gaussian, ChannelEstimate, ChannelMatrix};
use num_complex::Complex64;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum SskError {
    #[error("bit word has {got} bits but Nt = {n_tx} needs exactly {want}")]
    WordLength { got: usize, want: u32, n_tx: usize },
    #[error("antenna index {index} out of range for Nt = {n_tx}")]
    IndexRange { index: usize, n_tx: usize },
    #[error("dimension mismatch between projections ({rx}) and estimates ({est})")]
    DimensionMismatch { rx: usize, est: usize },
}

/// Matched-filter outputs: an `Nt x Nr` grid of complex projections.
#[derive(Debug, Clone, PartialEq)]
pub struct RxProjection {
    n_tx: usize,
    n_rx: usize,
    values: Vec<Complex64>,
}

impl RxProjection {
    pub(crate) fn zeroed(n_tx: usize, n_rx: usize) -> Self {
        RxProjection {
            n_tx,
            n_rx,
            values: vec![Complex64::ZERO; n_tx * n_rx],
        }
    }

    pub fn n_tx(&self) -> usize {
        self.n_tx
    }

    pub fn n_rx(&self) -> usize {
        self.n_rx
    }

    #[inline]
    pub fn value(&self, tx: usize, rx: usize) -> Complex64 {
        self.values[tx * self.n_rx + rx]
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }
}

/// One decision metric per antenna hypothesis.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricVector {
    values: Vec<f64>,
}

impl MetricVector {
    pub(crate) fn zeroed(n_tx: usize) -> Self {
        MetricVector {
            values: vec![0.0; n_tx],
        }
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }
}

/// Map a block of `log2(Nt)` bits to the 0-based index of the antenna to
/// activate (natural binary, most significant bit first).
pub fn encode(bits: &[bool], n_tx: usize) -> Result<usize, SskError> {
    let want = n_tx.trailing_zeros();
    if !n_tx.is_power_of_two() || bits.len() != want as usize {
        return Err(SskError::WordLength {
            got: bits.len(),
            want,
            n_tx,
        });
    }
    Ok(bits
        .iter()
        .fold(0usize, |acc, &b| (acc << 1) | usize::from(b)))
}

/// Inverse of [`encode`].
pub fn decode(index: usize, n_tx: usize) -> Result<Vec<bool>, SskError> {
    if index >= n_tx {
        return Err(SskError::IndexRange { index, n_tx });
    }
    let bits = n_tx.trailing_zeros();
    Ok((0..bits).rev().map(|k| (index >> k) & 1 == 1).collect())
}

/// Simulate the matched-filter outputs when antenna `sent` is active:
/// `rho[i][l] = sqrt(Em) * alpha[sent][l] * delta(i, sent) + noise`, with
/// the noise i.i.d. circularly-symmetric of total variance `2*N0`.
pub fn observe<R: rand::Rng + ?Sized>(
    sent: usize,
    truth: &ChannelMatrix,
    cfg: &SystemConfig,
    rng: &mut R,
) -> RxProjection {
    let mut rx = RxProjection {
        n_tx: truth.n_tx(),
        n_rx: truth.n_rx(),
        values: vec![Complex64::ZERO; truth.n_tx() * truth.n_rx()],
    };
    observe_into(&mut rx, sent, truth, cfg, rng);
    rx
}

pub(crate) fn observe_into<R: rand::Rng + ?Sized>(
    rx: &mut RxProjection,
    sent: usize,
    truth: &ChannelMatrix,
    cfg: &SystemConfig,
    rng: &mut R,
) {
    assert!(sent < truth.n_tx(), "antenna index out of range");
    let amp = cfg.energy().sqrt();
    let noise_var = 2.0 * cfg.noise_n0();
    let n_rx = truth.n_rx();
    for (idx, v) in rx.values.iter_mut().enumerate() {
        *v = if noise_var > 0.0 {
            complex_gaussian(rng, noise_var)
        } else {
            Complex64::ZERO
        };
        let (tx, l) = (idx / n_rx, idx % n_rx);
        if tx == sent {
            *v += amp * truth.gain(tx, l);
        }
    }
}

/// Mismatched ML decision metrics, one per hypothesis:
/// `D[i] = sum_l Re{rho[i][l] * conj(sqrt(Em) * est[i][l])}
///        - Em/2 * sum_l |est[i][l]|^2`.
pub fn decision_metrics(
    rx: &RxProjection,
    est: &ChannelEstimate,
    cfg: &SystemConfig,
) -> Result<MetricVector, SskError> {
    if rx.n_tx != est.n_tx() || rx.n_rx != est.n_rx() {
        return Err(SskError::DimensionMismatch {
            rx: rx.values.len(),
            est: est.gains().len(),
        });
    }
    let mut metrics = MetricVector {
        values: vec![0.0; rx.n_tx],
    };
    decision_metrics_into(&mut metrics, rx, est, cfg);
    Ok(metrics)
}

pub(crate) fn decision_metrics_into(
    metrics: &mut MetricVector,
    rx: &RxProjection,
    est: &ChannelEstimate,
    cfg: &SystemConfig,
) {
    let em = cfg.energy();
    let amp = em.sqrt();
    let n_rx = rx.n_rx;
    for (i, m) in metrics.values.iter_mut().enumerate() {
        let mut corr = 0.0;
        let mut power = 0.0;
        for l in 0..n_rx {
            let h = est.gain(i, l);
            corr += (rx.value(i, l) * h.conj()).re;
            power += h.norm_sqr();
        }
        *m = amp * corr - 0.5 * em * power;
    }
}

/// ML decision: index of the largest metric, ties broken toward the
/// lowest index (deterministic).
pub fn detect(metrics: &MetricVector) -> usize {
    let mut best = 0;
    for (i, &v) in metrics.values.iter().enumerate().skip(1) {
        if v > metrics.values[best] {
            best = i;
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::Pilots;
    use crate::fading::{estimate_channel, sample_channel};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn cfg(n_tx: usize, n_rx: usize, pilots: Pilots, snr_db: f64) -> SystemConfig {
        SystemConfig::new(n_tx, n_rx, pilots, 1.0, snr_db).unwrap()
    }

    #[test]
    fn encode_natural_binary() {
        assert_eq!(encode(&[false], 2).unwrap(), 0);
        assert_eq!(encode(&[true], 2).unwrap(), 1);
        assert_eq!(encode(&[true, true], 4).unwrap(), 3);
        assert!(encode(&[true], 4).is_err());
    }

    #[test]
    fn encode_decode_roundtrip_all_words() {
        for v in 0..16usize {
            let bits = decode(v, 16).unwrap();
            assert_eq!(bits.len(), 4);
            assert_eq!(encode(&bits, 16).unwrap(), v);
        }
        assert!(decode(16, 16).is_err());
    }

    #[test]
    fn observe_noiseless_is_exact() {
        let c = cfg(4, 2, Pilots::Perfect, f64::INFINITY);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let ch = sample_channel(&c, &mut rng);
        let rx = observe(2, &ch, &c, &mut rng);
        for i in 0..4 {
            for l in 0..2 {
                let expect = if i == 2 {
                    ch.gain(2, l)
                } else {
                    Complex64::ZERO
                };
                assert_eq!(rx.value(i, l), expect);
            }
        }
    }

    #[test]
    fn observe_noise_statistics() {
        // idle projections carry total variance 2*N0; active ones center
        // on sqrt(Em) * alpha
        let c = cfg(2, 1, Pilots::Perfect, 3.0);
        let n0 = c.noise_n0();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let ch = ChannelMatrix::from_gains(2, 1, vec![Complex64::new(0.9, -0.4), Complex64::ONE]);
        let n = 1_000_000usize;
        let mut idle_power = 0.0;
        let mut active_sum = Complex64::ZERO;
        for _ in 0..n {
            let rx = observe(0, &ch, &c, &mut rng);
            idle_power += rx.value(1, 0).norm_sqr();
            active_sum += rx.value(0, 0);
        }
        let measured = idle_power / n as f64;
        assert!(
            (measured - 2.0 * n0).abs() < 0.01 * 2.0 * n0,
            "idle variance {measured} vs {}",
            2.0 * n0
        );
        let mean = active_sum / n as f64;
        let se = (n0 / n as f64).sqrt(); // per-component sigma
        assert!((mean - ch.gain(0, 0)).re.abs() < 3.0 * se);
        assert!((mean - ch.gain(0, 0)).im.abs() < 3.0 * se);
    }

    #[test]
    fn metrics_signs_under_pcsi_noiseless() {
        let c = cfg(2, 2, Pilots::Perfect, f64::INFINITY);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let ch = sample_channel(&c, &mut rng);
        let est = estimate_channel(&ch, &c, &mut rng);
        let rx = observe(0, &ch, &c, &mut rng);
        let m = decision_metrics(&rx, &est, &c).unwrap();
        let p0: f64 = ch.row_power(0);
        let p1: f64 = ch.row_power(1);
        assert!((m.values()[0] - 0.5 * p0).abs() < 1e-12);
        assert!((m.values()[1] + 0.5 * p1).abs() < 1e-12);
        assert_eq!(detect(&m), 0);
    }

    #[test]
    fn all_zero_estimates_zero_all_metrics() {
        let c = cfg(2, 1, Pilots::Count(1), 10.0);
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let ch = sample_channel(&c, &mut rng);
        let zeros = ChannelMatrix::from_gains(2, 1, vec![Complex64::ZERO; 2]);
        let est = estimate_channel(&zeros, &cfg(2, 1, Pilots::Perfect, 10.0), &mut rng);
        let rx = observe(0, &ch, &c, &mut rng);
        let m = decision_metrics(&rx, &est, &c).unwrap();
        assert!(m.values().iter().all(|&v| v == 0.0));
        assert_eq!(detect(&m), 0); // tie-break picks the lowest index
    }

    #[test]
    fn detect_argmax_and_tiebreak() {
        assert_eq!(
            detect(&MetricVector {
                values: vec![0.3, -1.2]
            }),
            0
        );
        assert_eq!(
            detect(&MetricVector {
                values: vec![-2.0, 0.7, 0.1]
            }),
            1
        );
        assert_eq!(
            detect(&MetricVector {
                values: vec![0.5, 0.5]
            }),
            0
        );
    }

    #[test]
    fn detection_scale_invariance() {
        // scaling every estimate and projection by c > 0 scales both metric
        // terms by c^2 and leaves the argmax unchanged
        let c = cfg(4, 2, Pilots::Count(2), 8.0);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for trial in 0..200 {
            let ch = sample_channel(&c, &mut rng);
            let est = estimate_channel(&ch, &c, &mut rng);
            let rx = observe(trial % 4, &ch, &c, &mut rng);
            let base = detect(&decision_metrics(&rx, &est, &c).unwrap());
            for scale in [0.03, 7.5] {
                let rx2 = RxProjection {
                    n_tx: rx.n_tx,
                    n_rx: rx.n_rx,
                    values: rx.values.iter().map(|v| v * scale).collect(),
                };
                let est2 = scale_estimate(&est, scale);
                let m2 = decision_metrics(&rx2, &est2, &c).unwrap();
                assert_eq!(detect(&m2), base);
            }
        }
    }

    fn scale_estimate(est: &ChannelEstimate, s: f64) -> ChannelEstimate {
        let c = cfg(est.n_tx(), est.n_rx(), Pilots::Perfect, 10.0);
        let scaled = ChannelMatrix::from_gains(
            est.n_tx(),
            est.n_rx(),
            est.gains().iter().map(|g| g * s).collect(),
        );
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        estimate_channel(&scaled, &c, &mut rng)
    }

    #[test]
    fn error_free_at_high_snr_with_pcsi() {
        let c = cfg(2, 1, Pilots::Perfect, 60.0);
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let mut errors = 0u64;
        for trial in 0..1_000_000u64 {
            let ch = sample_channel(&c, &mut rng);
            let est = estimate_channel(&ch, &c, &mut rng);
            let sent = (trial % 2) as usize;
            let rx = observe(sent, &ch, &c, &mut rng);
            if detect(&decision_metrics(&rx, &est, &c).unwrap()) != sent {
                errors += 1;
            }
        }
        assert_eq!(errors, 0, "expected < 1e-6 error rate at 60 dB P-CSI");
    }

    #[test]
    fn vanishing_snr_gives_uniform_detection() {
        // symbol error rate approaches 1 - 1/Nt
        let c = cfg(4, 1, Pilots::Count(1), -400.0);
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let trials = 100_000u64;
        let mut errors = 0u64;
        for trial in 0..trials {
            let ch = sample_channel(&c, &mut rng);
            let est = estimate_channel(&ch, &c, &mut rng);
            let sent = (trial % 4) as usize;
            let rx = observe(sent, &ch, &c, &mut rng);
            if detect(&decision_metrics(&rx, &est, &c).unwrap()) != sent {
                errors += 1;
            }
        }
        let ser = errors as f64 / trials as f64;
        let expect = 0.75;
        let sigma = (expect * (1.0 - expect) / trials as f64).sqrt();
        assert!((ser - expect).abs() < 3.0 * sigma, "ser {ser}");
    }

    #[test]
    fn metric_sign_statistics_match_conditional_pep() {
        // fixed channel draw, noise and estimation error resampled per trial
        use crate::analytic::{pep_conditional, CfKernel};
        let c = cfg(2, 1, Pilots::Count(1), 10.0);
        let ch = ChannelMatrix::from_gains(
            2,
            1,
            vec![
                Complex64::new(1.3f64.sqrt(), 0.0),
                Complex64::new(0.0, 0.7f64.sqrt()),
            ],
        );
        let kernel = CfKernel::from_config(&c).unwrap();
        let pep = pep_conditional(&[1.3], &[0.7], &kernel).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let trials = 1_000_000u64;
        let mut wrong = 0u64;
        for _ in 0..trials {
            let est = estimate_channel(&ch, &c, &mut rng);
            let rx = observe(0, &ch, &c, &mut rng);
            let m = decision_metrics(&rx, &est, &c).unwrap();
            if m.values()[1] > m.values()[0] {
                wrong += 1;
            }
        }
        let measured = wrong as f64 / trials as f64;
        let sigma = (pep * (1.0 - pep) / trials as f64).sqrt();
        assert!(
            (measured - pep).abs() < 3.0 * sigma,
            "measured {measured} vs pep {pep}"
        );
    }
}
