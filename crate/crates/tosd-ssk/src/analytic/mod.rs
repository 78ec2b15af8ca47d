//! Closed-form error-probability engine.
//!
//! Conditioned on the fading gains, the difference of the two mismatched
//! decision metrics is a pair of independent quadratic forms in complex
//! Gaussian variables. Their characteristic functions are known in closed
//! form, so the pairwise error probability follows from Gil-Pelaez
//! inversion as a single real integral, and averaging over i.i.d. fading
//! reduces to per-link MGF factors inside the same integral. A union bound
//! over antenna pairs then gives the average bit error probability.

pub mod quad;

use crate::config::SystemConfig;
use crate::fading::{complex_gaussian, mgf_abs2, Fading, FadingError};
use num_complex::Complex64;
use rand::Rng;
use std::cell::Cell;
use std::f64::consts::{FRAC_PI_2, PI};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum AnalyticError {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error(transparent)]
    MgfDomain(#[from] FadingError),
    #[error("quadrature accuracy not reached: estimate {estimate} +/- {abs_error}")]
    Accuracy { estimate: f64, abs_error: f64 },
    #[error("probability estimate {0} is negative beyond roundoff tolerance")]
    NegativeProbability(f64),
    #[error("target {target} not bracketed by ABEP on [{lo_db}, {hi_db}] dB")]
    TargetNotBracketed { target: f64, lo_db: f64, hi_db: f64 },
}

impl From<quad::ToleranceNotMet> for AnalyticError {
    fn from(e: quad::ToleranceNotMet) -> Self {
        AnalyticError::Accuracy {
            estimate: e.estimate,
            abs_error: e.abs_error,
        }
    }
}

/// Pilot-dependent part of the characteristic-function kernel.
#[derive(Debug, Clone, Copy, PartialEq)]
enum PilotKernel {
    /// P-CSI limit: the rational prefactors collapse to 1.
    Perfect,
    /// Finite pilot energy: `v_a * v_b = Np * r_pm`, `v_a - v_b = 1`.
    Finite { v_a: f64, v_b: f64 },
}

/// Closed-form ingredients of the conditional decision-metric CFs.
///
/// For the hypothesis actually transmitted (`t1`) and a competing one
/// (`t2`), the per-link CF is `Upsilon(nu) * exp(Delta_t(nu) * |alpha|^2)`
/// with coefficients `g_{t,a}`, `g_{t,b}` proportional to the SNR.
#[derive(Debug, Clone, PartialEq)]
pub struct CfKernel {
    n_rx: usize,
    snr_linear: f64,
    g_t1_a: f64,
    g_t1_b: f64,
    g_t2_a: f64,
    g_t2_b: f64,
    pilot: PilotKernel,
}

impl CfKernel {
    /// Build the kernel from SNR and pilot setup. `np_rpm = None` is P-CSI.
    pub fn new(n_rx: usize, snr_linear: f64, np_rpm: Option<f64>) -> Result<Self, AnalyticError> {
        if n_rx < 1 {
            return Err(AnalyticError::InvalidParameter("n_rx must be >= 1".into()));
        }
        if snr_linear.is_nan() || snr_linear < 0.0 || snr_linear.is_infinite() {
            return Err(AnalyticError::InvalidParameter(format!(
                "snr_linear must be finite and non-negative, got {snr_linear}"
            )));
        }
        let g = 0.5 * snr_linear;
        let (pilot, g_t1_a) = match np_rpm {
            None => (PilotKernel::Perfect, g),
            Some(p) => {
                if p.is_nan() || p <= 0.0 || p.is_infinite() {
                    return Err(AnalyticError::InvalidParameter(format!(
                        "Np * r_pm must be positive and finite, got {p}"
                    )));
                }
                let root = (0.25 + p).sqrt();
                (
                    PilotKernel::Finite {
                        v_a: root + 0.5,
                        v_b: root - 0.5,
                    },
                    g * (1.0 + 1.0 / p),
                )
            }
        };
        Ok(CfKernel {
            n_rx,
            snr_linear,
            g_t1_a,
            g_t1_b: g,
            g_t2_a: g,
            g_t2_b: -g,
            pilot,
        })
    }

    pub fn from_config(cfg: &SystemConfig) -> Result<Self, AnalyticError> {
        Self::new(cfg.n_rx(), cfg.snr_linear(), cfg.np_rpm())
    }

    pub fn n_rx(&self) -> usize {
        self.n_rx
    }

    pub fn snr_linear(&self) -> f64 {
        self.snr_linear
    }

    /// `(v_a, v_b)` for a finite-pilot kernel, `None` under P-CSI.
    pub fn pilot_poles(&self) -> Option<(f64, f64)> {
        match self.pilot {
            PilotKernel::Perfect => None,
            PilotKernel::Finite { v_a, v_b } => Some((v_a, v_b)),
        }
    }

    pub fn g_t1_a(&self) -> f64 {
        self.g_t1_a
    }

    pub fn g_t1_b(&self) -> f64 {
        self.g_t1_b
    }

    pub fn g_t2_a(&self) -> f64 {
        self.g_t2_a
    }

    pub fn g_t2_b(&self) -> f64 {
        self.g_t2_b
    }

    /// `Np * r_pm` recovered from the pole pair (their product).
    pub fn np_rpm(&self) -> Option<f64> {
        self.pilot_poles().map(|(a, b)| a * b)
    }

    /// Channel-independent CF prefactor
    /// `Upsilon(nu) = (v_a v_b)^Nr / ((nu + j v_a)^Nr (nu - j v_b)^Nr)`.
    pub fn upsilon(&self, nu: f64) -> Complex64 {
        match self.pilot {
            PilotKernel::Perfect => Complex64::ONE,
            PilotKernel::Finite { v_a, v_b } => {
                let num = Complex64::new(v_a * v_b, 0.0);
                let den = Complex64::new(nu, v_a) * Complex64::new(nu, -v_b);
                powi_small(num / den, self.n_rx)
            }
        }
    }

    /// `Upsilon(nu) * Upsilon(-nu)`, which is real for real `nu`: the
    /// denominators pair into `(nu^2 + v_a^2)(nu^2 + v_b^2)`.
    pub fn upsilon_pair(&self, nu: f64) -> f64 {
        match self.pilot {
            PilotKernel::Perfect => 1.0,
            PilotKernel::Finite { v_a, v_b } => {
                let nu2 = nu * nu;
                let ratio = (v_a * v_b) * (v_a * v_b) / ((nu2 + v_a * v_a) * (nu2 + v_b * v_b));
                ratio.powi(self.n_rx as i32)
            }
        }
    }

    /// CF exponent coefficient
    /// `Delta(nu) = v_a v_b (-nu^2 g_a + j nu g_b) / ((nu + j v_a)(nu - j v_b))`
    /// (the rational factor is 1 under P-CSI).
    pub fn delta(&self, nu: f64, g_a: f64, g_b: f64) -> Complex64 {
        let num = Complex64::new(-nu * nu * g_a, nu * g_b);
        match self.pilot {
            PilotKernel::Perfect => num,
            PilotKernel::Finite { v_a, v_b } => {
                let den = Complex64::new(nu, v_a) * Complex64::new(nu, -v_b);
                num * (v_a * v_b) / den
            }
        }
    }

    pub fn delta_t1(&self, nu: f64) -> Complex64 {
        self.delta(nu, self.g_t1_a, self.g_t1_b)
    }

    pub fn delta_t2(&self, nu: f64) -> Complex64 {
        self.delta(nu, self.g_t2_a, self.g_t2_b)
    }

    /// Frequency scale of the Gil-Pelaez integrand: the CF decorrelates at
    /// `nu ~ 1/sqrt(1 + snr/2)`, so the tangent substitution is applied to
    /// `nu / nu_scale` to keep the integrand well spread over (0, pi/2).
    fn nu_scale(&self) -> f64 {
        1.0 / (1.0 + 0.5 * self.snr_linear).sqrt()
    }
}

fn powi_small(base: Complex64, n: usize) -> Complex64 {
    let mut acc = Complex64::ONE;
    for _ in 0..n {
        acc *= base;
    }
    acc
}

/// Gil-Pelaez probability `Pr{d < 0} = 1/2 - (1/pi) int_0^inf Im{Psi(nu)}/nu dnu`
/// evaluated through the tangent substitution. `psi_im(nu)` must return
/// `Im{Psi(nu)}` for the CF of the metric difference.
fn gil_pelaez<F: Fn(f64) -> f64>(
    psi_im: F,
    nu_scale: f64,
    settings: &quad::QuadSettings,
) -> Result<f64, AnalyticError> {
    let integrand = |xi: f64| {
        let t = xi.tan();
        if !t.is_finite() {
            return 0.0;
        }
        let nu = nu_scale * t;
        if nu.abs() < 1e-9 {
            // Im{Psi}/nu has a removable singularity at 0; Im{Psi} is odd,
            // so the symmetric difference quotient reduces to evaluation
            // at the cutoff. tan(xi)/(sin(xi) cos(xi)) = 1/cos^2(xi).
            let cos = xi.cos();
            return nu_scale * (psi_im(1e-9) / 1e-9) / (cos * cos);
        }
        psi_im(nu) / (xi.sin() * xi.cos())
    };
    let result = quad::integrate(integrand, 0.0, FRAC_PI_2, settings)?;
    let p = 0.5 - result.value / PI;
    if p < -1e-12 {
        return Err(AnalyticError::NegativeProbability(p));
    }
    Ok(p.clamp(0.0, 1.0))
}

/// Pairwise error probability conditioned on the fading, from the squared
/// envelopes of the two competing antennas' links (`|alpha|^2`, one entry
/// per receive antenna).
pub fn pep_conditional(
    ch_t1: &[f64],
    ch_t2: &[f64],
    kernel: &CfKernel,
) -> Result<f64, AnalyticError> {
    validate_channel(ch_t1, kernel.n_rx)?;
    validate_channel(ch_t2, kernel.n_rx)?;
    let s1: f64 = ch_t1.iter().sum();
    let s2: f64 = ch_t2.iter().sum();
    let psi_im = |nu: f64| {
        let expo = kernel.delta_t1(nu) * s1 + kernel.delta_t2(-nu) * s2;
        kernel.upsilon_pair(nu) * expo.exp().im
    };
    gil_pelaez(psi_im, kernel.nu_scale(), &quad::QuadSettings::default())
}

fn validate_channel(ch: &[f64], n_rx: usize) -> Result<(), AnalyticError> {
    if ch.len() != n_rx {
        return Err(AnalyticError::InvalidParameter(format!(
            "expected {n_rx} per-antenna channel powers, got {}",
            ch.len()
        )));
    }
    if ch.iter().any(|&x| x.is_nan() || x < 0.0 || x.is_infinite()) {
        return Err(AnalyticError::InvalidParameter(
            "channel powers must be finite and non-negative".into(),
        ));
    }
    Ok(())
}

/// Coefficients of the per-link decision-metric quadratic form
/// `d = A|X|^2 + B|Y|^2 + C X Y* + C* X* Y` (real, since `C` is real:
/// the cross terms collapse to `2C Re{X Y*}`).
pub const QF_COEFF_A: f64 = -0.5;
pub const QF_COEFF_B: f64 = 0.0;
pub const QF_COEFF_C: f64 = 0.5;

fn quad_form(x: Complex64, y: Complex64) -> f64 {
    QF_COEFF_A * x.norm_sqr() + QF_COEFF_B * y.norm_sqr() + 2.0 * QF_COEFF_C * (x * y.conj()).re
}

/// Brute-force sampling estimate of the same conditional PEP: draws the
/// normalized Gaussian pairs entering the metric difference and counts
/// negative outcomes. Independent of the CF/quadrature path, so it serves
/// as its oracle.
pub fn quadratic_form_oracle<R: Rng + ?Sized>(
    ch_t1: &[f64],
    ch_t2: &[f64],
    kernel: &CfKernel,
    trials: u64,
    rng: &mut R,
) -> f64 {
    assert_eq!(ch_t1.len(), kernel.n_rx);
    assert_eq!(ch_t2.len(), kernel.n_rx);
    let sqrt_snr = kernel.snr_linear.sqrt();
    // sqrt(snr) * eps has total variance 2 / (Np * r_pm); the normalized
    // noise projection has total variance 2.
    let est_var = kernel.np_rpm().map(|p| 2.0 / p);
    let mut negative = 0u64;
    for _ in 0..trials {
        let mut d = 0.0;
        for l in 0..kernel.n_rx {
            let m1 = sqrt_snr * ch_t1[l].sqrt();
            let m2 = sqrt_snr * ch_t2[l].sqrt();
            let (x1, x2) = match est_var {
                None => (Complex64::new(m1, 0.0), Complex64::new(m2, 0.0)),
                Some(v) => (
                    Complex64::new(m1, 0.0) + complex_gaussian(rng, v),
                    Complex64::new(m2, 0.0) + complex_gaussian(rng, v),
                ),
            };
            let y1 = Complex64::new(m1, 0.0) + complex_gaussian(rng, 2.0);
            let y2 = complex_gaussian(rng, 2.0);
            d += quad_form(x1, y1) - quad_form(x2, y2);
        }
        if d < 0.0 {
            negative += 1;
        }
    }
    negative as f64 / trials as f64
}

/// Pairwise error probability averaged over i.i.d. fading: the conditional
/// CF exponent is replaced by per-link MGF factors of the fading model.
pub fn apep_iid(kernel: &CfKernel, fading: Fading) -> Result<f64, AnalyticError> {
    let domain_violation: Cell<Option<f64>> = Cell::new(None);
    let nr = kernel.n_rx;
    let psi_im = |nu: f64| {
        let m1 = mgf_abs2(fading, kernel.delta_t1(nu));
        let m2 = mgf_abs2(fading, kernel.delta_t2(-nu));
        match (m1, m2) {
            (Ok(m1), Ok(m2)) => {
                (kernel.upsilon_pair(nu) * powi_small(m1, nr) * powi_small(m2, nr)).im
            }
            _ => {
                if domain_violation.get().is_none() {
                    domain_violation.set(Some(nu));
                }
                0.0
            }
        }
    };
    let p = gil_pelaez(psi_im, kernel.nu_scale(), &quad::QuadSettings::default());
    if let Some(nu) = domain_violation.get() {
        return Err(AnalyticError::MgfDomain(FadingError::MgfDomain(nu)));
    }
    p
}

/// Union-bound ABEP from a single pairwise APEP under i.i.d. symmetry:
/// `ABEP <= Nt/2 * APEP`, exact for `Nt = 2`.
pub fn abep_bound(n_tx: usize, apep: f64) -> f64 {
    0.5 * n_tx as f64 * apep
}

/// Analytic ABEP of TOSD-SSK for a full experiment point.
pub fn abep(cfg: &SystemConfig) -> Result<f64, AnalyticError> {
    let kernel = CfKernel::from_config(cfg)?;
    let apep = apep_iid(&kernel, cfg.fading())?;
    Ok(abep_bound(cfg.n_tx(), apep))
}

/// Search bracket for [`snr_for_abep`], in dB.
pub const SNR_BRACKET_DB: (f64, f64) = (-10.0, 60.0);

/// SNR (dB) at which the analytic ABEP reaches `target`, by bisection.
/// Stops when the ABEP is within 1% relative of the target or the bracket
/// shrinks below 0.01 dB. The configuration's own SNR field is ignored.
pub fn snr_for_abep(target: f64, cfg: &SystemConfig) -> Result<f64, AnalyticError> {
    if target.is_nan() || target <= 0.0 || target >= 0.5 {
        return Err(AnalyticError::InvalidParameter(format!(
            "target ABEP must lie in (0, 0.5), got {target}"
        )));
    }
    let (mut lo, mut hi) = SNR_BRACKET_DB;
    let at = |db: f64| abep(&cfg.with_snr_db(db));
    if at(lo)? < target || at(hi)? > target {
        return Err(AnalyticError::TargetNotBracketed {
            target,
            lo_db: lo,
            hi_db: hi,
        });
    }
    loop {
        let mid = 0.5 * (lo + hi);
        let value = at(mid)?;
        if (value - target).abs() < 0.01 * target || hi - lo < 0.01 {
            return Ok(mid);
        }
        if value > target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::Pilots;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn kernel(n_rx: usize, snr_db: f64, np_rpm: Option<f64>) -> CfKernel {
        CfKernel::new(n_rx, 10f64.powf(snr_db / 10.0), np_rpm).unwrap()
    }

    #[test]
    fn pole_pair_closed_forms() {
        // sqrt(1/4 + 2) = 1.5 and sqrt(1/4 + 6) = 2.5
        let k = kernel(1, 10.0, Some(2.0));
        let (va, vb) = k.pilot_poles().unwrap();
        assert!((va - 2.0).abs() < 1e-15 && (vb - 1.0).abs() < 1e-15);
        let k = kernel(1, 10.0, Some(6.0));
        let (va, vb) = k.pilot_poles().unwrap();
        assert!((va - 3.0).abs() < 1e-15 && (vb - 2.0).abs() < 1e-15);
    }

    #[test]
    fn kernel_g_coefficients() {
        let k = kernel(2, 10.0, Some(4.0));
        let g = 5.0; // snr/2
        assert!((k.g_t1_a() - g * 1.25).abs() < 1e-12);
        assert_eq!(k.g_t1_b(), g);
        assert_eq!(k.g_t2_a(), g);
        assert_eq!(k.g_t2_b(), -g);
    }

    #[test]
    fn upsilon_normalization_and_decay() {
        let k = kernel(2, 12.0, Some(3.7));
        assert!((k.upsilon(0.0) - Complex64::ONE).norm() < 1e-15);
        // |Upsilon| ~ nu^(-2 Nr) at large nu
        let nu = 1e6;
        let expect = (k.np_rpm().unwrap() / (nu * nu)).powi(2);
        assert!((k.upsilon(nu).norm() / expect - 1.0).abs() < 1e-3);
        assert_eq!(kernel(3, 12.0, None).upsilon(7.0), Complex64::ONE);
    }

    #[test]
    fn upsilon_pair_matches_complex_product() {
        // conjugate-pair factorization: Upsilon(nu) Upsilon(-nu) is real
        for nr in [1usize, 2, 4] {
            let k = kernel(nr, 8.0, Some(2.4));
            for nu in [0.0, 0.3, 1.0, 5.5, 120.0] {
                let prod = k.upsilon(nu) * k.upsilon(-nu);
                assert!(prod.im.abs() < 1e-14, "Im = {}", prod.im);
                assert!((prod.re - k.upsilon_pair(nu)).abs() < 1e-12 * prod.re.abs().max(1.0));
            }
        }
    }

    #[test]
    fn delta_limits() {
        let k = kernel(1, 10.0, Some(5.0));
        assert_eq!(k.delta_t1(0.0), Complex64::ZERO);
        // nu -> inf: Delta -> -v_a v_b g_a
        let lim = k.delta_t1(1e6);
        let expect = -k.np_rpm().unwrap() * k.g_t1_a();
        assert!((lim.re - expect).abs() / expect.abs() < 1e-6);
        assert!(lim.im.abs() / expect.abs() < 1e-5);
    }

    #[test]
    fn delta_large_np_approaches_pcsi_form() {
        let k = kernel(1, 10.0, Some(1e8));
        let g = 5.0;
        for nu in [0.1, 1.0, 3.0] {
            let d = k.delta_t1(nu);
            let pcsi = Complex64::new(-nu * nu * g, nu * g);
            assert!((d - pcsi).norm() / pcsi.norm() < 1e-6);
        }
    }

    #[test]
    fn pep_is_half_at_zero_snr() {
        let k = CfKernel::new(1, 0.0, Some(3.0)).unwrap();
        // Upsilon(nu)Upsilon(-nu) is real and all g vanish, so Im{Psi} = 0
        // identically and the probability is exactly 1/2.
        let p = pep_conditional(&[1.3], &[0.4], &k).unwrap();
        assert_eq!(p, 0.5);
    }

    #[test]
    fn pep_is_half_for_dead_channels() {
        let k = kernel(2, 14.0, Some(2.0));
        let p = pep_conditional(&[0.0, 0.0], &[0.0, 0.0], &k).unwrap();
        assert_eq!(p, 0.5);
    }

    #[test]
    fn pep_rejects_bad_channel_lists() {
        let k = kernel(2, 10.0, Some(1.0));
        assert!(pep_conditional(&[1.0], &[1.0, 1.0], &k).is_err());
        assert!(pep_conditional(&[1.0, -0.5], &[1.0, 1.0], &k).is_err());
    }

    #[test]
    fn pep_matches_quadratic_form_oracle_fixed_draw() {
        // Nt = 2, Nr = 1, |a_t1|^2 = 1.3, |a_t2|^2 = 0.7, Np = 1, snr = 10 dB
        let k = kernel(1, 10.0, Some(1.0));
        let p = pep_conditional(&[1.3], &[0.7], &k).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let trials = 2_000_000;
        let est = quadratic_form_oracle(&[1.3], &[0.7], &k, trials, &mut rng);
        let sigma = (est * (1.0 - est) / trials as f64).sqrt();
        assert!(
            (p - est).abs() < 3.0 * sigma,
            "pep {p} vs oracle {est} (3 sigma = {})",
            3.0 * sigma
        );
    }

    #[test]
    fn oracle_recovers_trivial_limits() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let zero_snr = CfKernel::new(1, 0.0, Some(2.0)).unwrap();
        let est = quadratic_form_oracle(&[1.0], &[1.0], &zero_snr, 100_000, &mut rng);
        assert!((est - 0.5).abs() < 3.0 * (0.25f64 / 100_000.0).sqrt());

        let strong = CfKernel::new(1, 1e6, None).unwrap();
        let est = quadratic_form_oracle(&[1.0], &[1.0], &strong, 50_000, &mut rng);
        assert_eq!(est, 0.0);
    }

    #[test]
    fn apep_half_at_vanishing_snr() {
        let k = CfKernel::new(2, 1e-30, Some(3.0)).unwrap();
        let p = apep_iid(&k, Fading::default()).unwrap();
        assert!((p - 0.5).abs() < 1e-9, "{p}");
    }

    #[test]
    fn apep_matches_table_entry_at_pcsi() {
        // Nt = 2 makes ABEP = APEP; the P-CSI threshold for 1e-4 is 25.3 dB
        let k = kernel(1, 25.3, None);
        let p = apep_iid(&k, Fading::default()).unwrap();
        assert!((p - 1e-4).abs() < 5e-6, "{p}");
    }

    #[test]
    fn apep_monotone_in_snr_and_pilots() {
        let grid = [0.0, 5.0, 10.0, 15.0, 20.0, 25.0, 30.0];
        let mut prev = f64::INFINITY;
        for db in grid {
            let p = apep_iid(&kernel(1, db, Some(1.0)), Fading::default()).unwrap();
            assert!(p <= prev);
            prev = p;
        }
        for db in grid {
            let p1 = apep_iid(&kernel(2, db, Some(1.0)), Fading::default()).unwrap();
            let p3 = apep_iid(&kernel(2, db, Some(3.0)), Fading::default()).unwrap();
            let p10 = apep_iid(&kernel(2, db, Some(10.0)), Fading::default()).unwrap();
            let pcsi = apep_iid(&kernel(2, db, None), Fading::default()).unwrap();
            assert!(p1 >= p3 && p3 >= p10 && p10 >= pcsi, "ordering at {db} dB");
        }
    }

    #[test]
    fn apep_large_np_converges_to_pcsi() {
        // convergence rate is ~2 Nr / (Np r_pm); at 1e8 pilots the gap is
        // far below the 1e-6 relative tolerance for both antenna counts
        for nr in [1usize, 2] {
            for db in [5.0, 15.0, 25.0] {
                let lim = apep_iid(&kernel(nr, db, Some(1e8)), Fading::default()).unwrap();
                let pcsi = apep_iid(&kernel(nr, db, None), Fading::default()).unwrap();
                assert!(
                    (lim - pcsi).abs() / pcsi < 1e-6,
                    "nr={nr} at {db} dB: {lim} vs {pcsi}"
                );
            }
        }
    }

    #[test]
    fn apep_stays_in_mgf_domain_even_for_tiny_pilot_energy() {
        // Re{Delta_t1(nu)} and Re{Delta_t2(-nu)} are non-positive for every
        // real nu, so the Rayleigh MGF seam is never left, including for
        // Np * r_pm < 1.
        let k = kernel(1, 20.0, Some(0.05));
        for nu in [0.05, 0.2, 0.5, 1.0, 3.0, 20.0] {
            assert!(k.delta_t1(nu).re <= 0.0);
            assert!(k.delta_t2(-nu).re <= 0.0);
        }
        let p = apep_iid(&k, Fading::default()).unwrap();
        assert!(p > 0.0 && p < 0.5);
    }

    #[test]
    fn local_slope_doubles_with_receive_antennas() {
        // log-log slope between 20 and 30 dB, Np = 10: close to 2 Nr
        for nr in [1usize, 2] {
            let cfg = SystemConfig::new(2, nr, Pilots::Count(10), 1.0, 0.0).unwrap();
            let a20 = abep(&cfg.with_snr_db(20.0)).unwrap();
            let a30 = abep(&cfg.with_snr_db(30.0)).unwrap();
            let slope = a20.log10() - a30.log10();
            let target = 2.0 * nr as f64;
            assert!(
                (slope - target).abs() / target < 0.15,
                "nr={nr}: slope {slope}"
            );
        }
    }

    #[test]
    fn abep_bound_arithmetic() {
        assert_eq!(abep_bound(2, 1e-3), 1e-3);
        assert_eq!(abep_bound(4, 1e-3), 2e-3);
        assert!((abep_bound(16, 1e-5) - 8e-5).abs() < 1e-19);
    }

    #[test]
    fn snr_solver_reproduces_table_entries() {
        let cfg = SystemConfig::new(2, 2, Pilots::Count(10), 1.0, 0.0).unwrap();
        let db = snr_for_abep(1e-4, &cfg).unwrap();
        assert!((db - 16.4).abs() < 0.3, "{db}");

        let cfg = SystemConfig::new(2, 1, Pilots::Count(1), 1.0, 0.0).unwrap();
        let db = snr_for_abep(1e-4, &cfg).unwrap();
        assert!((db - 27.1).abs() < 0.3, "{db}");
    }

    #[test]
    fn snr_solver_ordered_in_pilot_count() {
        let base = SystemConfig::new(2, 1, Pilots::Count(1), 1.0, 0.0).unwrap();
        let np1 = snr_for_abep(1e-4, &base).unwrap();
        let np3 = snr_for_abep(1e-4, &base.with_pilots(Pilots::Count(3))).unwrap();
        let np10 = snr_for_abep(1e-4, &base.with_pilots(Pilots::Count(10))).unwrap();
        assert!(np1 > np3 && np3 > np10);
    }

    #[test]
    fn snr_solver_rejects_unreachable_targets() {
        let cfg = SystemConfig::new(2, 1, Pilots::Perfect, 1.0, 0.0).unwrap();
        assert!(matches!(
            snr_for_abep(0.7, &cfg),
            Err(AnalyticError::InvalidParameter(_))
        ));
        // 1e-13 is below the ABEP at the upper bracket edge
        assert!(matches!(
            snr_for_abep(1e-13, &cfg),
            Err(AnalyticError::TargetNotBracketed { .. })
        ));
    }

    #[test]
    fn oracle_self_consistency_small_sweep() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for case in 0..5u64 {
            let nr = 1 + (case % 2) as usize;
            let np_rpm = [1.0, 2.5, 7.0][case as usize % 3];
            let snr_db = 4.0 + 2.0 * case as f64;
            let k = kernel(nr, snr_db, Some(np_rpm));
            let ch1: Vec<f64> = (0..nr)
                .map(|_| 0.2 + 0.9 * (case + 1) as f64 / 5.0)
                .collect();
            let ch2: Vec<f64> = (0..nr).map(|_| 1.4 - 0.2 * case as f64).collect();
            let p = pep_conditional(&ch1, &ch2, &k).unwrap();
            let trials = 200_000;
            let est = quadratic_form_oracle(&ch1, &ch2, &k, trials, &mut rng);
            let sigma = (est.max(1e-6) * (1.0 - est) / trials as f64).sqrt();
            assert!(
                (p - est).abs() < 3.5 * sigma,
                "case {case}: pep {p} vs oracle {est}"
            );
        }
    }
}
