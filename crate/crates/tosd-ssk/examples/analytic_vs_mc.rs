//! Cross-validate the two independent routes to the same number: the
//! Gil-Pelaez closed form against seeded Monte Carlo with a Wilson
//! confidence interval.
//!
//! ```bash
//! cargo run --release --example analytic_vs_mc
//! ```

use tosd_ssk::montecarlo::{sweep, StoppingRule};
use tosd_ssk::{analytic, Pilots, Scheme, SystemConfig};

fn main() {
    let cfg = SystemConfig::new(2, 2, Pilots::Count(3), 1.0, 0.0).expect("valid configuration");
    let snrs = [4.0, 8.0, 12.0, 16.0];
    let rule = StoppingRule {
        min_errors: 500,
        max_trials: 50_000_000,
    };

    println!("TOSD-SSK, Nt = 2, Nr = 2, Np = 3 (union bound exact at Nt = 2)");
    println!(
        "{:>8}  {:>12}  {:>12}  {:>26}  {:>9}",
        "Em/N0", "analytic", "simulated", "95% CI", "in CI?"
    );
    for point in sweep(&cfg, Scheme::TosdSsk, &snrs, &rule, 2024) {
        let analytic = point.abep_analytic.expect("attached for TOSD-SSK");
        let inside = point.ci_low <= analytic && analytic <= point.ci_high;
        println!(
            "{:>6.1} dB  {:>12.4e}  {:>12.4e}  [{:>11.4e}, {:>10.4e}]  {:>9}",
            point.snr_db,
            analytic,
            point.abep_mc,
            point.ci_low,
            point.ci_high,
            if inside { "yes" } else { "NO" }
        );
    }

    // The conditional PEP has its own independent check: a brute-force
    // sampler of the underlying quadratic form.
    let kernel = analytic::CfKernel::from_config(&cfg.with_snr_db(10.0)).unwrap();
    let pep = analytic::pep_conditional(&[1.1, 0.4], &[0.6, 0.9], &kernel).unwrap();
    let mut rng = <rand_chacha::ChaCha8Rng as rand::SeedableRng>::seed_from_u64(7);
    let oracle =
        analytic::quadratic_form_oracle(&[1.1, 0.4], &[0.6, 0.9], &kernel, 500_000, &mut rng);
    println!(
        "\nconditional PEP at a fixed channel draw: closed form {pep:.6}, sampler {oracle:.6}"
    );
}
