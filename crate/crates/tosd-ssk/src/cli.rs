//! Command-line front end: configuration parsing, sweep orchestration and
//! CSV persistence.
//!
//! Commands: `analytic`, `simulate`, `compare`, `table1`, `pulses-check`.
//! All data commands emit one fixed CSV schema ('.' decimal, LF endings):
//!
//! ```text
//! snr_db,scheme,rate_bits,nr,np,abep_analytic,abep_mc,ci_low,ci_high,trials,bit_errors,seed
//! ```
//!
//! Output is deterministic for a fixed configuration and seed, regardless
//! of the worker count (set `RAYON_NUM_THREADS` to override parallelism).
//! Exit codes: 0 success, 1 usage error, 2 numeric/accuracy failure.

use crate::analytic;
use crate::config::{Pilots, Scheme, SystemConfig, DEFAULT_PILOT_RATIO};
use crate::montecarlo::{self, derive_seed, StoppingRule, ThresholdSearch};
use crate::waveform::PulseSet;
use clap::{Args, Parser, Subcommand};
use serde::Deserialize;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

/// Gram-matrix identity tolerance certified by `pulses-check`.
pub const GRAM_TOLERANCE: f64 = 1e-8;

const CSV_HEADER: &str =
    "snr_db,scheme,rate_bits,nr,np,abep_analytic,abep_mc,ci_low,ci_high,trials,bit_errors,seed";

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    /// Malformed invocation or configuration (exit code 1).
    #[error("{0}")]
    Usage(String),
    /// Engine-level numeric or accuracy failure (exit code 2).
    #[error("{0}")]
    Numeric(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Numeric(_) => 2,
        }
    }
}

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

#[derive(Debug, Parser)]
#[command(
    name = "tosd-ssk",
    about = "Analytic and Monte Carlo BER engine for TOSD-SSK modulation \
             with pilot-based channel estimation",
    version
)]
pub struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Closed-form TOSD-SSK ABEP over an SNR grid (no simulation)
    Analytic(RunArgs),
    /// Monte Carlo BER over an SNR grid
    Simulate(RunArgs),
    /// Analytic curves and Monte Carlo markers side by side
    Compare(RunArgs),
    /// SNR thresholds reaching a target ABEP, in the reference table layout
    Table1(Table1Args),
    /// Certify the orthonormality of the Hermite pulse set
    PulsesCheck(PulsesArgs),
}

#[derive(Debug, Args, Default, Clone)]
struct CommonArgs {
    /// TOML configuration file; command-line flags override its keys
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output CSV path (stdout when omitted)
    #[arg(long)]
    out: Option<PathBuf>,
    /// Base seed for all random streams
    #[arg(long)]
    seed: Option<u64>,
    /// Spectral efficiency in bits/s/Hz (Nt = M = 2^rate)
    #[arg(long, value_parser = clap::value_parser!(u32).range(1..=4))]
    rate: Option<u32>,
    /// Transmit antenna count for TOSD-SSK (power of two); overrides --rate
    #[arg(long)]
    nt: Option<usize>,
    /// Receive antenna counts, comma separated (e.g. "1,2")
    #[arg(long, value_delimiter = ',')]
    nr: Option<Vec<usize>>,
    /// Pilot counts, comma separated; "pcsi" marks perfect knowledge
    #[arg(long, value_delimiter = ',')]
    np: Option<Vec<String>>,
    /// Add the perfect-CSI case to the pilot list
    #[arg(long)]
    pcsi: bool,
    /// Pilot-to-data energy ratio r_pm = Ep/Em
    #[arg(long)]
    pilot_ratio: Option<f64>,
}

#[derive(Debug, Args)]
struct RunArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Scheme: tosd_ssk, alamouti or both
    #[arg(long)]
    scheme: Option<String>,
    /// SNR grid start (dB)
    #[arg(long)]
    snr_start: Option<f64>,
    /// SNR grid stop, inclusive (dB)
    #[arg(long)]
    snr_stop: Option<f64>,
    /// SNR grid step (dB, > 0)
    #[arg(long)]
    snr_step: Option<f64>,
    /// Stop a point once this many bit errors are seen
    #[arg(long)]
    min_errors: Option<u64>,
    /// Hard cap on trials per point
    #[arg(long)]
    max_trials: Option<u64>,
}

#[derive(Debug, Args)]
struct Table1Args {
    #[command(flatten)]
    common: CommonArgs,
    /// Scheme: tosd_ssk, alamouti or both
    #[arg(long)]
    scheme: Option<String>,
    /// Rates to include (default 1,2,3,4)
    #[arg(long, value_delimiter = ',', value_parser = clap::value_parser!(u32).range(1..=4))]
    rates: Option<Vec<u32>>,
    /// Target ABEP for the threshold search (default 1e-4)
    #[arg(long)]
    target: Option<f64>,
    /// Errors per Monte Carlo threshold evaluation near convergence
    /// (default 600)
    #[arg(long)]
    min_errors: Option<u64>,
}

#[derive(Debug, Args)]
struct PulsesArgs {
    /// Number of pulses / transmit antennas (orders 0..nt-1)
    #[arg(long, default_value_t = 16)]
    nt: usize,
    /// Pulse window length Tm (seconds)
    #[arg(long, default_value_t = 1.0)]
    duration: f64,
    /// Override the total sample count per pulse (grid-sensitivity check)
    #[arg(long)]
    samples: Option<usize>,
}

/// Scheme selection for data commands.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SchemeSel {
    One(Scheme),
    Both,
}

impl SchemeSel {
    fn schemes(self) -> Vec<Scheme> {
        match self {
            SchemeSel::One(s) => vec![s],
            SchemeSel::Both => vec![Scheme::TosdSsk, Scheme::Alamouti],
        }
    }
}

/// Fully resolved invocation: defaults, then config file, then flags.
#[derive(Debug, Clone)]
pub struct RunSpec {
    pub scheme: SchemeSel,
    pub n_tx: usize,
    pub nr_list: Vec<usize>,
    pub np_list: Vec<Pilots>,
    pub pilot_ratio: f64,
    pub snr_grid: Vec<f64>,
    pub seed: u64,
    pub out: Option<PathBuf>,
    pub rule: StoppingRule,
}

/// Key-value document accepted by `--config` (TOML; unknown keys rejected).
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    scheme: Option<String>,
    nt: Option<usize>,
    rate: Option<u32>,
    nr: Option<OneOrMany<usize>>,
    np: Option<OneOrMany<NpValue>>,
    pcsi: Option<bool>,
    pilot_ratio: Option<f64>,
    snr_start: Option<f64>,
    snr_stop: Option<f64>,
    snr_step: Option<f64>,
    seed: Option<u64>,
    out: Option<PathBuf>,
    min_errors: Option<u64>,
    max_trials: Option<u64>,
    target: Option<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(untagged)]
enum OneOrMany<T> {
    One(T),
    Many(Vec<T>),
}

impl<T: Clone> OneOrMany<T> {
    fn to_vec(&self) -> Vec<T> {
        match self {
            OneOrMany::One(v) => vec![v.clone()],
            OneOrMany::Many(v) => v.clone(),
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
enum NpValue {
    Count(i64),
    Tag(String),
}

/// Parse a `--config` document. Unknown keys and malformed values are
/// usage errors.
pub fn parse_config(text: &str) -> Result<ConfigFile, CliError> {
    toml::from_str(text).map_err(|e| usage(format!("config error: {e}")))
}

fn load_config(path: Option<&Path>) -> Result<ConfigFile, CliError> {
    match path {
        None => Ok(ConfigFile::default()),
        Some(p) => {
            let text = std::fs::read_to_string(p)
                .map_err(|e| usage(format!("cannot read config {}: {e}", p.display())))?;
            parse_config(&text)
        }
    }
}

fn parse_np_value(v: &NpValue) -> Result<Pilots, CliError> {
    match v {
        NpValue::Count(n) if *n >= 1 && *n <= i64::from(u32::MAX) => Ok(Pilots::Count(*n as u32)),
        NpValue::Count(n) => Err(usage(format!(
            "np must be a positive pilot count or \"pcsi\", got {n}"
        ))),
        NpValue::Tag(s) => s.parse::<Pilots>().map_err(|e| usage(e.to_string())),
    }
}

fn resolve_n_tx(
    nt_flag: Option<usize>,
    rate_flag: Option<u32>,
    file: &ConfigFile,
) -> Result<usize, CliError> {
    let n_tx = if let Some(nt) = nt_flag {
        nt
    } else if let Some(rate) = rate_flag {
        1usize << rate
    } else if let Some(nt) = file.nt {
        nt
    } else if let Some(rate) = file.rate {
        if !(1..=4).contains(&rate) {
            return Err(usage(format!("rate must be 1..=4, got {rate}")));
        }
        1usize << rate
    } else {
        2
    };
    if n_tx < 2 || !n_tx.is_power_of_two() {
        return Err(usage(format!("Nt must be a power of two >= 2, got {n_tx}")));
    }
    if n_tx > 64 {
        return Err(usage(format!(
            "Nt capped at 64 (pulse-set order cap), got {n_tx}"
        )));
    }
    Ok(n_tx)
}

fn resolve_common(args: &CommonArgs, file: &ConfigFile) -> Result<RunSpec, CliError> {
    let n_tx = resolve_n_tx(args.nt, args.rate, file)?;

    let nr_list = args
        .nr
        .clone()
        .or_else(|| file.nr.as_ref().map(|v| v.to_vec()))
        .unwrap_or_else(|| vec![1]);
    if nr_list.is_empty() || nr_list.iter().any(|&n| n < 1) {
        return Err(usage("nr list must be non-empty with entries >= 1"));
    }

    let mut np_list: Vec<Pilots> = match (&args.np, &file.np) {
        (Some(flags), _) => flags
            .iter()
            .map(|s| s.parse::<Pilots>().map_err(|e| usage(e.to_string())))
            .collect::<Result<_, _>>()?,
        (None, Some(vals)) => vals
            .to_vec()
            .iter()
            .map(parse_np_value)
            .collect::<Result<_, _>>()?,
        (None, None) => vec![Pilots::Count(1), Pilots::Count(3), Pilots::Count(10)],
    };
    let want_pcsi =
        args.pcsi || file.pcsi.unwrap_or(false) || (args.np.is_none() && file.np.is_none());
    if want_pcsi && !np_list.contains(&Pilots::Perfect) {
        np_list.push(Pilots::Perfect);
    }
    if np_list.is_empty() {
        return Err(usage("np list must not be empty"));
    }

    let pilot_ratio = args
        .pilot_ratio
        .or(file.pilot_ratio)
        .unwrap_or(DEFAULT_PILOT_RATIO);
    if pilot_ratio.is_nan() || pilot_ratio <= 0.0 || pilot_ratio.is_infinite() {
        return Err(usage(format!(
            "pilot_ratio must be positive, got {pilot_ratio}"
        )));
    }

    Ok(RunSpec {
        scheme: SchemeSel::One(Scheme::TosdSsk),
        n_tx,
        nr_list,
        np_list,
        pilot_ratio,
        snr_grid: Vec::new(),
        seed: args.seed.or(file.seed).unwrap_or(1234),
        out: args.out.clone().or_else(|| file.out.clone()),
        rule: StoppingRule::default(),
    })
}

/// `None` when neither a flag nor the config file named a scheme; the
/// command decides its own default in that case.
fn resolve_scheme(flag: &Option<String>, file: &ConfigFile) -> Result<Option<SchemeSel>, CliError> {
    let text = flag.clone().or_else(|| file.scheme.clone());
    match text.as_deref() {
        None => Ok(None),
        Some(s) if s.eq_ignore_ascii_case("both") => Ok(Some(SchemeSel::Both)),
        Some(s) => Ok(Some(SchemeSel::One(
            s.parse::<Scheme>().map_err(|e| usage(e.to_string()))?,
        ))),
    }
}

fn resolve_grid(args: &RunArgs, file: &ConfigFile) -> Result<Vec<f64>, CliError> {
    let start = args.snr_start.or(file.snr_start).unwrap_or(0.0);
    let stop = args.snr_stop.or(file.snr_stop).unwrap_or(30.0);
    let step = args.snr_step.or(file.snr_step).unwrap_or(5.0);
    if step.is_nan() || step <= 0.0 || step.is_infinite() {
        return Err(usage(format!("snr-step must be > 0, got {step}")));
    }
    if stop < start {
        return Err(usage(format!(
            "empty SNR grid: start {start} > stop {stop}"
        )));
    }
    let mut grid = Vec::new();
    let mut k = 0u32;
    loop {
        // keep grid values free of accumulated rounding dust
        let v = ((start + f64::from(k) * step) * 1e9).round() / 1e9;
        if v > stop + 1e-9 {
            break;
        }
        grid.push(v);
        k += 1;
    }
    if grid.is_empty() {
        return Err(usage("empty SNR grid"));
    }
    Ok(grid)
}

fn resolve_run(args: &RunArgs, default_scheme: SchemeSel) -> Result<RunSpec, CliError> {
    let file = load_config(args.common.config.as_deref())?;
    let mut spec = resolve_common(&args.common, &file)?;
    spec.scheme = resolve_scheme(&args.scheme, &file)?.unwrap_or(default_scheme);
    spec.snr_grid = resolve_grid(args, &file)?;
    spec.rule = StoppingRule {
        min_errors: args.min_errors.or(file.min_errors).unwrap_or(200),
        max_trials: args.max_trials.or(file.max_trials).unwrap_or(100_000_000),
    };
    if spec.rule.min_errors < 1 {
        return Err(usage("min-errors must be >= 1"));
    }
    Ok(spec)
}

/// One output row; optional fields print as empty cells.
struct CsvRow {
    snr_db: f64,
    scheme: Scheme,
    rate_bits: u32,
    nr: usize,
    np: Pilots,
    abep_analytic: Option<f64>,
    mc: Option<(f64, f64, f64, u64, u64, u64)>, // abep, lo, hi, trials, errors, seed
}

fn push_row(out: &mut String, row: &CsvRow) {
    let _ = write!(
        out,
        "{:.2},{},{},{},{}",
        row.snr_db,
        row.scheme.label(),
        row.rate_bits,
        row.nr,
        row.np.label()
    );
    match row.abep_analytic {
        Some(v) => {
            let _ = write!(out, ",{v:.6e}");
        }
        None => out.push(','),
    }
    match row.mc {
        Some((abep, lo, hi, trials, errors, seed)) => {
            let _ = write!(
                out,
                ",{abep:.6e},{lo:.6e},{hi:.6e},{trials},{errors},{seed}"
            );
        }
        None => out.push_str(",,,,,,"),
    }
    out.push('\n');
}

fn emit(out_path: Option<&Path>, content: &str) -> Result<(), CliError> {
    match out_path {
        None => {
            print!("{content}");
            Ok(())
        }
        Some(p) => std::fs::write(p, content)
            .map_err(|e| usage(format!("cannot write {}: {e}", p.display()))),
    }
}

fn build_config(
    spec: &RunSpec,
    nr: usize,
    np: Pilots,
    snr_db: f64,
) -> Result<SystemConfig, CliError> {
    SystemConfig::new(spec.n_tx, nr, np, spec.pilot_ratio, snr_db).map_err(|e| usage(e.to_string()))
}

/// Shared engine for `analytic`, `simulate` and `compare`.
fn run_curves(spec: &RunSpec, with_mc: bool, require_analytic: bool) -> Result<String, CliError> {
    let mut csv = String::from(CSV_HEADER);
    csv.push('\n');
    let mut curve_index = 0u64;
    for scheme in spec.scheme.schemes() {
        if scheme == Scheme::Alamouti && spec.n_tx > 16 {
            return Err(usage("Alamouti baseline supports rates 1..4 (M <= 16)"));
        }
        for &nr in &spec.nr_list {
            for &np in &spec.np_list {
                let cfg = build_config(spec, nr, np, spec.snr_grid[0])?;
                let rate_bits = cfg.rate_bits();
                if with_mc {
                    let base = derive_seed(spec.seed, curve_index, 100);
                    let points = montecarlo::sweep(&cfg, scheme, &spec.snr_grid, &spec.rule, base);
                    for p in points {
                        if require_analytic
                            && scheme == Scheme::TosdSsk
                            && p.abep_analytic.is_none()
                        {
                            return Err(CliError::Numeric(format!(
                                "analytic ABEP failed at {} dB (nr={nr}, np={})",
                                p.snr_db,
                                np.label()
                            )));
                        }
                        push_row(
                            &mut csv,
                            &CsvRow {
                                snr_db: p.snr_db,
                                scheme,
                                rate_bits,
                                nr,
                                np,
                                abep_analytic: p.abep_analytic,
                                mc: Some((
                                    p.abep_mc,
                                    p.ci_low,
                                    p.ci_high,
                                    p.trials,
                                    p.bit_errors,
                                    p.seed,
                                )),
                            },
                        );
                    }
                } else {
                    for &db in &spec.snr_grid {
                        let point_cfg = cfg.with_snr_db(db);
                        let abep = analytic::abep(&point_cfg)
                            .map_err(|e| CliError::Numeric(e.to_string()))?;
                        push_row(
                            &mut csv,
                            &CsvRow {
                                snr_db: db,
                                scheme,
                                rate_bits,
                                nr,
                                np,
                                abep_analytic: Some(abep),
                                mc: None,
                            },
                        );
                    }
                }
                curve_index += 1;
            }
        }
    }
    Ok(csv)
}

fn cmd_analytic(args: &RunArgs) -> Result<(), CliError> {
    let spec = resolve_run(args, SchemeSel::One(Scheme::TosdSsk))?;
    if spec.scheme != SchemeSel::One(Scheme::TosdSsk) {
        return Err(usage(
            "the analytic engine covers TOSD-SSK only (no closed form for \
             Alamouti under estimation errors); use `simulate`",
        ));
    }
    let csv = run_curves(&spec, false, true)?;
    emit(spec.out.as_deref(), &csv)
}

fn cmd_simulate(args: &RunArgs) -> Result<(), CliError> {
    let spec = resolve_run(args, SchemeSel::One(Scheme::TosdSsk))?;
    let csv = run_curves(&spec, true, false)?;
    emit(spec.out.as_deref(), &csv)
}

fn cmd_compare(args: &RunArgs) -> Result<(), CliError> {
    let spec = resolve_run(args, SchemeSel::Both)?;
    let csv = run_curves(&spec, true, true)?;
    emit(spec.out.as_deref(), &csv)
}

fn cmd_table1(args: &Table1Args) -> Result<(), CliError> {
    let file = load_config(args.common.config.as_deref())?;
    let mut spec = resolve_common(&args.common, &file)?;
    spec.scheme = resolve_scheme(&args.scheme, &file)?.unwrap_or(SchemeSel::Both);
    let target = args.target.or(file.target).unwrap_or(1e-4);
    if target.is_nan() || target <= 0.0 || target >= 0.5 {
        return Err(usage(format!("target must lie in (0, 0.5), got {target}")));
    }
    let min_errors = args.min_errors.or(file.min_errors).unwrap_or(600);
    let rates: Vec<u32> = args.rates.clone().unwrap_or_else(|| vec![1, 2, 3, 4]);
    let nr_list = if args.common.nr.is_none() && file.nr.is_none() {
        vec![1, 2]
    } else {
        spec.nr_list.clone()
    };

    let mut csv = String::from("scheme,rate_bits,nr");
    for np in &spec.np_list {
        let _ = write!(csv, ",snr_db_np_{}", np.label());
    }
    csv.push('\n');

    let mut any_failed = false;
    let mut cell = 0u64;
    for scheme in spec.scheme.schemes() {
        for &rate in &rates {
            for &nr in &nr_list {
                let _ = write!(csv, "{},{rate},{nr}", scheme.label());
                for &np in &spec.np_list {
                    let cfg = SystemConfig::new(1usize << rate, nr, np, spec.pilot_ratio, 0.0)
                        .map_err(|e| usage(e.to_string()))?;
                    let value = match scheme {
                        Scheme::TosdSsk => {
                            analytic::snr_for_abep(target, &cfg).map_err(|e| e.to_string())
                        }
                        Scheme::Alamouti => {
                            let search = ThresholdSearch {
                                target,
                                min_errors,
                                ..ThresholdSearch::default()
                            };
                            montecarlo::snr_for_target_ber(
                                &cfg,
                                Scheme::Alamouti,
                                &search,
                                derive_seed(spec.seed, cell, 200),
                            )
                            .map_err(|e| e.to_string())
                        }
                    };
                    cell += 1;
                    match value {
                        Ok(db) => {
                            let _ = write!(csv, ",{db:.2}");
                        }
                        Err(e) => {
                            any_failed = true;
                            eprintln!(
                                "table1 cell failed ({} rate={rate} nr={nr} np={}): {e}",
                                scheme.label(),
                                np.label()
                            );
                            csv.push_str(",err");
                        }
                    }
                }
                csv.push('\n');
            }
        }
    }
    emit(spec.out.as_deref(), &csv)?;
    if any_failed {
        return Err(CliError::Numeric("one or more table cells failed".into()));
    }
    Ok(())
}

fn cmd_pulses_check(args: &PulsesArgs) -> Result<(), CliError> {
    if args.nt < 1 || args.nt > 64 {
        return Err(usage(format!("nt must lie in 1..=64, got {}", args.nt)));
    }
    let set = match args.samples {
        None => PulseSet::hermite(args.nt, args.duration),
        Some(s) => PulseSet::with_sampling(args.nt, args.duration, s),
    }
    .map_err(|e| usage(e.to_string()))?;
    let deviation = set
        .max_gram_deviation()
        .map_err(|e| CliError::Numeric(format!("accuracy failure: {e}")))?;
    let pass = deviation < GRAM_TOLERANCE;
    println!(
        "pulses: {}  samples/pulse: {}  max |Gram - I|: {deviation:.3e}  {}",
        set.n_pulses(),
        set.samples_per_pulse(),
        if pass { "PASS" } else { "FAIL" }
    );
    if pass {
        Ok(())
    } else {
        Err(CliError::Numeric(format!(
            "Gram deviation {deviation:.3e} exceeds {GRAM_TOLERANCE:e}"
        )))
    }
}

/// Entry point used by the binary; returns the process exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = e.print();
            return code;
        }
    };
    let result = match &cli.command {
        Command::Analytic(a) => cmd_analytic(a),
        Command::Simulate(a) => cmd_simulate(a),
        Command::Compare(a) => cmd_compare(a),
        Command::Table1(a) => cmd_table1(a),
        Command::PulsesCheck(a) => cmd_pulses_check(a),
    };
    match result {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
