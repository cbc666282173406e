//! Command-line front end.
//!
//! Settings are layered: built-in defaults, then `--config FILE`, then
//! flags. Every file written starts with a manifest block that, passed back
//! through `--config`, reproduces the file.

mod output;
mod settings;

use std::ffi::OsString;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand};

use crate::density::{kappa, SnnParam};
use crate::error::{Error, Result};
use crate::sweep::{self, CdfEvent, SweepEvent, Target};
use crate::{diagnostics, fbl, harq};

pub use output::{CSV_HEADER, MANIFEST_MARKER};
pub use settings::{load_config, parse_f64_list, Settings, KEYS};

/// Environment variable holding the worker thread count.
pub const WORKERS_ENV: &str = "SHORTPACKET_WORKERS";

pub const EXIT_OK: i32 = 0;
pub const EXIT_ERROR: i32 = 1;
pub const EXIT_INFEASIBLE: i32 = 2;
pub const EXIT_DIAGNOSTIC_FAILED: i32 = 3;

#[derive(Parser, Debug)]
#[command(name = "shortpacket", version, about = "Finite-blocklength bounds for short packets over block-fading channels")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Minimum slot count of fixed-blocklength transmission
    Fbl(PointArgs),
    /// Stopping threshold and latency distribution of HARQ
    Harq(HarqArgs),
    /// Energy, rate or latency CDF curves
    Sweep(SweepArgs),
    /// Tilted moment function of the information density over a tilt grid
    Kappa(KappaArgs),
    /// Run the self-check suite
    Validate(PointArgs),
}

#[derive(Args, Debug, Default)]
struct SharedArgs {
    /// Configuration file (`key = value` lines, or a manifest from an earlier run)
    #[arg(long)]
    config: Option<PathBuf>,
    /// Subcarriers per block
    #[arg(long)]
    u: Option<usize>,
    /// OFDM symbols per block
    #[arg(long)]
    d: Option<usize>,
    /// Pilot symbols per block; fixes the pilot grid unless --n-p-grid is given
    #[arg(long = "n-p")]
    n_p: Option<usize>,
    /// Decoder scale; fixes the scale grid
    #[arg(long)]
    s: Option<f64>,
    /// Available diversity branches
    #[arg(long = "Lc")]
    l_c: Option<usize>,
    /// OFDM symbol duration in seconds
    #[arg(long = "To")]
    t_o: Option<f64>,
    /// Target error probability
    #[arg(long)]
    eps: Option<f64>,
    /// Monte Carlo trials per evaluation [default: 200000]
    #[arg(long)]
    trials: Option<usize>,
    /// Random seed [default: 0]
    #[arg(long)]
    seed: Option<u64>,
    /// Trials used while searching over (s, n_p)
    #[arg(long = "search-trials")]
    search_trials: Option<usize>,
    /// Decoder scale grid, e.g. `0.1:0.1:3`
    #[arg(long = "s-grid", allow_hyphen_values = true)]
    s_grid: Option<String>,
    /// Pilot grid, e.g. `1,2,4,8,16`
    #[arg(long = "n-p-grid")]
    n_p_grid: Option<String>,
    /// Output file; standard output when absent
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug, Default)]
struct PointArgs {
    /// SNR in dB
    #[arg(long = "snr-db", allow_negative_numbers = true)]
    snr_db: Option<f64>,
    /// Diversity branches per round
    #[arg(long = "L")]
    l: Option<usize>,
    /// Information bits
    #[arg(long)]
    k: Option<u32>,
    #[command(flatten)]
    shared: SharedArgs,
}

#[derive(Args, Debug)]
struct HarqArgs {
    #[command(flatten)]
    point: PointArgs,
    /// Latency CDF file; printed after the summary when absent
    #[arg(long = "cdf-out")]
    cdf_out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct KappaArgs {
    #[command(flatten)]
    point: PointArgs,
    /// Tilt grid [default: 0:0.1:2]
    #[arg(long, allow_hyphen_values = true)]
    beta: Option<String>,
}

#[derive(Args, Debug)]
struct SweepArgs {
    /// energy, rate or cdf
    #[arg(long)]
    target: Option<String>,
    /// Comma-separated subset of fbl,harq
    #[arg(long)]
    schemes: Option<String>,
    /// SNR grid in dB, e.g. `-10:0.5:10`
    #[arg(long = "snr-db", allow_hyphen_values = true)]
    snr_db: Option<String>,
    /// Diversity orders, e.g. `2,3,5,6`
    #[arg(long = "L")]
    l: Option<String>,
    /// Message sizes in bits
    #[arg(long)]
    k: Option<String>,
    /// Latency bin width in seconds, `round` or `off`
    #[arg(long)]
    bin: Option<String>,
    /// Latency budgets in seconds for rate curves
    #[arg(long)]
    budgets: Option<String>,
    /// Largest message size tried by rate curves
    #[arg(long = "k-max")]
    k_max: Option<u32>,
    /// Latency CDF file for `--target cdf`
    #[arg(long = "cdf-out")]
    cdf_out: Option<PathBuf>,
    #[command(flatten)]
    shared: SharedArgs,
}

fn put<T: ToString>(pairs: &mut Vec<(&'static str, String)>, key: &'static str, v: &Option<T>) {
    if let Some(v) = v {
        pairs.push((key, v.to_string()));
    }
}

fn shared_pairs(a: &SharedArgs) -> Vec<(&'static str, String)> {
    let mut p = Vec::new();
    put(&mut p, "u", &a.u);
    put(&mut p, "d", &a.d);
    put(&mut p, "n_p", &a.n_p);
    put(&mut p, "s", &a.s);
    put(&mut p, "L_c", &a.l_c);
    put(&mut p, "T_o", &a.t_o);
    put(&mut p, "eps", &a.eps);
    put(&mut p, "trials", &a.trials);
    put(&mut p, "seed", &a.seed);
    put(&mut p, "search_trials", &a.search_trials);
    put(&mut p, "s_grid", &a.s_grid);
    put(&mut p, "n_p_grid", &a.n_p_grid);
    p
}

fn point_pairs(a: &PointArgs) -> Vec<(&'static str, String)> {
    let mut p = shared_pairs(&a.shared);
    put(&mut p, "rho_db", &a.snr_db);
    put(&mut p, "L", &a.l);
    put(&mut p, "k", &a.k);
    p
}

fn resolve(config: Option<&Path>, pairs: &[(&'static str, String)], before_finish: impl FnOnce(&mut Settings) -> Result<()>) -> Result<Settings> {
    let mut s = Settings::default();
    if let Some(path) = config {
        s.apply_file(path)?;
    }
    for (k, v) in pairs {
        s.set(k, v)?;
    }
    before_finish(&mut s)?;
    s.finish()
}

fn open_out<'a>(path: Option<&Path>, stdout: &'a mut dyn Write) -> Result<Box<dyn Write + 'a>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(stdout),
    })
}

struct Context<'a> {
    out: &'a mut dyn Write,
    err: &'a mut dyn Write,
}

fn run_fbl(a: &PointArgs, cx: &mut Context<'_>) -> Result<i32> {
    let s = resolve(a.shared.config.as_deref(), &point_pairs(a), |_| Ok(()))?;
    let e = fbl::min_slots(&s.system, &s.plan.space, s.plan.n_trials, s.plan.seed)?;
    output::fbl_summary(cx.out, &e)?;
    if let Some(path) = &a.shared.out {
        let mut w = BufWriter::new(File::create(path)?);
        output::write_manifest(&mut w, "fbl", &s.manifest("fbl"))?;
        let cfg = s.system.clone().with_pilots(e.n_p_used);
        output::write_points(&mut w, &[sweep::CurvePoint::from_fbl(&cfg, &e, s.plan.seed)])?;
        w.flush()?;
    }
    Ok(EXIT_OK)
}

fn run_harq(a: &HarqArgs, cx: &mut Context<'_>) -> Result<i32> {
    let s = resolve(a.point.shared.config.as_deref(), &point_pairs(&a.point), |_| Ok(()))?;
    let e = harq::optimize_rounds(&s.system, &s.plan.space, s.plan.n_trials, s.plan.seed)?;
    output::harq_summary(cx.out, &e)?;
    let manifest = s.manifest("harq");
    if let Some(path) = &a.point.shared.out {
        let mut w = BufWriter::new(File::create(path)?);
        output::write_manifest(&mut w, "harq", &manifest)?;
        let cfg = s.system.clone().with_pilots(e.n_p_used);
        output::write_points(&mut w, &[sweep::CurvePoint::from_harq(&cfg, &e, s.plan.seed)])?;
        w.flush()?;
    }
    match &a.cdf_out {
        Some(path) => {
            let mut w = BufWriter::new(File::create(path)?);
            output::write_manifest(&mut w, "harq", &manifest)?;
            output::write_cdf(&mut w, &e.latency_cdf)?;
            w.flush()?;
        }
        None => {
            writeln!(cx.out)?;
            output::write_cdf(cx.out, &e.latency_cdf)?;
        }
    }
    Ok(EXIT_OK)
}

fn run_sweep(a: &SweepArgs, cx: &mut Context<'_>) -> Result<i32> {
    let mut pairs = shared_pairs(&a.shared);
    put(&mut pairs, "target", &a.target);
    put(&mut pairs, "schemes", &a.schemes);
    put(&mut pairs, "rho_db_values", &a.snr_db);
    put(&mut pairs, "L_values", &a.l);
    put(&mut pairs, "k_values", &a.k);
    put(&mut pairs, "latency_bin_s", &a.bin);
    put(&mut pairs, "latency_budgets_s", &a.budgets);
    put(&mut pairs, "k_max", &a.k_max);
    let s = resolve(a.shared.config.as_deref(), &pairs, |s| {
        // A single SNR given for a rate curve doubles as the point SNR.
        if let [db] = s.plan.snr_db_values.as_slice() {
            if s.is_explicit("rho_db_values") && !s.is_explicit("rho_db") {
                s.set("rho_db", &db.to_string())?;
            }
        }
        Ok(())
    })?;
    let manifest = s.manifest("sweep");
    let plan = &s.plan;
    let err = &mut *cx.err;
    let mut w = open_out(a.shared.out.as_deref(), cx.out)?;
    output::write_manifest(&mut w, "sweep", &manifest)?;
    let mut progress = |ev: SweepEvent<'_>| {
        let line = match ev {
            SweepEvent::Point(p) => output::point_line(p),
            SweepEvent::Skipped(sk) => output::skipped_line(sk),
        };
        let _ = writeln!(err, "{line}");
    };
    let outcome = match plan.target {
        Target::MinEnergyPerBit => sweep::energy_curve_with(plan, &mut progress)?,
        Target::MaxRate => sweep::rate_curve_with(plan, &mut progress)?,
        Target::LatencyCdf => {
            let mut rows = Vec::new();
            let mut out = sweep::SweepOutcome::default();
            sweep::latency_cdf_curve_with(plan, |ev| match ev {
                CdfEvent::Comparison(c) => {
                    let _ = writeln!(
                        err,
                        "L={} rho_db={} k={}: P[HARQ latency > FBL latency] = {}",
                        c.fbl.branches, c.fbl.snr_db, c.fbl.info_bits, c.crossing_probability
                    );
                    out.points.push(c.fbl.clone());
                    out.points.push(c.harq.clone());
                    rows.push(c.clone());
                }
                CdfEvent::Skipped(sk) => {
                    let _ = writeln!(err, "{}", output::skipped_line(sk));
                    out.skipped.push(sk.clone());
                }
            })?;
            if let Some(path) = &a.cdf_out {
                let mut cw = BufWriter::new(File::create(path)?);
                output::write_manifest(&mut cw, "sweep", &manifest)?;
                output::write_cdf_comparisons(&mut cw, &rows)?;
                cw.flush()?;
            }
            out
        }
    };
    output::write_points(&mut w, &outcome.points)?;
    w.flush()?;
    if outcome.points.is_empty() {
        writeln!(cx.err, "no point met the target")?;
        return Ok(EXIT_INFEASIBLE);
    }
    Ok(EXIT_OK)
}

fn run_kappa(a: &KappaArgs, cx: &mut Context<'_>) -> Result<i32> {
    let mut pairs = point_pairs(&a.point);
    put(&mut pairs, "beta_values", &a.beta);
    let s = resolve(a.point.shared.config.as_deref(), &pairs, |s| {
        if !s.is_explicit("s") {
            s.set("s", "1")?;
        }
        Ok(())
    })?;
    let sv = SnnParam::new(s.plan.space.s_grid[0])?;
    let mut w = open_out(a.point.shared.out.as_deref(), cx.out)?;
    output::write_manifest(&mut w, "kappa", &s.manifest("kappa"))?;
    writeln!(w, "beta,kappa,std_err")?;
    for &beta in &s.beta_values {
        let k = kappa(beta, &s.system, sv, s.plan.n_trials, s.plan.seed)?;
        writeln!(w, "{beta},{},{}", k.mean, k.std_err)?;
    }
    w.flush()?;
    Ok(EXIT_OK)
}

fn run_validate(a: &PointArgs, cx: &mut Context<'_>) -> Result<i32> {
    let s = resolve(a.shared.config.as_deref(), &point_pairs(a), |_| Ok(()))?;
    let mut w = open_out(a.shared.out.as_deref(), cx.out)?;
    output::write_manifest(&mut w, "validate", &s.manifest("validate"))?;
    let results = diagnostics::run_all(&s.system, s.plan.n_trials, s.plan.seed)?;
    for d in &results {
        writeln!(w, "{} {}: {}", if d.passed { "PASS" } else { "FAIL" }, d.name, d.detail)?;
    }
    w.flush()?;
    Ok(if results.iter().all(|d| d.passed) { EXIT_OK } else { EXIT_DIAGNOSTIC_FAILED })
}

fn dispatch(cli: &Cli, cx: &mut Context<'_>) -> Result<i32> {
    match &cli.command {
        Command::Fbl(a) => run_fbl(a, cx),
        Command::Harq(a) => run_harq(a, cx),
        Command::Sweep(a) => run_sweep(a, cx),
        Command::Kappa(a) => run_kappa(a, cx),
        Command::Validate(a) => run_validate(a, cx),
    }
}

fn parse_workers(value: Option<&str>) -> Result<Option<usize>> {
    match value {
        None => Ok(None),
        Some(v) => match v.trim().parse::<usize>() {
            Ok(n) if n >= 1 => Ok(Some(n)),
            _ => Err(Error::config(WORKERS_ENV, format!("must be a positive integer (got {v:?})"))),
        },
    }
}

#[cfg(feature = "parallel")]
fn with_workers<T: Send>(n: Option<usize>, f: impl FnOnce() -> T + Send) -> Result<T> {
    match n {
        None => Ok(f()),
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| Error::config(WORKERS_ENV, e.to_string()))?;
            Ok(pool.install(f))
        }
    }
}

#[cfg(not(feature = "parallel"))]
fn with_workers<T: Send>(_: Option<usize>, f: impl FnOnce() -> T + Send) -> Result<T> {
    Ok(f())
}

/// Runs the tool with explicit output streams and returns the exit code.
pub fn run_with<I, T>(args: I, out: &mut (dyn Write + Send), err: &mut (dyn Write + Send)) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_ERROR } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if e.use_stderr() { write!(err, "{text}") } else { write!(out, "{text}") };
            return code;
        }
    };
    let started = Instant::now();
    let result = parse_workers(std::env::var(WORKERS_ENV).ok().as_deref()).and_then(|n| {
        with_workers(n, || {
            let mut cx = Context { out: &mut *out, err: &mut *err };
            dispatch(&cli, &mut cx)
        })?
    });
    match result {
        Ok(code) => {
            let _ = writeln!(err, "runtime {:.2} s", started.elapsed().as_secs_f64());
            code
        }
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            match e {
                Error::Infeasible(_) => EXIT_INFEASIBLE,
                _ => EXIT_ERROR,
            }
        }
    }
}

/// Runs the tool on the process's standard streams.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let mut out = io::stdout();
    let mut err = io::stderr();
    run_with(args, &mut out, &mut err)
}
