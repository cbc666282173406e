//! Acceptance criteria, one PASS/FAIL line each.
//!
//! Run with `cargo test -p shortpacket --test acceptance`. The process exits
//! non-zero when any criterion fails.

use std::path::PathBuf;
use std::process::Command;
use std::time::Instant;

use shortpacket::channel::{sample_block, CodewordLaw};
use shortpacket::config::log_competitors;
use shortpacket::density::{block_density, mean_block_density};
use shortpacket::diagnostics;
use shortpacket::fbl::{rcus_summand, DensityBank};
use shortpacket::harq::sample_trajectories;
use shortpacket::quadrature::single_symbol_config;
use shortpacket::rng::Streams;
use shortpacket::search::SearchSpace;
use shortpacket::sweep::{
    energy_curve, latency_cdf_curve, rate_curve, recompute, CurvePoint, LatencyBinning, Scheme, SweepPlan, Target,
};
use shortpacket::{SnnParam, SystemConfig};

const FULL_TRIALS: usize = 200_000;
/// Trial count of the shape checks, which sweep many more points.
const SHAPE_TRIALS: usize = 20_000;
const SHAPE_SEARCH_TRIALS: usize = 5_000;

const C1_LATENCY_S: f64 = 1.0e-3;
const C1_HALF_BIN_S: f64 = 0.1e-3;
const C1_GAP_DB: (f64, f64) = (3.0, 5.0);
const C1_BUDGET_S: f64 = 600.0;

const C2_CROSSING: [(f64, f64); 2] = [(-5.0, 0.097), (-2.0, 0.054)];
const C2_TOLERANCE: f64 = 0.02;
const C2_BUDGET_S: f64 = 300.0;

const C6_TRIALS: usize = 400_000;
/// Adaptive-quadrature references `(s, rho_db, E[i_s])` at `n_d = n_p = L = 1`.
const C6_REFERENCE: [(f64, f64, f64); 4] = [
    (0.5, 0.0, 0.22749256),
    (0.5, 10.0, 1.04341831),
    (1.0, 0.0, -0.06084239),
    (1.0, 10.0, 0.96877181),
];

struct Report {
    failed: usize,
}

impl Report {
    fn line(&mut self, id: &str, title: &str, passed: bool, detail: &[String]) {
        println!("{} criterion {id}: {title}", if passed { "PASS" } else { "FAIL" });
        for d in detail {
            println!("    {d}");
        }
        if !passed {
            self.failed += 1;
        }
    }
}

fn plan(branches: &[usize], snr_db: Vec<f64>, n_trials: usize) -> SweepPlan {
    SweepPlan {
        branch_values: branches.to_vec(),
        snr_db_values: snr_db,
        n_trials,
        ..SweepPlan::default()
    }
}

fn range(start: f64, step: f64, stop: f64) -> Vec<f64> {
    let n = ((stop - start) / step + 1e-9).floor() as usize;
    (0..=n).map(|i| start + i as f64 * step).collect()
}

fn best_in_bin(points: &[CurvePoint], scheme: Scheme) -> Option<&CurvePoint> {
    points
        .iter()
        .filter(|p| p.scheme == scheme && (p.avg_latency_s - C1_LATENCY_S).abs() <= C1_HALF_BIN_S + 1e-12)
        .min_by(|a, b| a.eb_db.total_cmp(&b.eb_db))
}

fn criterion_1(r: &mut Report) -> Vec<CurvePoint> {
    let t0 = Instant::now();
    let p = SweepPlan {
        binning: LatencyBinning::Off,
        ..plan(&[3], range(-9.0, 0.5, -6.0), FULL_TRIALS)
    };
    let out = energy_curve(&p).expect("energy sweep");
    let secs = t0.elapsed().as_secs_f64();
    let fbl = best_in_bin(&out.points, Scheme::Fbl);
    let harq = best_in_bin(&out.points, Scheme::Harq);
    let mut detail: Vec<String> = out
        .points
        .iter()
        .map(|p| format!("{} rho={} dB: latency {:.4} ms, E_b {:.3} dB", p.scheme, p.snr_db, p.avg_latency_s * 1e3, p.eb_db))
        .collect();
    let passed = match (fbl, harq) {
        (Some(f), Some(h)) => {
            let gap = f.eb_db - h.eb_db;
            detail.push(format!(
                "FBL {:.3} dB at {:.4} ms, HARQ {:.3} dB at {:.4} ms: gap {gap:.3} dB (required {}..{})",
                f.eb_db,
                f.avg_latency_s * 1e3,
                h.eb_db,
                h.avg_latency_s * 1e3,
                C1_GAP_DB.0,
                C1_GAP_DB.1
            ));
            (C1_GAP_DB.0..=C1_GAP_DB.1).contains(&gap) && secs <= C1_BUDGET_S
        }
        _ => {
            detail.push("no FBL or no HARQ point in the 1 ms bin".into());
            false
        }
    };
    detail.push(format!("runtime {secs:.1} s (budget {C1_BUDGET_S} s)"));
    r.line("1", "HARQ saves 3 to 5 dB of energy per bit at 1 ms average latency, L = 3", passed, &detail);
    out.points
}

fn criterion_2(r: &mut Report) {
    let t0 = Instant::now();
    let p = SweepPlan {
        target: Target::LatencyCdf,
        ..plan(&[2], C2_CROSSING.iter().map(|c| c.0).collect(), FULL_TRIALS)
    };
    let (rows, skipped) = latency_cdf_curve(&p).expect("cdf sweep");
    let secs = t0.elapsed().as_secs_f64();
    let mut passed = skipped.is_empty() && secs <= C2_BUDGET_S;
    let mut detail = Vec::new();
    for (db, expected) in C2_CROSSING {
        match rows.iter().find(|c| c.fbl.snr_db == db) {
            Some(c) => {
                let ok = (c.crossing_probability - expected).abs() <= C2_TOLERANCE;
                passed &= ok;
                detail.push(format!(
                    "rho={db} dB: P[HARQ latency > FBL latency] = {:.4} (expected {expected} ± {C2_TOLERANCE}), FBL v* = {}, HARQ mean rounds {:.4} {}",
                    c.crossing_probability,
                    c.fbl.v_or_gamma,
                    c.harq.avg_latency_s / (2.0 * p.base.slot_duration_s()),
                    if ok { "ok" } else { "out of tolerance" }
                ));
            }
            None => {
                passed = false;
                detail.push(format!("rho={db} dB: not evaluated"));
            }
        }
    }
    detail.push(format!("runtime {secs:.1} s (budget {C2_BUDGET_S} s)"));
    r.line("2", "probability that HARQ is slower than FBL, L = 2", passed, &detail);
}

fn shape_space() -> SearchSpace {
    SearchSpace { search_trials: SHAPE_SEARCH_TRIALS, ..SearchSpace::default() }
}

/// Best rate reachable within `budget` on one curve; 0 when nothing fits.
fn rate_within(points: &[CurvePoint], scheme: Scheme, l: usize, budget: f64) -> f64 {
    points
        .iter()
        .filter(|p| p.scheme == scheme && p.branches == l && p.avg_latency_s <= budget * (1.0 + 1e-9))
        .map(|p| p.rate_bpcu)
        .fold(0.0, f64::max)
}

/// Largest latency a curve reaches before the round budget stops it.
fn extent(points: &[CurvePoint], scheme: Scheme, l: usize) -> f64 {
    points
        .iter()
        .filter(|p| p.scheme == scheme && p.branches == l)
        .map(|p| p.avg_latency_s)
        .fold(0.0, f64::max)
}

fn criterion_3(r: &mut Report) -> Vec<CurvePoint> {
    let mut detail = Vec::new();

    let energy_plan = SweepPlan { space: shape_space(), ..plan(&[2, 3], range(-11.0, 0.5, -5.0), SHAPE_TRIALS) };
    let energy = energy_curve(&energy_plan).expect("energy sweep").points;
    let mut interior = false;
    for (scheme, l) in [(Scheme::Fbl, 2), (Scheme::Fbl, 3), (Scheme::Harq, 2), (Scheme::Harq, 3)] {
        let curve: Vec<&CurvePoint> = energy.iter().filter(|p| p.scheme == scheme && p.branches == l).collect();
        let Some((at, min)) = curve.iter().enumerate().min_by(|a, b| a.1.eb_db.total_cmp(&b.1.eb_db)) else {
            continue;
        };
        let here = at > 0 && at + 1 < curve.len();
        interior |= here;
        detail.push(format!(
            "(a) {scheme} L={l}: {} envelope points, minimum {:.3} dB at {:.4} ms{}",
            curve.len(),
            min.eb_db,
            min.avg_latency_s * 1e3,
            if here { " (interior)" } else { " (endpoint)" }
        ));
    }

    let ls = [2, 3, 5, 6];
    let slot = SystemConfig::default().slot_duration_s();
    let budgets: Vec<f64> = (1..=10).map(|j| 2.0 * j as f64 * slot).collect();
    let rate_plan = SweepPlan {
        target: Target::MaxRate,
        snr_db_values: vec![-2.0],
        space: shape_space(),
        latency_budgets_s: budgets.clone(),
        ..plan(&ls, vec![-2.0], SHAPE_TRIALS)
    };
    let rates = rate_curve(&rate_plan).expect("rate sweep").points;

    let mut harq_wins = true;
    let mut compared = 0;
    for &l in &ls {
        for &b in &budgets {
            let (f, h) = (rate_within(&rates, Scheme::Fbl, l, b), rate_within(&rates, Scheme::Harq, l, b));
            if f > 0.0 && h > 0.0 {
                compared += 1;
                if h < f {
                    harq_wins = false;
                    detail.push(format!("(b) L={l} budget {:.4} ms: HARQ {h:.4} < FBL {f:.4}", b * 1e3));
                }
            }
        }
    }
    detail.push(format!("(b) HARQ rate >= FBL rate at {compared} matched budgets: {harq_wins}"));
    let harq_wins = harq_wins && compared > 0;

    let mut grows = true;
    let mut checked = 0;
    for scheme in [Scheme::Fbl, Scheme::Harq] {
        let common = ls.iter().map(|&l| extent(&rates, scheme, l)).fold(f64::INFINITY, f64::min);
        for &b in budgets.iter().filter(|&&b| b <= common * (1.0 + 1e-9)) {
            let row: Vec<f64> = ls.iter().map(|&l| rate_within(&rates, scheme, l, b)).collect();
            if row.iter().all(|&x| x == 0.0) {
                continue;
            }
            checked += 1;
            let ok = row.windows(2).all(|w| w[0] < w[1]);
            grows &= ok;
            detail.push(format!(
                "(c) {scheme} budget {:.4} ms: rates for L={ls:?} = {:?}{}",
                b * 1e3,
                row.iter().map(|x| (x * 1e4).round() / 1e4).collect::<Vec<_>>(),
                if ok { "" } else { " not increasing" }
            ));
        }
    }
    let grows = grows && checked > 0;

    detail.push(format!("trials {SHAPE_TRIALS} per point, {SHAPE_SEARCH_TRIALS} during the parameter search"));
    r.line(
        "3",
        "curve shapes: interior energy minimum, HARQ rate dominance, rate grows with L",
        interior && harq_wins && grows,
        &detail,
    );
    energy
}

fn identity_mismatch(p: &CurvePoint, base: &SystemConfig) -> Option<String> {
    let cfg = p.config(base);
    let slot = cfg.slot_duration_s();
    let k = p.info_bits as f64;
    match p.scheme {
        Scheme::Fbl => {
            let v = p.v_or_gamma as usize;
            let symbols = (v * cfg.symbols_per_slot()) as f64;
            let checks = [
                ("latency", p.avg_latency_s, v as f64 * slot),
                ("max latency", p.max_latency_s, p.avg_latency_s),
                ("rate", p.rate_bpcu, k / symbols),
                ("energy", p.eb_db, shortpacket::config::linear_to_db(cfg.snr * symbols / k)),
            ];
            checks
                .iter()
                .find(|(_, a, b)| a != b)
                .map(|(n, a, b)| format!("FBL rho={} {n}: {a} vs {b}", p.snr_db))
        }
        Scheme::Harq => {
            let again = recompute(p, base).ok()?;
            if &again != p {
                return Some(format!("HARQ rho={} does not reproduce from its metadata", p.snr_db));
            }
            let round_s = 2.0 * slot;
            if p.max_latency_s != cfg.max_rounds() as f64 * round_s {
                return Some(format!("HARQ rho={} max latency", p.snr_db));
            }
            let ell = p.avg_latency_s / round_s;
            let per_round = cfg.symbols_per_slot() as f64;
            let rel = |a: f64, b: f64| ((a - b) / b).abs() <= 1e-14;
            let energy = shortpacket::config::linear_to_db(cfg.snr * per_round * ell / k);
            (!(rel(p.rate_bpcu, k / (ell * per_round)) && (p.eb_db - energy).abs() <= 1e-12))
                .then(|| format!("HARQ rho={} rate/energy identities", p.snr_db))
        }
    }
}

fn criterion_4(r: &mut Report, points: &[CurvePoint]) {
    let mut detail = Vec::new();
    let cfg = SystemConfig::default();
    let streams = Streams::new(4);

    let zero = (0..1000u64).all(|t| {
        let b = sample_block(&cfg, CodewordLaw::Transmitted, &mut streams.block(t, 0)).unwrap();
        block_density(&b, SnnParam::new(0.0).unwrap()) == 0.0
    });
    detail.push(format!("i_0 = 0 on 1000 blocks: {zero}"));

    let s = SnnParam::new(0.7).unwrap();
    let n = 2000;
    let mut bank = DensityBank::new(&cfg, s, n, 4).unwrap();
    for _ in 0..cfg.max_rounds() {
        bank.advance();
    }
    let set = sample_trajectories(&cfg, s, n, 4, CodewordLaw::Transmitted, f64::INFINITY).unwrap();
    let sums = bank
        .densities()
        .iter()
        .zip(&set.trajectories)
        .all(|(a, t)| *a == t.increments().iter().fold(0.0, |acc, z| acc + z));
    detail.push(format!("accumulated density = sum of increments on {n} trials: {sums}"));

    let base = SystemConfig::default();
    let mismatches: Vec<String> = points.iter().filter_map(|p| identity_mismatch(p, &base)).collect();
    detail.push(format!("latency, energy and rate identities on {} points: {} mismatches", points.len(), mismatches.len()));
    detail.extend(mismatches.iter().take(5).cloned());

    let mut in_range = true;
    let mut monotone = true;
    for &a in bank.densities() {
        let mut prev = 0.0;
        for k in 1..=512 {
            let z = rcus_summand(a, log_competitors(k));
            in_range &= (0.0..=1.0).contains(&z);
            monotone &= z >= prev;
            prev = z;
        }
    }
    detail.push(format!("summands in [0, 1]: {in_range}; per-sample non-decreasing in k = 1..512: {monotone}"));

    r.line(
        "4",
        "exact identities",
        zero && sums && mismatches.is_empty() && !points.is_empty() && in_range && monotone,
        &detail,
    );
}

fn criterion_5(r: &mut Report) {
    let results = diagnostics::run_all(&SystemConfig::default(), FULL_TRIALS, 5).expect("diagnostics");
    let wanted = ["kappa root", "mismatched drift", "wald dominance", "estimate error variance"];
    let selected: Vec<_> = results.iter().filter(|d| wanted.iter().any(|w| d.name.starts_with(w))).collect();
    let detail: Vec<String> = selected
        .iter()
        .map(|d| format!("{} {}: {}", if d.passed { "ok  " } else { "FAIL" }, d.name, d.detail))
        .collect();
    let passed = selected.len() == 12 && selected.iter().all(|d| d.passed);
    r.line("5", "statistical checks", passed, &detail);
}

fn criterion_6(r: &mut Report) {
    let mut passed = true;
    let mut detail = Vec::new();
    for (sv, db, reference) in C6_REFERENCE {
        let mc = mean_block_density(&single_symbol_config(db), SnnParam::new(sv).unwrap(), CodewordLaw::Transmitted, C6_TRIALS, 6)
            .unwrap();
        let ok = mc.covers(reference, 3.0);
        passed &= ok;
        detail.push(format!(
            "s={sv} rho={db} dB: {:.5} ± {:.5} vs {reference} ({:+.2} sigma)",
            mc.mean,
            mc.std_err,
            (mc.mean - reference) / mc.std_err
        ));
    }
    r.line("6", "Monte Carlo mean density matches the quadrature reference", passed, &detail);
}

fn criterion_7(r: &mut Report) {
    let dir = std::env::temp_dir().join(format!("shortpacket-acceptance-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let run = |workers: &str| -> Option<Vec<u8>> {
        let out: PathBuf = dir.join(format!("w{workers}.csv"));
        let status = Command::new(env!("CARGO_BIN_EXE_shortpacket"))
            .args(["sweep", "--target", "energy", "--L", "2,3", "--snr-db", "-6:2:0", "--trials", "20000"])
            .args(["--search-trials", "5000", "--out"])
            .arg(&out)
            .env("SHORTPACKET_WORKERS", workers)
            .stderr(std::process::Stdio::null())
            .status()
            .ok()?;
        status.success().then(|| std::fs::read(&out).ok()).flatten()
    };
    let (a, b) = (run("1"), run("3"));
    let same = matches!((&a, &b), (Some(x), Some(y)) if x == y);
    let detail = vec![format!(
        "1 worker: {} bytes, 3 workers: {} bytes, identical: {same}",
        a.as_ref().map_or(0, Vec::len),
        b.as_ref().map_or(0, Vec::len)
    )];
    r.line("7", "worker count does not change the CSV", same, &detail);
}

fn main() {
    let mut r = Report { failed: 0 };
    let mut points = criterion_1(&mut r);
    criterion_2(&mut r);
    points.extend(criterion_3(&mut r));
    criterion_4(&mut r, &points);
    criterion_5(&mut r);
    criterion_6(&mut r);
    criterion_7(&mut r);
    println!("{} of 7 criteria passed", 7 - r.failed);
    if r.failed > 0 {
        std::process::exit(1);
    }
}
