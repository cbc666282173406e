//! Curves over SNR, diversity order and message size.
//!
//! Points of one curve are evaluated in order of increasing SNR (or latency
//! budget), each parameter search starting from the optimum of the previous
//! point. All points share the plan's seed, so neighbouring points see the
//! same channel draws. A point's values depend only on its recorded
//! configuration, `(s, n_p)`, seed and trial count.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use crate::config::{linear_to_db, SystemConfig};
use crate::density::SnnParam;
use crate::error::{Error, Result};
use crate::fbl::{self, FblEvaluation, SlotProfile};
use crate::harq::{self, HarqEvaluation, RoundsProfile};
use crate::search::{optimize, Candidate, GridPoint, SearchSpace};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Scheme {
    Fbl,
    Harq,
}

impl Scheme {
    pub fn name(self) -> &'static str {
        match self {
            Scheme::Fbl => "FBL",
            Scheme::Harq => "HARQ",
        }
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Scheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "fbl" => Ok(Scheme::Fbl),
            "harq" => Ok(Scheme::Harq),
            _ => Err(Error::config("scheme", format!("must be fbl or harq (got {s:?})"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Target {
    MinEnergyPerBit,
    MaxRate,
    LatencyCdf,
}

impl FromStr for Target {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "energy" | "min_energy_per_bit" => Ok(Target::MinEnergyPerBit),
            "rate" | "max_rate" => Ok(Target::MaxRate),
            "cdf" | "latency_cdf" => Ok(Target::LatencyCdf),
            _ => Err(Error::config("target", format!("must be energy, rate or cdf (got {s:?})"))),
        }
    }
}

impl fmt::Display for Target {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Target::MinEnergyPerBit => "energy",
            Target::MaxRate => "rate",
            Target::LatencyCdf => "cdf",
        })
    }
}

/// Grouping of energy points by latency before taking the lower envelope.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LatencyBinning {
    /// Bins one round wide: `d·T_o` for FBL, `2·d·T_o` for HARQ.
    RoundDuration,
    /// Bins of a fixed width in seconds.
    Width(f64),
    /// Keep every point.
    Off,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepPlan {
    /// Geometry, target and default message size; SNR and `L` are overridden per point.
    pub base: SystemConfig,
    pub schemes: Vec<Scheme>,
    pub branch_values: Vec<usize>,
    pub snr_db_values: Vec<f64>,
    pub info_bits_values: Vec<u32>,
    pub target: Target,
    pub n_trials: usize,
    pub seed: u64,
    pub space: SearchSpace,
    pub binning: LatencyBinning,
    /// Latency budgets for rate curves; empty means every multiple of `d·T_o`
    /// up to the longest HARQ round budget.
    pub latency_budgets_s: Vec<f64>,
    pub max_info_bits: u32,
}

impl Default for SweepPlan {
    fn default() -> Self {
        SweepPlan {
            base: SystemConfig::default(),
            schemes: vec![Scheme::Fbl, Scheme::Harq],
            branch_values: vec![2, 3, 5, 6],
            snr_db_values: (0..=40).map(|i| -10.0 + 0.5 * i as f64).collect(),
            info_bits_values: vec![30],
            target: Target::MinEnergyPerBit,
            n_trials: 200_000,
            seed: 0,
            space: SearchSpace::default(),
            binning: LatencyBinning::RoundDuration,
            latency_budgets_s: Vec::new(),
            max_info_bits: 512,
        }
    }
}

impl SweepPlan {
    pub fn validate(&self) -> Result<()> {
        self.base.validate()?;
        if self.schemes.is_empty() {
            return Err(Error::config("schemes", "must not be empty"));
        }
        if self.branch_values.is_empty() {
            return Err(Error::config("L_values", "must not be empty"));
        }
        for &l in &self.branch_values {
            self.base.clone().with_branches(l).validate()?;
        }
        if self.snr_db_values.is_empty() {
            return Err(Error::config("rho_db_values", "must not be empty"));
        }
        if let Some(bad) = self.snr_db_values.iter().find(|x| !x.is_finite()) {
            return Err(Error::config("rho_db_values", format!("entries must be finite (got {bad})")));
        }
        if self.info_bits_values.is_empty() || self.info_bits_values.contains(&0) {
            return Err(Error::config("k_values", "must be a non-empty list of positive integers"));
        }
        if self.n_trials == 0 {
            return Err(Error::config("trials", "must be at least 1"));
        }
        if self.max_info_bits == 0 {
            return Err(Error::config("k_max", "must be at least 1"));
        }
        if let LatencyBinning::Width(w) = self.binning {
            if !(w.is_finite() && w > 0.0) {
                return Err(Error::config("latency_bin_s", "must be a finite positive width"));
            }
        }
        if let Some(bad) = self.latency_budgets_s.iter().find(|b| !(b.is_finite() && **b > 0.0)) {
            return Err(Error::config("latency_budgets_s", format!("entries must be positive (got {bad})")));
        }
        self.space.validate(self.base.coherence_symbols())
    }

    fn sorted_snr_db(&self) -> Vec<f64> {
        let mut snrs = self.snr_db_values.clone();
        snrs.sort_by(f64::total_cmp);
        snrs
    }

    fn point_config(&self, branches: usize, snr_db: f64, bits: u32) -> SystemConfig {
        self.base.clone().with_branches(branches).with_snr_db(snr_db).with_info_bits(bits)
    }

    fn budgets(&self) -> Vec<f64> {
        if !self.latency_budgets_s.is_empty() {
            let mut b = self.latency_budgets_s.clone();
            b.sort_by(f64::total_cmp);
            return b;
        }
        let slot = self.base.slot_duration_s();
        let longest = self
            .branch_values
            .iter()
            .map(|&l| self.base.clone().with_branches(l).max_rounds())
            .max()
            .unwrap_or(1);
        (1..=2 * longest).map(|j| j as f64 * slot).collect()
    }
}

/// One evaluated operating point with everything needed to recompute it.
#[derive(Debug, Clone, PartialEq)]
pub struct CurvePoint {
    pub scheme: Scheme,
    pub branches: usize,
    pub snr_db: f64,
    pub info_bits: u32,
    pub s: f64,
    pub pilots: usize,
    /// Slot count (FBL) or threshold in nats (HARQ).
    pub v_or_gamma: f64,
    pub avg_latency_s: f64,
    pub max_latency_s: f64,
    pub eb_db: f64,
    pub rate_bpcu: f64,
    pub eps_bound: f64,
    pub timeout_term: Option<f64>,
    pub undetected_term: Option<f64>,
    /// Standard error of the Monte Carlo part of `eps_bound`.
    pub std_err: f64,
    pub seed: u64,
    pub n_trials: usize,
}

impl CurvePoint {
    pub fn from_fbl(cfg: &SystemConfig, e: &FblEvaluation, seed: u64) -> Self {
        CurvePoint {
            scheme: Scheme::Fbl,
            branches: cfg.branches,
            snr_db: cfg.snr_db(),
            info_bits: cfg.info_bits,
            s: e.s_used.value(),
            pilots: e.n_p_used,
            v_or_gamma: e.v_star as f64,
            avg_latency_s: e.latency_s,
            max_latency_s: e.latency_s,
            eb_db: e.energy_per_bit_db(),
            rate_bpcu: e.rate_bits_per_use,
            eps_bound: e.eps_bound.mean,
            timeout_term: None,
            undetected_term: None,
            std_err: e.eps_bound.std_err,
            seed,
            n_trials: e.n_trials,
        }
    }

    pub fn from_harq(cfg: &SystemConfig, e: &HarqEvaluation, seed: u64) -> Self {
        CurvePoint {
            scheme: Scheme::Harq,
            branches: cfg.branches,
            snr_db: cfg.snr_db(),
            info_bits: cfg.info_bits,
            s: e.s_used.value(),
            pilots: e.n_p_used,
            v_or_gamma: e.gamma_star,
            avg_latency_s: e.avg_latency_s,
            max_latency_s: e.max_latency_s,
            eb_db: e.energy_per_bit_db(),
            rate_bpcu: e.rate_bits_per_use,
            eps_bound: e.eps_bound,
            timeout_term: Some(e.timeout_term.mean),
            undetected_term: Some(e.undetected_term),
            std_err: e.timeout_term.std_err,
            seed,
            n_trials: e.n_trials,
        }
    }

    /// The plotted quantity for `target`: E_b in dB, rate, or the HARQ/FBL
    /// average latency for CDF comparisons.
    pub fn y_value(&self, target: Target) -> f64 {
        match target {
            Target::MinEnergyPerBit => self.eb_db,
            Target::MaxRate => self.rate_bpcu,
            Target::LatencyCdf => self.avg_latency_s,
        }
    }

    /// Configuration this point was evaluated at, on top of `base`.
    pub fn config(&self, base: &SystemConfig) -> SystemConfig {
        base.clone()
            .with_branches(self.branches)
            .with_snr_db(self.snr_db)
            .with_info_bits(self.info_bits)
            .with_pilots(self.pilots)
    }
}

/// A point that could not be evaluated, with the reason.
#[derive(Debug, Clone, PartialEq)]
pub struct SkippedPoint {
    pub scheme: Scheme,
    pub branches: usize,
    pub snr_db: f64,
    pub info_bits: u32,
    pub latency_budget_s: Option<f64>,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq)]
pub enum SweepEvent<'a> {
    Point(&'a CurvePoint),
    Skipped(&'a SkippedPoint),
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct SweepOutcome {
    pub points: Vec<CurvePoint>,
    pub skipped: Vec<SkippedPoint>,
}

fn infeasible_reason(e: &Error) -> Option<String> {
    match e {
        Error::Infeasible(sf) => Some(sf.to_string()),
        _ => None,
    }
}

/// Evaluates one scheme at one configuration, optimizing `(s, n_p)`.
pub fn evaluate_point(
    scheme: Scheme,
    cfg: &SystemConfig,
    space: &SearchSpace,
    n_trials: usize,
    seed: u64,
    warm: Option<GridPoint>,
) -> Result<(CurvePoint, GridPoint)> {
    match scheme {
        Scheme::Fbl => {
            let (e, g) = fbl::min_slots_from(cfg, space, n_trials, seed, warm)?;
            Ok((CurvePoint::from_fbl(&cfg.clone().with_pilots(e.n_p_used), &e, seed), g))
        }
        Scheme::Harq => {
            let (e, g) = harq::optimize_rounds_from(cfg, space, n_trials, seed, warm)?;
            Ok((CurvePoint::from_harq(&cfg.clone().with_pilots(e.n_p_used), &e, seed), g))
        }
    }
}

/// Re-evaluates a point at its recorded parameters.
pub fn recompute(point: &CurvePoint, base: &SystemConfig) -> Result<CurvePoint> {
    let cfg = point.config(base);
    let s = SnnParam::new(point.s)?;
    match point.scheme {
        Scheme::Fbl => {
            let e = fbl::min_slots(&cfg, &SearchSpace::fixed(point.s, point.pilots), point.n_trials, point.seed)?;
            Ok(CurvePoint::from_fbl(&cfg, &e, point.seed))
        }
        Scheme::Harq => {
            let e = harq::evaluate(&cfg, s, point.n_trials, point.seed)?;
            Ok(CurvePoint::from_harq(&cfg, &e, point.seed))
        }
    }
}

/// Minimum energy per bit over SNR, reduced to its lower envelope per latency bin.
pub fn energy_curve(plan: &SweepPlan) -> Result<SweepOutcome> {
    energy_curve_with(plan, |_| {})
}

pub fn energy_curve_with(plan: &SweepPlan, mut on_event: impl FnMut(SweepEvent<'_>)) -> Result<SweepOutcome> {
    plan.validate()?;
    let snrs = plan.sorted_snr_db();
    let mut out = SweepOutcome::default();
    for &scheme in &plan.schemes {
        for &l in &plan.branch_values {
            for &k in &plan.info_bits_values {
                let mut warm = None;
                let mut raw = Vec::new();
                for &db in &snrs {
                    let cfg = plan.point_config(l, db, k);
                    match evaluate_point(scheme, &cfg, &plan.space, plan.n_trials, plan.seed, warm) {
                        Ok((p, g)) => {
                            warm = Some(g);
                            on_event(SweepEvent::Point(&p));
                            raw.push(p);
                        }
                        Err(e) => {
                            let reason = infeasible_reason(&e).ok_or(e)?;
                            let sk = SkippedPoint {
                                scheme,
                                branches: l,
                                snr_db: db,
                                info_bits: k,
                                latency_budget_s: None,
                                reason,
                            };
                            on_event(SweepEvent::Skipped(&sk));
                            out.skipped.push(sk);
                        }
                    }
                }
                out.points.extend(lower_envelope(raw, plan.binning, &plan.base));
            }
        }
    }
    Ok(out)
}

/// Keeps the lowest-E_b point of each latency bin, ordered by latency.
pub fn lower_envelope(points: Vec<CurvePoint>, binning: LatencyBinning, base: &SystemConfig) -> Vec<CurvePoint> {
    let width = |p: &CurvePoint| match binning {
        LatencyBinning::RoundDuration => Some(match p.scheme {
            Scheme::Fbl => base.slot_duration_s(),
            Scheme::Harq => 2.0 * base.slot_duration_s(),
        }),
        LatencyBinning::Width(w) => Some(w),
        LatencyBinning::Off => None,
    };
    let mut kept: Vec<CurvePoint> = Vec::new();
    let mut index: HashMap<(Scheme, usize, u32, i64), usize> = HashMap::new();
    for p in points {
        let Some(w) = width(&p) else {
            kept.push(p);
            continue;
        };
        // the small offset keeps exact multiples of the width in their own bin
        let bin = (p.avg_latency_s / w + 1e-9).floor() as i64;
        let key = (p.scheme, p.branches, p.info_bits, bin);
        match index.get(&key) {
            Some(&i) if kept[i].eb_db <= p.eb_db => {}
            Some(&i) => kept[i] = p,
            None => {
                index.insert(key, kept.len());
                kept.push(p);
            }
        }
    }
    kept.sort_by(|a, b| {
        (a.scheme, a.branches, a.info_bits)
            .cmp(&(b.scheme, b.branches, b.info_bits))
            .then(a.avg_latency_s.total_cmp(&b.avg_latency_s))
    });
    kept
}

enum Profile {
    Fbl(SlotProfile),
    Harq(RoundsProfile),
}

/// Best message size of one candidate within a latency budget.
#[derive(Debug, Clone)]
enum Achieved {
    Fbl { bits: u32, v: usize, bound: crate::Estimate },
    Harq { bits: u32, gamma: f64, stats: harq::StoppingStats },
}

impl Achieved {
    fn bits(&self) -> u32 {
        match self {
            Achieved::Fbl { bits, .. } | Achieved::Harq { bits, .. } => *bits,
        }
    }

    /// Larger is better: message size first, then rate tie-breaks.
    fn score(&self) -> (i64, f64) {
        match self {
            Achieved::Fbl { bits, bound, .. } => (-(*bits as i64), bound.upper(fbl::FEASIBILITY_SIGMAS)),
            Achieved::Harq { bits, stats, .. } => (-(*bits as i64), stats.mean_rounds.mean),
        }
    }
}

fn build_profile(scheme: Scheme, cfg: &SystemConfig, s: SnnParam, n: usize, seed: u64, k_max: u32) -> Result<Profile> {
    Ok(match scheme {
        Scheme::Fbl => Profile::Fbl(SlotProfile::new(cfg, s, n, seed)?),
        Scheme::Harq => Profile::Harq(RoundsProfile::new(cfg, s, n, seed, k_max)?),
    })
}

fn achieve(profile: &Profile, cfg: &SystemConfig, budget_s: f64, k_max: u32) -> Result<Option<Achieved>> {
    let slot = cfg.slot_duration_s();
    // the small offset keeps budgets that are exact multiples of a slot
    let units = budget_s / slot + 1e-9;
    match profile {
        Profile::Fbl(p) => {
            let v = (units.floor() as usize).min(cfg.max_rounds());
            if v == 0 {
                return Ok(None);
            }
            Ok(p.max_bits(v, cfg.eps_target, k_max).map(|(bits, bound)| Achieved::Fbl { bits, v, bound }))
        }
        Profile::Harq(p) => {
            let max_rounds = units / 2.0;
            if max_rounds < 1.0 {
                return Ok(None);
            }
            Ok(p.max_bits(cfg.eps_target, max_rounds, k_max)?
                .map(|(bits, (gamma, stats))| Achieved::Harq { bits, gamma, stats }))
        }
    }
}

/// How far a candidate is from carrying a single bit within the budget:
/// the one-bit bound (FBL) or average rounds (HARQ).
fn near_miss(profile: &Profile, cfg: &SystemConfig, budget_s: f64) -> Result<f64> {
    let units = budget_s / cfg.slot_duration_s() + 1e-9;
    Ok(match profile {
        Profile::Fbl(p) => match (units.floor() as usize).min(cfg.max_rounds()) {
            0 => f64::INFINITY,
            v => p.bound(v, 1).upper(fbl::FEASIBILITY_SIGMAS),
        },
        Profile::Harq(p) => p.at(1, cfg.eps_target)?.map_or(f64::INFINITY, |(_, stats)| stats.mean_rounds.mean),
    })
}

type CandidateKey = (u64, usize);

fn key(c: &Candidate) -> CandidateKey {
    (c.s.value().to_bits(), c.pilots)
}

/// Largest rate within each latency budget, for every SNR and `L`. A budget
/// that improves nothing over the previous one adds no point.
pub fn rate_curve(plan: &SweepPlan) -> Result<SweepOutcome> {
    rate_curve_with(plan, |_| {})
}

pub fn rate_curve_with(plan: &SweepPlan, mut on_event: impl FnMut(SweepEvent<'_>)) -> Result<SweepOutcome> {
    plan.validate()?;
    let budgets = plan.budgets();
    let k_max = plan.max_info_bits;
    let search_n = plan.space.search_trials.min(plan.n_trials);
    let mut out = SweepOutcome::default();
    for &db in &plan.snr_db_values {
        for &scheme in &plan.schemes {
            for &l in &plan.branch_values {
                let cfg = plan.point_config(l, db, plan.base.info_bits);
                let mut cache: HashMap<CandidateKey, Profile> = HashMap::new();
                let mut full: Option<(CandidateKey, Profile)> = None;
                let mut warm = None;
                let mut last: Option<CurvePoint> = None;
                for &budget in &budgets {
                    let found = optimize(&plan.space, warm, |c: Candidate| {
                        let k = key(&c);
                        if !cache.contains_key(&k) {
                            let pc = cfg.clone().with_pilots(c.pilots);
                            cache.insert(k, build_profile(scheme, &pc, c.s, search_n, plan.seed, k_max)?);
                        }
                        let profile = &cache[&k];
                        Ok(match achieve(profile, &cfg, budget, k_max)? {
                            Some(a) => a.score(),
                            None => (1, near_miss(profile, &cfg, budget)?),
                        })
                    })?;
                    let skip = |reason: String| SkippedPoint {
                        scheme,
                        branches: l,
                        snr_db: db,
                        info_bits: 0,
                        latency_budget_s: Some(budget),
                        reason,
                    };
                    if found.score.0 > 0 {
                        let sk = skip("no message size of at least 1 bit meets the target".into());
                        on_event(SweepEvent::Skipped(&sk));
                        out.skipped.push(sk);
                        continue;
                    }
                    warm = Some(found.grid_point);
                    let best = found.best;
                    let pc = cfg.clone().with_pilots(best.pilots);
                    let k = key(&best);
                    if full.as_ref().is_none_or(|(fk, _)| *fk != k) {
                        full = Some((k, build_profile(scheme, &pc, best.s, plan.n_trials, plan.seed, k_max)?));
                    }
                    let profile = &full.as_ref().expect("just built").1;
                    let Some(a) = achieve(profile, &pc, budget, k_max)? else {
                        let sk = skip("the full trial set certifies no message size".into());
                        on_event(SweepEvent::Skipped(&sk));
                        out.skipped.push(sk);
                        continue;
                    };
                    let point_cfg = pc.clone().with_info_bits(a.bits());
                    let p = match a {
                        Achieved::Fbl { v, bound, .. } => {
                            let e = FblEvaluation::new(&point_cfg, v, bound, best.s, plan.n_trials);
                            CurvePoint::from_fbl(&point_cfg, &e, plan.seed)
                        }
                        Achieved::Harq { gamma, stats, .. } => {
                            let e = HarqEvaluation::new(&point_cfg, best.s, gamma, &stats);
                            CurvePoint::from_harq(&point_cfg, &e, plan.seed)
                        }
                    };
                    // a larger budget that changes nothing repeats the previous point
                    if last.as_ref() == Some(&p) {
                        continue;
                    }
                    on_event(SweepEvent::Point(&p));
                    out.points.push(p.clone());
                    last = Some(p);
                }
            }
        }
    }
    Ok(out)
}

/// FBL and HARQ latency distributions at one operating point.
#[derive(Debug, Clone, PartialEq)]
pub struct CdfComparison {
    pub fbl: CurvePoint,
    pub harq: CurvePoint,
    /// `(t, P[latency ≤ t])` at `t = 2·j·d·T_o`.
    pub harq_cdf: Vec<(f64, f64)>,
    /// The FBL latency, where its distribution steps from 0 to 1.
    pub fbl_step_s: f64,
    /// `P[HARQ latency > FBL latency]`.
    pub crossing_probability: f64,
}

/// Latency CDFs for every `(L, k)` of the plan, SNR ascending within each.
pub fn latency_cdf_curve(plan: &SweepPlan) -> Result<(Vec<CdfComparison>, Vec<SkippedPoint>)> {
    let mut out = Vec::new();
    let mut skipped = Vec::new();
    latency_cdf_curve_with(plan, |ev| match ev {
        CdfEvent::Comparison(c) => out.push(c.clone()),
        CdfEvent::Skipped(s) => skipped.push(s.clone()),
    })?;
    Ok((out, skipped))
}

#[derive(Debug, Clone, PartialEq)]
pub enum CdfEvent<'a> {
    Comparison(&'a CdfComparison),
    Skipped(&'a SkippedPoint),
}

pub fn latency_cdf_curve_with(plan: &SweepPlan, mut on_event: impl FnMut(CdfEvent<'_>)) -> Result<()> {
    plan.validate()?;
    for &l in &plan.branch_values {
        for &k in &plan.info_bits_values {
            let mut warm_f = None;
            let mut warm_h = None;
            for &db in &plan.sorted_snr_db() {
                let cfg = plan.point_config(l, db, k);
                let fbl = fbl::min_slots_from(&cfg, &plan.space, plan.n_trials, plan.seed, warm_f);
                let harq = harq::optimize_rounds_from(&cfg, &plan.space, plan.n_trials, plan.seed, warm_h);
                match (fbl, harq) {
                    (Ok((f, gf)), Ok((h, gh))) => {
                        warm_f = Some(gf);
                        warm_h = Some(gh);
                        on_event(CdfEvent::Comparison(&compare(&cfg, &f, &h, plan.seed)));
                    }
                    (f, h) => {
                        for (scheme, r) in [(Scheme::Fbl, f.err()), (Scheme::Harq, h.err())] {
                            if let Some(e) = r {
                                let reason = infeasible_reason(&e).ok_or(e)?;
                                on_event(CdfEvent::Skipped(&SkippedPoint {
                                    scheme,
                                    branches: l,
                                    snr_db: db,
                                    info_bits: k,
                                    latency_budget_s: None,
                                    reason,
                                }));
                            }
                        }
                    }
                }
            }
        }
    }
    Ok(())
}

fn compare(cfg: &SystemConfig, f: &FblEvaluation, h: &HarqEvaluation, seed: u64) -> CdfComparison {
    let crossing = h
        .round_pmf
        .iter()
        .enumerate()
        .filter(|(j, _)| 2 * (j + 1) > f.v_star)
        .map(|(_, p)| p)
        .sum();
    CdfComparison {
        fbl: CurvePoint::from_fbl(&cfg.clone().with_pilots(f.n_p_used), f, seed),
        harq: CurvePoint::from_harq(&cfg.clone().with_pilots(h.n_p_used), h, seed),
        harq_cdf: h.latency_cdf.clone(),
        fbl_step_s: f.latency_s,
        crossing_probability: crossing,
    }
}

/// E_b in dB recomputed from a point's identities.
pub fn energy_db_identity(p: &CurvePoint, base: &SystemConfig) -> f64 {
    linear_to_db(p.config(base).snr * p.branches as f64 * base.coherence_symbols() as f64 * rounds_used(p, base) / p.info_bits as f64)
}

/// Slots (FBL) or average rounds (HARQ) implied by a point's latency.
pub fn rounds_used(p: &CurvePoint, base: &SystemConfig) -> f64 {
    match p.scheme {
        Scheme::Fbl => p.v_or_gamma,
        Scheme::Harq => p.avg_latency_s / (2.0 * base.slot_duration_s()),
    }
}
