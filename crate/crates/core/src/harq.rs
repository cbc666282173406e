//! HARQ with incremental redundancy and at most `n_max` rounds.
//!
//! The receiver stops after the first round `τ` in which the accumulated
//! density of the transmitted codeword reaches the threshold `γ`. With the
//! Wald relaxation the error probability is bounded by
//!
//! ```text
//! ε ≤ (M - 1)·exp(-γ) + P[τ > n_max],
//! ```
//!
//! and the average number of rounds by `E[min(τ, n_max)]`. Each round costs a
//! data slot and a feedback slot.

use crate::channel::CodewordLaw;
use crate::config::{linear_to_db, log_competitors, SystemConfig};
use crate::density::{DensitySampler, SnnParam};
use crate::error::{Error, Result, Shortfall};
use crate::fbl::FEASIBILITY_SIGMAS;
use crate::search::{optimize, Candidate, GridPoint, SearchSpace};
use crate::stats::{map_trials, Estimate};

/// Headroom above `ln((M-1)/ε)` at which searches stop extending trajectories.
pub const CEILING_HEADROOM: f64 = 10.0;

/// Per-round increments of one trial and the running maxima of their prefix sums.
#[derive(Debug, Clone, PartialEq)]
pub struct TrialTrajectory {
    increments: Vec<f64>,
    prefix_max: Vec<f64>,
}

impl TrialTrajectory {
    pub fn from_increments(increments: Vec<f64>) -> Self {
        let mut sum = 0.0;
        let mut max = f64::NEG_INFINITY;
        let prefix_max = increments
            .iter()
            .map(|z| {
                sum += z;
                max = max.max(sum);
                max
            })
            .collect();
        TrialTrajectory { increments, prefix_max }
    }

    pub fn increments(&self) -> &[f64] {
        &self.increments
    }

    pub fn prefix_max(&self) -> &[f64] {
        &self.prefix_max
    }

    pub fn len(&self) -> usize {
        self.increments.len()
    }

    pub fn is_empty(&self) -> bool {
        self.increments.is_empty()
    }

    /// First round (1-based) whose accumulated density reaches `gamma`.
    pub fn stopping_round(&self, gamma: f64) -> Option<usize> {
        // prefix_max is sorted, so the crossing is a partition point
        let idx = self.prefix_max.partition_point(|&m| m < gamma);
        (idx < self.prefix_max.len()).then_some(idx + 1)
    }

    fn peak(&self) -> f64 {
        self.prefix_max.last().copied().unwrap_or(f64::NEG_INFINITY)
    }
}

/// Trajectories of many trials sharing one configuration.
///
/// With a finite `ceiling` a trajectory ends early once its running maximum
/// reaches the ceiling; statistics are then exact for every `γ ≤ ceiling`.
#[derive(Debug, Clone)]
pub struct TrajectorySet {
    pub trajectories: Vec<TrialTrajectory>,
    pub max_rounds: usize,
    pub ceiling: f64,
    pub law: CodewordLaw,
}

impl TrajectorySet {
    pub fn len(&self) -> usize {
        self.trajectories.len()
    }

    pub fn is_empty(&self) -> bool {
        self.trajectories.is_empty()
    }

    fn check(&self, gamma: f64) -> Result<()> {
        if self.trajectories.is_empty() {
            return Err(Error::contract("trajectory set is empty"));
        }
        if gamma > self.ceiling {
            return Err(Error::Censored { ceiling: self.ceiling });
        }
        Ok(())
    }

    /// Final running maxima, with trajectories cut at the ceiling mapped to `+inf`.
    fn peaks(&self) -> Vec<f64> {
        self.trajectories
            .iter()
            .map(|t| if t.len() < self.max_rounds { f64::INFINITY } else { t.peak() })
            .collect()
    }
}

/// Draws `n_trials` trajectories of up to `n_max` rounds under `law`.
pub fn sample_trajectories(
    cfg: &SystemConfig,
    s: SnnParam,
    n_trials: usize,
    seed: u64,
    law: CodewordLaw,
    ceiling: f64,
) -> Result<TrajectorySet> {
    cfg.validate()?;
    if n_trials == 0 {
        return Err(Error::contract("n_trials must be at least 1"));
    }
    if ceiling.is_nan() {
        return Err(Error::contract("ceiling must not be NaN"));
    }
    let n_max = cfg.max_rounds();
    let sampler = DensitySampler::new(cfg, s, seed);
    let trajectories = map_trials(n_trials, |t| {
        let mut increments = Vec::with_capacity(n_max);
        let mut sum = 0.0;
        for r in 0..n_max {
            let z = sampler.round(t, r, law);
            increments.push(z);
            sum += z;
            if sum >= ceiling {
                break;
            }
        }
        TrialTrajectory::from_increments(increments)
    });
    Ok(TrajectorySet { trajectories, max_rounds: n_max, ceiling, law })
}

#[derive(Debug, Clone, PartialEq)]
pub struct StoppingStats {
    /// `P[τ > n_max]`.
    pub timeout: Estimate,
    /// `E[min(τ, n_max)]`.
    pub mean_rounds: Estimate,
    /// Number of trials with `min(τ, n_max) = j`, at index `j - 1`.
    pub round_counts: Vec<usize>,
}

impl StoppingStats {
    /// `P[min(τ, n_max) ≤ j]` for `j = 1..=n_max`; the last entry is exactly 1.
    pub fn cdf(&self) -> Vec<f64> {
        let n: usize = self.round_counts.iter().sum();
        let mut acc = 0;
        self.round_counts
            .iter()
            .map(|c| {
                acc += c;
                acc as f64 / n as f64
            })
            .collect()
    }
}

pub fn stopping_stats(set: &TrajectorySet, gamma: f64) -> Result<StoppingStats> {
    set.check(gamma)?;
    let n_max = set.max_rounds;
    let mut round_counts = vec![0usize; n_max];
    let mut timeouts = 0;
    for t in &set.trajectories {
        match t.stopping_round(gamma) {
            Some(r) => round_counts[r - 1] += 1,
            None => {
                timeouts += 1;
                round_counts[n_max - 1] += 1;
            }
        }
    }
    let n = set.len();
    let (mut s1, mut s2) = (0.0, 0.0);
    for (j, &c) in round_counts.iter().enumerate() {
        let r = (j + 1) as f64;
        s1 += r * c as f64;
        s2 += r * r * c as f64;
    }
    let mean = s1 / n as f64;
    let std_err = if n > 1 {
        let var = ((s2 - s1 * mean) / (n - 1) as f64).max(0.0);
        (var / n as f64).sqrt()
    } else {
        0.0
    };
    Ok(StoppingStats {
        timeout: Estimate::proportion(timeouts, n),
        mean_rounds: Estimate { mean, std_err },
        round_counts,
    })
}

/// `min(1, (2^bits - 1)·exp(-gamma))`, formed in the log domain.
pub fn undetected_bound(bits: u32, gamma: f64) -> f64 {
    if bits == 0 {
        return 0.0;
    }
    (log_competitors(bits) - gamma).min(0.0).exp()
}

/// Fraction of (mismatched) trajectories crossing `gamma` within `n_max`
/// rounds, together with the Wald bound `min(1, exp(-gamma))`.
pub fn empirical_wald_check(set: &TrajectorySet, gamma: f64) -> Result<(Estimate, f64)> {
    set.check(gamma)?;
    let hits = set.trajectories.iter().filter(|t| t.stopping_round(gamma).is_some()).count();
    Ok((Estimate::proportion(hits, set.len()), (-gamma).min(0.0).exp()))
}

#[derive(Debug, Clone, PartialEq)]
pub struct HarqEvaluation {
    pub gamma_star: f64,
    pub ell_bound: Estimate,
    pub eps_bound: f64,
    pub undetected_term: f64,
    pub timeout_term: Estimate,
    /// `(t, P[latency ≤ t])` at `t = 2·j·d·T_o`, `j = 1..=n_max`.
    pub latency_cdf: Vec<(f64, f64)>,
    /// `P[min(τ, n_max) = j]` at index `j - 1`.
    pub round_pmf: Vec<f64>,
    pub avg_latency_s: f64,
    pub max_latency_s: f64,
    pub energy_per_bit: f64,
    pub rate_bits_per_use: f64,
    pub s_used: SnnParam,
    pub n_p_used: usize,
    pub n_trials: usize,
}

impl HarqEvaluation {
    pub(crate) fn new(cfg: &SystemConfig, s: SnnParam, gamma: f64, stats: &StoppingStats) -> Self {
        let round_s = 2.0 * cfg.slot_duration_s();
        let n: usize = stats.round_counts.iter().sum();
        let ell = stats.mean_rounds.mean;
        let per_round = cfg.symbols_per_slot() as f64;
        let k = cfg.info_bits as f64;
        let undetected = undetected_bound(cfg.info_bits, gamma);
        HarqEvaluation {
            gamma_star: gamma,
            ell_bound: stats.mean_rounds,
            eps_bound: undetected + stats.timeout.mean,
            undetected_term: undetected,
            timeout_term: stats.timeout,
            latency_cdf: stats
                .cdf()
                .into_iter()
                .enumerate()
                .map(|(j, p)| ((j + 1) as f64 * round_s, p))
                .collect(),
            round_pmf: stats.round_counts.iter().map(|&c| c as f64 / n as f64).collect(),
            avg_latency_s: ell * round_s,
            max_latency_s: cfg.max_rounds() as f64 * round_s,
            energy_per_bit: cfg.snr * per_round * ell / k,
            rate_bits_per_use: k / (ell * per_round),
            s_used: s,
            n_p_used: cfg.pilots,
            n_trials: n,
        }
    }

    pub fn energy_per_bit_db(&self) -> f64 {
        linear_to_db(self.energy_per_bit)
    }
}

/// Sorted final running maxima, reusable for thresholds at any message size.
#[derive(Debug, Clone)]
pub(crate) struct PeakProfile {
    peaks: Vec<f64>,
    ceiling: f64,
}

impl PeakProfile {
    pub fn new(set: &TrajectorySet) -> Result<Self> {
        set.check(f64::NEG_INFINITY)?;
        let mut peaks = set.peaks();
        peaks.sort_by(f64::total_cmp);
        Ok(PeakProfile { peaks, ceiling: set.ceiling })
    }

    /// The `⌊eps·N⌋`-th smallest peak: a threshold at or below it times out
    /// on at most a fraction `eps` of the trials.
    pub fn low_quantile(&self, eps: f64) -> f64 {
        let n = self.peaks.len();
        self.peaks[((eps * n as f64).floor() as usize).min(n - 1)]
    }

    /// Smallest `γ` (to within 1e-3 nats) with
    /// `(M-1)e^{-γ} + P̂[τ > n_max] + 2σ ≤ eps`.
    ///
    /// With `j` trials timing out the margin is constant for `γ` between the
    /// `j`-th and `(j+1)`-th smallest peak, so each such interval is solved in
    /// closed form.
    pub fn threshold(&self, bits: u32, eps: f64) -> Result<f64> {
        if eps >= 1.0 {
            return Ok(f64::NEG_INFINITY);
        }
        let lm1 = log_competitors(bits);
        let n = self.peaks.len();
        let nf = n as f64;
        let mut best: Option<Shortfall> = None;
        for j in 0..=n {
            let p = j as f64 / nf;
            let margin = p + FEASIBILITY_SIGMAS * (p * (1.0 - p) / nf).sqrt();
            let room = eps - margin;
            if p >= eps || room <= 0.0 {
                break;
            }
            let lo = if j == 0 { f64::NEG_INFINITY } else { self.peaks[j - 1] };
            let mut hi = if j == n { f64::INFINITY } else { self.peaks[j] };
            if lo >= hi {
                continue;
            }
            let censored = hi == f64::INFINITY && j < n;
            if censored {
                hi = self.ceiling;
            }
            let gmin = lm1 - room.ln();
            if gmin <= hi {
                let gamma = if gmin > lo {
                    (gmin + 1e-9).min(hi)
                } else if hi.is_finite() {
                    lo + (0.5 * (hi - lo)).min(1e-3)
                } else {
                    lo + 1e-3
                };
                if undetected_bound(bits, gamma) + margin <= eps {
                    return Ok(gamma);
                }
            }
            if censored {
                return Err(Error::Censored { ceiling: self.ceiling });
            }
            if hi.is_finite() {
                let total = undetected_bound(bits, hi) + margin;
                if best.as_ref().is_none_or(|b| total < b.best_bound) {
                    best = Some(Shortfall { at: hi, best_bound: total, target: eps });
                }
            }
        }
        Err(Error::Infeasible(best.unwrap_or(Shortfall {
            at: f64::INFINITY,
            best_bound: 1.0,
            target: eps,
        })))
    }
}

/// Trajectories of one candidate, queried at many message sizes.
#[derive(Debug, Clone)]
pub(crate) struct RoundsProfile {
    set: TrajectorySet,
    peaks: PeakProfile,
}

/// Threshold and stopping statistics at one message size.
pub(crate) type Operating = (f64, StoppingStats);

impl RoundsProfile {
    pub fn new(cfg: &SystemConfig, s: SnnParam, n_trials: usize, seed: u64, max_bits: u32) -> Result<Self> {
        let ceiling = log_competitors(max_bits) - cfg.eps_target.ln() + CEILING_HEADROOM;
        let set = sample_trajectories(cfg, s, n_trials, seed, CodewordLaw::Transmitted, ceiling)?;
        let peaks = PeakProfile::new(&set)?;
        Ok(RoundsProfile { set, peaks })
    }

    pub fn at(&self, bits: u32, eps: f64) -> Result<Option<Operating>> {
        match self.peaks.threshold(bits, eps) {
            Ok(gamma) => Ok(Some((gamma, stopping_stats(&self.set, gamma)?))),
            Err(Error::Infeasible(_)) => Ok(None),
            Err(e) => Err(e),
        }
    }

    /// Largest `k ≤ max_bits` meeting `eps` with `E[min(τ, n_max)] ≤ max_rounds`.
    pub fn max_bits(&self, eps: f64, max_rounds: f64, max_bits: u32) -> Result<Option<(u32, Operating)>> {
        let feasible = |k: u32| -> Result<Option<Operating>> {
            Ok(self.at(k, eps)?.filter(|(_, st)| st.mean_rounds.mean <= max_rounds))
        };
        let Some(first) = feasible(1)? else {
            return Ok(None);
        };
        let mut best = (1, first);
        let (mut lo, mut hi) = (1, max_bits + 1);
        while hi - lo > 1 {
            let mid = lo + (hi - lo) / 2;
            match feasible(mid)? {
                Some(op) => {
                    lo = mid;
                    best = (mid, op);
                }
                None => hi = mid,
            }
        }
        Ok(Some(best))
    }
}

/// Smallest threshold meeting `cfg.eps_target` on `set`, and the resulting bounds.
pub fn find_threshold(cfg: &SystemConfig, s: SnnParam, set: &TrajectorySet) -> Result<HarqEvaluation> {
    cfg.validate()?;
    if set.law != CodewordLaw::Transmitted {
        return Err(Error::contract("thresholds need transmitted-codeword trajectories"));
    }
    if set.max_rounds != cfg.max_rounds() {
        return Err(Error::contract("trajectory length does not match the configuration"));
    }
    let gamma = PeakProfile::new(set)?.threshold(cfg.info_bits, cfg.eps_target)?;
    let stats = stopping_stats(set, gamma)?;
    Ok(HarqEvaluation::new(cfg, s, gamma, &stats))
}

/// Samples censored trajectories and thresholds them, resampling in full if
/// the threshold lies above the ceiling.
pub fn evaluate(cfg: &SystemConfig, s: SnnParam, n_trials: usize, seed: u64) -> Result<HarqEvaluation> {
    sample_and_threshold(cfg, s, n_trials, seed)?.1
}

/// [`evaluate`], also returning the trajectories the outcome was computed on.
fn sample_and_threshold(
    cfg: &SystemConfig,
    s: SnnParam,
    n_trials: usize,
    seed: u64,
) -> Result<(TrajectorySet, Result<HarqEvaluation>)> {
    let ceiling = cfg.log_competitors() - cfg.eps_target.ln() + CEILING_HEADROOM;
    let set = sample_trajectories(cfg, s, n_trials, seed, CodewordLaw::Transmitted, ceiling)?;
    match find_threshold(cfg, s, &set) {
        Err(Error::Censored { .. }) => {
            let full = sample_trajectories(cfg, s, n_trials, seed, CodewordLaw::Transmitted, f64::INFINITY)?;
            let result = find_threshold(cfg, s, &full);
            Ok((full, result))
        }
        other => Ok((set, other)),
    }
}

/// Minimizes the average number of rounds over `space`.
pub fn optimize_rounds(cfg: &SystemConfig, space: &SearchSpace, n_trials: usize, seed: u64) -> Result<HarqEvaluation> {
    optimize_rounds_from(cfg, space, n_trials, seed, None).map(|(e, _)| e)
}

/// As [`optimize_rounds`], starting the parameter search at `warm` when given.
pub fn optimize_rounds_from(
    cfg: &SystemConfig,
    space: &SearchSpace,
    n_trials: usize,
    seed: u64,
    warm: Option<GridPoint>,
) -> Result<(HarqEvaluation, GridPoint)> {
    cfg.validate()?;
    space.validate(cfg.coherence_symbols())?;
    if n_trials == 0 {
        return Err(Error::contract("n_trials must be at least 1"));
    }
    let search_n = space.search_trials.min(n_trials);
    // Feasible candidates rank by average rounds, the rest by how close they
    // came, so the search can climb out of an infeasible start.
    let mut shortfall: Option<Shortfall> = None;
    let found = optimize(space, warm, |c: Candidate| {
        let pc = cfg.clone().with_pilots(c.pilots);
        let (set, result) = sample_and_threshold(&pc, c.s, search_n, seed)?;
        match result {
            Ok(e) => Ok((0u8, e.ell_bound.mean, 0.0)),
            Err(Error::Infeasible(sf)) => {
                let needed = pc.log_competitors() - pc.eps_target.ln();
                let deficit = needed - PeakProfile::new(&set)?.low_quantile(pc.eps_target);
                let score = (1u8, sf.best_bound, deficit);
                if shortfall.as_ref().is_none_or(|b| sf.best_bound < b.best_bound) {
                    shortfall = Some(sf);
                }
                Ok(score)
            }
            Err(e) => Err(e),
        }
    })?;
    if found.score.0 > 0 {
        return Err(Error::Infeasible(shortfall.expect("every candidate failed")));
    }
    let best = found.best;
    let e = evaluate(&cfg.clone().with_pilots(best.pilots), best.s, n_trials, seed)?;
    Ok((e, found.grid_point))
}
