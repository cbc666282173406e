//! Fixed-blocklength transmission without feedback.
//!
//! The error probability of a code spanning `v` slots is bounded by the
//! random-coding union bound with parameter `s`,
//!
//! ```text
//! ε ≤ E[ exp(-[ i_s^v(x^v, y^v) - ln(M - 1) ]^+) ],
//! ```
//!
//! where the accumulated density runs over the `v·L` blocks of the codeword.

use crate::channel::CodewordLaw;
use crate::config::{linear_to_db, log_competitors, SystemConfig};
use crate::density::{DensitySampler, SnnParam};
use crate::error::{Error, Result, Shortfall};
use crate::search::{optimize, Candidate, GridPoint, SearchSpace};
use crate::stats::{map_trials, Estimate};

/// Standard errors added to a Monte Carlo bound before it may certify a target.
pub const FEASIBILITY_SIGMAS: f64 = 2.0;

/// One summand of the bound: `exp(-[density - log_competitors]^+)`, in `[0, 1]`.
pub fn rcus_summand(density: f64, log_competitors: f64) -> f64 {
    (-(density - log_competitors).max(0.0)).exp()
}

/// Accumulated transmitted-codeword densities, extended one slot at a time.
///
/// Trial `t` of slot `v` always uses the same channel draws, so banks built
/// with the same seed share common random numbers across `v`, `s` and `n_p`.
#[derive(Debug, Clone)]
pub struct DensityBank {
    sampler: DensitySampler,
    sums: Vec<f64>,
    slots: usize,
}

impl DensityBank {
    pub fn new(cfg: &SystemConfig, s: SnnParam, n_trials: usize, seed: u64) -> Result<Self> {
        cfg.validate()?;
        if n_trials == 0 {
            return Err(Error::contract("n_trials must be at least 1"));
        }
        Ok(DensityBank {
            sampler: DensitySampler::new(cfg, s, seed),
            sums: vec![0.0; n_trials],
            slots: 0,
        })
    }

    /// Adds the next slot's increment to every trial.
    pub fn advance(&mut self) {
        let slot = self.slots;
        let sampler = &self.sampler;
        let inc = map_trials(self.sums.len(), |t| sampler.round(t, slot, CodewordLaw::Transmitted));
        for (a, z) in self.sums.iter_mut().zip(inc) {
            *a += z;
        }
        self.slots += 1;
    }

    pub fn slots(&self) -> usize {
        self.slots
    }

    /// Accumulated density of each trial over the slots added so far.
    pub fn densities(&self) -> &[f64] {
        &self.sums
    }

    pub fn bound(&self, log_competitors: f64) -> Estimate {
        let summands: Vec<f64> = self.sums.iter().map(|&a| rcus_summand(a, log_competitors)).collect();
        Estimate::from_samples(&summands)
    }
}

/// Accumulated densities of every trial after each slot `1..=n_max`.
#[derive(Debug, Clone)]
pub(crate) struct SlotProfile {
    by_slot: Vec<Vec<f64>>,
}

impl SlotProfile {
    pub fn new(cfg: &SystemConfig, s: SnnParam, n_trials: usize, seed: u64) -> Result<Self> {
        let mut bank = DensityBank::new(cfg, s, n_trials, seed)?;
        let by_slot = (0..cfg.max_rounds())
            .map(|_| {
                bank.advance();
                bank.densities().to_vec()
            })
            .collect();
        Ok(SlotProfile { by_slot })
    }

    pub fn bound(&self, v: usize, bits: u32) -> Estimate {
        let lm1 = log_competitors(bits);
        let summands: Vec<f64> = self.by_slot[v - 1].iter().map(|&a| rcus_summand(a, lm1)).collect();
        Estimate::from_samples(&summands)
    }

    /// Largest `k ≤ max_bits` certified at `v` slots, with its bound.
    pub fn max_bits(&self, v: usize, eps: f64, max_bits: u32) -> Option<(u32, Estimate)> {
        let feasible = |k: u32| {
            let b = self.bound(v, k);
            certifies(&b, eps).then_some(b)
        };
        let mut best = feasible(1).map(|b| (1, b))?;
        let (mut lo, mut hi) = (1, max_bits + 1);
        while hi - lo > 1 {
            let mid = lo + (hi - lo) / 2;
            match feasible(mid) {
                Some(b) => {
                    lo = mid;
                    best = (mid, b);
                }
                None => hi = mid,
            }
        }
        Some(best)
    }
}

/// Monte Carlo estimate of the bound for a code spanning `v` slots.
pub fn rcus_error_bound(
    cfg: &SystemConfig,
    s: SnnParam,
    v: usize,
    n_trials: usize,
    seed: u64,
) -> Result<Estimate> {
    cfg.validate()?;
    if v == 0 || v > cfg.max_rounds() {
        return Err(Error::contract(format!("v must lie in 1..={} (got {v})", cfg.max_rounds())));
    }
    let mut bank = DensityBank::new(cfg, s, n_trials, seed)?;
    for _ in 0..v {
        bank.advance();
    }
    Ok(bank.bound(cfg.log_competitors()))
}

#[derive(Debug, Clone, PartialEq)]
pub struct FblEvaluation {
    pub v_star: usize,
    pub eps_bound: Estimate,
    pub rate_bits_per_use: f64,
    pub latency_s: f64,
    pub energy_per_bit: f64,
    pub s_used: SnnParam,
    pub n_p_used: usize,
    pub n_trials: usize,
}

impl FblEvaluation {
    pub(crate) fn new(cfg: &SystemConfig, v: usize, eps_bound: Estimate, s: SnnParam, n_trials: usize) -> Self {
        let symbols = (v * cfg.symbols_per_slot()) as f64;
        let k = cfg.info_bits as f64;
        FblEvaluation {
            v_star: v,
            eps_bound,
            rate_bits_per_use: k / symbols,
            latency_s: v as f64 * cfg.slot_duration_s(),
            energy_per_bit: cfg.snr * symbols / k,
            s_used: s,
            n_p_used: cfg.pilots,
            n_trials,
        }
    }

    pub fn energy_per_bit_db(&self) -> f64 {
        linear_to_db(self.energy_per_bit)
    }
}

fn certifies(bound: &Estimate, target: f64) -> bool {
    target >= 1.0 || bound.upper(FEASIBILITY_SIGMAS) <= target
}

/// Smallest slot count whose bound, optimized over `space`, meets the target.
pub fn min_slots(cfg: &SystemConfig, space: &SearchSpace, n_trials: usize, seed: u64) -> Result<FblEvaluation> {
    min_slots_from(cfg, space, n_trials, seed, None).map(|(e, _)| e)
}

/// As [`min_slots`], starting the parameter search at `warm` when given.
pub fn min_slots_from(
    cfg: &SystemConfig,
    space: &SearchSpace,
    n_trials: usize,
    seed: u64,
    warm: Option<GridPoint>,
) -> Result<(FblEvaluation, GridPoint)> {
    cfg.validate()?;
    space.validate(cfg.coherence_symbols())?;
    if n_trials == 0 {
        return Err(Error::contract("n_trials must be at least 1"));
    }
    let n_max = cfg.max_rounds();
    let lm1 = cfg.log_competitors();
    let eps = cfg.eps_target;
    let search_n = space.search_trials.min(n_trials);

    // Candidates are scored by (first certified v, margin bound there); a
    // candidate is abandoned once it cannot beat the best v seen so far.
    let mut cap = n_max;
    let found = optimize(space, warm, |c: Candidate| {
        let mut bank = DensityBank::new(&cfg.clone().with_pilots(c.pilots), c.s, search_n, seed)?;
        let mut last = f64::INFINITY;
        for v in 1..=cap {
            bank.advance();
            let b = bank.bound(lm1);
            last = b.upper(FEASIBILITY_SIGMAS);
            if certifies(&b, eps) {
                cap = v;
                return Ok((v, last));
            }
        }
        Ok(if cap == n_max { (n_max + 1, last) } else { (usize::MAX, f64::INFINITY) })
    })?;

    let best = found.best;
    let cfg_best = cfg.clone().with_pilots(best.pilots);
    let mut bank = DensityBank::new(&cfg_best, best.s, n_trials, seed)?;
    let mut last = None;
    for v in 1..=n_max {
        bank.advance();
        let b = bank.bound(lm1);
        if certifies(&b, eps) {
            return Ok((FblEvaluation::new(&cfg_best, v, b, best.s, n_trials), found.grid_point));
        }
        last = Some(b);
    }
    let b = last.expect("n_max >= 1");
    Err(Error::Infeasible(Shortfall {
        at: n_max as f64,
        best_bound: b.upper(FEASIBILITY_SIGMAS),
        target: eps,
    }))
}
