//! Scaled nearest-neighbour metric and the generalized information density.
//!
//! For a block with channel estimate `ĥ`, the density of a candidate `x` is
//!
//! ```text
//! i_s(x, y) = Σ_i [ -s|y_i - ĥ x_i|² - ln E_X̄ exp(-s|y_i - ĥ X̄|²) ]
//! ```
//!
//! with the expectation taken exactly over the four QPSK points. All values
//! are in nats.

use std::f64::consts::LN_2;

use num_complex::Complex64;

use crate::channel::{qpsk_constellation, BlockDraw, BlockRealization, ChannelParams, CodewordLaw};
use crate::config::SystemConfig;
use crate::error::{Error, Result};
use crate::rng::Streams;
use crate::stats::{map_trials, Estimate};

/// Exponent applied to the decoding metric.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct SnnParam(f64);

impl SnnParam {
    pub fn new(s: f64) -> Result<Self> {
        if s.is_finite() && s >= 0.0 {
            Ok(SnnParam(s))
        } else {
            Err(Error::config("s", format!("must be finite and >= 0 (got {s})")))
        }
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

/// `ln((1/n) Σ exp(v))` without overflow.
pub fn log_mean_exp(values: &[f64]) -> f64 {
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !max.is_finite() {
        return max;
    }
    let sum: f64 = values.iter().map(|v| (v - max).exp()).sum();
    max + (sum / values.len() as f64).ln()
}

/// Density of one block, evaluated directly from its stored symbols.
pub fn block_density(block: &BlockRealization, s: SnnParam) -> f64 {
    let s = s.value();
    let points = qpsk_constellation(block.snr);
    let h = block.estimate;
    block
        .symbols
        .iter()
        .zip(&block.outputs)
        .map(|(x, y)| {
            let metric = |c: &Complex64| -s * (y - h * c).norm_sqr();
            let others = points.map(|c| metric(&c));
            metric(x) - log_mean_exp(&others)
        })
        .sum()
}

/// Density increment of one round: the sum over its `branches` blocks.
pub fn round_increment(blocks: &[BlockRealization], s: SnnParam, branches: usize) -> Result<f64> {
    if blocks.len() != branches {
        return Err(Error::contract(format!(
            "round needs exactly {branches} blocks, got {}",
            blocks.len()
        )));
    }
    Ok(blocks.iter().map(|b| block_density(b, s)).sum())
}

#[inline]
fn ln_cosh_pair(p: f64, q: f64) -> f64 {
    let (p, q) = (p.abs(), q.abs());
    p + q + ((1.0 + (-2.0 * p).exp()) * (1.0 + (-2.0 * q).exp())).ln() - 2.0 * LN_2
}

/// QPSK-specialized form of the per-symbol density.
///
/// With `c = conj(y)·ĥ` the common `|y|² + snr|ĥ|²` term cancels and the
/// four-point average factors into `cosh(κ·Re c)·cosh(κ·Im c)`, `κ = s√(2·snr)`.
#[derive(Debug, Clone, Copy)]
pub(crate) struct QpskMetric {
    scale: f64,
}

impl QpskMetric {
    pub fn new(snr: f64, s: f64) -> Self {
        QpskMetric { scale: s * (2.0 * snr).sqrt() }
    }

    #[inline]
    pub fn symbol(&self, estimate: Complex64, signs: (f64, f64), y: Complex64) -> f64 {
        if self.scale == 0.0 {
            return 0.0;
        }
        let c = y.conj() * estimate;
        let (p, q) = (self.scale * c.re, self.scale * c.im);
        p * signs.0 - q * signs.1 - ln_cosh_pair(p, q)
    }

    /// `ln E_X̄ exp(2s·Re(c·X̄))`, the log partition term of one symbol.
    #[inline]
    pub fn log_partition(&self, c: Complex64) -> f64 {
        if self.scale == 0.0 {
            return 0.0;
        }
        ln_cosh_pair(self.scale * c.re, self.scale * c.im)
    }
}

/// Streams per-block densities for a configuration without materializing blocks.
#[derive(Debug, Clone)]
pub(crate) struct DensitySampler {
    streams: Streams,
    params: ChannelParams,
    metric: QpskMetric,
    branches: usize,
}

impl DensitySampler {
    pub fn new(cfg: &SystemConfig, s: SnnParam, seed: u64) -> Self {
        DensitySampler {
            streams: Streams::new(seed),
            params: ChannelParams::new(cfg),
            metric: QpskMetric::new(cfg.snr, s.value()),
            branches: cfg.branches,
        }
    }

    pub fn block(&self, trial: u64, block: u32, law: CodewordLaw) -> f64 {
        let mut rng = self.streams.block(trial, block);
        let draw = BlockDraw::begin(&self.params, &mut rng);
        let mut acc = 0.0;
        for _ in 0..self.params.data_symbols {
            let (signs, y) = draw.symbol(&self.params, law, &mut rng);
            acc += self.metric.symbol(draw.estimate, signs, y);
        }
        acc
    }

    /// Round `round` (0-based) covers blocks `round·L .. round·L + L`.
    pub fn round(&self, trial: u64, round: usize, law: CodewordLaw) -> f64 {
        let first = (round * self.branches) as u32;
        (0..self.branches as u32).map(|k| self.block(trial, first + k, law)).sum()
    }
}

/// Mean block density under `law`, one block per trial.
pub fn mean_block_density(
    cfg: &SystemConfig,
    s: SnnParam,
    law: CodewordLaw,
    n_trials: usize,
    seed: u64,
) -> Result<Estimate> {
    cfg.validate()?;
    if n_trials == 0 {
        return Err(Error::contract("n_trials must be at least 1"));
    }
    let sampler = DensitySampler::new(cfg, s, seed);
    let samples = map_trials(n_trials, |t| sampler.block(t, 0, law));
    Ok(Estimate::from_samples(&samples))
}

/// Cumulant generating function of the per-round mismatched density,
///
/// ```text
/// κ(β) = L · ln E_y[ E[q(X̄,y)^{βs} | y] / E[q(X̄,y)^s | y]^β ],
/// ```
///
/// estimated from `n_trials` blocks. The inner expectations are exact.
/// The standard error is propagated through the logarithm (delta method).
pub fn kappa(beta: f64, cfg: &SystemConfig, s: SnnParam, n_trials: usize, seed: u64) -> Result<Estimate> {
    cfg.validate()?;
    if n_trials == 0 {
        return Err(Error::contract("n_trials must be at least 1"));
    }
    if !(beta.is_finite() && beta >= 0.0) {
        return Err(Error::contract(format!("beta must be finite and >= 0 (got {beta})")));
    }
    let params = ChannelParams::new(cfg);
    let streams = Streams::new(seed);
    let base = QpskMetric::new(cfg.snr, s.value());
    let tilted = QpskMetric::new(cfg.snr, beta * s.value());
    let log_ratio = map_trials(n_trials, |t| {
        let mut rng = streams.block(t, 0);
        let draw = BlockDraw::begin(&params, &mut rng);
        let mut acc = 0.0;
        for _ in 0..params.data_symbols {
            let (_, y) = draw.symbol(&params, CodewordLaw::Transmitted, &mut rng);
            let c = y.conj() * draw.estimate;
            acc += tilted.log_partition(c) - beta * base.log_partition(c);
        }
        acc
    });
    let shift = log_ratio.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let scaled: Vec<f64> = log_ratio.iter().map(|r| (r - shift).exp()).collect();
    let m = Estimate::from_samples(&scaled);
    let l = cfg.branches as f64;
    Ok(Estimate {
        mean: l * (shift + m.mean.ln()),
        std_err: l * m.std_err / m.mean,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::sample_block;
    use approx::assert_relative_eq;

    fn s(v: f64) -> SnnParam {
        SnnParam::new(v).unwrap()
    }

    #[test]
    fn rejects_negative_scale() {
        assert!(SnnParam::new(-0.1).is_err());
        assert!(SnnParam::new(f64::NAN).is_err());
    }

    #[test]
    fn log_mean_exp_handles_extremes() {
        assert_eq!(log_mean_exp(&[0.0, 0.0]), 0.0);
        assert_relative_eq!(log_mean_exp(&[1e4, 1e4 - 1.0]), 1e4 + ((1.0 + (-1f64).exp()) / 2.0).ln());
        assert_eq!(log_mean_exp(&[f64::NEG_INFINITY; 3]), f64::NEG_INFINITY);
        assert!(log_mean_exp(&[-1e6, -1e6 + 3.0]).is_finite());
    }

    #[test]
    fn zero_scale_is_identically_zero() {
        let cfg = SystemConfig::default();
        let streams = Streams::new(3);
        for t in 0..20 {
            let b = sample_block(&cfg, CodewordLaw::Transmitted, &mut streams.block(t, 0)).unwrap();
            assert_eq!(block_density(&b, s(0.0)), 0.0);
        }
        let sampler = DensitySampler::new(&cfg, s(0.0), 3);
        assert_eq!(sampler.block(0, 0, CodewordLaw::Mismatched), 0.0);
    }

    #[test]
    fn zero_estimate_gives_zero_density() {
        let cfg = SystemConfig::default();
        let mut b = sample_block(&cfg, CodewordLaw::Transmitted, &mut Streams::new(1).block(0, 0)).unwrap();
        b.estimate = Complex64::new(0.0, 0.0);
        assert_eq!(block_density(&b, s(1.3)), 0.0);
        assert_eq!(QpskMetric::new(cfg.snr, 1.3).symbol(b.estimate, (1.0, -1.0), b.outputs[0]), 0.0);
    }

    #[test]
    fn streamed_kernel_matches_literal_form() {
        for (snr_db, sv, law) in [
            (-5.0, 0.7, CodewordLaw::Transmitted),
            (10.0, 1.5, CodewordLaw::Mismatched),
            (0.0, 0.2, CodewordLaw::Transmitted),
        ] {
            let cfg = SystemConfig::default().with_snr_db(snr_db).with_pilots(4);
            let sampler = DensitySampler::new(&cfg, s(sv), 11);
            let streams = Streams::new(11);
            for t in 0..10 {
                let b = sample_block(&cfg, law, &mut streams.block(t, 2)).unwrap();
                let literal = block_density(&b, s(sv));
                let fast = sampler.block(t, 2, law);
                assert_relative_eq!(literal, fast, epsilon = 1e-9, max_relative = 1e-10);
            }
        }
    }

    #[test]
    fn round_increment_adds_blocks() {
        let cfg = SystemConfig::default().with_branches(2);
        let streams = Streams::new(2);
        let blocks: Vec<_> = (0..2)
            .map(|k| sample_block(&cfg, CodewordLaw::Transmitted, &mut streams.block(0, k)).unwrap())
            .collect();
        let a = block_density(&blocks[0], s(0.8));
        let b = block_density(&blocks[1], s(0.8));
        assert_eq!(round_increment(&blocks, s(0.8), 2).unwrap(), a + b);
        assert_eq!(round_increment(&blocks, s(0.0), 2).unwrap(), 0.0);
        assert!(matches!(round_increment(&blocks[..1], s(0.8), 2), Err(Error::Contract(_))));
    }

    #[test]
    fn stays_finite_at_extreme_snr_and_scale() {
        let cfg = SystemConfig::default().with_snr_db(40.0);
        let streams = Streams::new(9);
        for t in 0..20 {
            let b = sample_block(&cfg, CodewordLaw::Mismatched, &mut streams.block(t, 0)).unwrap();
            assert!(block_density(&b, s(100.0)).is_finite());
        }
        let sampler = DensitySampler::new(&cfg, s(100.0), 9);
        assert!(sampler.block(0, 0, CodewordLaw::Mismatched).is_finite());
    }

    #[test]
    fn kappa_trivial_roots() {
        let cfg = SystemConfig::default();
        assert_eq!(kappa(0.0, &cfg, s(1.0), 10, 0).unwrap().mean, 0.0);
        assert_eq!(kappa(1.0, &cfg, s(1.0), 10, 0).unwrap().mean, 0.0);
        assert!(kappa(0.5, &cfg, s(1.0), 0, 0).is_err());
    }

    #[test]
    fn kappa_is_negative_inside_unit_interval() {
        let cfg = SystemConfig::default().with_snr_db(0.0);
        let k = kappa(0.5, &cfg, s(1.0), 4000, 1).unwrap();
        assert!(k.upper(3.0) < 0.0, "{k:?}");
    }
}
