//! Deterministic reference values for blocks with a single data symbol.
//!
//! Conditioned on the estimate, the channel output of a block with one data
//! symbol `x` is Gaussian:
//!
//! ```text
//! ĥ ~ CN(0, 1 + σ²),   y | ĥ ~ CN(x·ĥ / (1 + σ²), 1 + snr·σ² / (1 + σ²)),
//! ```
//!
//! with `σ² = 1/(n_p·snr)`. Expectations over `(ĥ, y)` are evaluated by a
//! tensor Gauss–Hermite rule in the four real coordinates. The densities are
//! computed from the four-point definition, not from the factorized kernel
//! used by the samplers.

use std::num::NonZeroUsize;

use gauss_quad::hermite::GaussHermite;
use num_complex::Complex64;

use crate::channel::qpsk_constellation;
use crate::config::SystemConfig;
use crate::density::{log_mean_exp, SnnParam};
use crate::error::{Error, Result};

/// Nodes per real dimension used when no order is given.
pub const DEFAULT_ORDER: usize = 40;

struct Rule {
    pairs: Vec<(f64, f64)>,
}

impl Rule {
    fn new(order: usize) -> Result<Self> {
        let deg = NonZeroUsize::new(order).ok_or_else(|| Error::contract("quadrature order must be at least 1"))?;
        let gh = GaussHermite::new(deg);
        Ok(Rule { pairs: gh.as_node_weight_pairs().to_vec() })
    }

    /// `E f(Z)` for `Z ~ CN(mean, var)`.
    fn complex_gaussian(&self, mean: Complex64, var: f64, mut f: impl FnMut(Complex64) -> f64) -> f64 {
        let scale = var.sqrt();
        let mut acc = 0.0;
        for &(a, wa) in &self.pairs {
            for &(b, wb) in &self.pairs {
                acc += wa * wb * f(mean + scale * Complex64::new(a, b));
            }
        }
        acc / std::f64::consts::PI
    }
}

fn single_symbol_geometry(cfg: &SystemConfig) -> Result<(f64, f64)> {
    cfg.validate()?;
    if cfg.data_symbols() != 1 {
        return Err(Error::contract(format!(
            "quadrature needs exactly one data symbol per block (got {})",
            cfg.data_symbols()
        )));
    }
    let sigma2 = 1.0 / (cfg.pilots as f64 * cfg.snr);
    let var_h = 1.0 + sigma2;
    let var_y = 1.0 + cfg.snr * sigma2 / var_h;
    Ok((var_h, var_y))
}

/// `E[i_s(x, y)]` for one block under the transmitted-codeword law.
pub fn mean_block_density(cfg: &SystemConfig, s: SnnParam, order: usize) -> Result<f64> {
    let (var_h, var_y) = single_symbol_geometry(cfg)?;
    let rule = Rule::new(order)?;
    let points = qpsk_constellation(cfg.snr);
    let x = points[0];
    let s = s.value();
    Ok(rule.complex_gaussian(Complex64::new(0.0, 0.0), var_h, |h| {
        rule.complex_gaussian(x * h / var_h, var_y, |y| {
            let metric = |c: Complex64| -s * (y - h * c).norm_sqr();
            metric(x) - log_mean_exp(&points.map(metric))
        })
    }))
}

/// `κ(β)` for blocks with one data symbol.
pub fn kappa(beta: f64, cfg: &SystemConfig, s: SnnParam, order: usize) -> Result<f64> {
    let (var_h, var_y) = single_symbol_geometry(cfg)?;
    let rule = Rule::new(order)?;
    let points = qpsk_constellation(cfg.snr);
    let x = points[0];
    let s = s.value();
    let mean = rule.complex_gaussian(Complex64::new(0.0, 0.0), var_h, |h| {
        rule.complex_gaussian(x * h / var_h, var_y, |y| {
            let lme = |t: f64| log_mean_exp(&points.map(|c| -t * (y - h * c).norm_sqr()));
            (lme(beta * s) - beta * lme(s)).exp()
        })
    });
    Ok(cfg.branches as f64 * mean.ln())
}

/// Single-data-symbol geometry: one subcarrier pair, one pilot, one branch.
pub fn single_symbol_config(snr_db: f64) -> SystemConfig {
    SystemConfig {
        subcarriers: 2,
        ofdm_symbols: 1,
        pilots: 1,
        branches: 1,
        available_branches: 1,
        ..SystemConfig::default()
    }
    .with_snr_db(snr_db)
}
