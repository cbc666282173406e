//! Browser bindings: HARQ latency CDF, tilted moment curve, and the split of
//! the HARQ error bound into undetected and timeout terms.
//!
//! Every export returns a flat `Float64Array`; the layouts are documented on
//! each function. Trial counts are kept small by the page so a call finishes
//! in well under a second.

use shortpacket::channel::CodewordLaw;
use shortpacket::density::kappa;
use shortpacket::harq::{self, sample_trajectories, stopping_stats, undetected_bound};
use shortpacket::{SnnParam, SystemConfig};
use wasm_bindgen::prelude::*;

/// Largest trial count accepted from the page.
pub const MAX_TRIALS: usize = 200_000;

fn config(snr_db: f64, branches: usize, info_bits: u32, pilots: usize) -> Result<SystemConfig, String> {
    let cfg = SystemConfig::default()
        .with_snr_db(snr_db)
        .with_branches(branches)
        .with_info_bits(info_bits)
        .with_pilots(pilots);
    cfg.validate().map_err(|e| e.to_string())?;
    Ok(cfg)
}

fn trials(n: usize) -> Result<usize, String> {
    if n == 0 || n > MAX_TRIALS {
        return Err(format!("trials must lie in 1..={MAX_TRIALS} (got {n})"));
    }
    Ok(n)
}

fn scale(s: f64) -> Result<SnnParam, String> {
    SnnParam::new(s).map_err(|e| e.to_string())
}

/// `[gamma, mean_rounds, avg_latency_s, t_1, cdf_1, t_2, cdf_2, ...]`.
pub fn latency_cdf(
    snr_db: f64,
    branches: usize,
    info_bits: u32,
    s: f64,
    pilots: usize,
    n_trials: usize,
    seed: u64,
) -> Result<Vec<f64>, String> {
    let cfg = config(snr_db, branches, info_bits, pilots)?;
    let e = harq::evaluate(&cfg, scale(s)?, trials(n_trials)?, seed).map_err(|e| e.to_string())?;
    let mut out = vec![e.gamma_star, e.ell_bound.mean, e.avg_latency_s];
    for (t, p) in &e.latency_cdf {
        out.extend([*t, *p]);
    }
    Ok(out)
}

/// `[kappa(beta_1), std_err_1, kappa(beta_2), std_err_2, ...]`.
pub fn kappa_curve(
    snr_db: f64,
    s: f64,
    pilots: usize,
    betas: &[f64],
    n_trials: usize,
    seed: u64,
) -> Result<Vec<f64>, String> {
    let cfg = config(snr_db, 1, 30, pilots)?;
    let s = scale(s)?;
    let n = trials(n_trials)?;
    let mut out = Vec::with_capacity(2 * betas.len());
    for &b in betas {
        let k = kappa(b, &cfg, s, n, seed).map_err(|e| e.to_string())?;
        out.extend([k.mean, k.std_err]);
    }
    Ok(out)
}

/// `[undetected_1, timeout_1, undetected_2, timeout_2, ...]` at each threshold.
pub fn error_split(
    snr_db: f64,
    branches: usize,
    info_bits: u32,
    s: f64,
    pilots: usize,
    gammas: &[f64],
    n_trials: usize,
    seed: u64,
) -> Result<Vec<f64>, String> {
    let cfg = config(snr_db, branches, info_bits, pilots)?;
    let set = sample_trajectories(&cfg, scale(s)?, trials(n_trials)?, seed, CodewordLaw::Transmitted, f64::INFINITY)
        .map_err(|e| e.to_string())?;
    let mut out = Vec::with_capacity(2 * gammas.len());
    for &g in gammas {
        let st = stopping_stats(&set, g).map_err(|e| e.to_string())?;
        out.extend([undetected_bound(info_bits, g), st.timeout.mean]);
    }
    Ok(out)
}

#[wasm_bindgen(js_name = latencyCdf)]
pub fn latency_cdf_js(
    snr_db: f64,
    branches: usize,
    info_bits: u32,
    s: f64,
    pilots: usize,
    n_trials: usize,
    seed: u32,
) -> Result<Vec<f64>, JsError> {
    latency_cdf(snr_db, branches, info_bits, s, pilots, n_trials, seed.into()).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen(js_name = kappaCurve)]
pub fn kappa_curve_js(snr_db: f64, s: f64, pilots: usize, betas: Vec<f64>, n_trials: usize, seed: u32) -> Result<Vec<f64>, JsError> {
    kappa_curve(snr_db, s, pilots, &betas, n_trials, seed.into()).map_err(|e| JsError::new(&e))
}

#[allow(clippy::too_many_arguments)]
#[wasm_bindgen(js_name = errorSplit)]
pub fn error_split_js(
    snr_db: f64,
    branches: usize,
    info_bits: u32,
    s: f64,
    pilots: usize,
    gammas: Vec<f64>,
    n_trials: usize,
    seed: u32,
) -> Result<Vec<f64>, JsError> {
    error_split(snr_db, branches, info_bits, s, pilots, &gammas, n_trials, seed.into()).map_err(|e| JsError::new(&e))
}
