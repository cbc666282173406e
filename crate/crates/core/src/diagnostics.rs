//! Self-checks of the samplers and bounds against exact or reference values.

use crate::channel::{sample_block, CodewordLaw};
use crate::config::SystemConfig;
use crate::density::{block_density, kappa, mean_block_density, SnnParam};
use crate::error::Result;
use crate::harq::{empirical_wald_check, sample_trajectories};
use crate::quadrature;
use crate::rng::Streams;
use crate::stats::{map_trials, Estimate};

#[derive(Debug, Clone, PartialEq)]
pub struct Diagnostic {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl Diagnostic {
    fn new(name: impl Into<String>, passed: bool, detail: impl Into<String>) -> Self {
        Diagnostic { name: name.into(), passed, detail: detail.into() }
    }
}

/// Quadrature order used by [`run_all`].
pub const QUADRATURE_ORDER: usize = 60;

fn s(v: f64) -> SnnParam {
    SnnParam::new(v).expect("constant scale")
}

/// Runs every check at `cfg` (and at single-symbol geometries where a
/// reference value needs one), with `n_trials` Monte Carlo trials each.
pub fn run_all(cfg: &SystemConfig, n_trials: usize, seed: u64) -> Result<Vec<Diagnostic>> {
    cfg.validate()?;
    let mut out = Vec::new();
    let streams = Streams::new(seed);

    let worst = map_trials(1000, |t| {
        let b = sample_block(cfg, CodewordLaw::Transmitted, &mut streams.block(t, 0)).expect("validated");
        block_density(&b, s(0.0)).abs()
    })
    .into_iter()
    .fold(0.0, f64::max);
    out.push(Diagnostic::new("zero scale gives zero density", worst == 0.0, format!("max |i_0| = {worst:e} over 1000 blocks")));

    let errors = map_trials(n_trials, |t| {
        let b = sample_block(cfg, CodewordLaw::Transmitted, &mut streams.block(t, 0)).expect("validated");
        let e = b.estimate - b.fading;
        (e.norm_sqr(), b.outputs[0].norm_sqr())
    });
    let (err, pow): (Vec<f64>, Vec<f64>) = errors.into_iter().unzip();
    let err = Estimate::from_samples(&err);
    let expected = 1.0 / (cfg.pilots as f64 * cfg.snr);
    out.push(Diagnostic::new(
        "estimate error variance",
        (err.mean / expected - 1.0).abs() <= 0.02,
        format!("{:.5} vs 1/(n_p·snr) = {expected:.5}", err.mean),
    ));
    let pow = Estimate::from_samples(&pow);
    out.push(Diagnostic::new(
        "output power",
        pow.covers(cfg.snr + 1.0, 3.0),
        format!("{:.5} ± {:.5} vs snr + 1 = {:.5}", pow.mean, pow.std_err, cfg.snr + 1.0),
    ));

    for (sv, db) in [(0.5, 0.0), (0.5, 10.0), (1.0, 0.0), (1.0, 10.0)] {
        let small = quadrature::single_symbol_config(db);
        let reference = quadrature::mean_block_density(&small, s(sv), QUADRATURE_ORDER)?;
        let mc = mean_block_density(&small, s(sv), CodewordLaw::Transmitted, n_trials, seed)?;
        out.push(Diagnostic::new(
            format!("quadrature reference s={sv} rho={db}dB"),
            mc.covers(reference, 3.0),
            format!("{:.5} ± {:.5} vs {reference:.5}", mc.mean, mc.std_err),
        ));
    }

    for sv in [0.5, 1.0, 2.0] {
        let d = mean_block_density(cfg, s(sv), CodewordLaw::Mismatched, n_trials, seed)?;
        out.push(Diagnostic::new(
            format!("mismatched drift s={sv}"),
            d.upper(3.0) < 0.0,
            format!("{:.4} ± {:.4}", d.mean, d.std_err),
        ));
    }

    let settings = [(cfg.snr_db(), 1.0, cfg.pilots), (0.0, 0.5, 2), (5.0, 2.0, 16)];
    for (db, sv, n_p) in settings {
        let at = cfg.clone().with_snr_db(db).with_pilots(n_p);
        let k1 = kappa(1.0, &at, s(sv), n_trials, seed)?;
        out.push(Diagnostic::new(
            format!("kappa root at one rho={db}dB s={sv} n_p={n_p}"),
            k1.mean.abs() <= 3.0 * k1.std_err,
            format!("{:e} ± {:e}", k1.mean, k1.std_err),
        ));
    }
    let below = kappa(0.5, cfg, s(1.0), n_trials, seed)?;
    let above = kappa(1.5, cfg, s(1.0), n_trials, seed)?;
    out.push(Diagnostic::new(
        "kappa sign around the root",
        below.upper(3.0) < 0.0 && above.upper(-3.0) > 0.0,
        format!("kappa(0.5) = {:.4} ± {:.4}, kappa(1.5) = {:.4} ± {:.4}", below.mean, below.std_err, above.mean, above.std_err),
    ));

    let small = SystemConfig { available_branches: 4, ..quadrature::single_symbol_config(0.0) };
    let set = sample_trajectories(&small, s(1.0), n_trials, seed, CodewordLaw::Mismatched, f64::INFINITY)?;
    for gamma in [0.5, 1.0, 2.0, 3.0, 4.0] {
        let (p, bound) = empirical_wald_check(&set, gamma)?;
        out.push(Diagnostic::new(
            format!("wald dominance gamma={gamma}"),
            p.mean <= bound + 3.0 * p.std_err,
            format!("{:.5} ± {:.5} vs exp(-gamma) = {bound:.5}", p.mean, p.std_err),
        ));
    }
    Ok(out)
}
