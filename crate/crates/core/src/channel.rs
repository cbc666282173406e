//! Pilot-assisted transmission over a memoryless Rayleigh block-fading channel.
//!
//! Each coherence block carries `n_p` pilots followed by `n_d` QPSK data
//! symbols, all of power `snr`. The pilot vector is constant
//! (`√snr, …, √snr`), so the ML channel estimate is the pilot average and its
//! error is `CN(0, 1/(n_p·snr))`. The estimate is drawn from that law directly
//! instead of materializing the pilot observations.

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::config::SystemConfig;
use crate::error::Result;

/// Law of the candidate codeword whose metric is evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CodewordLaw {
    /// The candidate is the codeword that produced the channel outputs.
    Transmitted,
    /// The candidate is drawn independently of the transmitted codeword.
    Mismatched,
}

/// QPSK sign patterns for `√snr · exp(iπ(2m+1)/4)`, `m = 0..4`.
const QPSK_SIGNS: [(f64, f64); 4] = [(1.0, 1.0), (-1.0, 1.0), (-1.0, -1.0), (1.0, -1.0)];

/// Constellation point `m` (taken mod 4) scaled to power `snr`.
pub fn qpsk(snr: f64, m: u32) -> Complex64 {
    let (re, im) = QPSK_SIGNS[(m & 3) as usize];
    let amp = (snr / 2.0).sqrt();
    Complex64::new(amp * re, amp * im)
}

/// All four constellation points at power `snr`.
pub fn qpsk_constellation(snr: f64) -> [Complex64; 4] {
    [qpsk(snr, 0), qpsk(snr, 1), qpsk(snr, 2), qpsk(snr, 3)]
}

/// One coherence block as seen by the receiver.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockRealization {
    pub snr: f64,
    pub fading: Complex64,
    pub estimate: Complex64,
    /// Candidate data symbols (transmitted or mismatched, per the sampling law).
    pub symbols: Vec<Complex64>,
    /// Received data samples.
    pub outputs: Vec<Complex64>,
}

/// Per-configuration constants needed to draw blocks.
#[derive(Debug, Clone, Copy)]
pub(crate) struct ChannelParams {
    pub data_symbols: usize,
    amp: f64,
    estimate_sd: f64,
}

impl ChannelParams {
    pub fn new(cfg: &SystemConfig) -> Self {
        ChannelParams {
            data_symbols: cfg.data_symbols(),
            amp: (cfg.snr / 2.0).sqrt(),
            estimate_sd: (2.0 * cfg.pilots as f64 * cfg.snr).sqrt().recip(),
        }
    }
}

#[inline]
fn std_complex<R: Rng + ?Sized>(rng: &mut R) -> Complex64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(re, im)
}

/// Fading state of a block; data symbols are drawn one at a time from the same
/// stream through [`BlockDraw::symbol`]. Materialized and streaming consumers
/// share this routine, so both see identical draws.
pub(crate) struct BlockDraw {
    pub fading: Complex64,
    pub estimate: Complex64,
}

impl BlockDraw {
    #[inline]
    pub fn begin<R: Rng + ?Sized>(p: &ChannelParams, rng: &mut R) -> Self {
        let fading = std_complex(rng) * std::f64::consts::FRAC_1_SQRT_2;
        let estimate = fading + std_complex(rng) * p.estimate_sd;
        BlockDraw { fading, estimate }
    }

    /// Returns the candidate symbol's sign pair and the channel output.
    #[inline]
    pub fn symbol<R: Rng + ?Sized>(
        &self,
        p: &ChannelParams,
        law: CodewordLaw,
        rng: &mut R,
    ) -> ((f64, f64), Complex64) {
        let sent = QPSK_SIGNS[(rng.next_u32() & 3) as usize];
        let x = Complex64::new(p.amp * sent.0, p.amp * sent.1);
        let y = self.fading * x + std_complex(rng) * std::f64::consts::FRAC_1_SQRT_2;
        let candidate = match law {
            CodewordLaw::Transmitted => sent,
            CodewordLaw::Mismatched => QPSK_SIGNS[(rng.next_u32() & 3) as usize],
        };
        (candidate, y)
    }
}

/// Draws one coherence block: fading `h ~ CN(0,1)`, estimate
/// `ĥ = h + CN(0, 1/(n_p·snr))`, i.i.d. uniform QPSK data of power `snr` and
/// outputs `y = h·x + CN(0,1)`.
///
/// Under [`CodewordLaw::Mismatched`] the returned symbols are an independent
/// QPSK draw, while the outputs still come from a transmitted codeword.
pub fn sample_block<R: Rng + ?Sized>(
    cfg: &SystemConfig,
    law: CodewordLaw,
    rng: &mut R,
) -> Result<BlockRealization> {
    cfg.validate()?;
    let p = ChannelParams::new(cfg);
    let draw = BlockDraw::begin(&p, rng);
    let mut symbols = Vec::with_capacity(p.data_symbols);
    let mut outputs = Vec::with_capacity(p.data_symbols);
    for _ in 0..p.data_symbols {
        let ((re, im), y) = draw.symbol(&p, law, rng);
        symbols.push(Complex64::new(p.amp * re, p.amp * im));
        outputs.push(y);
    }
    Ok(BlockRealization {
        snr: cfg.snr,
        fading: draw.fading,
        estimate: draw.estimate,
        symbols,
        outputs,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::Streams;

    #[test]
    fn constellation_matches_polar_form() {
        let snr: f64 = 3.7;
        for m in 0..4u32 {
            let polar = Complex64::from_polar(snr.sqrt(), std::f64::consts::PI * (2 * m + 1) as f64 / 4.0);
            assert!((qpsk(snr, m) - polar).norm() < 1e-12);
        }
    }

    #[test]
    fn symbols_have_exact_power() {
        let cfg = SystemConfig::default().with_snr_db(3.0);
        let mut rng = Streams::new(1).block(0, 0);
        let b = sample_block(&cfg, CodewordLaw::Transmitted, &mut rng).unwrap();
        assert_eq!(b.symbols.len(), cfg.data_symbols());
        for x in &b.symbols {
            assert!((x.norm_sqr() - cfg.snr).abs() < 1e-12);
        }
    }

    #[test]
    fn boundary_geometry_has_one_data_sample() {
        let cfg = SystemConfig::default().with_pilots(71);
        let mut rng = Streams::new(0).block(0, 0);
        let b = sample_block(&cfg, CodewordLaw::Mismatched, &mut rng).unwrap();
        assert_eq!(b.outputs.len(), 1);
        assert_eq!(b.symbols.len(), 1);
    }

    #[test]
    fn vanishing_snr_leaves_unit_power_noise() {
        let cfg = SystemConfig { snr: 1e-12, ..SystemConfig::default() };
        let streams = Streams::new(5);
        let mut acc = 0.0;
        let mut n = 0;
        for t in 0..2000 {
            let b = sample_block(&cfg, CodewordLaw::Transmitted, &mut streams.block(t, 0)).unwrap();
            acc += b.outputs.iter().map(|y| y.norm_sqr()).sum::<f64>();
            n += b.outputs.len();
        }
        let mean = acc / n as f64;
        assert!((mean - 1.0).abs() < 0.01, "mean power {mean}");
    }

    #[test]
    fn invalid_config_is_rejected() {
        let cfg = SystemConfig::default().with_pilots(0);
        let mut rng = Streams::new(0).block(0, 0);
        assert!(sample_block(&cfg, CodewordLaw::Transmitted, &mut rng).is_err());
    }
}
