//! Frame geometry, SNR and reliability target shared by every evaluation.

use crate::error::{Error, Result};

/// Converts a power ratio in dB to linear scale.
pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

pub fn linear_to_db(x: f64) -> f64 {
    10.0 * x.log10()
}

/// Channel, frame and target parameters.
///
/// A resource block spans `subcarriers × ofdm_symbols` channel uses and sees a
/// single fading coefficient. Each slot uses `branches` resource blocks on
/// independently fading frequency chunks; with `available_branches` chunks in
/// total, a codeword can occupy at most `available_branches / branches` slots.
#[derive(Debug, Clone, PartialEq)]
pub struct SystemConfig {
    /// Linear SNR (average power per transmitted symbol; noise has unit power).
    pub snr: f64,
    pub subcarriers: usize,
    pub ofdm_symbols: usize,
    /// Pilot symbols at the start of every coherence block.
    pub pilots: usize,
    /// Diversity branches used per slot.
    pub branches: usize,
    pub available_branches: usize,
    /// OFDM symbol duration in seconds.
    pub ofdm_symbol_s: f64,
    pub eps_target: f64,
    /// Information bits per message; the codebook has `2^info_bits` codewords.
    pub info_bits: u32,
}

impl Default for SystemConfig {
    /// TDL-C 300 ns / 3 km/h numerology at 20 MHz with 15 kHz subcarriers.
    fn default() -> Self {
        SystemConfig {
            snr: db_to_linear(-2.0),
            subcarriers: 24,
            ofdm_symbols: 3,
            pilots: 8,
            branches: 2,
            available_branches: 30,
            ofdm_symbol_s: 71.4e-6,
            eps_target: 1e-3,
            info_bits: 30,
        }
    }
}

impl SystemConfig {
    pub fn with_snr_db(mut self, db: f64) -> Self {
        self.snr = db_to_linear(db);
        self
    }

    pub fn with_pilots(mut self, pilots: usize) -> Self {
        self.pilots = pilots;
        self
    }

    pub fn with_branches(mut self, branches: usize) -> Self {
        self.branches = branches;
        self
    }

    pub fn with_info_bits(mut self, bits: u32) -> Self {
        self.info_bits = bits;
        self
    }

    /// SNR in dB, rounded to 1e-9 dB so that values set through
    /// [`with_snr_db`](Self::with_snr_db) read back unchanged.
    pub fn snr_db(&self) -> f64 {
        (linear_to_db(self.snr) * 1e9).round() / 1e9
    }

    /// Channel uses per coherence block.
    pub fn coherence_symbols(&self) -> usize {
        self.subcarriers * self.ofdm_symbols
    }

    pub fn data_symbols(&self) -> usize {
        self.coherence_symbols().saturating_sub(self.pilots)
    }

    /// Maximum number of slots (FBL) or rounds (HARQ).
    pub fn max_rounds(&self) -> usize {
        if self.branches == 0 {
            0
        } else {
            self.available_branches / self.branches
        }
    }

    /// Channel uses per slot.
    pub fn symbols_per_slot(&self) -> usize {
        self.branches * self.coherence_symbols()
    }

    pub fn slot_duration_s(&self) -> f64 {
        self.ofdm_symbols as f64 * self.ofdm_symbol_s
    }

    /// `ln(M - 1)` with `M = 2^info_bits`, evaluated without forming `2^k`.
    pub fn log_competitors(&self) -> f64 {
        log_competitors(self.info_bits)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.snr.is_finite() && self.snr > 0.0) {
            return Err(Error::config("snr", "must be a finite positive power ratio"));
        }
        if self.subcarriers == 0 {
            return Err(Error::config("u", "must be at least 1"));
        }
        if self.ofdm_symbols == 0 {
            return Err(Error::config("d", "must be at least 1"));
        }
        let n_c = self.coherence_symbols();
        if self.pilots == 0 || self.pilots >= n_c {
            return Err(Error::config(
                "n_p",
                format!("must satisfy 1 <= n_p < n_c = {n_c} (got {})", self.pilots),
            ));
        }
        if self.branches == 0 || self.branches > self.available_branches {
            return Err(Error::config(
                "L",
                format!(
                    "must satisfy 1 <= L <= L_c = {} (got {})",
                    self.available_branches, self.branches
                ),
            ));
        }
        if !(self.ofdm_symbol_s.is_finite() && self.ofdm_symbol_s > 0.0) {
            return Err(Error::config("T_o", "must be a finite positive duration"));
        }
        // A target of exactly 1 is the degenerate always-met case.
        if !(self.eps_target > 0.0 && self.eps_target <= 1.0) {
            return Err(Error::config("eps", "must lie in (0, 1]"));
        }
        if self.info_bits == 0 {
            return Err(Error::config("k", "must be at least 1"));
        }
        Ok(())
    }
}

/// `ln(2^bits - 1)`; `-inf` for a single-message code.
pub fn log_competitors(bits: u32) -> f64 {
    if bits == 0 {
        return f64::NEG_INFINITY;
    }
    let k = bits as f64;
    k * std::f64::consts::LN_2 + (-(-k).exp2()).ln_1p()
}
