//! Flat `key = value` configuration with Table I defaults.
//!
//! Files and flags write into the same key space; later writes win. Lines
//! starting with `#` are comments, so the `# key = value` manifest at the top
//! of every output file becomes a configuration file once the leading `# `
//! is stripped.

use std::collections::BTreeSet;
use std::path::Path;

use crate::config::SystemConfig;
use crate::error::{Error, Result};
use super::output::MANIFEST_MARKER;
use crate::sweep::{LatencyBinning, Scheme, SweepPlan, Target};

/// Every recognized key, in manifest order.
pub const KEYS: &[&str] = &[
    "rho_db",
    "u",
    "d",
    "n_p",
    "s",
    "L",
    "L_c",
    "T_o",
    "eps",
    "k",
    "seed",
    "trials",
    "search_trials",
    "coarse_stride",
    "refine",
    "s_grid",
    "n_p_grid",
    "target",
    "schemes",
    "L_values",
    "rho_db_values",
    "k_values",
    "latency_bin_s",
    "latency_budgets_s",
    "k_max",
    "beta_values",
];

/// Keys written by the tool into manifests that carry no configuration.
const INFORMATIONAL: &[&str] = &["version", "subcommand"];

#[derive(Debug, Clone, PartialEq)]
pub struct Settings {
    pub system: SystemConfig,
    pub rho_db: f64,
    pub plan: SweepPlan,
    /// Tilt grid for `kappa`.
    pub beta_values: Vec<f64>,
    explicit: BTreeSet<String>,
}

impl Default for Settings {
    fn default() -> Self {
        let system = SystemConfig::default();
        Settings {
            rho_db: system.snr_db(),
            plan: SweepPlan { base: system.clone(), ..SweepPlan::default() },
            system,
            beta_values: (0..=20).map(|i| tidy(0.1 * i as f64)).collect(),
            explicit: BTreeSet::new(),
        }
    }
}

fn parse_num<T: std::str::FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .trim()
        .parse()
        .map_err(|_| Error::config(key, format!("cannot parse {value:?}")))
}

fn tidy(x: f64) -> f64 {
    (x * 1e12).round() / 1e12
}

/// Comma-separated numbers, each item optionally a `start:step:stop` range.
pub fn parse_f64_list(key: &str, value: &str) -> Result<Vec<f64>> {
    let mut out = Vec::new();
    for item in value.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        let parts: Vec<&str> = item.split(':').collect();
        match parts.as_slice() {
            [x] => out.push(parse_num::<f64>(key, x)?),
            [a, step, b] => {
                let (a, step, b): (f64, f64, f64) = (parse_num(key, a)?, parse_num(key, step)?, parse_num(key, b)?);
                if !(step.is_finite() && step != 0.0 && (b - a) / step >= 0.0) {
                    return Err(Error::config(key, format!("range {item:?} is empty or unbounded")));
                }
                let n = ((b - a) / step + 1e-9).floor() as usize;
                out.extend((0..=n).map(|i| tidy(a + i as f64 * step)));
            }
            _ => return Err(Error::config(key, format!("cannot parse {item:?}"))),
        }
    }
    if out.is_empty() {
        return Err(Error::config(key, "must not be empty"));
    }
    Ok(out)
}

fn parse_int_list<T: TryFrom<i64>>(key: &str, value: &str) -> Result<Vec<T>> {
    parse_f64_list(key, value)?
        .into_iter()
        .map(|x| {
            if x.fract() != 0.0 {
                return Err(Error::config(key, format!("{x} is not an integer")));
            }
            T::try_from(x as i64).map_err(|_| Error::config(key, format!("{x} is out of range")))
        })
        .collect()
}

fn parse_bool(key: &str, value: &str) -> Result<bool> {
    match value.trim() {
        "true" | "yes" | "1" => Ok(true),
        "false" | "no" | "0" => Ok(false),
        v => Err(Error::config(key, format!("must be true or false (got {v:?})"))),
    }
}

fn join<T: ToString>(xs: &[T]) -> String {
    xs.iter().map(T::to_string).collect::<Vec<_>>().join(",")
}

impl Settings {
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let key = key.trim();
        if INFORMATIONAL.contains(&key) {
            return Ok(());
        }
        let plan = &mut self.plan;
        let sys = &mut self.system;
        match key {
            "rho_db" => self.rho_db = parse_num(key, value)?,
            "u" => sys.subcarriers = parse_num(key, value)?,
            "d" => sys.ofdm_symbols = parse_num(key, value)?,
            "n_p" => sys.pilots = parse_num(key, value)?,
            "s" => plan.space.s_grid = vec![parse_num(key, value)?],
            "L" => sys.branches = parse_num(key, value)?,
            "L_c" => sys.available_branches = parse_num(key, value)?,
            "T_o" => sys.ofdm_symbol_s = parse_num(key, value)?,
            "eps" => sys.eps_target = parse_num(key, value)?,
            "k" => sys.info_bits = parse_num(key, value)?,
            "seed" => plan.seed = parse_num(key, value)?,
            "trials" => plan.n_trials = parse_num(key, value)?,
            "search_trials" => plan.space.search_trials = parse_num(key, value)?,
            "coarse_stride" => plan.space.coarse_stride = parse_num(key, value)?,
            "refine" => plan.space.refine = parse_bool(key, value)?,
            "s_grid" => plan.space.s_grid = parse_f64_list(key, value)?,
            "n_p_grid" => plan.space.pilot_grid = parse_int_list(key, value)?,
            "target" => plan.target = value.trim().parse()?,
            "schemes" => {
                plan.schemes = value
                    .split(',')
                    .map(str::trim)
                    .filter(|s| !s.is_empty())
                    .map(str::parse)
                    .collect::<Result<Vec<Scheme>>>()?
            }
            "L_values" => plan.branch_values = parse_int_list(key, value)?,
            "rho_db_values" => plan.snr_db_values = parse_f64_list(key, value)?,
            "k_values" => plan.info_bits_values = parse_int_list(key, value)?,
            "latency_bin_s" => {
                plan.binning = match value.trim() {
                    "round" => LatencyBinning::RoundDuration,
                    "off" => LatencyBinning::Off,
                    v => LatencyBinning::Width(parse_num(key, v)?),
                }
            }
            "latency_budgets_s" => plan.latency_budgets_s = parse_f64_list(key, value)?,
            "k_max" => plan.max_info_bits = parse_num(key, value)?,
            "beta_values" => self.beta_values = parse_f64_list(key, value)?,
            _ => return Err(Error::config(key, "is not a recognized key")),
        }
        self.explicit.insert(key.to_string());
        Ok(())
    }

    pub fn is_explicit(&self, key: &str) -> bool {
        self.explicit.contains(key)
    }

    /// Applies every `key = value` line of `text`.
    ///
    /// Text opening with the manifest marker is read as a manifest: its
    /// `# key = value` lines are applied and everything from the first
    /// uncommented line on is ignored.
    pub fn apply_text(&mut self, text: &str) -> Result<()> {
        let manifest = text.lines().next().map(str::trim) == Some(MANIFEST_MARKER);
        for (lineno, raw) in text.lines().enumerate() {
            let mut line = raw.trim();
            if manifest {
                if lineno == 0 {
                    continue;
                }
                match line.strip_prefix('#') {
                    Some(rest) => line = rest.trim(),
                    None => break,
                }
            }
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                Error::config(format!("line {}", lineno + 1), format!("expected `key = value`, got {line:?}"))
            })?;
            self.set(key, value)?;
        }
        Ok(())
    }

    pub fn apply_file(&mut self, path: &Path) -> Result<()> {
        let text = std::fs::read_to_string(path)?;
        self.apply_text(&text)
    }

    /// Resolves cross-key defaults and validates everything.
    pub fn finish(mut self) -> Result<Settings> {
        self.system = self.system.clone().with_snr_db(self.rho_db);
        if self.is_explicit("n_p") && !self.is_explicit("n_p_grid") {
            self.plan.space.pilot_grid = vec![self.system.pilots];
        }
        if self.is_explicit("s") && self.is_explicit("s_grid") {
            return Err(Error::config("s", "cannot be combined with s_grid"));
        }
        if self.is_explicit("k") && !self.is_explicit("k_values") {
            self.plan.info_bits_values = vec![self.system.info_bits];
        }
        if !self.is_explicit("rho_db_values") {
            match self.plan.target {
                Target::MaxRate => self.plan.snr_db_values = vec![self.rho_db],
                Target::LatencyCdf => {
                    self.plan.snr_db_values = if self.is_explicit("rho_db") { vec![self.rho_db] } else { vec![-5.0, -2.0] }
                }
                Target::MinEnergyPerBit => {}
            }
        }
        if !self.is_explicit("L_values") && self.plan.target == Target::LatencyCdf {
            self.plan.branch_values = vec![self.system.branches];
        }
        self.plan.base = self.system.clone();
        if self.plan.n_trials == 0 {
            return Err(Error::config("trials", "must be at least 1"));
        }
        if self.plan.space.search_trials == 0 {
            return Err(Error::config("search_trials", "must be at least 1"));
        }
        self.system.validate()?;
        self.plan.space.validate(self.system.coherence_symbols())?;
        Ok(self)
    }

    /// `(key, value)` pairs that reproduce this configuration for `subcommand`.
    pub fn manifest(&self, subcommand: &str) -> Vec<(String, String)> {
        let sys = &self.system;
        let plan = &self.plan;
        let space = &plan.space;
        let mut m: Vec<(String, String)> = vec![
            ("rho_db".into(), self.rho_db.to_string()),
            ("u".into(), sys.subcarriers.to_string()),
            ("d".into(), sys.ofdm_symbols.to_string()),
            ("n_p".into(), sys.pilots.to_string()),
            ("L".into(), sys.branches.to_string()),
            ("L_c".into(), sys.available_branches.to_string()),
            ("T_o".into(), sys.ofdm_symbol_s.to_string()),
            ("eps".into(), sys.eps_target.to_string()),
            ("k".into(), sys.info_bits.to_string()),
            ("seed".into(), plan.seed.to_string()),
            ("trials".into(), plan.n_trials.to_string()),
        ];
        match subcommand {
            "kappa" => {
                m.push(("s".into(), space.s_grid[0].to_string()));
                m.push(("beta_values".into(), join(&self.beta_values)));
                return m;
            }
            "validate" => return m,
            _ => {}
        }
        m.extend([
            ("search_trials".into(), space.search_trials.to_string()),
            ("coarse_stride".into(), space.coarse_stride.to_string()),
            ("refine".into(), space.refine.to_string()),
            ("s_grid".into(), join(&space.s_grid)),
            ("n_p_grid".into(), join(&space.pilot_grid)),
        ]);
        if subcommand == "sweep" {
            let bin = match plan.binning {
                LatencyBinning::RoundDuration => "round".to_string(),
                LatencyBinning::Off => "off".to_string(),
                LatencyBinning::Width(w) => w.to_string(),
            };
            let schemes: Vec<String> = plan.schemes.iter().map(|s| s.name().to_ascii_lowercase()).collect();
            m.extend([
                ("target".into(), plan.target.to_string()),
                ("schemes".into(), schemes.join(",")),
                ("L_values".into(), join(&plan.branch_values)),
                ("rho_db_values".into(), join(&plan.snr_db_values)),
                ("k_values".into(), join(&plan.info_bits_values)),
                ("latency_bin_s".into(), bin),
                ("k_max".into(), plan.max_info_bits.to_string()),
            ]);
            if !plan.latency_budgets_s.is_empty() {
                m.push(("latency_budgets_s".into(), join(&plan.latency_budgets_s)));
            }
        }
        m
    }
}

/// Reads a configuration file on top of the defaults.
pub fn load_config(path: &Path) -> Result<(SystemConfig, SweepPlan)> {
    let mut s = Settings::default();
    s.apply_file(path)?;
    let s = s.finish()?;
    Ok((s.system, s.plan))
}
