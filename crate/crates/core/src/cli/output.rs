//! CSV, CDF and manifest writers plus human-readable summaries.

use std::io::{self, Write};

use crate::fbl::FblEvaluation;
use crate::harq::HarqEvaluation;
use crate::sweep::{CdfComparison, CurvePoint, SkippedPoint};

/// First line of every manifest block.
pub const MANIFEST_MARKER: &str = "# shortpacket manifest";

pub const CSV_HEADER: &str = "scheme,L,rho_db,k,s,n_p,v_or_gamma,avg_latency_s,max_latency_s,eb_db,rate_bpcu,eps_bound,timeout_term,undetected_term,std_err,seed,n_trials";

pub fn write_manifest(w: &mut (impl Write + ?Sized), subcommand: &str, entries: &[(String, String)]) -> io::Result<()> {
    writeln!(w, "{MANIFEST_MARKER}")?;
    writeln!(w, "# version = {}", env!("CARGO_PKG_VERSION"))?;
    writeln!(w, "# subcommand = {subcommand}")?;
    for (k, v) in entries {
        writeln!(w, "# {k} = {v}")?;
    }
    Ok(())
}

fn opt(x: Option<f64>) -> String {
    x.map(|v| v.to_string()).unwrap_or_default()
}

pub fn write_point(w: &mut (impl Write + ?Sized), p: &CurvePoint) -> io::Result<()> {
    writeln!(
        w,
        "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
        p.scheme,
        p.branches,
        p.snr_db,
        p.info_bits,
        p.s,
        p.pilots,
        p.v_or_gamma,
        p.avg_latency_s,
        p.max_latency_s,
        p.eb_db,
        p.rate_bpcu,
        p.eps_bound,
        opt(p.timeout_term),
        opt(p.undetected_term),
        p.std_err,
        p.seed,
        p.n_trials
    )
}

pub fn write_points(w: &mut (impl Write + ?Sized), points: &[CurvePoint]) -> io::Result<()> {
    writeln!(w, "{CSV_HEADER}")?;
    points.iter().try_for_each(|p| write_point(w, p))
}

pub fn write_cdf(w: &mut (impl Write + ?Sized), cdf: &[(f64, f64)]) -> io::Result<()> {
    writeln!(w, "t_seconds,cdf")?;
    for (t, p) in cdf {
        writeln!(w, "{t},{p}")?;
    }
    Ok(())
}

/// HARQ latency CDFs and the FBL step of every comparison, long format.
pub fn write_cdf_comparisons(w: &mut (impl Write + ?Sized), rows: &[CdfComparison]) -> io::Result<()> {
    writeln!(w, "scheme,L,rho_db,k,t_seconds,cdf")?;
    for c in rows {
        let h = &c.harq;
        for (t, p) in &c.harq_cdf {
            writeln!(w, "{},{},{},{},{t},{p}", h.scheme, h.branches, h.snr_db, h.info_bits)?;
        }
        let f = &c.fbl;
        writeln!(w, "{},{},{},{},{},1", f.scheme, f.branches, f.snr_db, f.info_bits, c.fbl_step_s)?;
    }
    Ok(())
}

pub fn fbl_summary(w: &mut (impl Write + ?Sized), e: &FblEvaluation) -> io::Result<()> {
    writeln!(w, "slots v*            {}", e.v_star)?;
    writeln!(w, "error bound         {:.6e} ± {:.2e}", e.eps_bound.mean, e.eps_bound.std_err)?;
    writeln!(w, "latency             {:.6} ms", e.latency_s * 1e3)?;
    writeln!(w, "energy per bit      {:.4} dB", e.energy_per_bit_db())?;
    writeln!(w, "rate                {:.6} bit/channel use", e.rate_bits_per_use)?;
    writeln!(w, "s, n_p              {:.6}, {}", e.s_used.value(), e.n_p_used)?;
    writeln!(w, "trials              {}", e.n_trials)
}

pub fn harq_summary(w: &mut (impl Write + ?Sized), e: &HarqEvaluation) -> io::Result<()> {
    writeln!(w, "threshold gamma*    {:.6} nats", e.gamma_star)?;
    writeln!(w, "average rounds      {:.6} ± {:.2e}", e.ell_bound.mean, e.ell_bound.std_err)?;
    writeln!(w, "error bound         {:.6e}", e.eps_bound)?;
    writeln!(w, "  undetected        {:.6e}", e.undetected_term)?;
    writeln!(w, "  timeout           {:.6e} ± {:.2e}", e.timeout_term.mean, e.timeout_term.std_err)?;
    writeln!(w, "average latency     {:.6} ms", e.avg_latency_s * 1e3)?;
    writeln!(w, "maximum latency     {:.6} ms", e.max_latency_s * 1e3)?;
    writeln!(w, "energy per bit      {:.4} dB", e.energy_per_bit_db())?;
    writeln!(w, "rate                {:.6} bit/channel use", e.rate_bits_per_use)?;
    writeln!(w, "s, n_p              {:.6}, {}", e.s_used.value(), e.n_p_used)?;
    writeln!(w, "trials              {}", e.n_trials)
}

pub fn skipped_line(s: &SkippedPoint) -> String {
    let mut line = format!("skipped {} L={} rho_db={} k={}", s.scheme, s.branches, s.snr_db, s.info_bits);
    if let Some(b) = s.latency_budget_s {
        line.push_str(&format!(" budget={b}s"));
    }
    line.push_str(": ");
    line.push_str(&s.reason);
    line
}

pub fn point_line(p: &CurvePoint) -> String {
    format!(
        "{} L={} rho_db={} k={}: latency {:.4} ms, E_b {:.3} dB, rate {:.5}",
        p.scheme,
        p.branches,
        p.snr_db,
        p.info_bits,
        p.avg_latency_s * 1e3,
        p.eb_db,
        p.rate_bpcu
    )
}
