//! Machine-readable reports: convergence/norms/decay CSVs and the JSON run
//! summary. Numbers are serialized in scientific notation with 17
//! significant digits, so parsing a report reproduces the in-memory values
//! bit-exactly.

use std::io::{BufRead, Write};

use crate::harness::{ConvergenceReport, ConvergenceRow};
use crate::{Error, Result};

fn fmt(x: f64) -> String {
    format!("{x:.16e}")
}

/// `eps,E_half,E_dy,E_three_half`, rows in sweep order (decreasing ε).
pub fn write_convergence_csv(w: &mut impl Write, rows: &[ConvergenceRow]) -> Result<()> {
    writeln!(w, "eps,E_half,E_dy,E_three_half")?;
    for r in rows {
        writeln!(w, "{},{},{},{}", fmt(r.eps), fmt(r.e_half), fmt(r.e_dy), fmt(r.e_three_half))?;
    }
    Ok(())
}

/// Parses a convergence CSV back into rows (header required).
pub fn read_convergence_csv(r: impl BufRead) -> Result<Vec<ConvergenceRow>> {
    let mut lines = r.lines();
    let header = lines
        .next()
        .transpose()?
        .ok_or_else(|| Error::Invalid("convergence csv is empty".into()))?;
    if header.trim() != "eps,E_half,E_dy,E_three_half" {
        return Err(Error::Invalid(format!("unexpected convergence header `{header}`")));
    }
    let mut rows = Vec::new();
    for (i, line) in lines.enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let cols: Vec<&str> = line.split(',').collect();
        if cols.len() != 4 {
            return Err(Error::Invalid(format!(
                "convergence row {} has {} columns, expected 4",
                i + 2,
                cols.len()
            )));
        }
        let parse = |s: &str| {
            s.trim()
                .parse::<f64>()
                .map_err(|_| Error::Invalid(format!("convergence row {}: bad number `{s}`", i + 2)))
        };
        rows.push(ConvergenceRow {
            eps: parse(cols[0])?,
            e_half: parse(cols[1])?,
            e_dy: parse(cols[2])?,
            e_three_half: parse(cols[3])?,
        });
    }
    Ok(rows)
}

/// One line of a norms report: the instantaneous `B^s` norm plus the tracker
/// snapshot at that time.
#[derive(Debug, Clone, Copy)]
pub struct NormsRow {
    pub time: f64,
    pub s: f64,
    pub besov_norm: f64,
    pub eta: f64,
    pub theta: f64,
    pub zeta: f64,
    pub radius_estimate: f64,
}

pub const NORMS_HEADER: &str = "time,s,besov_norm,eta,theta,zeta,radius_estimate";

pub fn write_norms_csv(w: &mut impl Write, rows: &[NormsRow]) -> Result<()> {
    writeln!(w, "{NORMS_HEADER}")?;
    for r in rows {
        writeln!(
            w,
            "{},{},{},{},{},{},{}",
            fmt(r.time),
            fmt(r.s),
            fmt(r.besov_norm),
            fmt(r.eta),
            fmt(r.theta),
            fmt(r.zeta),
            fmt(r.radius_estimate)
        )?;
    }
    Ok(())
}

/// `t,l2,b_half` decay table.
pub fn write_decay_csv(w: &mut impl Write, rows: &[(f64, f64, f64)]) -> Result<()> {
    writeln!(w, "t,l2,b_half")?;
    for &(t, l2, bh) in rows {
        writeln!(w, "{},{},{}", fmt(t), fmt(l2), fmt(bh))?;
    }
    Ok(())
}

pub fn summary_json(report: &ConvergenceReport) -> serde_json::Value {
    serde_json::json!({
        "slope": report.slope,
        "residual": report.residual,
        "kappa": report.kappa,
        "eta_final": report.eta_final,
        "theta_final": report.theta_final,
        "zeta_final": report.zeta_final,
        "alive": report.alive,
    })
}

pub fn write_summary_json(w: &mut impl Write, report: &ConvergenceReport) -> Result<()> {
    let v = summary_json(report);
    serde_json::to_writer_pretty(&mut *w, &v)
        .map_err(|e| Error::Invalid(format!("cannot serialize summary: {e}")))?;
    writeln!(w)?;
    Ok(())
}
