//! Tabular output and per-algorithm log-log summaries.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::Serialize;

use crate::bench::config::Algorithm;
use crate::bench::experiment::{ResultRow, RowStatus};
use crate::error::{Error, Result};

/// Rows grouped by algorithm and physical error rate.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GroupSummary {
    pub algorithm: Algorithm,
    pub p_phys: f64,
    pub rows: usize,
    pub failed: usize,
    pub median_abs_error: Option<f64>,
    /// Slope of `ln |dE|` against `ln T_total`.
    pub slope_t_total: Option<f64>,
    /// Slope of `ln |dE|` against `ln T_max`.
    pub slope_t_max: Option<f64>,
    /// Slope of `ln |dE|` against `ln N_shots`.
    pub slope_shots: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Report {
    pub csv: String,
    pub summary: String,
    pub groups: Vec<GroupSummary>,
}

/// Least-squares slope of `ln y` on `ln x` over pairs with both positive.
/// `None` with fewer than two distinct `x`.
pub fn loglog_slope(points: &[(f64, f64)]) -> Option<f64> {
    let pts: Vec<(f64, f64)> = points
        .iter()
        .filter(|(x, y)| *x > 0.0 && *y > 0.0 && x.is_finite() && y.is_finite())
        .map(|(x, y)| (x.ln(), y.ln()))
        .collect();
    let n = pts.len() as f64;
    if pts.len() < 2 {
        return None;
    }
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    if sxx <= 1e-12 * n {
        return None;
    }
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    Some(sxy / sxx)
}

fn median(mut v: Vec<f64>) -> Option<f64> {
    if v.is_empty() {
        return None;
    }
    v.sort_by(f64::total_cmp);
    let n = v.len();
    Some(if n % 2 == 1 { v[n / 2] } else { 0.5 * (v[n / 2 - 1] + v[n / 2]) })
}

/// CSV of all rows in input order plus a summary grouped by
/// `(algorithm, p_phys)`.
pub fn emit_report(rows: &[ResultRow]) -> Result<Report> {
    if rows.is_empty() {
        return Err(Error::EmptyReport);
    }
    let mut wr = csv::Writer::from_writer(Vec::new());
    for r in rows {
        wr.serialize(r)?;
    }
    let csv = String::from_utf8(wr.into_inner().map_err(|e| Error::Format(e.to_string()))?)
        .map_err(|e| Error::Format(e.to_string()))?;

    let mut groups: BTreeMap<(Algorithm, u64), Vec<&ResultRow>> = BTreeMap::new();
    for r in rows {
        groups.entry((r.algorithm, r.p_phys.to_bits())).or_default().push(r);
    }
    let mut summaries = Vec::new();
    let mut summary = String::new();
    for ((algorithm, p_bits), members) in groups {
        let ok: Vec<&&ResultRow> = members.iter().filter(|r| r.status == RowStatus::Ok).collect();
        // Seeds at one parameter point do not define a trend.
        let mut values: Vec<u64> = ok.iter().map(|r| r.value.to_bits()).collect();
        values.sort_unstable();
        values.dedup();
        let trend = values.len() >= 2;
        let pairs = |f: fn(&ResultRow) -> Option<f64>| -> Vec<(f64, f64)> {
            if !trend {
                return Vec::new();
            }
            ok.iter()
                .filter_map(|r| Some((f(r)?, r.abs_error?)))
                .collect()
        };
        let g = GroupSummary {
            algorithm,
            p_phys: f64::from_bits(p_bits),
            rows: members.len(),
            failed: members.len() - ok.len(),
            median_abs_error: median(ok.iter().filter_map(|r| r.abs_error).collect()),
            slope_t_total: loglog_slope(&pairs(|r| r.t_total)),
            slope_t_max: loglog_slope(&pairs(|r| r.t_max)),
            slope_shots: loglog_slope(&pairs(|r| r.n_shots.map(|n| n as f64))),
        };
        let fmt = |v: Option<f64>| v.map_or_else(|| "n/a".to_string(), |x| format!("{x:.4}"));
        let _ = writeln!(
            summary,
            "{} p_phys={:e}: rows={} failed={} median|dE|={} slope(T_total)={} slope(T_max)={} slope(N_shots)={}",
            algorithm.name(),
            g.p_phys,
            g.rows,
            g.failed,
            g.median_abs_error.map_or_else(|| "n/a".to_string(), |x| format!("{x:.3e}")),
            fmt(g.slope_t_total),
            fmt(g.slope_t_max),
            fmt(g.slope_shots),
        );
        summaries.push(g);
    }
    Ok(Report {
        csv,
        summary,
        groups: summaries,
    })
}
