use serde::Serialize;

use super::distance::epi_distance_cloud;
use crate::error::{check_dim, Error, Result};
use crate::field::{FunctionSequence, ScalarField};
use crate::grid::GridSpec;
use crate::norm::NormSpec;
use crate::report::{fmt_f64, Table};

/// The series `dl_rho(epi f^nu, epi f)` along a schedule, with the slope of
/// a least-squares fit of `ln dl` against `ln nu`.
///
/// No verdict is drawn. A clearly negative slope with a small final value
/// suggests convergence; users judge that from the raw series.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EpiTrend {
    pub rows: Vec<(usize, f64)>,
    /// `None` when fewer than two entries are positive and finite.
    pub slope: Option<f64>,
    pub rho: f64,
    pub spacing: f64,
}

impl EpiTrend {
    pub fn to_table(&self) -> Table {
        let mut t = Table::new(["nu", "dl"]);
        for (nu, dl) in &self.rows {
            t.push([nu.to_string(), fmt_f64(*dl)]);
        }
        t
    }

    pub fn last(&self) -> Option<f64> {
        self.rows.last().map(|r| r.1)
    }
}

/// Ordinary least-squares slope of `ln y` on `ln x` over the positive, finite pairs.
pub fn log_log_slope(points: &[(f64, f64)]) -> Option<f64> {
    let logs: Vec<(f64, f64)> = points
        .iter()
        .filter(|(x, y)| *x > 0.0 && *y > 0.0 && x.is_finite() && y.is_finite())
        .map(|(x, y)| (x.ln(), y.ln()))
        .collect();
    if logs.len() < 2 {
        return None;
    }
    let n = logs.len() as f64;
    let mx = logs.iter().map(|p| p.0).sum::<f64>() / n;
    let my = logs.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = logs.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    if sxx == 0.0 {
        return None;
    }
    let sxy: f64 = logs.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    Some(sxy / sxx)
}

pub fn epi_trend(
    seq: &FunctionSequence,
    f: &ScalarField,
    grid: &GridSpec,
    rho: f64,
    norm: &NormSpec,
    nu_schedule: &[usize],
) -> Result<EpiTrend> {
    check_dim(seq.dim(), f.dim())?;
    if nu_schedule.is_empty() || nu_schedule.contains(&0) {
        return Err(Error::invalid("nu schedule must be nonempty with indices >= 1"));
    }
    let rows = nu_schedule
        .iter()
        .map(|&nu| Ok((nu, epi_distance_cloud(&seq.at(nu)?, f, grid, rho, norm)?)))
        .collect::<Result<Vec<_>>>()?;
    let pairs: Vec<(f64, f64)> = rows.iter().map(|&(nu, d)| (nu as f64, d)).collect();
    Ok(EpiTrend { slope: log_log_slope(&pairs), rows, rho, spacing: grid.spacing() })
}
