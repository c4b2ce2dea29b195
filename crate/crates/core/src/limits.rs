//! Inner and outer limit estimates for sequences of sampled sets.
//!
//! The limits are asymptotic objects, so they are estimated on a finite tail
//! window of indices. A probe `x` is kept in the inner-limit estimate when
//! `sup_{nu in window} dist(x, C^nu) <= tol` and in the outer-limit estimate
//! when `inf_{nu in window} dist(x, C^nu) <= tol`. The default window is the
//! last half of `1..=nu_max`.

use std::fmt::Write as _;
use std::sync::Arc;

use rayon::prelude::*;
use serde::Serialize;

use crate::cloud::PointCloud;
use crate::distance::{distances_to_set, truncated_hausdorff_detail};
use crate::error::{check_dim, Error, Result};
use crate::norm::NormSpec;
use crate::report::Table;

type Generator = Arc<dyn Fn(usize) -> PointCloud + Send + Sync>;

/// A deterministic sequence `nu -> C^nu` of clouds in `R^dim`, `nu >= 1`.
#[derive(Clone)]
pub struct SetSequence {
    dim: usize,
    generator: Generator,
}

impl std::fmt::Debug for SetSequence {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("SetSequence").field("dim", &self.dim).finish_non_exhaustive()
    }
}

impl SetSequence {
    pub fn new(dim: usize, generator: impl Fn(usize) -> PointCloud + Send + Sync + 'static) -> Self {
        SetSequence { dim, generator: Arc::new(generator) }
    }

    /// The constant sequence `C^nu = c`.
    pub fn constant(c: PointCloud) -> Self {
        let dim = c.dim();
        SetSequence::new(dim, move |_| c.clone())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// `C^nu`; fails if the generator returns a cloud of the wrong dimension.
    pub fn at(&self, nu: usize) -> Result<PointCloud> {
        if nu == 0 {
            return Err(Error::invalid("sequence indices start at 1"));
        }
        let c = (self.generator)(nu);
        if !c.is_empty() {
            check_dim(self.dim, c.dim())?;
        }
        Ok(c)
    }

    /// `nu -> C^nu ∪ D^nu`.
    pub fn union(&self, other: &SetSequence) -> Result<SetSequence> {
        check_dim(self.dim, other.dim)?;
        let (a, b) = (self.clone(), other.clone());
        let dim = self.dim;
        Ok(SetSequence::new(dim, move |nu| {
            let (ca, cb) = (a.at(nu), b.at(nu));
            match (ca, cb) {
                (Ok(ca), Ok(cb)) => ca.union(&cb).unwrap_or_else(|_| PointCloud::empty(dim)),
                _ => PointCloud::empty(dim),
            }
        }))
    }

    /// `nu -> C^nu ∩ D^nu` by exact point matching; meaningful when both
    /// sequences sample a shared grid.
    pub fn intersection_exact(&self, other: &SetSequence) -> Result<SetSequence> {
        check_dim(self.dim, other.dim)?;
        let (a, b) = (self.clone(), other.clone());
        let dim = self.dim;
        Ok(SetSequence::new(dim, move |nu| match (a.at(nu), b.at(nu)) {
            (Ok(ca), Ok(cb)) => ca.intersect_exact(&cb).unwrap_or_else(|_| PointCloud::empty(dim)),
            _ => PointCloud::empty(dim),
        }))
    }

    /// Replaces the sets at the given indices, leaving all others untouched.
    pub fn with_replaced(&self, replacements: Vec<(usize, PointCloud)>) -> SetSequence {
        let base = self.clone();
        let dim = self.dim;
        SetSequence::new(dim, move |nu| match replacements.iter().find(|(k, _)| *k == nu) {
            Some((_, c)) => c.clone(),
            None => base.at(nu).unwrap_or_else(|_| PointCloud::empty(dim)),
        })
    }
}

/// Indices `ceil(nu_max / 2)..=nu_max` (at least `1`).
pub fn tail_window(nu_max: usize) -> Vec<usize> {
    let start = nu_max.div_ceil(2).max(1);
    (start..=nu_max).collect()
}

/// Default tolerance: three times the coarser of probe and sample spacing.
pub fn default_tolerance(probe_spacing: f64, sample_spacing: f64) -> f64 {
    3.0 * probe_spacing.max(sample_spacing)
}

/// Result of an inner or outer limit estimate, with the parameters that
/// produced it.
#[derive(Clone, Debug, PartialEq)]
pub struct LimitEstimate {
    pub candidate: PointCloud,
    pub tail_start: usize,
    pub tail_end: usize,
    pub tolerance: f64,
    pub probe_grid: PointCloud,
}

/// Distance table `dists[probe][k]` to `C^{window[k]}`.
fn distance_table(seq: &SetSequence, window: &[usize], probes: &PointCloud, norm: &NormSpec) -> Result<Vec<Vec<f64>>> {
    check_dim(seq.dim(), probes.dim())?;
    let columns = window
        .par_iter()
        .map(|&nu| {
            let c = seq.at(nu)?;
            distances_to_set(probes, &c, norm)
        })
        .collect::<Result<Vec<Vec<f64>>>>()?;
    Ok((0..probes.len()).map(|i| columns.iter().map(|col| col[i]).collect()).collect())
}

fn validate(window: &[usize], probes: &PointCloud, tol: f64) -> Result<()> {
    if probes.is_empty() {
        return Err(Error::invalid("probe grid is empty"));
    }
    if window.is_empty() {
        return Err(Error::invalid("tail window is empty"));
    }
    if !(tol > 0.0) || !tol.is_finite() {
        return Err(Error::invalid(format!("tolerance must be positive, got {tol}")));
    }
    Ok(())
}

fn estimate(
    seq: &SetSequence,
    window: &[usize],
    probes: &PointCloud,
    tol: f64,
    norm: &NormSpec,
    inner: bool,
) -> Result<LimitEstimate> {
    validate(window, probes, tol)?;
    let table = distance_table(seq, window, probes, norm)?;
    let mut k = 0;
    let candidate = probes.filter(|_| {
        let row = &table[k];
        k += 1;
        let score = if inner {
            row.iter().copied().fold(0.0, f64::max)
        } else {
            row.iter().copied().fold(f64::INFINITY, f64::min)
        };
        score <= tol
    });
    Ok(LimitEstimate {
        candidate,
        tail_start: *window.iter().min().expect("window is nonempty"),
        tail_end: *window.iter().max().expect("window is nonempty"),
        tolerance: tol,
        probe_grid: probes.clone(),
    })
}

/// Probes within `tol` of every `C^nu` in the last half of `1..=nu_max`.
pub fn inner_limit_estimate(
    seq: &SetSequence,
    nu_max: usize,
    probes: &PointCloud,
    tol: f64,
    norm: &NormSpec,
) -> Result<LimitEstimate> {
    inner_limit_over(seq, &tail_window(nu_max), probes, tol, norm)
}

/// Probes within `tol` of some `C^nu` in the last half of `1..=nu_max`.
pub fn outer_limit_estimate(
    seq: &SetSequence,
    nu_max: usize,
    probes: &PointCloud,
    tol: f64,
    norm: &NormSpec,
) -> Result<LimitEstimate> {
    outer_limit_over(seq, &tail_window(nu_max), probes, tol, norm)
}

/// Inner-limit estimate over an explicit index window.
pub fn inner_limit_over(
    seq: &SetSequence,
    window: &[usize],
    probes: &PointCloud,
    tol: f64,
    norm: &NormSpec,
) -> Result<LimitEstimate> {
    estimate(seq, window, probes, tol, norm, true)
}

/// Outer-limit estimate over an explicit index window.
pub fn outer_limit_over(
    seq: &SetSequence,
    window: &[usize],
    probes: &PointCloud,
    tol: f64,
    norm: &NormSpec,
) -> Result<LimitEstimate> {
    estimate(seq, window, probes, tol, norm, false)
}

/// One row of a convergence report.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ProbeRow {
    pub probe: Vec<f64>,
    pub nu: usize,
    pub dist_seq: f64,
    pub dist_limit: f64,
    pub deviation: f64,
}

/// `dl_rho(C^nu, C)` at one index and radius.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DlRow {
    pub nu: usize,
    pub rho: f64,
    pub dl: f64,
    pub both_truncations_empty: bool,
}

/// Probe-wise comparison of `dist(x, C^nu)` with `dist(x, C)`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConvergenceReport {
    pub rows: Vec<ProbeRow>,
    /// Per probe, the largest deviation over the schedule.
    pub max_deviation: Vec<f64>,
    /// Largest deviation over probes at the last scheduled index.
    pub final_deviation: f64,
    pub tolerance: f64,
    pub verdict: bool,
    pub dl: Vec<DlRow>,
}

impl ConvergenceReport {
    pub fn to_table(&self, dim: usize) -> Table {
        let mut header: Vec<String> = (0..dim).map(|k| format!("x{k}")).collect();
        header.extend(["nu", "dist_seq", "dist_limit", "deviation"].map(String::from));
        let mut table = Table::new(header);
        for r in &self.rows {
            let mut row: Vec<String> = r.probe.iter().map(|v| v.to_string()).collect();
            row.push(r.nu.to_string());
            row.push(r.dist_seq.to_string());
            row.push(r.dist_limit.to_string());
            row.push(r.deviation.to_string());
            table.push(row);
        }
        table
    }

    pub fn dl_table(&self) -> Table {
        let mut table = Table::new(["nu", "rho", "dl", "both_truncations_empty"]);
        for r in &self.dl {
            table.push([r.nu.to_string(), r.rho.to_string(), r.dl.to_string(), r.both_truncations_empty.to_string()]);
        }
        table
    }

    pub fn summary(&self) -> String {
        let mut s = String::new();
        let _ = write!(
            s,
            "final deviation {} (tol {}): {}",
            self.final_deviation,
            self.tolerance,
            if self.verdict { "converged" } else { "not converged" }
        );
        s
    }
}

/// Tabulates `|dist(x, C^nu) - dist(x, C)|` over probes and the schedule, and
/// `dl_rho(C^nu, C)` for every `rho` in `rhos` (truncation centred at the origin).
/// The verdict is `true` iff the largest deviation at the last scheduled index
/// is at most `tol`.
pub fn set_convergence_report(
    seq: &SetSequence,
    limit: &PointCloud,
    probes: &PointCloud,
    nu_schedule: &[usize],
    tol: f64,
    rhos: &[f64],
    norm: &NormSpec,
) -> Result<ConvergenceReport> {
    if limit.is_empty() {
        return Err(Error::invalid("limit set must be nonempty"));
    }
    check_dim(seq.dim(), limit.dim())?;
    validate(nu_schedule, probes, tol)?;
    let limit_dists = distances_to_set(probes, limit, norm)?;
    let table = distance_table(seq, nu_schedule, probes, norm)?;
    let mut rows = Vec::with_capacity(probes.len() * nu_schedule.len());
    let mut max_deviation = Vec::with_capacity(probes.len());
    let mut final_deviation: f64 = 0.0;
    for (i, p) in probes.iter().enumerate() {
        let mut worst: f64 = 0.0;
        for (k, &nu) in nu_schedule.iter().enumerate() {
            let d = table[i][k];
            let dev = deviation(d, limit_dists[i]);
            worst = worst.max(dev);
            if k + 1 == nu_schedule.len() {
                final_deviation = final_deviation.max(dev);
            }
            rows.push(ProbeRow { probe: p.to_vec(), nu, dist_seq: d, dist_limit: limit_dists[i], deviation: dev });
        }
        max_deviation.push(worst);
    }
    let center = vec![0.0; seq.dim()];
    let mut dl = Vec::new();
    for &nu in nu_schedule {
        let c = seq.at(nu)?;
        for &rho in rhos {
            let det = truncated_hausdorff_detail(&c, limit, rho, norm, &center)?;
            dl.push(DlRow { nu, rho, dl: det.value.value(), both_truncations_empty: det.both_truncations_empty });
        }
    }
    Ok(ConvergenceReport { rows, max_deviation, final_deviation, tolerance: tol, verdict: final_deviation <= tol, dl })
}

fn deviation(a: f64, b: f64) -> f64 {
    if a == b {
        0.0
    } else {
        (a - b).abs()
    }
}
