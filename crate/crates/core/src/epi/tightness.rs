use serde::Serialize;

use super::bounds::{sampled_eps_argmin, sampled_min};
use crate::cloud::PointCloud;
use crate::distance::{distances_to_set, excess, truncated_hausdorff};
use crate::error::{check_dim, Error, Result};
use crate::field::{FunctionSequence, ScalarField};
use crate::grid::GridSpec;
use crate::norm::NormSpec;
use crate::report::{fmt_f64, Table};

/// Scheduled indices in the last half of the schedule: `nu >= ceil(nu_max / 2)`.
pub fn schedule_tail(nu_schedule: &[usize]) -> Result<Vec<usize>> {
    if nu_schedule.is_empty() || nu_schedule.contains(&0) {
        return Err(Error::invalid("nu schedule must be nonempty with indices >= 1"));
    }
    let nu_max = *nu_schedule.iter().max().expect("nonempty");
    let start = nu_max.div_ceil(2);
    Ok(nu_schedule.iter().copied().filter(|&nu| nu >= start).collect())
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TightnessRow {
    pub epsilon: f64,
    /// Index of the smallest listed box that works for every tail index.
    pub witness_box: Option<usize>,
    pub nu_start: usize,
    /// Tail indices at which even the largest box fails.
    pub failures: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TightnessReport {
    pub rows: Vec<TightnessRow>,
    /// Sampled `inf f^nu` per tail index.
    pub infima: Vec<(usize, f64)>,
    pub tight: bool,
}

impl TightnessReport {
    pub fn to_table(&self) -> Table {
        let mut t = Table::new(["epsilon", "witness_box", "nu_start", "failures"]);
        for r in &self.rows {
            let witness = r.witness_box.map_or_else(|| "none".to_string(), |b| b.to_string());
            let failures: Vec<String> = r.failures.iter().map(|n| n.to_string()).collect();
            t.push([fmt_f64(r.epsilon), witness, r.nu_start.to_string(), failures.join(" ")]);
        }
        t
    }
}

fn contains_box(outer: &GridSpec, inner: &GridSpec) -> bool {
    outer.dim() == inner.dim() && outer.axes().iter().zip(inner.axes()).all(|(o, i)| o.lo <= i.lo && i.hi <= o.hi)
}

/// Sampled tightness check: for each `eps`, the first box `B` in `boxes` with
/// `min_B f^nu <= inf f^nu + eps` for every tail index of `nu_schedule`.
///
/// `inf f^nu` is the grid minimum over `reference` and all boxes, so the
/// reference grid has to be large enough to see where `f^nu` gets small.
pub fn tightness_report(
    seq: &FunctionSequence,
    epsilons: &[f64],
    boxes: &[GridSpec],
    nu_schedule: &[usize],
    reference: &GridSpec,
) -> Result<TightnessReport> {
    if boxes.is_empty() {
        return Err(Error::invalid("tightness needs at least one box"));
    }
    if let Some(e) = epsilons.iter().find(|e| !(**e > 0.0)) {
        return Err(Error::invalid(format!("epsilons must be positive, got {e}")));
    }
    for b in boxes.iter().chain([reference]) {
        check_dim(seq.dim(), b.dim())?;
    }
    if boxes.windows(2).any(|w| !contains_box(&w[1], &w[0])) {
        return Err(Error::invalid("boxes must be nested and increasing"));
    }
    let tail = schedule_tail(nu_schedule)?;
    let mut box_min = Vec::with_capacity(tail.len());
    let mut infima = Vec::with_capacity(tail.len());
    for &nu in &tail {
        let f = seq.at(nu)?;
        let mins: Vec<f64> = boxes.iter().map(|b| sampled_min(&f, b, |_| true).value).collect();
        let inf = mins.iter().copied().fold(sampled_min(&f, reference, |_| true).value, f64::min);
        box_min.push(mins);
        infima.push((nu, inf));
    }
    let ok = |k: usize, b: usize, eps: f64| box_min[k][b] <= infima[k].1 + eps;
    let rows: Vec<TightnessRow> = epsilons
        .iter()
        .map(|&eps| {
            let witness_box = (0..boxes.len()).find(|&b| (0..tail.len()).all(|k| ok(k, b, eps)));
            let last = boxes.len() - 1;
            let failures = (0..tail.len()).filter(|&k| !ok(k, last, eps)).map(|k| tail[k]).collect();
            TightnessRow { epsilon: eps, witness_box, nu_start: tail[0], failures }
        })
        .collect();
    let tight = rows.iter().all(|r| r.witness_box.is_some());
    Ok(TightnessReport { rows, infima, tight })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConsequenceRow {
    pub nu: usize,
    pub eps_nu: f64,
    pub inf_nu: f64,
    pub gap: f64,
    /// Size of the sampled `eps^nu`-argmin of `f^nu`.
    pub argmin_points: usize,
    /// `dl_rho(eps^nu-argmin f^nu, argmin f)`.
    pub argmin_dl: f64,
}

/// The best `eps^nu = c nu^(-beta)` found by the search.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct VanishingTolerance {
    pub c: f64,
    pub beta: f64,
    /// `dl_rho(eps^nu-argmin f^nu, argmin f)` at the last scheduled index.
    pub final_dl: f64,
    pub converged: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConsequencesReport {
    pub inf_f: f64,
    pub rows: Vec<ConsequenceRow>,
    pub tolerance: f64,
    /// (a) outer estimate of the `eps^nu`-argmins lies within `tol` of `argmin f`.
    pub outer_excess: f64,
    pub part_a: bool,
    /// (b) `max_tail inf f^nu <= inf f + tol`.
    pub part_b: bool,
    /// (c) along the tail indices whose argmins stay within `tol` of `argmin f`,
    /// `inf f^nu` is within `tol` of `inf f`.
    pub part_c: bool,
    /// (d) `inf f^nu -> inf f` on the tail; equivalent to tightness.
    pub inf_converges: bool,
    /// (e) every point of `argmin f` is within `tol` of all tail `eps`-argmins.
    pub fixed_epsilon: f64,
    pub part_e: bool,
    /// (f, g) search diagnostic.
    pub search: VanishingTolerance,
}

impl ConsequencesReport {
    pub fn to_table(&self) -> Table {
        let mut t = Table::new(["nu", "eps_nu", "inf_nu", "inf_f", "gap", "argmin_points", "argmin_dl"]);
        for r in &self.rows {
            t.push([
                r.nu.to_string(),
                fmt_f64(r.eps_nu),
                fmt_f64(r.inf_nu),
                fmt_f64(self.inf_f),
                fmt_f64(r.gap),
                r.argmin_points.to_string(),
                fmt_f64(r.argmin_dl),
            ]);
        }
        t
    }
}

const SEARCH_C: [f64; 4] = [0.01, 0.1, 1.0, 10.0];
const SEARCH_BETA: [f64; 4] = [0.25, 0.5, 1.0, 2.0];

/// Sampled diagnostics for the consequences of `f^nu ->e f`, all on `grid`.
/// `eps_schedule[k]` is the tolerance at `nu_schedule[k]`; limits are taken
/// over the tail of the schedule with tolerance `tol`.
#[allow(clippy::too_many_arguments)]
pub fn epi_consequences_report(
    seq: &FunctionSequence,
    f: &ScalarField,
    grid: &GridSpec,
    rho: f64,
    nu_schedule: &[usize],
    eps_schedule: &[f64],
    fixed_epsilon: f64,
    tol: f64,
    norm: &NormSpec,
) -> Result<ConsequencesReport> {
    check_dim(seq.dim(), f.dim())?;
    check_dim(f.dim(), grid.dim())?;
    if nu_schedule.len() != eps_schedule.len() {
        return Err(Error::invalid("nu and eps schedules differ in length"));
    }
    if eps_schedule.iter().chain([&fixed_epsilon]).any(|e| !(*e >= 0.0)) {
        return Err(Error::invalid("tolerances must be >= 0"));
    }
    if !(tol > 0.0) {
        return Err(Error::invalid(format!("tol must be positive, got {tol}")));
    }
    let tail = schedule_tail(nu_schedule)?;
    let target = sampled_min(f, grid, |_| true);
    let origin = vec![0.0; f.dim()];
    let dl =
        |a: &PointCloud| -> Result<f64> { Ok(truncated_hausdorff(a, &target.argmin, rho, norm, &origin)?.value()) };

    let members: Vec<(ScalarField, f64)> = nu_schedule
        .iter()
        .map(|&nu| {
            let g = seq.at(nu)?;
            let inf = sampled_min(&g, grid, |_| true).value;
            Ok((g, inf))
        })
        .collect::<Result<_>>()?;
    let mut rows = Vec::with_capacity(nu_schedule.len());
    let mut outer_score = vec![f64::INFINITY; grid.len()];
    let probes = grid.points();
    let mut part_c = true;
    let mut inner_ok = true;
    for (k, (&nu, &eps)) in nu_schedule.iter().zip(eps_schedule).enumerate() {
        let (g, inf) = &members[k];
        let a = sampled_eps_argmin(g, grid, *inf, eps);
        let argmin_dl = dl(&a)?;
        let gap = (inf - target.value).abs();
        if tail.contains(&nu) {
            for (s, d) in outer_score.iter_mut().zip(distances_to_set(&probes, &a, norm)?) {
                *s = s.min(d);
            }
            let exact = sampled_eps_argmin(g, grid, *inf, 0.0);
            if excess(&exact, &target.argmin, norm)?.value() <= tol && !(gap <= tol) {
                part_c = false;
            }
            let fixed = sampled_eps_argmin(g, grid, *inf, fixed_epsilon);
            inner_ok &= excess(&target.argmin, &fixed, norm)?.value() <= tol;
        }
        rows.push(ConsequenceRow { nu, eps_nu: eps, inf_nu: *inf, gap, argmin_points: a.len(), argmin_dl });
    }
    let mut k = 0;
    let outer = probes.filter(|_| {
        k += 1;
        outer_score[k - 1] <= tol
    });
    let outer_excess = excess(&outer, &target.argmin, norm)?.value();
    let tail_rows: Vec<&ConsequenceRow> = rows.iter().filter(|r| tail.contains(&r.nu)).collect();
    let part_b = tail_rows.iter().all(|r| r.inf_nu <= target.value + tol);
    let inf_converges = target.value.is_finite() && tail_rows.iter().all(|r| r.gap <= tol);

    let last = members.len() - 1;
    let nu_last = nu_schedule[last] as f64;
    let mut search: Option<VanishingTolerance> = None;
    for c in SEARCH_C {
        for beta in SEARCH_BETA {
            let (g, inf) = &members[last];
            let final_dl = dl(&sampled_eps_argmin(g, grid, *inf, c * nu_last.powf(-beta)))?;
            if search.as_ref().is_none_or(|s| final_dl < s.final_dl) {
                search = Some(VanishingTolerance { c, beta, final_dl, converged: final_dl <= tol });
            }
        }
    }

    Ok(ConsequencesReport {
        inf_f: target.value,
        rows,
        tolerance: tol,
        outer_excess,
        part_a: outer_excess <= tol,
        part_b,
        part_c,
        inf_converges,
        fixed_epsilon,
        part_e: !inf_converges || inner_ok,
        search: search.expect("search grid is nonempty"),
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CharacterizationRow {
    pub nu: usize,
    pub radius: f64,
    /// `max_x min{f(x), rho} - min_{B(x, r)} f^nu`.
    pub violation_a: f64,
    /// `max_x min_{B(x, r)} f^nu - f(x)` over `x` with `f(x)` finite.
    pub violation_b: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CharacterizationReport {
    pub rows: Vec<CharacterizationRow>,
    pub tolerance: f64,
    /// Both violations are at most `tol` on the tail of the schedule.
    pub holds: bool,
}

/// Checks the two pointwise conditions characterizing epi-convergence on
/// `probes`: `min_{B(x, r_nu)} f^nu >= f(x) - tol` and
/// `min_{B(x, r_nu)} f^nu <= f(x) + tol`, with minima over `grid` points.
/// Infinite values of `f` are capped at `rho` in the first condition.
#[allow(clippy::too_many_arguments)]
pub fn characterization_check(
    seq: &FunctionSequence,
    f: &ScalarField,
    probes: &PointCloud,
    grid: &GridSpec,
    nu_schedule: &[usize],
    radius: impl Fn(usize) -> f64,
    rho: f64,
    tol: f64,
    norm: &NormSpec,
) -> Result<CharacterizationReport> {
    check_dim(seq.dim(), f.dim())?;
    check_dim(f.dim(), probes.dim())?;
    check_dim(f.dim(), grid.dim())?;
    let tail = schedule_tail(nu_schedule)?;
    let points = grid.points();
    let fx: Vec<f64> = probes.iter().map(|x| f.value(x)).collect();
    let mut rows = Vec::with_capacity(nu_schedule.len());
    for &nu in nu_schedule {
        let g = seq.at(nu)?;
        let r = radius(nu);
        if !(r >= 0.0) {
            return Err(Error::invalid(format!("radius at nu = {nu} must be >= 0, got {r}")));
        }
        let gv: Vec<f64> = points.iter().map(|y| g.value(y)).collect();
        let (mut va, mut vb) = (f64::NEG_INFINITY, f64::NEG_INFINITY);
        for (x, &v) in probes.iter().zip(&fx) {
            let m = points
                .iter()
                .zip(&gv)
                .filter(|(y, _)| norm.dist(x, y) <= r)
                .map(|(_, w)| *w)
                .fold(f64::INFINITY, f64::min);
            va = va.max(v.min(rho) - m.min(rho));
            if v.is_finite() {
                vb = vb.max(m - v);
            }
        }
        rows.push(CharacterizationRow { nu, radius: r, violation_a: va, violation_b: vb });
    }
    let holds = rows.iter().filter(|r| tail.contains(&r.nu)).all(|r| r.violation_a <= tol && r.violation_b <= tol);
    Ok(CharacterizationReport { rows, tolerance: tol, holds })
}
