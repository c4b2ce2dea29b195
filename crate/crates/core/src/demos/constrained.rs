//! Penalty, naive substitution and constraint softening on one-dimensional
//! constrained problems.

use serde::Serialize;

use crate::epi::{epi_distance_cloud, sampled_min};
use crate::error::{check_dim, Error, Result};
use crate::field::{builtin, cubic_constraint, ScalarField};
use crate::grid::GridSpec;
use crate::norm::NormSpec;
use crate::optim1d::{bisection, golden_section};
use crate::report::{fmt_f64, Table};

const ARGMIN_TOL: f64 = 1e-10;

fn check_schedule(values: &[f64], what: &str, positive: bool) -> Result<()> {
    if values.is_empty() {
        return Err(Error::invalid(format!("{what} schedule is empty")));
    }
    for &v in values {
        if !v.is_finite() || v < 0.0 || (positive && v == 0.0) {
            return Err(Error::invalid(format!("{what} schedule entry {v} is out of range")));
        }
    }
    Ok(())
}

fn strictly_decreasing(v: impl Iterator<Item = f64>) -> bool {
    let v: Vec<f64> = v.collect();
    v.windows(2).all(|w| w[1] < w[0])
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PenaltyRow {
    pub theta: f64,
    pub argmin: f64,
    /// `-1 / (1 + theta)`.
    pub argmin_exact: f64,
    pub inf: f64,
    /// `dl_rho(epi f^theta, epi f)`.
    pub dl: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PenaltyReport {
    pub rows: Vec<PenaltyRow>,
    pub dl_decreasing: bool,
    /// `|argmin|` strictly decreasing along the schedule.
    pub argmin_decreasing: bool,
    /// `|inf - 1|` at the last parameter.
    pub final_inf_gap: f64,
}

impl PenaltyReport {
    pub fn to_table(&self) -> Table {
        let mut t = Table::new(["theta", "argmin", "argmin_exact", "inf", "dl"]);
        for r in &self.rows {
            t.push([r.theta, r.argmin, r.argmin_exact, r.inf, r.dl].map(fmt_f64));
        }
        t
    }
}

/// `f^theta(x) = (x + 1)^2 + theta x^2` against `f = (x + 1)^2 + iota_{0}(x)`:
/// minimizer by golden section, epigraph distance on `grid`.
pub fn penalty_demo(thetas: &[f64], grid: &GridSpec, rho: f64) -> Result<PenaltyReport> {
    check_schedule(thetas, "penalty", false)?;
    check_dim(1, grid.dim())?;
    let limit = builtin("penalty-limit", None)?;
    let mut rows = Vec::with_capacity(thetas.len());
    for &theta in thetas {
        let f = builtin("penalty", Some(theta))?;
        let argmin = golden_section(|x| f.value(&[x]), -2.0, 1.0, ARGMIN_TOL)?;
        rows.push(PenaltyRow {
            theta,
            argmin,
            argmin_exact: -1.0 / (1.0 + theta),
            inf: f.value(&[argmin]),
            dl: epi_distance_cloud(&f, &limit, grid, rho, &NormSpec::Euclidean)?,
        });
    }
    Ok(PenaltyReport {
        dl_decreasing: strictly_decreasing(rows.iter().map(|r| r.dl)),
        argmin_decreasing: strictly_decreasing(rows.iter().map(|r| r.argmin.abs())),
        final_inf_gap: (rows.last().expect("nonempty").inf - 1.0).abs(),
        rows,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CubicRow {
    pub nu: f64,
    /// Minimizer of `-x` subject to `g(x) + 1/nu <= 0`.
    pub naive_argmin: f64,
    pub naive_dl: f64,
    pub soft_theta: f64,
    pub soft_alpha: f64,
    pub soft_argmin: f64,
    pub soft_inf: f64,
    pub soft_dl: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CubicReport {
    /// Minimizer of `-x` subject to `g(x) <= 0`.
    pub exact_argmin: f64,
    pub rows: Vec<CubicRow>,
}

impl CubicReport {
    pub fn to_table(&self) -> Table {
        let mut t = Table::new([
            "nu",
            "naive_argmin",
            "naive_dl",
            "soft_theta",
            "soft_alpha",
            "soft_argmin",
            "soft_inf",
            "soft_dl",
        ]);
        for r in &self.rows {
            t.push(
                [r.nu, r.naive_argmin, r.naive_dl, r.soft_theta, r.soft_alpha, r.soft_argmin, r.soft_inf, r.soft_dl]
                    .map(fmt_f64),
            );
        }
        t
    }
}

/// Refines a grid minimizer of a lower semicontinuous 1-D `f` by golden
/// section over the neighbouring cells.
fn refine_min(f: &ScalarField, x: f64, h: f64) -> Result<f64> {
    let best = golden_section(|t| f.value(&[t]), x - h, x + h, ARGMIN_TOL)?;
    Ok(if f.value(&[best]) <= f.value(&[x]) { best } else { x })
}

/// Largest `x` with `g(x) + shift <= 0`, from the largest feasible grid point.
fn feasible_boundary(grid: &GridSpec, shift: f64) -> Result<f64> {
    let axis = grid.axes()[0];
    let pts = axis.points();
    let k = pts
        .iter()
        .rposition(|&x| cubic_constraint(x) + shift <= 0.0)
        .ok_or_else(|| Error::invalid("no feasible grid point; widen the grid"))?;
    if k + 1 == pts.len() {
        return Ok(pts[k]);
    }
    let c = |x: f64| cubic_constraint(x) + shift;
    let root = bisection(c, pts[k], pts[k + 1], 1e-13)?;
    // Stay on the feasible side of the root.
    Ok(if c(root) <= 0.0 { root } else { pts[k] })
}

/// The naive substitution `g^nu = g + 1/nu` and the softened problem
/// `-x + theta max{0, g(x) + alpha}` with `theta = sqrt(nu)`, `alpha = 1/nu`,
/// each against `-x + iota_{g <= 0}`.
pub fn cubic_demo(nus: &[f64], grid: &GridSpec, rho: f64) -> Result<CubicReport> {
    check_schedule(nus, "nu", true)?;
    check_dim(1, grid.dim())?;
    let exact = builtin("cubic", None)?;
    let h = grid.spacing();
    let e = NormSpec::Euclidean;
    let mut rows = Vec::with_capacity(nus.len());
    for &nu in nus {
        let naive = builtin("cubic-naive", Some(nu))?;
        let soft = builtin("cubic-soft", Some(nu))?;
        let sm = sampled_min(&soft, grid, |_| true);
        let x0 = sm.argmin.iter().map(|p| p[0]).fold(f64::NEG_INFINITY, f64::max);
        let soft_argmin = refine_min(&soft, x0, h)?;
        rows.push(CubicRow {
            nu,
            naive_argmin: feasible_boundary(grid, 1.0 / nu)?,
            naive_dl: epi_distance_cloud(&naive, &exact, grid, rho, &e)?,
            soft_theta: nu.sqrt(),
            soft_alpha: 1.0 / nu,
            soft_argmin,
            soft_inf: soft.value(&[soft_argmin]),
            soft_dl: epi_distance_cloud(&soft, &exact, grid, rho, &e)?,
        });
    }
    Ok(CubicReport { exact_argmin: feasible_boundary(grid, 0.0)?, rows })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SoftenRow {
    pub nu: f64,
    pub theta: f64,
    pub alpha: f64,
    pub argmin_x: f64,
    pub argmin_y: f64,
    pub inf: f64,
    /// `dl_rho(epi f^nu, epi f)` on `R^2`.
    pub dl: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SoftenReport {
    pub theta_power: f64,
    pub alpha_power: f64,
    pub rows: Vec<SoftenRow>,
}

impl SoftenReport {
    pub fn to_table(&self) -> Table {
        let mut t = Table::new(["nu", "theta", "alpha", "argmin_x", "argmin_y", "inf", "dl"]);
        for r in &self.rows {
            t.push([r.nu, r.theta, r.alpha, r.argmin_x, r.argmin_y, r.inf, r.dl].map(fmt_f64));
        }
        t
    }
}

/// `f^nu(x, y) = -x + theta y + iota{y >= 0} + iota{g(x) + alpha <= y}`.
pub fn softened_cubic(theta: f64, alpha: f64) -> ScalarField {
    ScalarField::new(2, format!("softened(theta={theta}, alpha={alpha})"), move |p| {
        let (x, y) = (p[0], p[1]);
        if y >= 0.0 && cubic_constraint(x) + alpha <= y {
            -x + theta * y
        } else {
            f64::INFINITY
        }
    })
}

/// `f(x, y) = -x + iota{y = 0} + iota{g(x) <= y}`; `y = 0` up to `1e-12`.
pub fn lifted_cubic() -> ScalarField {
    ScalarField::new(2, "lifted-cubic", |p| {
        if p[1].abs() <= 1e-12 && cubic_constraint(p[0]) <= 0.0 {
            -p[0]
        } else {
            f64::INFINITY
        }
    })
}

/// The two-variable softening with `theta = nu^theta_power` and
/// `alpha = nu^(-alpha_power)`, compared with the lifted exact problem on a
/// grid over `(x, y)` whose `y` axis contains `0`.
pub fn soften_demo(nus: &[f64], grid: &GridSpec, rho: f64, theta_power: f64, alpha_power: f64) -> Result<SoftenReport> {
    check_schedule(nus, "nu", true)?;
    check_dim(2, grid.dim())?;
    if !(theta_power > 0.0 && alpha_power > 0.0) {
        return Err(Error::invalid("softening exponents must be positive"));
    }
    let exact = lifted_cubic();
    let e = NormSpec::Euclidean;
    let mut rows = Vec::with_capacity(nus.len());
    for &nu in nus {
        let (theta, alpha) = (nu.powf(theta_power), nu.powf(-alpha_power));
        let f = softened_cubic(theta, alpha);
        let sm = sampled_min(&f, grid, |_| true);
        if sm.argmin.is_empty() {
            return Err(Error::invalid("softened problem is infeasible on the grid; widen the y axis"));
        }
        let best = sm.argmin.point(sm.argmin.len() - 1);
        rows.push(SoftenRow {
            nu,
            theta,
            alpha,
            argmin_x: best[0],
            argmin_y: best[1],
            inf: sm.value,
            dl: epi_distance_cloud(&f, &exact, grid, rho, &e)?,
        });
    }
    Ok(SoftenReport { theta_power, alpha_power, rows })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn penalty_minimizers() {
        let grid = GridSpec::line(-2.0, 2.0, 400).unwrap();
        let r = penalty_demo(&[0.0, 1.0, 100.0], &grid, 2.0).unwrap();
        assert!((r.rows[0].argmin + 1.0).abs() < 1e-6);
        for row in &r.rows {
            assert!((row.argmin - row.argmin_exact).abs() < 1e-6);
        }
        assert!(r.dl_decreasing && r.argmin_decreasing);
        assert!(penalty_demo(&[], &grid, 2.0).is_err());
        assert!(penalty_demo(&[-1.0], &grid, 2.0).is_err());
    }

    #[test]
    fn naive_boundary_matches_root() {
        let grid = GridSpec::line(-3.0, 3.0, 600).unwrap();
        let x = feasible_boundary(&grid, 0.01).unwrap();
        assert!(x < -1.0 && x > -1.01);
        assert!(cubic_constraint(x) + 0.01 <= 0.0);
        assert!(cubic_constraint(x + 1e-9) + 0.01 > 0.0);
        assert_eq!(feasible_boundary(&grid, 0.0).unwrap(), 1.0);
    }

    #[test]
    fn cubic_instability() {
        let grid = GridSpec::line(-3.0, 3.0, 600).unwrap();
        let r = cubic_demo(&[100.0, 10000.0], &grid, 2.0).unwrap();
        assert_eq!(r.exact_argmin, 1.0);
        assert!((r.rows[0].naive_argmin + 1.0).abs() < 0.05);
        assert!(r.rows.iter().all(|row| row.naive_dl > 1.0));
        assert!(r.rows[1].soft_dl < r.rows[0].soft_dl);
        assert!((r.rows[1].soft_argmin - 1.0).abs() < 0.05);
    }

    #[test]
    fn softening_in_two_variables() {
        let grid = GridSpec::new(vec![
            crate::grid::Axis::new(-2.0, 2.0, 200).unwrap(),
            crate::grid::Axis::new(-0.05, 0.25, 300).unwrap(),
        ])
        .unwrap();
        let r = soften_demo(&[10.0, 100.0, 1000.0], &grid, 2.0, 0.5, 1.0).unwrap();
        assert!(r.rows[2].dl < r.rows[0].dl);
        assert!(r.rows.windows(2).all(|w| w[1].inf < w[0].inf));
        assert!((r.rows[2].argmin_x - 1.0).abs() < 0.05);
        assert!(soften_demo(&[10.0], &GridSpec::line(-1.0, 1.0, 4).unwrap(), 2.0, 0.5, 1.0).is_err());
    }
}
