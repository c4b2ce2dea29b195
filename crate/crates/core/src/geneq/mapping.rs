use std::fmt;
use std::sync::Arc;

use serde::Serialize;

use crate::cloud::{Ball, PointCloud};
use crate::distance::{check_rho, distances_to_set, excess, truncated_hausdorff};
use crate::error::{check_dim, Error, Result};
use crate::field::VectorField;
use crate::grid::GridSpec;
use crate::norm::NormSpec;
use crate::report::{fmt_f64, Table};

type ValuesFn = Arc<dyn Fn(&[f64], &GridSpec) -> PointCloud + Send + Sync>;

/// `S: R^n =>> R^m`, represented by a sampler of `S(x)` on an output grid.
///
/// Single-valued maps evaluate exactly and ignore the output grid; set values
/// are sampled on it, so unbounded values are cut at the grid's extent.
#[derive(Clone)]
pub struct SetValuedMap {
    in_dim: usize,
    out_dim: usize,
    label: String,
    values: ValuesFn,
    single: Option<VectorField>,
}

impl fmt::Debug for SetValuedMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SetValuedMap")
            .field("in_dim", &self.in_dim)
            .field("out_dim", &self.out_dim)
            .field("label", &self.label)
            .field("single_valued", &self.single.is_some())
            .finish()
    }
}

impl SetValuedMap {
    /// `S(x) = {F(x)}`.
    pub fn single_valued(f: VectorField) -> Self {
        let g = f.clone();
        let out_dim = f.out_dim();
        SetValuedMap {
            in_dim: f.in_dim(),
            out_dim,
            label: f.label().to_string(),
            values: Arc::new(move |x, _| {
                PointCloud::from_flat(out_dim, g.eval(x)).expect("field output has out_dim entries")
            }),
            single: Some(f),
        }
    }

    /// `values(x, out_grid)` must return a cloud of dimension `out_dim`.
    pub fn from_values(
        in_dim: usize,
        out_dim: usize,
        label: impl Into<String>,
        values: impl Fn(&[f64], &GridSpec) -> PointCloud + Send + Sync + 'static,
    ) -> Self {
        SetValuedMap { in_dim, out_dim, label: label.into(), values: Arc::new(values), single: None }
    }

    /// `S(x) = {y in out_grid | member(x, y)}`.
    pub fn from_membership(
        in_dim: usize,
        out_dim: usize,
        label: impl Into<String>,
        member: impl Fn(&[f64], &[f64]) -> bool + Send + Sync + 'static,
    ) -> Self {
        SetValuedMap::from_values(in_dim, out_dim, label, move |x, grid| grid.points_where(|y| member(x, y)))
    }

    pub fn in_dim(&self) -> usize {
        self.in_dim
    }

    pub fn out_dim(&self) -> usize {
        self.out_dim
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn is_single_valued(&self) -> bool {
        self.single.is_some()
    }

    /// The underlying map when single-valued.
    pub fn as_field(&self) -> Option<&VectorField> {
        self.single.as_ref()
    }

    pub fn eval(&self, x: &[f64], out_grid: &GridSpec) -> Result<PointCloud> {
        check_dim(self.in_dim, x.len())?;
        check_dim(self.out_dim, out_grid.dim())?;
        let v = (self.values)(x, out_grid);
        if !v.is_empty() {
            check_dim(self.out_dim, v.dim())?;
        }
        Ok(v)
    }

    /// `{(x, y) | x in in_grid, y in S(x)}` in `R^(n+m)`.
    pub fn graph(&self, in_grid: &GridSpec, out_grid: &GridSpec) -> Result<PointCloud> {
        check_dim(self.in_dim, in_grid.dim())?;
        let dim = self.in_dim + self.out_dim;
        let mut coords = Vec::new();
        let mut x = vec![0.0; self.in_dim];
        for i in 0..in_grid.len() {
            in_grid.point_into(i, &mut x);
            for y in self.eval(&x, out_grid)?.iter() {
                coords.extend_from_slice(&x);
                coords.extend_from_slice(y);
            }
        }
        PointCloud::from_flat(dim, coords)
    }

    /// `(1 - lambda) S + lambda I` for a single-valued `S` with `n = m`.
    pub fn homotopy_member(&self, lambda: f64) -> Result<SetValuedMap> {
        let f = self.single.clone().ok_or_else(|| Error::invalid("homotopy needs a single-valued map"))?;
        check_dim(self.in_dim, self.out_dim)?;
        if !(0.0..=1.0).contains(&lambda) {
            return Err(Error::invalid(format!("lambda must lie in [0, 1], got {lambda}")));
        }
        let n = self.in_dim;
        let g = f.clone();
        let mut field = VectorField::new(n, n, format!("homotopy(lambda={lambda})"), move |x, out| {
            f.eval_into(x, out);
            for i in 0..n {
                out[i] = (1.0 - lambda) * out[i] + lambda * x[i];
            }
        });
        if g.has_jacobian() {
            field = field.with_jacobian(move |x, out| {
                let j = g.jacobian(x).expect("checked");
                for i in 0..n {
                    for k in 0..n {
                        out[i * n + k] = (1.0 - lambda) * j[i * n + k] + if i == k { lambda } else { 0.0 };
                    }
                }
            });
        }
        Ok(SetValuedMap::single_valued(field))
    }
}

/// `max{|x|_in, |y|_out}` on `R^n x R^m`.
pub fn graph_norm(s: &SetValuedMap, norm_in: &NormSpec, norm_out: &NormSpec) -> Result<NormSpec> {
    norm_in.validate(s.in_dim)?;
    norm_out.validate(s.out_dim)?;
    Ok(NormSpec::graph(s.in_dim, norm_in.clone(), s.out_dim, norm_out.clone()))
}

/// `dl_rho(gph S, gph T)` between sampled graphs under the product norm.
pub fn graph_distance(
    s: &SetValuedMap,
    t: &SetValuedMap,
    rho: f64,
    in_grid: &GridSpec,
    out_grid: &GridSpec,
    norm_in: &NormSpec,
    norm_out: &NormSpec,
) -> Result<f64> {
    check_dim(s.in_dim, t.in_dim)?;
    check_dim(s.out_dim, t.out_dim)?;
    check_rho(rho)?;
    let norm = graph_norm(s, norm_in, norm_out)?;
    let gs = s.graph(in_grid, out_grid)?;
    let gt = t.graph(in_grid, out_grid)?;
    let center = vec![0.0; s.in_dim + s.out_dim];
    Ok(truncated_hausdorff(&gs, &gt, rho, &norm, &center)?.value())
}

/// `S^{-1}(B) ∩ in_grid`: grid points `x` with `dist(center, S(x)) <= radius`
/// in the ball's norm.
pub fn preimage(s: &SetValuedMap, ball: &Ball, in_grid: &GridSpec, out_grid: &GridSpec) -> Result<PointCloud> {
    check_dim(s.in_dim, in_grid.dim())?;
    check_dim(s.out_dim, ball.center.len())?;
    let target = PointCloud::new(s.out_dim, vec![ball.center.clone()])?;
    let mut kept = PointCloud::empty(s.in_dim);
    let mut x = vec![0.0; s.in_dim];
    for i in 0..in_grid.len() {
        in_grid.point_into(i, &mut x);
        let values = s.eval(&x, out_grid)?;
        if values.is_empty() {
            continue;
        }
        if distances_to_set(&target, &values, &ball.norm)?[0] <= ball.radius {
            kept.push(&x)?;
        }
    }
    Ok(kept)
}

/// Both sides of the near-solution bound
/// `exs(S^{-1}(B(y, eps)) ∩ B(0, rho); T^{-1}(B(y, delta))) <= dl_rho(gph S, gph T)`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct NearSolutionReport {
    pub epsilon: f64,
    pub delta: f64,
    pub rho: f64,
    /// `dl_rho(gph S, gph T)` on the samples.
    pub dl: f64,
    /// Left-hand side; infinite when the `T` preimage is empty.
    pub excess: f64,
    pub preimage_s: usize,
    pub preimage_t: usize,
    /// `0 <= eps <= rho` and `|y| <= rho - eps`.
    pub preconditions_hold: bool,
    /// `delta > eps + dl`.
    pub delta_strict: bool,
    /// `delta` within `slack` of `eps + dl`, where the sampled bound may
    /// depend on whether the graphs are closed.
    pub boundary_case: bool,
    pub holds: bool,
    /// `2 max(h_in, h_out)`.
    pub slack: f64,
    pub holds_with_slack: bool,
    /// `dl - excess`.
    pub margin: f64,
}

impl NearSolutionReport {
    pub fn to_table(&self) -> Table {
        let mut t = Table::new(["quantity", "value"]);
        for (k, v) in [
            ("epsilon", fmt_f64(self.epsilon)),
            ("delta", fmt_f64(self.delta)),
            ("rho", fmt_f64(self.rho)),
            ("dl", fmt_f64(self.dl)),
            ("excess", fmt_f64(self.excess)),
            ("preimage_s", self.preimage_s.to_string()),
            ("preimage_t", self.preimage_t.to_string()),
            ("preconditions_hold", self.preconditions_hold.to_string()),
            ("delta_strict", self.delta_strict.to_string()),
            ("boundary_case", self.boundary_case.to_string()),
            ("holds", self.holds.to_string()),
            ("holds_with_slack", self.holds_with_slack.to_string()),
            ("margin", fmt_f64(self.margin)),
        ] {
            t.push([k.to_string(), v]);
        }
        t
    }
}

#[allow(clippy::too_many_arguments)]
pub fn near_solution_check(
    s: &SetValuedMap,
    t: &SetValuedMap,
    y_bar: &[f64],
    epsilon: f64,
    delta: f64,
    rho: f64,
    in_grid: &GridSpec,
    out_grid: &GridSpec,
    norm_in: &NormSpec,
    norm_out: &NormSpec,
) -> Result<NearSolutionReport> {
    check_dim(s.out_dim, y_bar.len())?;
    check_rho(rho)?;
    if !(epsilon >= 0.0) || !epsilon.is_finite() || !(delta >= 0.0) || !delta.is_finite() {
        return Err(Error::invalid("epsilon and delta must be finite and >= 0"));
    }
    let dl = graph_distance(s, t, rho, in_grid, out_grid, norm_in, norm_out)?;
    let ps = preimage(s, &Ball::new(y_bar.to_vec(), epsilon, norm_out.clone())?, in_grid, out_grid)?;
    let ps = ps.truncate(rho, norm_in, &vec![0.0; s.in_dim])?;
    let pt = preimage(t, &Ball::new(y_bar.to_vec(), delta, norm_out.clone())?, in_grid, out_grid)?;
    let excess = excess(&ps, &pt, norm_in)?.value();
    let slack = 2.0 * in_grid.spacing().max(out_grid.spacing());
    let gap = delta - (epsilon + dl);
    Ok(NearSolutionReport {
        epsilon,
        delta,
        rho,
        dl,
        excess,
        preimage_s: ps.len(),
        preimage_t: pt.len(),
        preconditions_hold: epsilon <= rho && norm_out.eval(y_bar) <= rho - epsilon,
        delta_strict: gap > 0.0,
        boundary_case: gap.abs() <= slack,
        holds: excess <= dl,
        slack,
        holds_with_slack: excess <= dl + slack,
        margin: dl - excess,
    })
}

/// Per-point result of a semicontinuity diagnostic.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SemicontinuityRow {
    pub x: Vec<f64>,
    /// Worst excess over the neighbours at each radius.
    pub excesses: Vec<f64>,
    pub violated: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SemicontinuityReport {
    pub radii: Vec<f64>,
    pub tol: f64,
    pub rows: Vec<SemicontinuityRow>,
    /// No point violates the check at the smallest radius.
    pub holds: bool,
}

impl SemicontinuityReport {
    pub fn violations(&self) -> impl Iterator<Item = &SemicontinuityRow> {
        self.rows.iter().filter(|r| r.violated)
    }

    pub fn to_table(&self) -> Table {
        let dim = self.rows.first().map_or(0, |r| r.x.len());
        let mut header: Vec<String> = (0..dim).map(|i| format!("x{i}")).collect();
        header.extend(self.radii.iter().map(|r| format!("excess_r={}", fmt_f64(*r))));
        header.push("violated".into());
        let mut t = Table::new(header);
        for row in &self.rows {
            let mut cells: Vec<String> = row.x.iter().map(|v| fmt_f64(*v)).collect();
            cells.extend(row.excesses.iter().map(|v| fmt_f64(*v)));
            cells.push(row.violated.to_string());
            t.push(cells);
        }
        t
    }
}

#[derive(Clone, Copy)]
enum Direction {
    Outer,
    Inner,
}

fn check_radii(radii: &[f64]) -> Result<()> {
    if radii.is_empty() || radii.iter().any(|r| !(*r > 0.0) || !r.is_finite()) {
        return Err(Error::invalid("radii must be nonempty, positive and finite"));
    }
    if radii.windows(2).any(|w| !(w[0] > w[1])) {
        return Err(Error::invalid("radii must be strictly decreasing"));
    }
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn semicontinuity(
    s: &SetValuedMap,
    in_grid: &GridSpec,
    out_grid: &GridSpec,
    radii: &[f64],
    rho: f64,
    tol: f64,
    norm_out: &NormSpec,
    dir: Direction,
) -> Result<SemicontinuityReport> {
    check_dim(s.in_dim, in_grid.dim())?;
    check_radii(radii)?;
    check_rho(rho)?;
    norm_out.validate(s.out_dim)?;
    let origin = vec![0.0; s.out_dim];
    let mut rows = Vec::with_capacity(in_grid.len());
    for i in 0..in_grid.len() {
        let x = in_grid.point(i);
        let at_x = s.eval(&x, out_grid)?;
        if matches!(dir, Direction::Inner) && at_x.is_empty() {
            continue;
        }
        let mut excesses = Vec::with_capacity(radii.len());
        let mut interior = true;
        for &r in radii {
            let mut worst: f64 = 0.0;
            for k in 0..s.in_dim {
                for sign in [-1.0, 1.0] {
                    let mut xn = x.clone();
                    xn[k] += sign * r;
                    let near = s.eval(&xn, out_grid)?;
                    let e = match dir {
                        Direction::Outer => excess(&near.truncate(rho, norm_out, &origin)?, &at_x, norm_out)?,
                        Direction::Inner => {
                            interior &= !near.is_empty();
                            excess(&at_x.truncate(rho, norm_out, &origin)?, &near, norm_out)?
                        }
                    };
                    worst = worst.max(e.value());
                }
            }
            excesses.push(worst);
        }
        if matches!(dir, Direction::Inner) && !interior {
            continue;
        }
        let violated = !(*excesses.last().expect("nonempty radii") <= tol);
        rows.push(SemicontinuityRow { x, excesses, violated });
    }
    let holds = rows.iter().all(|r| !r.violated);
    Ok(SemicontinuityReport { radii: radii.to_vec(), tol, rows, holds })
}

/// Sampled outer semicontinuity: at each grid point `x`, the neighbours
/// `x ± r e_i` for decreasing radii `r` must satisfy
/// `exs(S(x') ∩ B(0, rho); S(x)) <= tol` at the smallest radius.
///
/// A closed graph passes for radii small enough relative to the output
/// spacing; values appearing near `x` that stay away from `S(x)` fail.
pub fn osc_diagnostic(
    s: &SetValuedMap,
    in_grid: &GridSpec,
    out_grid: &GridSpec,
    radii: &[f64],
    rho: f64,
    tol: f64,
    norm_out: &NormSpec,
) -> Result<SemicontinuityReport> {
    semicontinuity(s, in_grid, out_grid, radii, rho, tol, norm_out, Direction::Outer)
}

/// Sampled inner semicontinuity, `exs(S(x) ∩ B(0, rho); S(x')) <= tol`, at
/// grid points whose neighbours all lie in `dom S`.
///
/// Only meaningful for mappings with a convex graph, which are isc at
/// interior points of their domain.
pub fn isc_diagnostic(
    s: &SetValuedMap,
    in_grid: &GridSpec,
    out_grid: &GridSpec,
    radii: &[f64],
    rho: f64,
    tol: f64,
    norm_out: &NormSpec,
) -> Result<SemicontinuityReport> {
    semicontinuity(s, in_grid, out_grid, radii, rho, tol, norm_out, Direction::Inner)
}
