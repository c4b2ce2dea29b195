use serde::Serialize;

use super::distance::{epi_distance_cloud, epi_distance_kenmochi};
use crate::cloud::PointCloud;
use crate::distance::{check_rho, excess};
use crate::error::{check_dim, Error, Result};
use crate::field::{EvalFn, ScalarField, VectorField};
use crate::grid::GridSpec;
use crate::norm::NormSpec;

/// Grid minimum of `f` and the grid points attaining it.
#[derive(Clone, Debug, PartialEq)]
pub struct SampledMin {
    pub value: f64,
    pub argmin: PointCloud,
}

/// Minimum of `f` over the grid points with `keep(x)`; `+inf` with an empty
/// argmin if `f` is `+inf` on all of them.
pub fn sampled_min(f: &ScalarField, grid: &GridSpec, keep: impl Fn(&[f64]) -> bool) -> SampledMin {
    let mut best = f64::INFINITY;
    let mut x = vec![0.0; grid.dim()];
    for i in 0..grid.len() {
        grid.point_into(i, &mut x);
        if keep(&x) {
            best = best.min(f.value(&x));
        }
    }
    let argmin = if best < f64::INFINITY {
        grid.points_where(|x| keep(x) && f.value(x) == best)
    } else {
        PointCloud::empty(grid.dim())
    };
    SampledMin { value: best, argmin }
}

/// Grid points of `eps-argmin f = {x in dom f : f(x) <= inf f + eps}`.
pub fn sampled_eps_argmin(f: &ScalarField, grid: &GridSpec, inf: f64, eps: f64) -> PointCloud {
    grid.points_where(|x| {
        let v = f.value(x);
        v < f64::INFINITY && v <= inf + eps
    })
}

/// Sampled check of the bounds
/// `|inf f - inf g| <= dl_rho(epi f, epi g)` and
/// `exs(eps-argmin g ∩ B(0, rho); delta-argmin f) <= dl_rho(epi f, epi g)` for `delta > eps + 2 dl`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MinimaBoundsReport {
    pub inf_f: f64,
    pub inf_g: f64,
    pub dl: f64,
    pub gap: f64,
    /// Discretization allowance used by the flags, `2h`.
    pub slack: f64,
    pub value_bound_holds: bool,
    pub epsilon: f64,
    pub delta: f64,
    pub argmin_excess: f64,
    pub argmin_bound_holds: bool,
    /// `inf f, inf g in [-rho, rho - eps)`.
    pub hypothesis_values: bool,
    /// `argmin f ∩ B(0, rho)` and `argmin g ∩ B(0, rho)` are nonempty.
    pub hypothesis_argmins: bool,
}

impl MinimaBoundsReport {
    pub fn hypotheses_hold(&self) -> bool {
        self.hypothesis_values && self.hypothesis_argmins
    }
}

/// Evaluates both bounds on the grid. `delta` defaults to `eps + 2 dl + 3h`.
pub fn minima_bounds_report(
    f: &ScalarField,
    g: &ScalarField,
    grid: &GridSpec,
    rho: f64,
    epsilon: f64,
    delta: Option<f64>,
    norm: &NormSpec,
) -> Result<MinimaBoundsReport> {
    check_dim(f.dim(), g.dim())?;
    check_rho(rho)?;
    if !(epsilon >= 0.0) {
        return Err(Error::invalid(format!("epsilon must be >= 0, got {epsilon}")));
    }
    let h = grid.spacing();
    let origin = vec![0.0; f.dim()];
    let in_ball = |x: &[f64]| norm.dist(x, &origin) <= rho;
    let mf = sampled_min(f, grid, |_| true);
    let mg = sampled_min(g, grid, |_| true);
    let dl = epi_distance_cloud(f, g, grid, rho, norm)?;
    let gap = if mf.value == mg.value { 0.0 } else { (mf.value - mg.value).abs() };
    let delta = delta.unwrap_or(epsilon + 2.0 * dl + 3.0 * h);
    let eg = sampled_eps_argmin(g, grid, mg.value, epsilon).filter(in_ball);
    let df = sampled_eps_argmin(f, grid, mf.value, delta);
    let argmin_excess = excess(&eg, &df, norm)?.value();
    let value_ok = |v: f64| v >= -rho && v < rho - epsilon;
    Ok(MinimaBoundsReport {
        inf_f: mf.value,
        inf_g: mg.value,
        dl,
        gap,
        slack: 2.0 * h,
        value_bound_holds: gap <= dl + 2.0 * h,
        epsilon,
        delta,
        argmin_excess,
        argmin_bound_holds: argmin_excess <= dl + 2.0 * h,
        hypothesis_values: value_ok(mf.value) && value_ok(mg.value),
        hypothesis_argmins: mf.argmin.iter().any(in_ball) && mg.argmin.iter().any(in_ball),
    })
}

/// A Lipschitz modulus `kappa: R_+ -> R_+`, required to be nondecreasing.
pub type Modulus<'a> = &'a dyn Fn(f64) -> f64;

/// Inputs of the composite bound for `f = f0 + h∘F` and `g = g0 + h∘G`.
pub struct CompositeInstance<'a> {
    pub f0: &'a ScalarField,
    pub g0: &'a ScalarField,
    pub big_f: &'a VectorField,
    pub big_g: &'a VectorField,
    /// Outer function `h: R^m -> R`.
    pub h: EvalFn,
    /// Lipschitz modulus of `h`.
    pub kappa: Modulus<'a>,
    /// Common Lipschitz modulus of the components of `F` and `G`.
    pub lambda: Modulus<'a>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CompositeBound {
    pub rho: f64,
    pub rho_bar: f64,
    pub rho_hat: f64,
    pub rho_star: f64,
    /// `dl_{rho_bar}(epi f0, epi g0)`.
    pub dl_parts: f64,
    /// `sup_{|x| <= rho} |F(x) - G(x)|_2`.
    pub sup_diff: f64,
    pub bound: f64,
    /// Kenmochi estimate of `dl_rho(epi f, epi g)`.
    pub dl_estimate: f64,
    /// Discretization allowance `2h + eta_tol` used by `dominates`.
    pub slack: f64,
    pub dominates: bool,
}

/// Evaluates
/// `(1 + sqrt(m) kappa(rho*) lambda(rho^)) dl_{rho_bar}(epi f0, epi g0) + kappa(rho*) sup_{B(0,rho)} |F - G|_2`
/// with the smallest radii the hypotheses allow on the grid:
/// `rho_bar = rho + max sup_{B(0,rho)} |h∘F|, |h∘G|`, `rho^ = rho + dl_{rho_bar} + h` and
/// `rho* = max sup_{B(0,rho^)} |F|_2, |G|_2`. Balls are Euclidean and the sups
/// run over grid points, so the grid should cover `B(0, rho^)`.
pub fn composite_epi_bound(
    inst: &CompositeInstance<'_>,
    grid: &GridSpec,
    rho: f64,
    eta_tol: f64,
) -> Result<CompositeBound> {
    let n = inst.f0.dim();
    check_dim(n, inst.g0.dim())?;
    check_dim(n, inst.big_f.in_dim())?;
    check_dim(n, inst.big_g.in_dim())?;
    check_dim(inst.big_f.out_dim(), inst.big_g.out_dim())?;
    check_dim(n, grid.dim())?;
    check_rho(rho)?;
    let m = inst.big_f.out_dim();
    let euclid = NormSpec::Euclidean;
    let points = grid.points();
    let norm2 = |v: &[f64]| euclid.eval(v);
    let within = |r: f64| points.iter().filter(move |x| norm2(x) <= r);

    let mut sup_h: f64 = 0.0;
    let mut sup_diff: f64 = 0.0;
    for x in within(rho) {
        let (fx, gx) = (inst.big_f.eval(x), inst.big_g.eval(x));
        sup_h = sup_h.max((inst.h)(&fx).abs()).max((inst.h)(&gx).abs());
        let d: Vec<f64> = fx.iter().zip(&gx).map(|(a, b)| a - b).collect();
        sup_diff = sup_diff.max(norm2(&d));
    }
    let rho_bar = rho + sup_h;
    let dl_parts = epi_distance_kenmochi(inst.f0, inst.g0, grid, rho_bar, &euclid, eta_tol)?;
    let rho_hat = rho + dl_parts + grid.spacing();
    let mut rho_star: f64 = 0.0;
    for x in within(rho_hat) {
        rho_star = rho_star.max(norm2(&inst.big_f.eval(x))).max(norm2(&inst.big_g.eval(x)));
    }
    let top = rho_star.max(rho_hat).max(rho_bar);
    check_modulus(inst.kappa, top)?;
    check_modulus(inst.lambda, top)?;
    let k = (inst.kappa)(rho_star);
    let l = (inst.lambda)(rho_hat);
    let bound = (1.0 + (m as f64).sqrt() * k * l) * dl_parts + k * sup_diff;

    let compose = |base: &ScalarField, map: &VectorField, label: &str| {
        let (map, h) = (map.clone(), inst.h.clone());
        base.add(&ScalarField::new(n, label, move |x| h(&map.eval(x))))
    };
    let f = compose(inst.f0, inst.big_f, "h(F)")?;
    let g = compose(inst.g0, inst.big_g, "h(G)")?;
    let dl_estimate = epi_distance_kenmochi(&f, &g, grid, rho, &euclid, eta_tol)?;
    let slack = 2.0 * grid.spacing() + eta_tol;
    Ok(CompositeBound {
        rho,
        rho_bar,
        rho_hat,
        rho_star,
        dl_parts,
        sup_diff,
        bound,
        dl_estimate,
        slack,
        dominates: dl_estimate <= bound + slack,
    })
}

/// Checks that `kappa` is nondecreasing on 65 equally spaced points of `[0, top]`.
pub fn check_modulus(kappa: Modulus<'_>, top: f64) -> Result<()> {
    let n = 64;
    let mut prev_arg = 0.0;
    let mut prev = kappa(0.0);
    for i in 1..=n {
        let t = top * i as f64 / n as f64;
        let v = kappa(t);
        if !(v >= prev) {
            return Err(Error::ModulusNotMonotone { earlier_arg: prev_arg, earlier: prev, later_arg: t, later: v });
        }
        prev_arg = t;
        prev = v;
    }
    Ok(())
}
