use rayon::prelude::*;
use serde::Serialize;

use super::sample::{epigraph_points, sample_epigraph};
use crate::cloud::PointCloud;
use crate::distance::{check_rho, excess};
use crate::error::{check_dim, Error, Result};
use crate::field::ScalarField;
use crate::grid::GridSpec;
use crate::norm::NormSpec;

/// Both parts of a sampled epigraph distance.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EpiDistance {
    pub value: f64,
    /// `exs(epi f ∩ B; epi g)`.
    pub excess_fg: f64,
    /// `exs(epi g ∩ B; epi f)`.
    pub excess_gf: f64,
}

/// `dl_rho(epi f, epi g)` between sampled epigraphs under `max{|x|, |alpha|}`.
///
/// Each truncated cloud from [`sample_epigraph`] is measured against an
/// untruncated sample of the other epigraph over the whole grid. That sample
/// stops at level `rho + pad`; when a distance exceeds `pad` the padding is
/// doubled and the distance recomputed, so the cut never changes the result.
pub fn epi_distance_cloud(f: &ScalarField, g: &ScalarField, grid: &GridSpec, rho: f64, norm: &NormSpec) -> Result<f64> {
    Ok(epi_distance_cloud_detail(f, g, grid, rho, norm)?.value)
}

pub fn epi_distance_cloud_detail(
    f: &ScalarField,
    g: &ScalarField,
    grid: &GridSpec,
    rho: f64,
    norm: &NormSpec,
) -> Result<EpiDistance> {
    check_dim(f.dim(), g.dim())?;
    let sf = sample_epigraph(f, grid, rho, norm)?;
    let sg = sample_epigraph(g, grid, rho, norm)?;
    if sf.is_empty() && sg.is_empty() {
        return Err(Error::NoEpigraph);
    }
    let excess_fg = excess_over_epigraph(&sf.cloud, g, grid, rho, &sf.norm)?;
    let excess_gf = excess_over_epigraph(&sg.cloud, f, grid, rho, &sf.norm)?;
    Ok(EpiDistance { value: excess_fg.max(excess_gf), excess_fg, excess_gf })
}

// Excess of `source` (levels in [-rho, rho]) over the epigraph of `target`.
fn excess_over_epigraph(
    source: &PointCloud,
    target: &ScalarField,
    grid: &GridSpec,
    rho: f64,
    product: &NormSpec,
) -> Result<f64> {
    if source.is_empty() {
        return Ok(0.0);
    }
    let step = grid.spacing();
    let mut pad = (8.0 * step).max(0.25 * rho);
    loop {
        // Levels below -rho are never closer to a source point than the level -rho itself.
        let cloud = epigraph_points(target, grid, step, -rho, rho + pad, |_| true);
        let e = excess(source, &cloud, product)?.value();
        if e <= pad || !e.is_finite() {
            return Ok(e);
        }
        pad *= 2.0;
    }
}

/// `dl_rho(epi f, epi g)` from the Kenmochi condition: the smallest `eta` with
///
/// - `min_{x in B(x̄, eta)} g(x) <= max{f(x̄), -rho} + eta` for all `x̄` in `{f <= rho} ∩ B(0, rho)`,
/// - the same with `f` and `g` exchanged,
///
/// where `x̄` and `x` range over grid points. `eta` is located by bisection on
/// `[0, 2 rho]` to within `eta_tol`; if `2 rho` is not feasible the bracket is
/// doubled until it is. Returns `+inf` if no finite `eta` works on the grid.
pub fn epi_distance_kenmochi(
    f: &ScalarField,
    g: &ScalarField,
    grid: &GridSpec,
    rho: f64,
    norm: &NormSpec,
    eta_tol: f64,
) -> Result<f64> {
    check_dim(f.dim(), g.dim())?;
    check_dim(f.dim(), grid.dim())?;
    check_rho(rho)?;
    norm.validate(f.dim())?;
    if !(eta_tol > 0.0) {
        return Err(Error::invalid(format!("eta_tol must be positive, got {eta_tol}")));
    }
    let points = grid.points();
    let fv: Vec<f64> = points.iter().map(|x| f.value(x)).collect();
    let gv: Vec<f64> = points.iter().map(|x| g.value(x)).collect();
    let origin = vec![0.0; f.dim()];
    let level = |v: &[f64]| -> Vec<(usize, f64)> {
        points
            .iter()
            .enumerate()
            .filter(|(i, x)| v[*i] <= rho && norm.dist(x, &origin) <= rho)
            .map(|(i, _)| (i, v[i].max(-rho)))
            .collect()
    };
    let (lf, lg) = (level(&fv), level(&gv));
    if lf.is_empty() && lg.is_empty() {
        return Err(Error::NoEpigraph);
    }
    let side = |sources: &[(usize, f64)], other: &[f64], eta: f64| {
        sources.par_iter().all(|&(i, m)| {
            let xi = points.point(i);
            (0..points.len()).any(|j| other[j] <= m + eta && norm.dist(points.point(j), xi) <= eta)
        })
    };
    let feasible = |eta: f64| side(&lf, &gv, eta) && side(&lg, &fv, eta);
    if (!lf.is_empty() && gv.iter().all(|v| v.is_infinite() && *v > 0.0))
        || (!lg.is_empty() && fv.iter().all(|v| v.is_infinite() && *v > 0.0))
    {
        return Ok(f64::INFINITY);
    }
    if feasible(0.0) {
        return Ok(0.0);
    }
    let mut lo = 0.0;
    let mut hi = (2.0 * rho).max(eta_tol);
    while !feasible(hi) {
        lo = hi;
        hi *= 2.0;
        if !hi.is_finite() {
            return Ok(f64::INFINITY);
        }
    }
    while hi - lo > eta_tol {
        let mid = 0.5 * (lo + hi);
        if feasible(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(hi)
}

/// Distance between hypographs: `dl_rho(epi(-f), epi(-g))`.
pub fn hypo_distance(f: &ScalarField, g: &ScalarField, grid: &GridSpec, rho: f64, norm: &NormSpec) -> Result<f64> {
    epi_distance_cloud(&f.neg(), &g.neg(), grid, rho, norm)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::distance::truncated_hausdorff;
    use crate::field::builtin;

    fn line(lo: f64, hi: f64, steps: usize) -> GridSpec {
        GridSpec::line(lo, hi, steps).unwrap()
    }

    #[test]
    fn identical_functions_are_at_distance_zero() {
        let f = builtin("penalty", Some(5.0)).unwrap();
        let g = line(-2.0, 2.0, 200);
        let n = NormSpec::Euclidean;
        assert_eq!(epi_distance_cloud(&f, &f, &g, 2.0, &n).unwrap(), 0.0);
        assert_eq!(epi_distance_kenmochi(&f, &f, &g, 2.0, &n, 0.005).unwrap(), 0.0);
        assert_eq!(hypo_distance(&f, &f, &g, 2.0, &n).unwrap(), 0.0);
    }

    #[test]
    fn vertical_shift_by_one() {
        let h = 0.01;
        let g = line(-2.0, 2.0, 400);
        let n = NormSpec::Euclidean;
        let f0 = ScalarField::constant(1, 0.0);
        let f1 = ScalarField::constant(1, 1.0);
        let cloud = epi_distance_cloud(&f0, &f1, &g, 2.0, &n).unwrap();
        assert!((cloud - 1.0).abs() <= h, "{cloud}");
        let ken = epi_distance_kenmochi(&f0, &f1, &g, 2.0, &n, h / 2.0).unwrap();
        assert!((ken - 1.0).abs() <= h, "{ken}");
    }

    #[test]
    fn cloud_distance_equals_plain_hausdorff_of_big_samples() {
        // Oracle: materialize both epigraphs on a tall window and take the
        // truncated Hausdorff distance directly.
        let f = builtin("penalty", Some(2.0)).unwrap();
        let g = ScalarField::quadratic(vec![vec![2.0]], vec![0.5], -0.3).unwrap();
        let grid = line(-2.0, 2.0, 100);
        let rho = 1.5;
        let n = NormSpec::Euclidean;
        let tall = |h: &ScalarField| epigraph_points(h, &grid, grid.spacing(), -rho, 50.0, |_| true);
        let prod = NormSpec::epigraph(1, NormSpec::Euclidean);
        let oracle = truncated_hausdorff(&tall(&f), &tall(&g), rho, &prod, &[0.0, 0.0]).unwrap().value();
        let value = epi_distance_cloud(&f, &g, &grid, rho, &n).unwrap();
        assert_eq!(value, oracle);
    }

    #[test]
    fn empty_epigraphs_are_an_error() {
        let inf = ScalarField::new(1, "inf", |_| f64::INFINITY);
        let g = line(-1.0, 1.0, 10);
        let n = NormSpec::Euclidean;
        assert_eq!(epi_distance_cloud(&inf, &inf, &g, 1.0, &n).unwrap_err(), Error::NoEpigraph);
        assert_eq!(epi_distance_kenmochi(&inf, &inf, &g, 1.0, &n, 0.01).unwrap_err(), Error::NoEpigraph);
    }

    #[test]
    fn point_mass_cdfs() {
        let grid = line(-2.0, 2.0, 400);
        let n = NormSpec::Euclidean;
        let limit = builtin("cdf-point-mass", Some(0.0)).unwrap();
        for nu in [2.0, 5.0, 20.0] {
            let f = builtin("cdf-point-mass", Some(1.0 / nu)).unwrap();
            let d = hypo_distance(&f, &limit, &grid, 2.0, &n).unwrap();
            assert!(d <= 1.0 / nu + grid.spacing() + 1e-12, "nu={nu}: {d}");
        }
    }

    #[test]
    fn monotone_in_rho() {
        let f = builtin("penalty", Some(4.0)).unwrap();
        let g = builtin("penalty", Some(1.0)).unwrap();
        let grid = line(-3.0, 3.0, 120);
        let n = NormSpec::Euclidean;
        let mut last = 0.0;
        for rho in [0.5, 1.0, 2.0, 3.0] {
            let d = epi_distance_cloud(&f, &g, &grid, rho, &n).unwrap();
            assert!(d >= last);
            last = d;
        }
    }
}
