use serde::Serialize;

use super::mapping::SetValuedMap;
use crate::cloud::PointCloud;
use crate::distance::{check_rho, truncated_hausdorff};
use crate::error::{check_dim, Error, Result};
use crate::field::VectorField;
use crate::grid::GridSpec;
use crate::norm::NormSpec;
use crate::vargeo::{subdifferential_1d, PiecewiseSmooth1D};

fn line_range(grid: &GridSpec, what: &str) -> Result<(f64, f64, f64)> {
    if grid.dim() != 1 {
        return Err(Error::invalid(format!("{what} grid must be one-dimensional")));
    }
    let a = grid.axes()[0];
    Ok((a.lo, a.hi, a.spacing()))
}

/// `gph ∂f` for a convex piecewise-smooth `f` on `R`, sampled at the points of
/// `in_grid` and at every breakpoint inside it. Subgradient intervals are
/// sampled with the spacing of `out_grid` and clipped to its range.
pub fn subgradient_graph_1d(f: &PiecewiseSmooth1D, in_grid: &GridSpec, out_grid: &GridSpec) -> Result<PointCloud> {
    let (lo, hi, _) = line_range(in_grid, "input")?;
    let (ylo, yhi, hy) = line_range(out_grid, "output")?;
    if !f.is_convex_at_breakpoints() {
        return Err(Error::invalid("subgradient graphs need a convex function"));
    }
    let mut xs = in_grid.points().coords().to_vec();
    xs.extend(f.breakpoints().iter().copied().filter(|b| (lo..=hi).contains(b)));
    xs.sort_by(f64::total_cmp);
    xs.dedup();
    let mut coords = Vec::new();
    for x in xs {
        for s in subdifferential_1d(f, x)?.samples(hy, ylo, yhi) {
            coords.push(x);
            coords.push(s);
        }
    }
    PointCloud::from_flat(2, coords)
}

/// `S(x, y, z) = {F(x) - z} x {∂φ(z) - y} x {∇F(x)^T y}` for scalar `z`, a map
/// `R^(n+2) =>> R^(n+2)`. Subgradient intervals are sampled with the spacing of
/// the second output axis and clipped to its range.
pub fn composite_mapping(phi: &PiecewiseSmooth1D, big_f: &VectorField) -> Result<SetValuedMap> {
    if big_f.out_dim() != 1 {
        return Err(Error::UnsupportedDimension(big_f.out_dim()));
    }
    if !big_f.has_jacobian() {
        return Err(Error::MissingOracle("jacobian"));
    }
    let n = big_f.in_dim();
    let (phi, f) = (phi.clone(), big_f.clone());
    Ok(SetValuedMap::from_values(n + 2, n + 2, format!("composite({})", big_f.label()), move |p, out| {
        let (x, y, z) = (&p[..n], p[n], p[n + 1]);
        let axis = out.axes()[1];
        let u = f.eval(x)[0] - z;
        let grad = f.jacobian(x).expect("checked");
        let mut coords = Vec::new();
        if let Ok(sd) = subdifferential_1d(&phi, z) {
            for s in sd.samples(axis.spacing(), axis.lo + y, axis.hi + y) {
                coords.push(u);
                coords.push(s - y);
                coords.extend(grad.iter().map(|g| g * y));
            }
        }
        PointCloud::from_flat(n + 2, coords).expect("consistent dimension")
    }))
}

/// `max{|x|_2, |y|, |z|}` on inputs and `max{|u|, |v|, |w|_2}` on outputs,
/// combined by the maximum.
pub fn composite_graph_norm(n: usize) -> NormSpec {
    NormSpec::Product {
        blocks: vec![
            (n, NormSpec::Euclidean),
            (1, NormSpec::Max),
            (1, NormSpec::Max),
            (1, NormSpec::Max),
            (1, NormSpec::Max),
            (n, NormSpec::Euclidean),
        ],
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CompositeStationarity {
    pub rho: f64,
    /// `sup |G(x) - F(x)|_2` over grid points with `|x|_2 <= rho`.
    pub sup_value_gap: f64,
    /// `sup rho |∇G(x) - ∇F(x)|_F` over the same points.
    pub sup_jacobian_gap: f64,
    /// `dl_{2 rho}(gph ∂φ, gph ∂ψ)` under `max{|z|, |y|}`.
    pub dl_subgradients: f64,
    pub bound: f64,
    /// Directly sampled `dl_rho(gph S, gph T)` when requested.
    pub sampled_dl: Option<f64>,
    /// `2 max` grid spacing allowance for `dominates`.
    pub slack: f64,
    pub dominates: Option<bool>,
}

/// Grids for the direct cross-check of the composite bound: inputs
/// `(x, y, z)` and outputs `(u, v, w)`.
pub struct CrossCheckGrids<'a> {
    pub input: &'a GridSpec,
    pub output: &'a GridSpec,
}

/// `sup_{|x|_2 <= rho} max{|G(x) - F(x)|_2 + dl_{2 rho}(gph ∂φ, gph ∂ψ), rho |∇G(x) - ∇F(x)|_F}`
/// for scalar-valued `F`, `G` and convex piecewise-smooth `φ`, `ψ`.
///
/// The sup runs over points of `x_grid`; the subgradient graphs are sampled on
/// `z_grid` x `y_grid`. With `cross_check` the graphs of `S` and `T` are also
/// sampled directly and compared with the bound.
#[allow(clippy::too_many_arguments)]
pub fn composite_stationarity_bound(
    phi: &PiecewiseSmooth1D,
    psi: &PiecewiseSmooth1D,
    big_f: &VectorField,
    big_g: &VectorField,
    rho: f64,
    x_grid: &GridSpec,
    z_grid: &GridSpec,
    y_grid: &GridSpec,
    cross_check: Option<CrossCheckGrids<'_>>,
) -> Result<CompositeStationarity> {
    check_rho(rho)?;
    let n = big_f.in_dim();
    check_dim(n, big_g.in_dim())?;
    check_dim(n, x_grid.dim())?;
    for m in [big_f.out_dim(), big_g.out_dim()] {
        if m != 1 {
            return Err(Error::UnsupportedDimension(m));
        }
    }
    if !big_f.has_jacobian() || !big_g.has_jacobian() {
        return Err(Error::MissingOracle("jacobian"));
    }
    let euclid = NormSpec::Euclidean;
    let mut sup_value_gap: f64 = 0.0;
    let mut sup_jacobian_gap: f64 = 0.0;
    for x in x_grid.points().iter().filter(|x| euclid.eval(x) <= rho) {
        sup_value_gap = sup_value_gap.max((big_g.eval(x)[0] - big_f.eval(x)[0]).abs());
        let (jf, jg) = (big_f.jacobian(x).expect("checked"), big_g.jacobian(x).expect("checked"));
        let frob = jf.iter().zip(&jg).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt();
        sup_jacobian_gap = sup_jacobian_gap.max(rho * frob);
    }
    let gphi = subgradient_graph_1d(phi, z_grid, y_grid)?;
    let gpsi = subgradient_graph_1d(psi, z_grid, y_grid)?;
    let dl_subgradients = truncated_hausdorff(&gphi, &gpsi, 2.0 * rho, &NormSpec::Max, &[0.0, 0.0])?.value();
    let bound = (sup_value_gap + dl_subgradients).max(sup_jacobian_gap);

    let mut slack = 2.0 * x_grid.spacing().max(z_grid.spacing()).max(y_grid.spacing());
    let sampled_dl = match cross_check {
        None => None,
        Some(grids) => {
            let s = composite_mapping(phi, big_f)?;
            let t = composite_mapping(psi, big_g)?;
            let gs = s.graph(grids.input, grids.output)?;
            let gt = t.graph(grids.input, grids.output)?;
            slack = slack.max(2.0 * grids.input.spacing().max(grids.output.spacing()));
            let center = vec![0.0; 2 * n + 4];
            Some(truncated_hausdorff(&gs, &gt, rho, &composite_graph_norm(n), &center)?.value())
        }
    };
    Ok(CompositeStationarity {
        rho,
        sup_value_gap,
        sup_jacobian_gap,
        dl_subgradients,
        bound,
        sampled_dl,
        slack,
        dominates: sampled_dl.map(|d| d <= bound + slack),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geneq::sigmoid;
    use crate::geneq::smooth_plus;
    use crate::vargeo::SmoothPiece;

    fn line(lo: f64, hi: f64, h: f64) -> GridSpec {
        GridSpec::line_with_spacing(lo, hi, h).unwrap()
    }

    fn abs() -> PiecewiseSmooth1D {
        PiecewiseSmooth1D::scaled_abs(1.0).unwrap()
    }

    #[test]
    fn half_square_gives_identity() {
        let f = PiecewiseSmooth1D::smooth(SmoothPiece::polynomial(vec![0.0, 0.0, 0.5]));
        let g = subgradient_graph_1d(&f, &line(-1.0, 1.0, 0.1), &line(-2.0, 2.0, 0.1)).unwrap();
        assert_eq!(g.len(), 21);
        assert!(g.iter().all(|p| (p[0] - p[1]).abs() < 1e-15));
    }

    #[test]
    fn abs_graph_matches_subdifferential() {
        let h = 0.05;
        let g = subgradient_graph_1d(&abs(), &line(-1.0, 1.0, h), &line(-2.0, 2.0, h)).unwrap();
        let vertical: Vec<f64> = g.iter().filter(|p| p[0] == 0.0).map(|p| p[1]).collect();
        assert_eq!(vertical.len(), 41);
        assert_eq!((vertical[0], vertical[40]), (-1.0, 1.0));
        for p in g.iter().filter(|p| p[0] != 0.0) {
            assert_eq!(p[1], p[0].signum());
            assert!(subdifferential_1d(&abs(), p[0]).unwrap().contains(p[1], 0.0));
        }
        // An off-grid kink still contributes its segment.
        let shifted = PiecewiseSmooth1D::kink(0.013, 0.0, -1.0, 1.0).unwrap();
        let g = subgradient_graph_1d(&shifted, &line(-1.0, 1.0, h), &line(-2.0, 2.0, h)).unwrap();
        assert_eq!(g.iter().filter(|p| p[0] == 0.013).count(), 41);
    }

    #[test]
    fn scaled_abs_graphs_converge() {
        let (gi, go) = (line(-3.0, 3.0, 0.01), line(-3.0, 3.0, 0.01));
        let base = subgradient_graph_1d(&abs(), &gi, &go).unwrap();
        let mut prev = f64::INFINITY;
        for nu in [10.0, 100.0, 1000.0] {
            let f = PiecewiseSmooth1D::scaled_abs(1.0 + 1.0 / nu).unwrap();
            let g = subgradient_graph_1d(&f, &gi, &go).unwrap();
            let d = truncated_hausdorff(&g, &base, 2.0, &NormSpec::Max, &[0.0, 0.0]).unwrap().value();
            assert!(d <= 1.0 / nu + 0.02, "{nu}: {d}");
            assert!(d <= prev);
            prev = d;
        }
    }

    #[test]
    fn nonconvex_is_rejected() {
        let f = PiecewiseSmooth1D::kink(0.0, 0.0, 1.0, -1.0).unwrap();
        assert!(subgradient_graph_1d(&f, &line(-1.0, 1.0, 0.1), &line(-1.0, 1.0, 0.1)).is_err());
    }

    fn affine(c: f64, slope: f64) -> VectorField {
        VectorField::affine(vec![vec![slope]], vec![c]).unwrap()
    }

    #[test]
    fn identical_problems_give_zero() {
        let f = affine(0.0, 1.0);
        let g1 = line(-2.0, 2.0, 0.05);
        let r = composite_stationarity_bound(&abs(), &abs(), &f, &f, 1.0, &g1, &g1, &g1, None).unwrap();
        assert_eq!(r.bound, 0.0);
    }

    #[test]
    fn constant_shift() {
        let c = 0.1;
        let (f, g) = (affine(0.0, 1.0), affine(c, 1.0));
        let g1 = line(-2.0, 2.0, 0.05);
        let input = GridSpec::cube(3, -1.2, 1.2, 12).unwrap();
        let output = GridSpec::cube(3, -3.0, 3.0, 60).unwrap();
        let cross = CrossCheckGrids { input: &input, output: &output };
        let r = composite_stationarity_bound(&abs(), &abs(), &f, &g, 1.0, &g1, &g1, &g1, Some(cross)).unwrap();
        assert!((r.bound - c).abs() < 1e-12);
        assert!(r.dominates.unwrap(), "{r:?}");
        assert!(r.sampled_dl.unwrap() <= c + 1e-12);
    }

    #[test]
    fn smoothed_abs_term() {
        let theta = 20.0;
        let psi = PiecewiseSmooth1D::smooth(SmoothPiece::new(
            move |z| smooth_plus(z, theta).unwrap() + smooth_plus(-z, theta).unwrap(),
            move |z| sigmoid(theta * z) - sigmoid(-theta * z),
        ));
        let f = affine(0.0, 1.0);
        let g1 = line(-2.0, 2.0, 0.01);
        let r = composite_stationarity_bound(&abs(), &psi, &f, &f, 1.0, &g1, &g1, &g1, None).unwrap();
        assert!(r.dl_subgradients > 0.0 && r.dl_subgradients < 0.2, "{r:?}");
        assert_eq!(r.bound, r.dl_subgradients);
    }

    #[test]
    fn needs_jacobians() {
        let f = VectorField::new(1, 1, "f", |x, o| o[0] = x[0]);
        let g1 = line(-1.0, 1.0, 0.1);
        let err = composite_stationarity_bound(&abs(), &abs(), &f, &f, 1.0, &g1, &g1, &g1, None).unwrap_err();
        assert_eq!(err, Error::MissingOracle("jacobian"));
    }
}
