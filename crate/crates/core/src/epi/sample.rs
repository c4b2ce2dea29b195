use serde::Serialize;

use crate::cloud::PointCloud;
use crate::distance::check_rho;
use crate::error::{check_dim, Result};
use crate::field::ScalarField;
use crate::grid::GridSpec;
use crate::norm::NormSpec;

/// Sampled truncated epigraph `epi f ∩ B(0, rho)` in `R^(dim+1)`.
///
/// For each grid point `x` with `|x| <= rho` and `f(x) <= rho`, the cloud holds
/// the boundary point `(x, max{f(x), -rho})` and every value level
/// `k * alpha_step` strictly above it and at most `rho`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EpiCloud {
    pub cloud: PointCloud,
    pub rho: f64,
    pub alpha_step: f64,
    /// Norm on `R^(dim+1)`: `max{|x|, |alpha|}`.
    pub norm: NormSpec,
}

impl EpiCloud {
    pub fn dim(&self) -> usize {
        self.cloud.dim() - 1
    }

    pub fn is_empty(&self) -> bool {
        self.cloud.is_empty()
    }
}

/// Samples the truncated epigraph of `f` on `grid`; the value axis uses the
/// grid spacing. Points where `f = +inf` contribute nothing.
pub fn sample_epigraph(f: &ScalarField, grid: &GridSpec, rho: f64, norm: &NormSpec) -> Result<EpiCloud> {
    check_rho(rho)?;
    check_dim(f.dim(), grid.dim())?;
    norm.validate(f.dim())?;
    let step = grid.spacing();
    let origin = vec![0.0; f.dim()];
    let cloud = epigraph_points(f, grid, step, -rho, rho, |x| norm.dist(x, &origin) <= rho);
    Ok(EpiCloud { cloud, rho, alpha_step: step, norm: NormSpec::epigraph(f.dim(), norm.clone()) })
}

/// Epigraph points `(x, a)` for grid `x` with `keep(x)`: the boundary level
/// `max{f(x), floor}` and the levels `k * step` above it up to `ceiling`.
pub(crate) fn epigraph_points(
    f: &ScalarField,
    grid: &GridSpec,
    step: f64,
    floor: f64,
    ceiling: f64,
    keep: impl Fn(&[f64]) -> bool,
) -> PointCloud {
    let dim = f.dim();
    let mut out = PointCloud::empty(dim + 1);
    let mut x = vec![0.0; dim];
    let mut buf = vec![0.0; dim + 1];
    for i in 0..grid.len() {
        grid.point_into(i, &mut x);
        if !keep(&x) {
            continue;
        }
        let v = f.eval(&x).value();
        let base = v.max(floor);
        if !(base <= ceiling) {
            continue;
        }
        buf[..dim].copy_from_slice(&x);
        buf[dim] = base;
        out.push_unchecked(&buf);
        let mut k = (base / step).floor() as i64 + 1;
        loop {
            let a = k as f64 * step;
            if a > ceiling {
                break;
            }
            if a > base {
                buf[dim] = a;
                out.push_unchecked(&buf);
            }
            k += 1;
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::builtin;

    #[test]
    fn zero_function() {
        let f = ScalarField::constant(1, 0.0);
        let g = GridSpec::line(-1.0, 1.0, 20).unwrap();
        let e = sample_epigraph(&f, &g, 2.0, &NormSpec::Euclidean).unwrap();
        assert_eq!(e.cloud.len(), 21 * 21);
        assert!(e.cloud.iter().all(|p| p[1] >= 0.0 && p[1] <= 2.0));
        assert!(e.cloud.iter().any(|p| p[1] == 2.0));
    }

    #[test]
    fn indicator_of_origin() {
        let f = ScalarField::indicator(1, "i0", |x| x[0] == 0.0);
        let g = GridSpec::line(-1.0, 1.0, 20).unwrap();
        let e = sample_epigraph(&f, &g, 2.0, &NormSpec::Euclidean).unwrap();
        assert!(e.cloud.iter().all(|p| p[0] == 0.0));
        assert_eq!(e.cloud.len(), 21);
    }

    #[test]
    fn nowhere_finite_gives_empty_cloud() {
        let f = ScalarField::new(1, "inf", |_| f64::INFINITY);
        let g = GridSpec::line(-1.0, 1.0, 20).unwrap();
        assert!(sample_epigraph(&f, &g, 2.0, &NormSpec::Euclidean).unwrap().is_empty());
    }

    #[test]
    fn points_satisfy_the_epigraph_invariant() {
        let f = builtin("penalty", Some(3.0)).unwrap();
        let g = GridSpec::line(-3.0, 3.0, 300).unwrap();
        let rho = 2.5;
        let e = sample_epigraph(&f, &g, rho, &NormSpec::Euclidean).unwrap();
        for p in e.cloud.iter() {
            assert!(f.value(&p[..1]) <= p[1] + e.alpha_step);
            assert!(e.norm.eval(p) <= rho);
        }
    }

    #[test]
    fn minus_infinity_is_clamped() {
        let f = ScalarField::new(1, "-inf", |_| f64::NEG_INFINITY);
        let g = GridSpec::line(-1.0, 1.0, 2).unwrap();
        let e = sample_epigraph(&f, &g, 1.0, &NormSpec::Euclidean).unwrap();
        assert!(e.cloud.iter().all(|p| p[1] >= -1.0));
        assert!(e.cloud.iter().any(|p| p[1] == -1.0));
    }
}
