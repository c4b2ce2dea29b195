//! Named mappings used by the demos.

use crate::cloud::PointCloud;
use crate::error::{Error, Result};
use crate::field::VectorField;
use crate::geneq::SetValuedMap;
use crate::grid::GridSpec;
use crate::limits::SetSequence;

const EPS: f64 = 1e-12;

/// `F(z) = Mz + q` with `M = [[2, 1], [1, 2]]`, `q = (-1, -1)`.
pub fn lcp_field() -> VectorField {
    VectorField::affine(vec![vec![2.0, 1.0], vec![1.0, 2.0]], vec![-1.0, -1.0]).expect("fixed data").with_label("lcp")
}

/// `F(x) = x - 1`.
pub fn lcp_1d_field() -> VectorField {
    VectorField::affine(vec![vec![1.0]], vec![-1.0]).expect("fixed data").with_label("lcp-1d")
}

/// `S(x) = x + sin x + 1`.
pub fn sin_homotopy_map() -> SetValuedMap {
    SetValuedMap::single_valued(
        VectorField::new(1, 1, "sin-homotopy", |x, o| o[0] = x[0] + x[0].sin() + 1.0)
            .with_jacobian(|x, j| j[0] = 1.0 + x[0].cos()),
    )
}

/// `S(x) = [x, inf)` on `[0, 1]` and `T(x) = [1 + h, inf)` on `[1, 2]`,
/// both empty elsewhere. Sampled on an output grid of spacing `h` the graph
/// distance is 1 up to `O(h)`, while `S^{-1}(0) = {0}` and `T^{-1}(B(0, d))`
/// is empty for `d <= 1`.
pub fn sharpness_pair(h: f64) -> Result<(SetValuedMap, SetValuedMap)> {
    if !(h >= 0.0 && h.is_finite()) {
        return Err(Error::invalid("sharpness offset must be finite and >= 0"));
    }
    let s = SetValuedMap::from_membership(1, 1, "sharpness-S", |x, y| {
        (-EPS..=1.0 + EPS).contains(&x[0]) && y[0] >= x[0] - EPS
    });
    let t = SetValuedMap::from_membership(1, 1, "sharpness-T", move |x, y| {
        (1.0 - EPS..=2.0 + EPS).contains(&x[0]) && y[0] >= 1.0 + h - EPS
    });
    Ok((s, t))
}

/// `S(u) = {x in [-10, 10] | u x <= 1}`.
pub fn feasible_set_map() -> SetValuedMap {
    SetValuedMap::from_membership(1, 1, "feasmap", |u, x| x[0].abs() <= 10.0 && u[0] * x[0] <= 1.0)
}

pub const MAPPING_NAMES: [&str; 4] = ["lcp", "lcp-1d", "sin-homotopy", "feasmap"];

/// Looks up a single mapping by name; `sharpness-pair` is a pair and has
/// its own constructor.
pub fn mapping(name: &str) -> Result<SetValuedMap> {
    match name {
        "lcp" => Ok(SetValuedMap::single_valued(lcp_field())),
        "lcp-1d" => Ok(SetValuedMap::single_valued(lcp_1d_field())),
        "sin-homotopy" => Ok(sin_homotopy_map()),
        "feasmap" => Ok(feasible_set_map()),
        other => {
            Err(Error::invalid(format!("unknown mapping {other:?}; expected one of {}", MAPPING_NAMES.join(", "))))
        }
    }
}

fn segment(grid: &GridSpec, lo: f64, hi: f64) -> PointCloud {
    grid.points_where(|x| x[0] >= lo && x[0] <= hi)
}

fn sample_line() -> GridSpec {
    GridSpec::line(-1.0, 1.0, 2000).expect("fixed grid")
}

/// `C^nu = {0}` for odd `nu` and `[0, 1]` for even `nu`, sampled with
/// spacing `0.001`.
pub fn odd_even_sequence() -> SetSequence {
    let g = sample_line();
    SetSequence::new(1, move |nu| {
        if nu % 2 == 1 {
            PointCloud::from_scalars(&[0.0]).expect("finite")
        } else {
            segment(&g, 0.0, 1.0)
        }
    })
}

/// `C^nu = [-1, -1/nu]` and `D^nu = [1/nu, 1]`: disjoint for every `nu`
/// although both converge to sets containing `0`.
pub fn intersection_pair() -> (SetSequence, SetSequence) {
    let (g1, g2) = (sample_line(), sample_line());
    (
        SetSequence::new(1, move |nu| segment(&g1, -1.0, -1.0 / nu as f64)),
        SetSequence::new(1, move |nu| segment(&g2, 1.0 / nu as f64, 1.0)),
    )
}

/// `C^nu = [1/nu, 2/nu]`, converging to `{0}`.
pub fn shrinking_sequence() -> SetSequence {
    let g = sample_line();
    SetSequence::new(1, move |nu| segment(&g, 1.0 / nu as f64, 2.0 / nu as f64))
}

pub const SEQUENCE_NAMES: [&str; 3] = ["odd-even", "shrinking", "intersection"];

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::GridSpec;

    #[test]
    fn lookups() {
        for name in MAPPING_NAMES {
            assert_eq!(mapping(name).unwrap().label(), name);
        }
        assert!(mapping("nope").is_err());
        assert_eq!(lcp_field().eval(&[1.0, 0.0]), vec![1.0, 0.0]);
    }

    #[test]
    fn sharpness_values() {
        let (s, t) = sharpness_pair(0.01).unwrap();
        let g = GridSpec::line(-2.0, 2.0, 400).unwrap();
        assert_eq!(s.eval(&[0.5], &g).unwrap().point(0), &[0.5]);
        assert!(s.eval(&[1.5], &g).unwrap().is_empty());
        let v = t.eval(&[1.5], &g).unwrap();
        assert!((v.point(0)[0] - 1.01).abs() < 1e-12);
        assert!(sharpness_pair(-1.0).is_err());
    }

    #[test]
    fn feasible_set_values() {
        let g = GridSpec::line(-10.0, 10.0, 20).unwrap();
        assert_eq!(feasible_set_map().eval(&[0.0], &g).unwrap().len(), 21);
        assert_eq!(feasible_set_map().eval(&[1.0], &g).unwrap().len(), 12);
    }

    #[test]
    fn sequences() {
        let s = odd_even_sequence();
        assert_eq!(s.at(3).unwrap().len(), 1);
        assert_eq!(s.at(4).unwrap().len(), 1001);
        let (c, d) = intersection_pair();
        assert!(c.at(10).unwrap().intersect_exact(&d.at(10).unwrap()).unwrap().is_empty());
        let sh = shrinking_sequence().at(10).unwrap();
        assert!(sh.iter().all(|x| x[0] >= 0.1 - 1e-12 && x[0] <= 0.2 + 1e-12));
    }
}
