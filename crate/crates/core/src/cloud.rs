//! Finite point clouds, the universal set representation.

use std::collections::HashSet;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{check_dim, Error, Result};
use crate::norm::NormSpec;

/// A finite (possibly empty) subset of `R^dim`, stored row-major.
///
/// Coordinates are finite: NaN and infinities are rejected on construction.
#[derive(Clone, Debug, PartialEq)]
pub struct PointCloud {
    dim: usize,
    coords: Vec<f64>,
}

impl PointCloud {
    pub fn empty(dim: usize) -> Self {
        PointCloud { dim, coords: Vec::new() }
    }

    pub fn new(dim: usize, points: Vec<Vec<f64>>) -> Result<Self> {
        let mut cloud = PointCloud::empty(dim);
        cloud.coords.reserve(points.len() * dim);
        for p in points {
            cloud.push(&p)?;
        }
        Ok(cloud)
    }

    /// Builds a cloud from row-major coordinates.
    pub fn from_flat(dim: usize, coords: Vec<f64>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::invalid("point cloud dimension must be positive"));
        }
        if !coords.len().is_multiple_of(dim) {
            return Err(Error::invalid(format!("{} coordinates do not form points of dimension {dim}", coords.len())));
        }
        if let Some(bad) = coords.iter().find(|c| !c.is_finite()) {
            return Err(Error::invalid(format!("non-finite coordinate {bad}")));
        }
        Ok(PointCloud { dim, coords })
    }

    /// One-dimensional cloud from scalars.
    pub fn from_scalars(values: &[f64]) -> Result<Self> {
        PointCloud::from_flat(1, values.to_vec())
    }

    pub fn push(&mut self, p: &[f64]) -> Result<()> {
        check_dim(self.dim, p.len())?;
        if let Some(bad) = p.iter().find(|c| !c.is_finite()) {
            return Err(Error::invalid(format!("non-finite coordinate {bad}")));
        }
        self.coords.extend_from_slice(p);
        Ok(())
    }

    // Callers guarantee finiteness and length.
    pub(crate) fn push_unchecked(&mut self, p: &[f64]) {
        debug_assert_eq!(p.len(), self.dim);
        debug_assert!(p.iter().all(|c| c.is_finite()));
        self.coords.extend_from_slice(p);
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.coords.len().checked_div(self.dim).unwrap_or(0)
    }

    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.coords[i * self.dim..(i + 1) * self.dim]
    }

    pub fn iter(&self) -> impl ExactSizeIterator<Item = &[f64]> + '_ {
        self.coords.chunks_exact(self.dim.max(1))
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    pub fn to_vecs(&self) -> Vec<Vec<f64>> {
        self.iter().map(|p| p.to_vec()).collect()
    }

    /// Applies `f` to every point; the result may have a different dimension.
    pub fn map_points(&self, out_dim: usize, f: impl Fn(&[f64], &mut [f64])) -> Result<Self> {
        let mut out = PointCloud::empty(out_dim);
        let mut buf = vec![0.0; out_dim];
        for p in self.iter() {
            f(p, &mut buf);
            out.push(&buf)?;
        }
        Ok(out)
    }

    pub fn filter(&self, mut keep: impl FnMut(&[f64]) -> bool) -> Self {
        let mut out = PointCloud::empty(self.dim);
        for p in self.iter().filter(|p| keep(p)) {
            out.coords.extend_from_slice(p);
        }
        out
    }

    /// Points of `self` followed by points of `other`.
    pub fn union(&self, other: &PointCloud) -> Result<Self> {
        check_dim(self.dim, other.dim)?;
        let mut coords = self.coords.clone();
        coords.extend_from_slice(&other.coords);
        Ok(PointCloud { dim: self.dim, coords })
    }

    /// Points of `self` that also occur in `other`, matched coordinate by
    /// coordinate with exact equality (`-0.0 == 0.0`). No proximity matching.
    pub fn intersect_exact(&self, other: &PointCloud) -> Result<Self> {
        check_dim(self.dim, other.dim)?;
        let keys: HashSet<Vec<u64>> = other.iter().map(point_key).collect();
        Ok(self.filter(|p| keys.contains(&point_key(p))))
    }

    /// Removes exact duplicates, keeping first occurrences in order.
    pub fn dedup(&self) -> Self {
        let mut seen = HashSet::new();
        self.filter(|p| seen.insert(point_key(p)))
    }

    /// Points within `rho` of `center` (closed ball).
    pub fn truncate(&self, rho: f64, norm: &NormSpec, center: &[f64]) -> Result<Self> {
        if self.is_empty() {
            return Ok(self.clone());
        }
        check_dim(self.dim, center.len())?;
        Ok(self.filter(|p| norm.dist(p, center) <= rho))
    }

    /// Coordinate-wise bounding box, `None` for an empty cloud.
    pub fn bounds(&self) -> Option<(Vec<f64>, Vec<f64>)> {
        if self.is_empty() {
            return None;
        }
        let mut lo = self.point(0).to_vec();
        let mut hi = lo.clone();
        for p in self.iter() {
            for i in 0..self.dim {
                lo[i] = lo[i].min(p[i]);
                hi[i] = hi[i].max(p[i]);
            }
        }
        Some((lo, hi))
    }
}

fn point_key(p: &[f64]) -> Vec<u64> {
    // Adding 0.0 turns -0.0 into +0.0.
    p.iter().map(|c| (c + 0.0).to_bits()).collect()
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct CloudRepr {
    dim: usize,
    points: Vec<Vec<f64>>,
}

impl Serialize for PointCloud {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        CloudRepr { dim: self.dim, points: self.to_vecs() }.serialize(s)
    }
}

impl<'de> Deserialize<'de> for PointCloud {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let repr = CloudRepr::deserialize(d)?;
        if repr.dim == 0 {
            return Err(serde::de::Error::custom("dim: must be positive"));
        }
        for (i, p) in repr.points.iter().enumerate() {
            if p.len() != repr.dim {
                return Err(serde::de::Error::custom(format!(
                    "points[{i}]: has {} coordinates, dim is {}",
                    p.len(),
                    repr.dim
                )));
            }
        }
        PointCloud::new(repr.dim, repr.points).map_err(serde::de::Error::custom)
    }
}

/// Closed ball `{y : |y - center| <= radius}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Ball {
    pub center: Vec<f64>,
    pub radius: f64,
    pub norm: NormSpec,
}

impl Ball {
    pub fn new(center: Vec<f64>, radius: f64, norm: NormSpec) -> Result<Self> {
        if !(radius >= 0.0) || !radius.is_finite() {
            return Err(Error::invalid(format!("ball radius must be finite and >= 0, got {radius}")));
        }
        norm.validate(center.len())?;
        Ok(Ball { center, radius, norm })
    }

    pub fn contains(&self, y: &[f64]) -> bool {
        self.norm.dist(y, &self.center) <= self.radius
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_non_finite_and_ragged() {
        assert!(PointCloud::new(1, vec![vec![f64::NAN]]).is_err());
        assert!(PointCloud::new(1, vec![vec![f64::INFINITY]]).is_err());
        assert!(PointCloud::new(2, vec![vec![1.0]]).is_err());
        assert!(PointCloud::from_flat(2, vec![1.0, 2.0, 3.0]).is_err());
    }

    #[test]
    fn truncate_examples() {
        let c = PointCloud::from_scalars(&[-2.0, 0.0, 2.0]).unwrap();
        let t = c.truncate(1.0, &NormSpec::Euclidean, &[0.0]).unwrap();
        assert_eq!(t.coords(), &[0.0]);

        let e = PointCloud::empty(1);
        assert!(e.truncate(10.0, &NormSpec::Euclidean, &[0.0]).unwrap().is_empty());

        let corner = PointCloud::new(2, vec![vec![1.0, 1.0]]).unwrap();
        let t = corner.truncate(1.0, &NormSpec::Max, &[0.0, 0.0]).unwrap();
        assert_eq!(t.len(), 1);
        let t = corner.truncate(1.0, &NormSpec::Euclidean, &[0.0, 0.0]).unwrap();
        assert!(t.is_empty());
    }

    #[test]
    fn exact_intersection_does_not_match_nearby_points() {
        let a = PointCloud::from_scalars(&[-0.0, 0.1, 0.2]).unwrap();
        let b = PointCloud::from_scalars(&[0.0, 0.1 + 1e-15, 0.2]).unwrap();
        let i = a.intersect_exact(&b).unwrap();
        assert_eq!(i.coords(), &[-0.0, 0.2]);
    }

    #[test]
    fn dedup_keeps_first_occurrences() {
        let a = PointCloud::from_scalars(&[1.0, 2.0, 1.0, 3.0, 2.0]).unwrap();
        assert_eq!(a.dedup().coords(), &[1.0, 2.0, 3.0]);
    }

    #[test]
    fn json_names_the_offending_field() {
        let err = serde_json::from_str::<PointCloud>(r#"{"dim":2,"points":[[1,2],[3]]}"#).unwrap_err().to_string();
        assert!(err.contains("points[1]"), "{err}");
        let err = serde_json::from_str::<PointCloud>(r#"{"dim":0,"points":[]}"#).unwrap_err().to_string();
        assert!(err.contains("dim"), "{err}");
        let c: PointCloud = serde_json::from_str(r#"{"dim":2,"points":[[1,2],[3,4]]}"#).unwrap();
        assert_eq!(c.len(), 2);
        assert_eq!(c.point(1), &[3.0, 4.0]);
    }

    #[test]
    fn ball_membership() {
        let b = Ball::new(vec![0.0, 0.0], 1.0, NormSpec::Max).unwrap();
        assert!(b.contains(&[1.0, -1.0]));
        assert!(!b.contains(&[1.0, 1.01]));
        assert!(Ball::new(vec![0.0], -1.0, NormSpec::Max).is_err());
    }
}
