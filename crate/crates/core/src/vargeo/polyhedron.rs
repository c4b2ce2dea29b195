use serde::{Deserialize, Serialize};

use super::cone::Cone;
use crate::cloud::PointCloud;
use crate::error::{check_dim, Error, Result};
use crate::grid::{Axis, GridSpec};

/// `{x | A x <= b}` with nonzero rows.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "PolyhedronJson", into = "PolyhedronJson")]
pub struct ConvexPolyhedron {
    a: Vec<Vec<f64>>,
    b: Vec<f64>,
    dim: usize,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct PolyhedronJson {
    #[serde(rename = "A")]
    a: Vec<Vec<f64>>,
    b: Vec<f64>,
}

impl TryFrom<PolyhedronJson> for ConvexPolyhedron {
    type Error = Error;

    fn try_from(j: PolyhedronJson) -> Result<Self> {
        ConvexPolyhedron::new(j.a, j.b)
    }
}

impl From<ConvexPolyhedron> for PolyhedronJson {
    fn from(p: ConvexPolyhedron) -> Self {
        PolyhedronJson { a: p.a, b: p.b }
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub(crate) fn norm2(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

impl ConvexPolyhedron {
    pub fn new(a: Vec<Vec<f64>>, b: Vec<f64>) -> Result<Self> {
        if a.is_empty() {
            return Err(Error::invalid("polyhedron needs at least one row"));
        }
        check_dim(a.len(), b.len())?;
        let dim = a[0].len();
        if dim == 0 {
            return Err(Error::invalid("polyhedron rows must be nonempty"));
        }
        for row in &a {
            check_dim(dim, row.len())?;
            if row.iter().any(|v| !v.is_finite()) || row.iter().all(|v| *v == 0.0) {
                return Err(Error::invalid("polyhedron rows must be finite and nonzero"));
            }
        }
        if b.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid("polyhedron right-hand side must be finite"));
        }
        Ok(ConvexPolyhedron { a, b, dim })
    }

    /// `{x >= 0}` in `R^dim`.
    pub fn orthant(dim: usize) -> Result<Self> {
        let a = (0..dim).map(|i| (0..dim).map(|j| if i == j { -1.0 } else { 0.0 }).collect()).collect();
        ConvexPolyhedron::new(a, vec![0.0; dim])
    }

    /// The box `[lo, hi]^dim`.
    pub fn cube(dim: usize, lo: f64, hi: f64) -> Result<Self> {
        let mut a = Vec::with_capacity(2 * dim);
        let mut b = Vec::with_capacity(2 * dim);
        for i in 0..dim {
            let e: Vec<f64> = (0..dim).map(|j| if i == j { 1.0 } else { 0.0 }).collect();
            b.push(hi);
            b.push(-lo);
            a.push(e.clone());
            a.push(e.iter().map(|v| -v).collect());
        }
        ConvexPolyhedron::new(a, b)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn rows(&self) -> &[Vec<f64>] {
        &self.a
    }

    pub fn rhs(&self) -> &[f64] {
        &self.b
    }

    /// Activity tolerance of row `i`: `1e-9 (1 + |b_i| + |a_i|)`.
    pub fn row_tol(&self, i: usize) -> f64 {
        1e-9 * (1.0 + self.b[i].abs() + norm2(&self.a[i]))
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        x.len() == self.dim && (0..self.a.len()).all(|i| dot(&self.a[i], x) <= self.b[i] + self.row_tol(i))
    }

    /// Indices of the rows with `a_i x >= b_i - tol_i`.
    pub fn active_set(&self, x: &[f64]) -> Result<Vec<usize>> {
        check_dim(self.dim, x.len())?;
        if !self.contains(x) {
            return Err(Error::PointNotInSet);
        }
        Ok((0..self.a.len()).filter(|&i| dot(&self.a[i], x) >= self.b[i] - self.row_tol(i)).collect())
    }

    /// `T_C(x) = {w | a_i w <= 0, i active}`.
    pub fn tangent_cone(&self, x: &[f64]) -> Result<Cone> {
        let rows = self.active_set(x)?.into_iter().map(|i| self.a[i].clone()).collect();
        Cone::from_halfspaces(self.dim, rows)
    }

    /// `N_C(x) = cone{a_i, i active}`.
    pub fn normal_cone(&self, x: &[f64]) -> Result<Cone> {
        let gens = self.active_set(x)?.into_iter().map(|i| self.a[i].clone()).collect();
        Cone::from_generators(self.dim, gens)
    }

    /// Grid points of spacing `h` in `C` within max-distance `radius` of `x`;
    /// the grid contains `x`.
    pub fn sample_near(&self, x: &[f64], radius: f64, h: f64) -> Result<PointCloud> {
        check_dim(self.dim, x.len())?;
        if !(radius > 0.0 && h > 0.0) {
            return Err(Error::invalid("sample_near needs positive radius and spacing"));
        }
        let k = (radius / h).floor().max(1.0) as usize;
        let axes =
            x.iter().map(|&c| Axis::new(c - k as f64 * h, c + k as f64 * h, 2 * k)).collect::<Result<Vec<_>>>()?;
        Ok(GridSpec::new(axes)?.points_where(|p| self.contains(p)))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn json_roundtrip_and_validation() {
        let p: ConvexPolyhedron = serde_json::from_str(r#"{"A": [[1, 0], [0, 1]], "b": [1, 2]}"#).unwrap();
        assert_eq!(p.dim(), 2);
        let back = serde_json::to_string(&p).unwrap();
        assert_eq!(serde_json::from_str::<ConvexPolyhedron>(&back).unwrap(), p);
        assert!(serde_json::from_str::<ConvexPolyhedron>(r#"{"A": [[0, 0]], "b": [1]}"#).is_err());
        assert!(serde_json::from_str::<ConvexPolyhedron>(r#"{"A": [[1]], "b": [1, 2]}"#).is_err());
        assert!(serde_json::from_str::<ConvexPolyhedron>(r#"{"A": [[1]], "b": [1], "c": 0}"#).is_err());
    }

    #[test]
    fn membership_and_activity() {
        let c = ConvexPolyhedron::cube(2, 0.0, 1.0).unwrap();
        assert!(c.contains(&[1.0, 1.0]));
        assert!(c.contains(&[1.0 + 1e-12, 0.5]));
        assert!(!c.contains(&[1.1, 0.5]));
        assert_eq!(c.active_set(&[1.0, 1.0]).unwrap(), vec![0, 2]);
        assert_eq!(c.active_set(&[2.0, 0.0]).unwrap_err(), Error::PointNotInSet);
    }

    #[test]
    fn sample_near_stays_inside() {
        let c = ConvexPolyhedron::orthant(2).unwrap();
        let s = c.sample_near(&[0.0, 0.0], 0.1, 0.01).unwrap();
        assert_eq!(s.len(), 11 * 11);
        assert!(s.iter().all(|p| c.contains(p)));
    }
}
