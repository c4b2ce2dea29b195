use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::polyhedron::{dot, norm2};
use crate::error::{check_dim, Error, Result};

const TOL: f64 = 1e-9;
const MAX_SUBSETS: usize = 1 << 21;

/// How a cone is stored.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ConeRep {
    /// `{w | g_i . w <= 0 for all rows}`.
    Halfspaces(Vec<Vec<f64>>),
    /// `{sum_i l_i v_i | l_i >= 0}`; no generators means `{0}`.
    Generators(Vec<Vec<f64>>),
}

/// A closed convex polyhedral cone in `R^dim`. Rows and generators are
/// stored with unit Euclidean norm; zero vectors are dropped.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Cone {
    dim: usize,
    rep: ConeRep,
}

fn normalized(dim: usize, vs: Vec<Vec<f64>>) -> Result<Vec<Vec<f64>>> {
    let mut out: Vec<Vec<f64>> = Vec::with_capacity(vs.len());
    for v in vs {
        check_dim(dim, v.len())?;
        if v.iter().any(|c| !c.is_finite()) {
            return Err(Error::invalid("cone vectors must be finite"));
        }
        let n = norm2(&v);
        if n == 0.0 {
            continue;
        }
        let u: Vec<f64> = v.iter().map(|c| c / n).collect();
        if !out.iter().any(|w| w.iter().zip(&u).all(|(a, b)| (a - b).abs() <= TOL)) {
            out.push(u);
        }
    }
    Ok(out)
}

fn matrix(rows: &[Vec<f64>], n: usize) -> DMatrix<f64> {
    let m = rows.len().max(n);
    DMatrix::from_fn(m, n, |i, j| rows.get(i).map_or(0.0, |r| r[j]))
}

/// Orthonormal basis of `{w | r . w = 0 for all rows}` and the row rank.
fn null_space(rows: &[Vec<f64>], n: usize) -> (Vec<Vec<f64>>, usize) {
    let svd = matrix(rows, n).svd(false, true);
    let v_t = svd.v_t.expect("requested V^T");
    let scale = svd.singular_values.iter().copied().fold(0.0, f64::max).max(1.0);
    let mut basis = Vec::new();
    let mut rank = 0;
    for (k, s) in svd.singular_values.iter().enumerate() {
        if *s > TOL * scale {
            rank += 1;
        } else {
            basis.push(v_t.row(k).iter().copied().collect());
        }
    }
    (basis, rank)
}

fn subsets(k: usize, size: usize, mut visit: impl FnMut(&[usize])) {
    fn rec(start: usize, k: usize, size: usize, cur: &mut Vec<usize>, visit: &mut dyn FnMut(&[usize])) {
        if cur.len() == size {
            visit(cur);
            return;
        }
        for i in start..k {
            if k - i < size - cur.len() {
                break;
            }
            cur.push(i);
            rec(i + 1, k, size, cur, visit);
            cur.pop();
        }
    }
    rec(0, k, size, &mut Vec::with_capacity(size), &mut visit);
}

fn binomial(n: usize, k: usize) -> usize {
    (0..k).fold(1usize, |acc, i| acc.saturating_mul(n - i) / (i + 1))
}

/// Generators of `{w | G w <= 0}` by enumerating candidate extreme rays.
fn halfspaces_to_generators(dim: usize, rows: &[Vec<f64>]) -> Result<Vec<Vec<f64>>> {
    if dim > 3 {
        return Err(Error::UnsupportedDimension(dim));
    }
    let (lineality, rank) = null_space(rows, dim);
    let mut gens: Vec<Vec<f64>> = Vec::new();
    for l in &lineality {
        gens.push(l.clone());
        gens.push(l.iter().map(|v| -v).collect());
    }
    if rank > 0 {
        subsets(rows.len(), rank - 1, |idx| {
            let mut eqs: Vec<Vec<f64>> = idx.iter().map(|&i| rows[i].clone()).collect();
            eqs.extend(lineality.iter().cloned());
            let (dirs, r) = null_space(&eqs, dim);
            if r != dim - 1 || dirs.len() != 1 {
                return;
            }
            for sign in [1.0, -1.0] {
                let d: Vec<f64> = dirs[0].iter().map(|v| sign * v).collect();
                if rows.iter().all(|g| dot(g, &d) <= TOL) {
                    gens.push(d);
                }
            }
        });
    }
    normalized(dim, gens)
}

impl Cone {
    pub fn from_halfspaces(dim: usize, rows: Vec<Vec<f64>>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::invalid("cone dimension must be positive"));
        }
        Ok(Cone { dim, rep: ConeRep::Halfspaces(normalized(dim, rows)?) })
    }

    pub fn from_generators(dim: usize, gens: Vec<Vec<f64>>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::invalid("cone dimension must be positive"));
        }
        Ok(Cone { dim, rep: ConeRep::Generators(normalized(dim, gens)?) })
    }

    /// `{0}` in `R^dim`.
    pub fn zero(dim: usize) -> Result<Self> {
        Cone::from_generators(dim, Vec::new())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn rep(&self) -> &ConeRep {
        &self.rep
    }

    pub fn halfspaces(&self) -> Option<&[Vec<f64>]> {
        match &self.rep {
            ConeRep::Halfspaces(r) => Some(r),
            ConeRep::Generators(_) => None,
        }
    }

    pub fn generators(&self) -> Option<&[Vec<f64>]> {
        match &self.rep {
            ConeRep::Generators(g) => Some(g),
            ConeRep::Halfspaces(_) => None,
        }
    }

    /// `{v | v . w <= 0 for all w in K}`; swaps the two representations.
    pub fn polar(&self) -> Cone {
        let rep = match &self.rep {
            ConeRep::Halfspaces(r) => ConeRep::Generators(r.clone()),
            ConeRep::Generators(g) => ConeRep::Halfspaces(g.clone()),
        };
        Cone { dim: self.dim, rep }
    }

    /// Generator form; converting from halfspaces needs `dim <= 3`.
    pub fn to_generators(&self) -> Result<Cone> {
        match &self.rep {
            ConeRep::Generators(_) => Ok(self.clone()),
            ConeRep::Halfspaces(r) => {
                Ok(Cone { dim: self.dim, rep: ConeRep::Generators(halfspaces_to_generators(self.dim, r)?) })
            }
        }
    }

    /// Halfspace form; converting from generators needs `dim <= 3`.
    pub fn to_halfspaces(&self) -> Result<Cone> {
        match &self.rep {
            ConeRep::Halfspaces(_) => Ok(self.clone()),
            ConeRep::Generators(g) => {
                Ok(Cone { dim: self.dim, rep: ConeRep::Halfspaces(halfspaces_to_generators(self.dim, g)?) })
            }
        }
    }

    /// Euclidean projection of `w` onto the cone.
    ///
    /// Solves the nonnegative least-squares problem by enumerating generator
    /// subsets of size at most `dim`: the projection lies in the cone of some
    /// linearly independent subset, where it is the unconstrained fit.
    pub fn project(&self, w: &[f64]) -> Result<Vec<f64>> {
        check_dim(self.dim, w.len())?;
        let gens = match &self.rep {
            ConeRep::Generators(g) => g.clone(),
            ConeRep::Halfspaces(r) => halfspaces_to_generators(self.dim, r)?,
        };
        let k = gens.len();
        let max_size = k.min(self.dim);
        let count: usize = (1..=max_size).map(|s| binomial(k, s)).fold(0, usize::saturating_add);
        if count > MAX_SUBSETS {
            return Err(Error::invalid(format!("{k} generators are too many for projection by enumeration")));
        }
        let mut best = vec![0.0; self.dim];
        let mut best_dist = norm2(w);
        for size in 1..=max_size {
            subsets(k, size, |idx| {
                let a = DMatrix::from_fn(self.dim, idx.len(), |i, j| gens[idx[j]][i]);
                let rhs = nalgebra::DVector::from_column_slice(w);
                let Ok(lambda) = a.clone().svd(true, true).solve(&rhs, 1e-12) else {
                    return;
                };
                if lambda.iter().any(|l| *l < -1e-12) {
                    return;
                }
                let p: Vec<f64> = (a * lambda.map(|l| l.max(0.0))).iter().copied().collect();
                let d = norm2(&p.iter().zip(w).map(|(a, b)| a - b).collect::<Vec<_>>());
                if d < best_dist {
                    best_dist = d;
                    best = p;
                }
            });
        }
        Ok(best)
    }

    /// Euclidean distance from `w` to the cone.
    pub fn distance(&self, w: &[f64]) -> Result<f64> {
        let p = self.project(w)?;
        Ok(norm2(&p.iter().zip(w).map(|(a, b)| a - b).collect::<Vec<_>>()))
    }

    /// Membership up to `tol * max{1, |w|}`.
    pub fn contains(&self, w: &[f64], tol: f64) -> Result<bool> {
        check_dim(self.dim, w.len())?;
        let scale = norm2(w).max(1.0);
        match &self.rep {
            ConeRep::Halfspaces(r) => Ok(r.iter().all(|g| dot(g, w) <= tol * scale)),
            ConeRep::Generators(_) => Ok(self.distance(w)? <= tol * scale),
        }
    }

    /// Whether the cone is `{0}`.
    pub fn is_zero(&self) -> Result<bool> {
        Ok(self.to_generators()?.generators().expect("generator form").is_empty())
    }

    /// Angle in degrees between a nonzero `w` and the cone (`0` inside, `90`
    /// or more when the projection is `0`).
    pub fn angle_to(&self, w: &[f64]) -> Result<f64> {
        let n = norm2(w);
        if n == 0.0 {
            return Ok(0.0);
        }
        let p = self.project(w)?;
        let pn = norm2(&p);
        if pn == 0.0 {
            return Ok(90.0);
        }
        Ok((dot(&p, w) / (pn * n)).clamp(-1.0, 1.0).acos().to_degrees())
    }
}

/// The regular normal cone `{v | v . w <= 0 for all w in T}` in generator
/// form.
pub fn regular_normal_cone(t: &Cone) -> Result<Cone> {
    t.polar().to_generators()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn sorted(mut g: Vec<Vec<f64>>) -> Vec<Vec<f64>> {
        for v in g.iter_mut() {
            for c in v.iter_mut() {
                *c = (*c * 1e9).round() / 1e9 + 0.0;
            }
        }
        g.sort_by(|a, b| a.partial_cmp(b).unwrap());
        g
    }

    fn gens(c: &Cone) -> Vec<Vec<f64>> {
        sorted(c.to_generators().unwrap().generators().unwrap().to_vec())
    }

    #[test]
    fn orthant_polar_is_nonpositive_orthant() {
        let t = Cone::from_halfspaces(2, vec![vec![-1.0, 0.0], vec![0.0, -1.0]]).unwrap();
        assert_eq!(gens(&t), vec![vec![0.0, 1.0], vec![1.0, 0.0]]);
        let n = regular_normal_cone(&t).unwrap();
        assert_eq!(gens(&n), vec![vec![-1.0, 0.0], vec![0.0, -1.0]]);
    }

    #[test]
    fn halfplane_polar_is_a_ray() {
        let t = Cone::from_halfspaces(2, vec![vec![0.0, 2.0]]).unwrap();
        assert_eq!(gens(&regular_normal_cone(&t).unwrap()), vec![vec![0.0, 1.0]]);
        assert_eq!(gens(&t), vec![vec![-1.0, 0.0], vec![0.0, -1.0], vec![1.0, 0.0]]);
    }

    #[test]
    fn full_plane_polar_is_zero() {
        let t = Cone::from_halfspaces(2, vec![]).unwrap();
        assert_eq!(gens(&t).len(), 4);
        assert!(regular_normal_cone(&t).unwrap().is_zero().unwrap());
        let full =
            Cone::from_generators(2, vec![vec![1.0, 0.0], vec![-1.0, 0.0], vec![0.0, 1.0], vec![0.0, -1.0]]).unwrap();
        assert!(full.to_halfspaces().unwrap().halfspaces().unwrap().is_empty());
    }

    #[test]
    fn zero_cone_from_opposite_halfspaces() {
        let z =
            Cone::from_halfspaces(2, vec![vec![1.0, 0.0], vec![-1.0, 0.0], vec![0.0, 1.0], vec![0.0, -1.0]]).unwrap();
        assert!(z.is_zero().unwrap());
    }

    #[test]
    fn three_dimensional_orthant() {
        let t = Cone::from_halfspaces(
            3,
            (0..3).map(|i| (0..3).map(|j| if i == j { -1.0 } else { 0.0 }).collect()).collect(),
        )
        .unwrap();
        assert_eq!(gens(&t), vec![vec![0.0, 0.0, 1.0], vec![0.0, 1.0, 0.0], vec![1.0, 0.0, 0.0]]);
    }

    #[test]
    fn unsupported_dimension() {
        let t = Cone::from_halfspaces(4, vec![vec![1.0, 0.0, 0.0, 0.0]]).unwrap();
        assert_eq!(t.to_generators().unwrap_err(), Error::UnsupportedDimension(4));
    }

    #[test]
    fn projection_onto_a_ray() {
        let c = Cone::from_generators(2, vec![vec![1.0, 0.0]]).unwrap();
        assert_eq!(c.project(&[2.0, 3.0]).unwrap(), vec![2.0, 0.0]);
        assert_eq!(c.project(&[-2.0, 3.0]).unwrap(), vec![0.0, 0.0]);
        assert_eq!(c.distance(&[-3.0, 4.0]).unwrap(), 5.0);
    }

    fn vec3() -> impl Strategy<Value = Vec<f64>> {
        proptest::collection::vec(-1.0f64..1.0, 3)
    }

    proptest! {
        #[test]
        fn polar_generators_are_nonpositive_on_samples(
            rows in proptest::collection::vec(vec3(), 0..5),
            samples in proptest::collection::vec(vec3(), 20),
        ) {
            let t = Cone::from_halfspaces(3, rows).unwrap();
            let n = regular_normal_cone(&t).unwrap();
            let tg = t.to_generators().unwrap();
            for w in &samples {
                let w = tg.project(w).unwrap();
                for v in n.generators().unwrap() {
                    prop_assert!(dot(v, &w) <= 1e-7);
                }
            }
        }

        #[test]
        fn generator_and_halfspace_forms_agree(
            rows in proptest::collection::vec(vec3(), 1..5),
            samples in proptest::collection::vec(vec3(), 20),
        ) {
            let h = Cone::from_halfspaces(3, rows).unwrap();
            let g = h.to_generators().unwrap();
            for w in &samples {
                let in_h = h.contains(w, 1e-6).unwrap();
                let in_g = g.contains(w, 1e-6).unwrap();
                // Points within rounding of the boundary may land on either side.
                if in_h != in_g {
                    prop_assert!(h.halfspaces().unwrap().iter().map(|r| dot(r, w)).fold(f64::MIN, f64::max).abs() < 1e-5);
                }
            }
        }

        #[test]
        fn projection_is_in_cone_and_optimal(
            gens in proptest::collection::vec(vec3(), 1..6),
            w in vec3(),
            trial in proptest::collection::vec(0.0f64..2.0, 6),
        ) {
            let c = Cone::from_generators(3, gens.clone()).unwrap();
            let p = c.project(&w).unwrap();
            let d = norm2(&p.iter().zip(&w).map(|(a, b)| a - b).collect::<Vec<_>>());
            // Any nonnegative combination is at least as far from w.
            let g = c.generators().unwrap();
            let mut q = [0.0; 3];
            for (v, l) in g.iter().zip(&trial) {
                for i in 0..3 { q[i] += l * v[i]; }
            }
            let dq = norm2(&q.iter().zip(&w).map(|(a, b)| a - b).collect::<Vec<_>>());
            prop_assert!(d <= dq + 1e-9);
            // Optimality: p . (w - p) = 0 and (w - p) lies in the polar cone.
            let r: Vec<f64> = w.iter().zip(&p).map(|(a, b)| a - b).collect();
            prop_assert!(dot(&p, &r).abs() <= 1e-8);
            for v in g { prop_assert!(dot(v, &r) <= 1e-8); }
        }
    }
}
