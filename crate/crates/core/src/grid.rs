//! Uniform rectangular grids.
//!
//! Grid point `i` on an axis is `lo + (hi - lo) * i / steps`, computed from the
//! integer index rather than by repeated addition, so two grids with the same
//! axes produce bit-identical coordinates. That is what makes exact point
//! matching (see [`PointCloud::intersect_exact`]) meaningful.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::cloud::PointCloud;
use crate::error::{Error, Result};

/// Upper bound on the number of points a grid may contain.
pub const MAX_GRID_POINTS: usize = 50_000_000;

/// One coordinate axis: `steps` equal intervals on `[lo, hi]`, `steps + 1` points.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Axis {
    pub lo: f64,
    pub hi: f64,
    pub steps: usize,
}

impl Axis {
    pub fn new(lo: f64, hi: f64, steps: usize) -> Result<Self> {
        let axis = Axis { lo, hi, steps };
        axis.validate()?;
        Ok(axis)
    }

    /// Axis on `[lo, hi]` whose spacing is as close as possible to `h`.
    pub fn with_spacing(lo: f64, hi: f64, h: f64) -> Result<Self> {
        if !(h > 0.0) || !h.is_finite() {
            return Err(Error::invalid(format!("grid spacing must be positive, got {h}")));
        }
        let steps = ((hi - lo) / h).round();
        if !(steps >= 1.0) || steps > MAX_GRID_POINTS as f64 {
            return Err(Error::invalid(format!("cannot place spacing {h} on [{lo}, {hi}]")));
        }
        Axis::new(lo, hi, steps as usize)
    }

    fn validate(&self) -> Result<()> {
        if !self.lo.is_finite() || !self.hi.is_finite() {
            return Err(Error::invalid("grid bounds must be finite"));
        }
        if !(self.lo < self.hi) {
            return Err(Error::invalid(format!("grid axis needs lo < hi, got [{}, {}]", self.lo, self.hi)));
        }
        if self.steps == 0 {
            return Err(Error::invalid("grid axis needs at least one step"));
        }
        if self.steps >= MAX_GRID_POINTS {
            return Err(Error::invalid(format!("grid axis has too many steps ({})", self.steps)));
        }
        if !((self.hi - self.lo) / self.steps as f64 > 0.0) {
            return Err(Error::invalid("grid spacing underflows"));
        }
        Ok(())
    }

    pub fn spacing(&self) -> f64 {
        (self.hi - self.lo) / self.steps as f64
    }

    #[allow(clippy::len_without_is_empty)] // never empty
    pub fn len(&self) -> usize {
        self.steps + 1
    }

    pub fn point(&self, i: usize) -> f64 {
        debug_assert!(i <= self.steps);
        if i == self.steps {
            self.hi
        } else {
            self.lo + (self.hi - self.lo) * i as f64 / self.steps as f64
        }
    }

    pub fn points(&self) -> Vec<f64> {
        (0..self.len()).map(|i| self.point(i)).collect()
    }
}

impl FromStr for Axis {
    type Err = Error;

    /// Parses `lo:hi:steps`.
    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.split(':').collect();
        if parts.len() != 3 {
            return Err(Error::parse("grid", format!("expected lo:hi:steps, got {s:?}")));
        }
        let lo: f64 = parts[0].trim().parse().map_err(|e| Error::parse("grid", format!("lo {:?}: {e}", parts[0])))?;
        let hi: f64 = parts[1].trim().parse().map_err(|e| Error::parse("grid", format!("hi {:?}: {e}", parts[1])))?;
        let steps: usize =
            parts[2].trim().parse().map_err(|e| Error::parse("grid", format!("steps {:?}: {e}", parts[2])))?;
        Axis::new(lo, hi, steps)
    }
}

impl fmt::Display for Axis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}:{}", self.lo, self.hi, self.steps)
    }
}

/// Tensor-product grid over a box.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<Axis>", into = "Vec<Axis>")]
pub struct GridSpec {
    axes: Vec<Axis>,
}

impl GridSpec {
    pub fn new(axes: Vec<Axis>) -> Result<Self> {
        if axes.is_empty() {
            return Err(Error::invalid("grid needs at least one axis"));
        }
        let mut total: usize = 1;
        for a in &axes {
            a.validate()?;
            total = total
                .checked_mul(a.len())
                .filter(|t| *t <= MAX_GRID_POINTS)
                .ok_or_else(|| Error::invalid("grid has too many points"))?;
        }
        Ok(GridSpec { axes })
    }

    /// One-dimensional grid.
    pub fn line(lo: f64, hi: f64, steps: usize) -> Result<Self> {
        GridSpec::new(vec![Axis::new(lo, hi, steps)?])
    }

    /// One-dimensional grid with spacing (close to) `h`.
    pub fn line_with_spacing(lo: f64, hi: f64, h: f64) -> Result<Self> {
        GridSpec::new(vec![Axis::with_spacing(lo, hi, h)?])
    }

    /// `[lo, hi]^dim` with the same number of steps per axis.
    pub fn cube(dim: usize, lo: f64, hi: f64, steps: usize) -> Result<Self> {
        GridSpec::new(vec![Axis::new(lo, hi, steps)?; dim])
    }

    /// Parses one `lo:hi:steps` argument per dimension.
    pub fn from_args<S: AsRef<str>>(args: &[S]) -> Result<Self> {
        let axes = args.iter().map(|a| a.as_ref().parse()).collect::<Result<Vec<Axis>>>()?;
        GridSpec::new(axes)
    }

    pub fn dim(&self) -> usize {
        self.axes.len()
    }

    pub fn axes(&self) -> &[Axis] {
        &self.axes
    }

    /// Largest axis spacing.
    pub fn spacing(&self) -> f64 {
        self.axes.iter().map(Axis::spacing).fold(0.0, f64::max)
    }

    #[allow(clippy::len_without_is_empty)] // never empty
    pub fn len(&self) -> usize {
        self.axes.iter().map(Axis::len).product()
    }

    /// Writes grid point number `index` (last axis fastest) into `out`.
    pub fn point_into(&self, mut index: usize, out: &mut [f64]) {
        for k in (0..self.axes.len()).rev() {
            let n = self.axes[k].len();
            out[k] = self.axes[k].point(index % n);
            index /= n;
        }
    }

    pub fn point(&self, index: usize) -> Vec<f64> {
        let mut out = vec![0.0; self.dim()];
        self.point_into(index, &mut out);
        out
    }

    /// All grid points, last axis fastest.
    pub fn points(&self) -> PointCloud {
        let dim = self.dim();
        let mut coords = vec![0.0; self.len() * dim];
        for (i, chunk) in coords.chunks_exact_mut(dim).enumerate() {
            self.point_into(i, chunk);
        }
        PointCloud::from_flat(dim, coords).expect("grid coordinates are finite")
    }

    /// Grid points `x` with `keep(x)`.
    pub fn points_where(&self, mut keep: impl FnMut(&[f64]) -> bool) -> PointCloud {
        let mut out = PointCloud::empty(self.dim());
        let mut buf = vec![0.0; self.dim()];
        for i in 0..self.len() {
            self.point_into(i, &mut buf);
            if keep(&buf) {
                out.push_unchecked(&buf);
            }
        }
        out
    }
}

impl TryFrom<Vec<Axis>> for GridSpec {
    type Error = Error;

    fn try_from(axes: Vec<Axis>) -> Result<Self> {
        GridSpec::new(axes)
    }
}

impl From<GridSpec> for Vec<Axis> {
    fn from(g: GridSpec) -> Vec<Axis> {
        g.axes
    }
}

impl fmt::Display for GridSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, a) in self.axes.iter().enumerate() {
            if i > 0 {
                f.write_str(" x ")?;
            }
            write!(f, "{a}")?;
        }
        Ok(())
    }
}
