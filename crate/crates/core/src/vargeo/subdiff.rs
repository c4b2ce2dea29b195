use std::fmt;
use std::sync::Arc;

use serde::Serialize;

use super::polyhedron::{norm2, ConvexPolyhedron};
use crate::error::{check_dim, Error, Result};
use crate::field::ScalarField;

type Fn1 = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// A smooth function on an interval with its derivative.
#[derive(Clone)]
pub struct SmoothPiece {
    f: Fn1,
    df: Fn1,
}

impl fmt::Debug for SmoothPiece {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("SmoothPiece")
    }
}

impl SmoothPiece {
    pub fn new(
        f: impl Fn(f64) -> f64 + Send + Sync + 'static,
        df: impl Fn(f64) -> f64 + Send + Sync + 'static,
    ) -> Self {
        SmoothPiece { f: Arc::new(f), df: Arc::new(df) }
    }

    /// `c[0] + c[1] x + c[2] x^2 + ...`.
    pub fn polynomial(c: Vec<f64>) -> Self {
        let d: Vec<f64> = c.iter().enumerate().skip(1).map(|(k, v)| k as f64 * v).collect();
        let horner = |c: &[f64], x: f64| c.iter().rev().fold(0.0, |acc, v| acc * x + v);
        SmoothPiece::new(move |x| horner(&c, x), move |x| horner(&d, x))
    }

    pub fn value(&self, x: f64) -> f64 {
        (self.f)(x)
    }

    pub fn slope(&self, x: f64) -> f64 {
        (self.df)(x)
    }
}

/// A function on `R` that is smooth between sorted breakpoints. At a
/// breakpoint the value is the smaller one-sided limit, which makes the
/// function lsc there.
#[derive(Clone, Debug)]
pub struct PiecewiseSmooth1D {
    breakpoints: Vec<f64>,
    pieces: Vec<SmoothPiece>,
}

/// One-sided data at a point.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OneSided {
    pub left_value: f64,
    pub left_slope: f64,
    pub right_value: f64,
    pub right_slope: f64,
}

impl PiecewiseSmooth1D {
    pub fn new(breakpoints: Vec<f64>, pieces: Vec<SmoothPiece>) -> Result<Self> {
        check_dim(breakpoints.len() + 1, pieces.len())?;
        if breakpoints.iter().any(|b| !b.is_finite()) || breakpoints.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(Error::invalid("breakpoints must be finite and strictly increasing"));
        }
        Ok(PiecewiseSmooth1D { breakpoints, pieces })
    }

    pub fn smooth(piece: SmoothPiece) -> Self {
        PiecewiseSmooth1D { breakpoints: Vec::new(), pieces: vec![piece] }
    }

    /// `value + s_left (x - x0)` left of `x0`, `value + s_right (x - x0)` right of it.
    pub fn kink(x0: f64, value: f64, s_left: f64, s_right: f64) -> Result<Self> {
        let line = |s: f64| SmoothPiece::polynomial(vec![value - s * x0, s]);
        PiecewiseSmooth1D::new(vec![x0], vec![line(s_left), line(s_right)])
    }

    /// `s |x|`.
    pub fn scaled_abs(s: f64) -> Result<Self> {
        PiecewiseSmooth1D::kink(0.0, 0.0, -s, s)
    }

    pub fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }

    fn interval(&self, x: f64) -> std::result::Result<usize, usize> {
        match self.breakpoints.binary_search_by(|b| b.partial_cmp(&x).expect("finite breakpoints")) {
            Ok(k) => Err(k),
            Err(i) => Ok(i),
        }
    }

    pub fn one_sided(&self, x: f64) -> OneSided {
        let (l, r) = match self.interval(x) {
            Ok(i) => (i, i),
            Err(k) => (k, k + 1),
        };
        OneSided {
            left_value: self.pieces[l].value(x),
            left_slope: self.pieces[l].slope(x),
            right_value: self.pieces[r].value(x),
            right_slope: self.pieces[r].slope(x),
        }
    }

    pub fn value(&self, x: f64) -> f64 {
        match self.interval(x) {
            Ok(i) => self.pieces[i].value(x),
            Err(k) => self.pieces[k].value(x).min(self.pieces[k + 1].value(x)),
        }
    }

    /// `f'(x)` away from breakpoints.
    pub fn derivative(&self, x: f64) -> Option<f64> {
        self.interval(x).ok().map(|i| self.pieces[i].slope(x))
    }

    /// As a [`ScalarField`]; at breakpoints the gradient is the right slope.
    pub fn to_field(&self, label: impl Into<String>) -> ScalarField {
        let (f, g) = (self.clone(), self.clone());
        ScalarField::new(1, label, move |x| f.value(x[0]))
            .with_gradient(move |x, out| out[0] = g.derivative(x[0]).unwrap_or_else(|| g.one_sided(x[0]).right_slope))
    }

    /// Whether every breakpoint is a continuous convex kink (sampled at the
    /// breakpoints only; the pieces are assumed convex).
    pub fn is_convex_at_breakpoints(&self) -> bool {
        self.breakpoints.iter().all(|&b| {
            let o = self.one_sided(b);
            same(o.left_value, o.right_value) && o.left_slope <= o.right_slope
        })
    }
}

fn same(a: f64, b: f64) -> bool {
    a == b || (a.is_finite() && b.is_finite() && (a - b).abs() <= 1e-12 * (1.0 + a.abs().max(b.abs())))
}

/// A subdifferential in one dimension.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Subdifferential {
    /// `[lo, hi]`, possibly unbounded; `lo == hi` for a gradient.
    Interval { lo: f64, hi: f64 },
    /// A finite set of slopes.
    Points(Vec<f64>),
}

impl Subdifferential {
    pub fn singleton(v: f64) -> Self {
        Subdifferential::Interval { lo: v, hi: v }
    }

    pub fn contains(&self, v: f64, tol: f64) -> bool {
        self.distance_to(v) <= tol
    }

    pub fn distance_to(&self, v: f64) -> f64 {
        match self {
            Subdifferential::Interval { lo, hi } => (lo - v).max(v - hi).max(0.0),
            Subdifferential::Points(p) => p.iter().map(|s| (s - v).abs()).fold(f64::INFINITY, f64::min),
        }
    }

    /// Samples with spacing `h`, unbounded ends clipped to `[clip_lo, clip_hi]`.
    pub fn samples(&self, h: f64, clip_lo: f64, clip_hi: f64) -> Vec<f64> {
        match self {
            Subdifferential::Points(p) => p.clone(),
            Subdifferential::Interval { lo, hi } => {
                let (a, b) = (lo.max(clip_lo), hi.min(clip_hi));
                if a > b {
                    return Vec::new();
                }
                let mut out = vec![a];
                let mut k = 1.0;
                while a + k * h < b {
                    out.push(a + k * h);
                    k += 1.0;
                }
                if b > a {
                    out.push(b);
                }
                out
            }
        }
    }
}

/// `∂f(x)` from the one-sided slopes `s-`, `s+`:
///
/// - smooth point: `{f'(x)}`
/// - convex kink (`s- <= s+`): `[s-, s+]`
/// - concave kink (`s- > s+`): `{s+, s-}`
/// - upward jump to the right: `[s-, inf)`; upward jump to the left: `(-inf, s+]`
pub fn subdifferential_1d(f: &PiecewiseSmooth1D, x: f64) -> Result<Subdifferential> {
    let v = f.value(x);
    if !v.is_finite() {
        return Err(Error::invalid(format!("f({x}) = {v} is not finite")));
    }
    if let Some(d) = f.derivative(x) {
        return Ok(Subdifferential::singleton(d));
    }
    let o = f.one_sided(x);
    Ok(if same(o.left_value, o.right_value) {
        if o.left_slope <= o.right_slope {
            Subdifferential::Interval { lo: o.left_slope, hi: o.right_slope }
        } else {
            Subdifferential::Points(vec![o.right_slope, o.left_slope])
        }
    } else if o.left_value < o.right_value {
        Subdifferential::Interval { lo: o.left_slope, hi: f64::INFINITY }
    } else {
        Subdifferential::Interval { lo: f64::NEG_INFINITY, hi: o.right_slope }
    })
}

/// `dist(0, ∂f(x))`.
pub fn fermat_residual_1d(f: &PiecewiseSmooth1D, x: f64) -> Result<f64> {
    Ok(subdifferential_1d(f, x)?.distance_to(0.0))
}

/// `dist_2(-∇f(x), N_C(x))` for a polyhedron `C`.
pub fn optimality_residual(f: &ScalarField, c: &ConvexPolyhedron, x: &[f64]) -> Result<f64> {
    check_dim(c.dim(), f.dim())?;
    let g = f.gradient(x).ok_or(Error::MissingOracle("gradient"))?;
    let neg: Vec<f64> = g.iter().map(|v| -v).collect();
    let n = c.normal_cone(x)?;
    let p = n.project(&neg)?;
    Ok(norm2(&p.iter().zip(&neg).map(|(a, b)| a - b).collect::<Vec<_>>()))
}
