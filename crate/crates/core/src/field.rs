//! Extended-real-valued function oracles.
//!
//! A [`ScalarField`] wraps a closure `R^dim -> [-inf, inf]` and an optional
//! gradient. Oracle values of NaN are read as `+inf` (outside the domain).
//! Fields can be built in code, from the named built-ins in [`builtin`], or
//! from the JSON combinator format [`FieldSpec`].

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Error, Result};
use crate::extreal::ExtReal;

pub type EvalFn = Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>;
pub type GradFn = Arc<dyn Fn(&[f64], &mut [f64]) + Send + Sync>;

#[derive(Clone)]
pub struct ScalarField {
    dim: usize,
    eval: EvalFn,
    grad: Option<GradFn>,
    label: String,
}

impl fmt::Debug for ScalarField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ScalarField")
            .field("dim", &self.dim)
            .field("label", &self.label)
            .field("has_gradient", &self.grad.is_some())
            .finish()
    }
}

impl ScalarField {
    pub fn new(dim: usize, label: impl Into<String>, eval: impl Fn(&[f64]) -> f64 + Send + Sync + 'static) -> Self {
        ScalarField { dim, eval: Arc::new(eval), grad: None, label: label.into() }
    }

    pub fn with_gradient(mut self, grad: impl Fn(&[f64], &mut [f64]) + Send + Sync + 'static) -> Self {
        self.grad = Some(Arc::new(grad));
        self
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn has_gradient(&self) -> bool {
        self.grad.is_some()
    }

    pub fn eval(&self, x: &[f64]) -> ExtReal {
        debug_assert_eq!(x.len(), self.dim);
        ExtReal::from_oracle((self.eval)(x))
    }

    /// `eval(x)` as a plain `f64` (never NaN).
    pub fn value(&self, x: &[f64]) -> f64 {
        self.eval(x).value()
    }

    pub fn gradient(&self, x: &[f64]) -> Option<Vec<f64>> {
        let g = self.grad.as_ref()?;
        let mut out = vec![0.0; self.dim];
        g(x, &mut out);
        Some(out)
    }

    /// Largest relative discrepancy between the gradient oracle and central
    /// differences at `x`, `None` without a gradient or where `f` is not
    /// finite nearby.
    pub fn gradient_check(&self, x: &[f64]) -> Option<f64> {
        let g = self.gradient(x)?;
        let mut worst: f64 = 0.0;
        let mut y = x.to_vec();
        for i in 0..self.dim {
            let step = 1e-6 * (1.0 + x[i].abs());
            y[i] = x[i] + step;
            let up = self.value(&y);
            y[i] = x[i] - step;
            let down = self.value(&y);
            y[i] = x[i];
            if !up.is_finite() || !down.is_finite() {
                return None;
            }
            let fd = (up - down) / (2.0 * step);
            let scale = g[i].abs().max(fd.abs()).max(1.0);
            worst = worst.max((g[i] - fd).abs() / scale);
        }
        Some(worst)
    }

    pub fn constant(dim: usize, c: f64) -> Self {
        ScalarField::new(dim, format!("{c}"), move |_| c).with_gradient(|_, g| g.fill(0.0))
    }

    /// `a . x + b`.
    pub fn affine(a: Vec<f64>, b: f64) -> Self {
        let dim = a.len();
        let a2 = a.clone();
        ScalarField::new(dim, "affine", move |x| dot(&a, x) + b).with_gradient(move |_, g| g.copy_from_slice(&a2))
    }

    /// `x^T Q x / 2 + c . x + d`; `q` is row-major `dim x dim`.
    pub fn quadratic(q: Vec<Vec<f64>>, c: Vec<f64>, d: f64) -> Result<Self> {
        let dim = c.len();
        if q.len() != dim || q.iter().any(|r| r.len() != dim) {
            return Err(Error::invalid(format!("quadratic needs a {dim}x{dim} matrix")));
        }
        let q = Arc::new(q);
        let c = Arc::new(c);
        let (q2, c2) = (q.clone(), c.clone());
        Ok(ScalarField::new(dim, "quadratic", move |x| {
            let mut s = d + dot(&c, x);
            for i in 0..x.len() {
                s += 0.5 * x[i] * dot(&q[i], x);
            }
            s
        })
        .with_gradient(move |x, g| {
            for i in 0..x.len() {
                let mut v = c2[i];
                for j in 0..x.len() {
                    v += 0.5 * (q2[i][j] + q2[j][i]) * x[j];
                }
                g[i] = v;
            }
        }))
    }

    /// Indicator: `0` where `inside(x)`, `+inf` elsewhere.
    pub fn indicator(
        dim: usize,
        label: impl Into<String>,
        inside: impl Fn(&[f64]) -> bool + Send + Sync + 'static,
    ) -> Self {
        ScalarField::new(dim, label, move |x| if inside(x) { 0.0 } else { f64::INFINITY })
    }

    /// One-dimensional lsc piecewise quadratic. `pieces[k] = [a, b, c]` gives
    /// `a x^2 + b x + c` on the `k`-th interval cut by the sorted `breakpoints`;
    /// at a breakpoint the value is the smaller of the two adjacent pieces.
    pub fn piecewise_quadratic(breakpoints: Vec<f64>, pieces: Vec<[f64; 3]>) -> Result<Self> {
        if pieces.len() != breakpoints.len() + 1 {
            return Err(Error::invalid("piecewise quadratic needs one more piece than breakpoints"));
        }
        if breakpoints.windows(2).any(|w| !(w[0] < w[1])) || breakpoints.iter().any(|b| !b.is_finite()) {
            return Err(Error::invalid("breakpoints must be finite and strictly increasing"));
        }
        if pieces.iter().flatten().any(|v| !v.is_finite()) {
            return Err(Error::invalid("piece coefficients must be finite"));
        }
        let q = |p: &[f64; 3], x: f64| (p[0] * x + p[1]) * x + p[2];
        let (bp, pc) = (breakpoints.clone(), pieces.clone());
        let field = ScalarField::new(1, "piecewise-quadratic", move |x| {
            let x = x[0];
            let k = bp.partition_point(|b| *b < x);
            if k < bp.len() && bp[k] == x {
                q(&pc[k], x).min(q(&pc[k + 1], x))
            } else {
                q(&pc[k], x)
            }
        });
        Ok(field.with_gradient(move |x, g| {
            let k = breakpoints.partition_point(|b| *b < x[0]);
            let p = &pieces[k];
            g[0] = 2.0 * p[0] * x[0] + p[1];
        }))
    }

    /// `-f`, used for hypographs.
    pub fn neg(&self) -> Self {
        let f = self.eval.clone();
        let out = ScalarField::new(self.dim, format!("-({})", self.label), move |x| -f(x));
        match self.grad.clone() {
            Some(g) => out.with_gradient(move |x, o| {
                g(x, o);
                o.iter_mut().for_each(|v| *v = -*v);
            }),
            None => out,
        }
    }

    /// `f + g` with `inf + (-inf) = inf`.
    pub fn add(&self, other: &ScalarField) -> Result<Self> {
        check_dim(self.dim, other.dim)?;
        let (f, g) = (self.eval.clone(), other.eval.clone());
        let out = ScalarField::new(self.dim, format!("{} + {}", self.label, other.label), move |x| {
            (ExtReal::from_oracle(f(x)) + ExtReal::from_oracle(g(x))).value()
        });
        Ok(match (self.grad.clone(), other.grad.clone()) {
            (Some(gf), Some(gg)) => out.with_gradient(move |x, o| {
                let mut tmp = vec![0.0; o.len()];
                gf(x, o);
                gg(x, &mut tmp);
                o.iter_mut().zip(&tmp).for_each(|(a, b)| *a += b);
            }),
            _ => out,
        })
    }

    /// `s * f`; `0 * inf` is read as `+inf`.
    pub fn scale(&self, s: f64) -> Self {
        let f = self.eval.clone();
        let out = ScalarField::new(self.dim, format!("{s}*({})", self.label), move |x| s * f(x));
        match self.grad.clone() {
            Some(g) => out.with_gradient(move |x, o| {
                g(x, o);
                o.iter_mut().for_each(|v| *v *= s);
            }),
            None => out,
        }
    }

    pub fn min(&self, other: &ScalarField) -> Result<Self> {
        check_dim(self.dim, other.dim)?;
        let (f, g) = (self.eval.clone(), other.eval.clone());
        Ok(ScalarField::new(self.dim, format!("min({}, {})", self.label, other.label), move |x| {
            ExtReal::from_oracle(f(x)).min(ExtReal::from_oracle(g(x))).value()
        }))
    }

    pub fn max(&self, other: &ScalarField) -> Result<Self> {
        check_dim(self.dim, other.dim)?;
        let (f, g) = (self.eval.clone(), other.eval.clone());
        Ok(ScalarField::new(self.dim, format!("max({}, {})", self.label, other.label), move |x| {
            ExtReal::from_oracle(f(x)).max(ExtReal::from_oracle(g(x))).value()
        }))
    }

    pub fn abs(&self) -> Self {
        let f = self.eval.clone();
        ScalarField::new(self.dim, format!("|{}|", self.label), move |x| f(x).abs())
    }

    /// `h(f(x))` for a scalar `h`; `+inf` stays `+inf`.
    pub fn compose(&self, label: impl Into<String>, h: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        let f = self.eval.clone();
        ScalarField::new(self.dim, label, move |x| {
            let v = ExtReal::from_oracle(f(x));
            if v.is_pos_inf() {
                f64::INFINITY
            } else {
                h(v.value())
            }
        })
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// A map `R^in_dim -> R^out_dim` with an optional Jacobian (row-major,
/// `out_dim x in_dim`).
#[derive(Clone)]
pub struct VectorField {
    in_dim: usize,
    out_dim: usize,
    eval: GradFn,
    jacobian: Option<GradFn>,
    label: String,
}

impl fmt::Debug for VectorField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("VectorField")
            .field("in_dim", &self.in_dim)
            .field("out_dim", &self.out_dim)
            .field("label", &self.label)
            .field("has_jacobian", &self.jacobian.is_some())
            .finish()
    }
}

impl VectorField {
    pub fn new(
        in_dim: usize,
        out_dim: usize,
        label: impl Into<String>,
        eval: impl Fn(&[f64], &mut [f64]) + Send + Sync + 'static,
    ) -> Self {
        VectorField { in_dim, out_dim, eval: Arc::new(eval), jacobian: None, label: label.into() }
    }

    pub fn with_jacobian(mut self, jac: impl Fn(&[f64], &mut [f64]) + Send + Sync + 'static) -> Self {
        self.jacobian = Some(Arc::new(jac));
        self
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    /// `x -> M x + q`.
    pub fn affine(m: Vec<Vec<f64>>, q: Vec<f64>) -> Result<Self> {
        let out_dim = q.len();
        let in_dim = m.first().map_or(0, Vec::len);
        if m.len() != out_dim || m.iter().any(|r| r.len() != in_dim) || in_dim == 0 {
            return Err(Error::invalid("affine map needs an out_dim x in_dim matrix"));
        }
        let flat: Vec<f64> = m.iter().flatten().copied().collect();
        let flat2 = flat.clone();
        Ok(VectorField::new(in_dim, out_dim, "affine", move |x, out| {
            for i in 0..out_dim {
                out[i] = q[i] + dot(&flat[i * in_dim..(i + 1) * in_dim], x);
            }
        })
        .with_jacobian(move |_, j| j.copy_from_slice(&flat2)))
    }

    pub fn in_dim(&self) -> usize {
        self.in_dim
    }

    pub fn out_dim(&self) -> usize {
        self.out_dim
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn has_jacobian(&self) -> bool {
        self.jacobian.is_some()
    }

    pub fn eval(&self, x: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.out_dim];
        (self.eval)(x, &mut out);
        out
    }

    pub fn eval_into(&self, x: &[f64], out: &mut [f64]) {
        (self.eval)(x, out)
    }

    /// Row-major Jacobian at `x`.
    pub fn jacobian(&self, x: &[f64]) -> Option<Vec<f64>> {
        let j = self.jacobian.as_ref()?;
        let mut out = vec![0.0; self.out_dim * self.in_dim];
        j(x, &mut out);
        Some(out)
    }

    /// Largest relative discrepancy between the Jacobian oracle and central differences.
    pub fn jacobian_check(&self, x: &[f64]) -> Option<f64> {
        let jac = self.jacobian(x)?;
        let mut worst: f64 = 0.0;
        let mut y = x.to_vec();
        for k in 0..self.in_dim {
            let step = 1e-6 * (1.0 + x[k].abs());
            y[k] = x[k] + step;
            let up = self.eval(&y);
            y[k] = x[k] - step;
            let down = self.eval(&y);
            y[k] = x[k];
            for i in 0..self.out_dim {
                let fd = (up[i] - down[i]) / (2.0 * step);
                let a = jac[i * self.in_dim + k];
                worst = worst.max((a - fd).abs() / a.abs().max(fd.abs()).max(1.0));
            }
        }
        Some(worst)
    }
}

/// A deterministic sequence `nu -> f^nu` of fields on `R^dim`.
#[derive(Clone)]
pub struct FunctionSequence {
    dim: usize,
    generator: Arc<dyn Fn(usize) -> ScalarField + Send + Sync>,
}

impl fmt::Debug for FunctionSequence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FunctionSequence").field("dim", &self.dim).finish_non_exhaustive()
    }
}

impl FunctionSequence {
    pub fn new(dim: usize, generator: impl Fn(usize) -> ScalarField + Send + Sync + 'static) -> Self {
        FunctionSequence { dim, generator: Arc::new(generator) }
    }

    pub fn constant(f: ScalarField) -> Self {
        let dim = f.dim();
        FunctionSequence::new(dim, move |_| f.clone())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn at(&self, nu: usize) -> Result<ScalarField> {
        let f = (self.generator)(nu);
        check_dim(self.dim, f.dim())?;
        Ok(f)
    }
}

/// `x^3 - x^2 - x + 1 = (x - 1)^2 (x + 1)`.
pub fn cubic_constraint(x: f64) -> f64 {
    ((x - 1.0) * x - 1.0) * x + 1.0
}

/// Named one-dimensional fields. `param` is required where noted.
///
/// | name | field |
/// |---|---|
/// | `penalty` (theta) | `(x+1)^2 + theta x^2` |
/// | `penalty-limit` | `(x+1)^2` at `x = 0`, `+inf` elsewhere |
/// | `cubic` | `-x` where `x^3 - x^2 - x + 1 <= 0`, `+inf` elsewhere |
/// | `cubic-naive` (nu) | `-x` where `x^3 - x^2 - x + 1 + 1/nu <= 0` |
/// | `cubic-soft` (nu) | `-x + sqrt(nu) max{0, x^3 - x^2 - x + 1 + 1/nu}` |
/// | `step` | `-1` for `x <= 0`, `1` otherwise |
/// | `step-approx` (nu) | the continuous approximations of `step` |
/// | `cdf-step` | `0` for `x < 0`, `1` for `x >= 0` |
/// | `cdf-step-approx` (nu) | `(step-approx + 1) / 2` |
/// | `cdf-point-mass` (a) | `0` for `x < a`, `1` for `x >= a` |
/// | `max-ratio` (nu) | `max{-1, x/nu}` |
/// | `softplus` (theta) | `ln(1 + e^(theta x)) / theta` |
pub fn builtin(name: &str, param: Option<f64>) -> Result<ScalarField> {
    let need = |what: &str| -> Result<f64> {
        let p = param.ok_or_else(|| Error::invalid(format!("built-in {name:?} needs param ({what})")))?;
        if !p.is_finite() {
            return Err(Error::invalid(format!("built-in {name:?}: param must be finite")));
        }
        Ok(p)
    };
    let positive = |what: &str| -> Result<f64> {
        let p = need(what)?;
        if p > 0.0 {
            Ok(p)
        } else {
            Err(Error::invalid(format!("built-in {name:?}: {what} must be positive")))
        }
    };
    let f = match name {
        "penalty" => {
            let theta = need("theta")?;
            if theta < 0.0 {
                return Err(Error::invalid("penalty parameter must be >= 0"));
            }
            ScalarField::new(1, format!("penalty(theta={theta})"), move |x| (x[0] + 1.0).powi(2) + theta * x[0] * x[0])
                .with_gradient(move |x, g| g[0] = 2.0 * (x[0] + 1.0) + 2.0 * theta * x[0])
        }
        "penalty-limit" => ScalarField::new(1, "penalty-limit", |x| if x[0] == 0.0 { 1.0 } else { f64::INFINITY }),
        "cubic" => ScalarField::new(1, "cubic", |x| if cubic_constraint(x[0]) <= 0.0 { -x[0] } else { f64::INFINITY }),
        "cubic-naive" => {
            let nu = positive("nu")?;
            ScalarField::new(1, format!("cubic-naive(nu={nu})"), move |x| {
                if cubic_constraint(x[0]) + 1.0 / nu <= 0.0 {
                    -x[0]
                } else {
                    f64::INFINITY
                }
            })
        }
        "cubic-soft" => {
            let nu = positive("nu")?;
            let theta = nu.sqrt();
            ScalarField::new(1, format!("cubic-soft(nu={nu})"), move |x| {
                -x[0] + theta * (cubic_constraint(x[0]) + 1.0 / nu).max(0.0)
            })
        }
        "step" => ScalarField::new(1, "step", |x| if x[0] <= 0.0 { -1.0 } else { 1.0 }),
        "step-approx" => {
            let nu = positive("nu")?;
            ScalarField::new(1, format!("step-approx(nu={nu})"), move |x| step_approx(nu, x[0]))
        }
        "cdf-step" => ScalarField::new(1, "cdf-step", |x| if x[0] < 0.0 { 0.0 } else { 1.0 }),
        "cdf-step-approx" => {
            let nu = positive("nu")?;
            ScalarField::new(1, format!("cdf-step-approx(nu={nu})"), move |x| 0.5 * step_approx(nu, x[0]) + 0.5)
        }
        "cdf-point-mass" => {
            let a = need("a")?;
            ScalarField::new(1, format!("cdf-point-mass(a={a})"), move |x| if x[0] < a { 0.0 } else { 1.0 })
        }
        "max-ratio" => {
            let nu = positive("nu")?;
            ScalarField::new(1, format!("max-ratio(nu={nu})"), move |x| (x[0] / nu).max(-1.0))
        }
        "softplus" => {
            let theta = positive("theta")?;
            ScalarField::new(1, format!("softplus(theta={theta})"), move |x| {
                crate::geneq::smooth_plus_unchecked(x[0], theta)
            })
            .with_gradient(move |x, g| g[0] = crate::geneq::sigmoid(theta * x[0]))
        }
        other => return Err(Error::invalid(format!("unknown built-in field {other:?}"))),
    };
    Ok(f)
}

fn step_approx(nu: f64, x: f64) -> f64 {
    if x <= -1.0 / nu {
        -1.0
    } else if x <= 0.0 {
        -(-nu * x).sqrt()
    } else if x <= 1.0 / nu {
        (nu * x).sqrt()
    } else {
        1.0
    }
}

/// JSON description of a field.
///
/// ```json
/// {"kind": "sum", "of": [
///     {"kind": "quadratic", "q": [[2]], "c": [2], "d": 1},
///     {"kind": "builtin", "name": "penalty-limit"}
/// ]}
/// ```
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum FieldSpec {
    Constant {
        dim: usize,
        value: f64,
    },
    Affine {
        a: Vec<f64>,
        b: f64,
    },
    Quadratic {
        q: Vec<Vec<f64>>,
        c: Vec<f64>,
        d: f64,
    },
    PiecewiseQuadratic {
        breakpoints: Vec<f64>,
        pieces: Vec<[f64; 3]>,
    },
    Abs {
        of: Box<FieldSpec>,
    },
    Neg {
        of: Box<FieldSpec>,
    },
    Scale {
        factor: f64,
        of: Box<FieldSpec>,
    },
    Min {
        of: Vec<FieldSpec>,
    },
    Max {
        of: Vec<FieldSpec>,
    },
    Sum {
        of: Vec<FieldSpec>,
    },
    Builtin {
        name: String,
        #[serde(default)]
        param: Option<f64>,
    },
}

// Guards against pathological nesting in untrusted input.
const MAX_SPEC_DEPTH: usize = 64;

impl FieldSpec {
    pub fn build(&self) -> Result<ScalarField> {
        self.build_at(0)
    }

    fn build_at(&self, depth: usize) -> Result<ScalarField> {
        if depth > MAX_SPEC_DEPTH {
            return Err(Error::invalid("field specification nested too deeply"));
        }
        let finite = |v: f64, what: &str| {
            if v.is_finite() {
                Ok(v)
            } else {
                Err(Error::invalid(format!("{what} must be finite")))
            }
        };
        let nonempty_dim = |d: usize| {
            if d == 0 {
                Err(Error::invalid("field dimension must be positive"))
            } else {
                Ok(d)
            }
        };
        match self {
            FieldSpec::Constant { dim, value } => {
                Ok(ScalarField::constant(nonempty_dim(*dim)?, finite(*value, "value")?))
            }
            FieldSpec::Affine { a, b } => {
                nonempty_dim(a.len())?;
                for v in a {
                    finite(*v, "a")?;
                }
                Ok(ScalarField::affine(a.clone(), finite(*b, "b")?))
            }
            FieldSpec::Quadratic { q, c, d } => {
                nonempty_dim(c.len())?;
                for v in q.iter().flatten().chain(c) {
                    finite(*v, "quadratic coefficients")?;
                }
                ScalarField::quadratic(q.clone(), c.clone(), finite(*d, "d")?)
            }
            FieldSpec::PiecewiseQuadratic { breakpoints, pieces } => {
                ScalarField::piecewise_quadratic(breakpoints.clone(), pieces.clone())
            }
            FieldSpec::Abs { of } => Ok(of.build_at(depth + 1)?.abs()),
            FieldSpec::Neg { of } => Ok(of.build_at(depth + 1)?.neg()),
            FieldSpec::Scale { factor, of } => Ok(of.build_at(depth + 1)?.scale(finite(*factor, "factor")?)),
            FieldSpec::Min { of } | FieldSpec::Max { of } | FieldSpec::Sum { of } => {
                let mut parts = of.iter().map(|s| s.build_at(depth + 1));
                let mut acc = parts.next().ok_or_else(|| Error::invalid("combinator needs at least one operand"))??;
                for p in parts {
                    let p = p?;
                    acc = match self {
                        FieldSpec::Min { .. } => acc.min(&p)?,
                        FieldSpec::Max { .. } => acc.max(&p)?,
                        _ => acc.add(&p)?,
                    };
                }
                Ok(acc)
            }
            FieldSpec::Builtin { name, param } => builtin(name, *param),
        }
    }
}

/// Parses and builds a field from JSON.
pub fn field_from_json(text: &str) -> Result<ScalarField> {
    let spec: FieldSpec = serde_json::from_str(text).map_err(|e| Error::parse("field", e))?;
    spec.build()
}
