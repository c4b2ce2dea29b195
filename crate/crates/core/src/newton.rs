//! Damped Newton iteration for square nonlinear systems.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Stopping and damping parameters.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct NewtonParams {
    /// Absolute tolerance on the Euclidean norm of the residual.
    pub tol: f64,
    pub max_iter: usize,
    /// Step halvings allowed when a full step does not decrease the residual.
    pub max_halvings: usize,
}

impl Default for NewtonParams {
    fn default() -> Self {
        NewtonParams { tol: 1e-10, max_iter: 50, max_halvings: 20 }
    }
}

impl NewtonParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.tol > 0.0) || self.max_iter == 0 {
            return Err(Error::invalid("newton: tol must be positive and max_iter at least 1"));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct NewtonOutcome {
    pub x: Vec<f64>,
    pub residual: f64,
    pub iterations: usize,
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|a| a * a).sum::<f64>().sqrt()
}

/// Solves `r(x) = 0` from `x0`. `jacobian` fills an `n x n` row-major matrix.
///
/// A full step is halved until the residual norm decreases. Failure to
/// converge, a singular Jacobian or a non-finite residual give
/// [`Error::Divergence`] with `stage = 0` and the last iterate.
pub fn newton_solve(
    residual: impl Fn(&[f64], &mut [f64]),
    jacobian: impl Fn(&[f64], &mut [f64]),
    x0: &[f64],
    params: &NewtonParams,
) -> Result<NewtonOutcome> {
    params.validate()?;
    let n = x0.len();
    let mut x = x0.to_vec();
    let mut r = vec![0.0; n];
    let mut jac = vec![0.0; n * n];
    let mut trial = vec![0.0; n];
    let mut r_trial = vec![0.0; n];
    residual(&x, &mut r);
    let mut rn = norm(&r);
    let diverged = |x: &[f64], rn: f64| Error::Divergence { stage: 0, residual: rn, iterate: x.to_vec() };
    for it in 0..=params.max_iter {
        if !rn.is_finite() {
            return Err(diverged(&x, rn));
        }
        if rn <= params.tol {
            return Ok(NewtonOutcome { x, residual: rn, iterations: it });
        }
        if it == params.max_iter {
            break;
        }
        jacobian(&x, &mut jac);
        let m = DMatrix::from_row_slice(n, n, &jac);
        let rhs = DVector::from_column_slice(&r);
        let step = match m.lu().solve(&rhs) {
            Some(s) if s.iter().all(|v| v.is_finite()) => s,
            _ => return Err(diverged(&x, rn)),
        };
        let mut t = 1.0;
        let mut accepted = false;
        for _ in 0..=params.max_halvings {
            for i in 0..n {
                trial[i] = x[i] - t * step[i];
            }
            residual(&trial, &mut r_trial);
            let tn = norm(&r_trial);
            if tn < rn {
                x.copy_from_slice(&trial);
                r.copy_from_slice(&r_trial);
                rn = tn;
                accepted = true;
                break;
            }
            t *= 0.5;
        }
        if !accepted {
            return Err(diverged(&x, rn));
        }
    }
    Err(diverged(&x, rn))
}

/// Scalar convenience wrapper.
pub fn newton_solve_1d(
    f: impl Fn(f64) -> f64,
    df: impl Fn(f64) -> f64,
    x0: f64,
    params: &NewtonParams,
) -> Result<NewtonOutcome> {
    newton_solve(|x, r| r[0] = f(x[0]), |x, j| j[0] = df(x[0]), &[x0], params)
}
