use serde::{Deserialize, Serialize};

use super::mapping::SetValuedMap;
use super::smoothing::{euclid, StageTrace};
use crate::error::{check_dim, Error, Result};
use crate::newton::{newton_solve, NewtonParams};

/// Continuation parameters `1 >= lambda^1 > lambda^2 > ... >= 0` with
/// optional right-hand sides `y^nu` (default: the target `y` at every stage).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HomotopySchedule {
    pub lambdas: Vec<f64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub targets: Vec<Vec<f64>>,
}

impl HomotopySchedule {
    pub fn new(lambdas: Vec<f64>) -> Result<Self> {
        let s = HomotopySchedule { lambdas, targets: Vec::new() };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        if self.lambdas.is_empty() {
            return Err(Error::invalid("homotopy schedule is empty"));
        }
        if self.lambdas.iter().any(|l| !(0.0..=1.0).contains(l)) {
            return Err(Error::invalid("homotopy parameters must lie in [0, 1]"));
        }
        if self.lambdas.windows(2).any(|w| !(w[0] > w[1])) {
            return Err(Error::invalid("homotopy parameters must be strictly decreasing"));
        }
        if !self.targets.is_empty() {
            check_dim(self.lambdas.len(), self.targets.len())?;
            if self.targets.iter().flatten().any(|v| !v.is_finite()) {
                return Err(Error::invalid("homotopy targets must be finite"));
            }
        }
        Ok(())
    }

    fn target<'a>(&'a self, k: usize, y_bar: &'a [f64]) -> &'a [f64] {
        self.targets.get(k).map_or(y_bar, Vec::as_slice)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct HomotopySolution {
    pub x: Vec<f64>,
    pub stages: Vec<StageTrace>,
    /// `|S(x) - y|_2` at the final iterate.
    pub residual: f64,
}

/// Solves `(1 - lambda) S(x) + lambda x = y^nu` stage by stage with Newton,
/// starting from `x = y^1` (exact when `lambda^1 = 1`) and warm-starting
/// each later stage.
pub fn homotopy_solve(
    s: &SetValuedMap,
    y_bar: &[f64],
    schedule: &HomotopySchedule,
    params: &NewtonParams,
) -> Result<HomotopySolution> {
    let f = s.as_field().ok_or_else(|| Error::invalid("homotopy needs a single-valued map"))?;
    let n = s.in_dim();
    check_dim(n, s.out_dim())?;
    check_dim(n, y_bar.len())?;
    schedule.validate()?;
    for t in &schedule.targets {
        check_dim(n, t.len())?;
    }
    if !f.has_jacobian() {
        return Err(Error::MissingOracle("jacobian"));
    }
    let mut x = schedule.target(0, y_bar).to_vec();
    let mut stages = Vec::with_capacity(schedule.lambdas.len());
    for (k, &lambda) in schedule.lambdas.iter().enumerate() {
        let y = schedule.target(k, y_bar);
        let residual = |x: &[f64], out: &mut [f64]| {
            f.eval_into(x, out);
            for i in 0..n {
                out[i] = (1.0 - lambda) * out[i] + lambda * x[i] - y[i];
            }
        };
        let jacobian = |x: &[f64], out: &mut [f64]| {
            let j = f.jacobian(x).expect("checked above");
            for i in 0..n {
                for c in 0..n {
                    out[i * n + c] = (1.0 - lambda) * j[i * n + c] + if i == c { lambda } else { 0.0 };
                }
            }
        };
        let out = newton_solve(residual, jacobian, &x, params).map_err(|e| match e {
            Error::Divergence { residual, iterate, .. } => Error::Divergence { stage: k + 1, residual, iterate },
            other => other,
        })?;
        x = out.x;
        stages.push(StageTrace {
            stage: k + 1,
            parameter: lambda,
            iterations: out.iterations,
            residual: out.residual,
            target_residual: target_residual(f, &x, y_bar),
        });
    }
    let residual = target_residual(f, &x, y_bar);
    Ok(HomotopySolution { x, stages, residual })
}

fn target_residual(f: &crate::field::VectorField, x: &[f64], y: &[f64]) -> f64 {
    let v: Vec<f64> = f.eval(x).iter().zip(y).map(|(a, b)| a - b).collect();
    euclid(&v)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::VectorField;

    fn sin_map() -> SetValuedMap {
        SetValuedMap::single_valued(
            VectorField::new(1, 1, "x + sin x + 1", |x, o| o[0] = x[0] + x[0].sin() + 1.0)
                .with_jacobian(|x, j| j[0] = 1.0 + x[0].cos()),
        )
    }

    fn schedule() -> HomotopySchedule {
        HomotopySchedule::new(vec![1.0, 0.5, 0.1, 0.01, 0.0]).unwrap()
    }

    #[test]
    fn sin_root() {
        let out = homotopy_solve(&sin_map(), &[0.0], &schedule(), &NewtonParams::default()).unwrap();
        assert!((out.x[0] + 0.5110).abs() < 1e-4);
        assert!(out.residual <= 1e-10);
        assert_eq!(out.stages.len(), 5);
        assert_eq!(out.stages[0].iterations, 0);
    }

    #[test]
    fn identity_stays_put() {
        let id = SetValuedMap::single_valued(VectorField::affine(vec![vec![1.0]], vec![0.0]).unwrap());
        let out = homotopy_solve(&id, &[2.5], &schedule(), &NewtonParams::default()).unwrap();
        assert_eq!(out.x, vec![2.5]);
        assert!(out.stages.iter().all(|s| s.iterations == 0));
    }

    #[test]
    fn affine_stage_solutions() {
        let s = SetValuedMap::single_valued(VectorField::affine(vec![vec![2.0]], vec![1.0]).unwrap());
        let sched = schedule();
        for k in 1..=sched.lambdas.len() {
            let partial = HomotopySchedule::new(sched.lambdas[..k].to_vec()).unwrap();
            let out = homotopy_solve(&s, &[0.0], &partial, &NewtonParams::default()).unwrap();
            let l = sched.lambdas[k - 1];
            let exact = -(1.0 - l) / ((1.0 - l) * 2.0 + l);
            assert!((out.x[0] - exact).abs() < 1e-12, "lambda {l}");
        }
    }

    #[test]
    fn moving_targets() {
        let sched = HomotopySchedule { lambdas: vec![1.0, 0.5, 0.0], targets: vec![vec![1.0], vec![0.5], vec![0.0]] };
        let out = homotopy_solve(&sin_map(), &[0.0], &sched, &NewtonParams::default()).unwrap();
        assert!((out.x[0] + 0.5110).abs() < 1e-4);
    }

    #[test]
    fn validation() {
        assert!(HomotopySchedule::new(vec![]).is_err());
        assert!(HomotopySchedule::new(vec![0.5, 0.5]).is_err());
        assert!(HomotopySchedule::new(vec![1.5, 0.5]).is_err());
        assert!(serde_json::from_str::<HomotopySchedule>(r#"{"lambdas": [1], "extra": 1}"#).is_err());
        let no_jac = SetValuedMap::single_valued(VectorField::new(1, 1, "f", |x, o| o[0] = x[0]));
        assert_eq!(
            homotopy_solve(&no_jac, &[0.0], &schedule(), &NewtonParams::default()).unwrap_err(),
            Error::MissingOracle("jacobian")
        );
    }

    #[test]
    fn divergence_names_the_stage() {
        // x^2 + 1 = 0 has no real solution; the first stage with lambda < 1 fails.
        let s = SetValuedMap::single_valued(
            VectorField::new(1, 1, "x^2 + 1", |x, o| o[0] = x[0] * x[0] + 1.0).with_jacobian(|x, j| j[0] = 2.0 * x[0]),
        );
        let sched = HomotopySchedule::new(vec![1.0, 0.0]).unwrap();
        let err = homotopy_solve(&s, &[0.0], &sched, &NewtonParams::default()).unwrap_err();
        assert!(matches!(err, Error::Divergence { stage: 2, .. }), "{err:?}");
    }
}
