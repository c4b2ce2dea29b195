use serde::{Deserialize, Serialize};

use super::mapping::SetValuedMap;
use crate::error::{check_dim, Error, Result};
use crate::field::VectorField;
use crate::newton::{newton_solve, NewtonParams};
use crate::report::{fmt_f64, Table};

/// `1 / (1 + e^(-t))` without overflow.
pub fn sigmoid(t: f64) -> f64 {
    if t >= 0.0 {
        1.0 / (1.0 + (-t).exp())
    } else {
        let e = t.exp();
        e / (1.0 + e)
    }
}

/// `ln(1 + e^(alpha theta)) / theta` for `theta > 0`.
pub fn smooth_plus(alpha: f64, theta: f64) -> Result<f64> {
    if !(theta > 0.0) || !theta.is_finite() {
        return Err(Error::invalid(format!("smoothing parameter must be positive, got {theta}")));
    }
    Ok(smooth_plus_unchecked(alpha, theta))
}

pub(crate) fn smooth_plus_unchecked(alpha: f64, theta: f64) -> f64 {
    let t = alpha * theta;
    let mut v = if t > 30.0 { alpha + (-t).exp().ln_1p() / theta } else { t.exp().ln_1p() / theta };
    // Keep the computed envelope 0 <= v - max{0, alpha} <= ln 2 / theta exact
    // in floating point; the true value is at most a few ulps away.
    let floor = alpha.max(0.0);
    let bound = std::f64::consts::LN_2 / theta;
    while v - floor > bound {
        v = v.next_down();
    }
    while v - floor < 0.0 {
        v = v.next_up();
    }
    v
}

/// `F(p) + z - p` with `p = max{0, z}` componentwise.
pub fn normal_map_residual(f: &VectorField, z: &[f64]) -> Result<Vec<f64>> {
    check_dim(f.in_dim(), z.len())?;
    check_dim(f.in_dim(), f.out_dim())?;
    let p: Vec<f64> = z.iter().map(|v| v.max(0.0)).collect();
    let fp = f.eval(&p);
    Ok(fp.iter().zip(z).zip(&p).map(|((a, zi), pi)| a + zi - pi).collect())
}

/// The normal map `z -> F(p) + z - p` as a single-valued mapping, with
/// `p = max{0, z}` or, given `theta`, its smoothing `p = Phi(z)`.
pub fn normal_map(f: &VectorField, theta: Option<f64>) -> Result<SetValuedMap> {
    let n = f.in_dim();
    check_dim(n, f.out_dim())?;
    if let Some(t) = theta {
        smooth_plus(0.0, t)?;
    }
    let g = f.clone();
    let label = match theta {
        Some(t) => format!("normal-map(theta={t})"),
        None => "normal-map".to_string(),
    };
    let field = VectorField::new(n, n, label, move |z, out| {
        let p: Vec<f64> = match theta {
            Some(t) => z.iter().map(|&v| smooth_plus_unchecked(v, t)).collect(),
            None => z.iter().map(|v| v.max(0.0)).collect(),
        };
        g.eval_into(&p, out);
        for i in 0..n {
            out[i] += z[i] - p[i];
        }
    });
    Ok(SetValuedMap::single_valued(field))
}

pub(crate) fn euclid(v: &[f64]) -> f64 {
    v.iter().map(|a| a * a).sum::<f64>().sqrt()
}

/// Increasing smoothing parameters with optional per-stage Newton tolerances.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SmoothingSchedule {
    pub thetas: Vec<f64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub tolerances: Vec<f64>,
}

impl SmoothingSchedule {
    pub fn new(thetas: Vec<f64>) -> Result<Self> {
        let s = SmoothingSchedule { thetas, tolerances: Vec::new() };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        if self.thetas.is_empty() {
            return Err(Error::invalid("smoothing schedule is empty"));
        }
        if self.thetas.iter().any(|t| !(*t > 0.0) || !t.is_finite()) {
            return Err(Error::invalid("smoothing parameters must be positive and finite"));
        }
        if self.thetas.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(Error::invalid("smoothing parameters must be strictly increasing"));
        }
        if !self.tolerances.is_empty() {
            check_dim(self.thetas.len(), self.tolerances.len())?;
            if self.tolerances.iter().any(|t| !(*t > 0.0)) {
                return Err(Error::invalid("stage tolerances must be positive"));
            }
        }
        Ok(())
    }

    fn params(&self, k: usize, base: &NewtonParams) -> NewtonParams {
        NewtonParams { tol: self.tolerances.get(k).copied().unwrap_or(base.tol), ..*base }
    }
}

/// One continuation stage.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct StageTrace {
    pub stage: usize,
    /// `theta` or `lambda`.
    pub parameter: f64,
    pub iterations: usize,
    /// Residual of the stage equation at the stage solution.
    pub residual: f64,
    /// Residual of the target equation at the stage solution.
    pub target_residual: f64,
}

/// Trace as CSV rows `stage, <parameter>, iterations, residual, target_residual`.
pub fn trace_table(stages: &[StageTrace], parameter: &str) -> Table {
    let mut t = Table::new(["stage", parameter, "iterations", "residual", "target_residual"]);
    for s in stages {
        t.push([
            s.stage.to_string(),
            fmt_f64(s.parameter),
            s.iterations.to_string(),
            fmt_f64(s.residual),
            fmt_f64(s.target_residual),
        ]);
    }
    t
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CpSolution {
    pub z: Vec<f64>,
    /// `max{0, z}`, the complementarity solution estimate.
    pub x: Vec<f64>,
    pub stages: Vec<StageTrace>,
    /// `|F(p) + z - p|_2` at the final `z`.
    pub exact_residual: f64,
    /// `exact_residual * theta_final`.
    pub residual_constant: f64,
}

/// Solves `0 = F(Phi(z)) + z - Phi(z)` with `Phi` the componentwise
/// [`smooth_plus`] at each `theta` of the schedule, warm-starting Newton from
/// the previous stage.
pub fn solve_cp_smoothed(
    f: &VectorField,
    schedule: &SmoothingSchedule,
    z0: &[f64],
    params: &NewtonParams,
) -> Result<CpSolution> {
    let n = f.in_dim();
    check_dim(n, f.out_dim())?;
    check_dim(n, z0.len())?;
    schedule.validate()?;
    if !f.has_jacobian() {
        return Err(Error::MissingOracle("jacobian"));
    }
    let mut z = z0.to_vec();
    let mut stages = Vec::with_capacity(schedule.thetas.len());
    for (k, &theta) in schedule.thetas.iter().enumerate() {
        let residual = |z: &[f64], out: &mut [f64]| {
            let phi: Vec<f64> = z.iter().map(|&v| smooth_plus_unchecked(v, theta)).collect();
            f.eval_into(&phi, out);
            for i in 0..n {
                out[i] += z[i] - phi[i];
            }
        };
        let jacobian = |z: &[f64], out: &mut [f64]| {
            let phi: Vec<f64> = z.iter().map(|&v| smooth_plus_unchecked(v, theta)).collect();
            let d: Vec<f64> = z.iter().map(|&v| sigmoid(theta * v)).collect();
            let jf = f.jacobian(&phi).expect("checked above");
            for i in 0..n {
                for j in 0..n {
                    out[i * n + j] = jf[i * n + j] * d[j] + if i == j { 1.0 - d[j] } else { 0.0 };
                }
            }
        };
        let out = newton_solve(residual, jacobian, &z, &schedule.params(k, params)).map_err(|e| match e {
            Error::Divergence { residual, iterate, .. } => Error::Divergence { stage: k + 1, residual, iterate },
            other => other,
        })?;
        z = out.x;
        stages.push(StageTrace {
            stage: k + 1,
            parameter: theta,
            iterations: out.iterations,
            residual: out.residual,
            target_residual: euclid(&normal_map_residual(f, &z)?),
        });
    }
    let exact_residual = stages.last().expect("nonempty schedule").target_residual;
    let theta_final = *schedule.thetas.last().expect("nonempty schedule");
    Ok(CpSolution {
        x: z.iter().map(|v| v.max(0.0)).collect(),
        z,
        stages,
        exact_residual,
        residual_constant: exact_residual * theta_final,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::f64::consts::LN_2;

    fn lcp() -> VectorField {
        VectorField::affine(vec![vec![2.0, 1.0], vec![1.0, 2.0]], vec![-1.0, -1.0]).unwrap()
    }

    #[test]
    fn smooth_plus_values() {
        assert!((smooth_plus(0.0, 10.0).unwrap() - 0.0693147).abs() < 1e-7);
        assert_eq!(smooth_plus(100.0, 10.0).unwrap(), 100.0);
        assert!(smooth_plus(1.0, 0.0).is_err());
        assert!(smooth_plus(1.0, -1.0).is_err());
        assert_eq!(smooth_plus(-1e6, 10.0).unwrap(), 0.0);
    }

    #[test]
    fn sigmoid_is_the_derivative() {
        for &(a, th) in &[(0.3, 10.0), (-0.2, 5.0), (2.0, 1.0)] {
            let h = 1e-6;
            let fd = (smooth_plus(a + h, th).unwrap() - smooth_plus(a - h, th).unwrap()) / (2.0 * h);
            assert!((fd - sigmoid(th * a)).abs() < 1e-6);
        }
        assert_eq!(sigmoid(-1000.0), 0.0);
        assert_eq!(sigmoid(1000.0), 1.0);
    }

    #[test]
    fn normal_map_examples() {
        let zero = VectorField::affine(vec![vec![0.0, 0.0], vec![0.0, 0.0]], vec![0.0, 0.0]).unwrap();
        assert_eq!(normal_map_residual(&zero, &[-1.0, -2.0]).unwrap(), vec![-1.0, -2.0]);
        let r = normal_map_residual(&lcp(), &[1.0 / 3.0, 1.0 / 3.0]).unwrap();
        assert!(euclid(&r) < 1e-15);
        let shift = VectorField::affine(vec![vec![1.0]], vec![-1.0]).unwrap();
        assert_eq!(normal_map_residual(&shift, &[1.0]).unwrap(), vec![0.0]);
    }

    #[test]
    fn lcp_solution() {
        let s = SmoothingSchedule::new(vec![10.0, 1e2, 1e3, 1e4]).unwrap();
        let out = solve_cp_smoothed(&lcp(), &s, &[0.0, 0.0], &NewtonParams::default()).unwrap();
        assert!(out.x.iter().all(|v| (v - 1.0 / 3.0).abs() < 1e-4));
        assert!(out.exact_residual <= 10.0 * LN_2 / 1e4);
        assert_eq!(out.stages.len(), 4);
    }

    #[test]
    fn one_dimensional_and_trivial_problems() {
        let s = SmoothingSchedule::new(vec![10.0, 1e2, 1e3, 1e4]).unwrap();
        let shift = VectorField::affine(vec![vec![1.0]], vec![-1.0]).unwrap();
        let out = solve_cp_smoothed(&shift, &s, &[0.0], &NewtonParams::default()).unwrap();
        assert!((out.x[0] - 1.0).abs() < 1e-6);
        let trivial = VectorField::affine(vec![vec![1.0, 0.0], vec![0.0, 1.0]], vec![0.5, 2.0]).unwrap();
        let out = solve_cp_smoothed(&trivial, &s, &[1.0, 1.0], &NewtonParams::default()).unwrap();
        assert!(out.x.iter().all(|v| *v <= LN_2 / 1e4));
    }

    #[test]
    fn normal_maps_converge_graphically() {
        use crate::geneq::{graph_distance, near_solution_check};
        use crate::grid::GridSpec;
        use crate::norm::NormSpec;
        let exact = normal_map(&lcp(), None).unwrap();
        let grid = GridSpec::cube(2, -1.0, 1.0, 20).unwrap();
        let out = GridSpec::cube(2, -1.0, 1.0, 1).unwrap();
        let e = NormSpec::Euclidean;
        let mut prev = f64::INFINITY;
        for theta in [5.0, 50.0, 500.0] {
            let smooth = normal_map(&lcp(), Some(theta)).unwrap();
            let d = graph_distance(&smooth, &exact, 1.0, &grid, &out, &e, &e).unwrap();
            assert!(d < prev && d <= 3.0 * LN_2 / theta, "{theta}: {d}");
            prev = d;
        }
        let smooth = normal_map(&lcp(), Some(50.0)).unwrap();
        let fine = GridSpec::cube(2, -1.0, 1.0, 100).unwrap();
        let r = near_solution_check(&exact, &smooth, &[0.0, 0.0], 0.05, 0.2, 1.0, &fine, &out, &e, &e).unwrap();
        assert!(r.preconditions_hold && r.delta_strict && r.holds, "{r:?}");
        assert!(normal_map(&lcp(), Some(0.0)).is_err());
    }

    #[test]
    fn schedule_validation() {
        assert!(SmoothingSchedule::new(vec![]).is_err());
        assert!(SmoothingSchedule::new(vec![10.0, 5.0]).is_err());
        assert!(SmoothingSchedule::new(vec![-1.0]).is_err());
        let bad: std::result::Result<SmoothingSchedule, _> = serde_json::from_str(r#"{"thetas": [1], "x": 2}"#);
        assert!(bad.is_err());
        let s: SmoothingSchedule = serde_json::from_str(r#"{"thetas": [1, 2], "tolerances": [1e-8, 1e-9]}"#).unwrap();
        assert!(s.validate().is_ok());
    }

    #[test]
    fn divergence_reports_the_stage() {
        // F(x) = -x - 1 has no complementarity solution.
        let f = VectorField::affine(vec![vec![-1.0]], vec![-1.0]).unwrap();
        let s = SmoothingSchedule::new(vec![10.0, 100.0]).unwrap();
        let err = solve_cp_smoothed(&f, &s, &[0.0], &NewtonParams::default()).unwrap_err();
        assert!(matches!(err, Error::Divergence { stage: 1, .. }), "{err:?}");
    }

    proptest! {
        #[test]
        fn envelope_is_exact(alpha in -50.0f64..50.0, theta in 0.01f64..1e4) {
            let v = smooth_plus(alpha, theta).unwrap();
            let gap = v - alpha.max(0.0);
            prop_assert!(gap >= 0.0);
            prop_assert!(gap <= LN_2 / theta);
        }

        #[test]
        fn monotone(a in -10.0f64..10.0, d in 0.0f64..1.0, theta in 0.1f64..100.0) {
            prop_assert!(smooth_plus(a, theta).unwrap() <= smooth_plus(a + d, theta).unwrap());
        }
    }
}
