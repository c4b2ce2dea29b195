use std::sync::Arc;

use serde::Serialize;

use super::cone::Cone;
use super::polyhedron::{dot, norm2};
use crate::cloud::PointCloud;
use crate::distance::point_to_set_distance;
use crate::error::{check_dim, Error, Result};
use crate::limits::{outer_limit_over, SetSequence};
use crate::norm::NormSpec;

/// Unit directions `(cos t, sin t)` for `t = 0, step, 2 step, ...` degrees.
pub fn direction_probes_2d(step_deg: f64) -> Result<PointCloud> {
    if !(step_deg > 0.0 && step_deg <= 180.0) {
        return Err(Error::invalid(format!("angular step must be in (0, 180], got {step_deg}")));
    }
    let n = (360.0 / step_deg).round() as usize;
    let mut out = PointCloud::empty(2);
    for k in 0..n {
        let t = (k as f64 * 360.0 / n as f64).to_radians();
        out.push(&[t.cos(), t.sin()])?;
    }
    Ok(out)
}

/// `count` nearly uniform unit directions in `R^3` (Fibonacci lattice).
pub fn direction_probes_3d(count: usize) -> Result<PointCloud> {
    if count < 2 {
        return Err(Error::invalid("need at least two probes"));
    }
    let golden = std::f64::consts::PI * (3.0 - 5f64.sqrt());
    let mut out = PointCloud::empty(3);
    for k in 0..count {
        let z = 1.0 - 2.0 * (k as f64 + 0.5) / count as f64;
        let r = (1.0 - z * z).sqrt();
        let t = golden * k as f64;
        out.push(&[r * t.cos(), r * t.sin(), z])?;
    }
    Ok(out)
}

/// Direction probes retained by the outer-limit estimate of `nu (C - x)`
/// over the tail of `nu_schedule`: a unit probe `w` is kept when
/// `min_nu dist(w, nu (C - x)) <= tol`.
pub fn tangent_cone_sampled(
    c: &PointCloud,
    x: &[f64],
    nu_schedule: &[usize],
    probes: &PointCloud,
    tol: f64,
) -> Result<PointCloud> {
    check_dim(c.dim(), x.len())?;
    check_dim(c.dim(), probes.dim())?;
    let euclid = NormSpec::Euclidean;
    let gap = point_to_set_distance(x, c, &euclid)?.value();
    if !(gap <= tol) {
        return Err(Error::PointNotInSet);
    }
    let window = crate::epi::schedule_tail(nu_schedule)?;
    let nu_min = *window.iter().min().expect("nonempty");
    // Only points with nu |c - x| <= 2 can be near a unit probe.
    let local = Arc::new(c.filter(|p| nu_min as f64 * euclid.dist(p, x) <= 2.0 + tol));
    let origin = x.to_vec();
    let dim = c.dim();
    let seq = SetSequence::new(dim, move |nu| {
        local
            .map_points(dim, |p, out| {
                for i in 0..dim {
                    out[i] = nu as f64 * (p[i] - origin[i]);
                }
            })
            .expect("same dimension")
    });
    Ok(outer_limit_over(&seq, &window, probes, tol, &euclid)?.candidate)
}

/// Probes `v` with `v . w <= sin(tol_deg)` for every retained tangent probe
/// `w`: the polar of a sampled tangent cone.
pub fn normal_cone_from_tangent(tangent: &PointCloud, probes: &PointCloud, tol_deg: f64) -> Result<PointCloud> {
    check_dim(tangent.dim(), probes.dim())?;
    let s = tol_deg.to_radians().sin();
    Ok(probes.filter(|v| tangent.iter().all(|w| dot(v, w) <= s * norm2(v) * norm2(w))))
}

/// Sampled regular normal directions at the sample point `p`: unit probes
/// `v` with `v . (q - p) <= sin(tol_deg) |q - p|` for every other sample `q`
/// with `|q - p| <= scale`. Interior points have none.
pub fn regular_normals_at(
    c: &PointCloud,
    p: &[f64],
    probes: &PointCloud,
    scale: f64,
    tol_deg: f64,
) -> Result<PointCloud> {
    check_dim(c.dim(), p.len())?;
    check_dim(c.dim(), probes.dim())?;
    let s = tol_deg.to_radians().sin();
    let euclid = NormSpec::Euclidean;
    let near: Vec<Vec<f64>> = c
        .iter()
        .filter(|q| {
            let d = euclid.dist(q, p);
            d > 0.0 && d <= scale
        })
        .map(|q| q.iter().zip(p).map(|(a, b)| a - b).collect())
        .collect();
    Ok(probes.filter(|v| near.iter().all(|d| dot(v, d) <= s * norm2(d))))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LimitingNormals {
    /// Retained unit directions; empty means the cone is `{0}`.
    pub directions: PointCloud,
    /// Sample points used per approach radius.
    pub boundary_counts: Vec<usize>,
}

/// Outer-limit estimate of the sampled regular normals at samples
/// `x^nu -> x`. Stage `k` unions the normals at all samples within
/// `approach_radii[k]` of `x`; the estimate keeps probes within `tol` of some
/// stage union on the tail half of the radii.
pub fn limiting_normal_cone_sampled(
    c: &PointCloud,
    x: &[f64],
    approach_radii: &[f64],
    probes: &PointCloud,
    scale: f64,
    tol_deg: f64,
    tol: f64,
) -> Result<LimitingNormals> {
    check_dim(c.dim(), x.len())?;
    if approach_radii.is_empty() || approach_radii.iter().any(|r| !(*r > 0.0)) {
        return Err(Error::invalid("approach radii must be positive"));
    }
    let euclid = NormSpec::Euclidean;
    let mut stages = Vec::with_capacity(approach_radii.len());
    let mut boundary_counts = Vec::with_capacity(approach_radii.len());
    for &r in approach_radii {
        let near = c.filter(|p| euclid.dist(p, x) <= r);
        if near.len() < 2 {
            return Err(Error::InsufficientSamples(format!("{} samples within {r} of the point", near.len())));
        }
        let mut union = PointCloud::empty(c.dim());
        for p in near.iter() {
            union = union.union(&regular_normals_at(c, p, probes, scale, tol_deg)?)?;
        }
        boundary_counts.push(near.len());
        stages.push(union.dedup());
    }
    let stages = Arc::new(stages);
    let dim = c.dim();
    let seq = SetSequence::new(dim, move |k| stages[k - 1].clone());
    let window: Vec<usize> = crate::limits::tail_window(approach_radii.len());
    let directions = outer_limit_over(&seq, &window, probes, tol, &euclid)?.candidate;
    Ok(LimitingNormals { directions, boundary_counts })
}

/// Agreement of a sampled cone with an exact one in the plane: retained
/// probes within `angle_deg` of `cone`, and probes whose rotations by
/// `+-angle_deg` both lie in `cone` retained. Returns `0` when the two agree,
/// otherwise the largest angle by which an offending probe misses.
pub fn probe_agreement_2d(cone: &Cone, probes: &PointCloud, retained: &PointCloud, angle_deg: f64) -> Result<f64> {
    check_dim(2, cone.dim())?;
    check_dim(2, probes.dim())?;
    let kept = |p: &[f64]| retained.iter().any(|q| q == p);
    let rot = |p: &[f64], deg: f64| {
        let (s, c) = deg.to_radians().sin_cos();
        [c * p[0] - s * p[1], s * p[0] + c * p[1]]
    };
    let mut worst: f64 = 0.0;
    for p in probes.iter() {
        if kept(p) {
            let a = cone.angle_to(p)?;
            if a > angle_deg {
                worst = worst.max(a);
            }
        } else if cone.contains(&rot(p, angle_deg), 1e-12)? && cone.contains(&rot(p, -angle_deg), 1e-12)? {
            worst = worst.max(cone_depth(cone, p)?.max(angle_deg));
        }
    }
    Ok(worst)
}

// Largest rotation (degrees, up to 180) keeping `p` inside `cone` both ways.
fn cone_depth(cone: &Cone, p: &[f64]) -> Result<f64> {
    let mut d = 0.0;
    while d < 180.0 {
        let (s, c) = (d + 0.25f64).to_radians().sin_cos();
        let a = [c * p[0] - s * p[1], s * p[0] + c * p[1]];
        let b = [c * p[0] + s * p[1], -s * p[0] + c * p[1]];
        if !(cone.contains(&a, 1e-12)? && cone.contains(&b, 1e-12)?) {
            break;
        }
        d += 0.25;
    }
    Ok(d)
}
