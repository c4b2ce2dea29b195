//! Exact polyhedral cones against their sampled magnification estimates.

use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Error, Result};
use crate::report::{fmt_f64, Table};
use crate::vargeo::{
    direction_probes_2d, normal_cone_from_tangent, probe_agreement_2d, tangent_cone_sampled, ConvexPolyhedron,
};

/// A polyhedron and a point of it.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConeInstance {
    pub name: String,
    pub polyhedron: ConvexPolyhedron,
    pub point: Vec<f64>,
}

/// Sampling parameters for [`cone_check`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ConeSampling {
    /// Angular spacing of the unit probes, degrees.
    pub probe_step_deg: f64,
    /// Grid spacing of the sample of the polyhedron.
    pub spacing: f64,
    /// Magnification schedule; the estimate uses its tail half.
    pub nus: Vec<usize>,
    /// Distance tolerance of the outer-limit estimate.
    pub tol: f64,
    /// Angle in degrees within which sampled and exact cones must agree.
    pub agreement_deg: f64,
}

impl Default for ConeSampling {
    fn default() -> Self {
        ConeSampling { probe_step_deg: 1.0, spacing: 0.001, nus: vec![5, 10], tol: 0.01, agreement_deg: 1.0 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConeRow {
    pub name: String,
    pub point: Vec<f64>,
    pub active: Vec<usize>,
    pub tangent_probes: usize,
    pub normal_probes: usize,
    /// `0` when the sampled tangent cone agrees with the exact one.
    pub tangent_miss_deg: f64,
    pub normal_miss_deg: f64,
}

impl ConeRow {
    pub fn agrees(&self) -> bool {
        self.tangent_miss_deg == 0.0 && self.normal_miss_deg == 0.0
    }
}

/// The five planar instances used by the `cones` demo: a corner, an edge
/// and an interior point of the orthant, an acute vertex of a triangle and
/// a vertex of an obtuse wedge.
pub fn polyhedral_instances() -> Vec<ConeInstance> {
    let poly = |a: Vec<Vec<f64>>, b: Vec<f64>| ConvexPolyhedron::new(a, b).expect("fixed data");
    let orthant = ConvexPolyhedron::orthant(2).expect("fixed data");
    vec![
        ConeInstance { name: "orthant-corner".into(), polyhedron: orthant.clone(), point: vec![0.0, 0.0] },
        ConeInstance { name: "orthant-edge".into(), polyhedron: orthant.clone(), point: vec![0.5, 0.0] },
        ConeInstance { name: "orthant-interior".into(), polyhedron: orthant, point: vec![0.5, 0.5] },
        ConeInstance {
            name: "triangle-vertex".into(),
            polyhedron: poly(vec![vec![-1.0, 0.0], vec![0.0, -1.0], vec![1.0, 1.0]], vec![0.0, 0.0, 1.0]),
            point: vec![1.0, 0.0],
        },
        ConeInstance {
            name: "obtuse-wedge".into(),
            polyhedron: poly(vec![vec![-1.0, 2.0], vec![-1.0, -2.0]], vec![0.0, 0.0]),
            point: vec![0.0, 0.0],
        },
    ]
}

/// Samples the polyhedron near the point, estimates the tangent cone as an
/// outer limit of magnifications, takes its polar as the normal cone, and
/// measures both against the exact cones with [`probe_agreement_2d`].
pub fn cone_check(instance: &ConeInstance, sampling: &ConeSampling) -> Result<ConeRow> {
    let p = &instance.polyhedron;
    let x = &instance.point;
    check_dim(2, p.dim())?;
    check_dim(2, x.len())?;
    if sampling.nus.is_empty() || sampling.nus.contains(&0) {
        return Err(Error::invalid("magnification schedule must be nonempty and positive"));
    }
    let active = p.active_set(x)?;
    let window = crate::epi::schedule_tail(&sampling.nus)?;
    let nu_min = *window.iter().min().expect("nonempty window");
    let radius = (2.0 + sampling.tol) / nu_min as f64 + sampling.spacing;
    let sample = p.sample_near(x, radius, sampling.spacing)?;
    let probes = direction_probes_2d(sampling.probe_step_deg)?;
    let tangent = tangent_cone_sampled(&sample, x, &sampling.nus, &probes, sampling.tol)?;
    let normal = normal_cone_from_tangent(&tangent, &probes, sampling.agreement_deg)?;
    let a = sampling.agreement_deg;
    Ok(ConeRow {
        name: instance.name.clone(),
        point: x.clone(),
        active,
        tangent_probes: tangent.len(),
        normal_probes: normal.len(),
        tangent_miss_deg: probe_agreement_2d(&p.tangent_cone(x)?, &probes, &tangent, a)?,
        normal_miss_deg: probe_agreement_2d(&p.normal_cone(x)?, &probes, &normal, a)?,
    })
}

pub fn cone_table(rows: &[ConeRow]) -> Table {
    let mut t = Table::new([
        "name",
        "x0",
        "x1",
        "active",
        "tangent_probes",
        "normal_probes",
        "tangent_miss_deg",
        "normal_miss_deg",
        "agrees",
    ]);
    for r in rows {
        let active: Vec<String> = r.active.iter().map(ToString::to_string).collect();
        t.push([
            r.name.clone(),
            fmt_f64(r.point[0]),
            fmt_f64(r.point[1]),
            active.join(" "),
            r.tangent_probes.to_string(),
            r.normal_probes.to_string(),
            fmt_f64(r.tangent_miss_deg),
            fmt_f64(r.normal_miss_deg),
            r.agrees().to_string(),
        ]);
    }
    t
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn instances_agree_at_one_degree() {
        for inst in polyhedral_instances() {
            let row = cone_check(&inst, &ConeSampling::default()).unwrap();
            assert!(row.agrees(), "{row:?}");
        }
    }

    #[test]
    fn interior_point_has_full_tangent_cone() {
        let inst = &polyhedral_instances()[2];
        let row = cone_check(inst, &ConeSampling::default()).unwrap();
        assert_eq!(row.tangent_probes, 360);
        assert_eq!(row.normal_probes, 0);
        assert!(row.active.is_empty());
    }

    #[test]
    fn point_outside_is_rejected() {
        let mut inst = polyhedral_instances()[0].clone();
        inst.point = vec![-1.0, 0.0];
        assert_eq!(cone_check(&inst, &ConeSampling::default()).unwrap_err(), Error::PointNotInSet);
    }
}
