//! Point-to-set distance, excess and truncated Hausdorff distance.
//!
//! The brute-force double loops in [`reference`] define the results. The
//! default functions use a kd-tree and rayon for large clouds and return
//! the same `f64` values bit for bit: every candidate distance comes from
//! [`NormSpec::dist`], and `min`/`max` over exact values do not depend on the
//! evaluation order.

use std::sync::atomic::{AtomicU64, Ordering};

use rayon::prelude::*;
use serde::Serialize;

use crate::cloud::PointCloud;
use crate::error::{check_dim, Result};
use crate::extreal::ExtReal;
use crate::nn::{brute_force_distance, NearestIndex};
use crate::norm::NormSpec;

// Below this many point pairs the double loop is used directly.
const BRUTE_FORCE_PAIRS: usize = 1 << 14;

/// `dist(x, C) = min_{c in C} |x - c|`, `+inf` for empty `C`.
pub fn point_to_set_distance(x: &[f64], c: &PointCloud, norm: &NormSpec) -> Result<ExtReal> {
    if c.is_empty() {
        return Ok(ExtReal::INFINITY);
    }
    check_dim(c.dim(), x.len())?;
    Ok(ExtReal::from_oracle(brute_force_distance(x, c, norm)))
}

/// `exs(C; D)`: `sup_{c in C} dist(c, D)` if both are nonempty, `+inf` if only
/// `D` is empty, `0` if `C` is empty.
pub fn excess(c: &PointCloud, d: &PointCloud, norm: &NormSpec) -> Result<ExtReal> {
    if c.is_empty() {
        return Ok(ExtReal::ZERO);
    }
    if d.is_empty() {
        return Ok(ExtReal::INFINITY);
    }
    check_dim(c.dim(), d.dim())?;
    let value = if c.len().saturating_mul(d.len()) <= BRUTE_FORCE_PAIRS {
        reference::excess_value(c, d, norm)
    } else {
        accelerated_excess(c, d, norm)
    };
    Ok(ExtReal::from_oracle(value))
}

// Excess over nonempty clouds with a kd-tree on `d`. Queries that already
// found a point within the running maximum stop early: their distance cannot
// raise the maximum, and the points that do raise it are searched exhaustively.
fn accelerated_excess(c: &PointCloud, d: &PointCloud, norm: &NormSpec) -> f64 {
    let index = NearestIndex::build(d);
    // Distances are nonnegative, so their bit patterns order like the values.
    let best = AtomicU64::new(0.0f64.to_bits());
    (0..c.len()).into_par_iter().with_min_len(256).for_each(|i| {
        let current = f64::from_bits(best.load(Ordering::Relaxed));
        let dist = index.nearest_within(c.point(i), norm, current);
        if dist > current {
            best.fetch_max(dist.to_bits(), Ordering::Relaxed);
        }
    });
    f64::from_bits(best.into_inner())
}

/// `dl_rho(C, D) = max{exs(C ∩ B(center, rho); D), exs(D ∩ B(center, rho); C)}`.
pub fn truncated_hausdorff(
    c: &PointCloud,
    d: &PointCloud,
    rho: f64,
    norm: &NormSpec,
    center: &[f64],
) -> Result<ExtReal> {
    Ok(truncated_hausdorff_detail(c, d, rho, norm, center)?.value)
}

/// Truncated Hausdorff distance with its two one-sided parts.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct HausdorffDetail {
    pub value: ExtReal,
    /// `exs(C ∩ B; D)`.
    pub excess_cd: ExtReal,
    /// `exs(D ∩ B; C)`.
    pub excess_dc: ExtReal,
    pub truncated_c: usize,
    pub truncated_d: usize,
    /// Both truncations are empty, so the distance is `0` by convention and
    /// says nothing about the sets.
    pub both_truncations_empty: bool,
}

pub fn truncated_hausdorff_detail(
    c: &PointCloud,
    d: &PointCloud,
    rho: f64,
    norm: &NormSpec,
    center: &[f64],
) -> Result<HausdorffDetail> {
    if !c.is_empty() && !d.is_empty() {
        check_dim(c.dim(), d.dim())?;
    }
    check_rho(rho)?;
    let ct = c.truncate(rho, norm, center)?;
    let dt = d.truncate(rho, norm, center)?;
    let excess_cd = excess(&ct, d, norm)?;
    let excess_dc = excess(&dt, c, norm)?;
    Ok(HausdorffDetail {
        value: excess_cd.max(excess_dc),
        excess_cd,
        excess_dc,
        truncated_c: ct.len(),
        truncated_d: dt.len(),
        both_truncations_empty: ct.is_empty() && dt.is_empty(),
    })
}

pub(crate) fn check_rho(rho: f64) -> Result<()> {
    if rho >= 0.0 && rho.is_finite() {
        Ok(())
    } else {
        Err(crate::Error::invalid(format!("rho must be finite and >= 0, got {rho}")))
    }
}

/// Distances from each point of `queries` to `set`, in query order.
pub fn distances_to_set(queries: &PointCloud, set: &PointCloud, norm: &NormSpec) -> Result<Vec<f64>> {
    if set.is_empty() {
        return Ok(vec![f64::INFINITY; queries.len()]);
    }
    if queries.is_empty() {
        return Ok(Vec::new());
    }
    check_dim(set.dim(), queries.dim())?;
    if queries.len().saturating_mul(set.len()) <= BRUTE_FORCE_PAIRS {
        return Ok(queries.iter().map(|q| brute_force_distance(q, set, norm)).collect());
    }
    let index = NearestIndex::build(set);
    Ok((0..queries.len())
        .into_par_iter()
        .with_min_len(256)
        .map(|i| index.nearest_distance(queries.point(i), norm))
        .collect())
}

/// Plain double loops. These are the reference definitions.
pub mod reference {
    use super::*;

    pub(crate) fn excess_value(c: &PointCloud, d: &PointCloud, norm: &NormSpec) -> f64 {
        let mut worst: f64 = 0.0;
        for p in c.iter() {
            let mut best = f64::INFINITY;
            for q in d.iter() {
                let dist = norm.dist(p, q);
                if dist < best {
                    best = dist;
                }
            }
            if best > worst {
                worst = best;
            }
        }
        worst
    }

    pub fn excess(c: &PointCloud, d: &PointCloud, norm: &NormSpec) -> Result<ExtReal> {
        if c.is_empty() {
            return Ok(ExtReal::ZERO);
        }
        if d.is_empty() {
            return Ok(ExtReal::INFINITY);
        }
        check_dim(c.dim(), d.dim())?;
        Ok(ExtReal::from_oracle(excess_value(c, d, norm)))
    }

    pub fn truncated_hausdorff(
        c: &PointCloud,
        d: &PointCloud,
        rho: f64,
        norm: &NormSpec,
        center: &[f64],
    ) -> Result<ExtReal> {
        let inside = |p: &[f64]| norm.dist(p, center) <= rho;
        let ct = c.filter(inside);
        let dt = d.filter(inside);
        Ok(excess(&ct, d, norm)?.max(excess(&dt, c, norm)?))
    }
}
