//! Location-mixture maximum likelihood over nested center sets.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::cloud::PointCloud;
use crate::distance::excess;
use crate::error::{check_dim, Error, Result};
use crate::norm::NormSpec;
use crate::report::{fmt_f64, Table};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct KwParams {
    pub max_iter: usize,
    /// Stop when an accepted step lowers the objective by less than
    /// `tol (1 + |objective|)`.
    pub tol: f64,
}

impl Default for KwParams {
    fn default() -> Self {
        KwParams { max_iter: 20_000, tol: 1e-12 }
    }
}

const PRIMES: [u64; 10] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29];

fn radical_inverse(mut i: u64, base: u64) -> f64 {
    let inv = 1.0 / base as f64;
    let mut out = 0.0;
    let mut scale = inv;
    while i > 0 {
        out += (i % base) as f64 * scale;
        i /= base;
        scale *= inv;
    }
    out
}

/// The first `count` Halton points (indices `1..=count`) scaled to
/// `[lo, hi]^dim`. Prefixes are nested and the sequence is dense in the box;
/// the first center is the box midpoint.
pub fn kw_centers(count: usize, dim: usize, lo: f64, hi: f64) -> Result<PointCloud> {
    if count == 0 {
        return Err(Error::invalid("center count must be positive"));
    }
    if dim == 0 || dim > PRIMES.len() {
        return Err(Error::invalid(format!("center dimension must be in 1..={}", PRIMES.len())));
    }
    if !(lo < hi) || !lo.is_finite() || !hi.is_finite() {
        return Err(Error::invalid("center box needs finite lo < hi"));
    }
    let coords = (1..=count as u64)
        .flat_map(|i| PRIMES[..dim].iter().map(move |&b| lo + (hi - lo) * radical_inverse(i, b)))
        .collect();
    PointCloud::from_flat(dim, coords)
}

fn std_normal_density(d2: f64, dim: usize) -> f64 {
    (2.0 * std::f64::consts::PI).powf(-(dim as f64) / 2.0) * (-0.5 * d2).exp()
}

/// `phi[j][k] = phi(xi^j - z^k)`.
fn kernel(sample: &PointCloud, centers: &PointCloud) -> Vec<Vec<f64>> {
    let dim = sample.dim();
    sample
        .iter()
        .map(|x| {
            centers
                .iter()
                .map(|z| std_normal_density(x.iter().zip(z).map(|(a, b)| (a - b) * (a - b)).sum(), dim))
                .collect()
        })
        .collect()
}

fn objective(phi: &[Vec<f64>], mu: &[f64]) -> f64 {
    let n = phi.len() as f64;
    -phi.iter().map(|row| row.iter().zip(mu).map(|(a, b)| a * b).sum::<f64>().ln()).sum::<f64>() / n
}

/// Euclidean projection onto `{mu >= 0, sum mu = 1}`.
fn project_simplex(v: &[f64]) -> Vec<f64> {
    let mut u = v.to_vec();
    u.sort_by(|a, b| b.total_cmp(a));
    let mut cum = 0.0;
    let mut tau = 0.0;
    for (i, &ui) in u.iter().enumerate() {
        cum += ui;
        let t = (cum - 1.0) / (i + 1) as f64;
        if ui - t > 0.0 {
            tau = t;
        }
    }
    v.iter().map(|x| (x - tau).max(0.0)).collect()
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct KwFit {
    pub weights: Vec<f64>,
    pub objective: f64,
    pub iterations: usize,
    pub converged: bool,
    /// Objective after every accepted iteration, starting from uniform weights.
    pub history: Vec<f64>,
}

/// Minimizes `-(1/n) sum_j ln(sum_k mu_k phi(xi^j - z^k))` over the simplex
/// by projected gradient with step halving, so the objective never increases.
pub fn kw_solve(sample: &PointCloud, centers: &PointCloud, params: &KwParams) -> Result<KwFit> {
    if sample.is_empty() {
        return Err(Error::invalid("sample is empty"));
    }
    check_dim(sample.dim(), centers.dim())?;
    if centers.is_empty() {
        return Err(Error::invalid("no centers"));
    }
    if !(params.tol > 0.0) {
        return Err(Error::invalid("tolerance must be positive"));
    }
    let phi = kernel(sample, centers);
    let nu = centers.len();
    let n = phi.len() as f64;
    let mut mu = vec![1.0 / nu as f64; nu];
    let mut obj = objective(&phi, &mu);
    if !obj.is_finite() {
        return Err(Error::NonFinite("mixture density vanishes at a sample point; widen the center box".into()));
    }
    let mut history = vec![obj];
    let mut step = 1.0;
    let mut converged = false;
    let mut iterations = 0;
    while iterations < params.max_iter {
        let p: Vec<f64> = phi.iter().map(|row| row.iter().zip(&mu).map(|(a, b)| a * b).sum()).collect();
        let grad: Vec<f64> =
            (0..nu).map(|k| -phi.iter().zip(&p).map(|(row, pj)| row[k] / pj).sum::<f64>() / n).collect();
        let mut accepted = None;
        for _ in 0..60 {
            let trial = project_simplex(&mu.iter().zip(&grad).map(|(m, g)| m - step * g).collect::<Vec<_>>());
            let v = objective(&phi, &trial);
            if v <= obj {
                accepted = Some((trial, v));
                break;
            }
            step *= 0.5;
        }
        iterations += 1;
        let Some((trial, v)) = accepted else {
            converged = true;
            break;
        };
        let decrease = obj - v;
        mu = trial;
        obj = v;
        history.push(obj);
        step *= 2.0;
        if decrease <= params.tol * (1.0 + obj.abs()) {
            converged = true;
            break;
        }
    }
    Ok(KwFit { weights: mu, objective: obj, iterations, converged, history })
}

/// `n` draws from `0.5 N(-2, 1) + 0.5 N(2, 1)`.
pub fn synthetic_sample(n: usize, seed: u64) -> Result<PointCloud> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let normal = Normal::new(0.0, 1.0).expect("unit normal");
    let pts: Vec<f64> = (0..n).map(|i| if i % 2 == 0 { -2.0 } else { 2.0 } + normal.sample(&mut rng)).collect();
    PointCloud::from_scalars(&pts)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct KwRow {
    pub nu: usize,
    pub objective: f64,
    pub iterations: usize,
    pub converged: bool,
    pub top_center: Vec<f64>,
    pub top_weight: f64,
    /// `exs(V^{2 nu}; V^nu)` for the kernel vectors
    /// `V^nu = {(phi(xi^j - z^k))_j | k <= nu}`, an upper bound on the
    /// excess of the convex hulls.
    pub vertex_excess: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct KwReport {
    pub rows: Vec<KwRow>,
    /// Objective nonincreasing along an increasing schedule.
    pub objective_nonincreasing: bool,
}

impl KwReport {
    pub fn to_table(&self) -> Table {
        let dim = self.rows.first().map_or(0, |r| r.top_center.len());
        let mut header = vec!["nu".to_string(), "objective".into(), "iterations".into(), "converged".into()];
        header.extend((0..dim).map(|i| format!("top_center{i}")));
        header.extend(["top_weight".to_string(), "vertex_excess".into()]);
        let mut t = Table::new(header);
        for r in &self.rows {
            let mut cells =
                vec![r.nu.to_string(), fmt_f64(r.objective), r.iterations.to_string(), r.converged.to_string()];
            cells.extend(r.top_center.iter().map(|v| fmt_f64(*v)));
            cells.extend([fmt_f64(r.top_weight), fmt_f64(r.vertex_excess)]);
            t.push(cells);
        }
        t
    }
}

/// Solves the mixture problem for every center count in `counts`
/// (strictly increasing) with centers from [`kw_centers`] on `[lo, hi]^dim`.
pub fn kw_density_demo(sample: &PointCloud, counts: &[usize], lo: f64, hi: f64, params: &KwParams) -> Result<KwReport> {
    if counts.is_empty() || counts.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(Error::invalid("center counts must be nonempty and strictly increasing"));
    }
    let dim = sample.dim();
    let vertices = |c: &PointCloud| -> Result<PointCloud> {
        let phi = kernel(sample, c);
        let cols: Vec<Vec<f64>> = (0..c.len()).map(|k| phi.iter().map(|row| row[k]).collect()).collect();
        PointCloud::new(sample.len(), cols)
    };
    let mut rows = Vec::with_capacity(counts.len());
    for &nu in counts {
        let centers = kw_centers(nu, dim, lo, hi)?;
        let fit = kw_solve(sample, &centers, params)?;
        let (k, &w) = fit.weights.iter().enumerate().max_by(|a, b| a.1.total_cmp(b.1)).expect("nonempty weights");
        let wider = kw_centers(2 * nu, dim, lo, hi)?;
        let vertex_excess = excess(&vertices(&wider)?, &vertices(&centers)?, &NormSpec::Euclidean)?.value();
        rows.push(KwRow {
            nu,
            objective: fit.objective,
            iterations: fit.iterations,
            converged: fit.converged,
            top_center: centers.point(k).to_vec(),
            top_weight: w,
            vertex_excess,
        });
    }
    let objective_nonincreasing = rows.windows(2).all(|w| w[1].objective <= w[0].objective + 1e-12);
    Ok(KwReport { rows, objective_nonincreasing })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn scalars(v: &[f64]) -> PointCloud {
        PointCloud::from_scalars(v).unwrap()
    }

    #[test]
    fn centers_are_nested_and_start_at_the_midpoint() {
        let a = kw_centers(5, 1, -3.0, 3.0).unwrap();
        let b = kw_centers(40, 1, -3.0, 3.0).unwrap();
        assert_eq!(a.point(0), &[0.0]);
        assert!(a.iter().zip(b.iter()).all(|(p, q)| p == q));
        let c = kw_centers(8, 2, 0.0, 1.0).unwrap();
        assert_eq!(c.point(0), &[0.5, 1.0 / 3.0]);
        assert!(kw_centers(0, 1, 0.0, 1.0).is_err());
    }

    #[test]
    fn simplex_projection() {
        let p = project_simplex(&[0.5, 0.5, 0.5]);
        assert!(p.iter().all(|v| (v - 1.0 / 3.0).abs() < 1e-15));
        assert_eq!(project_simplex(&[2.0, 0.0]), vec![1.0, 0.0]);
        let q = project_simplex(&[0.3, -0.2, 0.1]);
        assert!((q.iter().sum::<f64>() - 1.0).abs() < 1e-15 && q.iter().all(|v| *v >= 0.0));
    }

    #[test]
    fn single_center_objective() {
        let s = scalars(&[-1.0, 0.0, 1.0]);
        let c = scalars(&[0.5]);
        let fit = kw_solve(&s, &c, &KwParams::default()).unwrap();
        let expect = -[-1.5f64, -0.5, 0.5]
            .iter()
            .map(|d| ((-0.5 * d * d).exp() / (2.0 * std::f64::consts::PI).sqrt()).ln())
            .sum::<f64>()
            / 3.0;
        assert!((fit.objective - expect).abs() < 1e-14);
    }

    #[test]
    fn one_point_sample_concentrates() {
        let s = scalars(&[0.0]);
        let fit = kw_solve(&s, &kw_centers(9, 1, -3.0, 3.0).unwrap(), &KwParams::default()).unwrap();
        let ln_sqrt_2pi = 0.5 * (2.0 * std::f64::consts::PI).ln();
        assert!((fit.objective - ln_sqrt_2pi).abs() < 1e-8, "{}", fit.objective);
        assert!(fit.weights[0] > 1.0 - 1e-6);
    }

    #[test]
    fn monotone_history_and_nested_objectives() {
        let s = scalars(&[-1.0, 0.0, 1.0]);
        let r = kw_density_demo(&s, &[5, 40], -3.0, 3.0, &KwParams::default()).unwrap();
        assert!(r.objective_nonincreasing);
        assert!(r.rows[1].vertex_excess < r.rows[0].vertex_excess);
        let fit = kw_solve(&s, &kw_centers(5, 1, -3.0, 3.0).unwrap(), &KwParams::default()).unwrap();
        assert!(fit.history.windows(2).all(|w| w[1] <= w[0]));
    }

    #[test]
    fn vanishing_density_is_reported() {
        let s = scalars(&[1e3]);
        let err = kw_solve(&s, &kw_centers(3, 1, -1.0, 1.0).unwrap(), &KwParams::default()).unwrap_err();
        assert!(err.is_numerical());
    }

    #[test]
    fn synthetic_sample_is_reproducible() {
        assert_eq!(synthetic_sample(20, 7).unwrap(), synthetic_sample(20, 7).unwrap());
        assert_ne!(synthetic_sample(20, 7).unwrap(), synthetic_sample(20, 8).unwrap());
    }
}
