//! Acceptance criteria, one pass/fail line each. Expected values come from
//! closed forms or from oracles written here, independent of the crate.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;
use std::process::{Command, ExitCode};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use setconv::demos::{
    cone_check, cubic_demo, intersection_pair, lcp_field, odd_even_sequence, penalty_demo, polyhedral_instances,
    sharpness_pair, sin_homotopy_map, ConeSampling,
};
use setconv::epi::{epi_distance_cloud, epi_distance_kenmochi, minima_bounds_report};
use setconv::geneq::{
    graph_distance, homotopy_solve, near_solution_check, smooth_plus, solve_cp_smoothed, subgradient_graph_1d,
    HomotopySchedule, SmoothingSchedule,
};
use setconv::limits::{inner_limit_estimate, outer_limit_estimate};
use setconv::newton::NewtonParams;
use setconv::vargeo::{
    optimality_residual, subdifferential_1d, ConvexPolyhedron, PiecewiseSmooth1D, SmoothPiece, Subdifferential,
};
use setconv::{truncated_hausdorff, GridSpec, NormSpec, ScalarField};

// Tolerances, as pinned by the criteria.
const SHARPNESS_H: f64 = 0.01;
const SHARPNESS_RHO: f64 = 2.0;
const SHARPNESS_TOL: f64 = 0.02;
const SHARPNESS_DELTA: f64 = 1.1;
const PAIRS: usize = 60;
const PAIRS_H: f64 = 0.01;
const PAIRS_RHO: f64 = 3.0;
const PAIRS_EPS: f64 = 0.05;
const PENALTY_THETAS: [f64; 4] = [1.0, 10.0, 100.0, 1e4];
const PENALTY_ARGMIN_TOL: f64 = 1e-6;
const PENALTY_INF_TOL: f64 = 1e-2;
const CUBIC_NAIVE_TOL: f64 = 0.05;
const CUBIC_SOFT_DL: f64 = 0.05;
const ENVELOPE_THETAS: [f64; 3] = [1.0, 10.0, 100.0];
const ENVELOPE_SAMPLES: usize = 10_000;
const SMOOTH_ZERO_TOL: f64 = 1e-7;
const LCP_TOL: f64 = 1e-4;
const LCP_THETAS: [f64; 5] = [1.0, 10.0, 100.0, 1e3, 1e4];
const HOMOTOPY_TOL: f64 = 1e-4;
const HOMOTOPY_RHO: f64 = 3.0;
const HOMOTOPY_LAMBDAS: [f64; 7] = [1.0, 0.5, 0.25, 0.1, 0.05, 0.01, 0.0];
const LIMITS_TOL: f64 = 0.03;
const CONE_DEG: f64 = 1.0;
const KKT_TOL: f64 = 1e-8;
const CONSISTENCY_NUS: [f64; 3] = [10.0, 100.0, 1000.0];
const CONSISTENCY_H: f64 = 0.001;
const CONSISTENCY_RHO: f64 = 2.0;

type Outcome = (bool, String);
type Check<'a> = Box<dyn Fn() -> Outcome + 'a>;

fn line(lo: f64, hi: f64, h: f64) -> GridSpec {
    GridSpec::line_with_spacing(lo, hi, h).unwrap()
}

fn bisect(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64) -> f64 {
    assert!(f(a) * f(b) <= 0.0);
    for _ in 0..200 {
        let m = 0.5 * (a + b);
        if f(a) * f(m) <= 0.0 {
            b = m;
        } else {
            a = m;
        }
    }
    0.5 * (a + b)
}

fn sharpness() -> Outcome {
    let (s, t) = sharpness_pair(SHARPNESS_H).unwrap();
    let gi = line(-3.0, 3.0, SHARPNESS_H);
    let go = line(-(SHARPNESS_RHO + 1.0), SHARPNESS_RHO + 1.0, SHARPNESS_H);
    let e = NormSpec::Euclidean;
    let dl = graph_distance(&s, &t, SHARPNESS_RHO, &gi, &go, &e, &e).unwrap();
    let r = near_solution_check(&s, &t, &[0.0], 0.0, SHARPNESS_DELTA, SHARPNESS_RHO, &gi, &go, &e, &e).unwrap();
    let pass = (dl - 1.0).abs() <= SHARPNESS_TOL && (r.excess - 1.0).abs() <= SHARPNESS_TOL && r.holds;
    (pass, format!("dl = {dl}, excess = {}, inequality holds = {}", r.excess, r.holds))
}

/// A random lsc piecewise quadratic on [-3, 3] with exact infimum there.
struct RandomPq {
    breakpoints: Vec<f64>,
    pieces: Vec<[f64; 3]>,
}

impl RandomPq {
    fn draw(rng: &mut ChaCha8Rng) -> Self {
        let k = rng.gen_range(0..=2);
        let mut breakpoints: Vec<f64> = (0..k).map(|_| rng.gen_range(-2.0..2.0)).collect();
        breakpoints.sort_by(f64::total_cmp);
        breakpoints.dedup();
        let pieces = (0..=breakpoints.len())
            .map(|_| [rng.gen_range(0.1..1.5), rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)])
            .collect();
        RandomPq { breakpoints, pieces }
    }

    fn perturbed(&self, rng: &mut ChaCha8Rng) -> Self {
        let pieces = self
            .pieces
            .iter()
            .map(|p| {
                [p[0] + rng.gen_range(-0.05..0.05), p[1] + rng.gen_range(-0.2..0.2), p[2] + rng.gen_range(-0.3..0.3)]
            })
            .collect();
        RandomPq { breakpoints: self.breakpoints.clone(), pieces }
    }

    fn field(&self) -> ScalarField {
        ScalarField::piecewise_quadratic(self.breakpoints.clone(), self.pieces.clone()).unwrap()
    }

    /// Infimum over [-3, 3]: each piece on its closed interval, which covers
    /// the lsc convention at breakpoints.
    fn inf(&self) -> f64 {
        let mut edges = vec![-3.0];
        edges.extend(self.breakpoints.iter().copied());
        edges.push(3.0);
        let q = |p: &[f64; 3], x: f64| p[0] * x * x + p[1] * x + p[2];
        let mut best = f64::INFINITY;
        for (k, p) in self.pieces.iter().enumerate() {
            let (a, b) = (edges[k], edges[k + 1]);
            let v = (-p[1] / (2.0 * p[0])).clamp(a, b);
            best = best.min(q(p, a)).min(q(p, b)).min(q(p, v));
        }
        best
    }
}

fn random_pairs() -> Vec<(RandomPq, RandomPq)> {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    (0..PAIRS)
        .map(|_| {
            let f = RandomPq::draw(&mut rng);
            let g = if rng.gen_bool(0.5) { f.perturbed(&mut rng) } else { RandomPq::draw(&mut rng) };
            (f, g)
        })
        .collect()
}

fn kenmochi_vs_cloud(pairs: &[(RandomPq, RandomPq)]) -> Outcome {
    let grid = line(-3.0, 3.0, PAIRS_H);
    let eta = PAIRS_H / 2.0;
    let e = NormSpec::Euclidean;
    let mut worst: f64 = 0.0;
    for (f, g) in pairs {
        let (f, g) = (f.field(), g.field());
        let k = epi_distance_kenmochi(&f, &g, &grid, PAIRS_RHO, &e, eta).unwrap();
        let c = epi_distance_cloud(&f, &g, &grid, PAIRS_RHO, &e).unwrap();
        worst = worst.max((k - c).abs());
    }
    let bound = 2.0 * PAIRS_H + eta;
    (worst <= bound, format!("{} pairs, max |kenmochi - cloud| = {worst} (bound {bound})", pairs.len()))
}

fn minima_bounds(pairs: &[(RandomPq, RandomPq)]) -> Outcome {
    let grid = line(-3.0, 3.0, PAIRS_H);
    let e = NormSpec::Euclidean;
    let (mut eligible, mut value_ok, mut argmin_ok) = (0, 0, 0);
    for (f, g) in pairs {
        let r = minima_bounds_report(&f.field(), &g.field(), &grid, PAIRS_RHO, PAIRS_EPS, None, &e).unwrap();
        if !r.hypotheses_hold() {
            continue;
        }
        eligible += 1;
        let exact_gap = (f.inf() - g.inf()).abs();
        if exact_gap <= r.dl + 2.0 * PAIRS_H && r.value_bound_holds {
            value_ok += 1;
        }
        let delta = PAIRS_EPS + 2.0 * r.dl + 3.0 * PAIRS_H;
        if r.argmin_bound_holds && r.delta == delta {
            argmin_ok += 1;
        }
    }
    let pass = eligible > 0 && value_ok == eligible && argmin_ok == eligible;
    (pass, format!("{eligible} pairs meet the hypotheses; value bound {value_ok}/{eligible}, argmin bound {argmin_ok}/{eligible}"))
}

fn golden(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64) -> f64 {
    let r = (5f64.sqrt() - 1.0) / 2.0;
    while b - a > 1e-12 {
        let (c, d) = (b - r * (b - a), a + r * (b - a));
        if f(c) < f(d) {
            b = d;
        } else {
            a = c;
        }
    }
    0.5 * (a + b)
}

fn penalty() -> Outcome {
    let r = penalty_demo(&PENALTY_THETAS, &line(-2.0, 2.0, 0.01), 2.0).unwrap();
    let mut worst: f64 = 0.0;
    for row in &r.rows {
        let theta = row.theta;
        let oracle = golden(|x| (x + 1.0) * (x + 1.0) + theta * x * x, -2.0, 1.0);
        let closed = -1.0 / (1.0 + theta);
        assert!((oracle - closed).abs() < 1e-8);
        worst = worst.max((row.argmin - closed).abs());
    }
    let dls: Vec<f64> = r.rows.iter().map(|row| row.dl).collect();
    let decreasing = dls.windows(2).all(|w| w[1] < w[0]);
    let inf_gap = (r.rows.last().unwrap().inf - 1.0).abs();
    let pass = worst <= PENALTY_ARGMIN_TOL && decreasing && inf_gap <= PENALTY_INF_TOL;
    (pass, format!("max argmin error {worst:e}, dl {dls:?}, |inf - 1| at 1e4 = {inf_gap:e}"))
}

fn cubic() -> Outcome {
    let r = cubic_demo(&[100.0, 1000.0, 1e4], &line(-3.0, 3.0, 0.01), 2.0).unwrap();
    let g = |x: f64| (x - 1.0) * (x - 1.0) * (x + 1.0);
    let root = bisect(|x| g(x) + 0.01, -2.0, -1.0);
    let naive = r.rows[0].naive_argmin;
    let soft: Vec<f64> = r.rows.iter().map(|row| row.soft_dl).collect();
    let soft_final = *soft.last().unwrap();
    let pass = (naive + 1.0).abs() <= CUBIC_NAIVE_TOL
        && (naive - root).abs() <= 1e-6
        && r.exact_argmin == 1.0
        && soft.windows(2).all(|w| w[1] < w[0])
        && soft_final <= CUBIC_SOFT_DL;
    (
        pass,
        format!(
            "naive argmin {naive} (root {root}), exact argmin {}, soft dl {soft:?} (final must be <= {CUBIC_SOFT_DL})",
            r.exact_argmin
        ),
    )
}

fn envelope() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut violations = 0;
    for theta in ENVELOPE_THETAS {
        let bound = std::f64::consts::LN_2 / theta;
        for k in 0..ENVELOPE_SAMPLES {
            let alpha = match k {
                0 => 0.0,
                1 => 1e300,
                2 => -1e300,
                _ => rng.gen_range(-50.0..50.0) * 10f64.powi(rng.gen_range(-6..=2)),
            };
            let d = smooth_plus(alpha, theta).unwrap() - alpha.max(0.0);
            if !(0.0..=bound).contains(&d) {
                violations += 1;
            }
        }
    }
    let at_zero = smooth_plus(0.0, 10.0).unwrap();
    let pass = violations == 0 && (at_zero - 0.0693147).abs() <= SMOOTH_ZERO_TOL;
    (
        pass,
        format!("{violations} envelope violations in {} samples, smooth_plus(0, 10) = {at_zero}", 3 * ENVELOPE_SAMPLES),
    )
}

/// Solves the 2-D LCP by trying every active set.
fn lcp_active_set(m: [[f64; 2]; 2], q: [f64; 2]) -> Vec<f64> {
    for mask in 0..4u8 {
        let free = [mask & 1 != 0, mask & 2 != 0];
        let x = match free {
            [false, false] => [0.0, 0.0],
            [true, false] => [-q[0] / m[0][0], 0.0],
            [false, true] => [0.0, -q[1] / m[1][1]],
            [true, true] => {
                let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
                [(-q[0] * m[1][1] + q[1] * m[0][1]) / det, (-q[1] * m[0][0] + q[0] * m[1][0]) / det]
            }
        };
        let w = [m[0][0] * x[0] + m[0][1] * x[1] + q[0], m[1][0] * x[0] + m[1][1] * x[1] + q[1]];
        if x.iter().all(|v| *v >= -1e-14) && w.iter().all(|v| *v >= -1e-14) {
            return x.to_vec();
        }
    }
    panic!("no active set solves the LCP");
}

fn complementarity() -> Outcome {
    let oracle = lcp_active_set([[2.0, 1.0], [1.0, 2.0]], [-1.0, -1.0]);
    let schedule = SmoothingSchedule::new(LCP_THETAS.to_vec()).unwrap();
    let sol = solve_cp_smoothed(&lcp_field(), &schedule, &[0.0, 0.0], &NewtonParams::default()).unwrap();
    let err = sol.x.iter().zip(&oracle).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    let bound = 10.0 * std::f64::consts::LN_2 / LCP_THETAS[LCP_THETAS.len() - 1];
    let pass = err <= LCP_TOL && sol.exact_residual <= bound;
    (
        pass,
        format!("oracle {oracle:?}, prj(z*) = {:?}, exact residual {:e} (bound {bound:e})", sol.x, sol.exact_residual),
    )
}

fn homotopy() -> Outcome {
    let oracle = bisect(|x| x + x.sin() + 1.0, -2.0, 0.0);
    let s = sin_homotopy_map();
    let schedule = HomotopySchedule::new(HOMOTOPY_LAMBDAS.to_vec()).unwrap();
    let sol = homotopy_solve(&s, &[0.0], &schedule, &NewtonParams::default()).unwrap();
    let grid = line(-HOMOTOPY_RHO, HOMOTOPY_RHO, 0.01);
    let window_max = grid
        .points()
        .iter()
        .filter(|x| x[0].abs() <= HOMOTOPY_RHO)
        .map(|x| (x[0] + x[0].sin() + 1.0).abs())
        .fold(0.0, f64::max);
    let e = NormSpec::Euclidean;
    let mut within = true;
    let mut dls = Vec::new();
    for lambda in HOMOTOPY_LAMBDAS {
        let d = graph_distance(&s.homotopy_member(lambda).unwrap(), &s, HOMOTOPY_RHO, &grid, &grid, &e, &e).unwrap();
        within &= d <= 1.05 * lambda * (HOMOTOPY_RHO + window_max);
        dls.push(d);
    }
    let vanishes = *dls.last().unwrap() == 0.0 && dls.windows(2).all(|w| w[1] <= w[0]);
    let pass = (sol.x[0] - oracle).abs() <= HOMOTOPY_TOL && within && vanishes;
    (pass, format!("x* = {} (bisection {oracle}), graph distances {dls:?}", sol.x[0]))
}

fn set_limits() -> Outcome {
    let probes = line(-1.0, 1.0, 0.01).points();
    let n = NormSpec::Euclidean;
    let seq = odd_even_sequence();
    let inner = inner_limit_estimate(&seq, 200, &probes, LIMITS_TOL, &n).unwrap();
    let outer = outer_limit_estimate(&seq, 200, &probes, LIMITS_TOL, &n).unwrap();
    let inner_ok = inner.candidate.iter().all(|p| p[0].abs() <= LIMITS_TOL);
    let covers = probes.iter().filter(|p| (0.0..=1.0).contains(&p[0])).all(|p| outer.candidate.iter().any(|q| q == p));
    let (c, d) = intersection_pair();
    let both = c.intersection_exact(&d).unwrap();
    let ob = outer_limit_estimate(&both, 200, &probes, LIMITS_TOL, &n).unwrap();
    let oc = outer_limit_estimate(&c, 200, &probes, LIMITS_TOL, &n).unwrap();
    let od = outer_limit_estimate(&d, 200, &probes, LIMITS_TOL, &n).unwrap();
    let meet = oc.candidate.intersect_exact(&od.candidate).unwrap();
    let meet_has_zero = meet.iter().any(|p| p[0] == 0.0);
    let pass = inner_ok && covers && ob.candidate.is_empty() && meet_has_zero;
    (
        pass,
        format!(
            "odd/even inner in tol band: {inner_ok}, outer covers [0, 1]: {covers}; outer of intersection has {} points, intersection of outers contains 0: {meet_has_zero}",
            ob.candidate.len()
        ),
    )
}

fn variational_geometry() -> Outcome {
    let square = PiecewiseSmooth1D::smooth(SmoothPiece::polynomial(vec![0.0, 0.0, 1.0]));
    let sq = subdifferential_1d(&square, 1.0).unwrap();
    let convex = subdifferential_1d(&PiecewiseSmooth1D::kink(0.0, 0.0, 0.5, 2.0).unwrap(), 0.0).unwrap();
    let concave = subdifferential_1d(&PiecewiseSmooth1D::kink(0.0, 0.0, -0.5, -4.0).unwrap(), 0.0).unwrap();
    let subdiff_ok = sq == Subdifferential::Interval { lo: 2.0, hi: 2.0 }
        && convex == Subdifferential::Interval { lo: 0.5, hi: 2.0 }
        && concave == Subdifferential::Points(vec![-4.0, -0.5]);

    let sampling = ConeSampling { agreement_deg: CONE_DEG, ..ConeSampling::default() };
    let instances = polyhedral_instances();
    let cones_ok = instances.iter().filter(|i| cone_check(i, &sampling).unwrap().agrees()).count();

    let cube = ConvexPolyhedron::cube(2, 0.0, 1.0).unwrap();
    let orthant = ConvexPolyhedron::orthant(2).unwrap();
    let quad = |a: f64, b: f64| {
        ScalarField::quadratic(vec![vec![2.0, 0.0], vec![0.0, 2.0]], vec![-2.0 * a, -2.0 * b], a * a + b * b).unwrap()
    };
    // Hand-checked KKT points: -grad f lies in the normal cone.
    let kkt = [
        optimality_residual(&quad(2.0, 2.0), &cube, &[1.0, 1.0]).unwrap(),
        optimality_residual(&quad(0.5, 0.5), &cube, &[0.5, 0.5]).unwrap(),
        optimality_residual(&quad(2.0, -1.0), &cube, &[1.0, 0.0]).unwrap(),
        optimality_residual(&ScalarField::affine(vec![1.0, 1.0], 0.0), &orthant, &[0.0, 0.0]).unwrap(),
    ];
    let non_kkt = optimality_residual(&quad(2.0, 2.0), &cube, &[0.0, 0.0]).unwrap();
    let kkt_ok = kkt.iter().all(|r| *r <= KKT_TOL) && non_kkt > 1.0;
    let pass = subdiff_ok && cones_ok == instances.len() && kkt_ok;
    (
        pass,
        format!(
            "subdifferentials {sq:?} {convex:?} {concave:?}; cones agree on {cones_ok}/{} instances; KKT residuals {kkt:?}",
            instances.len()
        ),
    )
}

fn subgradient_consistency() -> Outcome {
    let grid = line(-3.0, 3.0, CONSISTENCY_H);
    let abs = PiecewiseSmooth1D::scaled_abs(1.0).unwrap();
    let abs_graph = subgradient_graph_1d(&abs, &grid, &grid).unwrap();
    let gn = NormSpec::graph(1, NormSpec::Euclidean, 1, NormSpec::Euclidean);
    let mut pass = true;
    let mut rows = Vec::new();
    for nu in CONSISTENCY_NUS {
        let f = PiecewiseSmooth1D::scaled_abs(1.0 + 1.0 / nu).unwrap();
        let dl_epi =
            epi_distance_cloud(&f.to_field("f"), &abs.to_field("abs"), &grid, CONSISTENCY_RHO, &NormSpec::Euclidean)
                .unwrap();
        let g = subgradient_graph_1d(&f, &grid, &grid).unwrap();
        let dl_graph = truncated_hausdorff(&g, &abs_graph, CONSISTENCY_RHO, &gn, &[0.0, 0.0]).unwrap().value();
        let bound = 3.0 / nu + 2.0 * CONSISTENCY_H;
        pass &= dl_epi <= bound && dl_graph <= bound;
        rows.push(format!("nu {nu}: epi {dl_epi:.5}, graph {dl_graph:.5} (bound {bound})"));
    }
    (pass, rows.join("; "))
}

const DEMO_RUNS: [&[&str]; 11] = [
    &["dist", "--builtin", "sharpness-pair"],
    &["limits"],
    &["epi-dist"],
    &["epi-bounds"],
    &["penalty"],
    &["cubic"],
    &["soften"],
    &["kw-density", "--seed", "11"],
    &["cp"],
    &["homotopy"],
    &["cones"],
];

fn run_suite(dir: &Path) -> BTreeMap<String, Vec<u8>> {
    for args in DEMO_RUNS {
        let status = Command::new(env!("CARGO_BIN_EXE_setconv"))
            .args(args.iter())
            .arg("--out")
            .arg(dir)
            .status()
            .expect("run setconv");
        assert!(status.success(), "{args:?} failed");
    }
    fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|x| x == "csv"))
        .map(|p| (p.file_name().unwrap().to_string_lossy().into_owned(), fs::read(&p).unwrap()))
        .collect()
}

fn reproducibility() -> Outcome {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    let (ra, rb) = (run_suite(a.path()), run_suite(b.path()));
    let differing: Vec<&String> = ra.keys().filter(|k| ra.get(*k) != rb.get(*k)).collect();
    let pass = ra.len() >= DEMO_RUNS.len() && ra.keys().eq(rb.keys()) && differing.is_empty();
    (pass, format!("{} CSV files per run, differing: {differing:?}", ra.len()))
}

fn main() -> ExitCode {
    let pairs = random_pairs();
    let criteria: Vec<(&str, Check)> = vec![
        ("sharpness of the near-solution bound", Box::new(sharpness)),
        ("Kenmochi and cloud epi-distances agree", Box::new(|| kenmochi_vs_cloud(&pairs))),
        ("minima and near-minimizer bounds", Box::new(|| minima_bounds(&pairs))),
        ("penalty demo", Box::new(penalty)),
        ("cubic instability and softening", Box::new(cubic)),
        ("smoothing envelope", Box::new(envelope)),
        ("complementarity by smoothing", Box::new(complementarity)),
        ("homotopy continuation", Box::new(homotopy)),
        ("set-limit examples", Box::new(set_limits)),
        ("variational geometry", Box::new(variational_geometry)),
        ("subgradient and epigraph consistency", Box::new(subgradient_consistency)),
        ("reproducible reports", Box::new(reproducibility)),
    ];
    let mut failed = 0;
    for (k, (name, check)) in criteria.iter().enumerate() {
        let (pass, detail) = check();
        failed += usize::from(!pass);
        println!("criterion {:>2} {} {name}: {detail}", k + 1, if pass { "PASS" } else { "FAIL" });
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
