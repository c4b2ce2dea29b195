use std::path::Path;

use setconv::demos::{
    cone_check, cone_table, cubic_demo, intersection_pair, kw_density_demo, mapping, odd_even_sequence, penalty_demo,
    polyhedral_instances, sharpness_pair, shrinking_sequence, soften_demo, synthetic_sample, ConeInstance,
    ConeSampling, KwParams, SEQUENCE_NAMES,
};
use setconv::distance::truncated_hausdorff_detail;
use setconv::epi::{epi_distance_cloud_detail, epi_distance_kenmochi, log_log_slope, minima_bounds_report};
use setconv::field::{builtin, field_from_json};
use setconv::geneq::{
    graph_distance, homotopy_solve, normal_map, normal_map_residual, solve_cp_smoothed, trace_table, HomotopySchedule,
    SmoothingSchedule,
};
use setconv::limits::{inner_limit_estimate, outer_limit_estimate, LimitEstimate};
use setconv::newton::NewtonParams;
use setconv::report::{fmt_f64, Table};
use setconv::{point_to_set_distance, Axis, GridSpec, NormSpec, PointCloud, ScalarField};

use crate::args::{
    ConesArgs, CpArgs, DistArgs, EpiBoundsArgs, EpiDistArgs, HomotopyArgs, KwArgs, LimitsArgs, SoftenArgs,
};
use crate::context::{join, read_file, Context};
use crate::error::CliError;
use crate::output::Report;
use crate::svg::Chart;

type Out = Result<Report, CliError>;

fn parse_cloud(path: &Path) -> Result<PointCloud, CliError> {
    serde_json::from_str(&read_file(path)?).map_err(|e| CliError::Usage(format!("point cloud {}: {e}", path.display())))
}

/// A JSON file, inline JSON, or `name[:param]` of a built-in.
fn parse_function(spec: &str) -> Result<ScalarField, CliError> {
    let trimmed = spec.trim_start();
    if trimmed.starts_with('{') {
        return Ok(field_from_json(trimmed)?);
    }
    let path = Path::new(spec);
    if path.is_file() {
        return Ok(field_from_json(&read_file(path)?)?);
    }
    let (name, param) = match spec.split_once(':') {
        Some((n, p)) => {
            let v: f64 = p.parse().map_err(|_| CliError::Usage(format!("bad parameter {p:?} in {spec:?}")))?;
            (n, Some(v))
        }
        None => (spec, None),
    };
    Ok(builtin(name, param)?)
}

fn flag(b: bool) -> &'static str {
    if b {
        "true"
    } else {
        "false"
    }
}

pub fn dist(ctx: &mut Context, args: &DistArgs) -> Out {
    let rho = ctx.rho(2.0)?;
    let rhos = ctx.schedule(&[rho]);
    let (a, b, norm) = match (&args.builtin, args.files.as_slice()) {
        (Some(name), _) if name == "sharpness-pair" => {
            let grid = ctx.grid(&["-3:3:600"])?;
            let h = grid.spacing();
            let top = rhos.iter().copied().fold(rho, f64::max) + 1.0;
            let out = GridSpec::new(vec![Axis::with_spacing(-top, top, h)?])?;
            ctx.record("output_grid", out.axes()[0]);
            let (s, t) = sharpness_pair(h)?;
            let norm = NormSpec::graph(1, ctx.norm.clone(), 1, ctx.norm.clone());
            (s.graph(&grid, &out)?, t.graph(&grid, &out)?, norm)
        }
        (Some(other), _) => {
            return Err(CliError::Usage(format!("unknown built-in pair {other:?}; expected sharpness-pair")))
        }
        (None, [fa, fb]) => {
            ctx.record("a", fa.display());
            ctx.record("b", fb.display());
            (parse_cloud(fa)?, parse_cloud(fb)?, ctx.norm.clone())
        }
        (None, _) => return Err(CliError::Usage("dist needs two point cloud files or --builtin".into())),
    };
    let dim = if a.is_empty() { b.dim() } else { a.dim() };
    if !a.is_empty() && !b.is_empty() && a.dim() != b.dim() {
        return Err(CliError::Usage(format!("clouds have dimensions {} and {}", a.dim(), b.dim())));
    }
    norm.validate(dim)?;
    let center = args.center.clone().unwrap_or_else(|| vec![0.0; dim]);
    if center.len() != dim {
        return Err(CliError::Usage(format!("center has {} coordinates, clouds have {dim}", center.len())));
    }
    ctx.record("center", join(&center));
    let mut t = Table::new([
        "rho",
        "dist_center_a",
        "dist_center_b",
        "excess_ab",
        "excess_ba",
        "dl",
        "truncated_a",
        "truncated_b",
        "both_truncations_empty",
    ]);
    for &r in &rhos {
        let d = truncated_hausdorff_detail(&a, &b, r, &norm, &center)?;
        t.push([
            fmt_f64(r),
            point_to_set_distance(&center, &a, &norm)?.to_string(),
            point_to_set_distance(&center, &b, &norm)?.to_string(),
            d.excess_cd.to_string(),
            d.excess_dc.to_string(),
            d.value.to_string(),
            d.truncated_c.to_string(),
            d.truncated_d.to_string(),
            flag(d.both_truncations_empty).into(),
        ]);
    }
    let mut report = Report::table(t);
    report.note("points_a", a.len());
    report.note("points_b", b.len());
    Ok(report)
}

fn contains(c: &LimitEstimate, p: &[f64]) -> bool {
    c.candidate.iter().any(|q| q == p)
}

pub fn limits(ctx: &mut Context, args: &LimitsArgs) -> Out {
    let probes = ctx.grid(&["-1:1:200"])?;
    if probes.dim() != 1 {
        return Err(CliError::Usage("the built-in sequences live on the line; give one grid axis".into()));
    }
    let nu_max = *ctx.counts(&[200])?.last().expect("nonempty");
    let tol = ctx.tolerance(0.03)?;
    ctx.record("sequence", &args.sequence);
    let pts = probes.points();
    let norm = ctx.norm.clone();
    let mut report = match args.sequence.as_str() {
        "odd-even" | "shrinking" => {
            let seq = if args.sequence == "odd-even" { odd_even_sequence() } else { shrinking_sequence() };
            let inner = inner_limit_estimate(&seq, nu_max, &pts, tol, &norm)?;
            let outer = outer_limit_estimate(&seq, nu_max, &pts, tol, &norm)?;
            let mut t = Table::new(["x", "inner", "outer"]);
            for p in pts.iter() {
                t.push([fmt_f64(p[0]), flag(contains(&inner, p)).into(), flag(contains(&outer, p)).into()]);
            }
            let mut r = Report::table(t);
            r.note("tail", format!("{}..={}", inner.tail_start, inner.tail_end));
            r.note("inner_count", inner.candidate.len());
            r.note("outer_count", outer.candidate.len());
            r
        }
        "intersection" => {
            let (c, d) = intersection_pair();
            let both = c.intersection_exact(&d)?;
            let oc = outer_limit_estimate(&c, nu_max, &pts, tol, &norm)?;
            let od = outer_limit_estimate(&d, nu_max, &pts, tol, &norm)?;
            let ob = outer_limit_estimate(&both, nu_max, &pts, tol, &norm)?;
            let mut t = Table::new(["x", "outer_c", "outer_d", "outer_c_and_d", "outer_of_intersection"]);
            for p in pts.iter() {
                let (a, b) = (contains(&oc, p), contains(&od, p));
                t.push([
                    fmt_f64(p[0]),
                    flag(a).into(),
                    flag(b).into(),
                    flag(a && b).into(),
                    flag(contains(&ob, p)).into(),
                ]);
            }
            let mut r = Report::table(t);
            r.note("outer_of_intersection_count", ob.candidate.len());
            r.note("intersection_of_outers_count", oc.candidate.intersect_exact(&od.candidate)?.len());
            r
        }
        other => {
            return Err(CliError::Usage(format!(
                "unknown sequence {other:?}; expected one of {}",
                SEQUENCE_NAMES.join(", ")
            )))
        }
    };
    report.note("nu_max", nu_max);
    Ok(report)
}

pub fn epi_dist(ctx: &mut Context, args: &EpiDistArgs) -> Out {
    let rho = ctx.rho(2.0)?;
    let rhos = ctx.schedule(&[rho]);
    let grid = ctx.grid(&["-3:3:600"])?;
    let f = parse_function(&args.pair.f)?;
    let g = parse_function(&args.pair.g)?;
    ctx.record("f", f.label());
    ctx.record("g", g.label());
    let eta = ctx.tolerance(grid.spacing() / 2.0)?;
    let mut t = Table::new(["rho", "dl", "excess_fg", "excess_gf", "dl_kenmochi"]);
    for &r in &rhos {
        let d = epi_distance_cloud_detail(&f, &g, &grid, r, &ctx.norm)?;
        let k = if grid.dim() == 1 {
            fmt_f64(epi_distance_kenmochi(&f, &g, &grid, r, &ctx.norm, eta)?)
        } else {
            String::new()
        };
        t.push([fmt_f64(r), fmt_f64(d.value), fmt_f64(d.excess_fg), fmt_f64(d.excess_gf), k]);
    }
    Ok(Report::table(t))
}

pub fn epi_bounds(ctx: &mut Context, args: &EpiBoundsArgs) -> Out {
    let rho = ctx.rho(2.0)?;
    let grid = ctx.grid(&["-3:3:600"])?;
    let f = parse_function(&args.pair.f)?;
    let g = parse_function(&args.pair.g)?;
    ctx.record("f", f.label());
    ctx.record("g", g.label());
    let r = minima_bounds_report(&f, &g, &grid, rho, args.epsilon, args.delta, &ctx.norm)?;
    let mut t = Table::new(["quantity", "value"]);
    let rows: [(&str, String); 13] = [
        ("inf_f", fmt_f64(r.inf_f)),
        ("inf_g", fmt_f64(r.inf_g)),
        ("dl", fmt_f64(r.dl)),
        ("gap", fmt_f64(r.gap)),
        ("slack", fmt_f64(r.slack)),
        ("value_bound_holds", flag(r.value_bound_holds).into()),
        ("epsilon", fmt_f64(r.epsilon)),
        ("delta", fmt_f64(r.delta)),
        ("argmin_excess", fmt_f64(r.argmin_excess)),
        ("argmin_bound_holds", flag(r.argmin_bound_holds).into()),
        ("hypothesis_values", flag(r.hypothesis_values).into()),
        ("hypothesis_argmins", flag(r.hypothesis_argmins).into()),
        ("hypotheses_hold", flag(r.hypotheses_hold()).into()),
    ];
    for (k, v) in rows {
        t.push([k.to_string(), v]);
    }
    Ok(Report::table(t))
}

/// Log-log slope of a distance series, or "none" when it cannot be fitted.
fn slope(series: impl Iterator<Item = (f64, f64)>) -> String {
    log_log_slope(&series.collect::<Vec<_>>()).map_or_else(|| "none".to_string(), fmt_f64)
}

pub fn penalty(ctx: &mut Context) -> Out {
    let rho = ctx.rho(2.0)?;
    let grid = ctx.grid(&["-2:2:400"])?;
    let thetas = ctx.schedule(&[1.0, 10.0, 100.0, 1e4]);
    let r = penalty_demo(&thetas, &grid, rho)?;
    let mut report = Report::table(r.to_table());
    report.note("dl_decreasing", r.dl_decreasing);
    report.note("argmin_decreasing", r.argmin_decreasing);
    report.note("final_inf_gap", r.final_inf_gap);
    report.note("dl_slope", slope(r.rows.iter().map(|row| (row.theta, row.dl))));
    report.chart = Some(
        Chart::new("penalty: epigraph distance", "theta", "dl", true)
            .series("dl", r.rows.iter().map(|row| (row.theta, row.dl)).collect())
            .series("|argmin|", r.rows.iter().map(|row| (row.theta, row.argmin.abs())).collect()),
    );
    Ok(report)
}

pub fn cubic(ctx: &mut Context) -> Out {
    let rho = ctx.rho(2.0)?;
    let grid = ctx.grid(&["-3:3:600"])?;
    let nus = ctx.schedule(&[10.0, 100.0, 1000.0, 1e4]);
    let r = cubic_demo(&nus, &grid, rho)?;
    let mut report = Report::table(r.to_table());
    report.note("exact_argmin", r.exact_argmin);
    report.note("naive_dl_slope", slope(r.rows.iter().map(|row| (row.nu, row.naive_dl))));
    report.note("soft_dl_slope", slope(r.rows.iter().map(|row| (row.nu, row.soft_dl))));
    report.chart = Some(
        Chart::new("cubic constraint: epigraph distances", "nu", "dl", true)
            .series("naive", r.rows.iter().map(|row| (row.nu, row.naive_dl)).collect())
            .series("soft", r.rows.iter().map(|row| (row.nu, row.soft_dl)).collect()),
    );
    Ok(report)
}

pub fn soften(ctx: &mut Context, args: &SoftenArgs) -> Out {
    let rho = ctx.rho(2.0)?;
    let grid = ctx.grid(&["-2:2:200", "-0.05:0.25:300"])?;
    let nus = ctx.schedule(&[10.0, 100.0, 1000.0, 1e4]);
    ctx.record("theta_power", args.theta_power);
    ctx.record("alpha_power", args.alpha_power);
    let r = soften_demo(&nus, &grid, rho, args.theta_power, args.alpha_power)?;
    let mut report = Report::table(r.to_table());
    report.chart = Some(
        Chart::new("softened cubic: epigraph distance", "nu", "dl", true)
            .series("dl", r.rows.iter().map(|row| (row.nu, row.dl)).collect()),
    );
    Ok(report)
}

fn parse_sample(path: &Path) -> Result<PointCloud, CliError> {
    let text = read_file(path)?;
    if let Ok(values) = serde_json::from_str::<Vec<f64>>(&text) {
        return Ok(PointCloud::from_scalars(&values)?);
    }
    parse_cloud(path)
}

pub fn kw_density(ctx: &mut Context, args: &KwArgs) -> Out {
    let grid = ctx.grid(&["-6:6:12"])?;
    let counts = ctx.counts(&[5, 10, 20, 40, 80])?;
    let tol = ctx.tolerance(1e-12)?;
    let sample = match &args.sample {
        Some(p) => {
            ctx.record("sample", p.display());
            parse_sample(p)?
        }
        None => {
            ctx.record("sample", format!("synthetic n={}", args.samples));
            synthetic_sample(args.samples, ctx.seed)?
        }
    };
    let axis = grid.axes()[0];
    let (lo, hi) = (axis.point(0), axis.point(axis.len() - 1));
    ctx.record("center_box", format!("[{lo}, {hi}]^{}", sample.dim()));
    let params = KwParams { tol, ..KwParams::default() };
    let r = kw_density_demo(&sample, &counts, lo, hi, &params)?;
    let mut report = Report::table(r.to_table());
    report.note("objective_nonincreasing", r.objective_nonincreasing);
    report.chart = Some(
        Chart::new("location mixture", "centers", "value", true)
            .series("objective", r.rows.iter().map(|row| (row.nu as f64, row.objective)).collect())
            .series("vertex excess", r.rows.iter().map(|row| (row.nu as f64, row.vertex_excess)).collect()),
    );
    Ok(report)
}

pub fn cp(ctx: &mut Context, args: &CpArgs) -> Out {
    let field = mapping(&args.mapping)?
        .as_field()
        .cloned()
        .ok_or_else(|| CliError::Usage(format!("{} is not single-valued", args.mapping)))?;
    if !matches!(args.mapping.as_str(), "lcp" | "lcp-1d") {
        return Err(CliError::Usage(format!("cp needs lcp or lcp-1d, got {:?}", args.mapping)));
    }
    let n = field.in_dim();
    ctx.record("mapping", &args.mapping);
    let rho = ctx.rho(2.0)?;
    let grid = if n == 2 { ctx.grid(&["-1:1:40", "-1:1:40"])? } else { ctx.grid(&["-2:2:400"])? };
    if grid.dim() != n {
        return Err(CliError::Usage(format!("grid has {} axes, the mapping needs {n}", grid.dim())));
    }
    let thetas = ctx.schedule(&[1.0, 10.0, 100.0, 1000.0, 1e4]);
    let tol = ctx.tolerance(1e-10)?;
    let z0 = args.z0.clone().unwrap_or_else(|| vec![0.0; n]);
    if z0.len() != n {
        return Err(CliError::Usage(format!("z0 has {} coordinates, the mapping needs {n}", z0.len())));
    }
    ctx.record("z0", join(&z0));
    let schedule = SmoothingSchedule::new(thetas.clone())?;
    let params = NewtonParams { tol, ..NewtonParams::default() };
    let sol = solve_cp_smoothed(&field, &schedule, &z0, &params)?;
    let exact = normal_map(&field, None)?;
    let mut t = trace_table(&sol.stages, "theta");
    let mut gd = Vec::with_capacity(thetas.len());
    for &theta in &thetas {
        let d = graph_distance(&normal_map(&field, Some(theta))?, &exact, rho, &grid, &grid, &ctx.norm, &ctx.norm)?;
        gd.push(d);
    }
    let mut with_gd = Table::new(t.header().iter().cloned().chain(["graph_dl".to_string()]));
    for (row, d) in t.rows().iter().zip(&gd) {
        with_gd.push(row.iter().cloned().chain([fmt_f64(*d)]));
    }
    t = with_gd;
    let theta_final = *thetas.last().expect("nonempty");
    let bound = 10.0 * std::f64::consts::LN_2 / theta_final;
    let mut coords = Table::new(["i", "z", "x", "residual"]);
    let res = normal_map_residual(&field, &sol.z)?;
    for (i, ((z, x), r)) in sol.z.iter().zip(&sol.x).zip(&res).enumerate() {
        coords.push([i.to_string(), fmt_f64(*z), fmt_f64(*x), fmt_f64(*r)]);
    }
    let mut report = Report::table(t).with("solution", coords);
    report.note("z", join(&sol.z));
    report.note("x", join(&sol.x));
    report.note("exact_residual", sol.exact_residual);
    report.note("residual_constant", sol.residual_constant);
    report.note("residual_bound", bound);
    report.note("residual_within_bound", sol.exact_residual <= bound);
    report.chart = Some(
        Chart::new("smoothed complementarity", "theta", "value", true)
            .series("target residual", sol.stages.iter().map(|s| (s.parameter, s.target_residual)).collect())
            .series("graph distance", thetas.iter().copied().zip(gd.iter().copied()).collect()),
    );
    Ok(report)
}

pub fn homotopy(ctx: &mut Context, args: &HomotopyArgs) -> Out {
    let s = mapping(&args.mapping)?;
    let n = s.in_dim();
    if !s.is_single_valued() || s.out_dim() != n {
        return Err(CliError::Usage(format!("homotopy needs a single-valued map R^n -> R^n, got {}", args.mapping)));
    }
    ctx.record("mapping", &args.mapping);
    let rho = ctx.rho(3.0)?;
    let default_axis = "-3:3:600";
    let grid = ctx.grid(&vec![default_axis; n])?;
    if grid.dim() != n {
        return Err(CliError::Usage(format!("grid has {} axes, the mapping needs {n}", grid.dim())));
    }
    let lambdas = ctx.schedule(&[1.0, 0.5, 0.25, 0.1, 0.05, 0.01, 0.0]);
    let tol = ctx.tolerance(1e-10)?;
    let target = args.target.clone().unwrap_or_else(|| vec![0.0; n]);
    ctx.record("target", join(&target));
    let schedule = HomotopySchedule::new(lambdas.clone())?;
    let params = NewtonParams { tol, ..NewtonParams::default() };
    let sol = homotopy_solve(&s, &target, &schedule, &params)?;
    let f = s.as_field().expect("single-valued");
    let origin = vec![0.0; n];
    let window_max = grid
        .points()
        .iter()
        .filter(|x| ctx.norm.dist(x, &origin) <= rho)
        .map(|x| ctx.norm.dist(&f.eval(x), &origin))
        .fold(0.0, f64::max);
    let mut t = Table::new(
        trace_table(&sol.stages, "lambda").header().iter().cloned().chain(["graph_dl".into(), "bound".into()]),
    );
    let mut gd = Vec::with_capacity(lambdas.len());
    for (row, &lambda) in trace_table(&sol.stages, "lambda").rows().iter().zip(&lambdas) {
        let d = graph_distance(&s.homotopy_member(lambda)?, &s, rho, &grid, &grid, &ctx.norm, &ctx.norm)?;
        gd.push(d);
        let bound = 1.05 * lambda * (rho + window_max);
        t.push(row.iter().cloned().chain([fmt_f64(d), fmt_f64(bound)]));
    }
    let mut report = Report::table(t);
    report.note("x", join(&sol.x));
    report.note("residual", sol.residual);
    report.note("max_window_value", window_max);
    report.chart = Some(
        Chart::new("homotopy: graph distance to S", "lambda", "graph distance", false)
            .series("dl", lambdas.iter().copied().zip(gd).collect()),
    );
    Ok(report)
}

pub fn cones(ctx: &mut Context, args: &ConesArgs) -> Out {
    let instances: Vec<ConeInstance> = match &args.instances {
        Some(p) => {
            ctx.record("instances", p.display());
            serde_json::from_str(&read_file(p)?)
                .map_err(|e| CliError::Usage(format!("cone instances {}: {e}", p.display())))?
        }
        None => {
            ctx.record("instances", "built-in");
            polyhedral_instances()
        }
    };
    let defaults = ConeSampling::default();
    let nus = ctx.counts(&defaults.nus)?;
    let tol = ctx.tolerance(defaults.tol)?;
    let sampling = ConeSampling { nus, tol, ..defaults };
    ctx.record("probe_step_deg", sampling.probe_step_deg);
    ctx.record("spacing", sampling.spacing);
    ctx.record("agreement_deg", sampling.agreement_deg);
    let rows = instances.iter().map(|i| cone_check(i, &sampling)).collect::<Result<Vec<_>, _>>()?;
    let mut report = Report::table(cone_table(&rows));
    report.note("all_agree", rows.iter().all(|r| r.agrees()));
    Ok(report)
}
