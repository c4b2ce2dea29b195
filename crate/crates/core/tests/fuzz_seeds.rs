//! Every corpus seed of the fuzz targets is a valid input.

use std::fs;
use std::path::PathBuf;

use setconv::demos::{ConeInstance, DemoConfig};
use setconv::field::field_from_json;
use setconv::geneq::{HomotopySchedule, SmoothingSchedule};
use setconv::vargeo::ConvexPolyhedron;
use setconv::{GridSpec, NormSpec, PointCloud};

fn seeds(target: &str) -> Vec<(String, String)> {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fuzz/corpus").join(target);
    let mut out: Vec<_> = fs::read_dir(&dir)
        .unwrap_or_else(|e| panic!("{}: {e}", dir.display()))
        .map(|e| e.unwrap().path())
        .map(|p| (p.display().to_string(), fs::read_to_string(&p).unwrap()))
        .collect();
    out.sort();
    assert!(!out.is_empty(), "no seeds for {target}");
    out
}

#[test]
fn json_seeds_parse() {
    for (p, t) in seeds("point_cloud") {
        serde_json::from_str::<PointCloud>(&t).unwrap_or_else(|e| panic!("{p}: {e}"));
    }
    for (p, t) in seeds("norm_spec") {
        let n: NormSpec = serde_json::from_str(&t).unwrap_or_else(|e| panic!("{p}: {e}"));
        n.validate(2).unwrap_or_else(|e| panic!("{p}: {e}"));
    }
    for (p, t) in seeds("field_spec") {
        field_from_json(&t).unwrap_or_else(|e| panic!("{p}: {e}"));
    }
    for (p, t) in seeds("polyhedron") {
        serde_json::from_str::<ConvexPolyhedron>(&t).unwrap_or_else(|e| panic!("{p}: {e}"));
    }
    for (p, t) in seeds("demo_config") {
        DemoConfig::from_json(&t).and_then(|c| c.validate()).unwrap_or_else(|e| panic!("{p}: {e}"));
    }
    for (p, t) in seeds("cone_instances") {
        serde_json::from_str::<Vec<ConeInstance>>(&t).unwrap_or_else(|e| panic!("{p}: {e}"));
    }
}

#[test]
fn schedule_seeds_parse_as_one_kind() {
    for (p, t) in seeds("schedules") {
        let smoothing = serde_json::from_str::<SmoothingSchedule>(&t).is_ok();
        let homotopy = serde_json::from_str::<HomotopySchedule>(&t).is_ok();
        assert!(smoothing != homotopy, "{p}");
    }
}

#[test]
fn grid_seeds_parse() {
    for (p, t) in seeds("grid_args") {
        let args: Vec<&str> = t.split_whitespace().collect();
        GridSpec::from_args(&args).unwrap_or_else(|e| panic!("{p}: {e}"));
    }
}
