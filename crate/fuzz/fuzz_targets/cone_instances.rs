#![no_main]
use libfuzzer_sys::fuzz_target;
use setconv::demos::ConeInstance;

fuzz_target!(|data: &[u8]| {
    let Ok(list) = serde_json::from_slice::<Vec<ConeInstance>>(data) else {
        return;
    };
    for inst in &list {
        if inst.point.len() == inst.polyhedron.dim() && inst.polyhedron.contains(&inst.point) {
            let _ = inst.polyhedron.active_set(&inst.point);
        }
    }
});
