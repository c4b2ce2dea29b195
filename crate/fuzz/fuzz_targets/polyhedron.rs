#![no_main]
use libfuzzer_sys::fuzz_target;
use setconv::vargeo::ConvexPolyhedron;

fuzz_target!(|data: &[u8]| {
    let Ok(p) = serde_json::from_slice::<ConvexPolyhedron>(data) else {
        return;
    };
    let x = vec![0.0; p.dim()];
    if p.contains(&x) {
        let _ = p.tangent_cone(&x);
        let _ = p.normal_cone(&x);
    }
});
