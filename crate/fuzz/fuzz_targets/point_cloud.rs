#![no_main]
use libfuzzer_sys::fuzz_target;
use setconv::{truncated_hausdorff, NormSpec, PointCloud};

fuzz_target!(|data: &[u8]| {
    let Ok(cloud) = serde_json::from_slice::<PointCloud>(data) else {
        return;
    };
    if cloud.len() > 512 {
        return;
    }
    let center = vec![0.0; cloud.dim()];
    if let Ok(d) = truncated_hausdorff(&cloud, &cloud, 1.0, &NormSpec::Euclidean, &center) {
        assert_eq!(d.value(), 0.0);
    }
    let back: PointCloud = serde_json::from_str(&serde_json::to_string(&cloud).unwrap()).unwrap();
    assert_eq!(back, cloud);
});
