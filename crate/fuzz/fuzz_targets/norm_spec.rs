#![no_main]
use libfuzzer_sys::fuzz_target;
use setconv::NormSpec;

fuzz_target!(|data: &[u8]| {
    let Ok(norm) = serde_json::from_slice::<NormSpec>(data) else {
        return;
    };
    for dim in 1..=4 {
        if norm.validate(dim).is_ok() {
            let v = vec![1.0; dim];
            assert!(norm.eval(&v) >= 0.0);
        }
    }
});
