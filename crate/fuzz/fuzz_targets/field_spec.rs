#![no_main]
use libfuzzer_sys::fuzz_target;
use setconv::field::field_from_json;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(f) = field_from_json(text) {
        let x = vec![0.5; f.dim()];
        let _ = f.eval(&x);
    }
});
