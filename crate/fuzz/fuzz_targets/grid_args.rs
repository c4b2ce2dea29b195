#![no_main]
use libfuzzer_sys::fuzz_target;
use setconv::GridSpec;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    let args: Vec<&str> = text.split_whitespace().collect();
    if let Ok(grid) = GridSpec::from_args(&args) {
        assert!(grid.len() >= 2);
        assert!(grid.spacing() > 0.0);
        let _ = grid.point(grid.len() - 1);
    }
});
