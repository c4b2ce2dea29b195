#![no_main]
use libfuzzer_sys::fuzz_target;
use setconv::geneq::{HomotopySchedule, SmoothingSchedule};

fuzz_target!(|data: &[u8]| {
    if let Ok(s) = serde_json::from_slice::<SmoothingSchedule>(data) {
        let _ = s.validate();
    }
    if let Ok(s) = serde_json::from_slice::<HomotopySchedule>(data) {
        let _ = s.validate();
    }
});
