#![no_main]

use dvfo_core::env::parse_trace_csv;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(values) = parse_trace_csv(text) {
        assert!(values.iter().all(|v| v.is_finite() && *v > 0.0));
    }
});
