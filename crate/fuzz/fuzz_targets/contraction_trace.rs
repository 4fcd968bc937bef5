#![no_main]

use libfuzzer_sys::fuzz_target;
use dyncolor::bounds::parse_contraction_trace;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(trace) = parse_contraction_trace(text) {
        assert_eq!(parse_contraction_trace(&trace.to_string()).unwrap(), trace);
    }
});
