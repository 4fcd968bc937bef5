#![no_main]

use libfuzzer_sys::fuzz_target;
use dyncolor::coloring::{emit_coloring, parse_coloring};

// first byte picks the order, the rest is the file
fuzz_target!(|data: &[u8]| {
    let Some((&n, rest)) = data.split_first() else { return };
    let Ok(text) = std::str::from_utf8(rest) else { return };
    let n = n as usize % 64;
    if let Ok(c) = parse_coloring(text, n) {
        assert_eq!(parse_coloring(&emit_coloring(&c), n).unwrap(), c);
    }
});
