#![no_main]

use libfuzzer_sys::fuzz_target;
use dyncolor::embedding::{emit_rotation, parse_rotation};
use dyncolor::EmbeddedGraph;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(rot) = parse_rotation(text) {
        assert_eq!(parse_rotation(&emit_rotation(&rot)).unwrap(), rot);
        // face tracing must accept or refuse without panicking
        let _ = EmbeddedGraph::trace(rot);
    }
});
