#![no_main]

use libfuzzer_sys::fuzz_target;
use dyncolor::game::parse_transcript;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(t) = parse_transcript(text) {
        assert_eq!(parse_transcript(&t.to_string()).unwrap(), t);
    }
});
