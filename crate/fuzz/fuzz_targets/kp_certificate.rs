#![no_main]

use libfuzzer_sys::fuzz_target;
use dyncolor::bounds::parse_kp_certificate;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(cert) = parse_kp_certificate(text) {
        assert_eq!(parse_kp_certificate(&cert.to_string()).unwrap(), cert);
    }
});
